"""Equilibrium problems over boxes, solved by globally minimizing a
regularized gap function with DIRECT-type partitioning and local search."""

from .bench import (RunRecord, data_profile, gate_table, load_suite, performance_profile,
                    run_suite, solve_evals, write_suite_outputs)
from .direct import (DirectConfig, DirectTrace, LbarMode, Partition, Rectangle, initialize,
                     lower_bound_gap, run_direct, select_lbar_potentially_optimal,
                     select_potentially_optimal, trisect)
from .gap import (EvalRecorder, GapEvaluation, InnerSolverError, gap_gradient, gap_value,
                  gap_value_batch, inner_maximizer, make_gap_objective)
from .generators import GenSpec, gen_affine_vi, gen_trig_vi, generate_suite
from .lipschitz import (BoundCache, BoundReport, gap_lipschitz_bound, l1_exact_vertices,
                        l1_tilde, l2_exact, l3_bound, lf_bound, pseudoinverse, spectral_norm)
from .local_search import LocalSearchConfig, coordinate_search
from .problems import (AFFINE_EP, AFFINE_VI, TRIG_VI, AffineEPSpec, AffineVISpec, BoxSet,
                       ProblemFormatError, ProblemInstance, TrigVISpec, eval_F, eval_f,
                       jacobian1_F, load_problem, project_box, save_problem)
from .solver import SolveResult, evals_to_gaps, solve

__version__ = "0.1.0"

__all__ = [
    "AFFINE_EP", "AFFINE_VI", "TRIG_VI",
    "AffineEPSpec", "AffineVISpec", "TrigVISpec",
    "BoundCache", "BoundReport", "BoxSet",
    "DirectConfig", "DirectTrace", "EvalRecorder",
    "GapEvaluation", "GenSpec", "InnerSolverError",
    "LbarMode", "LocalSearchConfig", "Partition",
    "ProblemFormatError", "ProblemInstance", "Rectangle",
    "RunRecord", "SolveResult",
    "coordinate_search", "data_profile", "evals_to_gaps",
    "eval_F", "eval_f", "gap_gradient", "gap_lipschitz_bound",
    "gap_value", "gap_value_batch", "gate_table",
    "gen_affine_vi", "gen_trig_vi", "generate_suite",
    "initialize", "inner_maximizer", "jacobian1_F",
    "l1_exact_vertices", "l1_tilde", "l2_exact", "l3_bound", "lf_bound",
    "load_problem", "load_suite", "lower_bound_gap",
    "make_gap_objective", "performance_profile", "project_box",
    "pseudoinverse", "run_direct", "run_suite",
    "save_problem", "select_lbar_potentially_optimal",
    "select_potentially_optimal", "solve", "solve_evals",
    "spectral_norm", "trisect", "write_suite_outputs",
]

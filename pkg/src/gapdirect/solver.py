"""Full solves: a global partitioning phase followed by local search.

The two phases share one evaluation budget (the benchmark protocol splits it
500 global + 100 local) and one improvement history, so gates and profiles
can be read directly off the combined history.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .direct import VARIANTS, DirectConfig, LbarMode, run_direct
from .gap import make_gap_objective
from .local_search import LocalSearchConfig, coordinate_search
from .problems import ProblemInstance


@dataclass
class SolveResult:
    """Outcome of one (problem, variant) solve with its improvement history.

    ``history`` pairs (evaluation count, best value so far) are appended at
    every improvement, so eval counts are increasing and values decreasing;
    ``gap_bound`` is the optimality-gap certificate at the end of the global
    phase (None when no global phase ran).
    """

    problem_id: str
    variant: str
    alpha: float
    best_x: np.ndarray
    best_phi: float
    evals_used: int
    gap_bound: float | None
    history: list[tuple[int, float]]


def _distinct_best_centers(partition, count: int) -> list[tuple[np.ndarray, float, float]]:
    ranked = sorted(enumerate(partition.rectangles), key=lambda kv: (kv[1].center_value, kv[0]))
    picked: list[tuple[np.ndarray, float, float]] = []
    seen: set[tuple[float, ...]] = set()
    for _, rect in ranked:
        key = tuple(rect.center)
        if key in seen:
            continue
        seen.add(key)
        picked.append((rect.center.copy(), rect.center_value, float(np.max(rect.sides))))
        if len(picked) == count:
            break
    return picked


def solve(p: ProblemInstance, variant: str, alpha: float = 1.0,
          global_budget: int = 500, local_budget: int = 100, *,
          epsilon: float = 1e-4, eta: float = 1e-4,
          lbar_mode: LbarMode | None = None, starts: int = 1,
          inner_tol: float | None = None,
          local_config: LocalSearchConfig | None = None) -> SolveResult:
    """Run the global phase then local search under a shared budget.

    ``starts`` > 1 splits the local budget across that many best distinct
    rectangle centers from the final partition instead of a single run from
    the incumbent.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    if global_budget < 0 or local_budget < 0 or (global_budget == 0 and local_budget == 0):
        raise ValueError("budgets must be nonnegative and not both zero")
    if starts < 1:
        raise ValueError("starts must be at least 1")
    if lbar_mode is None:
        lbar_mode = LbarMode.analytic()

    objective = make_gap_objective(p, alpha, inner_tol)
    history: list[tuple[int, float]] = []
    best_phi = math.inf
    best_x: np.ndarray | None = None
    gap_bound: float | None = None
    global_evals = 0
    start_points: list[tuple[np.ndarray, float | None, float | None]]

    if global_budget >= 1:
        cfg = DirectConfig(budget=global_budget, alpha=alpha, epsilon=epsilon,
                           eta=eta, lbar_mode=lbar_mode, variant=variant)
        trace = run_direct(p, cfg, objective)
        history.extend(trace.history)
        best_phi = trace.best_phi
        best_x = trace.best_x
        gap_bound = trace.gap_bound
        global_evals = trace.eval_count
        # every evaluated point is some rectangle's center, so the first
        # entry is exactly the incumbent together with its rectangle's scale
        start_points = list(_distinct_best_centers(trace.partition, starts))
    else:
        start_points = [(p.box.center, None, None)]

    local_evals = 0
    if local_budget >= 1:
        budgets = [local_budget // len(start_points)] * len(start_points)
        budgets[0] += local_budget - sum(budgets)

        def counted(x: np.ndarray) -> float:
            nonlocal local_evals, best_phi, best_x
            value = float(objective(x))
            local_evals += 1
            if value < best_phi:
                best_phi = value
                best_x = np.array(x)
                history.append((global_evals + local_evals, value))
            return value

        ls_base = local_config if local_config is not None else LocalSearchConfig(budget=1)
        min_width = float(np.min(p.box.widths))
        for (x0, f0, scale), budget in zip(start_points, budgets):
            if budget < 1:
                continue
            step = ls_base.initial_step
            if step is None and scale is not None:
                # start at the incumbent rectangle's scale instead of the
                # box-wide default; the partition already localized the search
                step = min(max(scale, 32.0 * ls_base.step_tol), 0.5 * min_width)
            cfg_ls = LocalSearchConfig(budget=budget, initial_step=step,
                                       step_tol=ls_base.step_tol, gamma=ls_base.gamma,
                                       expansion=ls_base.expansion, contraction=ls_base.contraction)
            coordinate_search(counted, p.box, x0, cfg_ls, f0=f0)

    if best_x is None:
        raise RuntimeError("no evaluations performed")
    return SolveResult(problem_id=p.id, variant=variant, alpha=alpha,
                       best_x=np.array(best_x), best_phi=best_phi,
                       evals_used=global_evals + local_evals,
                       gap_bound=gap_bound, history=history)


def evals_to_gaps(result: SolveResult | list[tuple[int, float]], gates) -> list[float]:
    """For each gate, the first evaluation count with best value <= gate.

    Returns math.inf for gates never reached.
    """
    history = result.history if isinstance(result, SolveResult) else result
    out: list[float] = []
    for gate in gates:
        gate = float(gate)
        if gate <= 0:
            raise ValueError("gates must be positive")
        out.append(next((float(c) for c, v in history if v <= gate), math.inf))
    return out

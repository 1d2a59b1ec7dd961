"""Derivative-free box-constrained local minimization by coordinate search.

Cycles over coordinates, trying steps along +/- e_i under a sufficient
decrease test; steps expand on success and halve on failure, and trial points
are clamped to the box so progress continues along active bounds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problems import BoxSet


@dataclass(frozen=True)
class LocalSearchConfig:
    budget: int
    initial_step: float | None = None  # default: half the smallest box side
    step_tol: float = 1e-6
    gamma: float = 1e-6
    expansion: float = 2.0
    contraction: float = 0.5

    def __post_init__(self):
        if self.budget < 1:
            raise ValueError("budget must be at least 1")
        if self.initial_step is not None and self.initial_step <= 0:
            raise ValueError("initial_step must be positive")
        if not (0 < self.contraction < 1 < self.expansion):
            raise ValueError("need 0 < contraction < 1 < expansion")
        if self.gamma <= 0 or self.step_tol <= 0:
            raise ValueError("gamma and step_tol must be positive")


def coordinate_search(evaluator, C: BoxSet, x0, cfg: LocalSearchConfig,
                      f0: float | None = None) -> tuple[np.ndarray, float, int]:
    """Minimize over C from x0; returns (best point, best value, evaluations used).

    Every trial evaluation counts against ``cfg.budget``.  When ``f0`` (the
    objective at x0) is already known it can be passed to save one evaluation.
    The search is monotone: it never returns a point worse than x0.
    """
    x = np.asarray(x0, dtype=float).copy()
    if x.shape != (C.n,):
        raise ValueError(f"x0 must be a vector of length {C.n}")
    if not C.contains(x):
        raise ValueError("x0 must lie inside the box")

    evals = 0
    if f0 is None:
        f0 = float(evaluator(x))
        evals += 1
    fx = float(f0)

    step0 = cfg.initial_step if cfg.initial_step is not None else 0.5 * float(np.min(C.widths))
    steps = np.full(C.n, step0)
    max_steps = C.widths.copy()
    last_dir = np.ones(C.n)  # try the previously successful direction first

    while evals < cfg.budget and float(steps.max()) >= cfg.step_tol:
        for i in range(C.n):
            if evals >= cfg.budget:
                break
            s = float(steps[i])
            success = False
            for direction in (last_dir[i], -last_dir[i]):
                ti = min(max(x[i] + direction * s, C.lower[i]), C.upper[i])
                if ti == x[i]:
                    continue  # step fully clamped away, nothing to try
                trial = x.copy()
                trial[i] = ti
                ft = float(evaluator(trial))
                evals += 1
                if ft <= fx - cfg.gamma * s * s:
                    # expand along the successful direction while the
                    # sufficient decrease keeps improving
                    t = s
                    while evals < cfg.budget:
                        t_next = min(t * cfg.expansion, max_steps[i])
                        if t_next <= t:
                            break
                        ui = min(max(x[i] + direction * t_next, C.lower[i]), C.upper[i])
                        if ui == trial[i]:
                            break
                        probe = x.copy()
                        probe[i] = ui
                        fp = float(evaluator(probe))
                        evals += 1
                        if fp <= fx - cfg.gamma * t_next * t_next and fp < ft:
                            trial, ft, t = probe, fp, t_next
                        else:
                            break
                    x, fx = trial, ft
                    steps[i] = t
                    last_dir[i] = direction
                    success = True
                    break
                if evals >= cfg.budget:
                    break
            if not success:
                steps[i] = s * cfg.contraction
    return x, fx, evals

"""The regularized gap function and its inner maximization.

For a problem with bifunction f(x, y) = <F(x, y), y - x> over the box C,

    phi_alpha(x) = max_{y in C} [ -f(x, y) - (alpha/2) ||y - x||^2 ].

phi_alpha is nonnegative on C and vanishes exactly at solutions, so solving
the problem means driving phi_alpha to zero.  For the VI classes the inner
maximizer has the closed form  y = proj_C(x - F(x)/alpha)  when alpha > 0;
for affine EPs the inner problem is a concave box-constrained QP solved by
projected gradient ascent.

One call to :func:`gap_value` is the unit counted by every evaluation budget,
regardless of how many inner iterations it takes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problems import AFFINE_EP, TRIG_VI, BoxSet, ProblemInstance, eval_F, jacobian1_F, project_box

_MAX_INNER_ITERATIONS = 10_000


class InnerSolverError(RuntimeError):
    """Projected gradient ascent failed to reach the requested tolerance.

    Carries the best iterate found so the caller can inspect or reuse it.
    """

    def __init__(self, message: str, best: np.ndarray | None = None,
                 iterations: int = 0, residual: float = float("inf")):
        super().__init__(message)
        self.best = best
        self.iterations = iterations
        self.residual = residual


@dataclass(frozen=True)
class GapEvaluation:
    """Value and inner-maximizer diagnostics for one gap-function evaluation."""

    value: float
    maximizer: np.ndarray
    inner_iterations: int
    inner_residual: float


def _check_x(p: ProblemInstance, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (p.n,):
        raise ValueError(f"x must be a vector of length {p.n}")
    return x


def _vi_maximizer(box: BoxSet, x: np.ndarray, Fx: np.ndarray, alpha: float) -> np.ndarray:
    if alpha > 0:
        return project_box(box, x - Fx / alpha)
    # alpha = 0: the inner problem is linear in y, solved at a vertex.
    # F_i = 0 leaves y_i free; keeping y_i = x_i makes phi continuous.
    return np.where(Fx > 0, box.lower, np.where(Fx < 0, box.upper, np.clip(x, box.lower, box.upper)))


def _ep_strong_concavity_check(S: np.ndarray, alpha: float) -> None:
    if alpha > 0:
        return
    scale = max(float(np.linalg.norm(S, 2)), 1.0)
    if float(np.linalg.eigvalsh(S).min()) <= 1e-12 * scale:
        raise ValueError("inner problem not strongly concave: alpha = 0 and Q + Q^T is singular")


def _ep_maximizer(p: ProblemInstance, x: np.ndarray, alpha: float,
                  tol: float | None) -> tuple[np.ndarray, int, float]:
    s = p.spec
    S = s.Q + s.Q.T
    _ep_strong_concavity_check(S, alpha)
    lips = float(np.linalg.norm(S, 2)) + alpha
    box = p.box
    affine = s.P @ x + s.r
    qtx = s.Q.T @ x

    y = project_box(box, x)
    if tol is None:
        g0 = -float(eval_F(p, x, y) @ (y - x)) - 0.5 * alpha * float((y - x) @ (y - x))
        tol = 1e-9 * (1.0 + abs(g0))
    for it in range(1, _MAX_INNER_ITERATIONS + 1):
        grad = -(S @ y) + qtx - affine - alpha * (y - x)
        y_next = project_box(box, y + grad / lips)
        residual = float(np.linalg.norm(y - y_next)) * lips
        if residual <= tol:
            return y_next, it, residual
        y = y_next
    raise InnerSolverError(
        f"inner maximization did not converge in {_MAX_INNER_ITERATIONS} iterations "
        f"(residual {residual:.3e} > tol {tol:.3e})",
        best=y, iterations=_MAX_INNER_ITERATIONS, residual=residual)


def inner_maximizer(p: ProblemInstance, x, alpha: float, tol: float | None = None) -> np.ndarray:
    """The maximizer y_alpha(x) of the inner problem over C."""
    x = _check_x(p, x)
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    if p.kind == AFFINE_EP:
        y, _, _ = _ep_maximizer(p, x, alpha, tol)
        return y
    return _vi_maximizer(p.box, x, eval_F(p, x, x), alpha)


def gap_value(p: ProblemInstance, x, alpha: float, tol: float | None = None) -> GapEvaluation:
    """Evaluate phi_alpha(x) together with its maximizer and inner diagnostics."""
    x = _check_x(p, x)
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    if p.kind == AFFINE_EP:
        y, iters, residual = _ep_maximizer(p, x, alpha, tol)
        Fxy = eval_F(p, x, y)
    else:
        Fxy = eval_F(p, x, x)
        y = _vi_maximizer(p.box, x, Fxy, alpha)
        iters, residual = 0, 0.0
    d = y - x
    value = -float(Fxy @ d) - 0.5 * alpha * float(d @ d)
    return GapEvaluation(value=value, maximizer=y, inner_iterations=iters, inner_residual=residual)


def gap_gradient(p: ProblemInstance, x, alpha: float, tol: float | None = None) -> np.ndarray:
    """Gradient of phi_alpha at x (alpha > 0 required for differentiability).

    With y* the inner maximizer, grad phi_alpha(x) = F(x, y*)
    + [alpha*I - J_x F(x, y*)]^T (y* - x) for the bifunction <F(x,y), y-x>.
    """
    x = _check_x(p, x)
    if alpha <= 0:
        raise ValueError("gap_gradient requires alpha > 0")
    if p.kind == AFFINE_EP:
        y, _, _ = _ep_maximizer(p, x, alpha, tol)
    else:
        y = _vi_maximizer(p.box, x, eval_F(p, x, x), alpha)
    d = y - x
    return eval_F(p, x, y) - jacobian1_F(p, x, y).T @ d + alpha * d


def gap_value_batch(p: ProblemInstance, X, alpha: float, tol: float = 1e-9) -> np.ndarray:
    """Evaluate phi_alpha at every row of X (m x n); used for sampling-heavy checks.

    For affine EPs the projected gradient ascent runs on all rows at once,
    with converged rows frozen.  ``tol`` is an absolute residual tolerance.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != p.n:
        raise ValueError(f"points must have {p.n} columns")
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    box = p.box
    s = p.spec
    if p.kind != AFFINE_EP:
        FX = X @ s.P.T + s.r
        if p.kind == TRIG_VI:
            FX = FX + s.w * np.sin(s.v * X)
        if alpha > 0:
            Y = np.clip(X - FX / alpha, box.lower, box.upper)
        else:
            Y = np.where(FX > 0, box.lower, np.where(FX < 0, box.upper, np.clip(X, box.lower, box.upper)))
        D = Y - X
        return -np.sum(FX * D, axis=1) - 0.5 * alpha * np.sum(D * D, axis=1)

    S = s.Q + s.Q.T
    _ep_strong_concavity_check(S, alpha)
    lips = float(np.linalg.norm(S, 2)) + alpha
    affine = X @ s.P.T + s.r
    qtx = X @ s.Q
    Y = np.clip(X, box.lower, box.upper)
    active = np.arange(X.shape[0])
    for _ in range(_MAX_INNER_ITERATIONS):
        Xa, Ya = X[active], Y[active]
        grad = -(Ya @ S.T) + qtx[active] - affine[active] - alpha * (Ya - Xa)
        Y_next = np.clip(Ya + grad / lips, box.lower, box.upper)
        residual = np.linalg.norm(Ya - Y_next, axis=1) * lips
        Y[active] = Y_next
        active = active[residual > tol]
        if active.size == 0:
            break
    if active.size:
        raise InnerSolverError(
            f"batched inner maximization left {active.size} rows unconverged", best=Y)
    D = Y - X
    FXY = affine + Y @ s.Q.T
    return -np.sum(FXY * D, axis=1) - 0.5 * alpha * np.sum(D * D, axis=1)


def make_gap_objective(p: ProblemInstance, alpha: float, tol: float | None = None):
    """A plain x -> phi_alpha(x) callable, the unit every budget counts."""

    def objective(x: np.ndarray) -> float:
        return gap_value(p, x, alpha, tol).value

    return objective


class EvalRecorder:
    """Wraps an objective, counting calls and recording best-so-far improvements.

    ``history`` holds (evaluation index, best value) pairs appended whenever
    the best value improves, so it is nondecreasing in count and strictly
    decreasing in value.
    """

    def __init__(self, objective):
        self._objective = objective
        self.count = 0
        self.best_value = float("inf")
        self.best_x: np.ndarray | None = None
        self.history: list[tuple[int, float]] = []

    def __call__(self, x: np.ndarray) -> float:
        value = float(self._objective(x))
        self.count += 1
        if value < self.best_value:
            self.best_value = value
            self.best_x = np.array(x, dtype=float)
            self.history.append((self.count, value))
        return value

"""Lipschitz-constant overestimates for the regularized gap function.

Three families of bounds are computed over a sub-box B of the feasible box C:

* ``thm31``: L1 + L2*LF + alpha*L2        (any alpha >= 0)
* ``thm32``: L1 + L2*L3(alpha)            (alpha > 0)
* ``thm33``: L1 + L1*L3(alpha)/alpha      (VI classes with B inside C, alpha > 0)

where L1 bounds max ||F|| over B x C, L2 = max ||x - y|| over B x C (exact),
L3(alpha) bounds max ||alpha*I - J_x F||, and LF is a Lipschitz constant of
F(., y).  All norms are Euclidean / spectral.  The returned ``chosen`` value
is the minimum of the applicable bounds.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .problems import AFFINE_EP, TRIG_VI, BoxSet, ProblemInstance

# Inclusion tests between floating-point boxes tolerate last-ulp drift.
_BOX_ATOL = 1e-12


def spectral_norm(A: np.ndarray) -> float:
    """Largest singular value of A."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    return float(np.linalg.norm(A, 2))


def pseudoinverse(A: np.ndarray) -> np.ndarray:
    """Moore-Penrose pseudoinverse; singular values below 1e-12 * sigma_max are dropped."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    return np.linalg.pinv(A, rcond=1e-12)


class _AffineNormTerms:
    """Cached pieces for bounding max ||P x + r|| over boxes [a, b]."""

    __slots__ = ("P", "r", "pnorm", "shift", "resid")

    def __init__(self, P: np.ndarray, r: np.ndarray, pnorm: float | None = None,
                 pplus: np.ndarray | None = None):
        self.P = P
        self.r = r
        self.pnorm = spectral_norm(P) if pnorm is None else pnorm
        if pplus is None:
            pplus = pseudoinverse(P)
        self.shift = pplus @ r
        self.resid = float(np.linalg.norm(r - P @ self.shift))

    def bound(self, a: np.ndarray, b: np.ndarray) -> float:
        c = np.maximum(np.abs(a + self.shift), np.abs(b + self.shift))
        first = self.resid + self.pnorm * float(np.linalg.norm(c))
        tail = self.pnorm * float(np.linalg.norm(b - a))
        second = float(np.linalg.norm(self.P @ a + self.r)) + tail
        third = float(np.linalg.norm(self.P @ b + self.r)) + tail
        return min(first, second, third)


def _box_args(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("box bounds must be vectors of equal length")
    if np.any(a > b):
        raise ValueError("box bounds require a <= b componentwise")
    return a, b


def l1_tilde(P: np.ndarray, r: np.ndarray, a, b) -> float:
    """Overestimate of max ||P x + r|| over the box [a, b].

    Minimum of three easily computed upper bounds; always >= the exact
    vertex maximum, but not necessarily tight.
    """
    a, b = _box_args(a, b)
    return _AffineNormTerms(np.asarray(P, dtype=float), np.asarray(r, dtype=float)).bound(a, b)


def l1_exact_vertices(P: np.ndarray, r: np.ndarray, a, b) -> float:
    """Exact max ||P x + r|| over [a, b] by vertex enumeration (test oracle, n <= 12)."""
    a, b = _box_args(a, b)
    n = a.shape[0]
    if n > 12:
        raise ValueError("vertex enumeration is limited to n <= 12")
    P = np.atleast_2d(np.asarray(P, dtype=float))
    r = np.asarray(r, dtype=float)
    best = 0.0
    for picks in itertools.product((0, 1), repeat=n):
        x = np.where(np.asarray(picks, dtype=bool), b, a)
        best = max(best, float(np.linalg.norm(P @ x + r)))
    return best


def l2_exact(B: BoxSet, C: BoxSet) -> float:
    """Exact max ||x - y|| over x in B, y in C (componentwise separable)."""
    if B.n != C.n:
        raise ValueError("B and C must have the same dimension")
    per_dim = np.maximum((C.upper - B.lower) ** 2, (C.lower - B.upper) ** 2)
    return float(np.sqrt(per_dim.sum()))


def l3_bound(p: ProblemInstance, B: BoxSet, alpha: float) -> float:
    """Bound on max ||alpha*I - J_x F(x, y)||; exact for the affine classes.

    The trigonometric overestimate ||alpha*I - P|| + max_i w_i v_i does not
    depend on B, which keeps it valid (if loose) on any sub-box.
    """
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    s = p.spec
    base = spectral_norm(alpha * np.eye(p.n) - s.P)
    if p.kind == TRIG_VI:
        return base + float(np.max(s.w * s.v))
    return base


def lf_bound(p: ProblemInstance) -> float:
    """Lipschitz constant of x -> F(x, y), uniform in y."""
    s = p.spec
    base = spectral_norm(s.P)
    if p.kind == TRIG_VI:
        return base + float(np.max(s.w * s.v))
    return base


@dataclass(frozen=True)
class BoundReport:
    """All applicable Lipschitz bounds for the gap function over one sub-box."""

    l1_bound: float
    l2: float
    l3_bound: float
    lf_bound: float
    thm31: float
    thm32: float | None
    thm33: float | None
    chosen: float


class BoundCache:
    """Instance-level constants shared by every sub-box bound evaluation.

    Spectral norms, pseudoinverse products and the C-side contribution for
    affine EPs depend only on (problem, alpha), so they are computed once.
    """

    def __init__(self, p: ProblemInstance, alpha: float):
        if alpha < 0:
            raise ValueError("alpha must be nonnegative")
        self.problem = p
        self.alpha = float(alpha)
        s = p.spec
        pnorm = spectral_norm(s.P)
        pplus = pseudoinverse(s.P)
        self.l3 = l3_bound(p, p.box, alpha)
        self.lf = lf_bound(p)
        if p.kind == AFFINE_EP:
            self._p_terms = {
                key: _AffineNormTerms(s.P, vec, pnorm=pnorm, pplus=pplus)
                for key, vec in (("zero", np.zeros(p.n)), ("r", s.r), ("half", 0.5 * s.r))
            }
            qnorm = spectral_norm(s.Q)
            qplus = pseudoinverse(s.Q)
            l, u = p.box.lower, p.box.upper
            self._q_const = {
                key: _AffineNormTerms(s.Q, vec, pnorm=qnorm, pplus=qplus).bound(l, u)
                for key, vec in (("zero", np.zeros(p.n)), ("r", s.r), ("half", 0.5 * s.r))
            }
            self._wnorm = 0.0
        else:
            self._p_terms = {"r": _AffineNormTerms(s.P, s.r, pnorm=pnorm, pplus=pplus)}
            self._q_const = {}
            self._wnorm = float(np.linalg.norm(s.w)) if p.kind == TRIG_VI else 0.0

    def l1_bound(self, a: np.ndarray, b: np.ndarray) -> float:
        if self.problem.kind == AFFINE_EP:
            m1 = self._p_terms["zero"].bound(a, b) + self._q_const["r"]
            m2 = self._p_terms["r"].bound(a, b) + self._q_const["zero"]
            m3 = self._p_terms["half"].bound(a, b) + self._q_const["half"]
            return min(m1, m2, m3)
        return self._p_terms["r"].bound(a, b) + self._wnorm


def gap_lipschitz_bound(p: ProblemInstance, B: BoxSet, alpha: float,
                        cache: BoundCache | None = None) -> BoundReport:
    """Compute all applicable Lipschitz bounds for the gap function over B."""
    if B.n != p.n:
        raise ValueError("sub-box dimension does not match the problem")
    C = p.box
    if np.any(B.lower > C.upper) or np.any(B.upper < C.lower):
        raise ValueError("sub-box B must intersect the feasible box C")
    if cache is None:
        cache = BoundCache(p, alpha)
    elif cache.problem is not p or cache.alpha != alpha:
        raise ValueError("cache was built for a different problem or alpha")

    a, b = B.lower, B.upper
    l1 = cache.l1_bound(a, b)
    l2 = l2_exact(B, C)
    l3 = cache.l3
    lf = cache.lf

    thm31 = l1 + l2 * lf + alpha * l2
    thm32 = l1 + l2 * l3 if alpha > 0 else None
    scale = _BOX_ATOL * (1.0 + float(np.max(np.abs(C.widths))))
    inside = bool(np.all(B.lower >= C.lower - scale) and np.all(B.upper <= C.upper + scale))
    thm33 = l1 + l1 * l3 / alpha if (alpha > 0 and p.kind != AFFINE_EP and inside) else None

    present = [v for v in (thm31, thm32, thm33) if v is not None]
    if not present:
        raise ValueError("no applicable Lipschitz bound for this configuration")
    return BoundReport(l1_bound=l1, l2=l2, l3_bound=l3, lf_bound=lf,
                       thm31=thm31, thm32=thm32, thm33=thm33, chosen=min(present))

"""DIRECT-type partitioning of the feasible box.

The engine maintains a partition of the box C into hyperrectangles, each
carrying the objective value at its center.  Every iteration it selects a set
of rectangles — either *potentially optimal* (classic rule) or
*Lbar-potentially optimal* (a rule that exploits per-rectangle overestimates
of the local Lipschitz constant) — and trisects each of them along its
longest sides.

Rectangles are addressed exactly: per dimension a trisection depth d and an
offset o in {0, ..., 3^d - 1}, so side lengths, centers and diameters are
reproducible bit-for-bit and diameter classes can be grouped without
floating-point fuzz.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gap import EvalRecorder, make_gap_objective
from .lipschitz import BoundCache, gap_lipschitz_bound
from .problems import BoxSet, ProblemInstance

VARIANT_DIRECT = "direct"
VARIANT_LDIRECT = "ldirect"
VARIANTS = (VARIANT_DIRECT, VARIANT_LDIRECT)

# Positive floor for slope-estimated Lipschitz bounds before any slopes exist.
_SLOPE_FLOOR = 1e-12


@dataclass(frozen=True)
class LbarMode:
    """How per-rectangle Lipschitz overestimates are produced.

    * ``analytic``: bound computed over each rectangle's own box.
    * ``constant``: a single user-supplied value for every rectangle.
    * ``slope``: safety factor times the largest observed |df|/|dx| slope
      between evaluated centers (black-box fallback).
    """

    kind: str
    value: float | None = None

    def __post_init__(self):
        if self.kind not in ("analytic", "constant", "slope"):
            raise ValueError(f"unknown lbar mode {self.kind!r}")
        if self.kind == "analytic" and self.value is not None:
            raise ValueError("analytic mode takes no value")
        if self.kind in ("constant", "slope") and (self.value is None or self.value <= 0):
            raise ValueError(f"{self.kind} mode requires a positive value")

    @classmethod
    def analytic(cls) -> "LbarMode":
        return cls("analytic")

    @classmethod
    def constant(cls, value: float) -> "LbarMode":
        return cls("constant", float(value))

    @classmethod
    def slope(cls, safety: float) -> "LbarMode":
        return cls("slope", float(safety))

    @classmethod
    def parse(cls, text: str) -> "LbarMode":
        """Parse 'analytic', 'constant:<v>' or 'slope:<f>'."""
        name, _, arg = text.partition(":")
        if name == "analytic":
            if arg:
                raise ValueError("analytic mode takes no argument")
            return cls.analytic()
        if name in ("constant", "slope"):
            try:
                return cls(name, float(arg))
            except ValueError as exc:
                raise ValueError(f"invalid lbar spec {text!r}: {exc}") from exc
        raise ValueError(f"invalid lbar spec {text!r}")


@dataclass(frozen=True)
class DirectConfig:
    budget: int
    alpha: float = 1.0
    epsilon: float = 1e-4
    eta: float = 1e-4
    lbar_mode: LbarMode = LbarMode.analytic()
    variant: str = VARIANT_DIRECT

    def __post_init__(self):
        if self.budget < 1:
            raise ValueError("budget must be at least 1")
        if self.epsilon <= 0 or self.eta <= 0:
            raise ValueError("epsilon and eta must be positive")
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")


@dataclass(eq=False)
class Rectangle:
    """One cell of the partition with its exact ternary address."""

    depth: tuple[int, ...]
    offset: tuple[int, ...]
    lower: np.ndarray
    upper: np.ndarray
    center: np.ndarray
    center_value: float
    sides: np.ndarray
    diameter: float
    lbar: float | None = None


def _make_rectangle(box: BoxSet, depth: tuple[int, ...], offset: tuple[int, ...],
                    value: float) -> Rectangle:
    n = box.n
    lower = np.empty(n)
    upper = np.empty(n)
    center = np.empty(n)
    sides = np.empty(n)
    for i, (d, o) in enumerate(zip(depth, offset)):
        t = 3 ** d
        width = box.widths[i]
        base = box.lower[i]
        sides[i] = width / float(t)
        center[i] = base + width * (float(2 * o + 1) / float(2 * t))
        lower[i] = base if o == 0 else base + width * (float(o) / float(t))
        upper[i] = box.upper[i] if o + 1 == t else base + width * (float(o + 1) / float(t))
    ordered = np.sort(sides)
    diameter = float(np.sqrt(np.sum(ordered * ordered)))
    return Rectangle(depth=depth, offset=offset, lower=lower, upper=upper,
                     center=center, center_value=value, sides=sides, diameter=diameter)


class _AnalyticLbar:
    def __init__(self, p: ProblemInstance, alpha: float):
        self._problem = p
        self._alpha = alpha
        self._cache = BoundCache(p, alpha)

    def for_rectangle(self, rect: Rectangle) -> float:
        box = BoxSet(lower=rect.lower, upper=rect.upper)
        return gap_lipschitz_bound(self._problem, box, self._alpha, cache=self._cache).chosen

    def observe(self, x: np.ndarray, value: float) -> None:
        pass


class _ConstantLbar:
    def __init__(self, value: float):
        self._value = value

    def for_rectangle(self, rect: Rectangle) -> float:
        return self._value

    def observe(self, x: np.ndarray, value: float) -> None:
        pass


class _SlopeLbar:
    """Tracks the steepest slope between every pair of evaluated centers."""

    def __init__(self, safety: float):
        self._safety = safety
        self._points: list[np.ndarray] = []
        self._values: list[float] = []
        self._max_slope = 0.0

    def for_rectangle(self, rect: Rectangle) -> float:
        return max(self._safety * self._max_slope, _SLOPE_FLOOR)

    def observe(self, x: np.ndarray, value: float) -> None:
        if self._points:
            pts = np.asarray(self._points)
            vals = np.asarray(self._values)
            dist = np.linalg.norm(pts - x, axis=1)
            ok = dist > 0
            if np.any(ok):
                slope = float(np.max(np.abs(vals[ok] - value) / dist[ok]))
                self._max_slope = max(self._max_slope, slope)
        self._points.append(np.array(x))
        self._values.append(float(value))


def _make_lbar_provider(p: ProblemInstance | None, cfg: DirectConfig):
    mode = cfg.lbar_mode
    if mode.kind == "analytic":
        if p is None:
            raise ValueError("analytic lbar mode requires a problem instance")
        return _AnalyticLbar(p, cfg.alpha)
    if mode.kind == "constant":
        return _ConstantLbar(mode.value)
    return _SlopeLbar(mode.value)


class Partition:
    """The rectangle store plus evaluation bookkeeping for one run."""

    def __init__(self, box: BoxSet, lbar_provider):
        self.box = box
        self.rectangles: list[Rectangle] = []
        self.eval_count = 0
        self.phi_min = float("inf")
        self.best_point: np.ndarray | None = None
        self._lbar_provider = lbar_provider

    def _register_value(self, point: np.ndarray, value: float) -> None:
        self._lbar_provider.observe(point, value)
        if value < self.phi_min:
            self.phi_min = value
            self.best_point = np.array(point)

    def _new_rectangle(self, depth, offset, value) -> Rectangle:
        rect = _make_rectangle(self.box, depth, offset, value)
        rect.lbar = self._lbar_provider.for_rectangle(rect)
        return rect


def initialize(p: ProblemInstance, cfg: DirectConfig, evaluator) -> Partition:
    """Start a partition: the whole box as one rectangle with its center evaluated."""
    box = p.box
    part = Partition(box, _make_lbar_provider(p, cfg))
    n = box.n
    depth = (0,) * n
    offset = (0,) * n
    center = _make_rectangle(box, depth, offset, 0.0).center
    value = float(evaluator(center))
    part.eval_count = 1
    part._register_value(center, value)
    part.rectangles.append(part._new_rectangle(depth, offset, value))
    return part


def _diameter_classes(rects: list[Rectangle]) -> tuple[np.ndarray, np.ndarray, list[list[int]]]:
    """Group rectangle indices by exact diameter; returns (diams, min values, members)."""
    groups: dict[float, list[int]] = {}
    for i, rect in enumerate(rects):
        groups.setdefault(rect.diameter, []).append(i)
    diams = np.array(sorted(groups))
    values = np.empty(diams.shape[0])
    members: list[list[int]] = []
    for k, dk in enumerate(diams):
        idx = groups[float(dk)]
        values[k] = min(rects[i].center_value for i in idx)
        members.append(idx)
    return diams, values, members


def _class_slope_window(diams: np.ndarray, values: np.ndarray, k: int) -> tuple[float, float]:
    """Feasible-slope window for class k against every other class.

    Returns (lo, hi): the tightest lower bound induced by smaller-diameter
    classes and upper bound induced by larger-diameter ones.
    """
    dk, vk = diams[k], values[k]
    lo, hi = -np.inf, np.inf
    if k > 0:
        lo = float(np.max(2.0 * (vk - values[:k]) / (dk - diams[:k])))
    if k + 1 < diams.shape[0]:
        hi = float(np.min(2.0 * (values[k + 1:] - vk) / (diams[k + 1:] - dk)))
    return lo, hi


def select_potentially_optimal(part: Partition, epsilon: float) -> list[int]:
    """Indices of rectangles that are potentially optimal for some constant > 0.

    A rectangle qualifies when its center value is minimal in its diameter
    class (ties all kept) and some constant L > 0 makes its center-based lower
    bound best among all rectangles and at least epsilon*|phi_min| below the
    incumbent.
    """
    rects = part.rectangles
    if not rects:
        return []
    phi_min = min(r.center_value for r in rects)
    threshold = phi_min - epsilon * abs(phi_min)
    diams, values, members = _diameter_classes(rects)
    selected: list[int] = []
    for k in range(diams.shape[0]):
        dk = diams[k]
        if dk <= 0:
            continue
        lo, hi = _class_slope_window(diams, values, k)
        lo = max(lo, 2.0 * (values[k] - threshold) / dk)
        if hi > 0 and lo <= hi:
            selected.extend(i for i in members[k] if rects[i].center_value == values[k])
    return sorted(selected)


def select_lbar_potentially_optimal(part: Partition, epsilon: float, eta: float) -> list[int]:
    """Indices selected by the Lipschitz-informed rule.

    Rectangle h qualifies if either (i) some constant in (0, lbar_h) makes its
    lower bound best and sufficiently below the incumbent (with the improvement
    floor eta), or (ii) its bound at lbar_h itself is best among all rectangles.
    """
    rects = part.rectangles
    if not rects:
        return []
    for rect in rects:
        if rect.lbar is None or rect.lbar <= 0:
            raise ValueError("every rectangle needs a positive lbar for this selection rule")
    phi_min = min(r.center_value for r in rects)
    margin = epsilon * max(abs(phi_min), eta)
    diams, values, members = _diameter_classes(rects)
    selected: list[int] = []
    for k in range(diams.shape[0]):
        dk = diams[k]
        if dk <= 0:
            continue
        lo, hi = _class_slope_window(diams, values, k)
        lo = max(lo, 2.0 * (values[k] - phi_min + margin) / dk)
        for i in members[k]:
            rect = rects[i]
            if rect.center_value != values[k]:
                continue
            # (i): the slope window must meet the open interval (0, lbar_h).
            if hi > 0 and lo <= hi and lo < rect.lbar:
                selected.append(i)
                continue
            # (ii): best bound when the overestimate itself is used.
            half = 0.5 * rect.lbar
            best = float(np.min(values - half * diams))
            if rect.center_value - half * dk <= best:
                selected.append(i)
    return sorted(selected)


def trisect(part: Partition, h: int, evaluator) -> Partition:
    """Split rectangle h along its longest sides, sampling two points per side.

    Dimensions tied for the longest side are all split, ordered so the
    dimension with the better sampled value keeps the larger surrounding
    piece; the parent center survives as the innermost child's center.
    """
    rects = part.rectangles
    rect = rects[h]
    longest = float(np.max(rect.sides))
    if longest <= 0:
        raise ValueError("cannot trisect a zero-volume rectangle")
    dims = [int(j) for j in np.flatnonzero(rect.sides == longest)]

    samples: dict[int, tuple[float, float]] = {}
    for j in dims:
        d_child = rect.depth[j] + 1
        o_base = 3 * rect.offset[j]
        vals = []
        for o_child in (o_base, o_base + 2):
            t = 3 ** d_child
            coord = part.box.lower[j] + part.box.widths[j] * (float(2 * o_child + 1) / float(2 * t))
            point = rect.center.copy()
            point[j] = coord
            value = float(evaluator(point))
            part.eval_count += 1
            part._register_value(point, value)
            vals.append(value)
        samples[j] = (vals[0], vals[1])

    order = sorted(dims, key=lambda j: (min(samples[j]), j))
    cur_depth = list(rect.depth)
    cur_offset = list(rect.offset)
    children: list[Rectangle] = []
    for j in order:
        lo_val, hi_val = samples[j]
        child_depth = list(cur_depth)
        child_depth[j] += 1
        for o_child, value in ((3 * rect.offset[j], lo_val), (3 * rect.offset[j] + 2, hi_val)):
            child_offset = list(cur_offset)
            child_offset[j] = o_child
            children.append(part._new_rectangle(tuple(child_depth), tuple(child_offset), value))
        cur_depth[j] += 1
        cur_offset[j] = 3 * rect.offset[j] + 1
    children.append(part._new_rectangle(tuple(cur_depth), tuple(cur_offset), rect.center_value))

    rects.pop(h)
    rects.extend(children)
    return part


def lower_bound_gap(part: Partition) -> tuple[int, float]:
    """Certificate rectangle and optimality-gap bound.

    Returns the index minimizing value - (lbar/2)*diameter and the bound
    (lbar/2)*diameter there; when lbar values are valid local Lipschitz
    overestimates, the best gap value is at most that bound.
    """
    rects = part.rectangles
    if not rects:
        raise ValueError("empty partition")
    for rect in rects:
        if rect.lbar is None or rect.lbar <= 0:
            raise ValueError("every rectangle needs a positive lbar for the gap certificate")
    scores = np.array([r.center_value - 0.5 * r.lbar * r.diameter for r in rects])
    h = int(np.argmin(scores))
    return h, 0.5 * rects[h].lbar * rects[h].diameter


@dataclass
class DirectTrace:
    """Everything a run produced: improvement history, certificate, partition."""

    history: list[tuple[int, float]]
    best_x: np.ndarray
    best_phi: float
    eval_count: int
    gap_bound: float | None
    iterations: list[tuple[int, int, float, float, int]]
    partition: Partition


def run_direct(p: ProblemInstance, cfg: DirectConfig, objective=None) -> DirectTrace:
    """Run the configured partitioning variant until the budget is spent.

    The trisection in progress when the budget is hit is finished (overshoot
    at most 2n evaluations, all counted).  Deterministic given (p, cfg).
    """
    if objective is None:
        objective = make_gap_objective(p, cfg.alpha)
    recorder = objective if isinstance(objective, EvalRecorder) else EvalRecorder(objective)
    part = initialize(p, cfg, recorder)

    def bound_now() -> float:
        return lower_bound_gap(part)[1]

    rows = [(0, part.eval_count, part.phi_min, bound_now(), len(part.rectangles))]
    iteration = 0
    while part.eval_count < cfg.budget:
        iteration += 1
        if cfg.variant == VARIANT_LDIRECT:
            selected = select_lbar_potentially_optimal(part, cfg.epsilon, cfg.eta)
        else:
            selected = select_potentially_optimal(part, cfg.epsilon)
        if not selected:
            # Degenerate partitions can leave both rules empty; fall back to
            # the certificate argmin so the run always progresses.
            selected = [lower_bound_gap(part)[0]]
        for h in sorted(selected, reverse=True):
            trisect(part, h, recorder)
            if part.eval_count >= cfg.budget:
                break
        rows.append((iteration, part.eval_count, part.phi_min, bound_now(), len(part.rectangles)))

    _, bound = lower_bound_gap(part)
    return DirectTrace(history=list(recorder.history), best_x=np.array(part.best_point),
                       best_phi=part.phi_min, eval_count=part.eval_count,
                       gap_bound=bound, iterations=rows, partition=part)

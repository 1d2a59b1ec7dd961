"""Equilibrium problems of the form f(x, y) = <F(x, y), y - x> over a box.

Three problem classes are supported:

* affine VI:          F(x) = P x + r
* trigonometric VI:   F(x) = P x + r + T(x),  T_i(x) = w_i sin(v_i x_i)
* affine EP:          F(x, y) = P x + Q y + r

Instances are immutable after construction (arrays are frozen), so they can
be shared freely across threads.  All operations in this module are pure.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

AFFINE_VI = "affine-vi"
TRIG_VI = "trig-vi"
AFFINE_EP = "affine-ep"

PROBLEM_CLASSES = (AFFINE_VI, TRIG_VI, AFFINE_EP)

# Relative eigenvalue floor for the Q + Q^T positive-semidefiniteness check.
_PSD_FLOOR = 1e-10


class ProblemFormatError(ValueError):
    """A problem file could not be parsed or violates an invariant."""


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _require_finite(a: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} must have finite entries")


@dataclass(frozen=True)
class BoxSet:
    """A box [lower, upper] in R^n; degenerate sides (lower == upper) are allowed."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = _freeze(np.atleast_1d(self.lower))
        upper = _freeze(np.atleast_1d(self.upper))
        if lower.ndim != 1 or upper.ndim != 1 or lower.shape != upper.shape:
            raise ValueError("box bounds must be 1-D vectors of equal length")
        _require_finite(lower, "lower")
        _require_finite(upper, "upper")
        if np.any(lower > upper):
            raise ValueError("box requires lower[i] <= upper[i] for all i")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def n(self) -> int:
        return self.lower.shape[0]

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))

    def contains(self, x: np.ndarray, atol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower - atol) and np.all(x <= self.upper + atol))


@dataclass(frozen=True)
class AffineVISpec:
    """Affine VI operator F(x) = P x + r."""

    P: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        P = _freeze(np.atleast_2d(self.P))
        r = _freeze(np.atleast_1d(self.r))
        n = r.shape[0]
        if P.shape != (n, n):
            raise ValueError(f"P must be {n}x{n} to match r, got {P.shape}")
        _require_finite(P, "P")
        _require_finite(r, "r")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "r", r)


@dataclass(frozen=True)
class TrigVISpec:
    """Trigonometric VI operator F(x) = P x + r + T(x), T_i = w_i sin(v_i x_i).

    Amplitudes w and frequencies v must be strictly positive.
    """

    P: np.ndarray
    r: np.ndarray
    w: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        P = _freeze(np.atleast_2d(self.P))
        r = _freeze(np.atleast_1d(self.r))
        w = _freeze(np.atleast_1d(self.w))
        v = _freeze(np.atleast_1d(self.v))
        n = r.shape[0]
        if P.shape != (n, n):
            raise ValueError(f"P must be {n}x{n} to match r, got {P.shape}")
        if w.shape != (n,) or v.shape != (n,):
            raise ValueError("w and v must have the same length as r")
        for a, name in ((P, "P"), (r, "r"), (w, "w"), (v, "v")):
            _require_finite(a, name)
        if np.any(w <= 0):
            raise ValueError("amplitudes w must be strictly positive")
        if np.any(v <= 0):
            raise ValueError("frequencies v must be strictly positive")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "v", v)


@dataclass(frozen=True)
class AffineEPSpec:
    """Affine EP operator F(x, y) = P x + Q y + r.

    Q + Q^T must be positive semidefinite so that f(x, .) is convex; this is
    checked with an eigenvalue floor of -1e-10 * ||Q||.
    """

    P: np.ndarray
    Q: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        P = _freeze(np.atleast_2d(self.P))
        Q = _freeze(np.atleast_2d(self.Q))
        r = _freeze(np.atleast_1d(self.r))
        n = r.shape[0]
        if P.shape != (n, n) or Q.shape != (n, n):
            raise ValueError(f"P and Q must be {n}x{n} to match r")
        for a, name in ((P, "P"), (Q, "Q"), (r, "r")):
            _require_finite(a, name)
        qnorm = float(np.linalg.norm(Q, 2)) if n > 0 else 0.0
        eigmin = float(np.linalg.eigvalsh(Q + Q.T).min()) if n > 0 else 0.0
        if eigmin < -_PSD_FLOOR * max(qnorm, 1.0):
            raise ValueError(
                f"Q + Q^T must be positive semidefinite (min eigenvalue {eigmin:.3e})"
            )
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "r", r)


Spec = AffineVISpec | TrigVISpec | AffineEPSpec

_SPEC_TYPES = {AFFINE_VI: AffineVISpec, TRIG_VI: TrigVISpec, AFFINE_EP: AffineEPSpec}


@dataclass(frozen=True)
class ProblemInstance:
    """An equilibrium problem over a box with a known operator class.

    The feasible set ``box`` must have strictly positive side lengths.
    f(x, x) = 0 holds for all x by the <F(x,y), y-x> construction.
    """

    id: str
    n: int
    kind: str
    spec: Spec
    box: BoxSet

    def __post_init__(self):
        if self.kind not in PROBLEM_CLASSES:
            raise ValueError(f"unknown problem class {self.kind!r}")
        if not isinstance(self.spec, _SPEC_TYPES[self.kind]):
            raise ValueError(f"spec type {type(self.spec).__name__} does not match class {self.kind!r}")
        if self.n < 1 or self.spec.r.shape[0] != self.n or self.box.n != self.n:
            raise ValueError("dimension mismatch between n, spec and box")
        if np.any(self.box.lower >= self.box.upper):
            raise ValueError("feasible box must satisfy lower[i] < upper[i] for all i")


def _check_points(p: ProblemInstance, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (p.n,) or y.shape != (p.n,):
        raise ValueError(f"x and y must be vectors of length {p.n}")
    return x, y


def eval_F(p: ProblemInstance, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Evaluate the operator F(x, y); y is ignored for the VI classes."""
    x, y = _check_points(p, x, y)
    s = p.spec
    if p.kind == AFFINE_VI:
        return s.P @ x + s.r
    if p.kind == TRIG_VI:
        return s.P @ x + s.r + s.w * np.sin(s.v * x)
    return s.P @ x + s.Q @ y + s.r


def eval_f(p: ProblemInstance, x: np.ndarray, y: np.ndarray) -> float:
    """Evaluate the bifunction f(x, y) = <F(x, y), y - x>."""
    x, y = _check_points(p, x, y)
    return float(eval_F(p, x, y) @ (y - x))


def jacobian1_F(p: ProblemInstance, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Jacobian of F(., y) at x: P for the affine classes, P + diag(w v cos(v x)) for trig."""
    x, y = _check_points(p, x, y)
    s = p.spec
    if p.kind == TRIG_VI:
        return s.P + np.diag(s.w * s.v * np.cos(s.v * x))
    return s.P


def project_box(B: BoxSet, z: np.ndarray) -> np.ndarray:
    """Componentwise projection (clamp) of z onto the box B."""
    return np.clip(np.asarray(z, dtype=float), B.lower, B.upper)


# ---------------------------------------------------------------------------
# Problem files.
#
# JSON documents with fields {id, class, n, P, Q?, r, w?, v?, lower, upper};
# matrices are row-major (nested rows or a flat list of n*n numbers), and all
# numbers are written as decimals with 17 significant digits so that a
# save/load round trip is bit-exact.
# ---------------------------------------------------------------------------


def _fmt(v: float) -> str:
    if not math.isfinite(v):
        raise ProblemFormatError("cannot serialize non-finite number")
    return format(float(v), ".17g")


def _emit_json(doc: dict) -> str:
    def emit(obj, indent: int) -> str:
        pad = "  " * indent
        if isinstance(obj, dict):
            items = [f'{pad}  "{k}": {emit(v, indent + 1).lstrip()}' for k, v in obj.items()]
            return pad + "{\n" + ",\n".join(items) + "\n" + pad + "}"
        if isinstance(obj, str):
            return pad + json.dumps(obj)
        if isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
            return pad + str(int(obj))
        if isinstance(obj, (float, np.floating)):
            return pad + _fmt(obj)
        if isinstance(obj, (list, tuple)):
            inner = [emit(v, indent + 1) for v in obj]
            if any(isinstance(v, (list, tuple, dict)) for v in obj):
                return pad + "[\n" + ",\n".join(inner) + "\n" + pad + "]"
            return pad + "[" + ", ".join(s.lstrip() for s in inner) + "]"
        raise ProblemFormatError(f"cannot serialize {type(obj).__name__}")

    return emit(doc, 0) + "\n"


def save_problem(p: ProblemInstance, path) -> None:
    """Write a problem instance to a JSON file."""
    doc: dict = {"id": p.id, "class": p.kind, "n": p.n}
    s = p.spec
    doc["P"] = [list(row) for row in s.P]
    if p.kind == AFFINE_EP:
        doc["Q"] = [list(row) for row in s.Q]
    doc["r"] = list(s.r)
    if p.kind == TRIG_VI:
        doc["w"] = list(s.w)
        doc["v"] = list(s.v)
    doc["lower"] = list(p.box.lower)
    doc["upper"] = list(p.box.upper)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_emit_json(doc))


def _take(doc: dict, field: str, path) -> object:
    if field not in doc:
        raise ProblemFormatError(f"{path}: missing field {field!r}")
    return doc[field]


def _vector(doc: dict, field: str, n: int, path) -> np.ndarray:
    raw = _take(doc, field, path)
    try:
        vec = np.asarray(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ProblemFormatError(f"{path}: field {field!r}: {exc}") from exc
    if vec.shape != (n,):
        raise ProblemFormatError(f"{path}: field {field!r} must be a vector of length {n}")
    return vec


def _matrix(doc: dict, field: str, n: int, path) -> np.ndarray:
    raw = _take(doc, field, path)
    try:
        mat = np.asarray(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ProblemFormatError(f"{path}: field {field!r}: {exc}") from exc
    if mat.shape == (n * n,):
        mat = mat.reshape(n, n)
    if mat.shape != (n, n):
        raise ProblemFormatError(f"{path}: field {field!r} must be an {n}x{n} matrix (row-major)")
    return mat


def load_problem(path) -> ProblemInstance:
    """Load and validate a problem instance from a JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ProblemFormatError(f"{path}: top-level JSON value must be an object")

    kind = _take(doc, "class", path)
    if kind not in PROBLEM_CLASSES:
        raise ProblemFormatError(f"{path}: field 'class' must be one of {PROBLEM_CLASSES}, got {kind!r}")
    n = _take(doc, "n", path)
    if not isinstance(n, int) or n < 1:
        raise ProblemFormatError(f"{path}: field 'n' must be a positive integer")
    pid = _take(doc, "id", path)
    if not isinstance(pid, str):
        raise ProblemFormatError(f"{path}: field 'id' must be a string")

    try:
        P = _matrix(doc, "P", n, path)
        r = _vector(doc, "r", n, path)
        if kind == AFFINE_VI:
            spec: Spec = AffineVISpec(P=P, r=r)
        elif kind == TRIG_VI:
            spec = TrigVISpec(P=P, r=r, w=_vector(doc, "w", n, path), v=_vector(doc, "v", n, path))
        else:
            spec = AffineEPSpec(P=P, Q=_matrix(doc, "Q", n, path), r=r)
        box = BoxSet(lower=_vector(doc, "lower", n, path), upper=_vector(doc, "upper", n, path))
        return ProblemInstance(id=pid, n=n, kind=kind, spec=spec, box=box)
    except ProblemFormatError:
        raise
    except ValueError as exc:
        raise ProblemFormatError(f"{path}: {exc}") from exc

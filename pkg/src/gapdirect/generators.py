"""Deterministic random instance generators for the benchmark protocol.

Each instance draws from its own counter-based stream keyed by (seed,
instance index), so regenerating a suite with a larger count never perturbs
instances already generated.

Parameter ranges: P entries uniform on [0, 3], r on [-2, 2], box bounds l on
[-2, 0] and u on [1, 3]; the trigonometric class adds amplitudes w on (0, 4]
and frequencies v on (0, 2].
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .problems import (AFFINE_VI, TRIG_VI, AffineVISpec, BoxSet, ProblemInstance,
                       TrigVISpec, save_problem)


@dataclass(frozen=True)
class GenSpec:
    kind: str
    n: int
    count: int
    seed: int

    def __post_init__(self):
        if self.kind not in (AFFINE_VI, TRIG_VI):
            raise ValueError(f"generator class must be {AFFINE_VI!r} or {TRIG_VI!r}")
        if self.n < 1 or self.count < 1:
            raise ValueError("n and count must be at least 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must fit in 64 bits")


def _stream(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.array([seed, index], dtype=np.uint64)))


def _positive_uniform(rng: np.random.Generator, high: float, n: int) -> np.ndarray:
    """Uniform draws on (0, high]: exact zeros are rejected and redrawn."""
    x = high - rng.uniform(0.0, high, n)
    while np.any(x <= 0):
        bad = x <= 0
        x[bad] = high - rng.uniform(0.0, high, int(bad.sum()))
    return x


def _box(rng: np.random.Generator, n: int) -> BoxSet:
    lower = rng.uniform(-2.0, 0.0, n)
    upper = rng.uniform(1.0, 3.0, n)
    return BoxSet(lower=lower, upper=upper)


def gen_affine_vi(n: int, seed: int, index: int = 0) -> ProblemInstance:
    """One random affine VI instance; deterministic in (n, seed, index)."""
    rng = _stream(seed, index)
    P = rng.uniform(0.0, 3.0, (n, n))
    r = rng.uniform(-2.0, 2.0, n)
    box = _box(rng, n)
    return ProblemInstance(id=f"affine-vi-n{n}-s{seed}-i{index:04d}", n=n,
                           kind=AFFINE_VI, spec=AffineVISpec(P=P, r=r), box=box)


def gen_trig_vi(n: int, seed: int, index: int = 0) -> ProblemInstance:
    """One random trigonometric VI instance; deterministic in (n, seed, index)."""
    rng = _stream(seed, index)
    P = rng.uniform(0.0, 3.0, (n, n))
    r = rng.uniform(-2.0, 2.0, n)
    w = _positive_uniform(rng, 4.0, n)
    v = _positive_uniform(rng, 2.0, n)
    box = _box(rng, n)
    return ProblemInstance(id=f"trig-vi-n{n}-s{seed}-i{index:04d}", n=n,
                           kind=TRIG_VI, spec=TrigVISpec(P=P, r=r, w=w, v=v), box=box)


def generate_instance(spec: GenSpec, index: int) -> ProblemInstance:
    gen = gen_affine_vi if spec.kind == AFFINE_VI else gen_trig_vi
    return gen(spec.n, spec.seed, index)


def generate_suite(spec: GenSpec, out_dir) -> list[Path]:
    """Write one problem file per instance plus a manifest; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths: list[Path] = []
    for index in range(spec.count):
        instance = generate_instance(spec, index)
        path = out / f"{instance.id}.json"
        save_problem(instance, path)
        paths.append(path)
    manifest = {"class": spec.kind, "n": spec.n, "count": spec.count, "seed": spec.seed,
                "problems": [p.name for p in paths]}
    with open(out / "manifest.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    return paths

"""Benchmark harness: suite runs, gate tables, performance and data profiles.

The convergence test marks a run as solved once its best gap value drops to
tau times the value at the first evaluated point (the initial center); the
known optimum of the reformulated problem is zero, so no reference optimum is
needed.  All delimited output uses a header row, decimals with 17 significant
digits, UTF-8 and LF line endings; unsolved entries are empty fields in
machine CSVs and ">budget" in the human-facing gate table.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from .direct import DirectTrace, LbarMode
from .problems import ProblemInstance, load_problem
from .solver import SolveResult, evals_to_gaps, solve

DEFAULT_GATES = (1e-1, 1e-3, 1e-5)


@dataclass
class RunRecord:
    """Per-(problem, variant) outcome feeding gates and profiles."""

    problem_id: str
    variant: str
    n: int
    evals_to_gates: list[float]
    solved: bool
    evals_to_solve: float
    phi_x0: float
    best_phi: float
    evals_used: int
    tau: float
    gates: tuple[float, ...]
    history: list[tuple[int, float]] | None = None
    history_path: str | None = None
    error: str | None = None


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def _fmt_or_empty(value: float) -> str:
    return "" if math.isinf(value) else _fmt(value)


def solve_evals(history: list[tuple[int, float]], phi_x0: float, tau: float) -> float:
    """First evaluation count meeting the tau-convergence test, else inf."""
    threshold = tau * phi_x0
    return next((float(c) for c, v in history if v <= threshold), math.inf)


def make_record(result: SolveResult, n: int, tau: float, gates) -> RunRecord:
    phi_x0 = result.history[0][1]
    t_solve = solve_evals(result.history, phi_x0, tau)
    return RunRecord(problem_id=result.problem_id, variant=result.variant, n=n,
                     evals_to_gates=evals_to_gaps(result, gates),
                     solved=math.isfinite(t_solve), evals_to_solve=t_solve,
                     phi_x0=phi_x0, best_phi=result.best_phi,
                     evals_used=result.evals_used, tau=tau, gates=tuple(gates),
                     history=list(result.history))


def load_suite(suite_dir) -> list[ProblemInstance]:
    """Load every problem file in a suite directory, sorted by id."""
    suite = Path(suite_dir)
    paths = sorted(p for p in suite.glob("*.json") if p.name != "manifest.json")
    if not paths:
        raise ValueError(f"no problem files found in {suite}")
    problems = [load_problem(p) for p in paths]
    problems.sort(key=lambda p: p.id)
    return problems


def _failure_record(pid: str, variant: str, n: int, tau, gates, exc) -> RunRecord:
    return RunRecord(problem_id=pid, variant=variant, n=n,
                     evals_to_gates=[math.inf] * len(tuple(gates)), solved=False,
                     evals_to_solve=math.inf, phi_x0=math.nan, best_phi=math.nan,
                     evals_used=0, tau=tau, gates=tuple(gates), error=str(exc))


def run_suite(suite_dir, variants, alpha: float = 1.0, global_budget: int = 500,
              local_budget: int = 100, tau: float = 1e-3, gates=DEFAULT_GATES,
              lbar_mode: LbarMode | None = None) -> list[RunRecord]:
    """Solve every (problem, variant) pair; per-problem failures are recorded, not fatal."""
    suite = Path(suite_dir)
    paths = sorted(p for p in suite.glob("*.json") if p.name != "manifest.json")
    if not paths:
        raise ValueError(f"no problem files found in {suite}")
    variants = list(variants)
    if not variants:
        raise ValueError("at least one variant is required")
    records: list[RunRecord] = []
    for path in paths:
        try:
            problem = load_problem(path)
        except Exception as exc:  # noqa: BLE001 - bad files reported per run
            for variant in variants:
                records.append(_failure_record(path.stem, variant, 0, tau, gates, exc))
            continue
        for variant in variants:
            try:
                result = solve(problem, variant, alpha=alpha, global_budget=global_budget,
                               local_budget=local_budget, lbar_mode=lbar_mode)
                records.append(make_record(result, problem.n, tau, gates))
            except Exception as exc:  # noqa: BLE001 - per-problem isolation
                records.append(_failure_record(problem.id, variant, problem.n, tau, gates, exc))
    records.sort(key=lambda r: (r.problem_id, r.variant))
    return records


def _record_history(record: RunRecord, base_dir: Path | None) -> list[tuple[int, float]]:
    if record.history is not None:
        return record.history
    if record.history_path is None:
        raise ValueError(f"record {record.problem_id}/{record.variant} has no history reference")
    path = Path(record.history_path)
    if not path.is_absolute() and base_dir is not None:
        path = base_dir / path
    record.history = read_history_csv(path)
    return record.history


def _solve_evals_at(record: RunRecord, tau: float, base_dir: Path | None) -> float:
    if tau == record.tau:
        return record.evals_to_solve
    return solve_evals(_record_history(record, base_dir), record.phi_x0, tau)


def _group(records: list[RunRecord]) -> tuple[list[str], list[str], dict]:
    problems = sorted({r.problem_id for r in records})
    variants = sorted({r.variant for r in records})
    table = {(r.problem_id, r.variant): r for r in records}
    return problems, variants, table


def performance_profile(records: list[RunRecord], tau: float,
                        base_dir=None) -> dict[str, list[tuple[float, float]]]:
    """Step-function points (ratio, fraction solved) per variant.

    For each problem the ratio is evals-to-solve over the best variant's
    evals-to-solve; unsolved runs get an infinite ratio but stay in the
    denominator.
    """
    problems, variants, table = _group(records)
    if len(variants) < 2:
        raise ValueError("performance profiles need at least two variants")
    base_dir = Path(base_dir) if base_dir is not None else None
    ratios: dict[str, list[float]] = {v: [] for v in variants}
    for pid in problems:
        times = {v: _solve_evals_at(table[(pid, v)], tau, base_dir)
                 for v in variants if (pid, v) in table}
        best = min(times.values(), default=math.inf)
        for v, t in times.items():
            ratios[v].append(t / best if math.isfinite(t) and math.isfinite(best) else math.inf)
    breakpoints = sorted({r for rs in ratios.values() for r in rs if math.isfinite(r)})
    if not breakpoints:
        warnings.warn("no problem was solved by any variant; profiles are empty")
        return {v: [] for v in variants}
    count = len(problems)
    curves: dict[str, list[tuple[float, float]]] = {}
    for v in variants:
        finite = sorted(r for r in ratios[v] if math.isfinite(r))
        curves[v] = [(theta, _fraction_le(finite, theta, count)) for theta in breakpoints]
    return curves


def data_profile(records: list[RunRecord], tau: float,
                 base_dir=None) -> dict[str, list[tuple[float, float]]]:
    """Step-function points (kappa, fraction solved within kappa*(n+1) evals)."""
    problems, variants, table = _group(records)
    base_dir = Path(base_dir) if base_dir is not None else None
    kappas: dict[str, list[float]] = {v: [] for v in variants}
    for pid in problems:
        for v in variants:
            rec = table.get((pid, v))
            if rec is None:
                continue
            t = _solve_evals_at(rec, tau, base_dir)
            kappas[v].append(t / (rec.n + 1) if math.isfinite(t) else math.inf)
    breakpoints = sorted({k for ks in kappas.values() for k in ks if math.isfinite(k)})
    if not breakpoints:
        warnings.warn("no problem was solved by any variant; profiles are empty")
        return {v: [] for v in variants}
    count = len(problems)
    curves: dict[str, list[tuple[float, float]]] = {}
    for v in variants:
        finite = sorted(k for k in kappas[v] if math.isfinite(k))
        curves[v] = [(kappa, _fraction_le(finite, kappa, count)) for kappa in breakpoints]
    return curves


def _fraction_le(sorted_values: list[float], threshold: float, total: int) -> float:
    hit = 0
    for value in sorted_values:
        if value <= threshold:
            hit += 1
        else:
            break
    return hit / total


def gate_table(records: list[RunRecord], gates) -> tuple[list[str], list[list]]:
    """Rows (problem, n, per-variant evals at each gate) mirroring the report layout."""
    problems, variants, table = _group(records)
    gates = tuple(gates)
    header = ["problem", "n"]
    for v in variants:
        header.extend(f"{v}@{g:g}" for g in gates)
    rows: list[list] = []
    for pid in problems:
        n = next(r.n for r in records if r.problem_id == pid)
        row: list = [pid, n]
        for v in variants:
            rec = table.get((pid, v))
            if rec is None:
                row.extend([math.inf] * len(gates))
            else:
                row.extend(evals_at_gates(rec, gates))
        rows.append(row)
    return header, rows


def evals_at_gates(record: RunRecord, gates) -> list[float]:
    gates = tuple(gates)
    if gates == record.gates:
        return list(record.evals_to_gates)
    if record.history is None and record.history_path is None:
        raise ValueError("cannot recompute gates without a history reference")
    history = _record_history(record, None)
    return evals_to_gaps(history, gates)


# ---------------------------------------------------------------------------
# Delimited output.
# ---------------------------------------------------------------------------


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def write_history_csv(history: list[tuple[int, float]], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(["eval_count", "best_phi"])
        for count, value in history:
            w.writerow([int(count), _fmt(value)])


def read_history_csv(path) -> list[tuple[int, float]]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    return [(int(row[0]), float(row[1])) for row in rows[1:]]


def write_records_csv(records: list[RunRecord], path, gates=None) -> None:
    gates = tuple(gates) if gates is not None else (records[0].gates if records else DEFAULT_GATES)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        header = ["problem_id", "variant", "n", "solved", "evals_to_solve", "evals_used",
                  "best_phi", "phi_x0", "tau"]
        header.extend(f"gate@{g:g}" for g in gates)
        header.extend(["history_path", "error"])
        w.writerow(header)
        for r in records:
            row = [r.problem_id, r.variant, r.n, int(r.solved), _fmt_or_empty(r.evals_to_solve),
                   r.evals_used, _fmt(r.best_phi), _fmt(r.phi_x0), _fmt(r.tau)]
            row.extend(_fmt_or_empty(v) for v in r.evals_to_gates)
            row.extend([r.history_path or "", r.error or ""])
            w.writerow(row)


def read_records_csv(path) -> list[RunRecord]:
    path = Path(path)
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    gate_cols = [(i, float(h.split("@", 1)[1])) for i, h in enumerate(header) if h.startswith("gate@")]
    col = {h: i for i, h in enumerate(header)}
    records = []
    for row in rows:
        gates = tuple(g for _, g in gate_cols)
        to_gates = [float(row[i]) if row[i] else math.inf for i, _ in gate_cols]
        t_solve = float(row[col["evals_to_solve"]]) if row[col["evals_to_solve"]] else math.inf
        records.append(RunRecord(
            problem_id=row[col["problem_id"]], variant=row[col["variant"]],
            n=int(row[col["n"]]), evals_to_gates=to_gates,
            solved=bool(int(row[col["solved"]])), evals_to_solve=t_solve,
            phi_x0=float(row[col["phi_x0"]]), best_phi=float(row[col["best_phi"]]),
            evals_used=int(row[col["evals_used"]]), tau=float(row[col["tau"]]),
            gates=gates, history_path=row[col["history_path"]] or None,
            error=row[col["error"]] or None))
    return records


def _gate_cell(v):
    if isinstance(v, float):
        if math.isinf(v):
            return ">budget"
        if v == int(v):
            return int(v)
    return v


def write_gate_table_csv(records: list[RunRecord], gates, path) -> None:
    header, rows = gate_table(records, gates)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_gate_cell(v) for v in row])


def write_profile_csv(curves: dict[str, list[tuple[float, float]]], kind: str, path) -> None:
    x_name = "ratio" if kind == "perf" else "kappa"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(["variant", x_name, "fraction"])
        for variant in sorted(curves):
            for x, frac in curves[variant]:
                w.writerow([variant, _fmt(x), _fmt(frac)])


def write_solve_trace_csv(result: SolveResult, path) -> None:
    """History rows plus one summary row for a single solve."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(["problem_id", "variant", "alpha", "row", "eval_count", "best_phi",
                    "gap_bound", "best_x"])
        for count, value in result.history:
            w.writerow([result.problem_id, result.variant, _fmt(result.alpha), "history",
                        int(count), _fmt(value), "", ""])
        bound = "" if result.gap_bound is None else _fmt(result.gap_bound)
        best_x = " ".join(_fmt(v) for v in result.best_x)
        w.writerow([result.problem_id, result.variant, _fmt(result.alpha), "summary",
                    result.evals_used, _fmt(result.best_phi), bound, best_x])


def write_iteration_trace(trace: DirectTrace, path) -> None:
    """Per-iteration engine rows: eval count, incumbent, certificate, partition size."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(["iteration", "eval_count", "phi_best", "gap_bound", "num_rectangles"])
        for iteration, evals, phi_best, bound, num in trace.iterations:
            w.writerow([iteration, evals, _fmt(phi_best), _fmt(bound), num])


def write_suite_outputs(records: list[RunRecord], out_dir, tau: float, gates) -> dict[str, Path]:
    """Write records, gate table, profile CSVs and figures; returns the paths."""
    from .plotting import plot_profiles  # lazy: pulls in matplotlib

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    hist_dir = out / "histories"
    hist_dir.mkdir(exist_ok=True)
    for record in records:
        if record.history is None:
            continue
        name = f"{record.problem_id}__{record.variant}.csv"
        write_history_csv(record.history, hist_dir / name)
        record.history_path = str(Path("histories") / name)

    paths = {"records": out / "records.csv", "gate_table": out / "gate_table.csv"}
    write_records_csv(records, paths["records"], gates=gates)
    write_gate_table_csv(records, gates, paths["gate_table"])

    variants = sorted({r.variant for r in records})
    if len(variants) >= 2:
        perf = performance_profile(records, tau, base_dir=out)
        data = data_profile(records, tau, base_dir=out)
        paths["perf_csv"] = out / "perf_profile.csv"
        paths["data_csv"] = out / "data_profile.csv"
        write_profile_csv(perf, "perf", paths["perf_csv"])
        write_profile_csv(data, "data", paths["data_csv"])
        paths["perf_png"] = out / "perf_profile.png"
        paths["data_png"] = out / "data_profile.png"
        plot_profiles(perf, "perf", paths["perf_png"])
        plot_profiles(data, "data", paths["data_png"])
    return paths

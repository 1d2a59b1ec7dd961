"""Figure rendering for profiles and gap-reduction histories (headless)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_VARIANT_COLORS = {"direct": "tab:blue", "ldirect": "tab:red"}
_LOG_FLOOR = 1e-16


def _color(variant: str, fallback_index: int) -> str:
    return _VARIANT_COLORS.get(variant, f"C{fallback_index}")


def plot_profiles(curves: dict[str, list[tuple[float, float]]], kind: str, path) -> None:
    """Render per-variant profile step curves to an image file."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for i, variant in enumerate(sorted(curves)):
        points = curves[variant]
        if not points:
            continue
        xs = [x for x, _ in points]
        ys = [y for _, y in points]
        # anchor the step function at fraction 0 before its first breakpoint
        ax.step([xs[0]] + xs, [0.0] + ys, where="post", label=variant,
                color=_color(variant, i))
    if kind == "perf":
        ax.set_xlabel("performance ratio")
    else:
        ax.set_xlabel("budget [groups of n+1 evaluations]")
    ax.set_ylabel("fraction of problems solved")
    ax.set_ylim(0.0, 1.05)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def plot_gap_histories(histories: dict[str, list[tuple[int, float]]], path,
                       title: str | None = None) -> None:
    """Best gap value against evaluation count, one curve per label, log scale."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for i, label in enumerate(sorted(histories)):
        history = histories[label]
        if not history:
            continue
        xs = [c for c, _ in history]
        ys = [max(v, _LOG_FLOOR) for _, v in history]
        # extend the incumbent to the last recorded evaluation
        ax.step(xs, ys, where="post", label=label, color=_color(label, i))
    ax.set_yscale("log")
    ax.set_xlabel("function evaluations")
    ax.set_ylabel("best gap value")
    if title:
        ax.set_title(title)
    ax.grid(alpha=0.3, which="both")
    ax.legend()
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)

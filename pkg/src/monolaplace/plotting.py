"""PNG figures for ``report-all``; headless (Agg) only."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata={"Software": None})
    plt.close(fig)
    return path


def line_plot(path, series: dict, *, xlabel="x", ylabel="", title="", logx=True, hlines=()) -> Path:
    """``series`` maps a legend label to (xs, ys)."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, (xs, ys) in series.items():
        ax.plot(xs, ys, label=label, lw=1.4)
    for y in hlines:
        ax.axhline(y, color="0.6", lw=0.8, ls="--")
    if logx:
        ax.set_xscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    if len(series) > 1:
        ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    return _save(fig, Path(path))


def margin_plot(path, reports: dict) -> Path:
    """Smallest margin per v for each bound suite, on a log scale."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for suite, rows in reports.items():
        best = {}
        for r in rows:
            best[r["v"]] = min(best.get(r["v"], float("inf")), r["margin"])
        vs = sorted(best)
        ax.plot(vs, [max(best[v], 1e-16) for v in vs], "o-", ms=3, label=suite)
    ax.axhline(1e-9, color="r", lw=0.8, ls="--", label="noise band")
    ax.set_yscale("log")
    ax.set_xlabel("v")
    ax.set_ylabel("min margin over x")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    return _save(fig, Path(path))

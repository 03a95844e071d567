"""Key-value reports, per-trial TSV records, and result figures."""

from __future__ import annotations

import csv
from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def format_report(pairs: Iterable[tuple[str, object]]) -> str:
    """One 'key: value' line per pair."""
    return "\n".join(f"{key}: {value}" for key, value in pairs) + "\n"


def write_tsv(path: str, header: Sequence[str], rows: Iterable[Sequence[object]]) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, delimiter="\t", lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def running_estimate(outcomes: Sequence[bool]) -> list[float]:
    out = []
    hits = 0
    for i, flag in enumerate(outcomes, 1):
        hits += bool(flag)
        out.append(hits / i)
    return out


def render_trial_figure(
    path: str,
    outcomes: Sequence[bool],
    *,
    bound: float | None = None,
    title: str = "",
    ylabel: str = "estimate",
) -> None:
    """Running estimate across trials, with the comparison bound when given."""
    ys = running_estimate(outcomes)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(range(1, len(ys) + 1), ys, lw=1.2, label="running estimate")
    if bound is not None:
        ax.axhline(bound, color="crimson", ls="--", lw=1.0, label=f"bound {bound:.4g}")
    ax.set_xlabel("trial")
    ax.set_ylabel(ylabel)
    ax.set_ylim(-0.02, 1.02)
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_level_figure(
    path: str,
    values: Sequence[float],
    *,
    hline: float | None = None,
    hline_label: str = "",
    title: str = "",
    ylabel: str = "estimate",
) -> None:
    """Per-item estimates sorted descending, e.g. one point per leaf subset."""
    ys = sorted(values, reverse=True)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(range(1, len(ys) + 1), ys, lw=1.2, marker="." if len(ys) <= 400 else None)
    if hline is not None:
        ax.axhline(hline, color="crimson", ls="--", lw=1.0, label=hline_label or f"{hline:.4g}")
        ax.legend(loc="best", fontsize=9)
    ax.set_xlabel("rank")
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)

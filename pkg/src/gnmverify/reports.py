"""Report emission: delimited tables, JSON payloads, and figures.

CSV cells are written with shortest round-trip float repr so identical
runs produce byte-identical files. Figures are rendered to PNG next to
the delimited output whenever a report directory is given.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def _cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return str(value)


def write_csv(path: Path, fieldnames: Sequence[str], rows: Iterable[Mapping]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_cell(row.get(name)) for name in fieldnames])


def write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=False) + "\n", encoding="utf-8")


def write_rows(path_base: Path, fmt: str, fieldnames: Sequence[str], rows: list[dict]) -> Path:
    """Write rows as CSV or JSON depending on `fmt`; returns the path."""
    if fmt == "json":
        path = path_base.with_suffix(".json")
        write_json(path, rows)
    else:
        path = path_base.with_suffix(".csv")
        write_csv(path, fieldnames, rows)
    return path


# ---------------------------------------------------------------------------
# Figures


def _bar_panel(ax, labels: list[str], ideal: list[float], model: list[float] | None,
               title: str, ylabel: str) -> None:
    x = range(len(labels))
    ax.bar(x, ideal, width=0.6, color="#9ecae1", edgecolor="#3182bd", label="ideal")
    if model is not None:
        ax.plot(x, model, "ko", markersize=5, label="noise model")
    ax.set_xticks(list(x))
    ax.set_xticklabels(labels, fontsize=8)
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel(ylabel, fontsize=8)
    ax.set_title(title, fontsize=9)
    ax.legend(fontsize=7, loc="upper right")


def experiment_figure(panels: list[dict], path: Path) -> None:
    """Render the four probability panels of the bundled demonstration.

    Each panel dict carries: title, labels, ylabel, ideal, and optionally
    model (same length as labels).
    """
    fig, axes = plt.subplots(2, 2, figsize=(8, 6))
    for ax, panel in zip(axes.flat, panels):
        _bar_panel(
            ax,
            panel["labels"],
            panel["ideal"],
            panel.get("model"),
            panel["title"],
            panel["ylabel"],
        )
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150)
    plt.close(fig)


def bounds_figure(rows: list[dict], path: Path) -> None:
    ms = [r["m"] for r in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax1.plot(ms, [r["completeness_curve"] for r in rows], label="honest curve")
    ax1.plot(ms, [r["klein_bound"] for r in rows], label="cheat bound 16/(7(m-1))")
    ax1.plot(ms, [r["soundness_8_over_m"] for r in rows], "--", label="cheat bound 8/m")
    ax1.set_xlabel("registers m")
    ax1.set_ylabel("probability")
    ax1.set_ylim(0, 1)
    ax1.legend(fontsize=8)
    gaps = [r["gap_value"] for r in rows]
    ax2.plot(ms, gaps, color="#e6550d")
    best = max(range(len(gaps)), key=gaps.__getitem__)
    ax2.axvline(ms[best], ls=":", color="gray")
    ax2.set_xlabel("registers m")
    ax2.set_ylabel("gap")
    ax2.set_title(f"max gap {gaps[best]:.3f} at m={ms[best]}", fontsize=9)
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150)
    plt.close(fig)


def adversary_figure(rows: list[dict], path: Path) -> None:
    ms = [r["m"] for r in rows]
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    ax.plot(ms, [r["lambda_max"] for r in rows], "o-", label="optimal cheat value")
    ax.plot(ms, [r["bound_8_over_m"] for r in rows], "--", label="8/m")
    if any(r.get("klein_bound") is not None for r in rows):
        ax.plot(ms, [r["klein_bound"] for r in rows], ":", label="16/(7(m-1))")
    ax.set_xlabel("registers m")
    ax.set_ylabel("acceptance probability")
    ax.legend(fontsize=8)
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150)
    plt.close(fig)


def appendix_figure(rows: list[dict], path: Path) -> None:
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.5))
    closed = [r["closed_form"] for r in rows]
    brute = [r["bruteforce"] for r in rows]
    ax1.plot(closed, brute, ".", alpha=0.6)
    lo, hi = min(closed), max(closed)
    ax1.plot([lo, hi], [lo, hi], "k--", lw=0.8)
    ax1.set_xlabel("closed form")
    ax1.set_ylabel("numerical maximum")
    residuals = [r["residual"] for r in rows]
    ax2.semilogy(range(len(residuals)), [max(abs(x), 1e-18) for x in residuals], ".")
    ax2.set_xlabel("instance")
    ax2.set_ylabel("|difference|")
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150)
    plt.close(fig)


def simulate_figure(stages: dict[str, float], exact_value: float | None, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    labels = list(stages.keys())
    ax.bar(range(len(labels)), [stages[k] for k in labels], color="#a1d99b", edgecolor="#31a354")
    if exact_value is not None:
        ax.axhline(exact_value, color="k", ls="--", lw=1, label=f"exact accept {exact_value:.4f}")
        ax.legend(fontsize=8)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, fontsize=8, rotation=20)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("rate")
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=150)
    plt.close(fig)

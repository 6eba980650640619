"""Static PNG figures for the HTML site.

Figures are drawn on bare ``Figure`` objects (no pyplot state) and saved
without metadata, so identical reports give byte-identical files.
"""
from __future__ import annotations

import warnings
from pathlib import Path

import matplotlib
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

STYLE = {
    "font.family": "DejaVu Sans",
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.titlesize": 10,
    "svg.hashsalt": "teachgram",
}
MODEL_COLOR = "#2b6cb0"
BASELINE_COLOR = "#a0aec0"
MAX_BARS = 20


def _new(width: float, height: float) -> Figure:
    fig = Figure(figsize=(width, height), dpi=100)
    FigureCanvasAgg(fig)
    return fig


def _save(fig: Figure, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with warnings.catch_warnings():
        # L2 scripts are often missing from the bundled font
        warnings.simplefilter("ignore", UserWarning)
        fig.savefig(path, format="png", metadata={"Software": None})
    return path


def accuracy_chart(rows: list[tuple[str, float, float]], path: Path, title: str = "") -> Path:
    """Grouped bars of (label, model accuracy, baseline accuracy), in percent."""
    rows = rows[:MAX_BARS]
    with matplotlib.rc_context(STYLE):
        fig = _new(max(4.0, 0.6 * len(rows) + 2), 3.0)
        ax = fig.add_subplot(1, 1, 1)
        xs = range(len(rows))
        w = 0.38
        ax.bar([x - w / 2 for x in xs], [100 * r[1] for r in rows], w, label="rules", color=MODEL_COLOR)
        ax.bar([x + w / 2 for x in xs], [100 * r[2] for r in rows], w, label="majority baseline",
               color=BASELINE_COLOR)
        ax.set_xticks(list(xs))
        ax.set_xticklabels([r[0] for r in rows], rotation=30, ha="right")
        ax.set_ylim(0, 100)
        ax.set_ylabel("held-out accuracy (%)")
        if title:
            ax.set_title(title)
        ax.legend(loc="lower right", frameon=False)
        fig.tight_layout()
        return _save(fig, path)


def frequency_chart(items: list[tuple[str, int]], path: Path, title: str = "", xlabel: str = "count") -> Path:
    """Horizontal bars, most frequent on top."""
    items = items[:MAX_BARS]
    with matplotlib.rc_context(STYLE):
        fig = _new(4.5, 0.3 * len(items) + 1.2)
        ax = fig.add_subplot(1, 1, 1)
        ys = list(range(len(items)))[::-1]
        ax.barh(ys, [n for _, n in items], color=MODEL_COLOR)
        ax.set_yticks(ys)
        ax.set_yticklabels([label for label, _ in items])
        ax.set_xlabel(xlabel)
        if title:
            ax.set_title(title)
        fig.tight_layout()
        return _save(fig, path)

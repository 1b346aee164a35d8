"""Matplotlib figures for windows, word counts and forcing runs.

Everything goes through ``matplotlib.figure.Figure`` with the Agg canvas,
so nothing touches pyplot's global state and output files are stable.
"""

from __future__ import annotations

from typing import Optional, Sequence

from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.colors import ListedColormap
from matplotlib.figure import Figure

from .patterns import PAD, PAD_T, Pattern, ShiftlabError

# padding is drawn pale, content symbols cycle through a qualitative palette
_PALETTE = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666"]
_PAD_COLORS = {PAD: "#f0f0f0", PAD_T: "#dde8f3"}
_NO_META = {"Software": None}


def _save(fig: Figure, path: str, dpi: int = 100) -> None:
    FigureCanvasAgg(fig)
    fig.savefig(path, format="png", dpi=dpi, metadata=_NO_META)


def window_figure(window: Optional[Pattern], title: str = "", annotate: bool = True) -> Figure:
    """A 2D window as a colored grid, y growing upwards like the ascii render."""
    fig = Figure(figsize=(6, 2))
    ax = fig.add_subplot(1, 1, 1)
    ax.set_xticks([])
    ax.set_yticks([])
    if window is None or window.size == 0:
        ax.text(0.5, 0.5, "no window", ha="center", va="center", transform=ax.transAxes)
        return fig
    if window.dim == 1:
        window = window.embed(2)
    if window.dim != 2:
        raise ShiftlabError("only windows of dimension at most 2 can be drawn")
    W, H = window.shape
    content = sorted(s for s in window.symbols() if s not in _PAD_COLORS)
    order = content + [p for p in (PAD, PAD_T) if p in window.symbols()]
    colors = [_PALETTE[i % len(_PALETTE)] for i in range(len(content))]
    colors += [_PAD_COLORS[p] for p in order[len(content):]]
    idx = {s: k for k, s in enumerate(order)}
    grid = [[idx[str(c)] for c in row] for row in window.rows()]
    ax.imshow(grid, cmap=ListedColormap(colors), vmin=0, vmax=max(len(order) - 1, 1) + 1e-9,
              origin="lower", interpolation="nearest", aspect="equal")
    if annotate and W * H <= 1200:
        for y, row in enumerate(window.rows()):
            for x, c in enumerate(row):
                ax.text(x, y, str(c), ha="center", va="center", fontsize=5)
    fig.set_size_inches(max(3, min(16, W * 0.18)), max(1.5, min(10, H * 0.18 + 0.6)))
    if title:
        ax.set_title(title, fontsize=9)
    return fig


def save_window_png(window: Optional[Pattern], path: str, title: str = "") -> None:
    _save(window_figure(window, title), path)


def counts_figure(counts: Sequence[int], label: str = "|L_n|", log: bool = True) -> Figure:
    fig = Figure(figsize=(4.5, 3))
    ax = fig.add_subplot(1, 1, 1)
    ns = list(range(1, len(counts) + 1))
    ax.plot(ns, counts, marker="o", ms=3, lw=1, color="#333333")
    if log and all(c > 0 for c in counts):
        ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel(label)
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    fig.tight_layout()
    return fig


def save_counts_png(counts: Sequence[int], path: str, label: str = "|L_n|") -> None:
    _save(counts_figure(counts, label), path)


def forcing_figure(trail) -> Figure:
    """Sizes of G, B and the used alphabet along a forcing run."""
    fig = Figure(figsize=(4.5, 3))
    ax = fig.add_subplot(1, 1, 1)
    stages = [st.stage for st in trail]
    ax.step(stages, [len(st.G) for st in trail], where="post", label="G")
    ax.step(stages, [len(st.B) for st in trail], where="post", label="B")
    ax.step(stages, [len(st.used) for st in trail], where="post", label="letters", ls="--")
    ax.set_xlabel("stage")
    ax.legend(frameon=False, fontsize=8)
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    fig.tight_layout()
    return fig


def save_forcing_png(trail, path: str) -> None:
    _save(forcing_figure(trail), path)

"""SVG figures: necklaces as rings of beads, composed necklaces, test histograms.

Figures are built on the object API (no pyplot state) and saved with a fixed
hash salt and no date stamp, so the same input always gives the same bytes.
"""
from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import matplotlib
import numpy as np
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.collections import EllipseCollection
from matplotlib.colors import to_hex, to_rgb
from matplotlib.figure import Figure

PALETTE = [
    to_hex(c)
    for name in ("tab10", "tab20b", "tab20c")
    for c in matplotlib.colormaps[name].colors
]
MAX_BEADS = 720

_SVG_RC = {"svg.hashsalt": "vbalanced", "svg.fonttype": "path", "path.simplify": False}


def _save(fig: Figure, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    FigureCanvasSVG(fig)
    with matplotlib.rc_context(_SVG_RC):
        fig.savefig(path, format="svg", metadata={"Date": None})
    return path


def bead_colors(word: Sequence[int], max_beads: int = MAX_BEADS) -> list[str]:
    """One color per bead, or per sector when the word is longer than ``max_beads``.

    A sector color is the mean RGB of the beads it covers.
    """
    word = np.asarray(word, dtype=np.int64)
    if word.size and int(word.max()) >= len(PALETTE):
        raise ValueError(f"palette has {len(PALETTE)} colors")
    rgb = np.array([to_rgb(c) for c in PALETTE])[word]
    if len(word) <= max_beads:
        return [to_hex(c) for c in rgb]
    edges = np.linspace(0, len(word), max_beads + 1).astype(np.int64)
    sums = np.add.reduceat(rgb, edges[:-1], axis=0)
    return [to_hex(c) for c in sums / np.diff(edges)[:, None]]


def _draw_ring(ax, colors: list[str], center=(0.0, 0.0), radius: float = 1.0) -> None:
    m = len(colors)
    theta = math.pi / 2 - 2 * math.pi * np.arange(m) / m
    pts = np.column_stack([center[0] + radius * np.cos(theta), center[1] + radius * np.sin(theta)])
    bead = min(0.35 * radius, 0.9 * radius * math.sin(math.pi / m)) if m > 1 else 0.35 * radius
    ring = np.linspace(0, 2 * math.pi, 361)
    ax.plot(center[0] + radius * np.cos(ring), center[1] + radius * np.sin(ring),
            color="0.6", lw=0.6, zorder=1)
    d = 2 * bead
    ax.add_collection(EllipseCollection(
        np.full(m, d), np.full(m, d), np.zeros(m), units="xy", offsets=pts,
        offset_transform=ax.transData, facecolors=colors, edgecolors="0.2",
        linewidths=0.4, zorder=2,
    ))


def render_necklace(word: Sequence[int], path, *, title: str | None = None, max_beads: int = MAX_BEADS) -> Path:
    """Beads as colored circles equally spaced on a ring, read clockwise from the top."""
    fig = Figure(figsize=(4, 4))
    ax = fig.add_axes([0, 0, 1, 1])
    _draw_ring(ax, bead_colors(word, max_beads))
    ax.set_xlim(-1.3, 1.3)
    ax.set_ylim(-1.3, 1.3)
    ax.set_aspect("equal")
    ax.set_axis_off()
    if title:
        ax.text(0, 0, title, ha="center", va="center", fontsize=9)
    return _save(fig, path)


def render_composed(components: Sequence[Sequence[int]], path, *, title: str | None = None) -> Path:
    """A ring of inner necklaces; each inner ring is scaled by its size."""
    m = len(components)
    fig = Figure(figsize=(5, 5))
    ax = fig.add_axes([0, 0, 1, 1])
    sizes = np.array([len(c) for c in components], dtype=float)
    scale = np.sqrt(sizes / sizes.max()) if m else sizes
    outer = 1.0 if m > 1 else 0.0
    ring = np.linspace(0, 2 * math.pi, 361)
    if m > 1:
        ax.plot(np.cos(ring), np.sin(ring), color="0.8", lw=0.8, zorder=0)
    limit = 0.45 if m <= 2 else min(0.45, 0.9 * math.sin(math.pi / m))
    for i, comp in enumerate(components):
        phi = math.pi / 2 - 2 * math.pi * i / max(m, 1)
        r = max(0.08, limit * scale[i])
        _draw_ring(ax, bead_colors(comp, 240), (outer * math.cos(phi), outer * math.sin(phi)), r)
    ax.set_xlim(-1.6, 1.6)
    ax.set_ylim(-1.6, 1.6)
    ax.set_aspect("equal")
    ax.set_axis_off()
    if title:
        ax.text(0, -1.5, title, ha="center", va="bottom", fontsize=9)
    return _save(fig, path)


def plot_report_bins(
    bins: Sequence[Sequence],
    path,
    *,
    title: str = "",
    labels: tuple[str, str] = ("observed", "expected"),
) -> Path:
    """Paired counts per chi-squared bin, given as ``(key, first, second)``."""
    keys = [str(b[0]) for b in bins]
    obs = np.array([b[1] for b in bins], dtype=float)
    exp = np.array([b[2] for b in bins], dtype=float)
    fig = Figure(figsize=(max(4.0, 0.35 * len(bins) + 1.5), 3.2))
    ax = fig.add_subplot(111)
    pos = np.arange(len(bins))
    ax.bar(pos - 0.2, obs, width=0.4, label=labels[0], color=PALETTE[0])
    ax.bar(pos + 0.2, exp, width=0.4, label=labels[1], color=PALETTE[1])
    ax.set_xticks(pos, keys, rotation=90 if len(bins) > 12 else 0, fontsize=7)
    ax.set_ylabel("count")
    if title:
        ax.set_title(title, fontsize=9)
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    return _save(fig, path)

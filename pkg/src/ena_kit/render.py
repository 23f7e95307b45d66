"""SVG figures: the unit-score scatter and weighted network diagrams.

Output is plain SVG 1.1 text built by string formatting with fixed numeric
precision, so identical inputs always give byte-identical files.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .projection import GroupNetwork, NodeLayout, UnitScore
from .stats import CentroidSummary, centroid_summary

DEFAULT_PALETTE = ("#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


class UnsupportedDimensionError(ValueError):
    pass


@dataclass(frozen=True)
class PlotStyle:
    width: int = 640
    height: int = 520
    colors: Mapping[str, str] = field(default_factory=dict, hash=False)
    max_edge_width: float = 8.0
    min_weight: float = 0.0
    node_radius: float = 14.0
    font_size: float = 12.0
    margin: float = 60.0

    def __post_init__(self):
        if self.max_edge_width <= 0:
            raise ValueError("max_edge_width must be positive")
        if not 0 <= self.min_weight < 1:
            raise ValueError("min_weight must lie in [0, 1)")
        if self.width < 100 or self.height < 100:
            raise ValueError("canvas must be at least 100x100 px")

    @classmethod
    def from_mapping(cls, doc: Mapping | None) -> "PlotStyle":
        return cls(**dict(doc or {}))

    def color(self, group: str, index: int) -> str:
        if group in self.colors:
            return escape(self.colors[group], {'"': "&quot;"})
        return DEFAULT_PALETTE[index % len(DEFAULT_PALETTE)]


def _f(v: float) -> str:
    s = f"{v:.2f}"
    return "0.00" if s == "-0.00" else s


class _Canvas:
    """Maps data coordinates to pixels with equal scale on both axes."""

    def __init__(self, xs, ys, style: PlotStyle, pad: float = 0.08):
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        lo_x, hi_x = float(xs.min()), float(xs.max())
        lo_y, hi_y = float(ys.min()), float(ys.max())
        span = max(hi_x - lo_x, hi_y - lo_y, 1e-9)
        self.cx = (lo_x + hi_x) / 2
        self.cy = (lo_y + hi_y) / 2
        inner_w = style.width - 2 * style.margin
        inner_h = style.height - 2 * style.margin
        self.scale = min(inner_w, inner_h) / (span * (1 + 2 * pad))
        self.style = style

    def x(self, v: float) -> float:
        return self.style.width / 2 + (v - self.cx) * self.scale

    def y(self, v: float) -> float:
        # SVG y grows downward
        return self.style.height / 2 - (v - self.cy) * self.scale


def _open(style: PlotStyle, title: str) -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{style.width}" height="{style.height}" '
        f'viewBox="0 0 {style.width} {style.height}" font-family="sans-serif" font-size="{_f(style.font_size)}">',
        f"<title>{escape(title)}</title>",
    ]


def _text(x: float, y: float, content: str, cls: str, anchor: str = "middle", extra: str = "") -> str:
    return f'<text class="{cls}" x="{_f(x)}" y="{_f(y)}" text-anchor="{anchor}"{extra}>{escape(content)}</text>'


def render_scores(
    scores: Sequence[UnitScore],
    summaries: Mapping[str, CentroidSummary] | None = None,
    style: PlotStyle | None = None,
    variance_fraction: Sequence[float] | None = None,
    groups: Sequence[str] | None = None,
) -> str:
    """Scatter of unit scores with group centroids and 95% CI boxes.

    Groups without a supplied summary get one computed from their scores;
    groups with a single unit get a centroid but no CI box.
    """
    style = style or PlotStyle()
    if not scores:
        raise ValueError("no scores to plot")
    for s in scores:
        if s.coords.size != 2:
            raise UnsupportedDimensionError(f"score plots need exactly 2 dimensions, got {s.coords.size}")
    if groups is None:
        groups = list(dict.fromkeys(s.group for s in scores))
    summaries = dict(summaries or {})

    centroids: dict[str, tuple[float, float, float | None, float | None]] = {}
    notes = []
    for g in groups:
        pts = np.array([s.coords for s in scores if s.group == g])
        if pts.size == 0:
            continue
        summ = summaries.get(g)
        if summ is None and len(pts) >= 2:
            summ = centroid_summary(pts, g)
        if summ is not None:
            centroids[g] = (summ.mean[0], summ.mean[1], summ.half_width[0], summ.half_width[1])
        else:
            centroids[g] = (float(pts[0, 0]), float(pts[0, 1]), None, None)
            notes.append(f"{g}: n=1, confidence interval undefined")

    xs = [s.coords[0] for s in scores] + [0.0]
    ys = [s.coords[1] for s in scores] + [0.0]
    for mx, my, hx, hy in centroids.values():
        if hx is not None:
            xs += [mx - hx, mx + hx]
            ys += [my - hy, my + hy]
    cv = _Canvas(xs, ys, style)

    vf = list(variance_fraction) if variance_fraction is not None else None
    x_label = f"SVD1 ({100 * vf[0]:.1f}%)" if vf else "SVD1"
    y_label = f"SVD2 ({100 * vf[1]:.1f}%)" if vf and len(vf) > 1 else "SVD2"

    out = _open(style, "ENA scores")
    m = style.margin
    w, h = style.width, style.height
    out.append(f'<line class="axis" x1="{_f(m)}" y1="{_f(cv.y(0))}" x2="{_f(w - m)}" y2="{_f(cv.y(0))}" stroke="#999999" stroke-width="1"/>')
    out.append(f'<line class="axis" x1="{_f(cv.x(0))}" y1="{_f(m)}" x2="{_f(cv.x(0))}" y2="{_f(h - m)}" stroke="#999999" stroke-width="1"/>')
    out.append(_text(w / 2, h - m / 3, x_label, "axis-label"))
    out.append(_text(m / 3, h / 2, y_label, "axis-label", extra=f' transform="rotate(-90 {_f(m / 3)} {_f(h / 2)})"'))

    for s in scores:
        color = style.color(s.group, list(groups).index(s.group) if s.group in groups else len(groups))
        out.append(
            f'<circle class="unit" cx="{_f(cv.x(s.coords[0]))}" cy="{_f(cv.y(s.coords[1]))}" r="4" '
            f'fill="{color}" fill-opacity="0.75"><title>{escape(s.unit_key)}</title></circle>'
        )
    half_marker = 6.0
    for i, g in enumerate(groups):
        if g not in centroids:
            continue
        color = style.color(g, i)
        mx, my, hx, hy = centroids[g]
        if hx is not None:
            x0, x1 = cv.x(mx - hx), cv.x(mx + hx)
            y0, y1 = cv.y(my + hy), cv.y(my - hy)
            out.append(
                f'<rect class="ci-box" x="{_f(x0)}" y="{_f(y0)}" width="{_f(x1 - x0)}" height="{_f(y1 - y0)}" '
                f'fill="none" stroke="{color}" stroke-width="1.5" stroke-dasharray="4 2"/>'
            )
        out.append(
            f'<rect class="centroid" x="{_f(cv.x(mx) - half_marker)}" y="{_f(cv.y(my) - half_marker)}" '
            f'width="{_f(2 * half_marker)}" height="{_f(2 * half_marker)}" fill="{color}" stroke="#000000" stroke-width="1">'
            f"<title>{escape(g)} mean</title></rect>"
        )
    for i, g in enumerate(groups):
        y = m / 2 + i * (style.font_size + 4)
        out.append(_text(w - m, y, g, "legend", anchor="end", extra=f' fill="{style.color(g, i)}"'))
    for i, note in enumerate(notes):
        out.append(_text(m, m / 2 + i * (style.font_size + 4), note, "warning", anchor="start", extra=' fill="#b00000"'))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def edge_widths(weights: Sequence[float], max_width: float) -> np.ndarray:
    """Stroke widths proportional to |weight|, the strongest edge at ``max_width``."""
    w = np.abs(np.asarray(weights, dtype=float))
    top = w.max() if w.size else 0.0
    if top == 0:
        return np.zeros_like(w)
    return max_width * w / top


def node_strengths(weights: Sequence[float], k: int) -> np.ndarray:
    """Sum of incident |weight| per code."""
    w = np.abs(np.asarray(weights, dtype=float))
    totals = np.zeros(k)
    p = 0
    for i in range(k):
        for j in range(i + 1, k):
            totals[i] += w[p]
            totals[j] += w[p]
            p += 1
    return totals


def render_network(
    layout: NodeLayout,
    net: GroupNetwork,
    style: PlotStyle | None = None,
    groups: Sequence[str] | None = None,
) -> str:
    """Weighted network drawn at the fitted node positions.

    For subtraction networks, positive edges take the minuend's colour and
    negative edges the subtrahend's. ``groups`` fixes palette order.
    """
    style = style or PlotStyle()
    k = len(layout.codes)
    weights = np.asarray(net.edge_weights, dtype=float)
    if weights.size != k * (k - 1) // 2:
        raise ValueError(f"layout has {k} codes but network has {weights.size} edges")
    groups = list(groups or [])
    for label in (net.label, net.minuend, net.subtrahend):
        if label is not None and label not in groups:
            groups.append(label)

    coords = np.asarray(layout.node_coords, dtype=float)
    xs = coords[:, 0]
    ys = coords[:, 1] if coords.shape[1] > 1 else np.zeros(k)
    cv = _Canvas(xs, ys, style, pad=0.15)

    widths = edge_widths(weights, style.max_edge_width)
    strength = node_strengths(weights, k)
    top = strength.max()
    radii = style.node_radius * strength / top if top > 0 else np.full(k, style.node_radius * 0.4)
    radii = np.maximum(radii, 2.0)

    out = _open(style, f"ENA network: {net.label}")
    p = 0
    for i in range(k):
        for j in range(i + 1, k):
            w = weights[p]
            width = widths[p]
            p += 1
            if w == 0 or abs(w) < style.min_weight:
                continue
            if net.is_subtraction:
                owner = net.minuend if w > 0 else net.subtrahend
            else:
                owner = net.label
            color = style.color(owner, groups.index(owner))
            out.append(
                f'<line class="edge" x1="{_f(cv.x(xs[i]))}" y1="{_f(cv.y(ys[i]))}" x2="{_f(cv.x(xs[j]))}" '
                f'y2="{_f(cv.y(ys[j]))}" stroke="{color}" stroke-width="{_f(width)}" stroke-linecap="round">'
                f"<title>{escape(layout.codes[i])} &amp; {escape(layout.codes[j])}: {w:.4f}</title></line>"
            )
    for i, code in enumerate(layout.codes):
        cx, cy = cv.x(xs[i]), cv.y(ys[i])
        out.append(f'<circle class="node" cx="{_f(cx)}" cy="{_f(cy)}" r="{_f(radii[i])}" fill="#000000"/>')
        out.append(_text(cx, cy - radii[i] - 4, code, "node-label"))
    if not np.any(weights):
        out.append(_text(style.width / 2, style.margin / 2, "empty network: no co-occurrences", "annotation"))
    out.append(_text(style.margin / 3, style.height - style.margin / 3, net.label, "network-label", anchor="start"))
    out.append("</svg>")
    return "\n".join(out) + "\n"

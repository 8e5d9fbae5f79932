"""Deterministic SVG output for patches and layer tables."""

from __future__ import annotations

import colorsys
from typing import Sequence
from xml.sax.saxutils import escape

from .system import Tile, TilingSystem

WIDTH = 800.0
MARGIN = 10.0
LABEL_LIMIT = 400


def _fmt(v: float) -> str:
    s = f"{v:.3f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def proto_colour(p: int) -> str:
    h = (p * 0.6180339887498949) % 1.0
    r, g, b = colorsys.hls_to_rgb(h, 0.72, 0.55)
    return "#%02x%02x%02x" % (round(r * 255), round(g * 255), round(b * 255))


def _grey(k: int, depth: int) -> int:
    # layer 0 darkest, deepest layer lightest
    return round(40 + (k / depth if depth > 0 else 0.0) * 200)


def layer_colour(k: int, depth: int) -> str:
    v = _grey(k, depth)
    return "#%02x%02x%02x" % (v, v, v)


def render_svg(
    sys: TilingSystem,
    tiles: Sequence[Tile],
    layers: Sequence[int] | None = None,
    labels: bool | None = None,
    title: str | None = None,
) -> str:
    """SVG 1.1 document drawing the tiles, filled by prototile or by layer index."""
    if not tiles:
        raise ValueError("nothing to render")
    polys = []
    for t in tiles:
        pts = [v.approx() for v in sys.tile_polygon(t).vertices]
        polys.append(pts)
    xs = [z.real for pts in polys for z in pts]
    ys = [z.imag for pts in polys for z in pts]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    span = max(x1 - x0, y1 - y0, 1e-9)
    k = (WIDTH - 2 * MARGIN) / span
    w = (x1 - x0) * k + 2 * MARGIN
    h = (y1 - y0) * k + 2 * MARGIN

    def X(z: complex) -> str:
        return _fmt((z.real - x0) * k + MARGIN)

    def Y(z: complex) -> str:
        return _fmt((y1 - z.imag) * k + MARGIN)

    depth = max(layers) if layers else 0
    if labels is None:
        labels = len(tiles) <= LABEL_LIMIT
    stroke = _fmt(max(0.2, min(1.5, k * 0.02)))
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_fmt(w)}" height="{_fmt(h)}" '
        f'viewBox="0 0 {_fmt(w)} {_fmt(h)}">',
    ]
    if title:
        out.append(f"<title>{escape(title)}</title>")
    out.append(f'<g stroke="#202020" stroke-width="{stroke}" stroke-linejoin="round">')
    for i, (t, pts) in enumerate(zip(tiles, polys)):
        fill = layer_colour(layers[i], depth) if layers is not None else proto_colour(t.proto)
        d = " ".join(f"{X(z)},{Y(z)}" for z in pts)
        out.append(f'<polygon points="{d}" fill="{fill}"/>')
    out.append("</g>")
    if labels:
        fs = _fmt(max(4.0, min(24.0, k * 0.35)))
        out.append(f'<g font-family="sans-serif" font-size="{fs}" text-anchor="middle" dominant-baseline="central">')
        for i, t in enumerate(tiles):
            z = t.x.approx()
            colour = "#ffffff" if layers is not None and _grey(layers[i], depth) < 128 else "#000000"
            text = escape(sys.prototiles[t.proto].label)
            out.append(f'<text x="{X(z)}" y="{Y(z)}" fill="{colour}">{text}</text>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_layers(sys: TilingSystem, table, labels: bool | None = None) -> str:
    return render_svg(sys, table.tiles, table.layer, labels, title=f"layers of omega^{table.level}({table.proto})")

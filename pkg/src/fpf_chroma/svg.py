"""Deterministic SVG rendering of colorings for k <= 2.

Each cell is drawn once per class containing it.  The first class (lowest
index) paints a solid fill; further memberships are layered on top as
hatching in class order.  Coordinates are printed with fixed precision so
identical inputs give byte-identical files.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

from .geometry import DomainComplex

__all__ = ["PALETTE", "render_svg"]

PALETTE = (
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948",
    "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac", "#1b9e77", "#d95f02",
    "#7570b3", "#e7298a", "#66a61e", "#e6ab02",
)

_WIDTH = 800.0
_PAD = 20.0
_BAND = 40.0  # height of the strip used for 1-D domains


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def _color(index: int) -> str:
    return PALETTE[index % len(PALETTE)]


def render_svg(X: DomainComplex, classes, title: str = "") -> str:
    """Return the SVG document for ``classes`` (iterables of active cell ids)."""
    if X.k > 2:
        raise ValueError("plotting is only supported for k <= 2")
    classes = [sorted(X.leaves(c)) for c in classes]
    _, arr = X.arrays()
    lo = arr[:, :, 0].min(axis=0)
    hi = arr[:, :, 1].max(axis=0)
    span = [max(float(h - l), 1e-12) for l, h in zip(lo, hi)]
    sx = _WIDTH / span[0]
    if X.k == 2:
        sy = sx
        height = span[1] * sy
    else:
        sy = 1.0
        height = _BAND

    def rect(c):
        x0 = _PAD + (c.lo[0] - lo[0]) * sx
        w = (c.hi[0] - c.lo[0]) * sx
        if X.k == 2:
            # flip so y grows upward
            y0 = _PAD + (hi[1] - c.hi[1]) * sy
            h = (c.hi[1] - c.lo[1]) * sy
        else:
            y0, h = _PAD, _BAND
        return x0, y0, w, h

    legend_h = 18.0 * len(classes)
    total_w = _WIDTH + 2 * _PAD
    total_h = height + 3 * _PAD + legend_h
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(total_w)}" '
        f'height="{_fmt(total_h)}" viewBox="0 0 {_fmt(total_w)} {_fmt(total_h)}">',
    ]
    if title:
        out.append(f"<title>{escape(title)}</title>")
    out.append("<defs>")
    for i in range(len(classes)):
        out.append(
            f'<pattern id="hatch{i}" patternUnits="userSpaceOnUse" width="6" height="6" '
            f'patternTransform="rotate({45 + 30 * (i % 4)})">'
            f'<line x1="0" y1="0" x2="0" y2="6" stroke="{_color(i)}" stroke-width="2"/></pattern>'
        )
    out.append("</defs>")

    painted: set[int] = set()
    for i, ids in enumerate(classes):
        out.append(f'<g id="class{i}">')
        for cid in ids:
            x0, y0, w, h = rect(X[cid])
            fill = f"url(#hatch{i})" if cid in painted else _color(i)
            out.append(f'<rect x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(w)}" height="{_fmt(h)}" '
                       f'fill="{fill}" stroke="#333333" stroke-width="0.2" data-cell="{cid}"/>')
            painted.add(cid)
        out.append("</g>")

    y = height + 2 * _PAD
    for i, ids in enumerate(classes):
        out.append(f'<rect x="{_fmt(_PAD)}" y="{_fmt(y + 18 * i)}" width="12" height="12" '
                   f'fill="{_color(i)}"/>')
        out.append(f'<text x="{_fmt(_PAD + 18)}" y="{_fmt(y + 18 * i + 11)}" font-size="12" '
                   f'font-family="monospace">class {i}: {len(ids)} cells</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"

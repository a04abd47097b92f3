"""Standalone SVG line charts: axes, ticks, legend, one polyline per series.

No external assets, no timestamps -- output bytes depend only on the data,
so identical inputs give identical files.  Axis ranges cover the data
extents exactly: the smallest x maps to the left edge of the plot box, the
largest to the right edge (same for y), with a symmetric pad only when a
range is degenerate.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

WIDTH, HEIGHT = 640, 440
X0, X1 = 70.0, 470.0   # plot box, horizontal
Y0, Y1 = 40.0, 390.0   # plot box, vertical (Y0 = top)
_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")
_TICKS = 5


def _extent(values) -> tuple[float, float]:
    lo, hi = min(values), max(values)
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    return lo, hi


def emit_plot(path, series: dict, title: str = "", x_label: str = "", y_label: str = "") -> None:
    """Write a line chart of ``{name: [(x, y), ...]}`` to ``path`` as SVG.

    Every series must be non-empty and sorted by x; an empty mapping or an
    empty/unsorted series is an error.
    """
    if not series:
        raise ValueError("no series to plot")
    for name, pts in series.items():
        if not pts:
            raise ValueError(f"series {name!r} is empty")
        xs = [p[0] for p in pts]
        if any(b < a for a, b in zip(xs, xs[1:])):
            raise ValueError(f"series {name!r} is not sorted by x")

    all_pts = [p for pts in series.values() for p in pts]
    xmin, xmax = _extent([p[0] for p in all_pts])
    ymin, ymax = _extent([p[1] for p in all_pts])

    def px(x: float) -> float:
        return X0 + (x - xmin) / (xmax - xmin) * (X1 - X0)

    def py(y: float) -> float:
        return Y1 - (y - ymin) / (ymax - ymin) * (Y1 - Y0)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{X0}" y1="{Y1}" x2="{X1}" y2="{Y1}" stroke="black"/>',
        f'<line x1="{X0}" y1="{Y0}" x2="{X0}" y2="{Y1}" stroke="black"/>',
    ]
    if title:
        parts.append(
            f'<text x="{(X0 + X1) / 2:.4f}" y="24" text-anchor="middle" '
            f'font-size="15" font-family="sans-serif">{escape(title)}</text>'
        )
    for i in range(_TICKS):
        f = i / (_TICKS - 1)
        xv, yv = xmin + f * (xmax - xmin), ymin + f * (ymax - ymin)
        tx, ty = px(xv), py(yv)
        parts.append(f'<line x1="{tx:.4f}" y1="{Y1}" x2="{tx:.4f}" y2="{Y1 + 5}" stroke="black"/>')
        parts.append(
            f'<text x="{tx:.4f}" y="{Y1 + 20}" text-anchor="middle" font-size="11" '
            f'font-family="sans-serif">{xv:.4g}</text>'
        )
        parts.append(f'<line x1="{X0 - 5}" y1="{ty:.4f}" x2="{X0}" y2="{ty:.4f}" stroke="black"/>')
        parts.append(
            f'<text x="{X0 - 9}" y="{ty + 4:.4f}" text-anchor="end" font-size="11" '
            f'font-family="sans-serif">{yv:.4g}</text>'
        )
    if x_label:
        parts.append(
            f'<text x="{(X0 + X1) / 2:.4f}" y="{HEIGHT - 8}" text-anchor="middle" '
            f'font-size="13" font-family="sans-serif">{escape(x_label)}</text>'
        )
    if y_label:
        parts.append(
            f'<text x="16" y="{(Y0 + Y1) / 2:.4f}" text-anchor="middle" font-size="13" '
            f'font-family="sans-serif" transform="rotate(-90 16 {(Y0 + Y1) / 2:.4f})">'
            f"{escape(y_label)}</text>"
        )
    for i, (name, pts) in enumerate(series.items()):
        color = _PALETTE[i % len(_PALETTE)]
        coords = " ".join(f"{px(x):.4f},{py(y):.4f}" for x, y in pts)
        parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = Y0 + 16 + 18 * i
        parts.append(
            f'<line x1="{X1 + 14}" y1="{ly:.4f}" x2="{X1 + 38}" y2="{ly:.4f}" '
            f'stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{X1 + 44}" y="{ly + 4:.4f}" font-size="12" '
            f'font-family="sans-serif">{escape(str(name))}</text>'
        )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(parts) + "\n")

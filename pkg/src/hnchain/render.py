"""Minimal deterministic SVG renderings (scatter, heatmap).

CSV/JSON are the contractual outputs; these figures are conveniences with
fixed styling and byte-stable formatting, so reruns diff clean.
"""

from __future__ import annotations

from .diagnostics import SCAN_SENTINEL, PhaseScan

_W, _H, _PAD = 640, 480, 50


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _axis_range(values):
    lo, hi = min(values), max(values)
    if lo == hi:
        lo, hi = lo - 1.0, hi + 1.0
    span = hi - lo
    return lo - 0.05 * span, hi + 0.05 * span


def scatter_svg(points, path, title: str = "") -> None:
    """Scatter of (x, y) pairs, e.g. a spectrum in the complex plane."""
    xs = [float(p[0]) for p in points]
    ys = [float(p[1]) for p in points]
    x0, x1 = _axis_range(xs)
    y0, y1 = _axis_range(ys)
    sx = (_W - 2 * _PAD) / (x1 - x0)
    sy = (_H - 2 * _PAD) / (y1 - y0)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<line x1="{_PAD}" y1="{_H - _PAD}" x2="{_W - _PAD}" y2="{_H - _PAD}" '
        'stroke="black" stroke-width="1"/>',
        f'<line x1="{_PAD}" y1="{_PAD}" x2="{_PAD}" y2="{_H - _PAD}" '
        'stroke="black" stroke-width="1"/>',
    ]
    if title:
        out.append(f'<text x="{_W // 2}" y="24" text-anchor="middle" '
                   f'font-family="monospace" font-size="14">{title}</text>')
    for x, y in zip(xs, ys):
        cx = _PAD + (x - x0) * sx
        cy = _H - _PAD - (y - y0) * sy
        out.append(f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="3" fill="#1f5fa8"/>')
    out.append(
        f'<text x="{_W - _PAD}" y="{_H - _PAD + 30}" text-anchor="end" '
        f'font-family="monospace" font-size="11">x: [{_fmt(x0)}, {_fmt(x1)}]  '
        f'y: [{_fmt(y0)}, {_fmt(y1)}]</text>'
    )
    out.append("</svg>")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(out) + "\n")


def _heat_color(t: float) -> str:
    # three-stop linear map: deep purple -> orange -> light yellow
    stops = ((48, 8, 84), (224, 112, 48), (252, 248, 184))
    t = min(max(t, 0.0), 1.0)
    if t < 0.5:
        a, b, u = stops[0], stops[1], t * 2
    else:
        a, b, u = stops[1], stops[2], (t - 0.5) * 2
    rgb = tuple(round(a[i] + (b[i] - a[i]) * u) for i in range(3))
    return f"rgb({rgb[0]},{rgb[1]},{rgb[2]})"


def heatmap_svg(scan: PhaseScan, path, title: str = "") -> None:
    """Phase-scan heatmap; flagged cells render gray."""
    nr, nd = len(scan.ratio_axis), len(scan.delta_axis)
    finite = [v for row in scan.values for v in row if v != SCAN_SENTINEL]
    lo = min(finite) if finite else 0.0
    hi = max(finite) if finite else 1.0
    if lo == hi:
        hi = lo + 1.0
    cw = (_W - 2 * _PAD) / nr
    ch = (_H - 2 * _PAD) / nd
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{_W // 2}" y="24" text-anchor="middle" '
                   f'font-family="monospace" font-size="14">{title}</text>')
    for i in range(nd):
        for j in range(nr):
            v = scan.values[i][j]
            color = "#b0b0b0" if scan.flags[i][j] else _heat_color((v - lo) / (hi - lo))
            x = _PAD + j * cw
            y = _H - _PAD - (i + 1) * ch  # delta increases upward
            out.append(
                f'<rect x="{_fmt(x)}" y="{_fmt(y)}" width="{_fmt(cw + 0.5)}" '
                f'height="{_fmt(ch + 0.5)}" fill="{color}"/>'
            )
    out.append(
        f'<text x="{_PAD}" y="{_H - _PAD + 30}" font-family="monospace" font-size="11">'
        f'ratio: [{_fmt(scan.ratio_axis[0])}, {_fmt(scan.ratio_axis[-1])}]  '
        f'delta: [{_fmt(scan.delta_axis[0])}, {_fmt(scan.delta_axis[-1])}]  '
        f'value: [{_fmt(lo)}, {_fmt(hi)}]</text>'
    )
    out.append("</svg>")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(out) + "\n")

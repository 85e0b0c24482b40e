"""Minimal SVG emission: line charts and boolean-grid shading.

Deliberately framework-free; charts are simple scaled polylines with
axis boxes and tick labels, adequate for inspecting study outputs.
"""

from __future__ import annotations

import math

_COLORS = ("#1f6feb", "#d1242f", "#1a7f37", "#9a6700", "#8250df", "#57606a")


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    span = hi - lo
    step = 10 ** math.floor(math.log10(span / n))
    for mult in (1, 2, 5, 10):
        if span / (step * mult) <= n:
            step *= mult
            break
    first = math.ceil(lo / step) * step
    out = []
    t = first
    while t <= hi + 1e-12 * span:
        out.append(round(t, 12))
        t += step
    return out


class LineChart:
    """Polyline chart; add series then render to an SVG string or file."""

    def __init__(self, title: str = "", x_label: str = "", y_label: str = "",
                 width: int = 640, height: int = 420):
        self.title, self.x_label, self.y_label = title, x_label, y_label
        self.width, self.height = width, height
        self.series: list[tuple[str, list[float], list[float]]] = []

    def add(self, label: str, xs, ys) -> None:
        xs = [float(v) for v in xs]
        ys = [float(v) for v in ys]
        if len(xs) != len(ys):
            raise ValueError("x/y length mismatch")
        self.series.append((label, xs, ys))

    def render(self, comment: str = "") -> str:
        m_l, m_r, m_t, m_b = 64, 16, 34, 46
        iw, ih = self.width - m_l - m_r, self.height - m_t - m_b
        xs_all = [x for _, xs, _ in self.series for x in xs] or [0.0, 1.0]
        ys_all = [y for _, _, ys in self.series for y in ys] or [0.0, 1.0]
        x_lo, x_hi = min(xs_all), max(xs_all)
        y_lo, y_hi = min(ys_all), max(ys_all)
        if x_hi == x_lo:
            x_hi = x_lo + 1.0
        if y_hi == y_lo:
            y_hi = y_lo + 1.0

        def sx(x: float) -> float:
            return m_l + (x - x_lo) / (x_hi - x_lo) * iw

        def sy(y: float) -> float:
            return m_t + ih - (y - y_lo) / (y_hi - y_lo) * ih

        parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" '
                 f'height="{self.height}" font-family="sans-serif" font-size="11">']
        if comment:
            parts.append(f"<!-- {comment} -->")
        parts.append(f'<rect x="{m_l}" y="{m_t}" width="{iw}" height="{ih}" '
                     'fill="white" stroke="#57606a"/>')
        for tx in _ticks(x_lo, x_hi):
            parts.append(f'<line x1="{sx(tx):.1f}" y1="{m_t + ih}" x2="{sx(tx):.1f}" '
                         f'y2="{m_t + ih + 4}" stroke="#57606a"/>')
            parts.append(f'<text x="{sx(tx):.1f}" y="{m_t + ih + 16}" '
                         f'text-anchor="middle">{tx:g}</text>')
        for ty in _ticks(y_lo, y_hi):
            parts.append(f'<line x1="{m_l - 4}" y1="{sy(ty):.1f}" x2="{m_l}" '
                         f'y2="{sy(ty):.1f}" stroke="#57606a"/>')
            parts.append(f'<text x="{m_l - 7}" y="{sy(ty) + 4:.1f}" '
                         f'text-anchor="end">{ty:g}</text>')
        for i, (label, xs, ys) in enumerate(self.series):
            pts = " ".join(f"{sx(x):.1f},{sy(y):.1f}" for x, y in zip(xs, ys))
            color = _COLORS[i % len(_COLORS)]
            parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                         'stroke-width="1.5"/>')
            parts.append(f'<text x="{m_l + 8}" y="{m_t + 14 + 14 * i}" '
                         f'fill="{color}">{label}</text>')
        if self.title:
            parts.append(f'<text x="{self.width / 2}" y="18" text-anchor="middle" '
                         f'font-size="13">{self.title}</text>')
        if self.x_label:
            parts.append(f'<text x="{m_l + iw / 2}" y="{self.height - 8}" '
                         f'text-anchor="middle">{self.x_label}</text>')
        if self.y_label:
            parts.append(f'<text x="14" y="{m_t + ih / 2}" text-anchor="middle" '
                         f'transform="rotate(-90 14 {m_t + ih / 2})">{self.y_label}</text>')
        parts.append("</svg>")
        return "\n".join(parts)

    def save(self, path: str, comment: str = "") -> None:
        with open(path, "w") as fh:
            fh.write(self.render(comment))


def grid_chart(mask, x_values, y_values, title: str = "", x_label: str = "",
               y_label: str = "", comment: str = "", cell_color: str = "#9cd3a8",
               width: int = 520, height: int = 460) -> str:
    """Shade cells of a boolean grid (mask[i][j] over y_values[i], x_values[j])."""
    m_l, m_r, m_t, m_b = 64, 16, 34, 46
    iw, ih = width - m_l - m_r, height - m_t - m_b
    nx, ny = len(x_values), len(y_values)
    cw, ch = iw / nx, ih / ny
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
             f'height="{height}" font-family="sans-serif" font-size="11">']
    if comment:
        parts.append(f"<!-- {comment} -->")
    parts.append(f'<rect x="{m_l}" y="{m_t}" width="{iw}" height="{ih}" '
                 'fill="white" stroke="#57606a"/>')
    for i in range(ny):
        for j in range(nx):
            if mask[i][j]:
                x = m_l + j * cw
                y = m_t + ih - (i + 1) * ch
                parts.append(f'<rect x="{x:.1f}" y="{y:.1f}" width="{cw + 0.5:.1f}" '
                             f'height="{ch + 0.5:.1f}" fill="{cell_color}"/>')
    for frac, val in ((0.0, x_values[0]), (0.5, x_values[nx // 2]), (1.0, x_values[-1])):
        parts.append(f'<text x="{m_l + frac * iw:.1f}" y="{m_t + ih + 16}" '
                     f'text-anchor="middle">{float(val):g}</text>')
    for frac, val in ((0.0, y_values[0]), (0.5, y_values[ny // 2]), (1.0, y_values[-1])):
        parts.append(f'<text x="{m_l - 7}" y="{m_t + ih - frac * ih + 4:.1f}" '
                     f'text-anchor="end">{float(val):g}</text>')
    if title:
        parts.append(f'<text x="{width / 2}" y="18" text-anchor="middle" '
                     f'font-size="13">{title}</text>')
    if x_label:
        parts.append(f'<text x="{m_l + iw / 2}" y="{height - 8}" text-anchor="middle">{x_label}</text>')
    if y_label:
        parts.append(f'<text x="14" y="{m_t + ih / 2}" text-anchor="middle" '
                     f'transform="rotate(-90 14 {m_t + ih / 2})">{y_label}</text>')
    parts.append("</svg>")
    return "\n".join(parts)

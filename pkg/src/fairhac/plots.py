"""Minimal grouped bar chart rendered directly as SVG text."""

from __future__ import annotations

from xml.sax.saxutils import escape

PALETTE = ("#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3")


def bar_chart_svg(title: str, categories: list[str], series: dict[str, list[float]],
                  y_range: tuple[float, float] = (-1.0, 1.0), width: int = 640, height: int = 360) -> str:
    lo, hi = y_range
    left, right, top, bottom = 60, 130, 40, 40
    plot_w = width - left - right
    plot_h = height - top - bottom

    def y(v: float) -> float:
        v = min(max(v, lo), hi)
        return top + plot_h * (hi - v) / (hi - lo)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-family="sans-serif" font-size="15">{escape(title)}</text>',
    ]
    for i in range(5):
        v = lo + (hi - lo) * i / 4
        out.append(f'<line x1="{left}" x2="{left + plot_w}" y1="{y(v):.1f}" y2="{y(v):.1f}" stroke="#ddd"/>')
        out.append(f'<text x="{left - 6}" y="{y(v) + 4:.1f}" text-anchor="end" font-family="sans-serif" font-size="11">{v:.2f}</text>')
    out.append(f'<line x1="{left}" x2="{left + plot_w}" y1="{y(0):.1f}" y2="{y(0):.1f}" stroke="#333"/>')

    names = list(series)
    group_w = plot_w / max(len(categories), 1)
    bar_w = group_w * 0.8 / max(len(names), 1)
    for ci, cat in enumerate(categories):
        x0 = left + ci * group_w + group_w * 0.1
        for si, name in enumerate(names):
            v = series[name][ci]
            top_y, bot_y = sorted((y(v), y(0)))
            out.append(
                f'<rect x="{x0 + si * bar_w:.1f}" y="{top_y:.1f}" width="{bar_w * 0.92:.1f}" '
                f'height="{max(bot_y - top_y, 0.5):.1f}" fill="{PALETTE[si % len(PALETTE)]}">'
                f"<title>{escape(name)} / {escape(cat)}: {v:.4f}</title></rect>"
            )
        out.append(
            f'<text x="{x0 + group_w * 0.4:.1f}" y="{height - bottom + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="12">{escape(cat)}</text>'
        )
    for si, name in enumerate(names):
        ly = top + 10 + si * 18
        out.append(f'<rect x="{width - right + 12}" y="{ly - 9}" width="10" height="10" fill="{PALETTE[si % len(PALETTE)]}"/>')
        out.append(f'<text x="{width - right + 28}" y="{ly}" font-family="sans-serif" font-size="12">{escape(name)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"

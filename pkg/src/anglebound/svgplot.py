"""Minimal deterministic SVG line charts (log-x convergence curves).

Emits polylines, axes, tick labels, and a legend; no plotting dependency,
and identical input always yields identical bytes.
"""

import math

WIDTH = 720
HEIGHT = 480
MARGIN_LEFT = 70
MARGIN_RIGHT = 170
MARGIN_TOP = 40
MARGIN_BOTTOM = 55

PALETTE = ("#555555", "#c0392b", "#e67e22", "#2471a3", "#1e8449", "#7d3c98",
           "#b7950b", "#117a65")


def _fmt(v):
    return f"{v:.2f}".rstrip("0").rstrip(".")


def _tick_label(v):
    if v != 0 and (abs(v) >= 1e4 or abs(v) < 1e-3):
        return f"{v:.0e}" if v == int(v) else f"{v:.1e}"
    return f"{v:.4g}"


def _nice_linear_ticks(lo, hi, target=6):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-12 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks


def line_chart(series, title="", xlabel="", ylabel="", log_x=True):
    """Render labeled (xs, ys) series to an SVG string.

    series: iterable of (label, xs, ys) with positive xs when log_x is True.
    """
    series = [(label, list(xs), list(ys)) for label, xs, ys in series]
    xs_all = [x for _, xs, _ in series for x in xs]
    ys_all = [y for _, _, ys in series for y in ys]
    if not xs_all:
        raise ValueError("no data to plot")
    if log_x and min(xs_all) <= 0:
        raise ValueError("log-x chart requires positive x values")

    def tx(x):
        if log_x:
            lo, hi = math.log10(min(xs_all)), math.log10(max(xs_all))
            x = math.log10(x)
        else:
            lo, hi = min(xs_all), max(xs_all)
        span = (hi - lo) or 1.0
        return MARGIN_LEFT + (x - lo) / span * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)

    y_lo = min(0.0, min(ys_all))
    y_hi = max(ys_all)
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0
    y_pad = 0.05 * (y_hi - y_lo)
    y_lo -= y_pad
    y_hi += y_pad

    def ty(y):
        return HEIGHT - MARGIN_BOTTOM - (y - y_lo) / (y_hi - y_lo) * (
            HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
    ]
    if title:
        parts.append(f'<text x="{WIDTH // 2}" y="24" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="16">{title}</text>')

    axis_y = HEIGHT - MARGIN_BOTTOM
    axis_x_end = WIDTH - MARGIN_RIGHT
    parts.append(f'<line x1="{MARGIN_LEFT}" y1="{axis_y}" x2="{axis_x_end}" y2="{axis_y}" '
                 'stroke="#000000" stroke-width="1"/>')
    parts.append(f'<line x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" x2="{MARGIN_LEFT}" '
                 f'y2="{axis_y}" stroke="#000000" stroke-width="1"/>')

    if log_x:
        d_lo = math.floor(math.log10(min(xs_all)))
        d_hi = math.ceil(math.log10(max(xs_all)))
        x_ticks = [10.0 ** d for d in range(int(d_lo), int(d_hi) + 1)
                   if min(xs_all) <= 10.0 ** d <= max(xs_all) * (1 + 1e-12)]
    else:
        x_ticks = _nice_linear_ticks(min(xs_all), max(xs_all))
    for t in x_ticks:
        px = tx(t)
        parts.append(f'<line x1="{_fmt(px)}" y1="{axis_y}" x2="{_fmt(px)}" '
                     f'y2="{axis_y + 5}" stroke="#000000" stroke-width="1"/>')
        parts.append(f'<text x="{_fmt(px)}" y="{axis_y + 20}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="12">{_tick_label(t)}</text>')
    for t in _nice_linear_ticks(y_lo, y_hi):
        py = ty(t)
        parts.append(f'<line x1="{MARGIN_LEFT - 5}" y1="{_fmt(py)}" x2="{MARGIN_LEFT}" '
                     f'y2="{_fmt(py)}" stroke="#000000" stroke-width="1"/>')
        parts.append(f'<text x="{MARGIN_LEFT - 9}" y="{_fmt(py + 4)}" text-anchor="end" '
                     f'font-family="sans-serif" font-size="12">{_tick_label(t)}</text>')

    if xlabel:
        parts.append(f'<text x="{(MARGIN_LEFT + axis_x_end) // 2}" y="{HEIGHT - 12}" '
                     f'text-anchor="middle" font-family="sans-serif" font-size="13">'
                     f'{xlabel}</text>')
    if ylabel:
        cy = (MARGIN_TOP + axis_y) // 2
        parts.append(f'<text x="18" y="{cy}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="13" '
                     f'transform="rotate(-90 18 {cy})">{ylabel}</text>')

    for i, (label, xs, ys) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        points = " ".join(f"{_fmt(tx(x))},{_fmt(ty(y))}" for x, y in zip(xs, ys))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" '
                     f'points="{points}"/>')
        ly = MARGIN_TOP + 16 + 18 * i
        lx = axis_x_end + 12
        parts.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" y2="{ly - 4}" '
                     f'stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{lx + 28}" y="{ly}" font-family="sans-serif" '
                     f'font-size="12">{label}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"

"""Minimal deterministic SVG plotting (no external plotting dependency).

Output contains no timestamps or random identifiers, so identical inputs
produce byte-identical files.
"""

from __future__ import annotations

import math

import numpy as np

_W, _H = 720, 480
_ML, _MR, _MT, _MB = 70, 30, 40, 55          # margins
_COLORS = ("#1f6fb2", "#c44e52", "#2a9d5c", "#8a5fb0")


def _fmt(x: float) -> str:
    return f"{x:.2f}".rstrip("0").rstrip(".")


def _nice_ticks(lo: float, hi: float, target: int = 6):
    """Round tick positions covering [lo, hi]."""
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1, 2, 2.5, 5, 10):
        if raw <= mult * mag:
            step = mult * mag
            break
    t0 = math.ceil(lo / step) * step
    ticks = []
    t = t0
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 else t)
        t += step
    return ticks


class _Canvas:
    def __init__(self, width=_W, height=_H):
        self.width, self.height = width, height
        self.parts = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
            f'height="{height}" viewBox="0 0 {width} {height}">',
            f'<rect width="{width}" height="{height}" fill="white"/>']

    def line(self, x1, y1, x2, y2, color="#888", width=1.0, dash=None):
        d = f' stroke-dasharray="{dash}"' if dash else ""
        self.parts.append(
            f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" '
            f'stroke="{color}" stroke-width="{width}"{d}/>')

    def polyline(self, pts, color, width=1.6):
        coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in pts)
        self.parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" '
            f'stroke-width="{width}"/>')

    def text(self, x, y, s, size=13, anchor="middle", color="#222",
             rotate=None):
        r = f' transform="rotate({rotate} {x:.2f} {y:.2f})"' if rotate else ""
        self.parts.append(
            f'<text x="{x:.2f}" y="{y:.2f}" font-family="sans-serif" '
            f'font-size="{size}" text-anchor="{anchor}" fill="{color}"{r}>'
            f"{s}</text>")

    def render(self) -> str:
        return "\n".join(self.parts + ["</svg>"]) + "\n"


def _xy_plot(title, xlabel, ylabel, series, y_clip=None):
    """series: list of (label, x_array, y_array)."""
    xs = np.concatenate([np.asarray(s[1], dtype=float) for s in series])
    ys = np.concatenate([np.asarray(s[2], dtype=float) for s in series])
    ys = ys[np.isfinite(ys)]
    if y_clip is not None:
        ys = np.clip(ys, y_clip[0], y_clip[1])
    x_lo, x_hi = float(xs.min()), float(xs.max())
    y_lo, y_hi = float(ys.min()), float(ys.max())
    if y_hi - y_lo < 1e-9:
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    c = _Canvas()
    px0, px1 = _ML, _W - _MR
    py0, py1 = _H - _MB, _MT

    def sx(x): return px0 + (x - x_lo) / (x_hi - x_lo) * (px1 - px0)

    def sy(y): return py0 + (y - y_lo) / (y_hi - y_lo) * (py1 - py0)

    for t in _nice_ticks(x_lo, x_hi):
        c.line(sx(t), py0, sx(t), py1, color="#e0e0e0")
        c.text(sx(t), py0 + 18, _fmt(t), size=11)
    for t in _nice_ticks(y_lo, y_hi):
        c.line(px0, sy(t), px1, sy(t), color="#e0e0e0")
        c.text(px0 - 8, sy(t) + 4, _fmt(t), size=11, anchor="end")
    c.line(px0, py0, px1, py0, color="#444")
    c.line(px0, py0, px0, py1, color="#444")
    c.text((px0 + px1) / 2, _H - 12, xlabel)
    c.text(20, (py0 + py1) / 2, ylabel, rotate=-90)
    c.text((px0 + px1) / 2, 22, title, size=15)

    for k, (label, x, y) in enumerate(series):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        m = np.isfinite(y)
        if y_clip is not None:
            y = np.clip(y, y_clip[0], y_clip[1])
        col = _COLORS[k % len(_COLORS)]
        c.polyline([(sx(a), sy(b)) for a, b in zip(x[m], y[m])], col)
        lx = px1 - 150
        ly = py1 + 16 + 18 * k
        c.line(lx, ly - 4, lx + 26, ly - 4, color=col, width=2)
        c.text(lx + 32, ly, label, size=12, anchor="start")
    return c.render()


def s11_plot(spectra_by_state: dict, threshold_db: float = -10.0) -> str:
    """S11(dB) vs frequency overlay, one curve per switch state, with the
    bandwidth threshold marked."""
    series = [(f"switch {state}", sp.frequency / 1e9, sp.s11_db)
              for state, sp in spectra_by_state.items()]
    svg = _xy_plot("Reflection coefficient", "frequency (GHz)", "S11 (dB)",
                   series, y_clip=(-60.0, 5.0))
    # threshold rule drawn on top, in data coordinates recomputed the same way
    return svg.replace("</svg>", _threshold_line(series, threshold_db) + "</svg>")


def _threshold_line(series, threshold_db):
    ys = np.concatenate([np.clip(np.asarray(s[2], float), -60, 5)
                         for s in series])
    ys = ys[np.isfinite(ys)]
    y_lo, y_hi = float(ys.min()), float(ys.max())
    if y_hi - y_lo < 1e-9:
        y_lo, y_hi = y_lo - 1, y_hi + 1
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad
    if not (y_lo <= threshold_db <= y_hi):
        return ""
    py0, py1 = _H - _MB, _MT
    y = py0 + (threshold_db - y_lo) / (y_hi - y_lo) * (py1 - py0)
    return (f'<line x1="{_ML}" y1="{y:.2f}" x2="{_W - _MR}" y2="{y:.2f}" '
            f'stroke="#999" stroke-width="1" stroke-dasharray="6 4"/>\n')


def vswr_plot(spectra_by_state: dict) -> str:
    """VSWR vs frequency overlay (clipped at 10 for readability)."""
    series = []
    for state, sp in spectra_by_state.items():
        v = np.minimum(np.where(np.isinf(sp.vswr), 10.0, sp.vswr), 10.0)
        series.append((f"switch {state}", sp.frequency / 1e9, v))
    return _xy_plot("Voltage standing-wave ratio", "frequency (GHz)", "VSWR",
                    series)


def pattern_cut_plot(patterns_by_state: dict, phi_deg: float = 0.0) -> str:
    """Principal-plane gain cut: gain(dBi) vs theta at fixed phi, both
    switch states overlaid."""
    series = []
    for state, pat in patterns_by_state.items():
        j = int(np.argmin(np.abs(np.asarray(pat.phi_deg) - phi_deg)))
        g = np.clip(pat.gain_dbi[:, j], -40.0, None)
        series.append((f"switch {state}", pat.theta_deg, g))
    return _xy_plot(f"Gain cut at phi = {_fmt(phi_deg)} deg",
                    "theta (deg)", "gain (dBi)", series)


def write_svg(path, svg_text: str):
    with open(path, "w", newline="\n") as fh:
        fh.write(svg_text)

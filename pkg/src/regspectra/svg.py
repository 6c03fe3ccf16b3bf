"""Minimal deterministic SVG emission for experiment artifacts.

Hand-rolled on purpose: plots are diff-able text, byte-identical across
reruns (fixed float formatting, no timestamps), and free of image-codec
dependencies.  Each renderer returns the complete SVG document as a string;
callers own file writing.
"""

from __future__ import annotations

import math

import numpy as np

WIDTH = 480
HEIGHT = 480
MARGIN = 40.0

_STYLE = (
    "text{font-family:monospace;font-size:11px;fill:#333}"
    ".axis{stroke:#888;stroke-width:1;fill:none}"
    ".pt{fill:#1f5fa8;fill-opacity:0.55;stroke:none}"
    ".overlay{stroke:#c44;stroke-width:1.2;fill:none;stroke-dasharray:4 3}"
    ".curve{stroke:#c44;stroke-width:1.2;fill:none}"
    ".curve2{stroke:#2a8a2a;stroke-width:1.2;fill:none}"
    ".curve3{stroke:#a050c8;stroke-width:1.2;fill:none}"
    ".data{stroke:#1f5fa8;stroke-width:1.2;fill:none}"
)


def _fmt(x: float) -> str:
    """Fixed coordinate formatting: two decimals, no negative zero."""
    s = f"{x:.2f}"
    return "0.00" if s == "-0.00" else s


def _header(title: str) -> list:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" '
        f'width="{WIDTH}" height="{HEIGHT}">',
        f"<style>{_STYLE}</style>",
        f'<text x="{_fmt(MARGIN)}" y="16">{title}</text>',
    ]


def _polyline(xs, ys, cls: str) -> str:
    pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in zip(xs, ys))
    return f'<polyline class="{cls}" points="{pts}"/>'


class _Frame:
    """Affine map from data coordinates to the plot frame."""

    def __init__(self, x0, x1, y0, y1):
        self.x0, self.x1 = x0, x1
        self.y0, self.y1 = y0, y1
        span_x = x1 - x0 or 1.0
        span_y = y1 - y0 or 1.0
        self.sx = (WIDTH - 2 * MARGIN) / span_x
        self.sy = (HEIGHT - 2 * MARGIN) / span_y

    def x(self, v):
        return MARGIN + (np.asarray(v, dtype=np.float64) - self.x0) * self.sx

    def y(self, v):
        return HEIGHT - MARGIN - (np.asarray(v, dtype=np.float64) - self.y0) * self.sy

    def frame_rect(self) -> str:
        return (f'<rect class="axis" x="{_fmt(MARGIN)}" y="{_fmt(MARGIN)}" '
                f'width="{_fmt(WIDTH - 2 * MARGIN)}" height="{_fmt(HEIGHT - 2 * MARGIN)}"/>')

    def corner_labels(self, fmt="{:.3g}") -> list:
        return [
            f'<text x="{_fmt(MARGIN)}" y="{_fmt(HEIGHT - MARGIN + 14.0)}">{fmt.format(self.x0)}</text>',
            f'<text x="{_fmt(WIDTH - MARGIN - 30.0)}" y="{_fmt(HEIGHT - MARGIN + 14.0)}">{fmt.format(self.x1)}</text>',
            f'<text x="{_fmt(4.0)}" y="{_fmt(HEIGHT - MARGIN)}">{fmt.format(self.y0)}</text>',
            f'<text x="{_fmt(4.0)}" y="{_fmt(MARGIN + 10.0)}">{fmt.format(self.y1)}</text>',
        ]


def render_scatter(atoms, *, overlay_radius=1.0, title="eigenvalues") -> str:
    """Complex-plane scatter with a reference circle of the given radius."""
    z = np.asarray(atoms, dtype=np.complex128)
    lim = max(float(np.max(np.abs(z))) if z.size else 1.0, overlay_radius) * 1.08
    fr = _Frame(-lim, lim, -lim, lim)
    parts = _header(title)
    parts.append(fr.frame_rect())
    parts.extend(fr.corner_labels())
    cx, cy = fr.x(0.0), fr.y(0.0)
    r_px = overlay_radius * fr.sx
    parts.append(f'<circle class="overlay" cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(r_px)}"/>')
    for w in z:
        parts.append(
            f'<circle class="pt" cx="{_fmt(fr.x(w.real))}" cy="{_fmt(fr.y(w.imag))}" r="1.60"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_sv_profile(svals, *, bound_report=None, floor=1e-30,
                      title="singular values") -> str:
    """Index-vs-log10(s) profile with the three lower-bound curves.

    Bounds come from an SvBoundReport's knobs when given; curves are drawn in
    the same (rescaled) units as the input profile.
    """
    s = np.asarray(svals, dtype=np.float64)
    n = s.size
    ys = np.log10(np.maximum(s, floor))
    y_lo = float(min(ys.min(), -1.0))
    y_hi = float(max(ys.max(), 0.5))
    fr = _Frame(1.0, float(n), y_lo, y_hi)
    parts = _header(title)
    parts.append(fr.frame_rect())
    parts.extend(fr.corner_labels())
    ks = np.arange(1, n + 1, dtype=np.float64)
    parts.append(_polyline(fr.x(ks), fr.y(ys), "data"))
    if bound_report is not None:
        from .hermitization import bulk_window, intermediate_window

        rep = bound_report
        root_d = math.sqrt(rep.d)
        if rep.smallest.applicable:
            lvl = math.log10(max(float(n) ** (-6.0) / root_d, floor))
            parts.append(_polyline([fr.x(1.0), fr.x(float(n))],
                                   [fr.y(lvl), fr.y(lvl)], "curve"))
        k1 = bulk_window(n, rep.d, rep.C_bulk)
        if k1 >= 1:
            kk = np.arange(1, k1 + 1, dtype=np.float64)
            bb = np.log10(np.maximum(rep.c_bulk * (n - kk) / n, floor))
            parts.append(_polyline(fr.x(kk), fr.y(bb), "curve2"))
        lo, hi = intermediate_window(n, rep.d)
        if lo <= hi:
            kk = np.arange(lo, hi + 1, dtype=np.float64)
            bb = np.log10(np.maximum(
                np.exp(-rep.C_inter * (n / (n - kk)) ** (1.0 / 144.0)) / root_d, floor))
            parts.append(_polyline(fr.x(kk), fr.y(bb), "curve3"))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_radial_cdf(atoms, law, *, title="radial cdf") -> str:
    """Empirical radial CDF staircase against the law's radial CDF curve."""
    radii = np.sort(np.abs(np.asarray(atoms, dtype=np.complex128)))
    n = radii.size
    x_max = max(float(radii[-1]) if n else 1.0, 1.0) * 1.05
    fr = _Frame(0.0, x_max, 0.0, 1.0)
    parts = _header(title)
    parts.append(fr.frame_rect())
    parts.extend(fr.corner_labels())
    grid = np.linspace(0.0, x_max, 201)
    parts.append(_polyline(fr.x(grid), fr.y([law.radial_cdf(r) for r in grid]), "curve"))
    xs, ys = [0.0], [0.0]
    for i, r in enumerate(radii, start=1):
        xs.extend([float(r), float(r)])
        ys.extend([(i - 1) / n, i / n])
    xs.append(x_max)
    ys.append(1.0)
    parts.append(_polyline([fr.x(v) for v in xs], [fr.y(v) for v in ys], "data"))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_series(series, *, title="series", logy=False, labels=()) -> str:
    """One or more (x, y) polylines on a shared frame (general-purpose)."""
    cleaned = []
    for xs, ys in series:
        xs = np.asarray(xs, dtype=np.float64)
        ys = np.asarray(ys, dtype=np.float64)
        if logy:
            ys = np.log10(np.maximum(ys, 1e-300))
        cleaned.append((xs, ys))
    x_lo = min(float(x.min()) for x, _ in cleaned)
    x_hi = max(float(x.max()) for x, _ in cleaned)
    y_lo = min(float(y.min()) for _, y in cleaned)
    y_hi = max(float(y.max()) for _, y in cleaned)
    fr = _Frame(x_lo, x_hi, y_lo, y_hi)
    parts = _header(title)
    parts.append(fr.frame_rect())
    parts.extend(fr.corner_labels())
    classes = ("data", "curve", "curve2", "curve3")
    for idx, (xs, ys) in enumerate(cleaned):
        parts.append(_polyline(fr.x(xs), fr.y(ys), classes[idx % len(classes)]))
    for idx, text in enumerate(labels):
        parts.append(
            f'<text x="{_fmt(WIDTH - MARGIN - 150.0)}" y="{_fmt(MARGIN + 14.0 * (idx + 1))}"'
            f' class="{classes[idx % len(classes)]}">{text}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
"""Minimal self-contained SVG time-series plots (no plotting dependency).

These are conveniences for eyeballing runs; every number in them is also in
the CSV, which is the artifact of record.
"""

from __future__ import annotations

import numpy as np

_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def write_timeseries_svg(path, times, series: dict, title: str = "",
                         width: int = 860, height: int = 360) -> None:
    """Write one SVG with a polyline per named series over the time axis."""
    times = np.asarray(times, dtype=float)
    ml, mr, mt, mb = 70, 20, 30, 45
    pw, ph = width - ml - mr, height - mt - mb
    finite_vals = np.concatenate([np.asarray(v, dtype=float) for v in series.values()]) if series else np.zeros(1)
    finite_vals = finite_vals[np.isfinite(finite_vals)]
    lo = float(finite_vals.min()) if finite_vals.size else 0.0
    hi = float(finite_vals.max()) if finite_vals.size else 1.0
    if hi - lo < 1e-300:
        hi = lo + 1.0
    t0 = float(times.min()) if times.size else 0.0
    t1 = float(times.max()) if times.size else 1.0
    if t1 - t0 < 1e-300:
        t1 = t0 + 1.0

    def sx(t):
        return ml + (t - t0) / (t1 - t0) * pw

    def sy(v):
        return mt + (hi - v) / (hi - lo) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{ml}" y="18" font-family="monospace" font-size="13">{title}</text>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#888"/>',
    ]
    for frac in (0.0, 0.5, 1.0):
        tv = t0 + frac * (t1 - t0)
        vv = lo + frac * (hi - lo)
        parts.append(
            f'<text x="{sx(tv):.1f}" y="{height - 18}" font-family="monospace" '
            f'font-size="11" text-anchor="middle">{_fmt(tv)}</text>'
        )
        parts.append(
            f'<text x="{ml - 6}" y="{sy(vv):.1f}" font-family="monospace" '
            f'font-size="11" text-anchor="end">{_fmt(vv)}</text>'
        )
    parts.append(
        f'<text x="{ml + pw / 2:.1f}" y="{height - 4}" font-family="monospace" '
        f'font-size="11" text-anchor="middle">t</text>'
    )
    for i, (name, vals) in enumerate(series.items()):
        vals = np.asarray(vals, dtype=float)
        color = _PALETTE[i % len(_PALETTE)]
        pts = " ".join(
            f"{sx(t):.2f},{sy(v):.2f}" for t, v in zip(times, vals) if np.isfinite(v)
        )
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.2"/>')
        parts.append(
            f'<text x="{width - mr - 4}" y="{mt + 14 + 14 * i}" font-family="monospace" '
            f'font-size="11" text-anchor="end" fill="{color}">{name}</text>'
        )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")

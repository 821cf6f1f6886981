"""Trace CSV and SVG plot writers.

Numbers are written with 17 significant digits, so a re-run of the same
configuration reproduces the file byte for byte.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .simulator import Trace


def csv_header(n: int) -> list[str]:
    cols = ["t"]
    for prefix in ("q", "qdot", "qd", "qddotd", "eps", "u", "u_raw"):
        cols += [f"{prefix}{i}" for i in range(1, n + 1)]
    cols.append("energy")
    return cols


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def trace_to_csv(trace: Trace) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(csv_header(trace.n))
    # qd = desired position, qddotd = desired acceleration
    blocks = np.hstack(
        [trace.t[:, None], trace.q, trace.qdot, trace.q_d, trace.qdd_d, trace.eps, trace.u, trace.u_raw, trace.energy[:, None]]
    )
    for row in blocks.tolist():
        writer.writerow([fmt(x) for x in row])
    return buf.getvalue()


def write_trace_csv(trace: Trace, path: Path) -> None:
    Path(path).write_text(trace_to_csv(trace))


def read_trace_csv(path: Path) -> tuple[list[str], np.ndarray]:
    """Header and data matrix of a trace CSV."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


# ---------------------------------------------------------------------------
# SVG

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
_WIDTH, _PANEL_H, _MARGIN_L, _MARGIN_R, _MARGIN_T, _GAP = 720, 220, 70, 20, 30, 50
_MAX_POINTS = 2000


def _panel(t, series, labels, title, top) -> list[str]:
    x0, x1 = _MARGIN_L, _WIDTH - _MARGIN_R
    y0, y1 = top, top + _PANEL_H
    t_min, t_max = float(t[0]), float(t[-1])
    lo = float(np.min(series)) if series.size else 0.0
    hi = float(np.max(series)) if series.size else 1.0
    if hi - lo < 1e-12:
        lo, hi = lo - 1.0, hi + 1.0
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    span_t = (t_max - t_min) or 1.0

    def sx(v):
        return x0 + (v - t_min) / span_t * (x1 - x0)

    def sy(v):
        return y1 - (v - lo) / (hi - lo) * (y1 - y0)

    out = [
        f'<rect x="{x0}" y="{y0}" width="{x1 - x0}" height="{_PANEL_H}" fill="none" stroke="#444"/>',
        f'<text x="{x0}" y="{y0 - 8}" font-size="13">{title}</text>',
        f'<text x="{x0 - 6}" y="{y0 + 10}" font-size="10" text-anchor="end">{hi:.3g}</text>',
        f'<text x="{x0 - 6}" y="{y1}" font-size="10" text-anchor="end">{lo:.3g}</text>',
        f'<text x="{x0}" y="{y1 + 14}" font-size="10">{t_min:.3g} s</text>',
        f'<text x="{x1}" y="{y1 + 14}" font-size="10" text-anchor="end">{t_max:.3g} s</text>',
    ]
    if lo < 0.0 < hi:
        out.append(f'<line x1="{x0}" y1="{sy(0.0):.2f}" x2="{x1}" y2="{sy(0.0):.2f}" stroke="#bbb" stroke-dasharray="4 3"/>')
    stride = max(1, len(t) // _MAX_POINTS)
    for j in range(series.shape[1]):
        color = _COLORS[j % len(_COLORS)]
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(t[::stride], series[::stride, j]))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{pts}"/>')
        out.append(
            f'<text x="{x1 - 60}" y="{y0 + 16 + 14 * j}" font-size="11" fill="{color}">{labels[j]}</text>'
        )
    return out


def trace_to_svg(trace: Trace) -> str:
    """Two stacked line plots: tracking error and applied torque."""
    n = trace.n
    height = _MARGIN_T + 2 * _PANEL_H + _GAP + 30
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{height}" '
        f'viewBox="0 0 {_WIDTH} {height}" font-family="sans-serif">',
        f'<rect width="{_WIDTH}" height="{height}" fill="white"/>',
    ]
    parts += _panel(trace.t, trace.eps, [f"eps{j + 1}" for j in range(n)], "tracking error eps [rad]", _MARGIN_T)
    parts += _panel(
        trace.t, trace.u, [f"u{j + 1}" for j in range(n)], "applied torque u [N m]",
        _MARGIN_T + _PANEL_H + _GAP,
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_trace_svg(trace: Trace, path: Path) -> None:
    Path(path).write_text(trace_to_svg(trace))

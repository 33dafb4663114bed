"""CSV traces, JSON reference summaries and hand-written SVG plots.

All writers produce byte-identical files for identical inputs: reals are
rendered with 17 significant digits, dictionaries are key-sorted and SVG
coordinates use a fixed number of decimals.
"""

import csv
import hashlib
import io
import json
import math
import os
from typing import NamedTuple, Optional
from xml.sax.saxutils import escape

import numpy as np

from .regularizers import signature_key

__all__ = [
    "CSV_HEADER",
    "PlotSeries",
    "emit_csv",
    "emit_svg",
    "read_csv",
    "signature_hash",
    "write_bundle",
    "write_reference",
]

CSV_HEADER = (
    "k",
    "prox_steps",
    "f_value",
    "subopt",
    "accelerated",
    "in_z",
    "alpha",
    "correct_manifolds",
    "spurious_manifolds",
    "signature_hash",
)


def _real(x):
    return format(float(x), ".17g")


def signature_hash(signature):
    """Short stable digest of a signature (sha256 of its canonical text)."""
    return hashlib.sha256(signature_key(signature).encode()).hexdigest()[:16]


def _write_text(path, text):
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def emit_csv(trace, series, path, f_floor):
    """Write one row per iteration of ``trace``.

    ``series`` is the matching identification series and ``f_floor`` the
    value subtracted to form the ``subopt`` column.
    """
    if len(trace) == 0:
        raise ValueError("refusing to write an empty trace")
    if len(series) != len(trace):
        raise ValueError("trace and identification series differ in length")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for rec, correct, spurious in zip(trace.records, series.correct.tolist(), series.spurious.tolist()):
        w.writerow(
            (
                rec.k,
                rec.prox_steps,
                _real(rec.f_value),
                _real(rec.f_value - f_floor),
                int(rec.accelerated),
                int(rec.in_z),
                _real(rec.alpha),
                correct,
                spurious,
                signature_hash(rec.signature),
            )
        )
    _write_text(path, buf.getvalue())
    return path


def read_csv(path):
    """Load a trace CSV back into a dict of column arrays."""
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValueError(f"{path} is not a trace CSV")
    cols = list(zip(*rows[1:])) if len(rows) > 1 else [()] * len(CSV_HEADER)
    out = {}
    for name, col in zip(CSV_HEADER, cols):
        if name in ("f_value", "subopt", "alpha"):
            out[name] = np.array([float(v) for v in col])
        elif name == "signature_hash":
            out[name] = list(col)
        elif name in ("accelerated", "in_z"):
            out[name] = np.array([v == "1" for v in col])
        else:
            out[name] = np.array([int(v) for v in col], dtype=np.int64)
    return out


def write_reference(bundle, path):
    """JSON summary: reference solution, floor and per-algorithm metrics."""
    ref = bundle.reference
    truth = bundle.scenario.ground_truth
    doc = {
        "scenario": bundle.scenario.name,
        "params": bundle.scenario.params,
        "f_star": ref.f_star,
        "f_floor": bundle.f_floor,
        "signature": sorted(signature_key(frozenset([m])) for m in ref.signature),
        "signature_hash": signature_hash(ref.signature),
        "subopt_achieved": ref.subopt_achieved if math.isfinite(ref.subopt_achieved) else None,
        "converged": ref.converged,
        "reference_iterations": ref.iterations,
        "point": np.asarray(ref.point).ravel().tolist(),
        "algorithms": {
            algo: {
                "prox_steps": int(tr.records[-1].prox_steps),
                "final_subopt": float(tr.records[-1].f_value - bundle.f_floor),
                "first_full_identification": bundle.metrics[algo][0],
                "holes_after_first": bundle.metrics[algo][1],
                "non_accelerated": int(np.count_nonzero(~tr.accelerated)),
            }
            for algo, tr in bundle.traces.items()
        },
    }
    if truth is not None:
        # informational: distance of the reference to the generating signal
        doc["ground_truth_distance"] = float(np.linalg.norm(np.asarray(ref.point) - truth))
    _write_text(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path


class PlotSeries(NamedTuple):
    label: str
    x: np.ndarray
    y: np.ndarray
    marker: Optional[int] = None  # index of the identification moment


_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")
_W, _H = 720, 460
_LEFT, _RIGHT, _TOP, _BOTTOM = 70, 150, 30, 50


def _keep_steps(y):
    """Indices that draw a step function exactly: first, last and each change."""
    n = len(y)
    change = np.flatnonzero(np.diff(y) != 0)
    idx = np.concatenate(([0], change, change + 1, [n - 1]))
    return np.unique(idx)


def _keep_even(n, cap=2000):
    if n <= cap:
        return np.arange(n)
    return np.unique(np.linspace(0, n - 1, cap).round().astype(np.int64))


def _fmt(v):
    return f"{v:.2f}"


def _tick_label(v, log):
    if log:
        return f"1e{int(round(v))}"
    return f"{v:g}"


def emit_svg(series_set, kind, path, title=None, floor=1e-16):
    """Self-contained SVG line plot against proximal-gradient steps.

    ``kind`` is ``"suboptimality"`` (log-scale ``y``; values below ``floor``,
    including nonpositive ones, are drawn at ``floor``) or
    ``"identification"`` (linear count). Each series is one polyline; a
    circled cross marks its ``marker`` index when given.
    """
    if kind not in ("suboptimality", "identification"):
        raise ValueError("kind must be 'suboptimality' or 'identification'")
    series_set = list(series_set)
    if not series_set:
        raise ValueError("at least one series is required")
    if not floor > 0:
        raise ValueError("floor must be positive")
    log = kind == "suboptimality"
    prepared = []
    for s in series_set:
        x = np.asarray(s.x, dtype=np.float64)
        y = np.asarray(s.y, dtype=np.float64)
        if x.shape != y.shape or x.size == 0:
            raise ValueError(f"series {s.label!r} is empty or has mismatched x and y")
        if log:
            y = np.log10(np.maximum(y, floor))
        prepared.append((s.label, x, y, s.marker))

    x_lo = min(float(p[1].min()) for p in prepared)
    x_hi = max(float(p[1].max()) for p in prepared)
    y_lo = min(float(p[2].min()) for p in prepared)
    y_hi = max(float(p[2].max()) for p in prepared)
    if log:
        y_lo, y_hi = math.floor(y_lo), math.ceil(y_hi)
    else:
        y_lo = min(0.0, y_lo)
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0
    pw, ph = _W - _LEFT - _RIGHT, _H - _TOP - _BOTTOM

    def sx(v):
        return _LEFT + (v - x_lo) / (x_hi - x_lo) * pw

    def sy(v):
        return _TOP + ph - (v - y_lo) / (y_hi - y_lo) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}" '
        'font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<rect x="{_LEFT}" y="{_TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    if title:
        out.append(f'<text x="{_LEFT + pw / 2:.2f}" y="18" text-anchor="middle">{escape(title)}</text>')

    # axes ticks
    n_yt = int(y_hi - y_lo) if log else 5
    step = max(1, math.ceil(n_yt / 8)) if log else (y_hi - y_lo) / 5
    ticks = []
    v = y_lo
    while v <= y_hi + 1e-9:
        ticks.append(v)
        v += step
    for v in ticks:
        yy = _fmt(sy(v))
        out.append(f'<line x1="{_LEFT - 4}" y1="{yy}" x2="{_LEFT}" y2="{yy}" stroke="black"/>')
        out.append(f'<text x="{_LEFT - 6}" y="{yy}" text-anchor="end" dy="4">{_tick_label(v, log)}</text>')
    for i in range(6):
        v = x_lo + i * (x_hi - x_lo) / 5
        xx = _fmt(sx(v))
        out.append(f'<line x1="{xx}" y1="{_TOP + ph}" x2="{xx}" y2="{_TOP + ph + 4}" stroke="black"/>')
        out.append(f'<text x="{xx}" y="{_TOP + ph + 18}" text-anchor="middle">{v:.0f}</text>')
    out.append(
        f'<text x="{_LEFT + pw / 2:.2f}" y="{_H - 10}" text-anchor="middle">proximal gradient steps</text>'
    )
    ylabel = "suboptimality (log10)" if log else "correct manifolds"
    out.append(
        f'<text x="16" y="{_TOP + ph / 2:.2f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {_TOP + ph / 2:.2f})">{ylabel}</text>'
    )

    for i, (label, x, y, marker) in enumerate(prepared):
        color = _COLORS[i % len(_COLORS)]
        keep = _keep_steps(y) if not log else _keep_even(len(y))
        if not log:
            # step rendering: hold each value until the next change
            pts = []
            for j, idx in enumerate(keep):
                if j and y[idx] != y[keep[j - 1]]:
                    pts.append((x[idx], y[keep[j - 1]]))
                pts.append((x[idx], y[idx]))
        else:
            pts = [(x[idx], y[idx]) for idx in keep]
        coords = " ".join(f"{_fmt(sx(a))},{_fmt(sy(b))}" for a, b in pts)
        out.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{coords}">'
            f"<title>{escape(label)}</title></polyline>"
        )
        if marker is not None:
            mx, my = _fmt(sx(x[marker])), _fmt(sy(y[marker]))
            out.append(
                f'<g stroke="{color}" fill="none" stroke-width="1.5"><circle cx="{mx}" cy="{my}" r="6"/>'
                f'<line x1="{_fmt(sx(x[marker]) - 6)}" y1="{my}" x2="{_fmt(sx(x[marker]) + 6)}" y2="{my}"/>'
                f'<line x1="{mx}" y1="{_fmt(sy(y[marker]) - 6)}" x2="{mx}" y2="{_fmt(sy(y[marker]) + 6)}"/></g>'
            )
        ly = _TOP + 16 + 20 * i
        lx = _LEFT + pw + 12
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 24}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 30}" y="{ly + 4}">{escape(label)}</text>')
    out.append("</svg>")
    _write_text(path, "\n".join(out) + "\n")
    return path


def _marker_index(series):
    full = np.flatnonzero((series.correct == series.n_target) & (series.spurious == 0))
    return int(full[0]) if full.size else None


def write_bundle(bundle, out_dir, svg=False):
    """Lay out ``<out>/<scenario>/{<algo>.csv, reference.json, plots/*.svg}``.

    Returns the list of written paths.
    """
    root = os.path.join(out_dir, bundle.scenario.name)
    try:
        os.makedirs(root, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create {root}: {exc.strerror or exc}") from exc
    written = []
    for algo, tr in bundle.traces.items():
        written.append(emit_csv(tr, bundle.series[algo], os.path.join(root, f"{algo}.csv"), bundle.f_floor))
    written.append(write_reference(bundle, os.path.join(root, "reference.json")))
    if svg:
        written.extend(plot_bundle(bundle, root))
    return written


def plot_bundle(bundle, root):
    plots = os.path.join(root, "plots")
    os.makedirs(plots, exist_ok=True)
    floor = np.finfo(np.float64).eps * max(1.0, abs(bundle.f_floor))
    sub, ident = [], []
    for algo, tr in bundle.traces.items():
        ser = bundle.series[algo]
        mark = _marker_index(ser)
        x = tr.prox_steps
        sub.append(PlotSeries(algo, x, tr.f_values - bundle.f_floor, mark))
        ident.append(PlotSeries(algo, x, ser.correct, mark))
    name = bundle.scenario.name
    return [
        emit_svg(sub, "suboptimality", os.path.join(plots, "suboptimality.svg"), title=name, floor=floor),
        emit_svg(ident, "identification", os.path.join(plots, "identification.svg"), title=name),
    ]

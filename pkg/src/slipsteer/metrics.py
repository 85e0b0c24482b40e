"""Per-segment tracking and gracefulness indices.

Error statistics run over every trace row inside a segment; the
final-error index decimates the trace to 10 Hz first and takes the last
ten of those samples.  Convergence means the lateral error entered the
0.1 m band and stayed there through the segment end (a touch-only
interpretation is available as an option).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .engine import RunFailure, SimTrace

CONVERGENCE_BAND = 0.1  # m
METRIC_RATE_HZ = 10.0


@dataclass(frozen=True)
class SegmentMetrics:
    seg_index: int
    E_RMS: float
    E_RNG: float
    E_L10: float
    converged: bool
    A_RMS: float
    short_segment: bool  # fewer than 10 decimated samples were available
    n_samples: int


def _rms(x: np.ndarray) -> float:
    return float(math.sqrt(np.mean(np.square(x)))) if x.size else float("nan")


def segment_metrics(trace: SimTrace, boundaries: list[float] | None = None,
                    touch_only: bool = False) -> list[SegmentMetrics]:
    """Metrics for each [s_i, s_{i+1}) span of the path."""
    if boundaries is None:
        boundaries = trace.segment_boundaries
    s = trace["s_ref"]
    y_e = trace["y_e"]
    a_err = trace["a_y"] - trace["a_y_ref"]
    t = trace["t"]
    dt = float(t[1] - t[0]) if len(t) > 1 else 0.01
    decim = max(1, int(round(1.0 / (METRIC_RATE_HZ * dt))))

    out = []
    for i, (s_lo, s_hi) in enumerate(zip(boundaries, boundaries[1:])):
        if i == len(boundaries) - 2:
            mask = (s >= s_lo) & (s <= s_hi)
        else:
            mask = (s >= s_lo) & (s < s_hi)
        idx = np.flatnonzero(mask)
        if idx.size == 0:
            out.append(SegmentMetrics(i, float("nan"), float("nan"), float("nan"),
                                      False, float("nan"), True, 0))
            continue
        ye_seg = y_e[idx]
        dec = ye_seg[::decim]
        last10 = dec[-10:]
        inside = np.abs(ye_seg) <= CONVERGENCE_BAND
        # Maintain-to-end: whatever is still inside at the segment end entered
        # earlier and never left again, so the last sample decides.
        converged = bool(inside.any()) if touch_only else bool(inside[-1])
        out.append(SegmentMetrics(
            seg_index=i,
            E_RMS=_rms(ye_seg),
            E_RNG=float(ye_seg.max() - ye_seg.min()),
            E_L10=_rms(last10),
            converged=converged,
            A_RMS=_rms(a_err[idx]),
            short_segment=dec.size < 10,
            n_samples=int(idx.size),
        ))
    return out


@dataclass
class Aggregate:
    """Mean/std of each metric across a batch, plus the convergence rate."""

    controller: str
    n_runs: int
    n_failures: int
    rows: dict[int, dict[str, float]]  # seg_index -> stats


METRIC_NAMES = ("E_RMS", "E_RNG", "E_L10", "A_RMS")


def aggregate(results: list, controller: str,
              touch_only: bool = False) -> Aggregate:
    """Mean +- std per segment over a batch of traces for one controller."""
    traces = [r for r in results if isinstance(r, SimTrace)]
    failures = len(results) - len(traces)
    per_seg: dict[int, dict[str, list[float]]] = {}
    for tr in traces:
        for m in segment_metrics(tr, touch_only=touch_only):
            bucket = per_seg.setdefault(m.seg_index, {k: [] for k in METRIC_NAMES + ("C",)})
            for k in METRIC_NAMES:
                bucket[k].append(getattr(m, k))
            bucket["C"].append(1.0 if m.converged else 0.0)
    rows = {}
    for seg, bucket in sorted(per_seg.items()):
        stats: dict[str, float] = {}
        for k in METRIC_NAMES:
            vals = np.asarray(bucket[k])
            stats[f"{k}_avg"] = float(np.nanmean(vals))
            stats[f"{k}_std"] = float(np.nanstd(vals))
        stats["pct_C"] = float(100.0 * np.mean(bucket["C"]))
        rows[seg] = stats
    return Aggregate(controller=controller, n_runs=len(traces),
                     n_failures=failures, rows=rows)


SEGMENT_LABELS = "abcdefghijklmnopqrstuvwxyz"


def report_text(aggregates: list[Aggregate]) -> str:
    """Human-readable comparison table, one block per segment."""
    if not aggregates:
        return "(no results)\n"
    segs = sorted({s for a in aggregates for s in a.rows})
    lines = []
    header = f"{'SEG':4s} {'metric':8s}" + "".join(
        f"{a.controller:>20s}" for a in aggregates)
    lines.append(header)
    lines.append("-" * len(header))
    for seg in segs:
        label = SEGMENT_LABELS[seg % 26] + "1"
        for k in METRIC_NAMES:
            cells = []
            for a in aggregates:
                row = a.rows.get(seg)
                cells.append("          --        " if row is None else
                             f"  {row[f'{k}_avg']:7.3f}±{row[f'{k}_std']:<8.3f}")
            lines.append(f"{label:4s} {k:8s}" + "".join(cells))
        cells = []
        for a in aggregates:
            row = a.rows.get(seg)
            cells.append("          --        " if row is None else
                         f"  {row['pct_C']:7.0f}%{'':<9s}")
        lines.append(f"{label:4s} {'%C':8s}" + "".join(cells))
        lines.append("")
    for a in aggregates:
        if a.n_failures:
            lines.append(f"note: {a.controller} had {a.n_failures} failed run(s)")
    return "\n".join(lines) + "\n"


def report_csv(aggregates: list[Aggregate]) -> str:
    lines = ["controller,seg,metric,avg,std"]
    for a in aggregates:
        for seg, row in a.rows.items():
            label = SEGMENT_LABELS[seg % 26] + "1"
            for k in METRIC_NAMES:
                lines.append(f"{a.controller},{label},{k},"
                             f"{row[f'{k}_avg']!r},{row[f'{k}_std']!r}")
            lines.append(f"{a.controller},{label},pct_C,{row['pct_C']!r},0.0")
    return "\n".join(lines) + "\n"

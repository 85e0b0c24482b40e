"""Reference paths: lines, arcs, and Euler spirals with arc-length sampling.

Paths are immutable chains of G1-continuous segments (position and tangent
match at joints; curvature may jump, which is a feature under test).
Clothoid positions are evaluated by adaptive Gauss-Legendre quadrature of
the quadratic-phase integrand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

KAPPA_LIMIT = 0.0658  # 1/m, curvature bound for valid road geometry
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)


class PathSpecError(ValueError):
    """Segment list violates continuity or curvature limits."""


@dataclass(frozen=True)
class RefSample:
    """Reference posture at arc length s."""

    s: float
    x: float
    y: float
    theta: float
    kappa: float
    dkappa_ds: float     # curvature slope within the segment (0 for line/arc)
    seg_index: int
    clamped: bool = False


@dataclass(frozen=True)
class PathSegment:
    """One primitive: 'line', 'arc', or 'clothoid' with linear curvature."""

    kind: str
    length: float
    kappa_start: float
    kappa_end: float

    def __post_init__(self) -> None:
        if self.kind not in ("line", "arc", "clothoid"):
            raise PathSpecError(f"unknown segment kind {self.kind!r}")
        if self.length <= 0.0:
            raise PathSpecError("segment length must be positive")
        if self.kind == "line" and (self.kappa_start != 0.0 or self.kappa_end != 0.0):
            raise PathSpecError("line segments must have zero curvature")
        if self.kind == "arc" and (self.kappa_start != self.kappa_end or self.kappa_start == 0.0):
            raise PathSpecError("arc segments need equal nonzero start/end curvature")
        if max(abs(self.kappa_start), abs(self.kappa_end)) > KAPPA_LIMIT:
            raise PathSpecError(f"curvature exceeds the {KAPPA_LIMIT} 1/m road limit")

    def kappa_at(self, ds: float) -> float:
        if self.kind == "line":
            return 0.0
        if self.kind == "arc":
            return self.kappa_start
        return self.kappa_start + (self.kappa_end - self.kappa_start) * ds / self.length

    def theta_at(self, ds: float) -> float:
        """Heading change accumulated over the first ds of the segment."""
        if self.kind == "line":
            return 0.0
        if self.kind == "arc":
            return self.kappa_start * ds
        k0, k1, L = self.kappa_start, self.kappa_end, self.length
        return k0 * ds + 0.5 * (k1 - k0) * ds * ds / L


def line(length: float) -> PathSegment:
    return PathSegment("line", length, 0.0, 0.0)


def arc(radius: float, length: float | None = None,
        angle_deg: float | None = None) -> PathSegment:
    """Arc of signed radius; positive radius turns left.

    Give either the arc length or the swept angle in degrees.
    """
    if (length is None) == (angle_deg is None):
        raise PathSpecError("arc needs exactly one of length / angle_deg")
    if length is None:
        length = abs(radius) * math.radians(abs(angle_deg))
    return PathSegment("arc", length, 1.0 / radius, 1.0 / radius)


def clothoid(kappa_start: float, kappa_end: float, length: float) -> PathSegment:
    if kappa_start == kappa_end:
        raise PathSpecError("clothoid needs varying curvature; use arc/line instead")
    return PathSegment("clothoid", length, kappa_start, kappa_end)


def _clothoid_xy(seg: PathSegment, theta0: float, ds: float,
                 tol: float = 1e-9) -> tuple[float, float]:
    """Displacement over [0, ds] of a clothoid, by panel-doubling GL quadrature."""
    k0, dk = seg.kappa_start, (seg.kappa_end - seg.kappa_start) / seg.length

    def quad(n_panels: int) -> tuple[float, float]:
        x = y = 0.0
        width = ds / n_panels
        for p in range(n_panels):
            mid = (p + 0.5) * width
            pts = mid + 0.5 * width * _GL_NODES
            th = theta0 + k0 * pts + 0.5 * dk * pts * pts
            x += 0.5 * width * float(np.dot(_GL_WEIGHTS, np.cos(th)))
            y += 0.5 * width * float(np.dot(_GL_WEIGHTS, np.sin(th)))
        return x, y

    prev = quad(1)
    for n in (2, 4, 8):
        cur = quad(n)
        if abs(cur[0] - prev[0]) < tol and abs(cur[1] - prev[1]) < tol:
            return cur
        prev = cur
    return prev


class Path:
    """Immutable G1 chain of segments, queryable by arc length."""

    def __init__(self, segments: list[PathSegment],
                 start_pose: tuple[float, float, float] = (0.0, 0.0, 0.0)):
        if not segments:
            raise PathSpecError("path needs at least one segment")
        self.segments = tuple(segments)
        self._starts = []  # (x, y, theta) at each segment start
        self._cum = [0.0]
        x, y, th = start_pose
        for seg in segments:
            self._starts.append((x, y, th))
            dx, dy = self._segment_displacement(seg, th)
            x, y = x + dx, y + dy
            th = th + seg.theta_at(seg.length)
            self._cum.append(self._cum[-1] + seg.length)
        self._end_pose = (x, y, th)
        self._cum_arr = np.asarray(self._cum)
        self.total_length = self._cum[-1]

    @staticmethod
    def _segment_displacement(seg: PathSegment, theta0: float) -> tuple[float, float]:
        if seg.kind == "line":
            return seg.length * math.cos(theta0), seg.length * math.sin(theta0)
        if seg.kind == "arc":
            k = seg.kappa_start
            th1 = theta0 + k * seg.length
            return (math.sin(th1) - math.sin(theta0)) / k, (math.cos(theta0) - math.cos(th1)) / k
        return _clothoid_xy(seg, theta0, seg.length)

    def segment_boundaries(self) -> list[float]:
        """Cumulative arc lengths [0, s1, ..., total]."""
        return list(self._cum)

    def seg_index_at(self, s: float) -> int:
        i = int(np.searchsorted(self._cum_arr, s, side="right")) - 1
        return min(max(i, 0), len(self.segments) - 1)

    def sample(self, s: float) -> RefSample:
        """Reference posture at arc length s; out-of-range s clamps and flags."""
        clamped = False
        if s < 0.0:
            s, clamped = 0.0, True
        elif s > self.total_length:
            s, clamped = self.total_length, True
        i = self.seg_index_at(s)
        seg = self.segments[i]
        ds = s - self._cum[i]
        x0, y0, th0 = self._starts[i]
        if seg.kind == "line":
            x = x0 + ds * math.cos(th0)
            y = y0 + ds * math.sin(th0)
            th = th0
        elif seg.kind == "arc":
            k = seg.kappa_start
            th = th0 + k * ds
            x = x0 + (math.sin(th) - math.sin(th0)) / k
            y = y0 + (math.cos(th0) - math.cos(th)) / k
        else:
            dx, dy = _clothoid_xy(seg, th0, ds)
            x, y, th = x0 + dx, y0 + dy, th0 + seg.theta_at(ds)
        dk = 0.0
        if seg.kind == "clothoid":
            dk = (seg.kappa_end - seg.kappa_start) / seg.length
        return RefSample(s=s, x=x, y=y, theta=th, kappa=seg.kappa_at(ds),
                         dkappa_ds=dk, seg_index=i, clamped=clamped)

    def polyline(self, step: float = 1.0) -> np.ndarray:
        """Dense (s, x, y, theta, kappa) table for export/plotting."""
        ss = np.arange(0.0, self.total_length + 0.5 * step, step)
        ss[-1] = min(ss[-1], self.total_length)
        rows = [(p.s, p.x, p.y, p.theta, p.kappa) for p in (self.sample(s) for s in ss)]
        return np.asarray(rows)


def build_path(segments: list[PathSegment],
               start_pose: tuple[float, float, float] = (0.0, 0.0, 0.0)) -> Path:
    """Validate and assemble a path; rejects tangent breaks by construction.

    Segments chain tangentially (each starts on the previous end pose), so
    the only way to violate G1 is a malformed segment, which PathSegment
    itself rejects.  Curvature limits are checked per segment.
    """
    return Path(segments, start_pose)


# The three evaluation paths.

def l_path() -> Path:
    """40 m line, 90 deg left arc of 50 m radius, 40 m line."""
    return build_path([line(40.0), arc(50.0, angle_deg=90.0), line(40.0)])


def s_path() -> Path:
    """Mirrored Euler spirals, 100 m radius right then left, 100 m each."""
    return build_path([clothoid(-0.01, 0.0, 100.0), clothoid(0.0, 0.01, 100.0)])


def comprehensive_path() -> Path:
    """Six-segment course: long line, tight arc, two spirals, two short arcs.

    Segment lengths follow the course as surveyed; the short final arcs
    keep their 100 m radii, which implies a 10 deg sweep each.
    """
    return build_path([
        line(120.0),
        arc(50.0, angle_deg=225.0),
        clothoid(0.02, 0.0, 17.5),
        clothoid(0.0, -0.01, 34.9),
        arc(-100.0, length=17.5),
        arc(100.0, length=17.5),
    ])


PATHS = {"l_path": l_path, "s_path": s_path, "comprehensive": comprehensive_path}

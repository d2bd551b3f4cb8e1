"""Zero counting by the argument principle and zero location by subdivision.

The contour integral (1/2 pi i) \\oint f'/f ds is evaluated segment by
segment with adaptive Gauss-Kronrod (7/15) quadrature and interval halving.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .boundary import DEFAULT_SAMPLES_PER_UNIT, BoundaryPath, StripRegion, build_boundary
from .complexcore import HolomorphicFunction
from .errors import (
    InvalidResidual,
    MaxDepthExceeded,
    PoleOnBoundary,
    QuadratureNotConverged,
    ZeroFreeError,
    ZeroOnContour,
    ZeroOnCut,
)

DEFAULT_TOL = 1e-8
MAX_LEVELS = 48
# a sample whose Newton step |f/f'| is below this (times 1 + |s|) sits on a zero
CONTOUR_CLEARANCE = 1e-9
GOLDEN = (1 + 5 ** 0.5) / 2
JITTER = 1e-3
JITTER_RETRIES = 5
# runaway refinement: an unresolved piece this short sits on a zero, too many pieces means no convergence
MIN_INTERVAL = 1e-11
MAX_ACTIVE_INTERVALS = 100_000
# pieces whose error is below this fraction of the integral of |f'/f| are at round-off level
ROUNDOFF_FLOOR = 1e-8
NEWTON_STEPS = 60

_XGK = (
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
)
_WGK = (
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
)
_WGK0 = 0.209482141084727828012999174891714
_WG = (0.129484966168869693270611432679082, 0.279705391489276667901467771423780, 0.381830050505118944950369775488975)
_WG0 = 0.417959183673469387755102040816327

NODES = np.array([-x for x in _XGK] + [0.0] + list(reversed(_XGK)))
KRONROD_W = np.array(list(_WGK) + [_WGK0] + list(reversed(_WGK)))
GAUSS_W = np.zeros(15)
for _i, _w in zip((1, 3, 5), _WG):
    GAUSS_W[_i] = GAUSS_W[14 - _i] = _w
GAUSS_W[7] = _WG0


def max_workers() -> int:
    """Worker cap from ZEROFREE_THREADS, defaulting to the machine's parallelism."""
    env = os.environ.get("ZEROFREE_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


@dataclass(frozen=True)
class WindingResult:
    raw_integral: complex
    rounded_count: int
    residual: float
    quadrature_error_estimate: float
    path: dict
    evaluations: int
    intervals: int

    @property
    def valid(self) -> bool:
        return self.residual < 0.5


@dataclass(frozen=True)
class ZeroBox:
    corner: complex
    width: float
    height: float
    contained_count: int

    @property
    def diameter(self) -> float:
        return math.hypot(self.width, self.height)

    @property
    def center(self) -> complex:
        return self.corner + complex(self.width / 2, self.height / 2)

    def contains(self, z) -> bool:
        z = complex(z)
        return (self.corner.real <= z.real <= self.corner.real + self.width
                and self.corner.imag <= z.imag <= self.corner.imag + self.height)

    def region(self) -> StripRegion:
        return StripRegion(self.corner.real, self.corner.real + self.width,
                           self.corner.imag, self.corner.imag + self.height)


def _integrand(f: HolomorphicFunction, shift: float):
    def g(z):
        try:
            if shift:
                return f.diff(z) / (f(z) + 1j * shift)
            return f.log_derivative(z)
        except ZeroFreeError as exc:
            point = getattr(exc, "point", None)
            raise PoleOnBoundary(z.ravel()[0] if point is None else point, exc) from exc
    return g


def _newton_polish(f: HolomorphicFunction, z: np.ndarray, steps: int = NEWTON_STEPS) -> np.ndarray:
    """Newton iterates from ``z``; points that leave the domain or stall are returned as they are."""
    z = z.copy()
    active = np.ones(z.shape, dtype=bool)
    for _ in range(steps):
        if not np.any(active):
            break
        try:
            with np.errstate(divide="ignore", invalid="ignore"):
                step = f(z[active]) / f.diff(z[active])
        except ZeroFreeError:
            break
        step = np.where(np.isfinite(step), step, 0.0)
        idx = np.flatnonzero(active)
        z[idx] -= step
        active[idx[np.abs(step) <= 1e-15 * (1.0 + np.abs(z[idx]))]] = False
    return z


def _check_contour(f: HolomorphicFunction, path: BoundaryPath):
    """Reject paths that pass through a zero of f.

    A sample on a zero, or a Newton step below ``CONTOUR_CLEARANCE``, is
    rejected outright. Samples whose Newton step is shorter than the sample
    spacing are polished by Newton iteration, which catches zeros lying on
    a segment between two samples.
    """
    pts, owner = path.sample_points()
    try:
        vals = f(pts)
        d = f.diff(pts)
    except ZeroFreeError as exc:
        point = getattr(exc, "point", None)
        raise PoleOnBoundary(pts[0] if point is None else point, exc) from exc
    bad = (vals == 0) | ~np.isfinite(vals)
    with np.errstate(divide="ignore", invalid="ignore"):
        newton = np.abs(vals) / np.abs(d)
    bad |= newton < CONTOUR_CLEARANCE * (1.0 + np.abs(pts))
    if np.any(bad):
        raise ZeroOnContour(pts[np.flatnonzero(bad)[0]])
    spacing = np.array([abs(z1 - z0) / n for (z0, z1), n in zip(path.segments, path.samples_per_segment)])
    near = np.flatnonzero(newton < 2.0 * spacing[owner])
    evaluations = pts.size * (3 if f.derivative is None else 2)
    if near.size:
        roots = _newton_polish(f, pts[near])
        evaluations += near.size * NEWTON_STEPS * (3 if f.derivative is None else 2)
        for i, rho in zip(near, roots):
            z0, z1 = path.segments[owner[i]]
            length = abs(z1 - z0)
            rel = (rho - z0) * np.conj(z1 - z0) / length
            on_line = abs(rel.imag) <= CONTOUR_CLEARANCE * (1.0 + abs(rho))
            if on_line and -CONTOUR_CLEARANCE <= rel.real <= length + CONTOUR_CLEARANCE:
                try:
                    converged = abs(f(rho)) <= abs(vals[i]) * 1e-6
                except ZeroFreeError:
                    converged = False
                if converged:
                    raise ZeroOnContour(rho)
    return evaluations


def _initial_pieces(samples: int) -> int:
    # one Gauss-Kronrod panel per 32 boundary samples to start with
    return max(4, int(math.ceil(samples / 32)))


def winding_number(f: HolomorphicFunction, path: BoundaryPath, tol: float = DEFAULT_TOL,
                   shift: float = 0.0, check_contour: bool = True) -> WindingResult:
    """(1/2 pi i) times the integral of f'/f around ``path``.

    The result counts zeros minus poles inside (counterclockwise path).
    ``shift`` replaces the integrand by f'/(f + i*shift), a diagnostic for
    perturbed problems. Samples where f vanishes to within a Newton step of
    ``1e-9 (1 + |s|)`` raise ZeroOnContour.
    """
    evaluations = _check_contour(f, path) if check_contour else 0
    g = _integrand(f, shift)
    starts, ends = [], []
    for (z0, z1), samples in zip(path.segments, path.samples_per_segment):
        m = _initial_pieces(samples)
        u = np.linspace(0.0, 1.0, m + 1)
        pts = z0 + u * (z1 - z0)
        starts.append(pts[:-1])
        ends.append(pts[1:])
    a = np.concatenate(starts)
    b = np.concatenate(ends)
    perimeter = float(np.sum(np.abs(b - a)))
    total = 0j
    err_total = 0.0
    accepted = 0
    two_pi = 2.0 * math.pi
    for _ in range(MAX_LEVELS):
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        nodes = mid[:, None] + half[:, None] * NODES[None, :]
        vals = np.asarray(g(nodes.ravel())).reshape(nodes.shape)
        evaluations += nodes.size * (3 if f.derivative is None else 2)
        finite = np.all(np.isfinite(vals), axis=1)
        if not np.all(finite):
            bad = np.flatnonzero(~finite)[0]
            raise ZeroOnContour(nodes[bad][np.flatnonzero(~np.isfinite(vals[bad]))[0]])
        kron = (vals @ KRONROD_W) * half
        gauss = (vals @ GAUSS_W) * half
        err = np.abs(kron - gauss) / two_pi
        mass = (np.abs(vals) @ KRONROD_W) * np.abs(half) / two_pi
        ok = err <= np.maximum(tol * np.abs(b - a) / perimeter, ROUNDOFF_FLOOR * mass)
        total += np.sum(kron[ok])
        err_total += float(np.sum(err[ok]))
        accepted += int(np.count_nonzero(ok))
        if np.all(ok):
            break
        a, b = a[~ok], b[~ok]
        mid = 0.5 * (a + b)
        tiny = np.abs(b - a) < MIN_INTERVAL * (1.0 + np.abs(mid))
        if np.any(tiny):
            raise ZeroOnContour(mid[np.flatnonzero(tiny)[0]])
        if 2 * a.size > MAX_ACTIVE_INTERVALS:
            raise QuadratureNotConverged(f"{f.name}: more than {MAX_ACTIVE_INTERVALS} unresolved intervals")
        a, b = np.concatenate([a, mid]), np.concatenate([mid, b])
    else:
        raise QuadratureNotConverged(f"{f.name}: {a.size} intervals unresolved after {MAX_LEVELS} halvings")
    raw = total / (2j * math.pi)
    rounded = int(round(raw.real))
    return WindingResult(complex(raw), rounded, float(abs(raw - rounded)), err_total,
                         path.describe(), int(evaluations), accepted)


@dataclass(frozen=True)
class ZeroCount:
    count: int
    winding: WindingResult
    poles_enclosed: tuple


def count_zeros_detailed(f: HolomorphicFunction, region: StripRegion, tol: float = DEFAULT_TOL,
                         samples_per_unit: float = DEFAULT_SAMPLES_PER_UNIT) -> ZeroCount:
    path = build_boundary(region, samples_per_unit, min_samples=16)
    w = winding_number(f, path, tol)
    if not w.valid:
        raise InvalidResidual(f"{f.name}: residual {w.residual:.3g} on {region.to_dict()}")
    poles = tuple(p for p in f.poles_in(region.a, region.b, region.t_min, region.t_max) if region.contains(p))
    return ZeroCount(w.rounded_count + len(poles), w, poles)


def count_zeros(f: HolomorphicFunction, region: StripRegion, tol: float = DEFAULT_TOL,
                samples_per_unit: float = DEFAULT_SAMPLES_PER_UNIT) -> int:
    """Number of zeros of f inside ``region``; each enclosed declared pole adds back one."""
    return count_zeros_detailed(f, region, tol, samples_per_unit).count


def _jitter(k: int) -> float:
    """Deterministic offsets in [-1, 1) from the golden-ratio sequence; 0 on the first try."""
    if k == 0:
        return 0.0
    return 2.0 * ((k * GOLDEN) % 1.0) - 1.0


_RETRYABLE = (ZeroOnContour, QuadratureNotConverged, InvalidResidual, PoleOnBoundary)


def _children(rect: StripRegion, k: int):
    w, h = rect.width, rect.height
    xs = [rect.a, rect.b]
    ys = [rect.t_min, rect.t_max]
    if w >= h / 2:
        xs.insert(1, rect.a + w / 2 + JITTER * w * _jitter(k))
    if h >= w / 2:
        ys.insert(1, rect.t_min + h / 2 + JITTER * h * _jitter(k + 1 if k else 0))
    return [StripRegion(x0, x1, y0, y1) for x0, x1 in zip(xs, xs[1:]) for y0, y1 in zip(ys, ys[1:])]


def _subdivide(f, rect, count, tol, samples_per_unit):
    for k in range(JITTER_RETRIES + 1):
        kids = _children(rect, k)
        try:
            counts = [count_zeros(f, kid, tol, samples_per_unit) for kid in kids]
        except _RETRYABLE:
            continue
        if sum(counts) == count and min(counts) >= 0:
            return [(kid, c) for kid, c in zip(kids, counts) if c > 0]
    raise ZeroOnCut(f"{f.name}: could not split {rect.to_dict()} cleanly after {JITTER_RETRIES} jittered retries")


def locate_zeros(f: HolomorphicFunction, region: StripRegion, resolution: float, tol: float = DEFAULT_TOL,
                 samples_per_unit: float = 64, max_depth: int = 40) -> list:
    """Boxes of diameter <= ``resolution`` whose counts add up to the count on ``region``.

    Subdivision halves every side that is at least half as long as the other
    one, so squares are quadrisected and slivers are bisected across. Cuts
    that hit a zero are retried with small deterministic offsets.
    """
    total = count_zeros(f, region, tol, samples_per_unit)
    if total < 0:
        raise InvalidResidual(f"{f.name}: negative count {total}; undeclared poles inside {region.to_dict()}")
    done = []
    frontier = [(region, total)] if total > 0 else []
    depth = 0
    workers = max_workers()
    while frontier:
        finished = [(r, c) for r, c in frontier if r.diameter <= resolution]
        done.extend(finished)
        todo = [(r, c) for r, c in frontier if r.diameter > resolution]
        if not todo:
            break
        if depth >= max_depth:
            raise MaxDepthExceeded(f"{f.name}: {len(todo)} boxes still above resolution {resolution} at depth {depth}")
        if workers > 1 and len(todo) > 1:
            with ThreadPoolExecutor(max_workers=min(workers, len(todo))) as pool:
                parts = list(pool.map(lambda rc: _subdivide(f, rc[0], rc[1], tol, samples_per_unit), todo))
        else:
            parts = [_subdivide(f, r, c, tol, samples_per_unit) for r, c in todo]
        frontier = [item for part in parts for item in part]
        depth += 1
    boxes = [ZeroBox(complex(r.a, r.t_min), r.width, r.height, c) for r, c in done]
    return sorted(boxes, key=lambda z: (z.corner.real, z.corner.imag))

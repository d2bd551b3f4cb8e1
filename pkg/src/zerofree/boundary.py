"""Truncated half-strips, their boundary paths, sign scans and decay fits."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

from .complexcore import HolomorphicFunction, as_complex_array
from .errors import (
    PoleInRegion,
    PoleOnBoundary,
    PoleOnCut,
    RegionError,
    UnboundedRegion,
    ZeroFreeError,
)

DEFAULT_SAMPLES_PER_UNIT = 256
DEFAULT_MIN_SAMPLES = 64
DEFAULT_REFINE_DEPTH = 8
RELATIVE_ZERO_TOLERANCE = 1e-9
# cap on extra evaluations spent hunting sign changes between samples
REFINE_BUDGET = 200_000


class Part(str, Enum):
    IMAGINARY = "im"
    REAL = "re"

    def of(self, values):
        return np.imag(values) if self is Part.IMAGINARY else np.real(values)

    @classmethod
    def parse(cls, text) -> "Part":
        if isinstance(text, Part):
            return text
        key = str(text).strip().lower()
        aliases = {"im": cls.IMAGINARY, "imag": cls.IMAGINARY, "imaginary": cls.IMAGINARY,
                   "imaginarypart": cls.IMAGINARY, "re": cls.REAL, "real": cls.REAL, "realpart": cls.REAL}
        if key not in aliases:
            raise ValueError(f"unknown part selector {text!r}")
        return aliases[key]


class Classification(str, Enum):
    ZERO = "Zero"
    NONNEGATIVE = "NonNegative"
    NONPOSITIVE = "NonPositive"
    MIXED = "Mixed"

    @property
    def one_signed(self) -> bool:
        return self is not Classification.MIXED


class DecayModel(str, Enum):
    C_OVER_T = "C_over_t"
    C_OVER_T_PLUS_ABS_SIGMA = "C_over_t_plus_abs_sigma"
    CUSTOM_G = "custom_g"


@dataclass(frozen=True)
class StripRegion:
    """{s : a <= Re s <= b, t_min <= Im s <= t_max}; b and t_max may be +inf.

    ``t_min`` may be negative so the same type describes arbitrary
    axis-aligned rectangles for zero counting.
    """

    a: float
    b: float = math.inf
    t_min: float = 0.0
    t_max: float = math.inf

    def __post_init__(self):
        for name in ("a", "b", "t_min", "t_max"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or math.isnan(v):
                raise RegionError(f"{name} must be a real number, got {v!r}")
        if not math.isfinite(self.a) or not math.isfinite(self.t_min):
            raise RegionError("a and t_min must be finite")
        if not self.a < self.b:
            raise RegionError(f"need a < b, got a={self.a}, b={self.b}")
        if not self.t_min < self.t_max:
            raise RegionError(f"need t_min < t_max, got t_min={self.t_min}, t_max={self.t_max}")

    @property
    def truncated(self) -> bool:
        return math.isfinite(self.b) and math.isfinite(self.t_max)

    @property
    def width(self) -> float:
        return self.b - self.a

    @property
    def height(self) -> float:
        return self.t_max - self.t_min

    @property
    def diameter(self) -> float:
        return math.hypot(self.width, self.height)

    def truncate(self, b: Optional[float] = None, t_max: Optional[float] = None) -> "StripRegion":
        return StripRegion(self.a, self.b if b is None else b, self.t_min, self.t_max if t_max is None else t_max)

    def contains(self, s, strict: bool = True):
        s = as_complex_array(s)
        x, y = np.real(s), np.imag(s)
        if strict:
            return (self.a < x) & (x < self.b) & (self.t_min < y) & (y < self.t_max)
        return (self.a <= x) & (x <= self.b) & (self.t_min <= y) & (y <= self.t_max)

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "t_min": self.t_min, "t_max": self.t_max}


@dataclass(frozen=True)
class BoundaryPath:
    """Closed polygon of directed segments, sampled uniformly on each."""

    segments: tuple
    samples_per_segment: tuple
    names: tuple = ()

    def __post_init__(self):
        if not self.segments:
            raise ValueError("path needs at least one segment")
        if len(self.samples_per_segment) != len(self.segments):
            raise ValueError("one sample count per segment required")
        if any(n < 1 for n in self.samples_per_segment):
            raise ValueError("sample counts must be positive")

    @classmethod
    def polygon(cls, vertices: Sequence[complex], samples_per_segment: int = 16) -> "BoundaryPath":
        v = [complex(z) for z in vertices]
        segs = tuple((v[i], v[(i + 1) % len(v)]) for i in range(len(v)))
        return cls(segs, (samples_per_segment,) * len(segs))

    @property
    def closed(self) -> bool:
        return all(self.segments[i][1] == self.segments[(i + 1) % len(self.segments)][0] for i in range(len(self.segments)))

    @property
    def signed_area(self) -> float:
        """Shoelace area; positive for counterclockwise orientation."""
        return 0.5 * sum((z0.conjugate() * z1).imag for z0, z1 in self.segments)

    @property
    def counterclockwise(self) -> bool:
        return self.signed_area > 0

    @property
    def lengths(self) -> tuple:
        return tuple(abs(z1 - z0) for z0, z1 in self.segments)

    @property
    def perimeter(self) -> float:
        return sum(self.lengths)

    @property
    def start(self) -> complex:
        return self.segments[0][0]

    @property
    def end(self) -> complex:
        return self.segments[-1][1]

    @property
    def sample_count(self) -> int:
        return sum(self.samples_per_segment)

    def segment_name(self, i: int) -> str:
        return self.names[i] if i < len(self.names) else f"segment{i}"

    def sample_points(self):
        """All samples in path order, with the index of the segment owning each.

        Each segment contributes its start point and ``n - 1`` interior points;
        its end point is the next segment's start.
        """
        pts, owner = [], []
        for i, ((z0, z1), n) in enumerate(zip(self.segments, self.samples_per_segment)):
            u = np.arange(n) / n
            pts.append(z0 + u * (z1 - z0))
            owner.append(np.full(n, i))
        return np.concatenate(pts), np.concatenate(owner)

    def describe(self) -> dict:
        return {
            "segments": [[z0.real, z0.imag, z1.real, z1.imag] for z0, z1 in self.segments],
            "samples_per_segment": list(self.samples_per_segment),
        }


def build_boundary(region: StripRegion, samples_per_unit: float = DEFAULT_SAMPLES_PER_UNIT,
                   min_samples: int = 1) -> BoundaryPath:
    """Counterclockwise boundary: bottom, right, top, left."""
    if not region.truncated:
        raise UnboundedRegion(f"region {region.to_dict()} must have finite b and t_max")
    a, b, lo, hi = region.a, region.b, region.t_min, region.t_max
    corners = (complex(a, lo), complex(b, lo), complex(b, hi), complex(a, hi))
    segs = tuple((corners[i], corners[(i + 1) % 4]) for i in range(4))
    counts = tuple(max(min_samples, int(math.ceil(samples_per_unit * abs(z1 - z0) - 1e-9))) for z0, z1 in segs)
    return BoundaryPath(segs, counts, names=("bottom", "right", "top", "left"))


# -- sign scan -------------------------------------------------------------------


@dataclass(frozen=True)
class SegmentSign:
    segment: int
    name: str
    min_value: float
    max_value: float
    argmin: complex
    argmax: complex
    classification: Classification
    sample_count: int
    max_modulus: float = math.nan


@dataclass(frozen=True)
class SignReport:
    part: Part
    per_segment: tuple
    classification: Classification
    zero_tolerance: float
    sample_count: int
    max_modulus: float
    positive_witness: Optional[complex] = None
    negative_witness: Optional[complex] = None

    @property
    def min_value(self) -> float:
        return min(s.min_value for s in self.per_segment)

    @property
    def max_value(self) -> float:
        return max(s.max_value for s in self.per_segment)

    def segment(self, name: str) -> SegmentSign:
        for s in self.per_segment:
            if s.name == name:
                return s
        raise KeyError(name)


def classify(min_value: float, max_value: float, tol: float) -> Classification:
    """Zero if everything is within ``tol``; one sign if the other sign stays strictly inside ``tol``.

    A value sitting exactly at ``-tol`` next to genuinely positive values is
    mixed evidence and classifies as Mixed.
    """
    if max(abs(min_value), abs(max_value)) <= tol:
        return Classification.ZERO
    if min_value > -tol:
        return Classification.NONNEGATIVE
    if max_value < tol:
        return Classification.NONPOSITIVE
    return Classification.MIXED


def _evaluate(f: HolomorphicFunction, points: np.ndarray, error=PoleOnBoundary) -> np.ndarray:
    try:
        values = f(points)
    except ZeroFreeError as exc:
        point = getattr(exc, "point", None)
        raise error(points.ravel()[0] if point is None else point, exc) from exc
    bad = ~np.isfinite(values)
    if np.any(bad):
        raise error(points.ravel()[np.flatnonzero(bad.ravel())[0]], "non-finite value")
    return values


def _refine(f, part, pts, vals, owner, tol, depth, budget):
    """Bisect sample intervals that touch the near-zero band to hunt hidden sign changes.

    Intervals whose endpoints both sit inside ``tol`` are left alone: that
    is a flat zero stretch, and subdividing it would only spend budget.
    """
    n = len(pts)
    left = np.arange(n)
    right = (left + 1) % n
    lp, rp = pts[left], pts[right]
    lv, rv = vals[left], vals[right]
    seg = owner[left]
    extra_p, extra_v, extra_o = [], [], []
    spent = 0
    for _ in range(depth):
        near = (np.abs(lv) <= 10 * tol) | (np.abs(rv) <= 10 * tol)
        flat = (np.abs(lv) <= tol) & (np.abs(rv) <= tol)
        pick = near & ~flat
        if not np.any(pick) or spent >= budget:
            break
        idx = np.flatnonzero(pick)[: budget - spent]
        mp = 0.5 * (lp[idx] + rp[idx])
        mv = part.of(_evaluate(f, mp))
        spent += idx.size
        extra_p.append(mp)
        extra_v.append(mv)
        extra_o.append(seg[idx])
        lp, rp = np.concatenate([lp[idx], mp]), np.concatenate([mp, rp[idx]])
        lv, rv = np.concatenate([lv[idx], mv]), np.concatenate([mv, rv[idx]])
        seg = np.concatenate([seg[idx], seg[idx]])
    if not extra_p:
        return pts, vals, owner
    return (np.concatenate([pts, *extra_p]), np.concatenate([vals, *extra_v]), np.concatenate([owner, *extra_o]))


def sign_scan(f: HolomorphicFunction, path: BoundaryPath, part=Part.IMAGINARY,
              zero_tolerance: Optional[float] = None, refine_depth: int = DEFAULT_REFINE_DEPTH) -> SignReport:
    """Classify the sign of Re f or Im f along ``path``.

    The default tolerance is ``1e-9 * (1 + max |f|)`` over the path samples.
    Samples near the zero band are refined by bisection up to
    ``refine_depth`` levels.
    """
    part = Part.parse(part)
    pts, owner = path.sample_points()
    values = _evaluate(f, pts)
    moduli = np.abs(values)
    max_mod = float(np.max(moduli))
    seg_mod = [float(np.max(moduli[owner == i], initial=0.0)) for i in range(len(path.segments))]
    tol = RELATIVE_ZERO_TOLERANCE * (1.0 + max_mod) if zero_tolerance is None else float(zero_tolerance)
    vals = part.of(values)
    if refine_depth > 0:
        pts, vals, owner = _refine(f, part, pts, vals, owner, tol, refine_depth, REFINE_BUDGET)

    per_segment = []
    for i in range(len(path.segments)):
        mask = owner == i
        v, p = vals[mask], pts[mask]
        # ties in argmin/argmax resolve to the earliest sample in path order
        order = np.argsort(np.real(p - path.segments[i][0]) ** 2 + np.imag(p - path.segments[i][0]) ** 2, kind="stable")
        v, p = v[order], p[order]
        lo, hi = int(np.argmin(v)), int(np.argmax(v))
        per_segment.append(SegmentSign(
            i, path.segment_name(i), float(v[lo]), float(v[hi]), complex(p[lo]), complex(p[hi]),
            classify(float(v[lo]), float(v[hi]), tol), int(v.size), seg_mod[i],
        ))
    gmin = min(s.min_value for s in per_segment)
    gmax = max(s.max_value for s in per_segment)
    cls = classify(gmin, gmax, tol)
    pos = neg = None
    if cls is Classification.MIXED:
        pos = max(per_segment, key=lambda s: s.max_value).argmax
        neg = min(per_segment, key=lambda s: s.min_value).argmin
    return SignReport(part, tuple(per_segment), cls, tol, int(vals.size), max_mod, pos, neg)


# -- decay -----------------------------------------------------------------------


@dataclass(frozen=True)
class DecayFit:
    """Empirical sup of |f| * weight on a grid, re-checked on a 2x refined grid.

    ``worst_violation = refined_C - (1 + margin) * fitted_C``; a value <= 0
    means the fitted bound survived refinement, i.e. the hypothesis holds
    on the grid.
    """

    model: DecayModel
    fitted_C: float
    refined_C: float
    worst_violation: float
    margin: float
    grid: dict
    argmax: complex
    vertical_monotone_fraction: tuple = ()

    @property
    def holds(self) -> bool:
        return self.worst_violation <= 0


def _decay_weight(model: DecayModel, g: Optional[Callable] = None):
    if model is DecayModel.C_OVER_T:
        return lambda sig, t: t
    if model is DecayModel.C_OVER_T_PLUS_ABS_SIGMA:
        return lambda sig, t: t + np.abs(sig)
    if g is None:
        raise ValueError("custom_g decay model needs g(sigma, t)")
    return lambda sig, t: 1.0 / g(sig, t)


def _decay_values(f, region, n_sigma, n_t, weight):
    sig = np.linspace(region.a, region.b, n_sigma)
    t = np.linspace(region.t_min, region.t_max, n_t)
    S, T = np.meshgrid(sig, t, indexing="ij")
    vals = np.abs(_evaluate(f, S + 1j * T, error=PoleInRegion))
    return S, T, vals, vals * weight(S, T)


def decay_check(f: HolomorphicFunction, region: StripRegion, model=DecayModel.C_OVER_T,
                grid: tuple = (17, 257), g: Optional[Callable] = None, margin: float = 0.05) -> DecayFit:
    """Fit C in |f(sigma + it)| < C * model(sigma, t) over a sigma x t grid."""
    model = DecayModel(model)
    if not region.truncated:
        raise UnboundedRegion("decay_check needs a truncated region")
    if model is DecayModel.C_OVER_T and region.t_min <= 0:
        raise RegionError("the C/t model needs t_min > 0")
    n_sigma, n_t = grid
    weight = _decay_weight(model, g)
    S, T, mods, weighted = _decay_values(f, region, n_sigma, n_t, weight)
    k = np.unravel_index(int(np.argmax(weighted)), weighted.shape)
    fitted = float(weighted[k])
    _, _, _, refined = _decay_values(f, region, 2 * n_sigma - 1, 2 * n_t - 1, weight)
    refined_C = float(np.max(refined))
    violation = refined_C - (1.0 + margin) * fitted
    if not (math.isfinite(fitted) and math.isfinite(refined_C)):
        violation = math.inf
    # fraction of non-increasing steps of |f| up each vertical line
    steps = np.diff(mods, axis=1) <= 0
    monotone = tuple(float(x) for x in steps.mean(axis=1)) if n_t > 1 else ()
    return DecayFit(
        model, fitted, refined_C, float(violation), margin,
        {"n_sigma": n_sigma, "n_t": n_t, "refined_n_sigma": 2 * n_sigma - 1, "refined_n_t": 2 * n_t - 1},
        complex(S[k], T[k]), monotone,
    )


def uniform_limit_check(f: HolomorphicFunction, region: StripRegion, heights: Sequence[float],
                        samples_per_unit: float = DEFAULT_SAMPLES_PER_UNIT, min_samples: int = DEFAULT_MIN_SAMPLES):
    """sup |f| on each horizontal cut ``Im s = h`` across ``[a, b]``; returns ``[(h, sup), ...]``."""
    if not math.isfinite(region.b):
        raise UnboundedRegion("horizontal cuts need a finite b")
    heights = [float(h) for h in heights]
    if any(h2 <= h1 for h1, h2 in zip(heights, heights[1:])):
        raise ValueError("heights must be strictly increasing")
    if heights and heights[-1] > region.t_max:
        raise ValueError("heights must not exceed t_max")
    n = max(min_samples, int(math.ceil(samples_per_unit * region.width))) + 1
    sig = np.linspace(region.a, region.b, n)
    return [(h, float(np.max(np.abs(_evaluate(f, sig + 1j * h, error=PoleOnCut))))) for h in heights]


def limit_trend(cuts) -> str:
    """'decreasing' (strictly), 'non-monotone', or 'non-convergent' (last sup >= first)."""
    sups = [s for _, s in cuts]
    if len(sups) < 2:
        return "undetermined"
    if all(b < a for a, b in zip(sups, sups[1:])):
        return "decreasing"
    if sups[-1] >= sups[0]:
        return "non-convergent"
    return "non-monotone"

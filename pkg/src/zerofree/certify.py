"""Zero-free certificates for truncated half-strips.

A certificate bundles three independent pieces of evidence for one region:

* a sign scan of Re f or Im f along the boundary,
* an empirical decay fit of |f| towards the top of the strip,
* the argument-principle zero count on the same boundary.

The verdict is a pure function of the stored evidence (:func:`decide`), so a
serialized certificate can be re-validated without recomputing anything.
Certificates are evidence on a floating-point grid, not proofs.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime, timezone
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .argprinciple import DEFAULT_TOL, ZeroBox, locate_zeros, max_workers, winding_number
from .boundary import (
    DEFAULT_MIN_SAMPLES,
    DEFAULT_REFINE_DEPTH,
    DEFAULT_SAMPLES_PER_UNIT,
    Classification,
    DecayFit,
    DecayModel,
    Part,
    SignReport,
    StripRegion,
    build_boundary,
    decay_check,
    limit_trend,
    sign_scan,
    uniform_limit_check,
)
from .complexcore import HolomorphicFunction
from .errors import UnboundedRegion, ZeroFreeError

ZERO_FREE = "ZeroFreeEvidence"
ZEROS_FOUND = "ZerosFound"
INCONCLUSIVE = "Inconclusive"

RESIDUAL_THRESHOLD = 1e-3
SOUNDNESS_RATIO = 1e-6


@dataclass(frozen=True)
class CertifyConfig:
    tol: float = DEFAULT_TOL
    samples_per_unit: float = DEFAULT_SAMPLES_PER_UNIT
    min_samples: int = DEFAULT_MIN_SAMPLES
    zero_tolerance: Optional[float] = None
    refine_depth: int = DEFAULT_REFINE_DEPTH
    decay_model: Optional[str] = None  # None picks the model from the region shape
    decay_grid: tuple = (17, 257)
    decay_margin: float = 0.05
    sigma_cap: Optional[float] = None  # truncation of b = inf regions
    uniform_limit: bool = False
    limit_heights: tuple = ()
    locate_resolution: float = 0.1
    residual_threshold: float = RESIDUAL_THRESHOLD
    shift: float = 0.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["decay_grid"] = list(self.decay_grid)
        d["limit_heights"] = list(self.limit_heights)
        return d


@dataclass(frozen=True)
class Verdict:
    kind: str
    count: Optional[int] = None
    boxes: tuple = ()
    reason: str = ""
    flags: tuple = ()

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "count": self.count,
            "boxes": [
                {"corner": _complex_dict(b.corner), "width": b.width, "height": b.height, "count": b.contained_count}
                for b in self.boxes
            ],
            "reason": self.reason,
            "flags": list(self.flags),
        }


def _complex_dict(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


@dataclass(frozen=True)
class WindingSummary:
    raw: complex
    rounded_count: int
    poles_enclosed: tuple
    residual: float
    quadrature_error_estimate: float
    evaluations: int
    shifted_raw: Optional[complex] = None

    @property
    def count(self) -> int:
        return self.rounded_count + len(self.poles_enclosed)


@dataclass(frozen=True)
class Certificate:
    function: str
    region: StripRegion
    part: Part
    sign: Optional[SignReport]
    decay: Optional[DecayFit]
    winding: Optional[WindingSummary]
    verdict: Verdict
    config: CertifyConfig
    errors: dict = field(default_factory=dict)
    uniform_limit: Optional[dict] = None
    source_region: Optional[StripRegion] = None
    timestamp: str = ""
    version: str = __version__

    @property
    def top_sup(self) -> float:
        return self.sign.segment("top").max_modulus if self.sign is not None else math.nan

    def to_document(self) -> dict:
        return certificate_document(self)

    def dumps(self) -> str:
        return dumps(self.to_document())


# -- verdict ------------------------------------------------------------------------


def decide(sign_classification: Optional[str], decay_violation: Optional[float], count: Optional[int],
           residual: Optional[float], residual_threshold: float = RESIDUAL_THRESHOLD, errors=None):
    """Verdict kind, reason and flags from plain evidence values.

    Winding wins over sign evidence: a valid positive count is ZerosFound
    even when the boundary looked one-signed, and the clash is flagged.
    """
    errors = dict(errors or {})
    flags = []
    one_signed = sign_classification is not None and sign_classification != Classification.MIXED.value
    if count is not None and residual is not None and residual < 0.5:
        if count >= 1:
            if one_signed:
                flags.append("sign_winding_contradiction")
            return ZEROS_FOUND, "", tuple(flags)
        if count < 0:
            return INCONCLUSIVE, f"negative zero count {count}: undeclared poles inside the region", ()
    reasons = [f"{k} failed: {v}" for k, v in sorted(errors.items())]
    if sign_classification is None:
        if "sign" not in errors:
            reasons.append("no sign evidence")
    elif not one_signed:
        reasons.append("boundary part changes sign")
    if decay_violation is None:
        if "decay" not in errors:
            reasons.append("no decay evidence")
    elif not decay_violation <= 0:
        reasons.append(f"decay bound violated by {decay_violation:.3g}")
    if count is None or residual is None:
        if "winding" not in errors:
            reasons.append("no winding evidence")
    elif residual >= residual_threshold:
        reasons.append(f"winding residual {residual:.3g} above {residual_threshold:g}")
    if not reasons and count == 0:
        return ZERO_FREE, "", ()
    if count == 0 and residual is not None and residual < residual_threshold and not one_signed:
        flags.append("winding_zero_but_sign_mixed")
    return INCONCLUSIVE, "; ".join(reasons), tuple(flags)


def _auto_model(region: StripRegion, from_unbounded: bool) -> DecayModel:
    if not from_unbounded and region.t_min > 0:
        return DecayModel.C_OVER_T
    return DecayModel.C_OVER_T_PLUS_ABS_SIGMA


def _resolve_region(region: StripRegion, config: CertifyConfig):
    if not math.isfinite(region.t_max):
        raise UnboundedRegion(f"t_max must be finite, got region {region.to_dict()}")
    if math.isfinite(region.b):
        return region, False
    if config.sigma_cap is None:
        raise UnboundedRegion("b = inf needs a sigma_cap truncation")
    if config.sigma_cap <= region.a:
        raise UnboundedRegion(f"sigma_cap {config.sigma_cap} must exceed a = {region.a}")
    return region.truncate(b=config.sigma_cap), True


def _default_heights(region: StripRegion):
    hs = [region.t_max * r for r in (0.25, 0.5, 1.0)]
    return tuple(h for h in hs if h > region.t_min)


def certify_strip(f: HolomorphicFunction, region: StripRegion, part=Part.IMAGINARY,
                  config: Optional[CertifyConfig] = None) -> Certificate:
    """Run sign scan, decay fit and winding count on ``region`` and assemble a verdict.

    Regions with ``b = inf`` are truncated at ``config.sigma_cap`` and use
    the C/(t + |sigma|) decay model; finite strips use C/t. Any failure of
    a sub-computation becomes an Inconclusive verdict that names it.
    """
    config = config or CertifyConfig()
    part = Part.parse(part)
    work, from_unbounded = _resolve_region(region, config)
    errors = {}
    path = build_boundary(work, config.samples_per_unit, config.min_samples)

    sign = None
    try:
        sign = sign_scan(f, path, part, config.zero_tolerance, config.refine_depth)
    except ZeroFreeError as exc:
        errors["sign"] = str(exc)

    model = DecayModel(config.decay_model) if config.decay_model else _auto_model(work, from_unbounded)
    decay = None
    try:
        decay = decay_check(f, work, model, tuple(config.decay_grid), margin=config.decay_margin)
    except (ZeroFreeError, ValueError) as exc:
        errors["decay"] = str(exc)

    limit = None
    if config.uniform_limit:
        heights = tuple(config.limit_heights) or _default_heights(work)
        try:
            cuts = uniform_limit_check(f, work, heights, config.samples_per_unit, config.min_samples)
            limit = {"heights": [h for h, _ in cuts], "sups": [s for _, s in cuts], "trend": limit_trend(cuts)}
        except (ZeroFreeError, ValueError) as exc:
            errors["uniform_limit"] = str(exc)

    winding = None
    try:
        w = winding_number(f, path, config.tol)
        poles = tuple(p for p in f.poles_in(work.a, work.b, work.t_min, work.t_max) if work.contains(p))
        shifted = winding_number(f, path, config.tol, shift=config.shift).raw_integral if config.shift else None
        winding = WindingSummary(w.raw_integral, w.rounded_count, poles, w.residual,
                                 w.quadrature_error_estimate, w.evaluations, shifted)
    except ZeroFreeError as exc:
        errors["winding"] = str(exc)

    kind, reason, flags = decide(
        sign.classification.value if sign else None,
        decay.worst_violation if decay else None,
        winding.count if winding else None,
        winding.residual if winding else None,
        config.residual_threshold, errors,
    )
    if limit is not None and limit["trend"] == "non-convergent":
        flags = flags + ("uniform_limit_non_convergent",)
    boxes = ()
    count = None
    if kind == ZEROS_FOUND:
        count = winding.count
        try:
            boxes = tuple(locate_zeros(f, work, config.locate_resolution, config.tol))
        except ZeroFreeError as exc:
            errors["locate"] = str(exc)
            flags = flags + ("locate_failed",)
    verdict = Verdict(kind, count, boxes, reason, flags)
    return Certificate(
        f.name, work, part, sign, decay, winding, verdict, config, errors, limit,
        region if from_unbounded else None, datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )


@dataclass(frozen=True)
class CertificateSequence:
    certificates: tuple
    heights: tuple
    top_sups: tuple
    trend: str

    @property
    def verdicts(self) -> tuple:
        return tuple(c.verdict.kind for c in self.certificates)

    def to_document(self) -> dict:
        return {
            "version": __version__,
            "heights": list(self.heights),
            "top_sups": list(self.top_sups),
            "trend": self.trend,
            "certificates": [c.to_document() for c in self.certificates],
        }


def certify_sequence(f: HolomorphicFunction, region: StripRegion, t_max_values: Sequence[float],
                     part=Part.IMAGINARY, config: Optional[CertifyConfig] = None) -> CertificateSequence:
    """One certificate per truncation height, plus the trend of the top-edge sup |f|."""
    heights = tuple(float(h) for h in t_max_values)
    if not heights or any(h2 <= h1 for h1, h2 in zip(heights, heights[1:])):
        raise ValueError("truncation heights must be a non-empty increasing list")
    if heights[0] <= region.t_min:
        raise ValueError("truncation heights must exceed t_min")
    regions = [replace(region, t_max=h) for h in heights]
    workers = min(max_workers(), len(regions))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            certs = tuple(pool.map(lambda r: certify_strip(f, r, part, config), regions))
    else:
        certs = tuple(certify_strip(f, r, part, config) for r in regions)
    sups = tuple(c.top_sup for c in certs)
    trend = limit_trend(list(zip(heights, sups))) if all(math.isfinite(s) for s in sups) else "undetermined"
    return CertificateSequence(certs, heights, sups, trend)


# -- soundness audit -------------------------------------------------------------


@dataclass(frozen=True)
class SoundnessAudit:
    interior_min: float
    interior_argmin: complex
    boundary_median: float
    ratio: float
    row_ratio_min: float
    row_argmin: complex

    @property
    def threshold(self) -> float:
        return self.ratio * self.boundary_median

    @property
    def passed(self) -> bool:
        return self.interior_min > self.threshold

    @property
    def positive(self) -> bool:
        return self.interior_min > 0

    @property
    def row_passed(self) -> bool:
        return self.row_ratio_min > self.ratio


def soundness_audit(f: HolomorphicFunction, region: StripRegion, step: float = 0.01,
                    ratio: float = SOUNDNESS_RATIO, samples_per_unit: float = DEFAULT_SAMPLES_PER_UNIT):
    """Dense scan of |f| over the open interior of ``region``.

    ``passed`` compares the interior minimum with ``ratio`` times the median
    boundary |f|. ``row_passed`` does the same height by height against the
    larger of the two side values, which stays meaningful when |f| spans
    many orders of magnitude along the strip.
    """
    if not region.truncated:
        raise UnboundedRegion("soundness audit needs a truncated region")
    sig = np.arange(region.a + step, region.b - step / 2, step)
    ts = np.arange(region.t_min + step, region.t_max - step / 2, step)
    if sig.size == 0 or ts.size == 0:
        raise ValueError("region too small for the audit step")
    path = build_boundary(region, samples_per_unit, DEFAULT_MIN_SAMPLES)
    pts, _ = path.sample_points()
    median = float(np.median(np.abs(f(pts))))
    best, best_at = math.inf, 0j
    row_best, row_at = math.inf, 0j
    chunk = max(1, 200_000 // sig.size)
    for i in range(0, ts.size, chunk):
        t = ts[i:i + chunk]
        grid = sig[None, :] + 1j * t[:, None]
        mods = np.abs(f(grid))
        sides = np.maximum(np.abs(f(region.a + 1j * t)), np.abs(f(region.b + 1j * t)))
        k = np.unravel_index(int(np.argmin(mods)), mods.shape)
        if mods[k] < best:
            best, best_at = float(mods[k]), complex(grid[k])
        with np.errstate(divide="ignore", invalid="ignore"):
            rel = mods.min(axis=1) / sides
        j = int(np.argmin(rel))
        if rel[j] < row_best:
            row_best, row_at = float(rel[j]), complex(grid[j, int(np.argmin(mods[j]))])
    return SoundnessAudit(best, best_at, median, ratio, row_best, row_at)


# -- serialization -----------------------------------------------------------------


def _region_dict(r: StripRegion) -> dict:
    return {"a": r.a, "b": r.b, "t_min": r.t_min, "t_max": r.t_max}


def certificate_document(c: Certificate) -> dict:
    sign = None
    if c.sign is not None:
        s = c.sign
        sign = {
            "classification": s.classification.value,
            "zero_tolerance": s.zero_tolerance,
            "sample_count": s.sample_count,
            "max_modulus": s.max_modulus,
            "per_segment": [
                {
                    "name": g.name,
                    "classification": g.classification.value,
                    "min": g.min_value,
                    "max": g.max_value,
                    "argmin": _complex_dict(g.argmin),
                    "argmax": _complex_dict(g.argmax),
                    "sup_modulus": g.max_modulus,
                    "sample_count": g.sample_count,
                }
                for g in s.per_segment
            ],
            "positive_witness": None if s.positive_witness is None else _complex_dict(s.positive_witness),
            "negative_witness": None if s.negative_witness is None else _complex_dict(s.negative_witness),
        }
    decay = None
    if c.decay is not None:
        d = c.decay
        decay = {
            "model": d.model.value,
            "C": d.fitted_C,
            "refined_C": d.refined_C,
            "worst_violation": d.worst_violation,
            "margin": d.margin,
            "argmax": _complex_dict(d.argmax),
            "grid": dict(d.grid),
        }
    winding = None
    if c.winding is not None:
        w = c.winding
        winding = {
            "raw": _complex_dict(w.raw),
            "rounded_count": w.rounded_count,
            "poles_enclosed": [_complex_dict(p) for p in w.poles_enclosed],
            "count": w.count,
            "residual": w.residual,
            "quadrature_error_estimate": w.quadrature_error_estimate,
            "evaluations": w.evaluations,
            "shifted_raw": None if w.shifted_raw is None else _complex_dict(w.shifted_raw),
        }
    region = _region_dict(c.region)
    if c.source_region is not None:
        region["truncated_from"] = _region_dict(c.source_region)
    return {
        "version": c.version,
        "function": c.function,
        "region": region,
        "part": c.part.value,
        "sign": sign,
        "decay": decay,
        "winding": winding,
        "uniform_limit": c.uniform_limit,
        "errors": dict(sorted(c.errors.items())),
        "verdict": c.verdict.to_dict(),
        "config": c.config.to_dict(),
        "timestamp": c.timestamp,
    }


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return '"nan"'
        if math.isinf(x):
            return '"inf"' if x > 0 else '"-inf"'
        return format(x, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, complex):
        return _encode(_complex_dict(obj), indent, level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_encode(str(k), indent, level)}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(document: dict, indent: int = 2) -> str:
    """JSON text with every float written to 17 significant digits; infinities become strings."""
    return _encode(document, indent, 0) + "\n"


def _restore(obj):
    if isinstance(obj, dict):
        return {k: _restore(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_restore(v) for v in obj]
    if obj in ("inf", "-inf", "nan"):
        return float(obj)
    return obj


def loads(text: str) -> dict:
    return _restore(json.loads(text))


def recompute_verdict(document: dict) -> str:
    """Verdict kind re-derived from the evidence stored in a certificate document."""
    sign = document.get("sign")
    decay = document.get("decay")
    winding = document.get("winding")
    config = document.get("config") or {}
    kind, _, _ = decide(
        sign["classification"] if sign else None,
        decay["worst_violation"] if decay else None,
        winding["count"] if winding else None,
        winding["residual"] if winding else None,
        config.get("residual_threshold", RESIDUAL_THRESHOLD),
        {k: v for k, v in (document.get("errors") or {}).items() if k != "locate"},
    )
    return kind


def check_document(document: dict) -> list:
    """Consistency problems in a certificate document; empty when it re-validates."""
    problems = []
    for key in ("version", "function", "region", "part", "sign", "decay", "winding", "verdict", "config"):
        if key not in document:
            problems.append(f"missing field {key!r}")
    if problems:
        return problems
    kind = recompute_verdict(document)
    if kind != document["verdict"]["kind"]:
        problems.append(f"stored verdict {document['verdict']['kind']} but evidence gives {kind}")
    v = document["verdict"]
    if v["kind"] == ZEROS_FOUND and v["boxes"]:
        total = sum(b["count"] for b in v["boxes"])
        if total != v["count"]:
            problems.append(f"box counts sum to {total}, not {v['count']}")
    return problems


def boxes_from_document(document: dict) -> list:
    return [
        ZeroBox(complex(b["corner"]["re"], b["corner"]["im"]), b["width"], b["height"], b["count"])
        for b in document["verdict"]["boxes"]
    ]

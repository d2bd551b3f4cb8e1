"""Complex scalars, the holomorphic-function wrapper and finite differences.

Scalars are plain Python ``complex`` values (double precision); every
function in the package also accepts numpy ``complex128`` arrays and maps
them elementwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import PoleAt, PoleTooClose, ValueOverflow

POLE_CLEARANCE = 1e-3
# results whose modulus would exceed 1e300 are reported as ValueOverflow
LOG_OVERFLOW = math.log(1e300)

PoleFamily = Callable[[float, float, float, float], Sequence[complex]]


def modulus(z):
    """Overflow-safe ``sqrt(re**2 + im**2)``."""
    if np.ndim(z) == 0:
        z = complex(z)
        return math.hypot(z.real, z.imag)
    return np.hypot(np.real(z), np.imag(z))


def conjugate(z):
    if np.ndim(z) == 0:
        return complex(z).conjugate()
    return np.conj(z)


def as_complex_array(s) -> np.ndarray:
    return np.asarray(s, dtype=np.complex128)


def exp_checked(log_value, points) -> np.ndarray:
    """Exponentiate a log-space result once, raising the overflow sentinel if needed."""
    log_value = as_complex_array(log_value)
    bad = np.real(log_value) > LOG_OVERFLOW
    if np.any(bad):
        i = np.flatnonzero(bad.ravel())[0]
        raise ValueOverflow(np.broadcast_to(points, log_value.shape).ravel()[i], log_value.ravel()[i])
    with np.errstate(under="ignore", invalid="ignore"):
        out = np.exp(log_value)
    # exp(-inf + i*nan) style values are exact zeros of a factor
    out = np.where(np.isneginf(np.real(log_value)), 0.0, out)
    return out


def integer_lattice(lo: Optional[int] = None, hi: Optional[int] = None) -> PoleFamily:
    """Pole family of the integers n with lo <= n <= hi (either end open if None)."""

    def family(re_lo, re_hi, im_lo, im_hi):
        if im_lo > 0 or im_hi < 0:
            return []
        first = math.ceil(re_lo)
        last = math.floor(re_hi)
        if lo is not None:
            first = max(first, lo)
        if hi is not None:
            last = min(last, hi)
        return [complex(n) for n in range(first, last + 1)]

    return family


def odd_integers(lo: int) -> PoleFamily:
    def family(re_lo, re_hi, im_lo, im_hi):
        return [p for p in integer_lattice(lo)(re_lo, re_hi, im_lo, im_hi) if int(p.real) % 2 == 1]

    return family


@dataclass(frozen=True)
class HolomorphicFunction:
    """A named map C -> C with its singularity bookkeeping.

    ``value`` must accept complex ndarrays. Poles are declared either as a
    finite ``known_poles`` tuple or through ``pole_family``, a callable that
    enumerates the poles inside an axis-aligned box (used for Gamma-type
    infinite lattices). Evaluation inside ``clearance`` of any declared pole
    raises :class:`PoleAt`.
    """

    name: str
    value: Callable[[np.ndarray], np.ndarray]
    derivative: Optional[Callable[[np.ndarray], np.ndarray]] = None
    known_poles: tuple = ()
    real_on_reals: bool = False
    pole_family: Optional[PoleFamily] = None
    clearance: float = POLE_CLEARANCE

    def __call__(self, s):
        arr = as_complex_array(s)
        self.check_clearance(arr)
        out = as_complex_array(self.value(arr))
        if arr.ndim == 0:
            return complex(out)
        return out

    def poles_in(self, re_lo, re_hi, im_lo, im_hi) -> list:
        poles = [
            complex(p)
            for p in self.known_poles
            if re_lo <= complex(p).real <= re_hi and im_lo <= complex(p).imag <= im_hi
        ]
        if self.pole_family is not None:
            poles.extend(self.pole_family(re_lo, re_hi, im_lo, im_hi))
        return sorted(set(poles), key=lambda p: (p.real, p.imag))

    def nearest_pole(self, s, radius: float):
        """Return ``(pole, point)`` for the first point within ``radius`` of a pole, else None."""
        arr = as_complex_array(s).ravel()
        if arr.size == 0:
            return None
        poles = self.poles_in(
            arr.real.min() - radius, arr.real.max() + radius,
            arr.imag.min() - radius, arr.imag.max() + radius,
        )
        for p in poles:
            close = np.abs(arr - p) < radius
            if np.any(close):
                return p, arr[np.flatnonzero(close)[0]]
        return None

    def check_clearance(self, s, radius: Optional[float] = None) -> None:
        hit = self.nearest_pole(s, self.clearance if radius is None else radius)
        if hit is not None:
            raise PoleAt(*hit)

    def diff(self, s):
        """Derivative at ``s``: analytic when available, central difference otherwise."""
        if self.derivative is not None:
            arr = as_complex_array(s)
            self.check_clearance(arr)
            out = as_complex_array(self.derivative(arr))
            return complex(out) if arr.ndim == 0 else out
        return numeric_derivative(self, s)

    def log_derivative(self, s):
        """f'(s)/f(s); the ratio is scale free, so tiny or huge |f| is harmless."""
        return self.diff(s) / self(s)


def derivative_step(s):
    return 1e-6 * np.maximum(1.0, np.abs(s))


def numeric_derivative(f: HolomorphicFunction, s, h=None):
    """Central difference ``(f(s+h) - f(s-h)) / 2h`` with a real step.

    The default step is ``1e-6 * max(1, |s|)``. Raises PoleTooClose when a
    declared pole lies within ``2h`` of ``s``.
    """
    arr = as_complex_array(s)
    step = derivative_step(arr) if h is None else np.broadcast_to(np.asarray(h, dtype=float), arr.shape)
    radius = 2.0 * float(np.max(step)) if step.size else 0.0
    hit = f.nearest_pole(arr, radius)
    if hit is not None:
        raise PoleTooClose(f"{f.name}: pole {hit[0]} within stencil of {hit[1]}")
    out = (as_complex_array(f.value(arr + step)) - as_complex_array(f.value(arr - step))) / (2.0 * step)
    return complex(out) if arr.ndim == 0 else out

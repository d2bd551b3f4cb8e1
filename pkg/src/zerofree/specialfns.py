"""Complex Gamma, zeta, xi and the auxiliary constructions built on them.

All evaluators take scalars or complex ndarrays. Products of factors with
large dynamic range are accumulated as log-space sums and exponentiated
once through :func:`exp_checked`.
"""

from __future__ import annotations

import functools
import math
from types import MappingProxyType

import numpy as np

from .complexcore import (
    POLE_CLEARANCE,
    HolomorphicFunction,
    as_complex_array,
    exp_checked,
    integer_lattice,
    numeric_derivative,
    odd_integers,
)
from .errors import DenominatorZero, DomainError, PoleAt, UnknownFunction

LOG_PI = math.log(math.pi)
LOG_2 = math.log(2.0)
HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

# g = 7, n = 9 Lanczos coefficients
LANCZOS_G = 7.0
LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

# B_2, B_4, ..., B_16
BERNOULLI_EVEN = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6, -3617 / 510)


def _elementwise(fn):
    """Run ``fn`` on a flat array so boolean masks work for scalars too."""

    @functools.wraps(fn)
    def wrapper(s, *args, **kwargs):
        s = as_complex_array(s)
        return as_complex_array(fn(s.reshape(-1), *args, **kwargs)).reshape(s.shape)

    return wrapper


def _scalar_or_array(s, out):
    out = as_complex_array(out)
    return complex(out) if np.ndim(s) == 0 else out


def _real_on_real_axis(s, out):
    return np.where(np.imag(s) == 0, np.real(out) + 0j, out)


def _raise_near(s, poles, radius=POLE_CLEARANCE):
    """Raise PoleAt for the first element of ``s`` within ``radius`` of an entry of ``poles``."""
    s = s.ravel()
    for p in poles:
        close = np.abs(s - p) < radius
        if np.any(close):
            raise PoleAt(p, s[np.flatnonzero(close)[0]])


def _nonpositive_integer_near(z, radius):
    """Nearest non-positive integer to each z and a mask of those within ``radius``."""
    n = np.minimum(np.round(np.real(z)), 0.0)
    return n, np.abs(z - n) < radius


def _lanczos_log_gamma(z):
    x = z - 1.0
    a = np.full_like(x, LANCZOS_COEF[0])
    for k in range(1, len(LANCZOS_COEF)):
        a = a + LANCZOS_COEF[k] / (x + k)
    t = x + LANCZOS_G + 0.5
    return HALF_LOG_2PI + (x + 0.5) * np.log(t) - t + np.log(a)


def _lanczos_digamma(z):
    x = z - 1.0
    a = np.full_like(x, LANCZOS_COEF[0])
    da = np.zeros_like(x)
    for k in range(1, len(LANCZOS_COEF)):
        a = a + LANCZOS_COEF[k] / (x + k)
        da = da - LANCZOS_COEF[k] / (x + k) ** 2
    t = x + LANCZOS_G + 0.5
    return np.log(t) + (x + 0.5) / t - 1.0 + da / a


@_elementwise
def log_sin_pi(z):
    """log(sin(pi z)) (some branch) without overflow for large |Im z|."""
    z = as_complex_array(z)
    n = np.round(np.real(z))
    w = np.pi * (z - n)
    y = np.imag(w)
    out = np.empty_like(w)
    small = np.abs(y) < 20.0
    up = ~small & (y > 0)
    down = ~small & (y < 0)
    with np.errstate(divide="ignore"):
        out[small] = np.log(np.sin(w[small]))
    out[up] = -1j * w[up] + np.log(0.5j) + np.log1p(-np.exp(2j * w[up]))
    out[down] = 1j * w[down] + np.log(-0.5j) + np.log1p(-np.exp(-2j * w[down]))
    return out + 1j * np.pi * n


def sin_pi(z):
    z = as_complex_array(z)
    n = np.round(np.real(z))
    sign = np.where(n % 2 == 0, 1.0, -1.0)
    return sign * np.sin(np.pi * (z - n))


@_elementwise
def cot_pi(z):
    """cot(pi z) computed from exp(+-2 i pi z), stable for large |Im z|."""
    z = as_complex_array(z)
    w = np.pi * (z - np.round(np.real(z)))
    out = np.empty_like(w)
    upper = np.imag(w) >= 0
    q = np.exp(2j * w[upper])
    out[upper] = 1j * (q + 1.0) / (q - 1.0)
    q = np.exp(-2j * w[~upper])
    out[~upper] = 1j * (1.0 + q) / (1.0 - q)
    return out


@_elementwise
def log_gamma_any(z, check=True):
    """Some branch of log Gamma(z) for any non-pole z; only exp() of it is meaningful left of Re z = 1/2."""
    z = as_complex_array(z)
    if check:
        n, near = _nonpositive_integer_near(z, POLE_CLEARANCE)
        if np.any(near):
            i = np.flatnonzero(near.ravel())[0]
            raise PoleAt(n.ravel()[i], z.ravel()[i])
    out = np.empty_like(z)
    right = np.real(z) >= 0.5
    out[right] = _lanczos_log_gamma(z[right])
    left = ~right
    if np.any(left):
        zl = z[left]
        out[left] = LOG_PI - log_sin_pi(zl) - _lanczos_log_gamma(1.0 - zl)
    return out


@_elementwise
def digamma(z):
    z = as_complex_array(z)
    out = np.empty_like(z)
    right = np.real(z) >= 0.5
    out[right] = _lanczos_digamma(z[right])
    zl = z[~right]
    out[~right] = _lanczos_digamma(1.0 - zl) - np.pi * cot_pi(zl)
    return out


def log_gamma(s):
    """Principal log Gamma(s) for Re(s) > 0, continuous along vertical lines."""
    z = as_complex_array(s)
    if np.any(np.real(z) <= 0):
        raise DomainError("log_gamma requires Re(s) > 0")
    out = np.empty_like(z)
    right = np.real(z) >= 0.5
    out[right] = _lanczos_log_gamma(z[right])
    zl = z[~right]
    out[~right] = _lanczos_log_gamma(zl + 1.0) - np.log(zl)
    return _scalar_or_array(s, _real_on_real_axis(z, out))


@_elementwise
def _gamma(z):
    return _real_on_real_axis(z, exp_checked(log_gamma_any(z), z))


def gamma(s):
    """Gamma(s): Lanczos (g=7) for Re(s) >= 1/2, reflection formula otherwise."""
    return _scalar_or_array(s, _gamma(as_complex_array(s)))


@_elementwise
def _gamma_derivative(z):
    return _gamma(z) * digamma(z)


# -- zeta ---------------------------------------------------------------------


def euler_maclaurin_terms(s):
    return np.maximum(20, np.ceil(1.3 * np.abs(np.imag(s)))).astype(int)


def zeta_euler_maclaurin(s, n_terms=None):
    """Euler-Maclaurin sum with 8 Bernoulli corrections; valid for any s != 1.

    Each point uses its own number of direct terms, so the result for a given
    ``s`` does not depend on what else is in the batch.
    """
    s = as_complex_array(s)
    N = euler_maclaurin_terms(s) if n_terms is None else np.broadcast_to(np.asarray(n_terms), s.shape)
    n_max = int(np.max(N)) if N.size else 0
    total = np.zeros_like(s)
    for n in range(1, n_max):
        term = np.exp(-s * math.log(n))
        total = total + np.where(n < N, term, 0.0)
    logN = np.log(N.astype(float))
    Nf = N.astype(float)
    n_pow = np.exp(-s * logN)
    total = total + Nf * n_pow / (s - 1.0) + 0.5 * n_pow
    rising = s.copy()
    n_pow = n_pow / Nf
    factorial = 2.0
    for k, b in enumerate(BERNOULLI_EVEN, start=1):
        if k > 1:
            rising = rising * (s + 2 * k - 3) * (s + 2 * k - 2)
            n_pow = n_pow / (Nf * Nf)
            factorial *= (2 * k - 1) * (2 * k)
        total = total + (b / factorial) * rising * n_pow
    return total


def zeta_euler_maclaurin_derivative(s, n_terms=None):
    """Term-by-term s-derivative of :func:`zeta_euler_maclaurin`."""
    s = as_complex_array(s)
    N = euler_maclaurin_terms(s) if n_terms is None else np.broadcast_to(np.asarray(n_terms), s.shape)
    n_max = int(np.max(N)) if N.size else 0
    total = np.zeros_like(s)
    for n in range(2, n_max):
        log_n = math.log(n)
        total = total + np.where(n < N, -log_n * np.exp(-s * log_n), 0.0)
    logN = np.log(N.astype(float))
    Nf = N.astype(float)
    n_pow = np.exp(-s * logN)
    total = total - logN * Nf * n_pow / (s - 1.0) - Nf * n_pow / (s - 1.0) ** 2 - 0.5 * logN * n_pow
    rising = s.copy()
    d_rising = np.ones_like(s)
    n_pow = n_pow / Nf
    factorial = 2.0
    for k, b in enumerate(BERNOULLI_EVEN, start=1):
        if k > 1:
            p1, p2 = s + 2 * k - 3, s + 2 * k - 2
            d_rising = d_rising * p1 * p2 + rising * (p1 + p2)
            rising = rising * p1 * p2
            n_pow = n_pow / (Nf * Nf)
            factorial *= (2 * k - 1) * (2 * k)
        total = total + (b / factorial) * (d_rising - logN * rising) * n_pow
    return total


@_elementwise
def _zeta(s):
    _raise_near(s, (1.0,))
    out = np.empty_like(s)
    direct = (np.real(s) >= 0.5) | (np.abs(s) < 0.1)
    out[direct] = zeta_euler_maclaurin(s[direct])
    sl = s[~direct]
    if sl.size:
        log_factor = sl * LOG_2 + (sl - 1.0) * LOG_PI + log_sin_pi(sl / 2.0) + log_gamma_any(1.0 - sl)
        out[~direct] = exp_checked(log_factor, sl) * zeta_euler_maclaurin(1.0 - sl)
    return _real_on_real_axis(s, out)


@_elementwise
def _zeta_derivative(s):
    # left of 1/2: zeta = chi(s) zeta(1-s), chi'/chi = log 2pi + (pi/2) cot(pi s/2) - digamma(1-s)
    _raise_near(s, (1.0,))
    out = np.empty_like(s)
    direct = (np.real(s) >= 0.5) | (np.abs(s) < 0.1)
    out[direct] = zeta_euler_maclaurin_derivative(s[direct])
    sl = s[~direct]
    if sl.size:
        log_chi = sl * LOG_2 + (sl - 1.0) * LOG_PI + log_sin_pi(sl / 2.0) + log_gamma_any(1.0 - sl)
        chi = exp_checked(log_chi, sl)
        dlog_chi = LOG_2 + LOG_PI + 0.5 * np.pi * cot_pi(sl / 2.0) - digamma(1.0 - sl)
        out[~direct] = chi * (dlog_chi * zeta_euler_maclaurin(1.0 - sl) - zeta_euler_maclaurin_derivative(1.0 - sl))
    return _real_on_real_axis(s, out)


def zeta(s):
    """Riemann zeta: Euler-Maclaurin for Re(s) >= 1/2, functional equation to the left.

    Points with |s| < 0.1 are summed directly, because the functional
    equation is 0 * infinity at s = 0.
    """
    return _scalar_or_array(s, _zeta(as_complex_array(s)))


@_elementwise
def _xi(s):
    _raise_near(s, (0.0, 1.0))
    out = np.empty_like(s)
    # Gamma(s/2) poles at -2, -4, ... meet the trivial zeros; fill by symmetry
    even = np.round(np.real(s) / 2.0) * 2.0
    mirrored = (even < 0) & (np.abs(s - even) < POLE_CLEARANCE)
    sd = s[~mirrored]
    out[~mirrored] = exp_checked(-0.5 * sd * LOG_PI + log_gamma_any(sd / 2.0), sd) * _zeta(sd)
    if np.any(mirrored):
        out[mirrored] = _xi(1.0 - s[mirrored])
    return _real_on_real_axis(s, out)


@_elementwise
def _xi_derivative(s):
    _raise_near(s, (0.0, 1.0))
    even = np.round(np.real(s) / 2.0) * 2.0
    mirrored = (even < 0) & (np.abs(s - even) < POLE_CLEARANCE)
    out = np.empty_like(s)
    sd = s[~mirrored]
    envelope = exp_checked(-0.5 * sd * LOG_PI + log_gamma_any(sd / 2.0), sd)
    out[~mirrored] = envelope * (_zeta(sd) * (0.5 * digamma(sd / 2.0) - 0.5 * LOG_PI) + _zeta_derivative(sd))
    if np.any(mirrored):
        out[mirrored] = -_xi_derivative(1.0 - s[mirrored])
    return _real_on_real_axis(s, out)


def xi(s):
    """pi^(-s/2) zeta(s) Gamma(s/2), with simple poles at 0 and 1."""
    return _scalar_or_array(s, _xi(as_complex_array(s)))


def _psi_checks(s):
    n = np.round(np.real(s))
    near = (np.abs(s - n) < POLE_CLEARANCE) & (((n >= 1) & (n % 2 == 1)) | ((n <= 0) & (n % 2 == 0)))
    if np.any(near):
        i = np.flatnonzero(near.ravel())[0]
        raise PoleAt(n.ravel()[i], s.ravel()[i])


@_elementwise
def _psi_ratio(s):
    _psi_checks(s)
    log_value = (s - 0.5) * LOG_PI + log_gamma_any((1.0 - s) / 2.0, check=False) - log_gamma_any(s / 2.0, check=False)
    return _real_on_real_axis(s, exp_checked(log_value, s))


def psi_ratio(s):
    """pi^(s-1/2) Gamma((1-s)/2) / Gamma(s/2); note psi(s) psi(1-s) = 1."""
    return _scalar_or_array(s, _psi_ratio(as_complex_array(s)))


@_elementwise
def _psi_ratio_derivative(s):
    return _psi_ratio(s) * (LOG_PI - 0.5 * digamma((1.0 - s) / 2.0) - 0.5 * digamma(s / 2.0))


# -- auxiliary constructions -------------------------------------------------------


@_elementwise
def _f_gamma(s):
    n = np.round(np.real(s))
    near = np.abs(s - n) < POLE_CLEARANCE
    bad = near & (n != 0) & (n != 1)
    if np.any(bad):
        i = np.flatnonzero(bad.ravel())[0]
        raise PoleAt(n.ravel()[i], s.ravel()[i])
    out = np.empty_like(s)
    at0 = near & (n == 0)
    at1 = near & (n == 1)
    # removable points 0 and 1: pi s (1-s) / sin(pi s) with sinc(x) = sin(pi x)/(pi x)
    out[at0] = (1.0 - s[at0]) / np.sinc(s[at0])
    out[at1] = s[at1] / np.sinc(1.0 - s[at1])
    rest = ~near
    sr = s[rest]
    log_value = log_gamma_any(sr, check=False) + log_gamma_any(1.0 - sr, check=False) + np.log(sr) + np.log(1.0 - sr)
    out[rest] = exp_checked(log_value, sr)
    return _real_on_real_axis(s, out)


def f_gamma(s):
    """Gamma(s) Gamma(1-s) s (1-s), which equals pi s (1-s) / sin(pi s)."""
    return _scalar_or_array(s, _f_gamma(as_complex_array(s)))


def f_gamma_closed_form(s):
    s = as_complex_array(s)
    return _scalar_or_array(s, np.pi * s * (1.0 - s) / sin_pi(s))


@_elementwise
def _f_gamma_derivative(s):
    # F'/F = 1/s - 1/(1-s) - pi cot(pi s); cancels badly next to 0 and 1
    out = np.empty_like(s)
    near = (np.abs(s) < 0.05) | (np.abs(s - 1.0) < 0.05)
    far = ~near
    sf = s[far]
    out[far] = _f_gamma(sf) * (1.0 / sf - 1.0 / (1.0 - sf) - np.pi * cot_pi(sf))
    if np.any(near):
        out[near] = numeric_derivative(GAMMA_F, s[near])
    return out


def denominator_is_zero(den, psi):
    return np.abs(den) < 1e-12 * (1.0 + np.abs(psi) ** 2)


@_elementwise
def _f_zeta(s):
    _raise_near(s, (0.5, 1.0))
    psi = _psi_ratio(s)
    den = psi + (1.0 + psi) ** 2
    bad = denominator_is_zero(den, psi)
    if np.any(bad):
        raise DenominatorZero(s.ravel()[np.flatnonzero(bad.ravel())[0]])
    z = _zeta(s)
    return z * z / den / (0.5 - s)


@_elementwise
def _f_zeta_derivative(s):
    # F = zeta^2 / (q D), q = 1/2 - s, D = psi + (1 + psi)^2, D' = psi' (3 + 2 psi);
    # written without dividing by zeta so zeros of zeta are harmless
    _raise_near(s, (0.5, 1.0))
    psi = _psi_ratio(s)
    den = psi + (1.0 + psi) ** 2
    bad = denominator_is_zero(den, psi)
    if np.any(bad):
        raise DenominatorZero(s.ravel()[np.flatnonzero(bad.ravel())[0]])
    d_den = _psi_ratio_derivative(s) * (3.0 + 2.0 * psi)
    q = 0.5 - s
    z = _zeta(s)
    return z / (q * den) * (2.0 * _zeta_derivative(s) + z * (1.0 / q - d_den / den))


def f_zeta(s):
    """zeta(s)^2 / ((1/2 - s) (psi(s) + (1 + psi(s))^2))."""
    return _scalar_or_array(s, _f_zeta(as_complex_array(s)))


def f_zeta_xi_form(s):
    """Same function written through xi(s)^2 and explicit Gamma factors (moderate |Im s| only)."""
    s = as_complex_array(s)
    _raise_near(s, (0.5, 1.0))
    g1 = _gamma(s / 2.0)
    g2 = _gamma((1.0 - s) / 2.0)
    den = g1 * g2 / math.sqrt(math.pi) + (g1 * np.exp(-0.5 * s * LOG_PI) + g2 * np.exp(0.5 * (s - 1.0) * LOG_PI)) ** 2
    x = _xi(s)
    return _scalar_or_array(s, x * x / den / (0.5 - s))


def f_zeta_on_critical_line(t):
    """f_zeta(1/2 + it) reduced with Gamma(conj z) = conj Gamma(z) and real xi.

    Returns (i/t) |xi|^2 / (pi^-1/2 |G|^2 + (2 pi^-1/4 Re(G exp(-i t log(pi)/2)))^2)
    with G = Gamma(1/4 + it/2); the value is purely imaginary.
    """
    t = np.asarray(t, dtype=float)
    s = 0.5 + 1j * t
    g = _gamma(as_complex_array(0.25 + 0.5j * t))
    rotated = np.real(g * np.exp(-0.5j * t * LOG_PI))
    den = np.abs(g) ** 2 / math.sqrt(math.pi) + (2.0 * math.pi ** -0.25 * rotated) ** 2
    x = _xi(as_complex_array(s))
    return _scalar_or_array(t, 1j / t * np.abs(x) ** 2 / den)


def f_zeta_on_critical_line_cosine_form(t):
    """Variant of :func:`f_zeta_on_critical_line` with Re(G) cos(pi t / 4) in place of the rotated real part.

    Kept for comparison only: it is purely imaginary too, but its modulus
    does not match f_zeta(1/2 + it).
    """
    t = np.asarray(t, dtype=float)
    g = _gamma(as_complex_array(0.25 + 0.5j * t))
    den = np.abs(g) ** 2 / math.sqrt(math.pi) + (2.0 * math.pi ** -0.25 * np.real(g) * np.cos(0.25 * np.pi * t)) ** 2
    x = _xi(as_complex_array(0.5 + 1j * t))
    return _scalar_or_array(t, 1j / t * np.abs(x) ** 2 / den)


# -- catalog --------------------------------------------------------------------


def _gamma_f_poles(re_lo, re_hi, im_lo, im_hi):
    return list(integer_lattice(hi=-1)(re_lo, re_hi, im_lo, im_hi)) + list(
        integer_lattice(lo=2)(re_lo, re_hi, im_lo, im_hi)
    )


GAMMA = HolomorphicFunction(
    "gamma", _gamma, derivative=_gamma_derivative, real_on_reals=True, pole_family=integer_lattice(hi=0)
)
ZETA = HolomorphicFunction("zeta", _zeta, derivative=_zeta_derivative, known_poles=(1.0,), real_on_reals=True)
XI = HolomorphicFunction("xi", _xi, derivative=_xi_derivative, known_poles=(0.0, 1.0), real_on_reals=True)
PSI_RATIO = HolomorphicFunction(
    "psi-ratio", _psi_ratio, derivative=_psi_ratio_derivative, real_on_reals=True, pole_family=odd_integers(1)
)
GAMMA_F = HolomorphicFunction(
    "gamma-F", _f_gamma, derivative=_f_gamma_derivative, real_on_reals=True, pole_family=_gamma_f_poles
)
# s = 1 is removable for this quotient but the formula cannot be evaluated there;
# evaluation raises PoleAt(1) without it counting as a pole.
ZETA_F = HolomorphicFunction("zeta-F", _f_zeta, derivative=_f_zeta_derivative, known_poles=(0.5,), real_on_reals=True)

CATALOG = MappingProxyType({f.name: f for f in (GAMMA, ZETA, XI, PSI_RATIO, GAMMA_F, ZETA_F)})


def polynomial_from_roots(roots, name=None) -> HolomorphicFunction:
    roots = tuple(complex(r) for r in roots)
    coeffs = np.poly(np.array(roots, dtype=complex)) if roots else np.array([1.0 + 0j])
    return polynomial(coeffs, name=name or "roots:" + ",".join(_fmt_root(r) for r in roots))


def polynomial(coeffs, name=None) -> HolomorphicFunction:
    """Polynomial with coefficients ordered from the highest degree down."""
    c = np.array(coeffs, dtype=complex)
    dc = np.polyder(c) if c.size > 1 else np.array([0j])
    real = bool(np.all(np.imag(c) == 0))
    return HolomorphicFunction(
        name or "poly:" + ",".join(_fmt_root(x) for x in c),
        lambda s: np.polyval(c, s),
        derivative=lambda s: np.polyval(dc, s) + 0j * s,
        real_on_reals=real,
    )


def _fmt_root(z):
    z = complex(z)
    if z.imag == 0:
        return repr(z.real)
    return f"{z.real!r}{z.imag:+}j"


def _parse_complex(text):
    return complex(text.strip().replace(" ", "").replace("i", "j"))


def get_function(name: str) -> HolomorphicFunction:
    """Catalog lookup, plus ``roots:r1,r2,...`` and ``poly:c_n,...,c_0`` forms.

    Complex literals accept either ``j`` or ``i`` (``0.75+5i``).
    """
    if name in CATALOG:
        return CATALOG[name]
    kind, _, rest = name.partition(":")
    try:
        if kind == "roots":
            return polynomial_from_roots([_parse_complex(r) for r in rest.split(",") if r.strip()], name=name)
        if kind == "poly" and rest.strip():
            return polynomial([_parse_complex(c) for c in rest.split(",")], name=name)
    except ValueError as exc:
        raise UnknownFunction(name) from exc
    raise UnknownFunction(name)

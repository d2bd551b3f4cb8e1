"""Reference values computed independently of the package.

mpmath supplies arbitrary-precision Gamma and zeta; the alternating eta
series, Richardson extrapolation and the critical-line sign-change search
are written out here so they share no code with the implementation.
"""

import functools
import math

import mpmath as mp
import numpy as np

mp.mp.dps = 30


def mp_gamma(s):
    return complex(mp.gamma(mp.mpc(s)))


def mp_zeta(s):
    return complex(mp.zeta(mp.mpc(s)))


def mp_xi(s):
    s = mp.mpc(s)
    return complex(mp.pi ** (-s / 2) * mp.gamma(s / 2) * mp.zeta(s))


def mp_psi(s):
    s = mp.mpc(s)
    return complex(mp.pi ** (s - mp.mpf(1) / 2) * mp.gamma((1 - s) / 2) / mp.gamma(s / 2))


def mp_f_zeta(s):
    s = mp.mpc(s)
    psi = mp.pi ** (s - mp.mpf(1) / 2) * mp.gamma((1 - s) / 2) / mp.gamma(s / 2)
    return complex(mp.zeta(s) ** 2 / ((mp.mpf(1) / 2 - s) * (psi + (1 + psi) ** 2)))


def eta_zeta(s, terms=60):
    """zeta(s) = eta(s) / (1 - 2^(1-s)) with Borwein's accelerated alternating series (s != 1)."""
    with mp.workdps(40):
        s = mp.mpc(s)
        n = terms
        d = [mp.mpf(0)] * (n + 1)
        acc = mp.mpf(0)
        for i in range(n + 1):
            acc += mp.factorial(n + i - 1) * 4 ** i / (mp.factorial(n - i) * mp.factorial(2 * i)) if i else mp.mpf(1) / n
            d[i] = n * acc
        total = mp.mpf(0)
        for k in range(n):
            total += (-1) ** k * (d[k] - d[n]) / (k + 1) ** s
        eta = -total / d[n]
        return complex(eta / (1 - mp.mpf(2) ** (1 - s)))


def richardson_derivative(f, x, h=0.1, levels=6):
    """Central differences extrapolated in h^2 (Neville table)."""
    table = []
    for i in range(levels):
        hi = h / 2 ** i
        row = [(f(x + hi) - f(x - hi)) / (2 * hi)]
        for j in range(1, i + 1):
            row.append(row[j - 1] + (row[j - 1] - table[i - 1][j - 1]) / (4 ** j - 1))
        table.append(row)
    return table[-1][-1]


def _xi_critical(t):
    s = mp.mpc(0.5, t)
    return mp.re(mp.pi ** (-s / 2) * mp.gamma(s / 2) * mp.zeta(s))


@functools.lru_cache(maxsize=None)
def critical_line_zeros(t_lo=1.0, t_hi=30.0, step=0.01, tol=1e-4):
    """Heights of sign changes of the real function xi(1/2 + it), refined by bisection."""
    with mp.workdps(20):
        n = int(round((t_hi - t_lo) / step))
        ts = [t_lo + step * k for k in range(n + 1)]
        vals = [_xi_critical(t) for t in ts]
        out = []
        for k in range(n):
            if (vals[k] > 0) != (vals[k + 1] > 0):
                lo, hi, vlo = ts[k], ts[k + 1], vals[k]
                while hi - lo > tol:
                    mid = 0.5 * (lo + hi)
                    vm = _xi_critical(mid)
                    if (vm > 0) == (vlo > 0):
                        lo, vlo = mid, vm
                    else:
                        hi = mid
                out.append(0.5 * (lo + hi))
        return tuple(out)


def planted_polynomial(rng, degree_max=6, box=2.0):
    degree = int(rng.integers(1, degree_max + 1))
    roots = rng.uniform(-box, box, degree) + 1j * rng.uniform(-box, box, degree)
    return roots


def interior_count(roots, a, b, lo, hi):
    return int(sum(1 for r in roots if a < r.real < b and lo < r.imag < hi))


def min_distance_to_boundary(roots, a, b, lo, hi):
    d = math.inf
    for r in roots:
        x, y = r.real, r.imag
        # distance to each edge segment
        for (x0, y0, x1, y1) in ((a, lo, b, lo), (b, lo, b, hi), (b, hi, a, hi), (a, hi, a, lo)):
            px = min(max(x, min(x0, x1)), max(x0, x1))
            py = min(max(y, min(y0, y1)), max(y0, y1))
            d = min(d, math.hypot(x - px, y - py))
    return d


def random_rectangle(rng, roots, margin=0.02, box=2.5, tries=100):
    """Random axis-aligned rectangle whose boundary keeps ``margin`` away from every root."""
    for _ in range(tries):
        a, b = np.sort(rng.uniform(-box, box, 2))
        lo, hi = np.sort(rng.uniform(-box, box, 2))
        if b - a < 0.2 or hi - lo < 0.2:
            continue
        if min_distance_to_boundary(roots, a, b, lo, hi) > margin:
            return float(a), float(b), float(lo), float(hi)
    raise RuntimeError("no admissible rectangle")

import math

import numpy as np
import pytest
import scipy.special as sc
from hypothesis import given
from hypothesis import strategies as st

from oracles import eta_zeta, mp_f_zeta, mp_gamma, mp_psi, mp_xi, mp_zeta
from zerofree.errors import DenominatorZero, DomainError, PoleAt, UnknownFunction
from zerofree.specialfns import (
    CATALOG,
    PSI_RATIO,
    XI,
    ZETA,
    ZETA_F,
    f_gamma,
    f_gamma_closed_form,
    f_zeta,
    f_zeta_on_critical_line,
    f_zeta_on_critical_line_cosine_form,
    f_zeta_xi_form,
    gamma,
    get_function,
    log_gamma,
    polynomial,
    polynomial_from_roots,
    psi_ratio,
    xi,
    zeta,
    zeta_euler_maclaurin,
)


def rel_err(a, b):
    return np.abs(np.asarray(a) - np.asarray(b)) / np.abs(np.asarray(b))


def grid_200(re_lo, re_hi, im_lo, im_hi, seed):
    rng = np.random.default_rng(seed)
    return rng.uniform(re_lo, re_hi, 200) + 1j * rng.uniform(im_lo, im_hi, 200)


# -- Gamma ------------------------------------------------------------------------


def test_gamma_examples():
    assert gamma(1.0) == pytest.approx(1.0, rel=1e-15)
    assert abs(gamma(0.5) - math.sqrt(math.pi)) / math.sqrt(math.pi) < 1e-15
    s = 2 + 3j
    assert abs(gamma(s + 1) / gamma(s) - s) / abs(s) < 1e-12


@pytest.mark.parametrize("n", [0, -1, -2, -7])
def test_gamma_poles(n):
    with pytest.raises(PoleAt) as err:
        gamma(complex(n) + 1e-4j)
    assert err.value.pole == n


def test_gamma_against_mpmath_on_primary_strip():
    rng = np.random.default_rng(1)
    s = rng.uniform(-20, 20, 400) + 1j * rng.uniform(-200, 200, 400)
    s = s[np.abs(s - np.round(s.real)) > 1e-2]
    ref = np.array([mp_gamma(z) for z in s])
    ok = np.abs(ref) > 1e-300
    assert rel_err(gamma(s[ok]), ref[ok]).max() <= 1e-12


def test_gamma_recurrence_1000_points():
    rng = np.random.default_rng(2)
    s = rng.uniform(0.1, 20, 1000) + 1j * rng.uniform(-100, 100, 1000)
    g = gamma(s)
    ok = np.abs(g) > 1e-290
    assert rel_err(gamma(s[ok] + 1), s[ok] * g[ok]).max() <= 1e-11


@given(st.floats(0.1, 20), st.floats(-100, 100))
def test_gamma_recurrence_property(re, im):
    s = complex(re, im)
    g = gamma(s)
    if abs(g) < 1e-290:
        return
    assert abs(gamma(s + 1) - s * g) <= 1e-11 * abs(s * g)


@given(st.floats(-15, 15), st.floats(-30, 30))
def test_gamma_reflection_property(re, im):
    s = complex(re, im)
    if abs(s - round(re)) < 1e-2:
        return
    value = gamma(s) * gamma(1 - s) * np.sin(np.pi * s) / np.pi
    assert abs(value - 1) <= 1e-10


def test_log_gamma_examples():
    assert abs(log_gamma(1.0)) < 1e-15
    assert log_gamma(11.0) == pytest.approx(15.104412573075516, rel=1e-14)
    s = 0.5 + 50j
    assert abs(abs(np.exp(log_gamma(s))) - abs(gamma(s))) / abs(gamma(s)) < 1e-9


@pytest.mark.parametrize("s", [0.0, -1.5 + 2j, -1e-9 + 40j])
def test_log_gamma_domain(s):
    with pytest.raises(DomainError):
        log_gamma(s)


def test_log_gamma_matches_principal_branch():
    rng = np.random.default_rng(3)
    s = rng.uniform(0.01, 30, 300) + 1j * rng.uniform(-500, 500, 300)
    ref = sc.loggamma(s)
    assert np.max(np.abs(log_gamma(s) - ref) / np.maximum(1, np.abs(ref))) < 1e-12


def test_log_gamma_continuous_along_vertical_line():
    t = np.linspace(0, 300, 30001)
    values = log_gamma(0.7 + 1j * t)
    assert np.max(np.abs(np.diff(values.imag))) < 0.1


# -- zeta -------------------------------------------------------------------------


def test_zeta_examples():
    assert abs(zeta(2.0) - math.pi ** 2 / 6) < 1e-15
    assert abs(zeta(0.0) - eta_zeta(0.0)) < 1e-14
    assert eta_zeta(0.0) == pytest.approx(-0.5, abs=1e-20)
    s = 0.3 + 5j
    fe = 2 ** s * np.pi ** (s - 1) * np.sin(np.pi * s / 2) * gamma(1 - s) * zeta(1 - s)
    assert abs(zeta(s) - fe) < 1e-9


def test_zeta_pole():
    with pytest.raises(PoleAt) as err:
        zeta(1 + 1e-5j)
    assert err.value.pole == 1


def test_zeta_against_mpmath():
    s = np.concatenate([grid_200(-10, 10, -100, 100, 4), grid_200(0, 1, 0, 100, 5)])
    s = s[np.abs(s - 1) > 0.01]
    ref = np.array([mp_zeta(z) for z in s])
    assert rel_err(zeta(s), ref).max() <= 1e-10


def test_zeta_against_eta_series():
    pts = [0.0, 0.5 + 3j, 2 + 1j, -1.5 + 0.5j, 0.9 + 20j]
    for s in pts:
        assert abs(zeta(s) - eta_zeta(s)) <= 1e-11 * abs(eta_zeta(s))


def test_zeta_functional_equation_grid():
    s = grid_200(-0.5, 1.5, 1, 60, 6)
    fe = 2 ** s * np.pi ** (s - 1) * np.sin(np.pi * s / 2) * gamma(1 - s) * zeta(1 - s)
    assert rel_err(zeta(s), fe).max() <= 1e-9


def test_zeta_value_does_not_depend_on_batch():
    s = np.array([0.3 + 5j, 2 + 90j, -3 + 1j, 0.7 + 0.2j])
    batch = zeta(s)
    for z, v in zip(s, batch):
        assert zeta(z) == v


def test_euler_maclaurin_converges_in_terms():
    s = 0.6 + 30j
    assert abs(zeta_euler_maclaurin(s, 60) - zeta_euler_maclaurin(s, 200)) < 1e-12


def test_zeta_derivative_against_mpmath():
    import mpmath as mp

    s = grid_200(-5, 6, -60, 60, 7)
    s = s[np.abs(s - 1) > 0.05]
    ref = np.array([complex(mp.zeta(mp.mpc(z), derivative=1)) for z in s])
    assert rel_err(ZETA.diff(s), ref).max() <= 1e-10


@pytest.mark.parametrize("sigma", [0.6, 0.8, 1.0])
def test_zeta_growth_constant_is_finite(sigma):
    t = np.linspace(10, 200, 1901)
    constant = np.max(np.abs(zeta(sigma + 1j * t)) * t ** -0.25)
    print(f"sigma={sigma}: max |zeta| t^(-1/4) on [10, 200] = {constant:.4f}")
    assert math.isfinite(constant) and 0 < constant < 10


# -- xi and psi ---------------------------------------------------------------------


def test_xi_examples():
    s = 0.3 + 2j
    assert abs(xi(s) - xi(1 - s)) / abs(xi(s)) < 1e-9
    v = xi(0.5 + 14j)
    assert abs(v.imag) <= 1e-10 * abs(v)
    assert xi(2.0) == pytest.approx(0.5235987755982988, rel=1e-14)


@pytest.mark.parametrize("p", [0.0, 1.0])
def test_xi_poles(p):
    with pytest.raises(PoleAt):
        xi(p + 1e-4)


def test_xi_symmetry_grid():
    s = grid_200(-0.5, 1.5, 0.5, 60, 8)
    assert rel_err(xi(s), xi(1 - s)).max() <= 1e-9


def test_xi_against_mpmath():
    s = grid_200(-4, 5, -50, 50, 9)
    s = s[(np.abs(s) > 0.05) & (np.abs(s - 1) > 0.05)]
    ref = np.array([mp_xi(z) for z in s])
    assert rel_err(xi(s), ref).max() <= 1e-10


def test_xi_near_trivial_zeros_uses_symmetry():
    for n in (-2, -4, -10):
        s = n + 1e-5j
        assert abs(xi(s) - xi(1 - s)) <= 1e-10 * abs(xi(1 - s))


def test_xi_real_on_critical_line():
    t = np.arange(0, 50.0001, 0.1)
    v = xi(0.5 + 1j * t)
    assert np.all(np.abs(v.imag) <= 1e-10 * np.abs(v))


def test_xi_derivative_against_mpmath():
    import mpmath as mp

    s = grid_200(-3, 4, 0.5, 40, 10)

    def f(z):
        return mp.pi ** (-z / 2) * mp.gamma(z / 2) * mp.zeta(z)

    ref = np.array([complex(mp.diff(f, mp.mpc(z))) for z in s])
    assert rel_err(XI.diff(s), ref).max() <= 1e-10


def test_psi_examples():
    assert abs(psi_ratio(0.5) - 1) < 1e-15
    rng = np.random.default_rng(12)
    s = rng.uniform(-3, 4, 200) + 1j * rng.uniform(0.5, 60, 200)
    assert np.max(np.abs(psi_ratio(s) * psi_ratio(1 - s) - 1)) <= 1e-10
    ref = np.array([mp_psi(z) for z in s[:50]])
    assert rel_err(psi_ratio(s[:50]), ref).max() <= 1e-11


@pytest.mark.parametrize("n", [1, 3, 0, -2])
def test_psi_poles(n):
    with pytest.raises(PoleAt):
        psi_ratio(n + 1e-5)


@pytest.mark.parametrize("sigma", [1.0, 2.0])
def test_psi_growth_bounded(sigma):
    t = np.array([20.0, 40.0, 80.0, 160.0])
    scaled = np.abs(psi_ratio(sigma + 1j * t)) * t ** (sigma - 0.5)
    assert scaled.max() / scaled.min() < 1.1


# -- auxiliary constructions ---------------------------------------------------------


def test_f_gamma_examples():
    v = f_gamma(0.5 + 3j)
    assert abs(v.imag) <= 1e-10 * abs(v)
    t = 2.0
    assert abs(f_gamma(1 + 1j * t).imag - t * abs(gamma(1 + 1j * t)) ** 2) <= 1e-10 * t * abs(gamma(1 + 1j * t)) ** 2
    assert f_gamma(0.5) == pytest.approx(math.pi / 4, rel=1e-14)


def test_f_gamma_removable_points():
    assert f_gamma(0.0) == pytest.approx(1.0, rel=1e-15)
    assert f_gamma(1.0) == pytest.approx(1.0, rel=1e-15)
    assert abs(f_gamma(1e-4 + 1e-4j) - f_gamma_closed_form(1e-4 + 1e-4j)) < 1e-12


@pytest.mark.parametrize("n", [2, 3, -1, -4])
def test_f_gamma_poles(n):
    with pytest.raises(PoleAt) as err:
        f_gamma(n + 1e-4)
    assert err.value.pole == n


def test_f_gamma_closed_form_agreement():
    rng = np.random.default_rng(13)
    s = rng.uniform(-5, 6, 500) + 1j * rng.uniform(-30, 30, 500)
    s = s[np.abs(s - np.round(s.real)) > 1e-2]
    assert rel_err(f_gamma(s), f_gamma_closed_form(s)).max() <= 1e-10


def test_f_zeta_examples():
    v = f_zeta(0.5 + 15j)
    assert abs(v.real) <= 1e-8 * abs(v)
    for sigma in (35.0, 40.0):
        approx = 1 / (0.5 - sigma - 10j)
        assert abs(f_zeta(sigma + 10j) - approx) / abs(approx) < 0.05
    s = 2 + 10j
    assert abs(f_zeta(s) - f_zeta_xi_form(s)) / abs(f_zeta(s)) < 1e-8


def test_f_zeta_against_mpmath():
    s = grid_200(-3, 5, 5, 60, 14)
    ref = np.array([mp_f_zeta(z) for z in s])
    assert rel_err(f_zeta(s), ref).max() <= 1e-9


def test_f_zeta_singular_points():
    with pytest.raises(PoleAt) as err:
        f_zeta(0.5 + 1e-4j)
    assert err.value.pole == 0.5
    with pytest.raises(PoleAt) as err:
        f_zeta(1.0)
    assert err.value.pole == 1
    assert 1.0 not in ZETA_F.known_poles


def _denominator_root(start):
    target = (-3 + 5 ** 0.5) / 2
    s = start
    for _ in range(40):
        s -= (PSI_RATIO(s) - target) / PSI_RATIO.diff(s)
    return s


def test_f_zeta_denominator_zero_is_reported():
    s = _denominator_root(1.3 + 20j)
    assert 1.2 < s.real < 1.4 and 20 < s.imag < 21
    with pytest.raises(DenominatorZero):
        f_zeta(s)
    # just off the root the value is finite and huge: a genuine pole
    assert abs(f_zeta(s + 1e-6)) > 1e3


def test_f_zeta_critical_line_reduction():
    t = np.linspace(1, 40, 157)
    direct = f_zeta(0.5 + 1j * t)
    reduced = f_zeta_on_critical_line(t)
    assert np.all(reduced.real == 0)
    assert rel_err(reduced, direct).max() < 1e-9


def test_f_zeta_cosine_variant_differs_in_modulus():
    t = np.linspace(1, 40, 157)
    variant = f_zeta_on_critical_line_cosine_form(t)
    direct = f_zeta(0.5 + 1j * t)
    assert np.all(variant.real == 0)
    assert rel_err(variant, direct).max() > 0.5


def test_f_zeta_derivative_against_mpmath():
    import mpmath as mp

    s = grid_200(0.6, 6, 5, 40, 15)
    ref = np.array([complex(mp.diff(_mp_fz, mp.mpc(z))) for z in s])
    assert rel_err(ZETA_F.diff(s), ref).max() <= 1e-8


def _mp_fz(z):
    import mpmath as mp

    psi = mp.pi ** (z - mp.mpf(1) / 2) * mp.gamma((1 - z) / 2) / mp.gamma(z / 2)
    return mp.zeta(z) ** 2 / ((mp.mpf(1) / 2 - z) * (psi + (1 + psi) ** 2))


# -- catalog -------------------------------------------------------------------------


def test_catalog_names_and_poles():
    assert set(CATALOG) == {"gamma", "zeta", "xi", "psi-ratio", "gamma-F", "zeta-F"}
    assert CATALOG["gamma"].poles_in(-3, 1, -1, 1) == [-3, -2, -1, 0]
    assert CATALOG["zeta"].known_poles == (1.0,)
    assert CATALOG["xi"].known_poles == (0.0, 1.0)
    assert CATALOG["gamma-F"].poles_in(-2.5, 3.5, -1, 1) == [-2, -1, 2, 3]
    with pytest.raises(TypeError):
        CATALOG["new"] = None


@pytest.mark.parametrize("name", ["Gamma", "zeta2", "", "roots:abc", "poly:"])
def test_unknown_function_names(name):
    with pytest.raises(UnknownFunction):
        get_function(name)


def test_polynomial_forms():
    f = get_function("roots:0.75+5i, -1")
    assert abs(f(0.75 + 5j)) == 0
    assert abs(f(-1.0)) == 0
    g = get_function("poly:1,0,1")
    assert g(1j) == 0
    assert g.diff(2.0) == 4
    p = polynomial_from_roots([1, 2])
    np.testing.assert_allclose(p(np.array([0.0, 3.0])), [2, 2])
    assert polynomial([2.0]).diff(5.0) == 0

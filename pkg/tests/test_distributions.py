import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from planckdecomp import DARK, GAUSS, PLANCK, ModeParams, binary, multiplet
from planckdecomp import distributions as dist
from planckdecomp.params import DomainError

BETAS = [0.01, 0.1, 1.0, 5.0, 20.0]
FAMILIES = [GAUSS, DARK, PLANCK, binary(0), binary(3), multiplet(1), multiplet(4)]

betas = st.floats(min_value=1e-3, max_value=50.0)


def test_gauss_density_values():
    assert dist.gauss_density(0.0, ModeParams(1.0)) == 1.0
    assert dist.gauss_density(0.0, ModeParams(2.5)) == 2.5
    with pytest.raises(DomainError):
        dist.gauss_density(-0.1, ModeParams(1.0))


def test_dark_density_values():
    assert dist.dark_density(0.0, ModeParams(1.0)) == pytest.approx(1.5819767068693265, rel=1e-14)
    for z in (0.0, 0.3, 0.999):
        assert abs(dist.dark_density(z, ModeParams(1e-6)) - 1.0) < 1e-5
    for z in (-0.01, 1.0):
        with pytest.raises(DomainError):
            dist.dark_density(z, ModeParams(1.0))


@pytest.mark.parametrize("beta", BETAS)
def test_densities_normalised_by_quadrature(beta):
    p = ModeParams(beta)
    g = integrate.quad(lambda y: dist.gauss_density(y, p), 0, 50 / beta, epsabs=0, epsrel=1e-12)[0]
    d = integrate.quad(lambda z: dist.dark_density(z, p), 0, 1, epsabs=0, epsrel=1e-12)[0]
    # 50/beta leaves out e**-50 of the Gauss mass
    assert abs(g - 1) < 1e-10
    assert abs(d - 1) < 1e-10


@pytest.mark.parametrize("beta", BETAS)
def test_pmfs_sum_to_one(beta):
    p = ModeParams(beta)
    n = np.arange(0, int(60 / beta) + 10)
    tail = math.exp(-beta * len(n))
    assert abs(math.fsum(dist.planck_pmf(n, p)) + tail - 1) < 1e-10
    for m in (1, 2, 5):
        lsum = math.fsum(dist.multiplet_pmf(m, np.arange(40), p))
        assert abs(lsum - 1) < 1e-10
    pe, po = dist.binary_occupation(np.arange(64), p)
    assert np.max(np.abs(pe + po - 1.0)) <= 2.3e-16


def test_planck_pmf_values():
    p = ModeParams(1.0)
    assert dist.planck_pmf(0, p) == pytest.approx(0.6321205588285577, rel=1e-15)
    b = p.b
    assert dist.planck_pmf(9, p) == pytest.approx((1 - b) * b**9, rel=1e-14)
    assert math.fsum(dist.planck_pmf(np.arange(501), p)) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(DomainError):
        dist.planck_pmf(-1, p)


def test_binary_occupation_values():
    p = ModeParams(1.0)
    assert dist.binary_occupation(0, p)[1] == pytest.approx(0.2689414213699951, rel=1e-15)
    assert dist.binary_occupation(1, p)[1] == pytest.approx(0.11920292202211755, rel=1e-15)
    pe, po = dist.binary_occupation(60, ModeParams(1.0))
    assert po == 0.0 and pe == 1.0
    assert dist.binary_occupation(0, ModeParams(1e4))[1] == 0.0
    # 2**s beta up to 1e6 must not overflow
    assert np.isfinite(dist.binary_log_occupation(20, ModeParams(1.0))[1])


@given(beta=betas, s=st.integers(0, 40))
def test_binary_occupation_is_logistic_and_monotone(beta, s):
    p = ModeParams(beta)
    po = dist.binary_occupation(s, p)[1]
    x = mpmath.mpf(beta) * 2**s
    assert po == pytest.approx(float(1 / (mpmath.exp(x) + 1)), rel=1e-13, abs=1e-300)
    assert dist.binary_occupation(s + 1, p)[1] <= po
    assert dist.binary_occupation(s, ModeParams(beta * 1.5))[1] <= po


def test_multiplet_rates():
    p = ModeParams(1.0)
    assert dist.multiplet_rate(1, p) == p.b
    assert dist.multiplet_rate(2, p) == pytest.approx(0.06766764161830635, rel=1e-15)
    lam3 = math.exp(-3) / 3
    assert dist.multiplet_pmf(3, 0, p) == pytest.approx(math.exp(-lam3), rel=1e-15)
    with pytest.raises(DomainError):
        dist.multiplet_rate(0, p)


def test_characteristic_function_values():
    p = ModeParams(1.0)
    for f in FAMILIES:
        assert dist.characteristic_function(f, 0.0, p) == 1 + 0j
    assert dist.characteristic_function(GAUSS, 1.0, p) == pytest.approx(0.5 + 0.5j, abs=1e-15)


@pytest.mark.parametrize("beta", [0.1, 1.0, 5.0])
def test_characteristic_function_bounded(beta):
    p = ModeParams(beta)
    t = np.linspace(-50, 50, 2001)
    for f in FAMILIES:
        assert np.all(np.abs(dist.characteristic_function(f, t, p)) <= 1 + 1e-15)


@pytest.mark.parametrize("beta", [0.1, 1.0, 5.0])
def test_planck_cf_matches_fourier_sum_of_pmf(beta):
    p = ModeParams(beta)
    n = np.arange(int(40 / beta) + 50)
    t = np.linspace(-20, 20, 81)
    direct = (dist.planck_pmf(n, p)[None, :] * np.exp(1j * np.outer(t, n))).sum(axis=1)
    assert np.max(np.abs(direct - dist.characteristic_function(PLANCK, t, p))) < 1e-10


@pytest.mark.parametrize("beta", [0.1, 1.0, 5.0])
def test_dark_cf_matches_quadrature(beta):
    p = ModeParams(beta)
    for t in (-7.0, 0.5, 3.0):
        re = integrate.quad(lambda z: math.cos(t * z) * dist.dark_density(z, p), 0, 1, epsabs=1e-14)[0]
        im = integrate.quad(lambda z: math.sin(t * z) * dist.dark_density(z, p), 0, 1, epsabs=1e-14)[0]
        assert abs(complex(re, im) - dist.characteristic_function(DARK, t, p)) < 1e-12


def _numeric_moments(f, p):
    if f is GAUSS or f is DARK:
        dens = dist.gauss_density if f is GAUSS else dist.dark_density
        hi = 60 / p.beta if f is GAUSS else 1.0
        m1 = integrate.quad(lambda y: y * dens(y, p), 0, hi, epsabs=0, epsrel=1e-13, limit=200)[0]
        m2 = integrate.quad(lambda y: (y - m1) ** 2 * dens(y, p), 0, hi, epsabs=0, epsrel=1e-13, limit=200)[0]
        return m1, m2
    if f is PLANCK:
        n = np.arange(int(80 / p.beta) + 20, dtype=float)
        w = dist.planck_pmf(n.astype(int), p)
    elif f.kind.value == "binary":
        n = np.array([0.0, 2.0**f.index])
        w = np.array(dist.binary_occupation(f.index, p))
    else:
        l = np.arange(60)
        n = l * float(f.index)
        w = dist.multiplet_pmf(f.index, l, p)
    m1 = math.fsum(n * w)
    return m1, math.fsum((n - m1) ** 2 * w)


@pytest.mark.parametrize("beta", [0.1, 1.0, 5.0])
@pytest.mark.parametrize("f", FAMILIES, ids=str)
def test_closed_form_moments_match_numerics(f, beta):
    p = ModeParams(beta)
    mean, var = dist.mean_and_variance(f, p)
    m1, m2 = _numeric_moments(f, p)
    assert mean == pytest.approx(m1, rel=1e-9, abs=1e-300)
    assert var == pytest.approx(m2, rel=1e-9, abs=1e-300)


def test_moment_values():
    p = ModeParams(1.0)
    assert dist.mean_and_variance(GAUSS, p) == (1.0, 1.0)
    assert dist.mean_and_variance(PLANCK, p)[0] == pytest.approx(0.5819767068693265, rel=1e-15)
    assert abs(dist.mean_and_variance(DARK, ModeParams(1e-6))[0] - 0.5) < 1e-6
    summary = dist.moments(PLANCK, p)
    assert summary.variance >= 0 and summary.entropy_over_k == pytest.approx(1.0406518522564, abs=1e-12)


@given(beta=betas)
def test_variance_additivity(beta):
    p = ModeParams(beta)
    v_eta = dist.mean_and_variance(GAUSS, p)[1]
    v_xi = dist.mean_and_variance(PLANCK, p)[1]
    v_zeta = dist.mean_and_variance(DARK, p)[1]
    assert abs(v_eta - v_xi - v_zeta) <= 1e-12 * v_eta


def _dark_mean_mp(beta):
    b = mpmath.mpf(beta)
    return 1 / b - 1 / mpmath.expm1(b)


def _dark_var_mp(beta):
    b = mpmath.mpf(beta)
    return 1 / b**2 - mpmath.mpf(1) / (4 * mpmath.sinh(b / 2) ** 2)


@given(beta=st.floats(min_value=1e-8, max_value=30.0))
def test_dark_moments_against_high_precision(beta):
    with mpmath.workdps(60):
        mean = float(_dark_mean_mp(beta))
        var = float(_dark_var_mp(beta))
    assert dist.dark_mean(beta) == pytest.approx(mean, rel=1e-13)
    assert dist.dark_variance(beta) == pytest.approx(var, rel=1e-11)


def test_dark_mean_approaches_half_from_below():
    for beta in (1e-2, 1e-4, 1e-8):
        m = dist.dark_mean(beta)
        assert m < 0.5 and 0.5 - m == pytest.approx(beta / 12, rel=1e-3)


@pytest.mark.parametrize("beta", [0.1, 1.0, 5.0])
def test_dark_entropy_matches_quadrature(beta):
    p = ModeParams(beta)
    h = integrate.quad(lambda z: -dist.dark_density(z, p) * math.log(dist.dark_density(z, p)), 0, 1,
                       epsabs=0, epsrel=1e-11)[0]
    assert dist.entropy_over_k(DARK, p) == pytest.approx(h, rel=1e-10)

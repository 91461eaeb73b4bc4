import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from planckdecomp import PLANCK, ModeParams
from planckdecomp import decomposition as dc
from planckdecomp import distributions as dist
from planckdecomp.params import DomainError

from oracles import planck_pmf

FK = dc.FactorizationKind
GRID = np.linspace(-20.0, 20.0, 401)


def test_split_integer_fraction_examples():
    assert dc.split_integer_fraction(9.25) == (9, 0.25)
    assert dc.split_integer_fraction(0.999) == (0, 0.999)
    n, z = dc.split_integer_fraction(3.0)
    assert (n, z) == (3, 0.0)
    for bad in (-0.5, math.inf, math.nan):
        with pytest.raises(DomainError):
            dc.split_integer_fraction(bad)


@given(st.floats(min_value=0.0, max_value=2.0**52, allow_nan=False))
def test_split_is_exact(y):
    n, z = dc.split_integer_fraction(y)
    assert 0.0 <= z < 1.0
    assert n + z == y


def test_split_arrays():
    n, z = dc.split_integer_fraction(np.array([0.5, 7.0, 12.75]))
    assert n.dtype == np.int64 and n.tolist() == [0, 7, 12]
    assert z.tolist() == [0.5, 0.0, 0.75]


def test_dyadic_expansion_examples():
    assert dc.dyadic_expansion(9).bits == (0, 3)
    assert dc.dyadic_expansion(0).bits == ()
    for k in range(41):
        assert dc.dyadic_expansion(2**k).bits == (k,)
    with pytest.raises(DomainError):
        dc.dyadic_expansion(-1)


def test_dyadic_round_trip_to_a_million():
    for n in range(1_000_001):
        if dc.dyadic_expansion(n).reconstruct() != n:
            raise AssertionError(n)


@pytest.mark.parametrize("beta", [0.1, 1.0, 5.0])
def test_bose_events_match_planck_pmf(beta):
    p = ModeParams(beta)
    log_one_minus_b = math.log(-math.expm1(-beta))
    for n in range(1024):
        got = dc.event_log_probability(dc.bose_event(n), p)
        want = log_one_minus_b - n * beta
        # relative error of the probability itself
        assert abs(math.expm1(got - want)) < 1e-12, n


def test_b9_and_the_union_example():
    for beta in (0.1, 1.0, 5.0):
        p = ModeParams(beta)
        b = p.b
        assert dc.event_probability(dc.bose_event(9), p) == pytest.approx(planck_pmf(9, beta), rel=1e-12)
        rest = (dc.empty(1), dc.empty(2))
        e = dc.union(
            dc.atom(dc.occupied(0), *rest, empty_beyond=3),
            dc.atom(dc.occupied(3), *rest, empty_beyond=3),
        )
        want = (1 - b) * (b + b**8 + b**9)
        assert dc.event_probability(e, p) == pytest.approx(want, rel=1e-12)
        disjoint = sum(dc.event_probability(dc.bose_event(n), p) for n in (1, 8, 9))
        assert dc.event_probability(e, p) == pytest.approx(disjoint, rel=1e-12)


def test_operators_build_unions_and_products():
    p = ModeParams(1.0)
    a0 = dc.atom(dc.occupied(0))
    a1 = dc.atom(dc.occupied(1))
    po0 = dist.binary_occupation(0, p)[1]
    po1 = dist.binary_occupation(1, p)[1]
    assert dc.event_probability(a0 & a1, p) == pytest.approx(po0 * po1, rel=1e-14)
    assert dc.event_probability(a0 | a1, p) == pytest.approx(po0 + po1 - po0 * po1, rel=1e-14)
    # an occupied literal above the other atom's empty tail is impossible
    assert dc.event_probability(dc.bose_event(1) & dc.atom(dc.occupied(5)), p) == 0.0


def test_contradictory_atom_has_zero_probability():
    e = dc.atom(dc.occupied(2), dc.empty(2))
    assert dc.event_probability(e, ModeParams(1.0)) == 0.0
    assert dc.event_log_probability(e, ModeParams(1.0)) == -math.inf


def test_nested_union_is_rejected():
    inner = dc.union(dc.atom(dc.occupied(0)), dc.atom(dc.occupied(1)))
    nested = dc.BinaryEvent(atoms=(inner, dc.atom(dc.occupied(2))))
    with pytest.raises(DomainError):
        dc.event_probability(nested, ModeParams(1.0))


def test_free_tail_event_is_a_marginal():
    p = ModeParams(0.7)
    assert dc.event_probability(dc.atom(dc.occupied(2)), p) == pytest.approx(
        dist.binary_occupation(2, p)[1], rel=1e-15)


def test_planck_pmf_via_binaries():
    p = ModeParams(1.0)
    assert dc.planck_pmf_via_binaries(9, p, 40) == pytest.approx(dist.planck_pmf(9, p), rel=1e-12)
    assert dc.planck_pmf_via_binaries(0, p) == pytest.approx(1 - p.b, rel=1e-12)
    with pytest.raises(DomainError):
        dc.planck_pmf_via_binaries(2**41, p, 40)


@given(n=st.integers(0, 5000), beta=st.floats(min_value=0.01, max_value=10.0))
def test_binary_route_matches_geometric_law(n, beta):
    p = ModeParams(beta)
    got = dc.planck_logpmf_via_binaries(n, p, 40)
    assert abs(got - dist.planck_logpmf(n, p)) <= 1e-12 * max(1.0, abs(got))


@pytest.mark.parametrize("beta", [0.1, 1.0, 5.0])
@pytest.mark.parametrize("kind,trunc", [(FK.GAUSS_EQUALS_DARK_TIMES_PLANCK, 0),
                                        (FK.PLANCK_EQUALS_BINARY_PRODUCT, 40),
                                        (FK.PLANCK_EQUALS_MULTIPLET_PRODUCT, 2000)])
def test_factorization_residuals(kind, trunc, beta):
    p = ModeParams(beta)
    assert dc.cf_factorization_residual(kind, GRID, p, trunc) < 1e-12
    assert dc.cf_factorization_residual(kind, [0.0], p, trunc) == 0.0


def test_binary_product_oracle_by_hand():
    # independent evaluation of prod_s (1 + b^(2^s) e^(i 2^s t)) / (1 + b^(2^s))
    beta, t = 1.0, 1.3
    b = math.exp(-beta)
    prod = 1.0 + 0j
    for s in range(8):
        x = b ** (2**s)
        prod *= (1 + x * cmath.exp(1j * 2**s * t)) / (1 + x)
    want = (1 - b) / (1 - b * cmath.exp(1j * t))
    assert abs(prod - want) < 1e-15
    got = dist.characteristic_function(PLANCK, t, ModeParams(beta))
    assert abs(got - want) < 1e-15


def test_binary_residual_non_increasing_beyond_cutoff():
    p = ModeParams(1.0)
    start = 6  # 2**6 > 50
    res = [dc.cf_factorization_residual(FK.PLANCK_EQUALS_BINARY_PRODUCT, GRID, p, s) for s in range(start, 45)]
    assert all(b <= a for a, b in zip(res, res[1:]))


def test_truncated_products_show_truncation_error():
    p = ModeParams(0.1)
    assert dc.cf_factorization_residual(FK.PLANCK_EQUALS_BINARY_PRODUCT, GRID, p, 2) > 1e-3
    assert dc.cf_factorization_residual(FK.PLANCK_EQUALS_MULTIPLET_PRODUCT, GRID, p, 5) > 1e-3


def test_poisson_log_cf():
    p = ModeParams(1.0)
    assert dc.poisson_logcf_partial(0.0, p, 7) == 0
    want = cmath.log(dist.characteristic_function(PLANCK, 1.0, p))
    assert abs(dc.poisson_logcf_partial(1.0, p, 200) - want) < 1e-12
    for M in (1, 5, 20):
        err = abs(dc.poisson_logcf_partial(2.0, p, M) - cmath.log(dist.characteristic_function(PLANCK, 2.0, p)))
        assert err <= dc.poisson_logcf_tail_bound(p, M)

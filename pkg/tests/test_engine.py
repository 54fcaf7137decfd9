import math

import numpy as np
import pytest

from core.analysis import get_test_function, zeta_restricted
from core.engine import (
    PairTable, TruncationPolicy, eisenstein_closed_form, get_pair_table, hecke_weighted_k_sum, k_sum,
    moment_chain, moment_proxy, ramanujan_dirichlet_series, reciprocity_factor, s_sum,
    verify_dirichlet_lemma, verify_linearity, verify_ng_s, verify_ramanujan, verify_reciprocity,
    verify_sieve, weight_from_test_function,
)
from core.errors import EqualPrimes, OutsideHalfPlane, SeriesDiverges

GAUSS = get_test_function("gauss13")
WEIGHT = weight_from_test_function(GAUSS)
SMALL = TruncationPolicy(c_max=40, mn_cap=2000)


def test_pair_table_layout(hecke_table):
    pairs = PairTable(hecke_table, 100, 1.5)
    assert pairs.N.size == sum(100 // m for m in range(1, 101))
    assert np.all(np.diff(pairs.N) >= 0)
    assert np.array_equal(pairs.N, pairs.m * pairs.n)
    i = int(np.nonzero((pairs.m == 2) & (pairs.n == 3))[0][0])
    expected = hecke_table.lambda_of(2) * hecke_table.lambda_of(3) * 6 ** -1.5
    assert pairs.W[i] == pytest.approx(expected)
    part = pairs.slice_for(10, 12)
    assert set(pairs.N[part].tolist()) == {10, 11, 12}
    with pytest.raises(ValueError):
        PairTable(hecke_table, hecke_table.n_max + 1, 1.5)


def test_truncation_policy():
    doubled = SMALL.doubled()
    assert (doubled.c_max, doubled.mn_cap) == (80, 4000)
    with pytest.raises(ValueError):
        TruncationPolicy(c_max=0)
    with pytest.raises(ValueError):
        TruncationPolicy(window=(2.0, 1.0))


def test_s_sum_rejects_bad_parameters(hecke_table, table_cache):
    with pytest.raises(EqualPrimes):
        s_sum(3, 3, 1.5, WEIGHT, SMALL, hecke_table)
    with pytest.raises(OutsideHalfPlane):
        s_sum(2, 3, 1.25, WEIGHT, SMALL, hecke_table)
    with pytest.raises(ValueError):
        s_sum(4, 3, 1.5, WEIGHT, SMALL, hecke_table)


def test_reciprocity_factor():
    assert reciprocity_factor(2, 3, 1.5) == pytest.approx((2 / 3) ** 2.5)
    assert reciprocity_factor(2, 3, 1.5, sabotage=True) == pytest.approx((2 / 3) ** 3.5)
    z = reciprocity_factor(5, 2, 1.4 + 0.3j)
    assert abs(z) == pytest.approx(2.5 ** (2 * 1.4 - 0.5))


def test_sweep_does_not_depend_on_workers(hecke_table, table_cache):
    serial = s_sum(2, 3, 1.5, WEIGHT, SMALL, hecke_table)
    threaded = s_sum(2, 3, 1.5, WEIGHT, TruncationPolicy(c_max=40, mn_cap=2000, workers=4), hecke_table)
    assert serial.value == threaded.value
    assert serial.budget == threaded.budget
    assert set(serial.components) == {"c_tail", "window", "mn_cap", "halving"}


def test_k_sum_truncation_is_inside_budget():
    short = k_sum(1, 1, 3, WEIGHT, TruncationPolicy(c_max=50))
    long = k_sum(1, 1, 3, WEIGHT, TruncationPolicy(c_max=100))
    assert abs(long.value - short.value) <= short.budget
    assert long.budget <= short.budget
    with pytest.raises(ValueError):
        k_sum(0, 1, 3, WEIGHT, SMALL)


def test_moment_proxy_is_scaled_k_sum(hecke_table, table_cache):
    plain = hecke_weighted_k_sum(2, 3, 1.5, WEIGHT, SMALL, hecke_table)
    proxy = moment_proxy(2, 3, 1.5, WEIGHT, SMALL, hecke_table)
    factor = zeta_restricted(3.0, 3) ** 2
    assert proxy.value == pytest.approx(plain.value * factor)
    assert proxy.budget == pytest.approx(plain.budget * abs(factor))


@pytest.mark.slow
def test_sieve_and_ng_s(hecke_table, table_cache):
    policy = TruncationPolicy(c_max=100, mn_cap=20_000)
    chain = moment_chain(2, 3, 1.5, WEIGHT, policy, hecke_table)
    sieve = verify_sieve(2, 3, 1.5, WEIGHT, policy, hecke_table, rel_tol=0.05, chain=chain)
    ngs = verify_ng_s(2, 3, 1.5, WEIGHT, policy, hecke_table, rel_tol=0.05, chain=chain)
    assert sieve.passed, sieve
    assert ngs.passed, ngs

    # il residuo Ng-S e' il residuo del setaccio per un fattore esplicito
    sieve_lhs, sieve_rhs, _ = chain.sieve_sides()
    ngs_lhs, ngs_rhs, _ = chain.ngs_sides()
    predicted = chain.residual_ratio() * (sieve_lhs - sieve_rhs)
    assert abs((ngs_lhs - ngs_rhs) - predicted) <= 1e-9 * max(abs(ngs_lhs), abs(ngs_rhs))


RECIPROCITY_CASES = [(2, 3, 1.5), (3, 2, 1.5), (2, 3, 1.4 + 0.3j)]


@pytest.mark.slow
@pytest.mark.parametrize("p, q, s", RECIPROCITY_CASES)
def test_reciprocity_holds_and_sabotage_fails(full_hecke_table, table_cache, p, q, s):
    policy = TruncationPolicy()
    report = verify_reciprocity(p, q, s, GAUSS, policy, full_hecke_table, rel_tol=1e-3)
    sabotaged = verify_reciprocity(p, q, s, GAUSS, policy, full_hecke_table, rel_tol=1e-3, sabotage=True)
    assert report.passed, report
    assert not sabotaged.passed, sabotaged
    # il budget resta una frazione dell'identita'
    assert 3 * report.budget < 0.1 * report.scale
    assert sabotaged.lhs == report.lhs
    assert sabotaged.rhs / report.rhs == pytest.approx(p / q)
    assert report.contours["ladder_step"] == 0.5


def test_reciprocity_report_carries_contours(hecke_table, table_cache):
    grid = {"x_min": 1e-3, "x_max": 1e4, "points_per_decade": 100}
    report = verify_reciprocity(2, 3, 1.5, GAUSS, SMALL, hecke_table, phi_grid=grid, validate_samples=4)
    assert report.contours["xi"] == {"small": 8.0, "large": -12.0}
    assert set(report.params) >= {"p", "q", "s", "function", "sabotage", "c_max", "mn_cap"}
    assert math.isfinite(report.budget)


def test_s_sum_budget_covers_doubled_cutoffs(hecke_table, table_cache):
    short = s_sum(2, 3, 1.5, WEIGHT, SMALL, hecke_table)
    long = s_sum(2, 3, 1.5, WEIGHT, SMALL.doubled(), hecke_table)
    assert abs(long.value - short.value) <= short.budget
    assert short.budget < abs(short.value)
    assert short.components["halving"] <= short.budget


def test_linearity_in_the_weight(hecke_table, table_cache):
    second = weight_from_test_function(get_test_function("exp13"))
    report = verify_linearity(2, 3, 1.5, WEIGHT, second, 1.0, 0.5j, SMALL, hecke_table)
    assert report.passed, report


def test_dirichlet_lemma(hecke_table):
    report = verify_dirichlet_lemma(2, 3.0, 10_000, hecke_table)
    assert report.passed, report
    with pytest.raises(ValueError):
        verify_dirichlet_lemma(3, 3.0, 10_000, hecke_table)


@pytest.mark.slow
def test_dirichlet_lemma_in_the_complex_half_plane(full_hecke_table):
    M = full_hecke_table.n_max // 2
    report = verify_dirichlet_lemma(2, 1.5 + 0.5j, M, full_hecke_table, rel_tol=1e-4)
    assert report.passed, report
    assert report.rel_gap < 1e-4


def test_ramanujan_series_and_closed_form():
    series = ramanujan_dirichlet_series(12, 3, 2.0, 300)
    assert abs(series.value - eisenstein_closed_form(12, 3, 2.0)) <= series.budget
    assert verify_ramanujan(12, 3, 1.5 + 0.5j, 300).passed
    with pytest.raises(SeriesDiverges):
        ramanujan_dirichlet_series(12, 3, 1.0, 300)


def test_eisenstein_closed_form_at_one():
    # n = 1: sigma(1) = 1
    assert eisenstein_closed_form(1, 5, 2.0) == pytest.approx(1.0 / zeta_restricted(4.0, 5))
    # la parte di n divisibile per q non conta
    assert eisenstein_closed_form(5, 5, 2.0) == pytest.approx(eisenstein_closed_form(1, 5, 2.0))
    assert eisenstein_closed_form(2, 5, 2.0) == pytest.approx((1 + 2 ** -3) / zeta_restricted(4.0, 5))


def test_pair_table_is_shared_through_the_cache(hecke_table, table_cache):
    first = get_pair_table(hecke_table, 500, 1.5)
    assert get_pair_table(hecke_table, 500, 1.5) is first
    assert table_cache.current_bytes >= first.nbytes
    assert not math.isnan(first.W[0].real)

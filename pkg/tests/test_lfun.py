import pytest

from core.coeffs import build_hecke_table
from core.errors import ContinuationTail, DirectSeriesDiverges, NotCoprime
from core.lfun import (
    AdditiveTwist, DgParams, deligne_tail, dg, dg_brute_force, dg_fe_gap, dg_fe_sides, l_additive_continued,
    l_additive_direct, l_fe_gap, l_fe_sides,
)


def _rel(a, b):
    return abs(a - b) / max(abs(a), abs(b))


@pytest.mark.parametrize("s", [0.5, 0.3 + 2.0j])
def test_functional_equation_of_twisted_l(hecke_table, s):
    lhs, rhs = l_fe_sides(s, AdditiveTwist(numerator=1, modulus=5), hecke_table)
    assert _rel(lhs, rhs) < 1e-8
    assert l_fe_gap(s, AdditiveTwist(numerator=1, modulus=5), hecke_table) == pytest.approx(_rel(lhs, rhs))


def test_continuation_agrees_with_direct_series(hecke_table):
    tw = AdditiveTwist(numerator=2, modulus=7)
    direct = l_additive_direct(3.0, tw, hecke_table)
    continued = l_additive_continued(3.0, tw, hecke_table)
    assert direct.budget == pytest.approx(deligne_tail(hecke_table.n_max, 3.0))
    assert abs(direct.value - continued) <= direct.budget


def test_untwisted_l_at_large_s_is_close_to_one(hecke_table):
    # L(s, g) = 1 + lambda(2) 2^-s + ... per Re(s) grande
    value = l_additive_continued(8.0, AdditiveTwist(numerator=0, modulus=1), hecke_table)
    assert abs(value - 1.0) < 0.05


def test_direct_series_refuses_the_critical_strip(hecke_table):
    tw = AdditiveTwist(numerator=1, modulus=3)
    with pytest.raises(DirectSeriesDiverges):
        l_additive_direct(1.0, tw, hecke_table)
    with pytest.raises(ValueError):
        l_additive_direct(3.0, tw, hecke_table, M=hecke_table.n_max + 1)


def test_twist_must_be_reduced():
    with pytest.raises(NotCoprime):
        AdditiveTwist(numerator=2, modulus=4)
    with pytest.raises(NotCoprime):
        DgParams(a=2, b=1, modulus=4, s=2.0)
    assert AdditiveTwist(numerator=2, modulus=5).dual().numerator == 2  # -3 mod 5


def test_continuation_needs_enough_coefficients():
    small = build_hecke_table(12, 10)
    with pytest.raises(ContinuationTail):
        l_additive_continued(0.5, AdditiveTwist(numerator=1, modulus=50), small)


def test_dg_functional_equation(hecke_table):
    params = DgParams(a=1, b=1, modulus=5, s=0.5 + 1.0j)
    lhs, rhs = dg_fe_sides(params, hecke_table)
    assert _rel(lhs, rhs) < 1e-7
    assert dg_fe_gap(params, hecke_table) < 1e-7


def test_dg_matches_brute_force_double_series(hecke_table):
    params = DgParams(a=1, b=2, modulus=5, s=3.0)
    oracle = dg_brute_force(params, hecke_table, M=2000)
    continued = dg(params, hecke_table)
    assert continued.budget == 0.0
    assert abs(oracle.value - continued.value) <= oracle.budget + 1e-12


def test_dg_direct_evaluator_within_its_budget(hecke_table):
    params = DgParams(a=3, b=1, modulus=7, s=2.5)
    direct = dg(params, hecke_table, evaluator="direct")
    continued = dg(params, hecke_table)
    assert direct.provenance["residues"] == 6
    assert abs(direct.value - continued.value) <= direct.budget
    with pytest.raises(ValueError):
        dg(params, hecke_table, evaluator="mixed")

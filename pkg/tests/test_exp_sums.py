import math

import numpy as np
import pytest

from core.errors import ModulusNotAllowed, NotCoprime, RowTooLarge
from core.exp_sums import (
    INAPPLICABLE, CuspPairParams, LemmaClause, check_crt_multiplicativity, check_kloo_lemma,
    check_weil, kloosterman, kloosterman_cusp_pair, kloosterman_many, kloosterman_row,
    kloosterman_table, mod_inverse, ramanujan_sum, weil_bound,
)


def test_small_moduli_by_hand():
    assert kloosterman(5, 7, 1) == 1.0
    assert kloosterman(1, 1, 2) == pytest.approx(1.0)
    # d=1: e(2/3), d=2: e(4/3)
    assert kloosterman(1, 1, 3) == pytest.approx(-1.0, abs=1e-12)


def test_symmetry_and_reduction():
    for c in (7, 12, 25, 30):
        for a, b in ((1, 2), (3, 5), (-4, 9), (6, 10)):
            value = kloosterman(a, b, c)
            assert value == pytest.approx(kloosterman(b, a, c), abs=1e-9)
            assert value == pytest.approx(kloosterman(a + c, b - 2 * c, c), abs=1e-9)


def test_ramanujan_sum_is_kloosterman_with_zero():
    for c in (1, 4, 9, 12, 30):
        for n in (1, 2, 6, 12, 35):
            assert kloosterman(0, n, c) == pytest.approx(ramanujan_sum(n, c), abs=1e-9)
    assert ramanujan_sum(1, 6) == 1  # mu(6)
    assert ramanujan_sum(6, 6) == 2  # phi(6)


def test_row_and_table_agree_with_direct_sum(table_cache):
    c = 21
    row = kloosterman_row(c)
    table = kloosterman_table(c)
    for a in range(c):
        for b in (1, 2, 5, 7, 14):
            direct = kloosterman(a, b, c)
            assert table[a, b] == pytest.approx(direct, abs=1e-9)
            if math.gcd(a, c) == 1 or math.gcd(b, c) == 1:
                assert row.lookup(a, b) == pytest.approx(direct, abs=1e-9)


def test_row_lookup_needs_a_unit(table_cache):
    row = kloosterman_row(9)
    with pytest.raises(NotCoprime):
        row.lookup(3, 6)


def test_kloosterman_many_mixes_units_and_non_units(table_cache):
    c = 36
    a = np.array([1, 6, 9, 12, 5])
    b = np.array([4, 10, 3, 18, 7])
    expected = [kloosterman(int(x), int(y), c) for x, y in zip(a, b)]
    np.testing.assert_allclose(kloosterman_many(a, b, c), expected, atol=1e-9)


def test_table_over_byte_cap_is_refused(table_cache):
    table_cache.max_bytes = 1000
    with pytest.raises(RowTooLarge):
        kloosterman_table(50)


def test_mod_inverse():
    assert mod_inverse(3, 7) == 5
    assert mod_inverse(-3, 7) == 2
    assert mod_inverse(4, 1) == 0
    with pytest.raises(NotCoprime):
        mod_inverse(6, 9)


def test_weil_bound_holds():
    for c in range(1, 200):
        for m, n in ((1, 1), (2, 3), (6, 9), (12, 40)):
            assert check_weil(m, n, c).holds


@pytest.mark.slow
def test_weil_bound_over_random_pairs(table_cache):
    rng = np.random.default_rng(11)
    m = rng.integers(1, 10_000, 1000)
    n = rng.integers(1, 10_000, 1000)
    # moduli fino a 5000: primi, potenze, molto composti, piu' un campione casuale
    moduli = {1, 2, 4096, 3125, 2401, 2310, 2520, 4620, 4999, 5000}
    moduli.update(int(c) for c in rng.integers(1, 5001, 60))
    for c in sorted(moduli):
        values = kloosterman_many(m, n, c)
        bounds = np.array([weil_bound(int(a), int(b), c) for a, b in zip(m, n)])
        assert np.all(np.abs(values) <= bounds + 1e-6), c


def test_crt_multiplicativity():
    for c1, c2 in ((3, 4), (5, 9), (7, 16), (11, 12)):
        for a, b in ((1, 1), (2, -5), (12, 30)):
            assert check_crt_multiplicativity(a, b, c1, c2) < 1e-9
    with pytest.raises(NotCoprime):
        check_crt_multiplicativity(1, 1, 4, 6)


def test_lemma_clauses():
    for p in (2, 3, 5):
        for c in range(1, 40):
            for m in range(-4, 5):
                for n in range(-4, 5):
                    first, second, third = check_kloo_lemma(m, n, c, p)
                    exactly = c % p == 0 and (c // p) % p != 0
                    assert (first is INAPPLICABLE) is not exactly
                    for check in (first, second, third):
                        if check is not INAPPLICABLE:
                            assert check.gap < 1e-8 * max(1.0, abs(check.lhs))
                    assert third.clause is LemmaClause.SCALING


def test_cusp_pair_modulus_must_avoid_level():
    with pytest.raises(ModulusNotAllowed):
        CuspPairParams(level=3, modulus=6, m=1, n=1)
    assert kloosterman_cusp_pair(2, 5, 7, 3) == pytest.approx(kloosterman(mod_inverse(3, 7) * 2, 5, 7))

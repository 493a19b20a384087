from fractions import Fraction

import pytest

from selfsim.action import act_word, restrict_word
from selfsim.algebra import parse_element
from selfsim.counting import (
    BudgetExceeded,
    brute_force_counts,
    brute_force_counts_direct,
    count_F,
    count_G,
    counts,
    critical_limit_bounds,
    critical_value,
    critical_values,
    transfer_matrix,
)
from selfsim.mealy import basilica, grigorchuk, odometer
from selfsim.moore import nucleus

from conftest import random_products


def f_d(k):
    # |F_d^k| for Grigorchuk's d: 2^(k-1) + 2^(k-4) + ...
    return sum(2 ** (k - 1 - 3 * j) for j in range((k - 1) // 3 + 1))


@pytest.mark.parametrize("k", [4, 7, 10])
def test_grigorchuk_d_closed_form(k):
    d = parse_element("d", grigorchuk())
    assert count_F(d, k) == f_d(k)


def test_f_d_values():
    assert f_d(4) == 9 and f_d(10) == 585


def test_basilica_aba_closed_form():
    aba = parse_element("aba", basilica())
    for k in range(2, 9):
        assert count_F(aba, k) == 2 ** (k - 2)


def test_identity_fixes_everything():
    for backend in (basilica(), odometer(3)):
        n = backend.alphabet.size
        assert counts(backend.identity, 5) == (n**5, n**5)


def test_oracle_agreement_small(builtin):
    elems = nucleus(builtin).elements + random_products(builtin, 8, seed=2)
    kmax = 8 if builtin.alphabet.size == 2 else 4
    for g in elems:
        for k in range(kmax + 1):
            assert counts(g, k) == brute_force_counts(g, k)


def test_direct_oracle_agrees_with_table_oracle():
    G = grigorchuk()
    for text in ["d", "cadac", "ab", "bab"]:
        g = parse_element(text, G)
        for k in range(6):
            assert brute_force_counts(g, k) == brute_force_counts_direct(g, k)


def test_brute_force_budget():
    with pytest.raises(BudgetExceeded):
        brute_force_counts(parse_element("a", basilica()), 30)


def test_transfer_matrix_rows_bounded():
    tm = transfer_matrix(parse_element("cadac", grigorchuk()))
    assert all(s <= tm.alphabet_size for s in tm.row_sums())
    assert tm.matrix[tm.identity][tm.identity] == 2


@pytest.mark.parametrize(
    "text, value",
    [("a", 0), ("b", Fraction(1, 7)), ("c", Fraction(2, 7)), ("d", Fraction(4, 7)), ("cadac", Fraction(4, 7))],
)
def test_grigorchuk_critical_values(text, value):
    assert critical_value(parse_element(text, grigorchuk())) == value


@pytest.mark.parametrize(
    "text, value",
    [
        ("a", 0),
        ("b", Fraction(1, 2)),
        ("b^-1", Fraction(1, 2)),
        ("a b^-1", 0),
        ("b a^-1", 0),
        ("aba", Fraction(1, 4)),
        ("e", 1),
    ],
)
def test_basilica_critical_values(text, value):
    assert critical_value(parse_element(text, basilica())) == value


def test_critical_value_recursion(builtin):
    # c_g = |X|^-1 * sum over fixed letters x of c_{g|_x}
    n = builtin.alphabet.size
    for g in nucleus(builtin).elements + random_products(builtin, 10, seed=9):
        fixed = [x for x in range(n) if act_word(g, (x,)) == (x,)]
        total = sum((critical_value(restrict_word(g, (x,))) for x in fixed), Fraction(0))
        assert critical_value(g) == total / n


def test_critical_values_cover_closure():
    vals = critical_values(parse_element("d", grigorchuk()))
    assert {g.name: c for g, c in vals.values.items()} == {
        "d": Fraction(4, 7), "e": 1, "b": Fraction(1, 7), "a": 0, "c": Fraction(2, 7),
    }


def test_monotone_sandwich(builtin):
    n = builtin.alphabet.size
    kmax = 12 if n == 2 else 6
    for g in nucleus(builtin).elements + random_products(builtin, 5, seed=4):
        c = critical_value(g)
        prev_f = None
        for k in range(kmax + 1):
            f = count_F(g, k)
            if prev_f is not None:
                assert n * prev_f <= f
            prev_f = f
            lower, upper = critical_limit_bounds(g, k)
            assert lower <= c <= upper


def test_bounds_converge():
    d = parse_element("d", grigorchuk())
    lower, upper = critical_limit_bounds(d, 30)
    assert upper - lower < Fraction(1, 10**6)


def test_basilica_b_fixed_words():
    # b|_x = a moves every letter and b|_y = e, so only y-prefixed words survive
    b = parse_element("b", basilica())
    assert [count_G(b, k) for k in range(6)] == [1, 2, 2, 4, 8, 16]

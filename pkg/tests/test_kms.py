import random
from fractions import Fraction

import pytest

from selfsim.algebra import CuntzOnly, FormalCombination, expand_to_depth, multiply, parse_combination, parse_element, term
from selfsim.counting import critical_value
from selfsim.kms import (
    CriticalState,
    GibbsState,
    GroundState,
    NoKmsState,
    PerturbedState,
    characterization_check,
    check_trace_samples,
    critical_trace,
    dirac_trace,
    ground_check,
    kms_check,
    psi_value,
    recursion_check,
    sample_pairs,
    sample_terms,
    trivial_trace,
)
from selfsim.mealy import basilica, grigorchuk
from selfsim.moore import nucleus
from selfsim.zd import ZdAction

from conftest import random_products

RS = [Fraction(1, 3), Fraction(1, 4), Fraction(1, 5), Fraction(49, 100)]


def u_term(text, backend):
    return term((), parse_element(text, backend), ())


@pytest.mark.parametrize("r", RS)
def test_basilica_b_closed_forms(r):
    B = basilica()
    assert psi_value(r, dirac_trace(), u_term("b", B)) == r
    assert psi_value(r, trivial_trace(), u_term("b", B)) == 1 - 2 * r * r


def test_closed_forms_approach_critical_value():
    B = basilica()
    c_b = critical_value(parse_element("b", B))
    r = Fraction(1, 2) - Fraction(1, 10**6)
    for tr in (dirac_trace(), trivial_trace()):
        assert abs(psi_value(r, tr, u_term("b", B)) - c_b) < Fraction(1, 10**5)


def test_states_are_normalised(builtin):
    r = Fraction(1, builtin.alphabet.size + 1)
    unit = term((), builtin.identity, ())
    for tr in (dirac_trace(), trivial_trace(), critical_trace()):
        assert psi_value(r, tr, unit) == 1
    assert CriticalState(builtin)(unit) == 1


def test_critical_trace_is_a_fixed_point(builtin):
    # c is an eigenvector of the stationary matrix, so every psi_{r,c} is c
    r = Fraction(1, 2 * builtin.alphabet.size)
    for g in random_products(builtin, 10, seed=8):
        assert psi_value(r, critical_trace(), term((), g, ())) == critical_value(g)


def test_traces_are_central(builtin):
    elems = random_products(builtin, 12, seed=1)
    pairs = list(zip(elems, reversed(elems)))
    for tr in (dirac_trace(), trivial_trace(), critical_trace()):
        assert check_trace_samples(tr, pairs) == []


def test_off_diagonal_terms_vanish():
    B = basilica()
    a = parse_element("a", B)
    assert psi_value(Fraction(1, 3), trivial_trace(), term((0,), a, (1,))) == 0
    assert CriticalState(B)(term((0,), a, (1,))) == 0


def test_characterization(builtin):
    rng = random.Random(0)
    r = Fraction(1, builtin.alphabet.size + 2)
    terms = sample_terms(builtin, 50, rng)
    for tr in (dirac_trace(), trivial_trace()):
        assert characterization_check(GibbsState(r, tr), r, terms).ok
    crit = CriticalState(builtin)
    assert characterization_check(crit, crit.r, terms).ok


def test_recursion(builtin):
    r = Fraction(1, builtin.alphabet.size + 1)
    elems = random_products(builtin, 15, seed=6)
    for tr in (dirac_trace(), trivial_trace(), critical_trace()):
        assert recursion_check(r, tr, elems).ok


def test_kms_condition(builtin):
    rng = random.Random(3)
    r = Fraction(2, 5 * builtin.alphabet.size)
    pairs = sample_pairs(builtin, 60, rng)
    for tr in (dirac_trace(), trivial_trace()):
        report = kms_check(GibbsState(r, tr), r, pairs)
        assert report.ok, report.failures[:2]
    crit = CriticalState(builtin)
    assert kms_check(crit, crit.r, pairs).ok


def test_kms_fails_at_wrong_r():
    B = basilica()
    state = GibbsState(Fraction(1, 3), dirac_trace())
    pairs = [(term((0,), B.identity, ()), term((), B.identity, (0,)))]
    assert not kms_check(state, Fraction(1, 4), pairs).ok


def test_perturbed_state_is_caught():
    B = basilica()
    r = Fraction(1, 3)
    bad = PerturbedState(GibbsState(r, dirac_trace()), term((), B.identity, ()), Fraction(1, 10))
    x = term((0,), B.identity, ())
    x_star = term((), B.identity, (0,))
    assert not kms_check(bad, r, [(x, x_star)]).ok


def test_no_state_outside_range():
    B = basilica()
    for r in (Fraction(1, 2), Fraction(3, 4), Fraction(0), Fraction(-1, 3)):
        with pytest.raises(NoKmsState):
            psi_value(r, dirac_trace(), u_term("b", B))


def test_gibbs_state_rejects_cuntz_rewrites():
    B = basilica()
    a = expand_to_depth(parse_combination("u[b]", B), 1)
    with pytest.raises(CuntzOnly):
        GibbsState(Fraction(1, 3), dirac_trace())(a)


def test_critical_state_respects_cuntz_relation(builtin):
    crit = CriticalState(builtin)
    for g in random_products(builtin, 8, seed=12):
        a = FormalCombination.of(term((0,), g, (0,)))
        for n in (1, 2):
            assert crit(expand_to_depth(a, n)) == crit(a)


def test_grigorchuk_critical_state_values():
    G = grigorchuk()
    crit = CriticalState(G)
    assert crit(parse_combination("u[cadac]", G)) == Fraction(4, 7)
    assert crit(parse_combination("s[x] u[d] s*[x]", G)) == Fraction(2, 7)
    assert crit(parse_combination("s[x] u[e] s*[x]", G)) == Fraction(1, 2)


def test_ground_state(builtin):
    rng = random.Random(4)
    terms = sample_terms(builtin, 40, rng)
    for tr in (dirac_trace(), trivial_trace()):
        assert ground_check(GroundState(tr), terms).ok


def test_ground_is_low_temperature_limit():
    B = basilica()
    r = Fraction(1, 1000)
    for tr in (dirac_trace(), trivial_trace()):
        ground = GroundState(tr)
        for g in random_products(B, 10, seed=2):
            t = term((), g, ())
            assert abs(psi_value(r, tr, t) - ground(t)) <= Fraction(1, 100)


def test_zd_critical_state():
    Z = ZdAction([[2, 0], [0, 2]])
    crit = CriticalState(Z)
    assert crit(parse_combination("u[(1,0)]", Z)) == 0
    assert crit(parse_combination("s[(1,0)] s*[(1,0)]", Z)) == Fraction(1, 4)


def test_trivial_trace_convergence_report(capsys):
    # reported, not asserted: psi_{r,tau_1} approaches c_g as r -> 1/|X|
    B = basilica()
    rows = []
    for text in ["a", "b", "aba", "a b^-1"]:
        g = parse_element(text, B)
        near = psi_value(Fraction(1, 2) - Fraction(1, 1000), trivial_trace(), term((), g, ()))
        rows.append((text, float(near), float(critical_value(g))))
    for row in rows:
        print("tau_1 near critical: %-6s psi=%.6f c=%.6f" % row)
    assert all(0 <= near <= 1 for _, near, _ in rows)


def test_sampled_pairs_are_not_vacuous(builtin):
    rng = random.Random(11)
    r = Fraction(1, builtin.alphabet.size + 1)
    state = GibbsState(r, dirac_trace())
    pairs = sample_pairs(builtin, 90, rng)
    nonzero = sum(
        1 for a, b in pairs if state(multiply(FormalCombination.of(a), FormalCombination.of(b))) != 0
    )
    assert nonzero >= len(pairs) // 4


def test_worked_examples():
    B, G = basilica(), grigorchuk()
    r = Fraction(1, 3)
    for v in [(), (0,), (1, 0), (0, 0, 1)]:
        assert psi_value(r, trivial_trace(), term(v, B.identity, v)) == r ** len(v)
    # d fixes x with d|_x = e and y with d|_y = b
    d_val = psi_value(r, dirac_trace(), u_term("d", G))
    assert d_val == r * psi_value(r, dirac_trace(), u_term("b", G)) + r
    Z = ZdAction([[2, 0], [0, 2]])
    n = Z.vector((1, 0))
    for tr in (dirac_trace(), trivial_trace()):
        assert psi_value(Fraction(1, 5), tr, term((), n, ())) == (1 - 4 * Fraction(1, 5)) * tr(n)
    assert CriticalState(B)(u_term("aba", B)) == Fraction(1, 4)


def test_ground_state_is_not_kms_at_finite_r():
    B = basilica()
    x = term((0,), B.identity, ())
    x_star = term((), B.identity, (0,))
    assert not kms_check(GroundState(dirac_trace()), Fraction(1, 3), [(x_star, x)]).ok


def test_zero_degree_pairs_reduce_to_trace_property(builtin):
    elems = random_products(builtin, 10, seed=31)
    r = Fraction(1, builtin.alphabet.size + 1)
    state = GibbsState(r, trivial_trace())
    pairs = [(term((), g, ()), term((), h, ())) for g, h in zip(elems, reversed(elems))]
    assert kms_check(state, r, pairs).ok


def test_perturbation_at_u_b_detected():
    G = grigorchuk()
    r = Fraction(1, 3)
    target = u_term("b", G)
    bad = PerturbedState(GibbsState(r, trivial_trace()), target, Fraction(1, 1000))
    assert not characterization_check(bad, r, [term((0,), target.g, (0,))]).ok


def test_limit_is_monotone_within_sandwich(builtin):
    n = builtin.alphabet.size
    for g in nucleus(builtin).elements + random_products(builtin, 5, seed=41):
        c = critical_value(g)
        values = [
            psi_value(Fraction(1, n) - Fraction(1, m), dirac_trace(), term((), g, ()))
            for m in range(8, 65, 8)
        ]
        assert values == sorted(values)
        assert all(v <= c for v in values)
        assert c - values[-1] <= c - values[0]


def test_critical_values_are_a_trace(builtin):
    elems = nucleus(builtin).elements
    products = [g * h for g in elems for h in elems]
    rng = random.Random(50)
    for _ in range(50):
        g, h = rng.choice(products), rng.choice(products)
        assert critical_value(g * h) == critical_value(h * g)


def test_threaded_checker_matches_serial():
    B = basilica()
    rng = random.Random(9)
    pairs = sample_pairs(B, 60, rng)
    r = Fraction(1, 4)
    serial = kms_check(GibbsState(r, trivial_trace()), r, pairs)
    threaded = kms_check(GibbsState(r, trivial_trace()), r, pairs, jobs=4)
    assert (serial.checked, serial.failures) == (threaded.checked, threaded.failures)

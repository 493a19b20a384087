from fractions import Fraction

import pytest

from selfsim.action import (
    Alphabet,
    AlphabetError,
    BackendMismatch,
    Overflow,
    act_and_restrict,
    act_word,
    canonical,
    check_bijective,
    element_graph,
    exact_equal,
    is_trivial,
    level_permutation,
    portrait_fingerprint,
    restrict_word,
    restriction_closure,
)
from selfsim.algebra import parse_element
from selfsim.mealy import basilica, grigorchuk, odometer

from conftest import random_products


def words_up_to(alphabet, n):
    for k in range(n + 1):
        yield from alphabet.words(k)


def test_alphabet_roundtrip():
    alpha = Alphabet(["x", "y"])
    assert alpha.parse_word("xyyx") == (0, 1, 1, 0)
    assert alpha.format_word((1, 0)) == "yx"
    with pytest.raises(AlphabetError):
        alpha.parse_word("xz")
    with pytest.raises(AlphabetError):
        Alphabet(["x", "x"])


def test_multichar_letters_parse_greedily():
    alpha = Alphabet(["1", "10", "0"])
    assert alpha.parse_word("101") == (1, 0)


def test_basilica_first_level():
    B = basilica()
    a, b = parse_element("a", B), parse_element("b", B)
    assert act_and_restrict(a, (0,)) == ((1,), b)
    assert act_and_restrict(a, (1,)) == ((0,), B.identity)
    assert act_and_restrict(b, (0,)) == ((0,), a)


def test_odometer_adds_one():
    G = odometer(4)
    g = parse_element("g", G)
    # 3 3 1 (least significant first) is 3 + 12 + 16 = 31; adding one gives 32 = 0 0 2
    assert act_word(g, (3, 3, 1)) == (0, 0, 2)
    assert is_trivial(restrict_word(g, (3, 3, 1)))


def test_product_acts_right_to_left():
    B = basilica()
    a, b = parse_element("a", B), parse_element("b", B)
    for v in words_up_to(B.alphabet, 4):
        assert act_word(a * b, v) == act_word(a, act_word(b, v))


def test_cocycle_and_inverse_laws(builtin):
    elems = random_products(builtin, 15, seed=3)
    for g, h in zip(elems, elems[1:]):
        for v in words_up_to(builtin.alphabet, 3):
            image, r = act_and_restrict(g * h, v)
            assert image == act_word(g, act_word(h, v))
            expected = restrict_word(g, act_word(h, v)) * restrict_word(h, v)
            assert exact_equal(r, expected)
            assert act_word(g.inverse(), act_word(g, v)) == v


def test_restriction_of_concatenation():
    G = grigorchuk()
    g = parse_element("cadab", G)
    for v in words_up_to(G.alphabet, 2):
        for w in words_up_to(G.alphabet, 2):
            lhs = restrict_word(g, v + w)
            rhs = restrict_word(restrict_word(g, v), w)
            assert exact_equal(lhs, rhs)


def test_grigorchuk_relations_hold():
    G = grigorchuk()
    e = G.identity
    for s in "abcd":
        assert exact_equal(parse_element(s + s, G), e)
    assert exact_equal(parse_element("cd", G), parse_element("b", G))
    assert exact_equal(parse_element("db", G), parse_element("c", G))
    assert exact_equal(parse_element("bc", G), parse_element("d", G))


def test_basilica_does_not_commute():
    B = basilica()
    assert not exact_equal(parse_element("ab", B), parse_element("ba", B))
    assert not is_trivial(parse_element("a b a^-1 b^-1", B))


def test_free_reduction_is_syntactic():
    B = basilica()
    assert parse_element("a a^-1 b", B) == parse_element("b", B)
    # b^2 is not e syntactically, and not semantically either
    assert not is_trivial(parse_element("bb", B))


def test_equal_elements_share_fingerprint():
    G = grigorchuk()
    assert portrait_fingerprint(parse_element("cd", G)) == portrait_fingerprint(parse_element("b", G))
    assert portrait_fingerprint(parse_element("a", G)) != portrait_fingerprint(parse_element("b", G))


def test_level_permutation():
    G = odometer(4)
    assert level_permutation(parse_element("g", G)) == (1, 2, 3, 0)
    assert level_permutation(G.identity) == (0, 1, 2, 3)


def test_canonical_prefers_identity():
    G = grigorchuk()
    # ab has order 16
    assert canonical(parse_element("ab" * 16, G)).factors == ()
    assert canonical(parse_element("ab" * 8, G)).factors != ()


def test_element_graph_quotient():
    G = grigorchuk()
    graph = element_graph([parse_element("d", G)])
    assert sorted(v.name for v in graph.vertices) == ["a", "b", "c", "d", "e"]
    assert graph.vertices[graph.identity].factors == ()


def test_backend_mismatch():
    with pytest.raises(BackendMismatch):
        parse_element("a", basilica()) * parse_element("a", grigorchuk())


def test_overflow_reports_partial():
    # b's closure is small, but a tiny cap still trips
    B = basilica()
    with pytest.raises(Overflow) as info:
        element_graph([parse_element("ab ab ab", B)], max_elems=2)
    assert info.value.partial


def test_check_bijective(builtin):
    for g in random_products(builtin, 5, seed=11):
        assert check_bijective(g, 3)


def test_invalid_word_rejected():
    with pytest.raises(AlphabetError):
        act_word(parse_element("a", basilica()), (5,))


def test_worked_examples():
    B, G, O = basilica(), grigorchuk(), odometer(4)
    assert act_word(parse_element("a", B), B.alphabet.parse_word("xy")) == B.alphabet.parse_word("yy")
    assert act_word(parse_element("g", O), O.alphabet.parse_word("33")) == O.alphabet.parse_word("00")
    assert is_trivial(restrict_word(parse_element("d", G), (0,)))
    assert exact_equal(restrict_word(parse_element("aba", B), (0,)), parse_element("b", B))
    g = parse_element("cadac", G)
    assert restrict_word(g, ()) == g


def test_restriction_closures():
    B, O = basilica(), odometer(4)
    assert sorted(h.name for h in restriction_closure(parse_element("aba", B))) == ["a", "aba", "b", "ba", "e"]
    assert sorted(h.name for h in restriction_closure(parse_element("g", O))) == ["e", "g"]
    assert [h.name for h in restriction_closure(B.identity)] == ["e"]


def test_fingerprint_depths():
    B = basilica()
    a = parse_element("a", B)
    assert portrait_fingerprint(a, 0) == portrait_fingerprint(B.identity, 0)
    assert portrait_fingerprint(a, 1) != portrait_fingerprint(B.identity, 1)


def test_inverse_rule(builtin):
    for g in random_products(builtin, 8, seed=21):
        for v in words_up_to(builtin.alphabet, 3):
            lhs = restrict_word(g, v).inverse()
            rhs = restrict_word(g.inverse(), act_word(g, v))
            assert exact_equal(lhs, rhs)


def test_levels_are_permuted(builtin):
    n_max = 6 if builtin.alphabet.size == 2 else 4
    for g in random_products(builtin, 4, seed=5):
        for n in range(n_max + 1):
            images = {act_word(g, v) for v in builtin.alphabet.words(n)}
            assert len(images) == builtin.alphabet.size**n


def test_fingerprint_soundness(builtin):
    elems = random_products(builtin, 20, seed=17, max_factors=4)
    for g in elems:
        for h in elems:
            if exact_equal(g, h):
                assert portrait_fingerprint(g, 6) == portrait_fingerprint(h, 6)

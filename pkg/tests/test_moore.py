from pathlib import Path

import pytest

from selfsim.action import exact_equal
from selfsim.algebra import parse_element
from selfsim.mealy import basilica, grigorchuk, odometer
from selfsim.moore import (
    INCONCLUSIVE,
    build_diagram,
    cycle_reachable,
    dot_export,
    nucleus,
    stationary_subgraph,
)

GOLDEN = Path(__file__).parent / "golden"


def names(elements):
    return [g.name for g in elements]


def same_set(found, expected):
    return len(found) == len(expected) and all(
        any(exact_equal(g, h) for h in found) for g in expected
    )


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_odometer_nucleus(n):
    G = odometer(n)
    result = nucleus(G)
    assert result.verified
    assert names(result.elements) == ["e", "g", "g^-1"]
    assert result.max_depth <= 4


def test_basilica_nucleus():
    B = basilica()
    result = nucleus(B)
    expected = [parse_element(t, B) for t in ["e", "a", "a^-1", "b", "b^-1", "a b^-1", "b a^-1"]]
    assert result.verified
    assert same_set(result.elements, expected)
    assert result.max_depth <= 4


def test_grigorchuk_nucleus():
    G = grigorchuk()
    result = nucleus(G)
    assert result.verified
    assert names(result.elements) == ["e", "a", "b", "c", "d"]


def test_certificate_covers_all_pairs():
    result = nucleus(basilica())
    assert len(result.certificate) == 49


def test_nucleus_is_restriction_closed():
    for backend in (basilica(), grigorchuk(), odometer(3)):
        elems = nucleus(backend).elements
        d = build_diagram(elems)
        assert len(d.vertices) == len(elems)


def test_cap_gives_inconclusive():
    result = nucleus(basilica(), max_elems=3)
    assert result.status == INCONCLUSIVE
    assert not result.verified


def test_cycle_reachable_drops_transients():
    G = grigorchuk()
    d = build_diagram([parse_element("ab", G)])
    kept = names(cycle_reachable(d))
    assert "e" in kept and "ab" not in kept


def test_empty_diagram_is_identity():
    d = build_diagram([], backend=basilica())
    assert d.names == ["e"]
    assert len(d.edges) == 2


def test_edge_counts():
    assert len(build_diagram(nucleus(grigorchuk()).elements).edges) == 10
    # three vertices, four letters each
    assert len(build_diagram(nucleus(odometer(4)).elements).edges) == 12


def test_grigorchuk_stationary_edges():
    d = stationary_subgraph(build_diagram(nucleus(grigorchuk()).elements))
    edges = {(d.vertices[s].name, d.vertices[t].name, x) for s, x, _, t in d.edges}
    assert edges == {
        ("e", "e", 0), ("e", "e", 1),
        ("d", "e", 0), ("d", "b", 1),
        ("b", "a", 0), ("b", "c", 1),
        ("c", "a", 0), ("c", "d", 1),
    }


@pytest.mark.parametrize(
    "name, factory",
    [("grigorchuk", grigorchuk), ("basilica", basilica), ("odometer4", lambda: odometer(4))],
)
def test_dot_golden(name, factory):
    d = build_diagram(nucleus(factory()).elements)
    assert dot_export(d) == (GOLDEN / f"{name}.dot").read_text()
    assert dot_export(d, highlight_stationary=True) == (GOLDEN / f"{name}_stationary.dot").read_text()


def test_highlight_bolds_stationary_only():
    d = build_diagram(nucleus(grigorchuk()).elements)
    text = dot_export(d, highlight_stationary=True)
    assert text.count("style=bold") == 8
    assert 'a -> e [label="(x,y)"];' in text


def test_dot_is_deterministic():
    first = dot_export(build_diagram(nucleus(basilica()).elements))
    second = dot_export(build_diagram(nucleus(basilica()).elements))
    assert first == second

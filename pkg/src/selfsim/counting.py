"""Counting fixed words and computing the critical values ``c_g``.

``G_g^k`` is the set of words of length ``k`` fixed by ``g`` and
``F_g^k`` the subset along which ``g`` also restricts to ``e``.  Both
are counted as stationary paths (edges labelled ``(x, x)``) in the
Moore diagram of the restriction closure of ``g``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from selfsim import kernels, linalg
from selfsim.action import (
    DEFAULT_MAX_ELEMS,
    GroupElement,
    RestrictionTable,
    SelfSimError,
    act_and_restrict,
    element_graph,
    is_trivial,
)

LINEAR_SOLVE = "LinearSolve"
LIMIT_BOUND = "LimitBound"
DEFAULT_BUDGET = 10**6


class BudgetExceeded(SelfSimError):
    pass


@dataclass(frozen=True)
class TransferMatrix:
    """``matrix[i][j]`` counts letters ``x`` with ``h_i.x = x`` and ``h_i|_x = h_j``."""

    index: tuple
    matrix: tuple
    start: int
    identity: int | None
    alphabet_size: int

    def row_sums(self):
        return [sum(row) for row in self.matrix]


def _stationary_matrix(graph):
    n = len(graph.vertices)
    a = [[0] * n for _ in range(n)]
    for i in range(n):
        for x, (y, t) in enumerate(zip(graph.out[i], graph.to[i])):
            if x == y:
                a[i][t] += 1
    return a


def transfer_matrix(g: GroupElement, max_elems=DEFAULT_MAX_ELEMS) -> TransferMatrix:
    graph = element_graph([g], max_elems=max_elems)
    a = _stationary_matrix(graph)
    return TransferMatrix(
        index=graph.vertices,
        matrix=tuple(tuple(r) for r in a),
        start=graph.roots[0],
        identity=graph.identity,
        alphabet_size=g.backend.alphabet.size,
    )


def _start_row_power(tm: TransferMatrix, k: int):
    if k < 0:
        raise ValueError("k must be non-negative")
    power = linalg.matpow([list(r) for r in tm.matrix], k)
    return power[tm.start]


def count_G(g: GroupElement, k: int) -> int:
    """``|G_g^k|``: words of length ``k`` fixed by ``g``."""
    tm = transfer_matrix(g)
    return sum(_start_row_power(tm, k))


def count_F(g: GroupElement, k: int) -> int:
    """``|F_g^k|``: fixed words of length ``k`` along which ``g`` restricts to ``e``."""
    tm = transfer_matrix(g)
    if tm.identity is None:
        return 0
    return _start_row_power(tm, k)[tm.identity]


def counts(g: GroupElement, k: int) -> tuple:
    tm = transfer_matrix(g)
    row = _start_row_power(tm, k)
    return sum(row), (0 if tm.identity is None else row[tm.identity])


def brute_force_counts(g: GroupElement, k: int, budget: int = DEFAULT_BUDGET) -> tuple:
    """Enumerate ``X^k`` and return ``(|G_g^k|, |F_g^k|)``.

    Walks the raw restriction table of ``g`` (no quotient, no path
    counting); a word counts for ``F`` when the restriction reached is
    trivial as decided by machine minimisation.
    """
    size = g.backend.alphabet.size
    if k < 0:
        raise ValueError("k must be non-negative")
    if size**k > budget:
        raise BudgetExceeded(f"|X|^k = {size}^{k} exceeds the enumeration budget {budget}")
    table = RestrictionTable(g.backend, [g])
    labels = table.labels()
    accept = [int(lab == labels[0]) for lab in labels]
    return kernels.brute_force_fixed(table.out, table.to, table.index[g.factors], k, accept)


def brute_force_counts_direct(g: GroupElement, k: int, budget: int = 10**4) -> tuple:
    """Slow reference: act on every word with :func:`act_and_restrict`."""
    alphabet = g.backend.alphabet
    if alphabet.size**k > budget:
        raise BudgetExceeded("direct enumeration budget exceeded")
    fixed = trivial = 0
    for v in alphabet.words(k):
        image, r = act_and_restrict(g, v)
        if image == v:
            fixed += 1
            if is_trivial(r):
                trivial += 1
    return fixed, trivial


@dataclass(frozen=True)
class CriticalValues:
    values: dict  # vertex element -> Fraction
    method: str

    def __getitem__(self, g):
        return self.values[g]


def _reaching(n, a, target):
    """Vertices with a stationary path to ``target``."""
    rev = [[] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if a[i][j]:
                rev[j].append(i)
    seen = {target}
    stack = [target]
    while stack:
        j = stack.pop()
        for i in rev[j]:
            if i not in seen:
                seen.add(i)
                stack.append(i)
    return seen


def critical_values_of_graph(graph) -> list:
    """``c`` for every vertex of a restriction-closed graph, as absorption
    probabilities at ``e`` of the walk taking each stationary edge with
    probability ``1/|X|``."""
    n = len(graph.vertices)
    size = graph.backend.alphabet.size
    values = [Fraction(0)] * n
    e = graph.identity
    if e is None:
        return values
    a = _stationary_matrix(graph)
    values[e] = Fraction(1)
    live = sorted(_reaching(n, a, e) - {e})
    if not live:
        return values
    m = [[Fraction(int(i == j)) - Fraction(a[u][v], size) for j, v in enumerate(live)] for i, u in enumerate(live)]
    rhs = [Fraction(a[u][e], size) for u in live]
    for u, c in zip(live, linalg.solve(m, rhs)):
        values[u] = c
    return values


def critical_values(g: GroupElement, max_elems=DEFAULT_MAX_ELEMS) -> CriticalValues:
    graph = element_graph([g], max_elems=max_elems)
    vals = critical_values_of_graph(graph)
    return CriticalValues(dict(zip(graph.vertices, vals)), LINEAR_SOLVE)


def critical_value(g: GroupElement, max_elems=DEFAULT_MAX_ELEMS) -> Fraction:
    """``c_g = lim |X|^-k |F_g^k|`` exactly; ``c_e = 1``."""
    graph = element_graph([g], max_elems=max_elems)
    return critical_values_of_graph(graph)[graph.roots[0]]


def critical_limit_bounds(g: GroupElement, k_max: int) -> tuple:
    """``(|X|^-k |F_g^k|, |X|^-k |G_g^k|)`` at ``k = k_max``; they bracket ``c_g``."""
    fixed, trivial = counts(g, k_max)
    scale = Fraction(1, g.backend.alphabet.size**k_max)
    return trivial * scale, fixed * scale

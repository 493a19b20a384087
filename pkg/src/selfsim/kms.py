"""Traces, KMS states and checks of the KMS condition.

Inverse temperature enters only through ``r = e^{-beta}``, kept as an
exact rational.  Gibbs states exist for ``0 < r < 1/|X|``; the critical
state lives at ``r = 1/|X|``; ground states are the ``r -> 0`` end.
"""
from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from selfsim import linalg
from selfsim.action import (
    ActionBackend,
    GroupElement,
    SelfSimError,
    element_graph,
    is_trivial,
    act_and_restrict,
    act_word,
    compose,
    invert,
    restrict_word,
)
from selfsim.algebra import (
    CuntzOnly,
    FormalCombination,
    SpanningTerm,
    multiply,
    term,
)
from selfsim.counting import _stationary_matrix, critical_value

DIRAC = "Dirac"
TRIVIAL = "Trivial"
CRITICAL = "Critical"
USER = "UserSupplied"


class NoKmsState(SelfSimError, ValueError):
    """No KMS state exists at the requested inverse temperature."""


@dataclass(frozen=True)
class Trace:
    """Normalised rational-valued trace on the group."""

    name: str
    evaluate: Callable[[GroupElement], Fraction]
    kind: str = USER

    def __call__(self, g: GroupElement) -> Fraction:
        return Fraction(self.evaluate(g))


def dirac_trace() -> Trace:
    return Trace("tau_e", lambda g: Fraction(int(is_trivial(g))), DIRAC)


def trivial_trace() -> Trace:
    return Trace("tau_1", lambda g: Fraction(1), TRIVIAL)


def critical_trace() -> Trace:
    return Trace("critical", critical_value, CRITICAL)


def user_trace(name: str, fn: Callable) -> Trace:
    return Trace(name, fn, USER)


def check_trace_samples(trace: Trace, pairs) -> list:
    """Pairs ``(g, h)`` where ``trace(gh) != trace(hg)`` or ``trace(e) != 1``."""
    bad = []
    for g, h in pairs:
        if trace(g.backend.identity) != 1:
            bad.append((g.backend.identity, g.backend.identity))
            break
        if trace(g * h) != trace(h * g):
            bad.append((g, h))
    return bad


def _check_r(backend: ActionBackend, r) -> Fraction:
    r = Fraction(r)
    size = backend.alphabet.size
    if r <= 0:
        raise NoKmsState(f"r = {r} must be positive")
    if r >= Fraction(1, size):
        raise NoKmsState(
            f"r = {r} is not below 1/|X| = 1/{size}: there are no KMS states for "
            f"inverse temperatures below log|X|, and the critical one is handled by "
            f"critical_value_state"
        )
    return r


def _psi_on_group(backend, r: Fraction, trace: Trace, g: GroupElement, cache: dict | None = None) -> Fraction:
    graph = element_graph([g])
    key = (id(trace), r, graph.vertices[graph.roots[0]].factors)
    if cache is not None and key in cache:
        return cache[key]
    a = _stationary_matrix(graph)
    n = len(graph.vertices)
    m = [[Fraction(int(i == j)) - r * a[i][j] for j in range(n)] for i in range(n)]
    t = [trace(h) for h in graph.vertices]
    sol = linalg.solve(m, t)
    factor = 1 - backend.alphabet.size * r
    value = factor * sol[graph.roots[0]]
    if cache is not None:
        for i, h in enumerate(graph.vertices):
            cache[(id(trace), r, h.factors)] = factor * sol[i]
    return value


def psi_value(r, trace: Trace, t: SpanningTerm, cache: dict | None = None) -> Fraction:
    """Value of the Gibbs state at ``r`` built from ``trace`` on one spanning term.

    ``(1 - |X| r) r^|v| [(I - rA)^-1 tau]_g`` when ``v = w``, else 0, where
    ``A`` is the stationary transfer matrix on the closure of ``g``.
    """
    backend = t.g.backend
    r = _check_r(backend, r)
    if t.v != t.w:
        return Fraction(0)
    return r ** len(t.v) * _psi_on_group(backend, r, trace, t.g, cache)


def critical_value_state(t: SpanningTerm) -> Fraction:
    """``|X|^-|v| c_g`` when ``v = w``, else 0."""
    if t.v != t.w:
        return Fraction(0)
    return Fraction(1, t.g.backend.alphabet.size ** len(t.v)) * critical_value(t.g)


def ground_value(omega: Callable, t: SpanningTerm) -> Fraction:
    """``omega(g)`` on ``u_g`` (``v = w = empty``), 0 on every other term."""
    if t.v or t.w:
        return Fraction(0)
    return Fraction(omega(t.g))


class State:
    """Linear functional on formal combinations, defined on spanning terms."""

    #: the ``r`` at which the state is meant to satisfy the KMS condition
    r: Fraction | None = None
    toeplitz_only = True

    def on_term(self, t: SpanningTerm) -> Fraction:
        raise NotImplementedError

    def __call__(self, a) -> Fraction:
        if isinstance(a, SpanningTerm):
            return self.on_term(a)
        if a.cuntz and self.toeplitz_only:
            raise CuntzOnly("this state is not defined on the Cuntz-Pimsner quotient")
        return sum((c * self.on_term(t) for t, c in a.items()), Fraction(0))


class GibbsState(State):
    def __init__(self, r, trace: Trace):
        self.r = Fraction(r)
        self.trace = trace
        self._cache: dict = {}

    def on_term(self, t):
        return psi_value(self.r, self.trace, t, self._cache)

    def __repr__(self):
        return f"GibbsState(r={self.r}, trace={self.trace.name})"


class CriticalState(State):
    toeplitz_only = False

    def __init__(self, backend: ActionBackend):
        self.backend = backend
        self.r = Fraction(1, backend.alphabet.size)

    def on_term(self, t):
        return critical_value_state(t)

    def __repr__(self):
        return "CriticalState()"


class GroundState(State):
    def __init__(self, omega: Callable, name: str = "omega"):
        self.omega = omega
        self.name = name

    def on_term(self, t):
        return ground_value(self.omega, t)

    def __repr__(self):
        return f"GroundState({self.name})"


class PerturbedState(State):
    """Wraps a state and shifts its value on a single term (negative control)."""

    def __init__(self, inner: State, target: SpanningTerm, delta):
        self.inner = inner
        self.target = target
        self.delta = Fraction(delta)
        self.r = inner.r
        self.toeplitz_only = inner.toeplitz_only

    def on_term(self, t):
        value = self.inner.on_term(t)
        return value + self.delta if t == self.target else value


@dataclass
class CheckReport:
    name: str
    checked: int = 0
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> int:
        return self.checked - len(self.failures)

    @property
    def ok(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        return f"{self.name}: {self.passed}/{self.checked} passed"


def _run(check, items, jobs):
    # results come back in input order whatever the thread count
    if jobs > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(check, items))
    return [check(item) for item in items]


def kms_check(state: State, r, pairs, jobs: int = 1) -> CheckReport:
    """Check ``phi(ab) = r^{|v|-|w|} phi(ba)`` for spanning terms ``a = s_v u_g s_w*``."""
    r = Fraction(r)

    def one(pair):
        a, b = pair
        lhs = state(multiply(FormalCombination.of(a), FormalCombination.of(b)))
        rhs = r ** a.degree * state(multiply(FormalCombination.of(b), FormalCombination.of(a)))
        return None if lhs == rhs else {"a": str(a), "b": str(b), "lhs": lhs, "rhs": rhs}

    pairs = list(pairs)
    results = _run(one, pairs, jobs)
    return CheckReport("kms", len(pairs), [f for f in results if f is not None])


def characterization_check(state: State, r, terms, jobs: int = 1) -> CheckReport:
    """``phi(s_v u_g s_w*)`` is 0 off the diagonal and ``r^|v| phi(u_g)`` on it."""
    r = Fraction(r)

    def one(t):
        value = state(t)
        if t.v != t.w:
            expected = Fraction(0)
        else:
            expected = r ** len(t.v) * state(term((), t.g, ()))
        return None if value == expected else {"term": str(t), "value": value, "expected": expected}

    terms = list(terms)
    results = _run(one, terms, jobs)
    return CheckReport("characterization", len(terms), [f for f in results if f is not None])


def recursion_check(r, trace: Trace, elements, cache: dict | None = None) -> CheckReport:
    """``psi(u_g) = (1 - |X| r) tau(g) + r sum_{x: g.x = x} psi(u_{g|_x})``."""
    report = CheckReport("recursion")
    cache = {} if cache is None else cache
    for g in elements:
        backend = g.backend
        r_ = _check_r(backend, r)
        lhs = psi_value(r_, trace, term((), g, ()), cache)
        rhs = (1 - backend.alphabet.size * r_) * trace(g)
        for x in range(backend.alphabet.size):
            if act_word(g, (x,)) == (x,):
                rhs += r_ * psi_value(r_, trace, term((), restrict_word(g, (x,)), ()), cache)
        report.checked += 1
        if lhs != rhs:
            report.failures.append({"g": g.name, "lhs": lhs, "rhs": rhs})
    return report


def ground_check(state: State, terms) -> CheckReport:
    """``phi(s_v u_g s_w*) = phi(u_g)`` if ``v = w = empty``, else 0."""
    report = CheckReport("ground")
    for t in terms:
        value = state(t)
        expected = state(term((), t.g, ())) if not (t.v or t.w) else Fraction(0)
        report.checked += 1
        if value != expected:
            report.failures.append({"term": str(t), "value": value, "expected": expected})
    return report


# sampling ----------------------------------------------------------------

def sample_elements(backend: ActionBackend, rng: random.Random, pool=None, max_factors=3):
    """Random element drawn from ``pool`` or a product of up to ``max_factors`` generators."""
    gens = backend.default_generators()
    letters = gens + [g.inverse() for g in gens]
    if pool and rng.random() < 0.5:
        return rng.choice(pool)
    g = backend.identity
    for _ in range(rng.randint(1, max_factors)):
        g = g * rng.choice(letters)
    return g


def sample_terms(backend: ActionBackend, count: int, rng: random.Random, pool=None, max_len=3,
                 diagonal_bias: float = 0.5):
    """Random spanning terms with ``|v|, |w| <= max_len``.

    Half of them (by default) are built so that the two sides of a KMS
    pair can collide, otherwise almost every product vanishes.
    """
    size = backend.alphabet.size
    out = []
    for _ in range(count):
        v = tuple(rng.randrange(size) for _ in range(rng.randint(0, max_len)))
        if rng.random() < diagonal_bias:
            w = v
        else:
            w = tuple(rng.randrange(size) for _ in range(rng.randint(0, max_len)))
        out.append(term(v, sample_elements(backend, rng, pool), w))
    return out


def sample_pairs(backend: ActionBackend, count: int, rng: random.Random, pool=None, max_len=3):
    """Random pairs ``(a, b)`` of spanning terms with ``|v|, |w| <= max_len``.

    A third are independent.  The rest are shaped so that ``ab`` is a
    diagonal term (``b = s_{w y} u_h s_{v (g.y)}*``), and half of those
    also make its group part trivial, otherwise nearly every product
    would evaluate to zero and the check would be vacuous.
    """
    pairs = []
    size = backend.alphabet.size
    for n in range(count):
        a, b = sample_terms(backend, 2, rng, pool, max_len, diagonal_bias=0.0)
        mode = n % 3
        if mode:
            room = max_len - max(len(a.v), len(a.w))
            ext = tuple(rng.randrange(size) for _ in range(rng.randint(0, max(room, 0))))
            image, r = act_and_restrict(a.g, ext)
            h = invert(r)
            if mode == 2:
                h = compose(h, sample_elements(backend, rng, pool))
            b = term(a.w + ext, h, a.v + image)
        pairs.append((a, b))
    return pairs

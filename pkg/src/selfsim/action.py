"""Backend-independent calculus of self-similar actions.

An element is a reduced word over the base elements of a backend.  The
backend supplies the one-letter action and restriction of each base
element; everything else (acting on words, restricting, composing,
deciding equality) is built here from those two maps.
"""
from __future__ import annotations

import hashlib
import threading
import warnings
from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

from selfsim import kernels

Word = tuple  # tuple[int, ...] of alphabet indices
Factor = tuple  # (base id, inverted flag)

DEFAULT_FINGERPRINT_DEPTH = 8
DEFAULT_MAX_ELEMS = 10_000
DEFAULT_MAX_DEPTH = 1_000


class SelfSimError(Exception):
    """Base class for errors raised by this package."""


class AlphabetError(SelfSimError, ValueError):
    pass


class BackendMismatch(SelfSimError, ValueError):
    pass


class Overflow(SelfSimError):
    """A restriction closure did not stabilise within the caps."""

    def __init__(self, message, partial=(), depth=0):
        super().__init__(message)
        self.partial = list(partial)
        self.depth = depth


class Undecided(SelfSimError):
    """Element equality could not be decided within the caps."""


class Alphabet:
    """Ordered finite set of letter names; words use the indices."""

    def __init__(self, letters: Iterable[str]):
        letters = tuple(str(x) for x in letters)
        if not letters:
            raise AlphabetError("alphabet must contain at least one letter")
        if len(set(letters)) != len(letters):
            raise AlphabetError(f"duplicate letters in alphabet {letters!r}")
        if len(letters) == 1:
            warnings.warn("alphabet of size 1: every action is trivial", stacklevel=2)
        self.letters = letters
        self._index = {name: i for i, name in enumerate(letters)}
        # longest names first so that greedy tokenising prefers them
        self._by_length = sorted(letters, key=len, reverse=True)

    @property
    def size(self) -> int:
        return len(self.letters)

    def __len__(self):
        return len(self.letters)

    def __eq__(self, other):
        return isinstance(other, Alphabet) and self.letters == other.letters

    def __hash__(self):
        return hash(self.letters)

    def __repr__(self):
        return f"Alphabet({list(self.letters)!r})"

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise AlphabetError(f"unknown letter {name!r}") from None

    def parse_word(self, text: str) -> Word:
        """Tokenise ``text`` greedily into letters; whitespace is ignored."""
        word = []
        pos = 0
        while pos < len(text):
            if text[pos].isspace():
                pos += 1
                continue
            for name in self._by_length:
                if text.startswith(name, pos):
                    word.append(self._index[name])
                    pos += len(name)
                    break
            else:
                raise AlphabetError(f"unknown letter at position {pos} in {text!r}")
        return tuple(word)

    def format_word(self, word: Sequence[int]) -> str:
        if not word:
            return ""
        sep = "" if all(len(x) == 1 for x in self.letters) else " "
        return sep.join(self.letters[x] for x in word)

    def check_word(self, word: Sequence[int]) -> Word:
        word = tuple(word)
        for x in word:
            if not 0 <= x < self.size:
                raise AlphabetError(f"letter index {x} outside alphabet of size {self.size}")
        return word

    def words(self, length: int):
        """All words of the given length in lexicographic order."""
        from itertools import product

        return product(range(self.size), repeat=length)


class ActionBackend(ABC):
    """Primitive one-letter maps of a self-similar action.

    Subclasses implement :meth:`act1`, :meth:`res1` and :meth:`base_name`;
    they may override :meth:`normalize` when their base elements satisfy
    relations that are part of the representation itself.
    """

    alphabet: Alphabet

    def __init__(self, alphabet: Alphabet):
        self.alphabet = alphabet
        self._lock = threading.RLock()
        self._step_cache: dict = {}
        self._fingerprints: dict = {}
        self._equal_cache: dict = {}
        self._canonical: dict = {}
        self._canonical_buckets: dict = {}
        self._graph_cache: dict = {}
        self.identity = GroupElement(self, ())

    @abstractmethod
    def act1(self, base: Hashable, inverted: bool, x: int) -> int:
        """Image of letter ``x`` under a base element or its inverse."""

    @abstractmethod
    def res1(self, base: Hashable, inverted: bool, x: int) -> tuple:
        """Restriction at ``x`` of a base element (or inverse) as a factor tuple."""

    @abstractmethod
    def base_name(self, base: Hashable) -> str:
        ...

    def generators(self) -> dict:
        """Named elements that element expressions may refer to."""
        return {}

    def default_generators(self) -> list:
        return list(self.generators().values())

    def parse_vector(self, text: str):
        raise SelfSimError("this action has no vector element syntax")

    def normalize(self, factors: tuple) -> tuple:
        """Free reduction: cancel adjacent ``(s, +)(s, -)`` pairs."""
        stack: list = []
        for f in factors:
            if stack and stack[-1][0] == f[0] and stack[-1][1] != f[1]:
                stack.pop()
            else:
                stack.append(f)
        return tuple(stack)

    def element(self, factors: Iterable[Factor]) -> "GroupElement":
        return GroupElement(self, self.normalize(tuple(factors)))

    def base_element(self, base, inverted=False) -> "GroupElement":
        return self.element(((base, inverted),))

    def format_factors(self, factors: tuple) -> str:
        if not factors:
            return "e"
        plain = all(len(self.base_name(b)) == 1 for b, _ in factors)
        text = ""
        for n, (b, inv) in enumerate(factors):
            if n and (not plain or factors[n - 1][1]):
                text += " "
            text += self.base_name(b) + ("^-1" if inv else "")
        return text


class GroupElement:
    """Reduced word over the base elements of a backend.

    Equality and hashing are syntactic (same backend, same reduced
    word); use :func:`exact_equal` for equality of the induced actions.
    """

    __slots__ = ("backend", "factors", "_hash")

    def __init__(self, backend: ActionBackend, factors: tuple):
        self.backend = backend
        self.factors = factors
        self._hash = hash((id(backend), factors))

    def __eq__(self, other):
        return (
            isinstance(other, GroupElement)
            and other.backend is self.backend
            and other.factors == self.factors
        )

    def __hash__(self):
        return self._hash

    def __mul__(self, other):
        return compose(self, other)

    def inverse(self):
        return invert(self)

    def is_identity_word(self) -> bool:
        return not self.factors

    @property
    def name(self) -> str:
        return self.backend.format_factors(self.factors)

    def __str__(self):
        return self.name

    def __repr__(self):
        return f"<GroupElement {self.name}>"

    def act(self, word):
        return act_word(self, word)

    def restrict(self, word):
        return restrict_word(self, word)


def _step(g: GroupElement, x: int):
    """One letter: ``(g.x, g|_x)`` as (letter, reduced factor tuple)."""
    backend = g.backend
    key = (g.factors, x)
    hit = backend._step_cache.get(key)
    if hit is not None:
        return hit
    y = x
    parts = []
    # (gh).x = g.(h.x) and gh|_x = g|_{h.x} h|_x, so run right to left
    for base, inv in reversed(g.factors):
        parts.append(backend.res1(base, inv, y))
        y = backend.act1(base, inv, y)
    factors = backend.normalize(tuple(f for part in reversed(parts) for f in part))
    result = (y, factors)
    backend._step_cache[key] = result
    return result


def _check(g: GroupElement, v) -> Word:
    return g.backend.alphabet.check_word(v)


def act_and_restrict(g: GroupElement, v) -> tuple:
    """Return ``(g.v, g|_v)`` in one pass over ``v``."""
    v = _check(g, v)
    factors = g.factors
    image = []
    probe = g
    for x in v:
        y, factors = _step(probe, x)
        image.append(y)
        probe = GroupElement(g.backend, factors)
    return tuple(image), probe


def act_word(g: GroupElement, v) -> Word:
    return act_and_restrict(g, v)[0]


def restrict_word(g: GroupElement, v) -> GroupElement:
    return act_and_restrict(g, v)[1]


def compose(g: GroupElement, h: GroupElement) -> GroupElement:
    """The product ``gh``, acting as ``v -> g.(h.v)``."""
    if g.backend is not h.backend:
        raise BackendMismatch("elements belong to different actions")
    return g.backend.element(g.factors + h.factors)


def invert(g: GroupElement) -> GroupElement:
    return g.backend.element((b, not inv) for b, inv in reversed(g.factors))


def product(elements: Sequence[GroupElement], backend: ActionBackend | None = None) -> GroupElement:
    if not elements:
        if backend is None:
            raise ValueError("empty product needs a backend")
        return backend.identity
    result = elements[0]
    for h in elements[1:]:
        result = compose(result, h)
    return result


def level_permutation(g: GroupElement) -> tuple:
    return tuple(_step(g, x)[0] for x in range(g.backend.alphabet.size))


def portrait_fingerprint(g: GroupElement, depth: int = DEFAULT_FINGERPRINT_DEPTH) -> bytes:
    """Digest of the action of ``g`` on all words of length at most ``depth``.

    Computed from the root permutation and the digests of the
    restrictions one level shorter, so agreeing elements always digest
    alike regardless of how they are written.
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    backend = g.backend
    return _fingerprint(backend, g.factors, depth)


def _fingerprint(backend, factors, depth):
    if depth == 0:
        return b"\x00"
    key = (factors, depth)
    cached = backend._fingerprints.get(key)
    if cached is not None:
        return cached
    h = hashlib.blake2b(digest_size=16)
    g = GroupElement(backend, factors)
    steps = [_step(g, x) for x in range(backend.alphabet.size)]
    h.update(repr(tuple(y for y, _ in steps)).encode())
    for _, child in steps:
        h.update(_fingerprint(backend, child, depth - 1))
    digest = h.digest()
    backend._fingerprints[key] = digest
    return digest


class RestrictionTable:
    """Raw restriction-closed set of reduced words reachable from some roots.

    Index 0 is always the identity word.  ``out[i][x]`` and ``to[i][x]``
    record the letter action and restriction of element ``i``; the
    semantic classes come from partition refinement of that machine.
    """

    def __init__(self, backend, roots, max_elems=DEFAULT_MAX_ELEMS, max_depth=DEFAULT_MAX_DEPTH):
        self.backend = backend
        self.elements: list = [backend.identity]
        self.index = {(): 0}
        self.out: list = []
        self.to: list = []
        self.depth = 0
        size = backend.alphabet.size
        frontier = deque()
        for r in roots:
            if r.backend is not backend:
                raise BackendMismatch("root from a different action")
            if r.factors not in self.index:
                self.index[r.factors] = len(self.elements)
                self.elements.append(r)
        if len(self.elements) > max_elems:
            raise Overflow(
                f"{len(self.elements)} starting elements exceed max_elems={max_elems}",
                partial=self.elements,
            )
        frontier.extend((i, 0) for i in range(len(self.elements)))
        processed = 0
        while frontier:
            i, d = frontier.popleft()
            g = self.elements[i]
            row_out, row_to = [], []
            for x in range(size):
                y, factors = _step(g, x)
                j = self.index.get(factors)
                if j is None:
                    if d + 1 > max_depth or len(self.elements) >= max_elems:
                        raise Overflow(
                            f"restriction closure exceeded caps "
                            f"(elements={len(self.elements)}, depth={d + 1})",
                            partial=self.elements,
                            depth=d,
                        )
                    j = self.index[factors] = len(self.elements)
                    self.elements.append(GroupElement(backend, factors))
                    frontier.append((j, d + 1))
                    self.depth = max(self.depth, d + 1)
                row_out.append(y)
                row_to.append(j)
            # rows are filled in BFS order, which equals index order
            self.out.append(row_out)
            self.to.append(row_to)
            processed += 1
        self._labels = None

    def labels(self) -> list:
        if self._labels is None:
            self._labels = kernels.refine_partition(self.out, self.to)
        return self._labels

    def same(self, g: GroupElement, h: GroupElement) -> bool:
        labels = self.labels()
        return labels[self.index[g.factors]] == labels[self.index[h.factors]]


@dataclass(frozen=True)
class ElementGraph:
    """Semantic quotient of a restriction table, restricted to the classes
    reachable from the roots.

    ``vertices`` holds one representative per class; ``to[i][x]`` is the
    vertex of ``vertices[i]|_x`` and ``out[i][x]`` the letter
    ``vertices[i].x``.  ``identity`` is the vertex of ``e`` when it is
    reachable, else ``None``.
    """

    backend: ActionBackend
    vertices: tuple
    out: tuple
    to: tuple
    identity: int | None
    roots: tuple

    def __len__(self):
        return len(self.vertices)

    def vertex_of(self, g: GroupElement) -> int:
        for i, v in enumerate(self.vertices):
            if exact_equal(v, g):
                return i
        raise KeyError(g.name)


def _rep_key(g: GroupElement):
    return (len(g.factors), sum(inv for _, inv in g.factors), g.name)


def element_graph(roots: Sequence[GroupElement], max_elems=DEFAULT_MAX_ELEMS, max_depth=DEFAULT_MAX_DEPTH) -> ElementGraph:
    """Restriction closure of ``roots`` up to equality of actions."""
    if not roots:
        raise ValueError("need at least one root")
    backend = roots[0].backend
    key = (tuple(r.factors for r in roots), max_elems, max_depth)
    cached = backend._graph_cache.get(key)
    if cached is not None:
        return cached
    table = RestrictionTable(backend, roots, max_elems, max_depth)
    labels = table.labels()
    root_idx = [table.index[r.factors] for r in roots]

    # classes reachable from the roots, in BFS order
    order: list = []
    seen = set()
    queue = deque()
    for i in root_idx:
        if labels[i] not in seen:
            seen.add(labels[i])
            order.append(labels[i])
            queue.append(i)
    while queue:
        i = queue.popleft()
        for j in table.to[i]:
            if labels[j] not in seen:
                seen.add(labels[j])
                order.append(labels[j])
                queue.append(j)
    vertex_of_label = {lab: n for n, lab in enumerate(order)}

    members: dict = {}
    first: dict = {}
    for i, lab in enumerate(labels):
        if lab in vertex_of_label:
            members.setdefault(lab, []).append(table.elements[i])
            first.setdefault(lab, i)
    reps = []
    for lab in order:
        if lab == labels[0]:
            reps.append(backend.identity)
            continue
        rooted = [roots[n] for n, i in enumerate(root_idx) if labels[i] == lab]
        reps.append(rooted[0] if rooted else min(members[lab], key=_rep_key))
    out = []
    to = []
    for lab in order:
        i = first[lab]
        out.append(tuple(table.out[i]))
        to.append(tuple(vertex_of_label[labels[j]] for j in table.to[i]))
    graph = ElementGraph(
        backend=backend,
        vertices=tuple(reps),
        out=tuple(out),
        to=tuple(to),
        identity=vertex_of_label.get(labels[0]),
        roots=tuple(vertex_of_label[labels[i]] for i in root_idx),
    )
    backend._graph_cache[key] = graph
    return graph


def restriction_closure(g: GroupElement, max_elems=DEFAULT_MAX_ELEMS, max_depth=DEFAULT_MAX_DEPTH) -> list:
    """The distinct elements among ``{g|_v : v in X*}`` (``g`` included).

    Raises :class:`Overflow` if the closure does not stabilise within
    the caps.
    """
    if max_elems <= 0 or max_depth <= 0:
        raise ValueError("caps must be positive")
    return list(element_graph([g], max_elems, max_depth).vertices)


def exact_equal(g: GroupElement, h: GroupElement, *, fingerprint_depth=DEFAULT_FINGERPRINT_DEPTH,
                max_elems=DEFAULT_MAX_ELEMS, max_depth=DEFAULT_MAX_DEPTH) -> bool:
    """Decide whether ``g`` and ``h`` induce the same map on ``X*``.

    Fingerprints reject most unequal pairs; the rest are settled by
    minimising the finite machine on the joint restriction closure.
    Raises :class:`Undecided` when that closure overflows.
    """
    if g.backend is not h.backend:
        raise BackendMismatch("elements belong to different actions")
    if g.factors == h.factors:
        return True
    backend = g.backend
    key = (g.factors, h.factors) if g.factors <= h.factors else (h.factors, g.factors)
    cached = backend._equal_cache.get(key)
    if cached is not None:
        return cached
    if portrait_fingerprint(g, fingerprint_depth) != portrait_fingerprint(h, fingerprint_depth):
        result = False
    else:
        try:
            table = RestrictionTable(backend, [g, h], max_elems, max_depth)
        except Overflow as exc:
            raise Undecided(f"cannot decide {g.name} = {h.name}: {exc}") from exc
        result = table.same(g, h)
    backend._equal_cache[key] = result
    return result


def is_trivial(g: GroupElement, **caps) -> bool:
    return exact_equal(g, g.backend.identity, **caps)


def canonical(g: GroupElement) -> GroupElement:
    """A fixed representative of the class of ``g`` under :func:`exact_equal`.

    The first element seen in each class becomes its representative,
    except that the identity class is always represented by ``e``.
    """
    backend = g.backend
    hit = backend._canonical.get(g.factors)
    if hit is not None:
        return hit
    with backend._lock:
        hit = backend._canonical.get(g.factors)
        if hit is not None:
            return hit
        digest = portrait_fingerprint(g)
        bucket = backend._canonical_buckets.setdefault(digest, [])
        if not bucket and digest == portrait_fingerprint(backend.identity):
            bucket.append(backend.identity)
        for rep in bucket:
            if exact_equal(rep, g):
                break
        else:
            rep = g
            bucket.append(g)
        backend._canonical[g.factors] = rep
        return rep


def check_bijective(g: GroupElement, depth: int) -> bool:
    """True when ``g`` permutes ``X^n`` for every ``n <= depth``."""
    alphabet = g.backend.alphabet
    for n in range(depth + 1):
        images = {act_word(g, w) for w in alphabet.words(n)}
        if len(images) != alphabet.size ** n:
            return False
    return True

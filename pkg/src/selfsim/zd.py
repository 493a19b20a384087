"""The self-similar action of ``Z^d`` given by an integer matrix.

For ``A`` with ``N = |det A| > 1`` and ``B = A^t``, the alphabet is a
digit set: a transversal of ``Z^d / B Z^d`` containing 0.  A vector ``n``
acts on a digit ``x`` by ``n.x = c(n + x)`` and restricts to
``B^{-1}(n + x - c(n + x))``, where ``c`` picks the digit in a coset.
"""
from __future__ import annotations

import itertools
import json
from pathlib import Path

import numpy as np

from selfsim import linalg
from selfsim.action import ActionBackend, Alphabet, SelfSimError


class ZdError(SelfSimError, ValueError):
    pass


class Undetermined(SelfSimError):
    """The floating-point eigenvalue test could not be carried out."""


def _vec(v):
    if isinstance(v, int):
        return (v,)
    try:
        return tuple(int(c) for c in v)
    except (TypeError, ValueError):
        raise ZdError(f"not an integer vector: {v!r}") from None


class IntMatrix:
    """Integer matrix ``A`` with cached transpose ``B`` and ``N = |det A|``."""

    def __init__(self, rows):
        rows = [list(map(int, r)) for r in rows]
        d = len(rows)
        if d == 0 or any(len(r) != d for r in rows):
            raise ZdError("matrix must be square and non-empty")
        self.A = rows
        self.d = d
        self.B = linalg.transpose(rows)
        self.det = linalg.det_int(self.B)
        self.N = abs(self.det)
        if self.N < 2:
            raise ZdError(f"need |det A| > 1, got {self.N}")
        # integral adjugate: B^{-1} = adj / det
        inv = linalg.inverse(self.B)
        self.adj = [[int(v * self.det) for v in row] for row in inv]

    def in_lattice(self, v) -> bool:
        """Whether ``v`` lies in ``B Z^d``."""
        return all(c % self.det == 0 for c in linalg.matvec(self.adj, v))

    def solve_integral(self, v):
        """``B^{-1} v`` for ``v`` in ``B Z^d``."""
        w = linalg.matvec(self.adj, v)
        if any(c % self.det for c in w):
            raise ZdError(f"{v} is not in B Z^d")
        return tuple(c // self.det for c in w)

    def apply(self, v):
        return tuple(linalg.matvec(self.B, v))


def _shell_vectors(d, radius):
    if radius == 0:
        yield (0,) * d
        return
    shell = [
        v for v in itertools.product(range(-radius, radius + 1), repeat=d)
        if max(abs(c) for c in v) == radius
    ]
    # small l1 norm first, then fewer negative entries, then larger leading entries
    shell.sort(key=lambda v: (sum(abs(c) for c in v), sum(c < 0 for c in v), tuple(-c for c in v)))
    yield from shell


def default_digits(matrix: IntMatrix) -> list:
    """One vector per coset of ``B Z^d``, searched outward from 0 in sup-norm shells."""
    digits: list = []
    radius = 0
    while len(digits) < matrix.N:
        for v in _shell_vectors(matrix.d, radius):
            if all(not matrix.in_lattice(tuple(a - b for a, b in zip(v, s))) for s in digits):
                digits.append(v)
                if len(digits) == matrix.N:
                    break
        radius += 1
    return digits


def check_digits(matrix: IntMatrix, digits) -> list:
    digits = [_vec(s) for s in digits]
    if any(len(s) != matrix.d for s in digits):
        raise ZdError("digit dimension does not match the matrix")
    if len(digits) != matrix.N:
        raise ZdError(f"need exactly {matrix.N} digits, got {len(digits)}")
    if (0,) * matrix.d not in digits:
        raise ZdError("digit set must contain 0")
    for s, t in itertools.combinations(digits, 2):
        if matrix.in_lattice(tuple(a - b for a, b in zip(s, t))):
            raise ZdError(f"digits {s} and {t} lie in the same coset")
    return digits


def is_dilation(rows, tol: float = 1e-9) -> bool:
    """Advisory floating-point test that every eigenvalue has modulus > 1 + tol."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    try:
        eig = np.linalg.eigvals(np.array(rows, dtype=float))
    except np.linalg.LinAlgError as exc:
        raise Undetermined(str(exc)) from exc
    if not np.all(np.isfinite(eig)):
        raise Undetermined("non-finite eigenvalues")
    return bool(np.all(np.abs(eig) > 1 + tol))


def _format_vector(v):
    return "(" + ",".join(str(c) for c in v) + ")"


class ZdAction(ActionBackend):
    """``(Z^d, Sigma)``: base elements are vectors, products are sums."""

    def __init__(self, matrix_rows, digits="auto", name=""):
        self.matrix = IntMatrix(matrix_rows)
        if digits is None or digits == "auto":
            digits = default_digits(self.matrix)
        self.digits = check_digits(self.matrix, digits)
        self.d = self.matrix.d
        if self.d == 1:
            letters = [str(s[0]) for s in self.digits]
        else:
            letters = [_format_vector(s) for s in self.digits]
        super().__init__(Alphabet(letters))
        self._digit_index = {s: i for i, s in enumerate(self.digits)}
        self.name = name or f"zd({self.matrix.A})"
        try:
            self.dilation = is_dilation(self.matrix.A)
        except Undetermined:
            self.dilation = None

    # coset arithmetic -------------------------------------------------
    def coset_rep(self, n) -> int:
        """Index of the unique digit congruent to ``n`` mod ``B Z^d``."""
        n = _vec(n)
        hits = [
            i for i, s in enumerate(self.digits)
            if self.matrix.in_lattice(tuple(a - b for a, b in zip(n, s)))
        ]
        if len(hits) != 1:
            raise ZdError(f"digit set is not a transversal at {n}: {len(hits)} matches")
        return hits[0]

    def act_letter(self, n, x: int) -> int:
        s = self.digits[x]
        return self.coset_rep(tuple(a + b for a, b in zip(n, s)))

    def res_letter(self, n, x: int) -> tuple:
        s = self.digits[x]
        m = tuple(a + b for a, b in zip(_vec(n), s))
        c = self.digits[self.coset_rep(m)]
        return self.matrix.solve_integral(tuple(a - b for a, b in zip(m, c)))

    def digit_expansion(self, word) -> tuple:
        """``w_1 + B w_2 + ... + B^{k-1} w_k``; the empty word gives 0."""
        total = (0,) * self.d
        power = linalg.identity(self.d)
        for x in word:
            term = linalg.matvec(power, self.digits[x])
            total = tuple(a + b for a, b in zip(total, term))
            power = linalg.matmul(self.matrix.B, power)
        return total

    # backend interface ------------------------------------------------
    def act1(self, base, inverted, x):
        n = tuple(-c for c in base) if inverted else base
        return self.act_letter(n, x)

    def res1(self, base, inverted, x):
        n = tuple(-c for c in base) if inverted else base
        r = self.res_letter(n, x)
        return () if not any(r) else ((r, False),)

    def normalize(self, factors):
        total = [0] * self.d
        for base, inv in factors:
            for i, c in enumerate(base):
                total[i] += -c if inv else c
        return () if not any(total) else ((tuple(total), False),)

    def base_name(self, base):
        return _format_vector(base)

    def vector(self, n):
        n = _vec(n)
        if len(n) != self.d:
            raise ZdError(f"expected a vector of length {self.d}")
        return self.element((((n), False),))

    def vector_of(self, g) -> tuple:
        return g.factors[0][0] if g.factors else (0,) * self.d

    def parse_vector(self, text):
        inner = text.strip()
        if not (inner.startswith("(") and inner.endswith(")")):
            raise ZdError(f"bad vector literal {text!r}")
        try:
            coords = [int(c) for c in inner[1:-1].split(",")]
        except ValueError:
            raise ZdError(f"bad vector literal {text!r}") from None
        return self.vector(coords)

    def generators(self):
        gens = {}
        for i in range(self.d):
            v = [0] * self.d
            v[i] = 1
            gens[_format_vector(v)] = self.vector(v)
        return gens

    def describe(self):
        return {"type": "zd", "matrix": self.matrix.A, "digits": [list(s) for s in self.digits]}


def load_zd(document) -> ZdAction:
    if isinstance(document, (str, Path)) and not str(document).lstrip().startswith("{"):
        document = json.loads(Path(document).read_text(encoding="utf-8"))
    elif isinstance(document, str):
        document = json.loads(document)
    unknown = set(document) - {"type", "matrix", "digits", "name"}
    if unknown:
        raise ZdError(f"unknown keys {sorted(unknown)}")
    if document.get("type") != "zd":
        raise ZdError("zd document needs \"type\": \"zd\"")
    if "matrix" not in document:
        raise ZdError("missing key 'matrix'")
    return ZdAction(document["matrix"], document.get("digits", "auto"), name=document.get("name", ""))

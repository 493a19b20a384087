"""Moore diagrams, cycle reachability, nucleus search and DOT export."""
from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field

from selfsim.action import (
    DEFAULT_MAX_DEPTH,
    DEFAULT_MAX_ELEMS,
    ActionBackend,
    GroupElement,
    Overflow,
    element_graph,
    invert,
)

VERIFIED = "Verified"
INCONCLUSIVE = "Inconclusive"

DEFAULT_CONTRACTION_DEPTH = 32
DEFAULT_ITERATIONS = 50


@dataclass(frozen=True)
class MooreDiagram:
    """Labelled digraph of a restriction-closed set.

    Vertex ``i`` has, for each letter ``x``, an edge to ``to[i][x]``
    labelled ``(x, out[i][x])``.  A stationary subgraph keeps only the
    ``(x, x)`` edges; ``edges`` is the authoritative edge list either way.
    """

    backend: ActionBackend
    vertices: tuple
    edges: tuple  # (source, x, y, target)
    identity: int | None = None

    @property
    def names(self):
        return [v.name for v in self.vertices]

    def successors(self, i):
        return [t for s, _, _, t in self.edges if s == i]

    def out_edges(self, i):
        return [e for e in self.edges if e[0] == i]

    def index(self, g: GroupElement) -> int:
        from selfsim.action import exact_equal

        for i, v in enumerate(self.vertices):
            if exact_equal(v, g):
                return i
        raise KeyError(g.name)


def _diagram_from_graph(graph) -> MooreDiagram:
    edges = []
    for i in range(len(graph.vertices)):
        for x, (y, t) in enumerate(zip(graph.out[i], graph.to[i])):
            edges.append((i, x, y, t))
    return MooreDiagram(graph.backend, graph.vertices, tuple(edges), graph.identity)


def build_diagram(elements, backend: ActionBackend | None = None, max_elems=DEFAULT_MAX_ELEMS) -> MooreDiagram:
    """Moore diagram of the restriction closure of ``elements``.

    An empty set gives the diagram of ``{e}`` (``backend`` is then required).
    """
    elements = list(elements)
    if not elements:
        if backend is None:
            raise ValueError("empty element set needs a backend")
        elements = [backend.identity]
    return _diagram_from_graph(element_graph(elements, max_elems=max_elems))


def _reach(n, succ, sources):
    seen = set(sources)
    queue = deque(sources)
    while queue:
        i = queue.popleft()
        for j in succ[i]:
            if j not in seen:
                seen.add(j)
                queue.append(j)
    return seen


def _cyclic_vertices(n, succ):
    """Vertices lying on a directed cycle (Tarjan, iterative)."""
    index = [None] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list = []
    counter = 0
    cyclic = set()
    for root in range(n):
        if index[root] is not None:
            continue
        work = [(root, 0)]
        while work:
            v, pos = work[-1]
            if pos == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            if pos < len(succ[v]):
                work[-1] = (v, pos + 1)
                w = succ[v][pos]
                if index[w] is None:
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                component = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    component.append(w)
                    if w == v:
                        break
                if len(component) > 1 or v in succ[v]:
                    cyclic.update(component)
    return cyclic


def _succ_lists(n, edges):
    succ = [[] for _ in range(n)]
    for s, _, _, t in edges:
        succ[s].append(t)
    return succ


def cycle_reachable_indices(n, edges) -> set:
    succ = _succ_lists(n, edges)
    return _reach(n, succ, sorted(_cyclic_vertices(n, succ)))


def cycle_reachable(diagram: MooreDiagram) -> list:
    """Vertices on, or reachable from, a directed cycle (in vertex order)."""
    keep = cycle_reachable_indices(len(diagram.vertices), diagram.edges)
    return [diagram.vertices[i] for i in sorted(keep)]


def stationary_subgraph(diagram: MooreDiagram) -> MooreDiagram:
    """Same vertices, only the edges labelled ``(x, x)``."""
    return MooreDiagram(
        diagram.backend,
        diagram.vertices,
        tuple(e for e in diagram.edges if e[1] == e[2]),
        diagram.identity,
    )


@dataclass
class NucleusResult:
    status: str
    elements: list
    certificate: dict = field(default_factory=dict)
    caps: dict = field(default_factory=dict)
    iterations: int = 0
    message: str = ""

    @property
    def verified(self) -> bool:
        return self.status == VERIFIED

    @property
    def max_depth(self) -> int:
        return max(self.certificate.values(), default=0)

    def diagram(self) -> MooreDiagram:
        return build_diagram(self.elements)


def _contraction_depth(graph, start, target, cap):
    level = {start}
    for depth in range(cap + 1):
        if level <= target:
            return depth
        level = {t for i in level for t in graph.to[i]}
    return None


def nucleus(backend: ActionBackend, generators=None, *, max_elems=DEFAULT_MAX_ELEMS,
            max_depth=DEFAULT_MAX_DEPTH, contraction_depth=DEFAULT_CONTRACTION_DEPTH,
            max_iterations=DEFAULT_ITERATIONS) -> NucleusResult:
    """Search for the nucleus of the action generated by ``generators``.

    Cycle-reachable vertices of a restriction-closed set are always in
    the nucleus.  The candidate set is accepted once every product of
    two candidates restricts into it at some bounded depth; the depth is
    recorded per pair as the certificate.
    """
    caps = {"max_elems": max_elems, "max_depth": max_depth, "contraction_depth": contraction_depth, "max_iterations": max_iterations}
    if generators is None:
        generators = backend.default_generators()
    seeds = [backend.identity]
    for g in generators:
        seeds.extend([g, invert(g)])
    candidates: list = []
    for iteration in range(1, max_iterations + 1):
        try:
            graph = element_graph(seeds, max_elems=max_elems, max_depth=max_depth)
            diagram = _diagram_from_graph(graph)
            keep = sorted(cycle_reachable_indices(len(graph.vertices), diagram.edges))
            candidates = [graph.vertices[i] for i in keep]
            pairs = [(g, h) for g in candidates for h in candidates]
            products = [g * h for g, h in pairs]
            big = element_graph(candidates + products, max_elems=max_elems, max_depth=max_depth)
        except Overflow as exc:
            return NucleusResult(INCONCLUSIVE, candidates, caps=caps, iterations=iteration, message=str(exc))
        big_diagram = _diagram_from_graph(big)
        reachable = cycle_reachable_indices(len(big.vertices), big_diagram.edges)
        known = set(big.roots[: len(candidates)])
        fresh = sorted(reachable - known)
        if fresh:
            seeds = seeds + [big.vertices[i] for i in fresh]
            continue
        certificate = {}
        for (g, h), root in zip(pairs, big.roots[len(candidates):]):
            depth = _contraction_depth(big, root, known, contraction_depth)
            if depth is None:
                return NucleusResult(
                    INCONCLUSIVE, candidates, certificate, caps, iteration,
                    f"product {g.name}*{h.name} did not contract within depth {contraction_depth}",
                )
            certificate[(g.name, h.name)] = depth
        return NucleusResult(VERIFIED, candidates, certificate, caps, iteration)
    return NucleusResult(INCONCLUSIVE, candidates, caps=caps, iterations=max_iterations,
                         message="iteration cap reached")


_DOT_ID = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def _dot_id(name: str) -> str:
    if _DOT_ID.match(name):
        return name
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def dot_export(diagram: MooreDiagram, highlight_stationary: bool = False, graph_name: str = "moore") -> str:
    """Graphviz source; vertices and edges in diagram order."""
    letters = diagram.backend.alphabet.letters
    lines = [f"digraph {graph_name} {{"]
    for v in diagram.vertices:
        lines.append(f"  {_dot_id(v.name)};")
    for s, x, y, t in diagram.edges:
        attrs = f'label="({letters[x]},{letters[y]})"'
        if highlight_stationary and x == y:
            attrs += ", style=bold"
        lines.append(f"  {_dot_id(diagram.vertices[s].name)} -> {_dot_id(diagram.vertices[t].name)} [{attrs}];")
    lines.append("}")
    return "\n".join(lines) + "\n"

"""Scale-theta 2-complexes and their first homology / fundamental group.

The theta-graph joins two distinct points when their warped distance is at
most theta (ties included).  Filling every triangle and every chordless
4-cycle gives a 2-complex whose fundamental group is the discrete fundamental
group at scale theta; chorded 4-cycles are already products of two filled
triangles and are skipped.

Orientation conventions: an edge ``(u, v)`` is oriented from the smaller to the
larger vertex.  A triangle ``(a, b, c)`` with ``a < b < c`` has boundary
``[a,b] + [b,c] - [a,c]``.  A square is stored as ``(a, b, c, d)`` with ``a``
its smallest vertex, ``b < d`` the two neighbours of ``a`` and ``c`` opposite
to ``a``; it is traversed ``a -> b -> c -> d -> a``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from . import limits
from .errors import GuardError, ScaleError
from .groups import Presentation
from .snf import AbelianInvariants, RationalQuotient, abelian_invariants, invariant_factors
from .words import Word


@dataclass(frozen=True)
class ThetaGraph:
    """Simple undirected graph given by sorted adjacency tuples."""

    n: int
    adjacency: tuple[frozenset[int], ...]

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "ThetaGraph":
        adj = [set() for _ in range(n)]
        for u, v in edges:
            if u == v:
                continue
            adj[u].add(v)
            adj[v].add(u)
        return cls(n, tuple(frozenset(a) for a in adj))

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u in range(self.n) for v in sorted(self.adjacency[u]) if u < v]

    @property
    def edge_count(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        seen = {0}
        queue = deque([0])
        while queue:
            u = queue.popleft()
            for v in self.adjacency[u]:
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        return len(seen) == self.n

    def to_networkx(self):
        import networkx as nx

        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges)
        return g


def theta_graph(wg, theta) -> ThetaGraph:
    """Edges ``{u, v}`` with ``0 < delta(u, v) <= theta`` (exact comparison)."""
    adj = []
    for u in range(wg.n):
        adj.append(frozenset(wg.neighbors_within(u, theta)))
    g = ThetaGraph(wg.n, tuple(adj))
    if not g.is_connected():
        raise ScaleError("scale too small for this net: the theta-graph is disconnected")
    return g


def graph_from_edges(n: int, edges: Iterable[tuple[int, int]]) -> ThetaGraph:
    return ThetaGraph.from_edges(n, edges)


def two_cells(g: ThetaGraph, max_cells: int | None = None) -> tuple[list[tuple[int, int, int]], list[tuple[int, int, int, int]]]:
    """All triangles and all chordless 4-cycles in canonical form."""
    cap = limits.resolve("max_cells", max_cells)
    adj = g.adjacency
    triangles = []
    squares = []
    count = 0
    for a in range(g.n):
        higher = sorted(v for v in adj[a] if v > a)
        for i, b in enumerate(higher):
            nb = adj[b]
            for c in higher[i + 1:]:
                if c in nb:
                    triangles.append((a, b, c))
        count = len(triangles)
        # squares with smallest vertex a: a-b-c-d-a, b < d, no chords a-c, b-d
        opposite: dict[int, list[int]] = {}
        for b in higher:
            for c in adj[b]:
                if c > a and c != b and c not in adj[a]:
                    opposite.setdefault(c, []).append(b)
        for c in sorted(opposite):
            mids = sorted(opposite[c])
            for i, b in enumerate(mids):
                nb = adj[b]
                for d in mids[i + 1:]:
                    if d not in nb:
                        squares.append((a, b, c, d))
        if count + len(squares) > cap:
            raise GuardError(
                f"cell count guard: more than {cap} cells; use a coarser theta granularity or a smaller net"
            )
    return triangles, squares


@dataclass
class ScaleComplex:
    """theta-graph with its filled triangles and chordless squares."""

    graph: ThetaGraph
    triangles: list[tuple[int, int, int]]
    squares: list[tuple[int, int, int, int]]
    theta: Fraction | float | int = 1
    basepoint: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.edges = self.graph.edges
        self.edge_index = {e: i for i, e in enumerate(self.edges)}

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def cell_count(self) -> int:
        return len(self.triangles) + len(self.squares)

    def cells(self) -> Iterable[tuple[int, ...]]:
        yield from self.triangles
        yield from self.squares

    @staticmethod
    def cycle_of(cell: tuple[int, ...]) -> tuple[int, ...]:
        """Closed vertex walk (without repeating the start) of a cell."""
        if len(cell) == 3:
            a, b, c = cell
            return (a, b, c)
        return cell

    def to_json(self) -> dict:
        return {
            "theta": str(self.theta),
            "basepoint": self.basepoint,
            "vertices": self.n,
            "edges": [list(e) for e in self.edges],
            "triangles": [list(t) for t in self.triangles],
            "squares": [list(s) for s in self.squares],
        }


def build_complex(source, theta, basepoint: int = 0, max_cells: int | None = None) -> ScaleComplex:
    """Scale complex of a weighted graph (warped net, slab, Cayley graph) at ``theta``."""
    g = source if isinstance(source, ThetaGraph) else theta_graph(source, theta)
    if not g.is_connected():
        raise ScaleError("scale too small for this net: the theta-graph is disconnected")
    if not 0 <= basepoint < g.n:
        raise IndexError("basepoint out of range")
    tri, sq = two_cells(g, max_cells)
    return ScaleComplex(g, tri, sq, theta, basepoint)


def _boundary_row(c: ScaleComplex, cell: tuple[int, ...]) -> dict[int, int]:
    walk = ScaleComplex.cycle_of(cell)
    row: dict[int, int] = {}
    for i, u in enumerate(walk):
        v = walk[(i + 1) % len(walk)]
        if u < v:
            j, s = c.edge_index[(u, v)], 1
        else:
            j, s = c.edge_index[(v, u)], -1
        row[j] = row.get(j, 0) + s
    return {j: s for j, s in row.items() if s}


def boundary_rows(c: ScaleComplex) -> list[dict[int, int]]:
    """Rows of the transpose of the cell boundary map (one row per cell, columns = edges)."""
    return [_boundary_row(c, cell) for cell in c.cells()]


def h1_invariants(c: ScaleComplex) -> AbelianInvariants:
    """``H_1`` of the complex from the Smith form of the cell boundary matrix.

    The cycle space has rank ``E - V + 1``; the image of the boundary map sits
    inside it and the cycle space is a direct summand of ``Z^E``, so torsion of
    ``H_1`` equals torsion of the cokernel of the boundary map.
    """
    if not c.graph.is_connected():
        raise ScaleError("complex is disconnected")
    factors = invariant_factors(boundary_rows(c))
    cycle_rank = len(c.edges) - c.n + 1
    return AbelianInvariants(cycle_rank - len(factors), tuple(sorted(f for f in factors if f > 1)))


# ---------------------------------------------------------------------------
# presentations


def spanning_tree(g: ThetaGraph, root: int) -> set[tuple[int, int]]:
    """BFS tree edges (as ``(min, max)`` pairs), neighbours visited in increasing order."""
    seen = {root}
    tree = set()
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v in sorted(g.adjacency[u]):
            if v not in seen:
                seen.add(v)
                tree.add((min(u, v), max(u, v)))
                queue.append(v)
    if len(seen) != g.n:
        raise ScaleError("complex is disconnected")
    return tree


@dataclass
class ComplexPresentation:
    presentation: Presentation
    generator_edges: list[tuple[int, int]]
    tree: set[tuple[int, int]]


def presentation_data(c: ScaleComplex, tree: set[tuple[int, int]] | None = None) -> ComplexPresentation:
    if tree is None:
        tree = spanning_tree(c.graph, c.basepoint)
    gen_edges = [e for e in c.edges if e not in tree]
    names = {e: f"x{i}" for i, e in enumerate(gen_edges)}
    rels = []
    for cell in c.cells():
        walk = ScaleComplex.cycle_of(cell)
        letters = []
        for i, u in enumerate(walk):
            v = walk[(i + 1) % len(walk)]
            e = (min(u, v), max(u, v))
            if e in names:
                letters.append((names[e], 1 if u < v else -1))
        rels.append(Word.reduce(letters))
    pres = Presentation(tuple(names[e] for e in gen_edges), tuple(rels))
    return ComplexPresentation(pres, gen_edges, tree)


def presentation(c: ScaleComplex) -> Presentation:
    """Presentation of the fundamental group at the basepoint.

    Generators are the edges outside a BFS spanning tree rooted at the
    basepoint (``x0, x1, ...`` in edge order); relators are the cell
    boundaries with tree edges deleted.
    """
    return presentation_data(c).presentation


# ---------------------------------------------------------------------------
# maps between scales


@dataclass
class InducedMap:
    matrix: list[list[Fraction]]
    surjective: bool
    rational_rank: int
    source: AbelianInvariants
    target: AbelianInvariants
    contract_ok: bool | None = None

    def to_json(self) -> dict:
        return {
            "matrix": [[str(x) for x in row] for row in self.matrix],
            "surjective": self.surjective,
            "rational_rank": self.rational_rank,
            "source": self.source.to_json(),
            "target": self.target.to_json(),
            "contract_ok": self.contract_ok,
        }


def _abelian_rows(p: Presentation) -> list[dict[int, int]]:
    from .groups import relation_rows

    return relation_rows(p)


def _rank(rows: Sequence[Sequence[Fraction]]) -> int:
    q = RationalQuotient([{j: x for j, x in enumerate(r) if x} for r in rows], len(rows[0]) if rows else 0)
    return len(q.pivots)


def induced_h1_map(c_small: ScaleComplex, c_large: ScaleComplex) -> InducedMap:
    """Map on ``H_1`` induced by the identity of the vertex set from scale theta to theta'.

    Both complexes share a spanning tree (one of the smaller theta-graph), so
    generators of the source are generators of the target.  The matrix is
    written in the rational bases of free columns; the surjectivity flag comes
    from the Smith form of the target relations stacked with the image of the
    source generators (the quotient must vanish).
    """
    if c_small.n != c_large.n:
        raise ValueError("vertex sets differ")
    large_edges = set(c_large.edges)
    if any(e not in large_edges for e in c_small.edges):
        raise ValueError("source edges are not contained in the target; need theta <= theta'")
    tree = spanning_tree(c_small.graph, c_small.basepoint)
    src = presentation_data(c_small, tree)
    dst = presentation_data(c_large, tree)
    src_rows = _abelian_rows(src.presentation)
    dst_rows = _abelian_rows(dst.presentation)
    n_src, n_dst = len(src.generator_edges), len(dst.generator_edges)
    dst_pos = {e: i for i, e in enumerate(dst.generator_edges)}
    image = [dst_pos[e] for e in src.generator_edges]
    q_src = RationalQuotient(src_rows, n_src)
    q_dst = RationalQuotient(dst_rows, n_dst)
    cols = [q_dst.coordinates({image[j]: 1}) for j in q_src.free]
    matrix = [[cols[j][i] for j in range(len(cols))] for i in range(q_dst.dimension)]
    rank = _rank(cols) if cols and q_dst.dimension else 0
    stacked = dst_rows + [{i: 1} for i in image]
    quotient = abelian_invariants(stacked, n_dst)
    return InducedMap(
        matrix,
        quotient.is_trivial,
        rank,
        abelian_invariants(src_rows, n_src),
        abelian_invariants(dst_rows, n_dst),
    )

from __future__ import annotations

import random
from fractions import Fraction

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import determinantal_invariants, rank_mod, rational_rank
from warpgroups.complex import (
    ScaleComplex,
    ThetaGraph,
    boundary_rows,
    build_complex,
    graph_from_edges,
    h1_invariants,
    induced_h1_map,
    presentation,
    spanning_tree,
    theta_graph,
    two_cells,
)
from warpgroups.errors import GuardError, ScaleError
from warpgroups.groups import abelianization, certify_trivial, tietze_simplify
from warpgroups.snf import (
    AbelianInvariants,
    RationalQuotient,
    abelian_invariants,
    abelian_invariants_dense,
    eliminate_unit_pivots,
    invariant_factors,
    rank_mod_p,
    smith_diagonal_dense,
)
from warpgroups.spaces import build_cycle_net, build_torus_net, make_affine_generator, warp

# six-vertex triangulation of the real projective plane
RP2_TRIANGLES = [
    (0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 5), (0, 1, 5),
    (1, 2, 4), (2, 3, 5), (1, 3, 4), (2, 4, 5), (1, 3, 5),
]


def cycle_graph(n):
    return graph_from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n):
    return graph_from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def complex_of(g, theta=1):
    return build_complex(g, theta)


matrices = st.integers(1, 4).flatmap(
    lambda m: st.integers(1, 4).flatmap(
        lambda n: st.lists(st.lists(st.integers(-6, 6), min_size=n, max_size=n), min_size=m, max_size=m)
    )
)


class TestAbelianInvariants:
    def test_canonical_form(self):
        a = AbelianInvariants(1, (2, 4))
        assert str(a) == "Z + Z/2 + Z/4"
        assert AbelianInvariants.from_json(a.to_json()) == a
        with pytest.raises(ValueError):
            AbelianInvariants(0, (4, 2))
        with pytest.raises(ValueError):
            AbelianInvariants(0, (1,))

    def test_from_factors(self):
        assert AbelianInvariants.from_factors(3, [1, 2, 0]) == AbelianInvariants(1, (2,))
        assert str(AbelianInvariants(0)) == "0"


class TestSmithForm:
    def test_small_examples(self):
        assert smith_diagonal_dense([[2, 4], [6, 8]]) == [2, 4]
        assert smith_diagonal_dense([[-1, 4]]) == [1]
        assert abelian_invariants([[0, 5]], 2) == AbelianInvariants(1, (5,))

    @settings(max_examples=150)
    @given(matrices)
    def test_dense_matches_determinantal_divisors(self, M):
        assert smith_diagonal_dense(M) == determinantal_invariants(M)

    @settings(max_examples=150)
    @given(matrices)
    def test_sparse_route_matches_dense(self, M):
        ncols = len(M[0])
        assert abelian_invariants(M, ncols) == abelian_invariants_dense(M, ncols)

    @settings(max_examples=100)
    @given(matrices)
    def test_rank_oracles(self, M):
        ncols = len(M[0])
        r = rational_rank(M, ncols)
        assert rank_mod_p(M) == r
        assert len(invariant_factors(M)) == r
        assert RationalQuotient(M, ncols).dimension == ncols - r

    def test_unit_pivot_count(self):
        pivots, rest = eliminate_unit_pivots([{0: 1, 1: 2}, {1: 3, 2: 1}, {0: 2, 2: 4}])
        assert pivots == 2
        assert invariant_factors([{0: 1, 1: 2}, {1: 3, 2: 1}, {0: 2, 2: 4}]) == determinantal_invariants(
            [[1, 2, 0], [0, 3, 1], [2, 0, 4]]
        )

    def test_rational_quotient_coordinates(self):
        q = RationalQuotient([{0: 1, 1: -1}], 2)
        assert q.dimension == 1
        assert q.coordinates({0: 1}) == q.coordinates({1: 1})


class TestCells:
    def test_small_graphs(self):
        tri, sq = two_cells(complete_graph(4))
        assert (len(tri), len(sq)) == (4, 0)
        assert two_cells(cycle_graph(4)) == ([], [(0, 1, 2, 3)])
        assert two_cells(cycle_graph(5)) == ([], [])

    def test_cells_match_networkx_cycles(self):
        rng = random.Random(3)
        for _ in range(20):
            n = rng.randint(4, 9)
            edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.45]
            g = graph_from_edges(n, edges)
            G = g.to_networkx()
            tri, sq = two_cells(g, max_cells=10**6)
            expected_tri = sorted(tuple(sorted(c)) for c in nx.enumerate_all_cliques(G) if len(c) == 3)
            assert sorted(tri) == expected_tri
            chordless4 = set()
            for cyc in nx.chordless_cycles(G, length_bound=4):
                if len(cyc) == 4:
                    chordless4.add(frozenset(cyc))
            assert {frozenset(s) for s in sq} == chordless4
            for a, b, c, d in sq:
                assert a == min(a, b, c, d) and b < d
                assert all(y in g.adjacency[x] for x, y in ((a, b), (b, c), (c, d), (d, a)))

    def test_cell_guard(self):
        with pytest.raises(GuardError, match="cell count guard"):
            two_cells(complete_graph(12), max_cells=50)

    def test_boundary_of_boundary(self):
        c = complex_of(complete_graph(5))
        for cell, row in zip(c.cells(), boundary_rows(c)):
            # each boundary is a cycle: its image under the vertex boundary vanishes
            total = [0] * c.n
            for j, s in row.items():
                u, v = c.edges[j]
                total[v] += s
                total[u] -= s
            assert not any(total)


class TestH1:
    def test_circle(self):
        c = complex_of(cycle_graph(5))
        assert h1_invariants(c) == AbelianInvariants(1)
        assert str(presentation(c)) == "<x0 | >"

    def test_complete_graph(self):
        assert h1_invariants(complex_of(complete_graph(4))).is_trivial

    def test_filled_square(self):
        c = complex_of(cycle_graph(4))
        p = presentation(c)
        assert p.generators == ("x0",) and [str(r) for r in p.relators] == ["x0"]
        assert certify_trivial(p)

    def test_projective_plane(self):
        g = graph_from_edges(6, [e for t in RP2_TRIANGLES for e in ((t[0], t[1]), (t[1], t[2]), (t[0], t[2]))])
        c = ScaleComplex(g, RP2_TRIANGLES, [])
        h = h1_invariants(c)
        assert h == AbelianInvariants(0, (2,))
        rows, E = boundary_rows(c), len(c.edges)
        # rank drops by one mod 2 only: a single Z/2 and no free part
        assert rational_rank(rows, E) == E - 6 + 1
        assert rank_mod(rows, E, 2) == E - 6 and rank_mod(rows, E, 3) == E - 6 + 1
        assert abelianization(presentation(c)) == h

    def test_disconnected(self):
        g = graph_from_edges(4, [(0, 1), (2, 3)])
        with pytest.raises(ScaleError):
            build_complex(g, 1)

    def test_theta_graph_contains_mesh_and_jumps(self):
        net = build_cycle_net(8)
        s = make_affine_generator(net, "s", 1, Fraction(3, 8))
        g = theta_graph(warp(net, [s], 4), 1)
        for v in range(8):
            assert (v + 1) % 8 in g.adjacency[v]
            assert (v + 3) % 8 in g.adjacency[v]

    def test_theta_graph_disconnected(self):
        net = build_cycle_net(8)
        with pytest.raises(ScaleError, match="scale too small"):
            theta_graph(warp(net, [], 16), 1)

    def test_large_theta_is_complete(self):
        net = build_cycle_net(10)
        g = theta_graph(warp(net, [], 3), 2)
        assert g.edge_count == 45

    def test_tie_is_included(self):
        net = build_cycle_net(8)
        g = theta_graph(warp(net, [], 8), 1)
        assert g.edges == sorted({(min(v, (v + 1) % 8), max(v, (v + 1) % 8)) for v in range(8)})

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**6))
    def test_betti_matches_rational_oracle(self, seed):
        rng = random.Random(seed)
        n = rng.randint(3, 12)
        edges = {(i, (i + 1) % n) for i in range(n)}
        edges |= {(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.3}
        c = complex_of(graph_from_edges(n, edges))
        E = len(c.edges)
        rank = rational_rank(boundary_rows(c), E) if c.cell_count else 0
        h = h1_invariants(c)
        assert h.betti == E - n + 1 - rank
        assert abelianization(presentation(c)) == h

    def test_basepoint_independence(self):
        net = build_cycle_net(60)
        s = make_affine_generator(net, "s", 1, Fraction(1, 4))
        wg = warp(net, [s], 50)
        g = theta_graph(wg, 1)
        invariants = {abelianization(presentation(build_complex(g, 1, basepoint=b))) for b in (0, 7, 31)}
        assert invariants == {AbelianInvariants(1)}

    def test_spanning_tree(self):
        g = complete_graph(5)
        tree = spanning_tree(g, 0)
        assert tree == {(0, 1), (0, 2), (0, 3), (0, 4)}

    def test_tietze_preserves_invariants_on_complexes(self):
        net = build_torus_net(6, 2)
        wg = warp(net, [], 6)
        c = build_complex(wg, 1)
        p = presentation(c)
        simp = tietze_simplify(p).presentation
        assert abelianization(simp) == abelianization(p) == h1_invariants(c) == AbelianInvariants(2)
        assert len(simp.generators) <= len(p.generators)


class TestInducedMap:
    def test_identity(self):
        net = build_cycle_net(20)
        c = build_complex(warp(net, [], 10), 1)
        m = induced_h1_map(c, c)
        assert m.surjective and m.matrix == [[1]] and m.rational_rank == 1

    def test_to_trivial_target(self):
        net = build_cycle_net(20)
        wg = warp(net, [], 10)
        m = induced_h1_map(build_complex(wg, 1), build_complex(wg, 5))
        assert m.surjective and m.target.is_trivial and m.matrix == []

    def test_vertex_mismatch(self):
        a = complex_of(cycle_graph(5))
        b = complex_of(cycle_graph(6))
        with pytest.raises(ValueError):
            induced_h1_map(a, b)

    def test_wrong_direction(self):
        net = build_cycle_net(20)
        wg = warp(net, [], 10)
        with pytest.raises(ValueError):
            induced_h1_map(build_complex(wg, 5), build_complex(wg, 1))

    def test_rank_against_oracle(self):
        net = build_cycle_net(30)
        s = make_affine_generator(net, "s", 1, Fraction(7, 30))
        wg = warp(net, [s], 25)
        m = induced_h1_map(build_complex(wg, 1), build_complex(wg, 2))
        assert m.surjective
        assert m.rational_rank == (rational_rank(m.matrix, len(m.matrix[0])) if m.matrix and m.matrix[0] else 0)

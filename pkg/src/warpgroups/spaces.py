"""Finite nets of circles and tori, generator actions, and warped metrics.

A net is the grid ``(Z/N)^d`` with the l1 mesh metric; every mesh edge has
length ``total_length / N``.  Generators act by exact permutations of the
vertices.  Warping by a set of generators at scale ``t`` adds a unit-weight
jump edge ``{v, s(v)}`` for every generator ``s`` while the mesh edges are
scaled to ``t * mesh_step``; the warped distance is the shortest-path metric of
the resulting graph.

Distances are exact rationals by default.  Internally all weights are scaled to
integers by a common denominator, so Dijkstra runs on Python ints and the
results are converted back to :class:`fractions.Fraction`.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from . import limits
from .errors import GuardError, ScaleError
from .words import AffineLift, Word, det, reduced_words, word_array

FLOAT_TOL = 1e-12

Number = Fraction | float


def as_fraction(x) -> Fraction:
    """Convert ints, strings like ``"3/8"`` and Fractions; floats must be exact."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        f = Fraction(x)
        if f.denominator > 2**20:
            raise ValueError(f"float {x!r} is not an exact rational; pass a string like '1/3'")
        return f
    return Fraction(x)


# ---------------------------------------------------------------------------
# nets


@dataclass(frozen=True)
class NetSpace:
    """The grid ``(Z/N)^d`` with per-axis length ``total_length``.

    Vertices are indexed lexicographically with the first coordinate most
    significant.
    """

    kind: str
    dimension: int
    resolution: int
    total_length: Fraction = Fraction(1)

    @property
    def vertex_count(self) -> int:
        return self.resolution**self.dimension

    @property
    def mesh_step(self) -> Fraction:
        return self.total_length / self.resolution

    @cached_property
    def coords(self) -> np.ndarray:
        """Array of shape ``(n, d)`` with the coordinates of every vertex."""
        N, d = self.resolution, self.dimension
        idx = np.arange(self.vertex_count, dtype=np.int64)
        out = np.empty((self.vertex_count, d), dtype=np.int64)
        for axis in range(d - 1, -1, -1):
            out[:, axis] = idx % N
            idx = idx // N
        return out

    def coordinates(self, v: int) -> tuple[int, ...]:
        self._check(v)
        out = []
        for _ in range(self.dimension):
            v, r = divmod(v, self.resolution)
            out.append(r)
        return tuple(reversed(out))

    def index(self, x: Sequence[int]) -> int:
        v = 0
        for c in x:
            v = v * self.resolution + (int(c) % self.resolution)
        return v

    def index_array(self, X: np.ndarray) -> np.ndarray:
        X = np.mod(X, self.resolution)
        v = np.zeros(X.shape[0], dtype=np.int64)
        for axis in range(self.dimension):
            v = v * self.resolution + X[:, axis]
        return v

    def _check(self, v: int) -> None:
        if not 0 <= v < self.vertex_count:
            raise IndexError(f"vertex {v} out of range for {self.vertex_count} vertices")

    def mesh_neighbors(self, v: int) -> list[int]:
        x = self.coordinates(v)
        out = []
        for axis in range(self.dimension):
            for step in (1, -1):
                y = list(x)
                y[axis] = (y[axis] + step) % self.resolution
                out.append(self.index(y))
        return out

    def mesh_edges(self) -> list[tuple[int, int]]:
        """Each undirected mesh edge once, as ``(u, v)`` with ``u < v``."""
        X = self.coords
        out = set()
        for axis in range(self.dimension):
            Y = X.copy()
            Y[:, axis] = (Y[:, axis] + 1) % self.resolution
            nb = self.index_array(Y)
            for u, v in zip(range(self.vertex_count), nb.tolist()):
                out.add((min(u, v), max(u, v)))
        return sorted(out)

    def steps_between(self, U, V) -> np.ndarray:
        """Mesh-step (hop) distance between vertex arrays ``U`` and ``V``."""
        X = self.coords[np.asarray(U)]
        Y = self.coords[np.asarray(V)]
        diff = np.abs(X - Y) % self.resolution
        return np.minimum(diff, self.resolution - diff).sum(axis=-1)

    def net_distance(self, u: int, v: int) -> Fraction:
        """Unscaled mesh metric (shortest path over mesh edges)."""
        self._check(u)
        self._check(v)
        return self.mesh_step * int(self.steps_between([u], [v])[0])

    def with_resolution(self, N: int, max_vertices: int | None = None) -> "NetSpace":
        if self.kind == "cycle":
            return build_cycle_net(N, self.total_length, max_vertices=max_vertices)
        return build_torus_net(N, self.dimension, self.total_length, max_vertices=max_vertices)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "d": self.dimension,
            "N": self.resolution,
            "total_length": str(self.total_length),
            "vertex_count": self.vertex_count,
            "mesh_step": str(self.mesh_step),
        }


def _check_cap(count: int, max_vertices: int | None) -> None:
    cap = limits.resolve("max_vertices", max_vertices)
    if count > cap:
        raise GuardError(f"resolution/size guard: {count} vertices exceed cap {cap}")


def build_cycle_net(N: int, total_length=1, max_vertices: int | None = None) -> NetSpace:
    """Cycle ``Z/N`` with mesh step ``total_length / N``."""
    if N < 3:
        raise ValueError("degenerate net: need N >= 3")
    L = as_fraction(total_length)
    if L <= 0:
        raise ValueError("total_length must be positive")
    _check_cap(N, max_vertices)
    return NetSpace("cycle", 1, int(N), L)


def build_torus_net(N: int, d: int, total_length=1, max_vertices: int | None = None) -> NetSpace:
    """Torus grid ``(Z/N)^d`` with the l1 mesh metric; ``d = 1`` gives a cycle."""
    if d < 1:
        raise ValueError("dimension must be positive")
    if d > 3:
        raise GuardError("resolution/size guard: dimension above 3 is not supported")
    if d == 1:
        return build_cycle_net(N, total_length, max_vertices)
    if N < 3:
        raise ValueError("degenerate net: need N >= 3")
    L = as_fraction(total_length)
    if L <= 0:
        raise ValueError("total_length must be positive")
    _check_cap(N**d, max_vertices)
    return NetSpace("torus", int(d), int(N), L)


# ---------------------------------------------------------------------------
# generators


@dataclass(frozen=True)
class GeneratorAction:
    """A bijection of net vertices, optionally with an exact affine lift."""

    label: str
    permutation: tuple[int, ...]
    affine_lift: AffineLift | None = None

    def __post_init__(self):
        perm = tuple(int(x) for x in self.permutation)
        if sorted(perm) != list(range(len(perm))):
            raise ValueError(f"generator {self.label!r}: not a bijection")
        object.__setattr__(self, "permutation", perm)

    @cached_property
    def array(self) -> np.ndarray:
        arr = np.asarray(self.permutation, dtype=np.int64)
        arr.setflags(write=False)
        return arr

    @cached_property
    def inverse_array(self) -> np.ndarray:
        inv = np.empty_like(self.array)
        inv[self.array] = np.arange(self.array.size)
        inv.setflags(write=False)
        return inv

    @property
    def inverse(self) -> tuple[int, ...]:
        return tuple(int(x) for x in self.inverse_array)

    def __call__(self, v: int) -> int:
        return self.permutation[v]

    def is_isometry(self) -> bool:
        """True when the lift is a signed permutation matrix (an l1 isometry)."""
        if self.affine_lift is None:
            return False
        A = self.affine_lift.A
        for row in A:
            if sum(abs(x) for x in row) != 1:
                return False
        for col in zip(*A):
            if sum(abs(x) for x in col) != 1:
                return False
        return True


def _as_matrix(A, d: int) -> tuple[tuple[int, ...], ...]:
    if isinstance(A, int):
        A = [[A]]
    M = tuple(tuple(int(x) for x in row) for row in A)
    if len(M) != d or any(len(row) != d for row in M):
        raise ValueError(f"matrix must be {d}x{d}")
    return M


def make_affine_generator(net: NetSpace, label: str, A, b) -> GeneratorAction:
    """Generator ``v -> A v + N b (mod N)``; ``b`` is in units of the period."""
    d, N = net.dimension, net.resolution
    M = _as_matrix(A, d)
    if not isinstance(b, (list, tuple)):
        b = [b]
    bb = tuple(as_fraction(x) for x in b)
    if len(bb) != d:
        raise ValueError(f"translation must have {d} entries")
    shift = []
    for x in bb:
        y = x * N
        if y.denominator != 1:
            raise ValueError(f"action not representable on net: N*b = {y} is not integral")
        shift.append(int(y))
    if math.gcd(det(M) % N, N) != 1:
        raise ValueError("not a bijection: matrix is singular mod N")
    X = net.coords
    Y = X @ np.asarray(M, dtype=np.int64).T + np.asarray(shift, dtype=np.int64)
    perm = net.index_array(Y)
    return GeneratorAction(label, tuple(perm.tolist()), AffineLift(M, bb))


def make_permutation_generator(n: int | NetSpace, label: str, images: Sequence[int]) -> GeneratorAction:
    """Generator given by an explicit image list (no affine lift)."""
    count = n if isinstance(n, int) else n.vertex_count
    if len(images) != count:
        raise ValueError(f"image list has {len(images)} entries, expected {count}")
    return GeneratorAction(label, tuple(images), None)


def rebuild_generators(net: NetSpace, generators: Iterable[GeneratorAction]) -> list[GeneratorAction]:
    """Re-realize affine generators on another resolution of the same space."""
    out = []
    for g in generators:
        if g.affine_lift is None:
            raise ValueError(f"generator {g.label!r} has no affine lift and cannot be moved to another net")
        out.append(make_affine_generator(net, g.label, g.affine_lift.A, g.affine_lift.b))
    return out


def denominator_lcm(generators: Iterable[GeneratorAction]) -> int:
    out = 1
    for g in generators:
        if g.affine_lift is not None:
            for x in g.affine_lift.b:
                out = math.lcm(out, x.denominator)
    return out


# ---------------------------------------------------------------------------
# weighted graphs


class Edge(NamedTuple):
    u: int
    v: int
    weight: Fraction
    kind: str
    label: str


def _lcm_denominators(values: Iterable[Fraction]) -> int:
    out = 1
    for x in values:
        out = math.lcm(out, Fraction(x).denominator)
    return out


class WeightedGraph:
    """Undirected graph with nonnegative rational weights and cached Dijkstra.

    ``edges`` keeps every edge as given (jump loops and parallel edges
    included) for export and multigraph views; distances use the simple graph
    with the minimum weight per vertex pair.
    """

    def __init__(self, n: int, edges: Sequence[Edge], float_mode: bool = False):
        self.n = int(n)
        self.edges = tuple(edges)
        self.float_mode = bool(float_mode)
        self.scale = _lcm_denominators(e.weight for e in self.edges)
        best: list[dict[int, int]] = [dict() for _ in range(self.n)]
        for e in self.edges:
            if e.u == e.v:
                continue
            w = int(e.weight * self.scale)
            if best[e.u].get(e.v, w + 1) > w:
                best[e.u][e.v] = w
                best[e.v][e.u] = w
        if self.float_mode:
            self._adj = [sorted((v, float(Fraction(w, self.scale))) for v, w in d.items()) for d in best]
        else:
            self._adj = [sorted(d.items()) for d in best]
        self._cache: dict[int, list] = {}

    # -- internal units -------------------------------------------------
    def _to_internal(self, x) -> int | float:
        if self.float_mode:
            return float(x) + FLOAT_TOL
        return math.floor(as_fraction(x) * self.scale)

    def _from_internal(self, x):
        if self.float_mode:
            return float(x)
        return Fraction(x, self.scale)

    def _check(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise IndexError(f"vertex {v} out of range for {self.n} vertices")

    def _dijkstra(self, src: int, cutoff=None) -> dict[int, int | float]:
        dist = {src: 0}
        heap = [(0, src)]
        adj = self._adj
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist.get(u, d):
                continue
            for v, w in adj[u]:
                nd = d + w
                if cutoff is not None and nd > cutoff:
                    continue
                if nd < dist.get(v, nd + 1):
                    dist[v] = nd
                    heapq.heappush(heap, (nd, v))
        return dist

    def sssp(self, src: int) -> list:
        """Distances from ``src`` to every vertex (cached)."""
        self._check(src)
        if src not in self._cache:
            dist = self._dijkstra(src)
            if len(dist) != self.n:
                raise ScaleError("graph is disconnected")
            self._cache[src] = [self._from_internal(dist[v]) for v in range(self.n)]
        return self._cache[src]

    def distance(self, u: int, v: int):
        self._check(u)
        self._check(v)
        if v in self._cache and u not in self._cache:
            u, v = v, u
        return self.sssp(u)[v]

    def ball(self, src: int, radius) -> dict[int, Fraction | float]:
        """Vertices within ``radius`` of ``src`` (closed ball) with distances."""
        self._check(src)
        dist = self._dijkstra(src, self._to_internal(radius))
        return {v: self._from_internal(d) for v, d in dist.items()}

    def neighbors_within(self, src: int, radius) -> list[int]:
        """Sorted vertices ``v != src`` with distance at most ``radius``."""
        dist = self._dijkstra(src, self._to_internal(radius))
        return sorted(v for v in dist if v != src)

    def adjacency(self) -> list[list[int]]:
        return [[v for v, _ in row] for row in self._adj]


class WarpedGraph(WeightedGraph):
    """A net with mesh edges at weight ``t * mesh_step`` and unit jump edges."""

    def __init__(self, net: NetSpace, t, generators: Sequence[GeneratorAction], float_mode: bool = False):
        self.net = net
        self.t = as_fraction(t)
        if self.t <= 0:
            raise ValueError("scale t must be positive")
        self.generators = tuple(generators)
        n = net.vertex_count
        labels = [g.label for g in self.generators]
        if len(set(labels)) != len(labels):
            raise ValueError("generator labels must be distinct")
        edges: list[Edge] = []
        w_mesh = self.t * net.mesh_step
        for u, v in net.mesh_edges():
            edges.append(Edge(u, v, w_mesh, "mesh", ""))
        for g in self.generators:
            if len(g.permutation) != n:
                raise ValueError(f"generator {g.label!r} does not act on this net")
            for v in range(n):
                edges.append(Edge(v, g.permutation[v], Fraction(1), "jump", g.label))
        super().__init__(n, edges, float_mode)

    @property
    def actions(self) -> dict[str, GeneratorAction]:
        return {g.label: g for g in self.generators}

    @property
    def mesh_weight(self) -> Fraction:
        return self.t * self.net.mesh_step


def warp(net: NetSpace, S: Sequence[GeneratorAction], t, float_mode: bool = False) -> WarpedGraph:
    """Warped graph of ``net`` under generators ``S`` at scale ``t``."""
    return WarpedGraph(net, t, S, float_mode=float_mode)


def warped_distance(wg: WeightedGraph, u: int, v: int):
    """Shortest-path warped distance (exact Fraction, or float in float mode)."""
    return wg.distance(u, v)


# ---------------------------------------------------------------------------
# C_w sets, r_w and t0


def _actions_map(actions) -> dict[str, GeneratorAction]:
    if isinstance(actions, Mapping):
        return dict(actions)
    return {g.label: g for g in actions}


def _all_affine(actions: Mapping[str, GeneratorAction], w: Word) -> bool:
    return all(actions[a].affine_lift is not None for a in w.labels())


def _refined(net: NetSpace, actions: Mapping[str, GeneratorAction], w: Word):
    """Half-mesh subdivision of ``net`` with the word's generators moved onto it."""
    fine = NetSpace(net.kind, net.dimension, 2 * net.resolution, net.total_length)
    moved = {a: make_affine_generator(fine, a, actions[a].affine_lift.A, actions[a].affine_lift.b) for a in w.labels()}
    return fine, moved


def _thicken(net: NetSpace, points: np.ndarray, k: int) -> np.ndarray:
    """Boolean mask of the l1 neighbourhood of radius ``k`` hops."""
    mask = points.copy()
    frontier = np.nonzero(mask)[0]
    X = net.coords
    N = net.resolution
    for _ in range(k):
        if frontier.size == 0 or mask.all():
            break
        nbrs = []
        for axis in range(net.dimension):
            for step in (1, -1):
                Y = X[frontier].copy()
                Y[:, axis] = (Y[:, axis] + step) % N
                nbrs.append(net.index_array(Y))
        cand = np.unique(np.concatenate(nbrs))
        cand = cand[~mask[cand]]
        mask[cand] = True
        frontier = cand
    return mask


def _cw_mask(net: NetSpace, actions: Mapping[str, GeneratorAction], w: Word, x: int, k: int) -> np.ndarray:
    mask = np.zeros(net.vertex_count, dtype=bool)
    mask[x] = True
    mask = _thicken(net, mask, k)
    for a, e in w.letters:
        g = actions[a]
        arr = g.array if e == 1 else g.inverse_array
        img = np.zeros_like(mask)
        img[arr[mask]] = True
        mask = _thicken(net, img, k)
    return mask


def _half_steps(net: NetSpace, r) -> int:
    r = as_fraction(r)
    if r < 0:
        raise ValueError("radius must be nonnegative")
    return math.floor(r / (net.mesh_step / 2))


def cw_sets(net: NetSpace, actions, w: Word, x: int, r) -> set[int]:
    """The set ``C_w(x, r)``: start from the closed ball ``B(x, r)`` and, for
    each letter of ``w`` in reading order, apply it and take the closed
    ``r``-neighbourhood in the unscaled net metric.

    When every letter has an affine lift the iteration runs on the half-mesh
    subdivision of the net, so radii on the grid ``k * mesh_step / 2`` are
    resolved exactly; the result is restricted to net vertices.  Pure
    permutation actions fall back to whole mesh steps on the net itself.
    """
    actions = _actions_map(actions)
    net._check(x)
    if not isinstance(w, Word):
        w = Word(tuple(w))
    if _all_affine(actions, w):
        fine, moved = _refined(net, actions, w)
        xf = fine.index([2 * c for c in net.coordinates(x)])
        mask = _cw_mask(fine, moved, w, xf, _half_steps(net, r))
        pts = np.nonzero(mask)[0]
        C = fine.coords[pts]
        even = np.all(C % 2 == 0, axis=1)
        return {int(v) for v in net.index_array(C[even] // 2)}
    k = math.floor(as_fraction(r) / net.mesh_step)
    return {int(v) for v in np.nonzero(_cw_mask(net, actions, w, x, k))[0]}


def _excluded_everywhere(net, actions, w, k, points) -> bool:
    for x in points:
        if _cw_mask(net, actions, w, int(x), k)[int(x)]:
            return False
    return True


def _largest_true(pred, hi: int) -> int:
    """Largest k in [0, hi] with pred(k), given pred(0) and monotone decreasing."""
    lo = 0
    if pred(hi):
        return hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pred(mid):
            lo = mid
        else:
            hi = mid
    return lo


def r_w(net: NetSpace, actions, w: Word, brute_force: bool = False) -> Fraction | None:
    """Largest ``r = k * mesh_step / 2`` with ``x`` outside ``C_w(x, r)`` for all ``x``.

    Returns ``None`` when the reversed word has a fixed vertex.  When all
    generators are l1 isometries the sets are balls and the answer follows
    from the minimal displacement; ``brute_force=True`` forces the set
    iteration (used as a test oracle).
    """
    actions = _actions_map(actions)
    if not isinstance(w, Word):
        w = Word(tuple(w))
    rev = w.reversed()
    arr = word_array(net, actions, rev)
    if np.any(arr == np.arange(arr.size)):
        return None
    half = net.mesh_step / 2
    n = len(w)
    if not _all_affine(actions, w):
        points = range(net.vertex_count)
        hi = net.dimension * net.resolution
        k = _largest_true(lambda k: _excluded_everywhere(net, actions, w, k, points), hi)
        return k * net.mesh_step
    if not brute_force and all(actions[a].is_isometry() for a in w.labels()):
        steps = int(net.steps_between(np.arange(arr.size), arr).min())
        # x not in B_{(n+1)k}(w_rev x) on the subdivision iff (n+1) k < 2 * steps
        k = -(-2 * steps // (n + 1)) - 1
        return k * half
    fine, moved = _refined(net, actions, w)
    points = fine.index_array(2 * net.coords)
    hi = fine.dimension * fine.resolution
    k = _largest_true(lambda k: _excluded_everywhere(fine, moved, w, k, points), hi)
    return k * half


@dataclass
class T0Estimate:
    value: Fraction
    worst_word: Word | None
    radii: dict[str, Fraction | None] = field(default_factory=dict)


def t0_details(net: NetSpace, actions, theta: int, max_words: int | None = None) -> T0Estimate:
    """``max(4 theta / r_w)`` over reduced words ``|w| <= 4 theta`` whose reversal
    is fixed-point free, together with 1."""
    if theta < 1:
        raise ValueError("theta must be at least 1")
    actions = _actions_map(actions)
    labels = sorted(actions)
    best = Fraction(1)
    worst = None
    radii: dict[str, Fraction | None] = {}
    if not labels:
        return T0Estimate(best, None, radii)
    for w in reduced_words(labels, 4 * theta, max_words):
        r = r_w(net, actions, w)
        radii[str(w)] = r
        if r is None:
            continue
        if r == 0:
            raise ScaleError(f"net too coarse: r_w vanishes for word {w}; refine the net")
        val = Fraction(4 * theta) / r
        if val > best:
            best, worst = val, w
    return T0Estimate(best, worst, radii)


def t0_estimate(net: NetSpace, actions, theta: int, max_words: int | None = None) -> Fraction:
    return t0_details(net, actions, theta, max_words).value


# ---------------------------------------------------------------------------
# mesh contract and the automatic scale rule


def lift_norm(generators: Iterable[GeneratorAction]) -> int:
    """Largest l1 operator norm of a generator matrix or its inverse (1 if none)."""
    out = 1
    for g in generators:
        if g.affine_lift is None:
            continue
        for M in (g.affine_lift.A, g.affine_lift.inverse().A):
            out = max(out, max(sum(abs(M[i][j]) for i in range(len(M))) for j in range(len(M))))
    return out


def mesh_resolution(net: NetSpace, generators: Sequence[GeneratorAction], t, theta, rho=1) -> int:
    """Smallest multiple ``N'`` of ``net.resolution`` with ``t * L / N' <= rho * theta``.

    Multiples of the base resolution keep every affine generator exact.
    """
    t, theta, rho = as_fraction(t), as_fraction(theta), as_fraction(rho)
    if not 0 < rho <= 1:
        raise ValueError("rho must lie in (0, 1]")
    need = math.ceil(t * net.total_length / (rho * theta))
    N0 = net.resolution
    N = max(N0, -(-need // N0) * N0)
    return N


@dataclass
class AutoScale:
    """Result of the automatic scale rule."""

    t: Fraction
    net: NetSpace
    generators: list[GeneratorAction]
    t0: Fraction
    t0_base: Fraction
    worst_word: str | None
    iterations: int

    def to_json(self) -> dict:
        return {
            "t": str(self.t),
            "N": self.net.resolution,
            "t0_estimate": str(self.t0),
            "t0_estimate_base_net": str(self.t0_base),
            "worst_word": self.worst_word,
            "iterations": self.iterations,
            "mesh_weight": str(self.t * self.net.mesh_step),
        }


def auto_t0(
    net: NetSpace,
    generators: Sequence[GeneratorAction],
    theta: int,
    rho=None,
    max_vertices: int | None = None,
    max_words: int | None = None,
    max_iterations: int = 12,
) -> AutoScale:
    """Pick ``t >= t0_estimate`` and a resolution satisfying the mesh contract.

    ``t`` is the smallest integer that is at least the estimate and makes every
    nontrivial loop of the base longer than ``4 theta`` (``t * L > 4 theta``);
    the resolution is the smallest multiple of the base one with
    ``t * mesh_step <= rho * theta``.  The estimate is recomputed on the
    refined net until the resolution stops growing.  When ``r_w`` vanishes on a
    net the resolution is doubled.  By default ``rho = 1 / lift_norm``, so a
    generator that stretches mesh edges by a factor ``k`` still maps every mesh
    edge to a pair at warped distance at most ``theta``.
    """
    theta = int(theta)
    rho = Fraction(1, lift_norm(generators)) if rho is None else as_fraction(rho)
    L = net.total_length
    gens = list(generators)
    cur_net, cur_gens = net, gens
    t0_base = None
    for it in range(1, max_iterations + 1):
        try:
            est = t0_details(cur_net, cur_gens, theta, max_words)
        except ScaleError:
            cur_net = cur_net.with_resolution(2 * cur_net.resolution, max_vertices)
            cur_gens = rebuild_generators(cur_net, gens)
            continue
        if t0_base is None:
            t0_base = est.value
        t = Fraction(math.ceil(est.value))
        if t * L <= 4 * theta:
            t = Fraction(math.floor(4 * theta / L) + 1)
        need = mesh_resolution(cur_net, cur_gens, t, theta, rho)
        if need <= cur_net.resolution:
            worst = str(est.worst_word) if est.worst_word is not None else None
            result = AutoScale(t, cur_net, cur_gens, est.value, t0_base, worst, it)
            return _shrink(result, net, gens, theta, rho, max_vertices, max_words)
        cur_net = cur_net.with_resolution(need, max_vertices)
        cur_gens = rebuild_generators(cur_net, gens)
    raise ScaleError("automatic scale rule did not converge")


def _shrink(result: AutoScale, base: NetSpace, gens, theta, rho, max_vertices, max_words) -> AutoScale:
    """Try the smallest admissible multiple of the base resolution for the chosen t."""
    N = mesh_resolution(base, gens, result.t, theta, rho)
    if N >= result.net.resolution:
        return result
    net = base.with_resolution(N, max_vertices)
    moved = rebuild_generators(net, gens)
    try:
        est = t0_details(net, moved, theta, max_words)
    except ScaleError:
        return result
    if est.value > result.t:
        return result
    worst = str(est.worst_word) if est.worst_word is not None else None
    return AutoScale(result.t, net, moved, est.value, result.t0_base, worst, result.iterations + 1)

"""Spectral gap and conductance of finite multigraphs.

Conventions: the normalized Laplacian ``I - D^{-1/2} M D^{-1/2}``, where ``M``
counts parallel edges with multiplicity and a loop adds 2 to its diagonal
entry (so loops raise the degree but never help connectivity).  Conductance of
``S`` is ``|boundary(S)| / vol(S)`` for ``vol(S) <= vol(V)/2``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

DENSE_LIMIT = 200
BRUTE_FORCE_LIMIT = 20


@dataclass(frozen=True)
class MultiGraph:
    """Undirected multigraph on ``range(n)``; loops allowed."""

    n: int
    edges: tuple[tuple[int, int], ...]

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "MultiGraph":
        return cls(int(n), tuple((int(u), int(v)) for u, v in edges))

    @classmethod
    def simple(cls, n: int, adjacency: Sequence[Iterable[int]]) -> "MultiGraph":
        return cls(n, tuple((u, v) for u in range(n) for v in sorted(adjacency[u]) if u < v))

    @classmethod
    def complete(cls, n: int) -> "MultiGraph":
        return cls(n, tuple((u, v) for u in range(n) for v in range(u + 1, n)))

    @classmethod
    def cycle(cls, n: int) -> "MultiGraph":
        return cls(n, tuple((v, (v + 1) % n) for v in range(n)))

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def adjacency_matrix(self) -> scipy.sparse.csr_matrix:
        rows, cols = [], []
        for u, v in self.edges:
            rows += [u, v]
            cols += [v, u]
        data = np.ones(len(rows), dtype=np.float64)
        return scipy.sparse.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))

    def neighbor_sets(self) -> list[set[int]]:
        adj = [set() for _ in range(self.n)]
        for u, v in self.edges:
            if u != v:
                adj[u].add(v)
                adj[v].add(u)
        return adj

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        adj = self.neighbor_sets()
        seen = {0}
        queue = deque([0])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        return len(seen) == self.n

    def diameter(self) -> int:
        adj = self.neighbor_sets()
        best = 0
        for s in range(self.n):
            dist = {s: 0}
            queue = deque([s])
            while queue:
                u = queue.popleft()
                for v in adj[u]:
                    if v not in dist:
                        dist[v] = dist[u] + 1
                        queue.append(v)
            if len(dist) != self.n:
                raise ValueError("graph is disconnected")
            best = max(best, max(dist.values()))
        return best


def _require_connected(g: MultiGraph) -> None:
    if not g.is_connected():
        raise ValueError("graph is disconnected (lambda2 = 0); spectral gap undefined")


def normalized_laplacian_dense(g: MultiGraph) -> np.ndarray:
    M = g.adjacency_matrix().toarray()
    deg = g.degrees().astype(float)
    inv = 1.0 / np.sqrt(deg)
    return np.eye(g.n) - inv[:, None] * M * inv[None, :]


def lambda2_dense(g: MultiGraph) -> float:
    """Reference value from a dense symmetric eigensolver."""
    _require_connected(g)
    vals = scipy.linalg.eigh(normalized_laplacian_dense(g), eigvals_only=True)
    return float(vals[1])


def lambda2(g: MultiGraph, tol: float = 1e-9, seed: int = 0, method: str = "auto") -> float:
    """Second smallest eigenvalue of the normalized Laplacian.

    ``method="dense"`` uses a full symmetric eigensolver; ``"iterative"`` runs
    Lanczos on ``2I - L`` with the trivial eigenvector ``D^{1/2} 1`` deflated,
    from a start vector drawn with ``seed``.  ``"auto"`` picks dense up to
    ``DENSE_LIMIT`` vertices.
    """
    _require_connected(g)
    if g.n < 2:
        raise ValueError("need at least two vertices")
    if method == "auto":
        method = "dense" if g.n <= DENSE_LIMIT else "iterative"
    if method == "dense":
        return lambda2_dense(g)
    M = g.adjacency_matrix()
    deg = g.degrees().astype(float)
    inv = 1.0 / np.sqrt(deg)
    S = scipy.sparse.diags(inv) @ M @ scipy.sparse.diags(inv)
    v1 = np.sqrt(deg)
    v1 /= np.linalg.norm(v1)

    def matvec(x):
        x = np.asarray(x).ravel()
        # (2I - L) x = x + S x ; remove the trivial direction (eigenvalue 2)
        y = x + S @ x
        return y - 2.0 * v1 * (v1 @ x)

    op = scipy.sparse.linalg.LinearOperator((g.n, g.n), matvec=matvec, dtype=np.float64)
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(g.n)
    vals = scipy.sparse.linalg.eigsh(op, k=1, which="LA", v0=v0, tol=min(tol, 1e-12), maxiter=100 * g.n)[0]
    return float(2.0 - vals[0])


def fiedler_vector(g: MultiGraph, seed: int = 0) -> np.ndarray:
    """``D^{-1/2}`` times an eigenvector for ``lambda2`` (deterministic sign)."""
    _require_connected(g)
    L = normalized_laplacian_dense(g)
    vals, vecs = scipy.linalg.eigh(L)
    x = vecs[:, 1] / np.sqrt(g.degrees().astype(float))
    k = int(np.argmax(np.abs(x) > 1e-12))
    if x[k] < 0:
        x = -x
    return x


def _cut_and_volume(g: MultiGraph, members: set[int]) -> tuple[int, int]:
    deg = g.degrees()
    vol = int(sum(deg[v] for v in members))
    cut = sum(1 for u, v in g.edges if (u in members) != (v in members))
    return cut, vol


def conductance(g: MultiGraph, members: Iterable[int]) -> Fraction:
    """``|boundary(S)| / min(vol S, vol complement)``."""
    S = set(members)
    cut, vol = _cut_and_volume(g, S)
    total = int(g.degrees().sum())
    denom = min(vol, total - vol)
    if denom == 0:
        raise ValueError("conductance undefined for an empty side")
    return Fraction(cut, denom)


@dataclass(frozen=True)
class CheegerResult:
    value: Fraction
    witness: tuple[int, ...]


def cheeger_exact(g: MultiGraph) -> CheegerResult:
    """Exact conductance by exhausting all vertex subsets (``n <= 20``)."""
    if g.n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"{g.n} vertices: too many for brute force; use sweep bound")
    if g.n < 2:
        raise ValueError("need at least two vertices")
    n = g.n
    masks = np.arange(1, 2**n - 1, dtype=np.int64)
    deg = g.degrees()
    bits = [(masks >> v) & 1 for v in range(n)]
    vol = np.zeros_like(masks)
    for v in range(n):
        vol += bits[v] * int(deg[v])
    cut = np.zeros_like(masks)
    for u, v in g.edges:
        if u != v:
            cut += bits[u] ^ bits[v]
    total = int(deg.sum())
    ok = 2 * vol <= total
    if not ok.any():
        raise ValueError("no admissible subset")
    m_ok, c_ok, v_ok = masks[ok], cut[ok], vol[ok]
    ratio = c_ok / v_ok
    best = ratio.min()
    cand = np.nonzero(ratio <= best + 1e-12)[0]
    exact = min((Fraction(int(c_ok[i]), int(v_ok[i])), int(m_ok[i])) for i in cand)
    witness = tuple(v for v in range(n) if (exact[1] >> v) & 1)
    return CheegerResult(exact[0], witness)


def sweep_cheeger(g: MultiGraph, seed: int = 0) -> CheegerResult:
    """Best conductance among prefixes of the Fiedler order (an upper bound)."""
    _require_connected(g)
    x = fiedler_vector(g, seed)
    order = sorted(range(g.n), key=lambda v: (x[v], v))
    deg = g.degrees()
    total = int(deg.sum())
    pos = {v: i for i, v in enumerate(order)}
    # cut after prefix k: edges with one end at position < k and the other >= k
    delta = np.zeros(g.n + 1, dtype=np.int64)
    for u, v in g.edges:
        if u == v:
            continue
        a, b = sorted((pos[u], pos[v]))
        delta[a + 1] += 1
        delta[b + 1] -= 1
    cuts = np.cumsum(delta)
    best = None
    vol = 0
    for k in range(1, g.n):
        vol += int(deg[order[k - 1]])
        denom = min(vol, total - vol)
        if denom <= 0:
            continue
        h = Fraction(int(cuts[k]), denom)
        if best is None or h < best[0]:
            best = (h, k)
    h, k = best
    prefix = order[:k]
    vol_prefix = sum(int(deg[v]) for v in prefix)
    side = prefix if 2 * vol_prefix <= total else order[k:]
    return CheegerResult(h, tuple(sorted(side)))


@dataclass
class SpectralRow:
    name: str
    vertices: int
    max_degree: int
    diameter: int
    lambda2: float
    cheeger_upper: Fraction
    cheeger_exact: Fraction | None = None
    tolerance: float = 1e-9

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "vertices": self.vertices,
            "max_degree": self.max_degree,
            "diameter": self.diameter,
            "lambda2": self.lambda2,
            "cheeger_upper": str(self.cheeger_upper),
            "cheeger_exact": None if self.cheeger_exact is None else str(self.cheeger_exact),
            "tolerance": self.tolerance,
        }


@dataclass
class SpectralReport:
    rows: list[SpectralRow] = field(default_factory=list)
    floor: float = 0.0
    gap_bounded: bool = True
    degree_bounded: bool = True

    def to_json(self) -> dict:
        return {
            "rows": [r.to_json() for r in self.rows],
            "lambda2_floor": self.floor,
            "gap_bounded": self.gap_bounded,
            "degree_bounded": self.degree_bounded,
        }


def expansion_scan(family: Sequence[tuple[str, MultiGraph]], floor: float = 0.0, tol: float = 1e-9, seed: int = 0) -> SpectralReport:
    """One row per graph plus family flags.

    ``gap_bounded`` means the smallest ``lambda2`` is at least ``floor``;
    ``degree_bounded`` means every member has the same maximal degree.
    """
    rows = []
    for name, g in family:
        lam = lambda2(g, tol, seed)
        up = sweep_cheeger(g, seed).value
        ex = cheeger_exact(g).value if g.n <= BRUTE_FORCE_LIMIT else None
        rows.append(SpectralRow(name, g.n, int(g.degrees().max()), g.diameter(), lam, up, ex, tol))
    report = SpectralReport(rows, float(floor))
    if rows:
        report.gap_bounded = min(r.lambda2 for r in rows) >= floor
        report.degree_bounded = len({r.max_degree for r in rows}) == 1
    return report

"""Cayley and Schreier graphs of finite quotients.

A finite quotient is described by permutation images of the generators of a
group ``Lambda`` on a finite set: the regular representation of ``Lambda/N``
(Cayley flavor, vertex 0 is the identity) or the action on cosets of a
subgroup (Schreier flavor).  Words act with the last letter applied first, as
everywhere else in the package.

The ``ambient`` field records what ``Lambda`` is, which decides the predicted
kernel: ``{"kind": "free", "rank": n}`` or ``{"kind": "lattice", "rank": d}``
(``Z^d`` with the standard generators mapped to standard generators of
``(Z/n)^d``).
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import limits
from .complex import build_complex, h1_invariants
from .errors import GuardError
from .expanders import MultiGraph
from .groups import Presentation, PredictedGroup
from .snf import AbelianInvariants
from .spaces import Edge, WeightedGraph
from .words import _check_label

FLAVORS = ("cayley", "schreier")
VERDICTS = ("match", "mismatch", "hypothesis-unmet")
NO_PREDICTION = "no prediction available"


@dataclass(frozen=True)
class FiniteQuotientModel:
    """Generator images on ``range(order)`` plus flavor and ambient group."""

    images: Mapping[str, tuple[int, ...]]
    flavor: str = "cayley"
    ambient: Mapping | None = None
    name: str = ""

    def __post_init__(self):
        if self.flavor not in FLAVORS:
            raise ValueError(f"flavor must be one of {FLAVORS}")
        if not self.images:
            raise ValueError("at least one generator is required")
        imgs = {}
        sizes = set()
        for label in sorted(self.images):
            _check_label(label)
            perm = tuple(int(x) for x in self.images[label])
            if sorted(perm) != list(range(len(perm))):
                raise ValueError(f"generator {label!r}: image list is not a permutation")
            imgs[label] = perm
            sizes.add(len(perm))
        if len(sizes) != 1:
            raise ValueError("generator images act on sets of different sizes")
        object.__setattr__(self, "images", imgs)
        if not _is_transitive(imgs):
            raise ValueError("images do not generate a transitive action")

    @property
    def labels(self) -> list[str]:
        return sorted(self.images)

    @property
    def order(self) -> int:
        """Group order (Cayley) or subgroup index (Schreier)."""
        return len(next(iter(self.images.values())))

    def arrays(self) -> dict[str, np.ndarray]:
        return {a: np.asarray(p, dtype=np.int64) for a, p in self.images.items()}

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "flavor": self.flavor,
            "ambient": dict(self.ambient) if self.ambient else None,
            "order": self.order,
            "generators": {a: list(p) for a, p in self.images.items()},
        }


def _is_transitive(images: Mapping[str, Sequence[int]]) -> bool:
    n = len(next(iter(images.values())))
    adj = [set() for _ in range(n)]
    for perm in images.values():
        for v, w in enumerate(perm):
            adj[v].add(w)
            adj[w].add(v)
    seen = {0}
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return len(seen) == n


def _require_generation(images: Mapping[str, Sequence[int]]) -> None:
    if not _is_transitive(images):
        raise ValueError("images do not generate")


# ---------------------------------------------------------------------------
# model builders


def abelian_model(
    orders: Sequence[int],
    generators: Mapping[str, Sequence[int]] | None = None,
    ambient: Mapping | None = None,
    name: str = "",
) -> FiniteQuotientModel:
    """Regular representation of ``Z/n1 x ... x Z/nd`` (lexicographic indexing).

    Without ``generators`` the standard basis is used with labels
    ``e1, e2, ...`` and, when all orders agree, the ambient group is recorded
    as the lattice ``Z^d``.
    """
    orders = [int(n) for n in orders]
    if not orders or any(n < 1 for n in orders):
        raise ValueError("orders must be positive")
    d = len(orders)
    if generators is None:
        generators = {f"e{i + 1}": [1 if j == i else 0 for j in range(d)] for i in range(d)}
        if ambient is None and len(set(orders)) == 1:
            ambient = {"kind": "lattice", "rank": d}
    elements = list(itertools.product(*(range(n) for n in orders)))
    index = {x: i for i, x in enumerate(elements)}
    images = {}
    for label, vec in generators.items():
        vec = [int(x) for x in vec]
        if len(vec) != d:
            raise ValueError(f"generator {label!r} must have {d} coordinates")
        images[label] = tuple(index[tuple((x + s) % n for x, s, n in zip(el, vec, orders))] for el in elements)
    _require_generation(images)
    if not name:
        name = "x".join(f"Z/{n}" for n in orders)
    return FiniteQuotientModel(images, "cayley", ambient, name)


def cyclic_model(n: int, steps: Mapping[str, int] | None = None, ambient: Mapping | None = None) -> FiniteQuotientModel:
    """``Z/n`` with generators acting by the given steps (default ``s -> +1``)."""
    if steps is None:
        steps = {"s": 1}
        if ambient is None:
            ambient = {"kind": "lattice", "rank": 1}
    return abelian_model([n], {a: [k] for a, k in steps.items()}, ambient, f"Z/{n}")


def permutation_group_model(
    generators: Mapping[str, Sequence[int]],
    ambient: Mapping | None = None,
    max_order: int | None = None,
    name: str = "",
) -> FiniteQuotientModel:
    """Regular representation of the group generated by permutations of points.

    Elements are enumerated breadth first from the identity (index 0); the
    image of element ``g`` under ``s`` is ``s o g``.
    """
    cap = limits.resolve("max_vertices", max_order)
    labels = sorted(generators)
    gens = {a: tuple(int(x) for x in generators[a]) for a in labels}
    m = len(next(iter(gens.values())))
    letters = []
    for a in labels:
        p = gens[a]
        inv = [0] * m
        for i, x in enumerate(p):
            inv[x] = i
        letters.append(p)
        letters.append(tuple(inv))
    identity = tuple(range(m))
    index = {identity: 0}
    elements = [identity]
    queue = deque([identity])
    while queue:
        g = queue.popleft()
        for s in letters:
            h = tuple(s[x] for x in g)
            if h not in index:
                if len(elements) >= cap:
                    raise GuardError(f"group order guard: more than {cap} elements")
                index[h] = len(elements)
                elements.append(h)
                queue.append(h)
    images = {}
    for a in labels:
        s = gens[a]
        images[a] = tuple(index[tuple(s[x] for x in g)] for g in elements)
    return FiniteQuotientModel(images, "cayley", ambient, name or f"perm group of order {len(elements)}")


def schreier_model(images: Mapping[str, Sequence[int]], ambient: Mapping | None = None, name: str = "") -> FiniteQuotientModel:
    """Coset action given directly by generator images."""
    _require_generation({a: tuple(p) for a, p in images.items()})
    return FiniteQuotientModel(dict(images), "schreier", ambient, name)


MARGULIS_MATRICES = {"a": ((1, 1), (0, 1)), "b": ((1, 0), (1, 1))}


def margulis_model(k: int) -> FiniteQuotientModel:
    """``(Z/k)^2`` as cosets of ``(kZ)^2 x| SL(2, Z)``.

    The generators are the two elementary shears ``a``, ``b`` acting linearly
    mod ``k`` and the translations ``e1``, ``e2``.  Vertex ``(x, y)`` has index
    ``x * k + y``, the same indexing as the torus net.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    pts = [(x, y) for x in range(k) for y in range(k)]

    def idx(x, y):
        return (x % k) * k + (y % k)

    images = {}
    for label, M in MARGULIS_MATRICES.items():
        images[label] = tuple(idx(M[0][0] * x + M[0][1] * y, M[1][0] * x + M[1][1] * y) for x, y in pts)
    images["e1"] = tuple(idx(x + 1, y) for x, y in pts)
    images["e2"] = tuple(idx(x, y + 1) for x, y in pts)
    return schreier_model(images, {"kind": "semidirect", "lattice_rank": 2}, f"margulis k={k}")


def margulis_family(k_list: Iterable[int]) -> list[FiniteQuotientModel]:
    return [margulis_model(k) for k in k_list]


def model_from_json(data: Mapping) -> FiniteQuotientModel:
    """Quotient description: one-line image lists or the ``affine_mod`` shorthand.

    ``{"flavor": "cayley", "generators": {"s": [1, 2, 0]}}`` gives images
    directly.  ``{"affine_mod": k, "dimension": d, "generators": {"a":
    {"A": [[1, 1], [0, 1]], "b": [0, 0]}}}`` acts on ``(Z/k)^d`` by ``x -> A x + b``.
    ``{"abelian": [5, 5], "generators": {"s": [1, 0]}}`` is the regular
    representation of an abelian group; ``{"permutations": {...}}`` takes the
    regular representation of a permutation group and ``{"margulis": k}``
    the Margulis coset model.
    """
    ambient = data.get("ambient")
    name = data.get("name", "")
    if "margulis" in data:
        return margulis_model(int(data["margulis"]))
    if "abelian" in data:
        return abelian_model(data["abelian"], data.get("generators"), ambient, name)
    if "permutations" in data:
        return permutation_group_model(data["permutations"], ambient, name=name)
    if "affine_mod" in data:
        k = int(data["affine_mod"])
        d = int(data.get("dimension", 1))
        pts = list(itertools.product(range(k), repeat=d))
        index = {x: i for i, x in enumerate(pts)}
        images = {}
        for label, spec in data["generators"].items():
            A = spec.get("A", [[1 if i == j else 0 for j in range(d)] for i in range(d)])
            b = spec.get("b", [0] * d)
            images[label] = tuple(
                index[tuple((sum(A[i][j] * x[j] for j in range(d)) + b[i]) % k for i in range(d))] for x in pts
            )
    else:
        images = {a: tuple(p) for a, p in data["generators"].items()}
    flavor = data.get("flavor", "cayley")
    _require_generation(images)
    return FiniteQuotientModel(images, flavor, ambient, name)


# ---------------------------------------------------------------------------
# graphs


def _simple_edges(model: FiniteQuotientModel) -> list[Edge]:
    seen = {}
    for label in model.labels:
        for v, w in enumerate(model.images[label]):
            if v == w:
                continue
            key = (min(v, w), max(v, w))
            if key not in seen:
                seen[key] = label
    return [Edge(u, v, Fraction(1), "jump", label) for (u, v), label in sorted(seen.items())]


def cayley_graph(model: FiniteQuotientModel) -> WeightedGraph:
    """Simple unit-weight graph with edges ``{g, s g}`` (duplicates merged, loops dropped).

    Left and right Cayley graphs are isomorphic through ``g -> g^-1``.
    """
    if model.flavor != "cayley":
        raise ValueError("cayley_graph needs a regular (cayley flavor) model")
    _require_generation(model.images)
    return WeightedGraph(model.order, _simple_edges(model))


def multigraph(model: FiniteQuotientModel) -> MultiGraph:
    """One edge ``{v, s(v)}`` per generator and vertex, loops and repeats kept."""
    return MultiGraph.from_edges(
        model.order, [(v, w) for label in model.labels for v, w in enumerate(model.images[label])]
    )


@dataclass
class SchreierGraph:
    graph: WeightedGraph
    multigraph: MultiGraph


def schreier_graph(model: FiniteQuotientModel) -> SchreierGraph:
    """Metric (simple) graph on cosets plus the multigraph view for spectral work."""
    _require_generation(model.images)
    return SchreierGraph(WeightedGraph(model.order, _simple_edges(model)), multigraph(model))


# ---------------------------------------------------------------------------
# kernel length and the box-space check


def kernel_min_length(model: FiniteQuotientModel, max_order: int | None = None) -> int:
    """Length of the shortest nonempty reduced word acting trivially at vertex 0.

    For a Cayley model this is the shortest nontrivial element of the kernel.
    Breadth-first search over pairs (vertex, last letter), so only reduced
    words are explored.
    """
    cap = limits.resolve("max_vertices", max_order)
    if model.order > cap:
        raise GuardError(f"group order guard: {model.order} exceeds cap {cap}")
    letters = []
    for label in model.labels:
        p = model.images[label]
        inv = [0] * len(p)
        for i, x in enumerate(p):
            inv[x] = i
        letters.append(p)
        letters.append(tuple(inv))
    k = len(letters)
    # letter i is the inverse of letter i ^ 1
    # apply letters in reading order from the right: the walk v -> letter(v)
    seen = set()
    frontier = []
    for i in range(k):
        v = letters[i][0]
        if v == 0:
            return 1
        frontier.append((v, i))
        seen.add((v, i))
    depth = 1
    while frontier:
        depth += 1
        nxt = []
        for v, last in frontier:
            for i in range(k):
                if i == last ^ 1:
                    continue
                w = letters[i][v]
                if w == 0:
                    return depth
                if (w, i) not in seen:
                    seen.add((w, i))
                    nxt.append((w, i))
        frontier = nxt
    raise RuntimeError("no relation found; action is not finite")


def predicted_kernel(model: FiniteQuotientModel) -> PredictedGroup | None:
    """Kernel ``N`` of ``Lambda -> Lambda/N`` when ``Lambda`` is recognised.

    Free of rank ``n``: free of rank ``(n - 1) [Lambda : N] + 1``.  Lattice
    ``Z^d`` with standard generators onto ``(Z/n)^d``: ``N = (nZ)^d`` is free
    abelian of rank ``d``.
    """
    amb = model.ambient or {}
    kind = amb.get("kind")
    if model.flavor != "cayley":
        return None
    if kind == "free":
        n = int(amb.get("rank", len(model.labels)))
        rank = (n - 1) * model.order + 1
        gens = tuple(f"k{i}" for i in range(rank))
        return PredictedGroup(Presentation(gens, ()), "box_space_kernel", {"ambient": "free", "rank": n, "index": model.order})
    if kind == "lattice":
        d = int(amb.get("rank", len(model.labels)))
        gens = tuple(f"k{i}" for i in range(d))
        rels = []
        for i, j in itertools.combinations(gens, 2):
            rels.append(" ".join([i, j, i.upper(), j.upper()]))
        return PredictedGroup(Presentation.from_json({"generators": list(gens), "relators": rels}), "box_space_kernel", {"ambient": "lattice", "rank": d, "index": model.order})
    return None


@dataclass
class DKReport:
    model: str
    theta: int
    kernel_min_length: int | None
    hypothesis: bool
    boundary: bool
    computed: AbelianInvariants
    predicted: AbelianInvariants | None
    verdict: str | None
    note: str = ""
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "model": self.model,
            "theta": self.theta,
            "kernel_min_length": self.kernel_min_length,
            "hypothesis": self.hypothesis,
            "boundary": self.boundary,
            "computed": self.computed.to_json(),
            "predicted": None if self.predicted is None else self.predicted.to_json(),
            "verdict": self.verdict,
            "note": self.note,
        }


def dk_check(model: FiniteQuotientModel, theta: int, max_cells: int | None = None) -> DKReport:
    """Compare ``H_1`` of the scale-theta complex of the quotient graph with the kernel.

    The hypothesis is ``4 theta <= kernel_min_length``; equality is flagged as
    a boundary case and treated as satisfied.  Schreier models and
    unrecognised ambient groups get invariants only.
    """
    theta = int(theta)
    if theta < 1:
        raise ValueError("theta must be at least 1")
    if model.flavor == "cayley":
        graph = cayley_graph(model)
        kmin = kernel_min_length(model)
    else:
        graph = schreier_graph(model).graph
        kmin = None
    c = build_complex(graph, theta, max_cells=max_cells)
    computed = h1_invariants(c)
    hypothesis = kmin is not None and 4 * theta <= kmin
    boundary = kmin is not None and 4 * theta == kmin
    pred_group = predicted_kernel(model)
    details = {"vertices": c.n, "edges": len(c.edges), "triangles": len(c.triangles), "squares": len(c.squares)}
    if pred_group is None:
        return DKReport(model.name, theta, kmin, hypothesis, boundary, computed, None, None, NO_PREDICTION, details)
    predicted = pred_group.abelianization()
    if not hypothesis:
        verdict = "hypothesis-unmet"
        note = f"4*theta = {4 * theta} exceeds the shortest kernel word ({kmin})"
    else:
        verdict = "match" if computed == predicted else "mismatch"
        note = "boundary case 4*theta = kernel_min_length" if boundary else ""
    details["predicted_provenance"] = pred_group.provenance
    details["predicted_parameters"] = pred_group.parameters
    return DKReport(model.name, theta, kmin, hypothesis, boundary, computed, predicted, verdict, note, details)


@dataclass
class DKScan:
    reports: list[DKReport]
    transitions: list[int]

    def to_json(self) -> dict:
        return {"reports": [r.to_json() for r in self.reports], "transitions": self.transitions}


def dk_scan(model: FiniteQuotientModel, thetas: Sequence[int], max_cells: int | None = None) -> DKScan:
    """``dk_check`` over several scales; a transition is a theta where ``H_1`` changes."""
    reports = [dk_check(model, th, max_cells) for th in thetas]
    transitions = [r.theta for prev, r in zip(reports, reports[1:]) if r.computed != prev.computed]
    return DKScan(reports, transitions)

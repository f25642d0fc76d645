"""End-to-end pipelines: net, warp, complex, invariants, comparison.

Each pipeline returns a plain dataclass with a ``to_json`` method.  Timings
are kept out of those dictionaries so that reports are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .complex import ScaleComplex, build_complex, h1_invariants
from .errors import ScaleError
from .expanders import MultiGraph
from .groups import PredictedGroup, abelianization, predicted_presentation_torus, semidirect_presentation
from .snf import AbelianInvariants
from .spaces import (
    AutoScale,
    Edge,
    GeneratorAction,
    NetSpace,
    WarpedGraph,
    WeightedGraph,
    as_fraction,
    auto_t0,
    lift_norm,
    mesh_resolution,
    rebuild_generators,
    warp,
)
from .words import elliptic_words

STABILITY_WINDOW = 3


@dataclass
class CaseResult:
    """One net, one scale: computed and (optionally) predicted invariants."""

    theta: int
    t: Fraction
    net: NetSpace
    computed: AbelianInvariants
    predicted: AbelianInvariants | None = None
    prediction: PredictedGroup | None = None
    scale: AutoScale | None = None
    cells: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str | None:
        if self.predicted is None:
            return None
        return "match" if self.computed == self.predicted else "mismatch"

    def to_json(self) -> dict:
        out = {
            "theta": self.theta,
            "t": str(self.t),
            "net": self.net.to_json(),
            "computed": self.computed.to_json(),
            "predicted": None if self.predicted is None else self.predicted.to_json(),
            "verdict": self.verdict,
            "complex": self.cells,
        }
        if self.prediction is not None:
            out["prediction"] = self.prediction.to_json()
        if self.scale is not None:
            out["scale"] = self.scale.to_json()
        return out


def _cells(c: ScaleComplex) -> dict:
    return {"vertices": c.n, "edges": len(c.edges), "triangles": len(c.triangles), "squares": len(c.squares)}


def resolve_scale(
    net: NetSpace,
    generators: Sequence[GeneratorAction],
    theta: int,
    t=None,
    max_vertices: int | None = None,
    max_words: int | None = None,
) -> tuple[Fraction, NetSpace, list[GeneratorAction], AutoScale | None]:
    """Explicit ``t`` keeps the given net; ``t=None`` applies the automatic rule."""
    if t is not None:
        return as_fraction(t), net, list(generators), None
    auto = auto_t0(net, generators, theta, max_vertices=max_vertices, max_words=max_words)
    return auto.t, auto.net, auto.generators, auto


def warped_pi1(
    net: NetSpace,
    generators: Sequence[GeneratorAction],
    theta: int,
    t=None,
    float_mode: bool = False,
    max_vertices: int | None = None,
    max_words: int | None = None,
    max_cells: int | None = None,
) -> CaseResult:
    """``H_1`` of the scale-theta complex of the warped net (no prediction)."""
    t, net, gens, auto = resolve_scale(net, generators, theta, t, max_vertices, max_words)
    wg = warp(net, gens, t, float_mode=float_mode)
    c = build_complex(wg, theta, max_cells=max_cells)
    return CaseResult(int(theta), t, net, h1_invariants(c), scale=auto, cells=_cells(c))


def predicted_vs_computed(
    net: NetSpace,
    generators: Sequence[GeneratorAction],
    theta: int,
    t=None,
    float_mode: bool = False,
    max_vertices: int | None = None,
    max_words: int | None = None,
    max_cells: int | None = None,
) -> CaseResult:
    """Computed ``H_1`` against the abelianized torus prediction.

    With an explicit ``t`` the prediction checks ``t >= t0_estimate`` and
    raises when the scale hypotheses fail; the automatic rule guarantees it.
    """
    t, net, gens, auto = resolve_scale(net, generators, theta, t, max_vertices, max_words)
    wg = warp(net, gens, t, float_mode=float_mode)
    c = build_complex(wg, theta, max_cells=max_cells)
    pred = predicted_presentation_torus(net, gens, theta, t, check_t0=auto is None, max_words=max_words)
    if auto is not None:
        pred.details["t0_estimate"] = str(auto.t0)
    return CaseResult(int(theta), t, net, h1_invariants(c), pred.abelianization(), pred, auto, _cells(c))


# ---------------------------------------------------------------------------
# stability across scales


@dataclass
class StabilityReport:
    cases: list[CaseResult]
    window: int
    stable: bool
    transitions: list[int]
    elliptic_onset: int | None
    limit: AbelianInvariants | None
    base: AbelianInvariants | None = None

    def to_json(self) -> dict:
        return {
            "cases": [c.to_json() for c in self.cases],
            "window": self.window,
            "stable": self.stable,
            "transitions": self.transitions,
            "elliptic_onset": self.elliptic_onset,
            "limit_fingerprint": None if self.limit is None else self.limit.to_json(),
            "semidirect_invariants": None if self.base is None else self.base.to_json(),
            "all_match": all(c.verdict == "match" for c in self.cases),
        }


def stability_scan(
    net: NetSpace,
    generators: Sequence[GeneratorAction],
    thetas: Sequence[int],
    window: int = STABILITY_WINDOW,
    max_vertices: int | None = None,
    max_words: int | None = None,
    max_cells: int | None = None,
) -> StabilityReport:
    """Run the automatic-scale comparison for each theta.

    ``stable`` means the last ``window`` scales share the same invariants;
    that common value is reported as the fingerprint of the limit group.  A
    transition is a theta whose invariants differ from the previous regime.
    The regime before the first scanned theta (when it is 1) is the
    unquotiented semidirect product, i.e. no elliptic words at all, so a
    relator that is already present at theta = 1 shows up as a transition
    at 1.  ``elliptic_onset`` is the first scanned theta with a nonempty set
    of short elliptic words on the base net.
    """
    thetas = sorted(int(x) for x in thetas)
    cases = [predicted_vs_computed(net, generators, th, None, False, max_vertices, max_words, max_cells) for th in thetas]
    inv = [c.computed for c in cases]
    transitions = [thetas[i] for i in range(1, len(inv)) if inv[i] != inv[i - 1]]
    base = None
    if thetas and thetas[0] == 1 and all(g.affine_lift is not None for g in generators):
        labels = sorted(g.label for g in generators)
        lifts = {g.label: g.affine_lift.A for g in generators}
        base = abelianization(semidirect_presentation(net.dimension, labels, lifts))
        if inv[0] != base:
            transitions.insert(0, 1)
    stable = len(inv) >= window and len(set(inv[-window:])) == 1
    actions = {g.label: g for g in generators}
    onset = None
    for th in thetas:
        if actions and elliptic_words(net, actions, th, max_words=max_words):
            onset = th
            break
    return StabilityReport(cases, window, stable, transitions, onset, inv[-1] if stable else None, base)


# ---------------------------------------------------------------------------
# slab over several levels


def slab_graph(net: NetSpace, generators: Sequence[GeneratorAction], levels: Sequence) -> WeightedGraph:
    """``net x {t_1 < ... < t_m}`` with per-level warped edges and vertical edges.

    Level ``i`` carries mesh edges of weight ``t_i * mesh_step`` and unit jump
    edges; vertex ``v`` at level ``i`` is joined to ``v`` at level ``i+1`` by an
    edge of weight ``t_{i+1} - t_i``.  Vertex ``(i, v)`` has index ``i * n + v``.
    """
    ts = [as_fraction(t) for t in levels]
    if not ts:
        raise ValueError("need at least one level")
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise ValueError("levels must be strictly increasing")
    n = net.vertex_count
    edges: list[Edge] = []
    for i, t in enumerate(ts):
        off = i * n
        level = WarpedGraph(net, t, generators)
        edges.extend(Edge(e.u + off, e.v + off, e.weight, e.kind, e.label) for e in level.edges)
    for i in range(len(ts) - 1):
        dt = ts[i + 1] - ts[i]
        edges.extend(Edge(i * n + v, (i + 1) * n + v, dt, "vertical", "") for v in range(n))
    return WeightedGraph(n * len(ts), edges)


@dataclass
class SlabResult:
    theta: int
    levels: list[Fraction]
    net: NetSpace
    slab: AbelianInvariants
    per_level: list[AbelianInvariants]
    cells: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        return "match" if all(x == self.slab for x in self.per_level) else "mismatch"

    def to_json(self) -> dict:
        return {
            "theta": self.theta,
            "levels": [str(t) for t in self.levels],
            "net": self.net.to_json(),
            "slab": self.slab.to_json(),
            "per_level": [x.to_json() for x in self.per_level],
            "verdict": self.verdict,
            "complex": self.cells,
            "discretization": "intra-level mesh t_i*mesh_step, jumps 1, vertical t_{i+1}-t_i",
        }


def slab_compare(
    net: NetSpace,
    generators: Sequence[GeneratorAction],
    theta: int,
    levels: Sequence | None = None,
    count: int = 3,
    step=1,
    max_vertices: int | None = None,
    max_words: int | None = None,
    max_cells: int | None = None,
) -> SlabResult:
    """Compare ``H_1`` of the slab complex with every level's complex at ``theta``.

    Without explicit ``levels`` the lowest level comes from the automatic
    scale rule and the others are spaced by ``step``; the net is refined so
    that the top level still meets the mesh contract.
    """
    theta = int(theta)
    if levels is None:
        auto = auto_t0(net, generators, theta, max_vertices=max_vertices, max_words=max_words)
        step = as_fraction(step)
        levels = [auto.t + i * step for i in range(count)]
        rho = Fraction(1, lift_norm(generators))
        N = mesh_resolution(net, generators, levels[-1], theta, rho)
        net = net.with_resolution(max(N, auto.net.resolution), max_vertices)
        generators = rebuild_generators(net, generators) if generators else []
    levels = [as_fraction(t) for t in levels]
    per_level = []
    for t in levels:
        c = build_complex(warp(net, generators, t), theta, max_cells=max_cells)
        per_level.append(h1_invariants(c))
    sg = slab_graph(net, generators, levels)
    try:
        c = build_complex(sg, theta, max_cells=max_cells)
    except ScaleError as exc:
        raise ScaleError(f"scale too small: levels are not joined at theta = {theta} ({exc})") from None
    return SlabResult(theta, levels, net, h1_invariants(c), per_level, _cells(c))


# ---------------------------------------------------------------------------
# warped torus multigraph (for comparison with Schreier graphs)


def warped_multigraph(wg: WarpedGraph) -> MultiGraph:
    """Every mesh and jump edge with multiplicity; loops kept."""
    return MultiGraph.from_edges(wg.n, [(e.u, e.v) for e in wg.edges])

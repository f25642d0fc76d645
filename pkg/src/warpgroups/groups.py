"""Finitely presented groups and predicted presentations.

Presentations are kept as plain data (generator labels plus relator words).
The predictions implemented here are:

* the semidirect product ``Z^d x| F_S`` of a torus fundamental group by the
  free group on the generators, where each generator acts on ``Z^d`` by its
  linear part;
* its quotient by the elliptic relators of short words with fixed points;
* ``<S | R_theta>`` for free actions on simply connected bases, where
  ``R_theta`` collects the relations of length at most ``4 theta``.

Groups are only ever compared through invariants (abelianization, trivial
presentation, deficiency); the reports say "invariants agree", never
"isomorphic".
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .snf import AbelianInvariants, abelian_invariants
from .words import AffineLift, Word, _check_label, _matvec, det, word_lift, words_with_arrays

PROVENANCES = ("semidirect", "elliptic_quotient", "free_action", "box_space_kernel")


@dataclass(frozen=True)
class Presentation:
    """Group presentation ``<generators | relators>``."""

    generators: tuple[str, ...]
    relators: tuple[Word, ...] = ()

    def __post_init__(self):
        gens = tuple(self.generators)
        for g in gens:
            _check_label(g)
        if len(set(gens)) != len(gens):
            raise ValueError("duplicate generator labels")
        known = set(gens)
        rels = []
        for r in self.relators:
            if not isinstance(r, Word):
                r = Word.parse(r, reduce=True) if isinstance(r, str) else Word.reduce(r)
            missing = r.labels() - known
            if missing:
                raise ValueError(f"relator uses unknown generators {sorted(missing)}")
            r = r.cyclic_reduce()
            if len(r):
                rels.append(r)
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "relators", tuple(rels))

    @property
    def deficiency(self) -> int:
        return len(self.generators) - len(self.relators)

    @property
    def total_length(self) -> int:
        return sum(len(r) for r in self.relators)

    def is_trivially_presented(self) -> bool:
        return not self.generators and not self.relators

    def __str__(self) -> str:
        gens = ",".join(self.generators)
        rels = ", ".join("".join(a if e == 1 else a.upper() for a, e in r) if all(len(a) == 1 for a, _ in r) else str(r) for r in self.relators)
        return f"<{gens} | {rels}>"

    def to_json(self) -> dict:
        return {"generators": list(self.generators), "relators": [str(r) for r in self.relators]}

    @classmethod
    def from_json(cls, data: Mapping) -> "Presentation":
        return cls(tuple(data["generators"]), tuple(Word.parse(r, reduce=True) for r in data["relators"]))

    @classmethod
    def parse(cls, text: str) -> "Presentation":
        """Parse ``"<a,b | a B A b, a a a a>"``; relators use the word string format."""
        body = text.strip().strip("<>⟨⟩")
        gens_part, _, rels_part = body.partition("|")
        gens = tuple(g.strip() for g in gens_part.split(",") if g.strip())
        rels = []
        for chunk in rels_part.split(","):
            chunk = chunk.strip()
            if not chunk:
                continue
            if " " not in chunk and all(len(g) == 1 for g in gens):
                chunk = " ".join(chunk)
            rels.append(Word.parse(chunk, reduce=True))
        return cls(gens, tuple(rels))


def relation_rows(p: Presentation) -> list[dict[int, int]]:
    pos = {g: i for i, g in enumerate(p.generators)}
    rows = []
    for r in p.relators:
        row: dict[int, int] = {}
        for a, e in r.letters:
            row[pos[a]] = row.get(pos[a], 0) + e
        rows.append({j: v for j, v in row.items() if v})
    return rows


def abelianization(p: Presentation) -> AbelianInvariants:
    """Abelian invariants of the presented group (SNF of exponent sums)."""
    return abelian_invariants(relation_rows(p), len(p.generators))


# ---------------------------------------------------------------------------
# simplification


@dataclass(frozen=True)
class SimplifyResult:
    presentation: Presentation
    moves: int
    exhausted: bool


def _substitute(word: Word, gen: str, replacement: Word) -> Word:
    inv = replacement.inverse()
    letters = []
    for a, e in word.letters:
        if a == gen:
            letters.extend((replacement if e == 1 else inv).letters)
        else:
            letters.append((a, e))
    return Word.reduce(letters).cyclic_reduce()


def _canonical_relator(r: Word) -> tuple:
    """Key identifying a relator up to cyclic permutation and inversion."""
    best = None
    for w in (r, r.inverse()):
        L = w.letters
        for i in range(max(1, len(L))):
            rot = L[i:] + L[:i]
            if best is None or rot < best:
                best = rot
    return best or ()


def tietze_simplify(p: Presentation, budget: int = 10_000) -> SimplifyResult:
    """Bounded Tietze simplification.

    Moves, tried in a fixed order:
    1. drop empty and duplicate relators (up to cyclic permutation and inversion);
    2. eliminate a generator that occurs exactly once in some relator, choosing
       the shortest such relator and then the first such generator, provided
       the total relator length does not grow;
    3. drop a generator that occurs in no relator only if it is a free factor
       (kept: it contributes a free Z, so it is never removed).
    Each accepted elimination counts as one move.
    """
    gens = list(p.generators)
    rels = [r for r in p.relators]
    moves = 0
    exhausted = False

    def dedupe(rs: list[Word]) -> list[Word]:
        seen = set()
        out = []
        for r in rs:
            r = r.cyclic_reduce()
            if not len(r):
                continue
            key = _canonical_relator(r)
            if key in seen:
                continue
            seen.add(key)
            out.append(r)
        return out

    rels = dedupe(rels)
    while True:
        if moves >= budget:
            exhausted = True
            break
        total = sum(len(r) for r in rels)
        choice = None
        for idx in sorted(range(len(rels)), key=lambda i: (len(rels[i]), i)):
            r = rels[idx]
            counts: dict[str, int] = {}
            for a, _ in r.letters:
                counts[a] = counts.get(a, 0) + 1
            for g in gens:
                if counts.get(g) != 1:
                    continue
                # r = u g^e v  =>  g = (u^-1 v^-1)^e after rotating g to the front
                k = next(i for i, (a, _) in enumerate(r.letters) if a == g)
                rot = r.letters[k:] + r.letters[:k]
                e = rot[0][1]
                rest = Word(rot[1:]) if _is_reduced(rot[1:]) else Word.reduce(rot[1:])
                value = rest.inverse() if e == 1 else rest
                new_rels = [
                    _substitute(x, g, value) for j, x in enumerate(rels) if j != idx
                ]
                new_total = sum(len(x) for x in new_rels)
                if new_total <= total:
                    choice = (g, new_rels)
                    break
            if choice is not None:
                break
        if choice is None:
            break
        g, new_rels = choice
        gens.remove(g)
        rels = dedupe(new_rels)
        moves += 1
    return SimplifyResult(Presentation(tuple(gens), tuple(rels)), moves, exhausted)


def _is_reduced(letters) -> bool:
    return all(not (a == b and e == -f) for (a, e), (b, f) in zip(letters, letters[1:]))


def certify_trivial(p: Presentation, budget: int = 10_000) -> bool:
    """True if simplification reaches the empty presentation."""
    return tietze_simplify(p, budget).presentation.is_trivially_presented()


@dataclass(frozen=True)
class GroupComparison:
    verdict: str
    abelian_left: AbelianInvariants
    abelian_right: AbelianInvariants
    trivial_left: bool
    trivial_right: bool

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "abelian_left": self.abelian_left.to_json(),
            "abelian_right": self.abelian_right.to_json(),
            "trivial_left": self.trivial_left,
            "trivial_right": self.trivial_right,
        }


def compare_groups(p: Presentation, q: Presentation, budget: int = 2_000) -> GroupComparison:
    """Compare two presentations by invariants only.

    Verdict is ``"invariants agree"`` or ``"invariants differ"``; isomorphism
    is never claimed.
    """
    a, b = abelianization(p), abelianization(q)
    tp, tq = certify_trivial(p, budget), certify_trivial(q, budget)
    agree = a == b and (not (tp or tq) or tp == tq or (a.is_trivial and b.is_trivial))
    return GroupComparison("invariants agree" if agree else "invariants differ", a, b, tp, tq)


# ---------------------------------------------------------------------------
# predicted presentations


def lattice_labels(d: int) -> tuple[str, ...]:
    return tuple(f"a{i + 1}" for i in range(d))


def lattice_word(v: Sequence[int], labels: Sequence[str]) -> Word:
    """The word ``a_1^{v_1} ... a_d^{v_d}`` for an integer vector."""
    out = Word()
    for k, lab in zip(v, labels):
        out = out * Word.power(lab, int(k))
    return out


def semidirect_presentation(d: int, labels: Sequence[str], phi: Mapping[str, Sequence[Sequence[int]]]) -> Presentation:
    """``Z^d x| F_S`` with ``s a_v s^-1 = a_{A_s v}``.

    Generators ``a1..ad`` then the labels of ``S``; relators are the
    ``d(d-1)/2`` commutators followed by ``|S| * d`` conjugation relators
    ``s a_j s^-1 (a_{A_s e_j})^-1``.
    """
    A_labels = lattice_labels(d)
    for lab in labels:
        if lab in A_labels:
            raise ValueError(f"generator label {lab!r} clashes with lattice labels")
    rels: list[Word] = []
    for i in range(d):
        for j in range(i + 1, d):
            a, b = Word.power(A_labels[i], 1), Word.power(A_labels[j], 1)
            rels.append(a * b * a.inverse() * b.inverse())
    for lab in labels:
        A = phi[lab]
        if len(A) != d or any(len(row) != d for row in A):
            raise ValueError(f"matrix for {lab!r} must be {d}x{d}")
        if abs(det(A)) != 1:
            raise ValueError(f"matrix for {lab!r} is not unimodular; it does not define an automorphism of Z^{d}")
        s = Word.power(lab, 1)
        for j in range(d):
            col = [A[i][j] for i in range(d)]
            rels.append(s * Word.power(A_labels[j], 1) * s.inverse() * lattice_word(col, A_labels).inverse())
    return Presentation(A_labels + tuple(labels), tuple(rels))


@dataclass(frozen=True)
class PredictedGroup:
    presentation: Presentation
    provenance: str
    parameters: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    def abelianization(self) -> AbelianInvariants:
        return abelianization(self.presentation)

    def to_json(self) -> dict:
        return {
            "presentation": self.presentation.to_json(),
            "provenance": self.provenance,
            "parameters": self.parameters,
            "details": self.details,
        }


def canonical_lift(x: Sequence[int], N: int) -> tuple[Fraction, ...]:
    """Lift of a net vertex to ``[0, 1)^d`` in period units."""
    return tuple(Fraction(int(c), N) for c in x)


def elliptic_relator_vector(lift: AffineLift, y_lift: Sequence[Fraction]) -> tuple[int, ...]:
    """``m = (A_w - I) y + b_w`` for a fixed point with lift ``y``; must be integral."""
    Ay = _matvec(lift.A, y_lift)
    m = tuple(a - y + b for a, y, b in zip(Ay, y_lift, lift.b))
    if any(Fraction(x).denominator != 1 for x in m):
        raise ValueError("lift of a fixed vertex does not close up; fixed point and lift disagree")
    return tuple(int(x) for x in m)


def predicted_presentation_torus(
    net,
    generators,
    theta: int,
    t,
    check_t0: bool = True,
    max_words: int | None = None,
) -> PredictedGroup:
    """Quotient of ``Z^d x| F_S`` by the elliptic relators at scale ``theta``.

    For each reduced word ``w`` with ``|w| <= 4 theta`` and a fixed vertex
    ``y``, the canonical lift ``y~`` of ``y`` gives ``m = (A_w - I) y~ + b_w``
    and the relator ``a_{-m} w``.  Changing the lift of ``y`` moves ``m`` by
    the lattice ``(A_w - I) Z^d``, whose generators are added as relators
    ``a_{(A_w - I) e_j}``.  The path from the basepoint to ``s(basepoint)`` is
    the straight segment from ``0`` to ``b_s``, so ``b_w`` comes from the
    composition law.
    """
    from .errors import HypothesisError
    from .spaces import as_fraction, t0_estimate

    gens = list(generators)
    actions = {g.label: g for g in gens}
    for g in gens:
        if g.affine_lift is None:
            raise HypothesisError(f"generator {g.label!r} is not affine; no torus prediction")
    d = net.dimension
    t = as_fraction(t)
    t0 = None
    if check_t0:
        t0 = t0_estimate(net, actions, theta, max_words)
        if t < t0:
            raise HypothesisError(f"scale hypotheses unmet: t = {t} is below the t0 estimate {t0}")
    labels = sorted(actions)
    lifts = {a: actions[a].affine_lift for a in labels}
    base = semidirect_presentation(d, labels, {a: lifts[a].A for a in labels})
    A_labels = lattice_labels(d)
    extra: list[Word] = []
    records = []
    seen = set()
    N = net.resolution
    coords = net.coords
    for w, arr in sorted(
        words_with_arrays(net, actions, 4 * theta, labels, max_words),
        key=lambda item: _shortlex(item[0], labels),
    ):
        fixed = np.nonzero(arr == np.arange(arr.size))[0]
        if fixed.size == 0:
            continue
        lift = word_lift(lifts, w, d)
        ms = set()
        for y in fixed.tolist():
            ms.add(elliptic_relator_vector(lift, canonical_lift(coords[y], N)))
        lattice = []
        for j in range(d):
            col = tuple(lift.A[i][j] - (1 if i == j else 0) for i in range(d))
            if any(col):
                lattice.append(col)
        for m in sorted(ms):
            rel = lattice_word([-x for x in m], A_labels) * w
            key = str(rel)
            if key not in seen:
                seen.add(key)
                extra.append(rel)
        for col in lattice:
            rel = lattice_word(col, A_labels)
            key = str(rel)
            if key not in seen:
                seen.add(key)
                extra.append(rel)
        records.append({"word": str(w), "m_vectors": [list(m) for m in sorted(ms)], "fixed_vertices": int(fixed.size)})
    pres = Presentation(base.generators, base.relators + tuple(extra))
    provenance = "elliptic_quotient" if records else "semidirect"
    params = {"theta": int(theta), "t": str(t), "N": N, "d": d, "generators": labels}
    details = {"elliptic": records, "t0_estimate": str(t0) if t0 is not None else None}
    return PredictedGroup(pres, provenance, params, details)


def _shortlex(w: Word, labels: Sequence[str]) -> tuple:
    from .words import shortlex_key

    return shortlex_key(w, labels)


@dataclass(frozen=True)
class FiniteModel:
    """Permutation images of generators on a finite set (a quotient model)."""

    images: Mapping[str, Sequence[int]]

    @property
    def size(self) -> int:
        return len(next(iter(self.images.values())))


def short_relations(model: FiniteModel, L: int, base_point: int = 0, regular: bool = True, max_words: int | None = None) -> list[Word]:
    """Reduced words of length at most ``L`` acting trivially in the model.

    For a regular (Cayley) model this is the set of short relations of the
    quotient group; otherwise the words fixing ``base_point``.
    """
    from .spaces import make_permutation_generator

    labels = sorted(model.images)
    n = model.size
    actions = {a: make_permutation_generator(n, a, model.images[a]) for a in labels}
    out = []
    for w, arr in words_with_arrays(n, actions, L, labels, max_words):
        if regular:
            if np.array_equal(arr, np.arange(n)):
                out.append(w)
        elif arr[base_point] == base_point:
            out.append(w)
    out.sort(key=lambda w: _shortlex(w, labels))
    return out


def reduce_relator_set(rels: Iterable[Word]) -> list[Word]:
    """Cyclically reduce and drop repeats up to cyclic permutation and inversion."""
    seen = set()
    out = []
    for r in rels:
        r = r.cyclic_reduce()
        if not len(r):
            continue
        key = _canonical_relator(r)
        if key not in seen:
            seen.add(key)
            out.append(r)
    return out


def predicted_presentation_free_action(
    gamma: Presentation,
    theta: int,
    pi1_trivial: bool = True,
    model: FiniteModel | None = None,
    relators_theta: Sequence[Word] | None = None,
    pi1: Mapping | None = None,
    max_words: int | None = None,
) -> PredictedGroup:
    """``<S | R_theta>`` for a free action with simply connected base.

    ``R_theta`` is taken from ``relators_theta`` when given, otherwise
    enumerated from a finite faithful model of the group as all relations of
    length at most ``4 theta``.  When ``pi1`` is supplied (``d`` and per
    generator ``A``/``b`` data) the result is the semidirect quotient with
    relators ``a_{-b_r} r``.
    """
    L = 4 * int(theta)
    if relators_theta is not None:
        rels = [r for r in relators_theta if len(r) <= L]
        source = "explicit"
    elif model is not None:
        rels = short_relations(model, L, max_words=max_words)
        source = "finite_model"
    else:
        # only the given relators that are already short
        if gamma.relators and any(len(r) > L for r in gamma.relators):
            raise ValueError("no finite model and no explicit R_theta: cannot enumerate the short normal-closure elements")
        rels = list(gamma.relators)
        source = "presentation"
    rels = reduce_relator_set(rels)
    params = {"theta": int(theta), "source": source}
    if pi1_trivial or pi1 is None:
        return PredictedGroup(Presentation(gamma.generators, tuple(rels)), "free_action", params, {"relators_theta": len(rels)})
    d = int(pi1["d"])
    phi = {a: pi1["A"][a] for a in gamma.generators}
    lifts = {a: AffineLift(pi1["A"][a], pi1["b"][a]) for a in gamma.generators}
    base = semidirect_presentation(d, gamma.generators, phi)
    extra = []
    for r in rels:
        lift = word_lift(lifts, r, d)
        if any(lift.A[i][j] != (1 if i == j else 0) for i in range(d) for j in range(d)):
            raise ValueError(f"relator {r} does not act trivially on the lattice")
        if any(x.denominator != 1 for x in lift.b):
            raise ValueError(f"relator {r} does not close up")
        extra.append(lattice_word([-int(x) for x in lift.b], lattice_labels(d)) * r)
    return PredictedGroup(Presentation(base.generators, base.relators + tuple(extra)), "free_action", params, {"relators_theta": len(rels)})


def short_path_classes(d: int, theta: int, t, total_length=1) -> list[tuple[int, ...]]:
    """Nonzero ``v`` in ``Z^d`` with ``t * L * |v|_2 <= 4 theta`` (flat torus loops)."""
    from .spaces import as_fraction

    t = as_fraction(t)
    L = as_fraction(total_length)
    scale = t * L
    bound = Fraction(4 * theta)
    if scale <= 0:
        raise ValueError("t and total_length must be positive")
    # |v|_2 <= bound / scale  <=>  |v|_2^2 * scale^2 <= bound^2
    R = math.floor(bound / scale)
    out = []
    rng = range(-R, R + 1)
    import itertools

    for v in itertools.product(rng, repeat=d):
        if not any(v):
            continue
        if sum(x * x for x in v) * scale * scale <= bound * bound:
            out.append(tuple(v))
    out.sort(key=lambda v: (sum(x * x for x in v), v))
    return out

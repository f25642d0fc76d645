"""Integer Smith normal form and abelian invariants.

Two routes are provided.  :func:`smith_diagonal_dense` is the textbook
algorithm on a dense list-of-lists matrix and serves as the reference.
:func:`invariant_factors` first removes every unit pivot it can find in a
sparse row representation (each removal contributes an invariant factor 1 and
keeps the remaining matrix equivalent), then hands the small residue to the
dense routine.  All arithmetic uses Python integers, so nothing overflows.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

SparseRow = dict[int, int]


@dataclass(frozen=True, order=True)
class AbelianInvariants:
    """Finitely generated abelian group ``Z^betti + Z/t1 + ... + Z/tk`` with ``t1 | t2 | ...``."""

    betti: int
    torsion: tuple[int, ...] = ()

    def __post_init__(self):
        tors = tuple(int(x) for x in self.torsion)
        if self.betti < 0:
            raise ValueError("betti number must be nonnegative")
        if any(x < 2 for x in tors):
            raise ValueError("torsion coefficients must be at least 2")
        if any(b % a for a, b in zip(tors, tors[1:])):
            raise ValueError("torsion coefficients must form a divisibility chain")
        object.__setattr__(self, "torsion", tors)

    @classmethod
    def from_factors(cls, ncols: int, factors: Iterable[int]) -> "AbelianInvariants":
        """Invariants of ``Z^ncols`` modulo a lattice with the given nonzero invariant factors."""
        factors = [abs(f) for f in factors if f != 0]
        return cls(ncols - len(factors), tuple(sorted(f for f in factors if f > 1)))

    @property
    def is_trivial(self) -> bool:
        return self.betti == 0 and not self.torsion

    def to_json(self) -> dict:
        return {"betti": self.betti, "torsion": list(self.torsion)}

    @classmethod
    def from_json(cls, data: Mapping) -> "AbelianInvariants":
        return cls(int(data["betti"]), tuple(data.get("torsion", ())))

    def __str__(self) -> str:
        parts = []
        if self.betti:
            parts.append("Z" if self.betti == 1 else f"Z^{self.betti}")
        parts.extend(f"Z/{t}" for t in self.torsion)
        return " + ".join(parts) if parts else "0"


# ---------------------------------------------------------------------------
# dense reference


def smith_diagonal_dense(matrix: Sequence[Sequence[int]]) -> list[int]:
    """Nonzero invariant factors (positive, divisibility chain) of an integer matrix."""
    A = [[int(x) for x in row] for row in matrix]
    m = len(A)
    n = len(A[0]) if m else 0
    diag: list[int] = []
    t = 0
    while t < min(m, n):
        # pivot: smallest nonzero absolute value in the trailing block
        best = None
        for i in range(t, m):
            row = A[i]
            for j in range(t, n):
                x = row[j]
                if x and (best is None or abs(x) < best[0]):
                    best = (abs(x), i, j)
                    if best[0] == 1:
                        break
            if best is not None and best[0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        A[t], A[i] = A[i], A[t]
        if j != t:
            for row in A:
                row[t], row[j] = row[j], row[t]
        while True:
            p = A[t][t]
            dirty = False
            for i in range(t + 1, m):
                if A[i][t]:
                    q = A[i][t] // p
                    if q:
                        rt, ri = A[t], A[i]
                        for j in range(t, n):
                            if rt[j]:
                                ri[j] -= q * rt[j]
                    if A[i][t]:
                        dirty = True
            for j in range(t + 1, n):
                if A[t][j]:
                    q = A[t][j] // p
                    if q:
                        for i in range(t, m):
                            if A[i][t]:
                                A[i][j] -= q * A[i][t]
                    if A[t][j]:
                        dirty = True
            if dirty:
                # move the smallest remaining entry of row/column t to the pivot
                cands = [(abs(A[i][t]), i, t) for i in range(t, m) if A[i][t]]
                cands += [(abs(A[t][j]), t, j) for j in range(t, n) if A[t][j]]
                _, i, j = min(cands)
                A[t], A[i] = A[i], A[t]
                if j != t:
                    for row in A:
                        row[t], row[j] = row[j], row[t]
                continue
            # row and column clear; enforce divisibility of the trailing block
            bad = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if A[i][j] % p:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            for j in range(t, n):
                A[t][j] += A[bad][j]
        diag.append(abs(A[t][t]))
        t += 1
    return diag


def abelian_invariants_dense(matrix: Sequence[Sequence[int]], ncols: int | None = None) -> AbelianInvariants:
    if ncols is None:
        ncols = len(matrix[0]) if matrix else 0
    return AbelianInvariants.from_factors(ncols, smith_diagonal_dense(matrix) if matrix else [])


# ---------------------------------------------------------------------------
# sparse unit-pivot elimination


def _to_sparse(rows: Iterable) -> list[SparseRow]:
    out = []
    for r in rows:
        if isinstance(r, Mapping):
            out.append({int(k): int(v) for k, v in r.items() if v})
        else:
            out.append({j: int(v) for j, v in enumerate(r) if v})
    return out


def eliminate_unit_pivots(rows: Iterable) -> tuple[int, list[SparseRow]]:
    """Remove unit pivots greedily (shortest row, sparsest column first).

    Returns the number of pivots removed (each an invariant factor 1) and the
    remaining nonzero rows.  The residue, together with the count, has the
    same invariant factors as the input.
    """
    R = dict(enumerate(_to_sparse(rows)))
    cols: dict[int, set[int]] = {}
    for i, row in R.items():
        for j in row:
            cols.setdefault(j, set()).add(i)
    version = {i: 0 for i in R}
    heap = [(len(row), i, 0) for i, row in R.items()]
    heapq.heapify(heap)
    pivots = 0
    while heap:
        ln, i, ver = heapq.heappop(heap)
        if i not in R or version[i] != ver:
            continue
        row = R[i]
        if not row:
            del R[i]
            continue
        units = [j for j, v in row.items() if v == 1 or v == -1]
        if not units:
            continue
        c = min(units, key=lambda j: (len(cols[j]), j))
        p = row[c]
        for k in sorted(cols[c] - {i}):
            other = R[k]
            f = other[c] * p
            for j, v in row.items():
                nv = other.get(j, 0) - f * v
                if nv:
                    if j not in other:
                        cols[j].add(k)
                    other[j] = nv
                elif j in other:
                    del other[j]
                    cols[j].discard(k)
            version[k] += 1
            heapq.heappush(heap, (len(other), k, version[k]))
        for j in row:
            cols[j].discard(i)
        del cols[c]
        del R[i]
        pivots += 1
    return pivots, [row for _, row in sorted(R.items()) if row]


def _dense_from_sparse(rows: Sequence[SparseRow]) -> list[list[int]]:
    used = sorted({j for r in rows for j in r})
    pos = {j: k for k, j in enumerate(used)}
    out = []
    for r in rows:
        dense = [0] * len(used)
        for j, v in r.items():
            dense[pos[j]] = v
        out.append(dense)
    return out


def invariant_factors(rows: Iterable) -> list[int]:
    """Nonzero invariant factors of the matrix with the given (sparse or dense) rows."""
    pivots, rest = eliminate_unit_pivots(rows)
    factors = [1] * pivots
    if rest:
        factors.extend(smith_diagonal_dense(_dense_from_sparse(rest)))
    return factors


def abelian_invariants(rows: Iterable, ncols: int) -> AbelianInvariants:
    """Invariants of ``Z^ncols / <rows>``."""
    return AbelianInvariants.from_factors(ncols, invariant_factors(rows))


# ---------------------------------------------------------------------------
# ranks and rational quotient coordinates

DEFAULT_PRIME = 2_305_843_009_213_693_951  # 2^61 - 1


def rank_mod_p(rows: Iterable, p: int = DEFAULT_PRIME) -> int:
    """Rank over GF(p) by sparse elimination; equals the rational rank for all but finitely many p."""
    pivots: dict[int, SparseRow] = {}
    rank = 0
    for r in _to_sparse(rows):
        row = {j: v % p for j, v in r.items() if v % p}
        while row:
            c = min(row)
            if c in pivots:
                prow = pivots[c]
                f = row[c]
                for j, v in prow.items():
                    nv = (row.get(j, 0) - f * v) % p
                    if nv:
                        row[j] = nv
                    else:
                        row.pop(j, None)
            else:
                inv = pow(row[c], p - 2, p)
                pivots[c] = {j: v * inv % p for j, v in row.items()}
                rank += 1
                break
    return rank


class RationalQuotient:
    """Coordinates on ``Q^ncols / span(rows)`` via fully reduced row echelon form."""

    def __init__(self, rows: Iterable, ncols: int):
        self.ncols = ncols
        piv: dict[int, dict[int, Fraction]] = {}
        for r in _to_sparse(rows):
            row = {j: Fraction(v) for j, v in r.items()}
            row = self._reduce(row, piv)
            if not row:
                continue
            c = min(row)
            lead = row[c]
            row = {j: v / lead for j, v in row.items()}
            for k, prow in piv.items():
                if c in prow:
                    f = prow[c]
                    for j, v in row.items():
                        nv = prow.get(j, 0) - f * v
                        if nv:
                            prow[j] = nv
                        else:
                            prow.pop(j, None)
            piv[c] = row
        self.pivots = piv
        self.free = [j for j in range(ncols) if j not in piv]
        self._pos = {j: k for k, j in enumerate(self.free)}

    @staticmethod
    def _reduce(row: dict[int, Fraction], piv: Mapping[int, Mapping[int, Fraction]]) -> dict[int, Fraction]:
        row = dict(row)
        for c in sorted(set(row) & set(piv)):
            if c not in row:
                continue
            f = row[c]
            for j, v in piv[c].items():
                nv = row.get(j, 0) - f * v
                if nv:
                    row[j] = nv
                else:
                    row.pop(j, None)
        return row

    @property
    def dimension(self) -> int:
        return len(self.free)

    def coordinates(self, vec: Mapping[int, int | Fraction]) -> list[Fraction]:
        """Coordinates of the class of ``vec`` in the basis of free columns."""
        row = {j: Fraction(v) for j, v in vec.items() if v}
        # pivot columns are expressed through free columns: e_c = -sum_{j free} prow[j] e_j
        out = [Fraction(0)] * len(self.free)
        for j, v in row.items():
            if j in self.pivots:
                for jj, w in self.pivots[j].items():
                    if jj != j:
                        out[self._pos[jj]] -= v * w
            else:
                out[self._pos[j]] += v
        return out

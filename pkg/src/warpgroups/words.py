"""Reduced words over a symmetric alphabet and their actions on nets.

A word is stored as a tuple of ``(label, exponent)`` letters with exponent
``+1`` or ``-1``.  The string form writes a generator in lowercase and its
inverse in uppercase, separated by spaces, e.g. ``"a B a a"``.

Composition convention: ``word_permutation(w)`` applies the *last* letter
first, so ``w = l1 l2 ... ln`` sends ``v`` to ``l1(l2(...ln(v)))``.  This makes
a word act as the group element it names under a left action.  The reversed
word ``w.reversed()`` applies the letters in reading order.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, Iterable, Iterator, Mapping, Sequence

import numpy as np

from . import limits
from .errors import GuardError

if TYPE_CHECKING:  # pragma: no cover
    from .spaces import GeneratorAction, NetSpace, WarpedGraph

Letter = tuple[str, int]


def _check_label(label: str) -> None:
    if not label or not label[0].isalpha() or not label[0].islower():
        raise ValueError(f"generator label must start with a lowercase letter: {label!r}")


@dataclass(frozen=True, order=True)
class Word:
    """A freely reduced word; construction rejects non-reduced input."""

    letters: tuple[Letter, ...] = ()

    def __post_init__(self):
        letters = tuple((str(a), int(e)) for a, e in self.letters)
        for a, e in letters:
            _check_label(a)
            if e not in (1, -1):
                raise ValueError(f"letter exponent must be +1 or -1, got {e}")
        for (a, e), (b, f) in zip(letters, letters[1:]):
            if a == b and e == -f:
                raise ValueError("word is not freely reduced")
        object.__setattr__(self, "letters", letters)

    @classmethod
    def reduce(cls, letters: Iterable[Letter]) -> "Word":
        """Freely reduce an arbitrary letter sequence."""
        stack: list[Letter] = []
        for a, e in letters:
            if stack and stack[-1][0] == a and stack[-1][1] == -e:
                stack.pop()
            else:
                stack.append((a, e))
        return cls(tuple(stack))

    @classmethod
    def parse(cls, text: str, reduce: bool = False) -> "Word":
        """Parse ``"a B a"``; uppercase tokens are inverses."""
        letters = []
        for tok in text.split():
            if tok[0].isupper():
                letters.append((tok.lower(), -1))
            else:
                letters.append((tok, 1))
        return cls.reduce(letters) if reduce else cls(tuple(letters))

    @classmethod
    def power(cls, label: str, k: int) -> "Word":
        e = 1 if k >= 0 else -1
        return cls(tuple((label, e) for _ in range(abs(k))))

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[Letter]:
        return iter(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        return Word.reduce(self.letters + other.letters)

    def __pow__(self, k: int) -> "Word":
        base = self if k >= 0 else self.inverse()
        out = Word()
        for _ in range(abs(k)):
            out = out * base
        return out

    def __invert__(self) -> "Word":
        return self.inverse()

    def inverse(self) -> "Word":
        return Word(tuple((a, -e) for a, e in reversed(self.letters)))

    def reversed(self) -> "Word":
        """The word read backwards (same letters, no inversion)."""
        return Word(tuple(reversed(self.letters)))

    def is_cyclically_reduced(self) -> bool:
        if len(self.letters) < 2:
            return True
        (a, e), (b, f) = self.letters[0], self.letters[-1]
        return not (a == b and e == -f)

    def cyclic_reduce(self) -> "Word":
        letters = list(self.letters)
        while len(letters) >= 2 and letters[0][0] == letters[-1][0] and letters[0][1] == -letters[-1][1]:
            letters = letters[1:-1]
        return Word(tuple(letters))

    def exponent_sums(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for a, e in self.letters:
            out[a] = out.get(a, 0) + e
        return out

    def labels(self) -> set[str]:
        return {a for a, _ in self.letters}

    def __str__(self) -> str:
        return " ".join(a if e == 1 else a.upper() for a, e in self.letters)

    def __repr__(self) -> str:
        return f"Word({str(self)!r})"


def _alphabet(labels: Sequence[str]) -> list[Letter]:
    out = []
    for a in labels:
        _check_label(a)
        out.append((a, 1))
        out.append((a, -1))
    return out


def count_reduced_words(k: int, L: int) -> int:
    """Number of reduced words of length 1..L over k generators."""
    if k == 0:
        return 0
    return sum(2 * k * (2 * k - 1) ** (ell - 1) for ell in range(1, L + 1))


def reduced_words(labels: Sequence[str], L: int, max_words: int | None = None) -> list[Word]:
    """All freely reduced words of length 1..L, in shortlex order.

    Letters are ordered ``s1, S1, s2, S2, ...`` following ``labels``.
    """
    if L < 0:
        raise ValueError("maximal length must be nonnegative")
    cap = limits.resolve("max_words", max_words)
    total = count_reduced_words(len(labels), L)
    if total > cap:
        raise GuardError(f"word enumeration guard: {total} reduced words exceed cap {cap}")
    alphabet = _alphabet(labels)
    out: list[Word] = []
    level: list[tuple[Letter, ...]] = [()]
    for _ in range(L):
        nxt = []
        for w in level:
            for a, e in alphabet:
                if w and w[-1][0] == a and w[-1][1] == -e:
                    continue
                nxt.append(w + ((a, e),))
        out.extend(Word(w) for w in nxt)
        level = nxt
    return out


def _letter_array(actions: Mapping[str, "GeneratorAction"], a: str, e: int) -> np.ndarray:
    try:
        g = actions[a]
    except KeyError:
        raise KeyError(f"no action for generator {a!r}") from None
    return g.array if e == 1 else g.inverse_array


def word_permutation(net: "NetSpace | int", actions: Mapping[str, "GeneratorAction"], w: Word) -> tuple[int, ...]:
    """Permutation ``v -> w(v)``; the last letter is applied first."""
    return tuple(int(x) for x in word_array(net, actions, w))


def word_array(net: "NetSpace | int", actions: Mapping[str, "GeneratorAction"], w: Word) -> np.ndarray:
    n = net if isinstance(net, int) else net.vertex_count
    if not isinstance(w, Word):
        w = Word(tuple(w))
    cur = np.arange(n, dtype=np.int64)
    for a, e in reversed(w.letters):
        cur = _letter_array(actions, a, e)[cur]
    return cur


def fixed_points(net: "NetSpace | int", actions: Mapping[str, "GeneratorAction"], w: Word) -> list[int]:
    """Vertices fixed by ``w``, sorted."""
    arr = word_array(net, actions, w)
    return [int(v) for v in np.nonzero(arr == np.arange(arr.size))[0]]


def words_with_arrays(
    net: "NetSpace | int",
    actions: Mapping[str, "GeneratorAction"],
    L: int,
    labels: Sequence[str] | None = None,
    max_words: int | None = None,
) -> Iterator[tuple[Word, np.ndarray]]:
    """Yield ``(w, word_array(w))`` for every reduced word of length 1..L.

    Arrays are built incrementally along a depth-first traversal, so each word
    costs one gather.  Order is depth-first; callers sort when they need shortlex.
    """
    n = net if isinstance(net, int) else net.vertex_count
    labels = sorted(actions) if labels is None else list(labels)
    cap = limits.resolve("max_words", max_words)
    total = count_reduced_words(len(labels), L)
    if total > cap:
        raise GuardError(f"word enumeration guard: {total} reduced words exceed cap {cap}")
    alphabet = _alphabet(labels)
    arrays = {(a, e): _letter_array(actions, a, e) for a, e in alphabet}

    def rec(prefix: tuple[Letter, ...], arr: np.ndarray):
        if len(prefix) == L:
            return
        for a, e in alphabet:
            if prefix and prefix[-1][0] == a and prefix[-1][1] == -e:
                continue
            # w = prefix * letter: apply the letter first, then the prefix
            new = arr[arrays[(a, e)]]
            word = prefix + ((a, e),)
            yield Word(word), new
            yield from rec(word, new)

    yield from rec((), np.arange(n, dtype=np.int64))


def shortlex_key(w: Word, labels: Sequence[str]) -> tuple:
    rank = {}
    for i, a in enumerate(labels):
        rank[(a, 1)] = 2 * i
        rank[(a, -1)] = 2 * i + 1
    return (len(w), tuple(rank[x] for x in w.letters))


def elliptic_words(
    net: "NetSpace | int",
    actions: Mapping[str, "GeneratorAction"],
    theta: int,
    labels: Sequence[str] | None = None,
    max_words: int | None = None,
) -> list[Word]:
    """Reduced words of length at most ``4*theta`` with a fixed vertex.

    The empty word is excluded.
    """
    if theta < 1:
        raise ValueError("theta must be at least 1")
    labels = sorted(actions) if labels is None else list(labels)
    out = []
    for w, arr in words_with_arrays(net, actions, 4 * theta, labels, max_words):
        if np.any(arr == np.arange(arr.size)):
            out.append(w)
    out.sort(key=lambda w: shortlex_key(w, labels))
    return out


def short_jump_words(
    wg: "WarpedGraph",
    theta: int,
    labels: Sequence[str] | None = None,
    max_words: int | None = None,
) -> list[Word]:
    """Words ``w`` with ``|w| <= 4 theta`` and ``min_y t*d_net(y, w y) + |w| <= 4 theta``."""
    if theta < 1:
        raise ValueError("theta must be at least 1")
    net = wg.net
    actions = {g.label: g for g in wg.generators}
    labels = sorted(actions) if labels is None else list(labels)
    step = wg.t * net.mesh_step
    bound = 4 * theta
    out = []
    for w, arr in words_with_arrays(net, actions, bound, labels, max_words):
        steps = int(net.steps_between(np.arange(arr.size), arr).min())
        if step * steps + len(w) <= bound:
            out.append(w)
    out.sort(key=lambda w: shortlex_key(w, labels))
    return out


# ---------------------------------------------------------------------------
# affine lifts


Matrix = tuple[tuple[int, ...], ...]


def _identity(d: int) -> Matrix:
    return tuple(tuple(int(i == j) for j in range(d)) for i in range(d))


def _matmul(A: Sequence[Sequence], B: Sequence[Sequence]) -> tuple[tuple, ...]:
    return tuple(
        tuple(sum(A[i][k] * B[k][j] for k in range(len(B))) for j in range(len(B[0])))
        for i in range(len(A))
    )


def _matvec(A: Sequence[Sequence], v: Sequence) -> tuple:
    return tuple(sum(A[i][k] * v[k] for k in range(len(v))) for i in range(len(A)))


def det(A: Sequence[Sequence[int]]) -> int:
    """Integer determinant by cofactor expansion (d <= 3 in practice)."""
    n = len(A)
    if n == 1:
        return A[0][0]
    if n == 2:
        return A[0][0] * A[1][1] - A[0][1] * A[1][0]
    total = 0
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in A[1:]]
        total += (-1) ** j * A[0][j] * det(minor)
    return total


def integer_inverse(A: Sequence[Sequence[int]]) -> Matrix:
    """Inverse of a unimodular integer matrix."""
    n = len(A)
    M = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(A)]
    for c in range(n):
        p = next((r for r in range(c, n) if M[r][c] != 0), None)
        if p is None:
            raise ValueError("matrix is singular")
        M[c], M[p] = M[p], M[c]
        piv = M[c][c]
        M[c] = [x / piv for x in M[c]]
        for r in range(n):
            if r != c and M[r][c] != 0:
                f = M[r][c]
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    inv = [row[n:] for row in M]
    if any(x.denominator != 1 for row in inv for x in row):
        raise ValueError("matrix is not unimodular; inverse lift is not integral")
    return tuple(tuple(int(x) for x in row) for row in inv)


@dataclass(frozen=True)
class AffineLift:
    """Affine map ``x -> A x + b`` of R^d covering a torus map (b in period units)."""

    A: Matrix
    b: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "A", tuple(tuple(int(x) for x in row) for row in self.A))
        object.__setattr__(self, "b", tuple(Fraction(x) for x in self.b))

    @classmethod
    def identity(cls, d: int) -> "AffineLift":
        return cls(_identity(d), tuple(Fraction(0) for _ in range(d)))

    @property
    def dimension(self) -> int:
        return len(self.b)

    def compose(self, other: "AffineLift") -> "AffineLift":
        """Lift of ``self`` after ``other``: ``(A1 A2, A1 b2 + b1)``."""
        A = _matmul(self.A, other.A)
        b = tuple(x + y for x, y in zip(_matvec(self.A, other.b), self.b))
        return AffineLift(A, b)

    def inverse(self) -> "AffineLift":
        Ainv = integer_inverse(self.A)
        b = tuple(-x for x in _matvec(Ainv, self.b))
        return AffineLift(Ainv, b)

    def apply(self, x: Sequence) -> tuple[Fraction, ...]:
        return tuple(Fraction(y) + c for y, c in zip(_matvec(self.A, x), self.b))

    def __matmul__(self, other: "AffineLift") -> "AffineLift":
        return self.compose(other)


def word_lift(lifts: Mapping[str, AffineLift | None], w: Word, d: int | None = None) -> AffineLift:
    """Affine lift of ``w`` by the composition law; the empty word lifts to ``(I, 0)``."""
    if d is None:
        d = next((x.dimension for x in lifts.values() if x is not None), 1)
    out = AffineLift.identity(d)
    for a, e in w.letters:
        lift = lifts.get(a)
        if lift is None:
            raise ValueError(f"lift unavailable for non-affine action {a!r}")
        out = out.compose(lift if e == 1 else lift.inverse())
    return out

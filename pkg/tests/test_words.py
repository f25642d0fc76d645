from __future__ import annotations

import itertools
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import compose_word
from warpgroups.errors import GuardError
from warpgroups.spaces import build_cycle_net, build_torus_net, make_affine_generator, make_permutation_generator
from warpgroups.words import (
    AffineLift,
    Word,
    count_reduced_words,
    elliptic_words,
    fixed_points,
    reduced_words,
    short_jump_words,
    word_lift,
    word_permutation,
)
from warpgroups.spaces import warp

SHEAR = ((1, 1), (0, 1))
LOWER = ((1, 0), (1, 1))


def letters_strategy(labels=("a", "b"), max_size=8):
    return st.lists(st.tuples(st.sampled_from(labels), st.sampled_from([1, -1])), max_size=max_size)


class TestWord:
    def test_rejects_unreduced(self):
        with pytest.raises(ValueError, match="not freely reduced"):
            Word((("s", 1), ("s", -1)))

    def test_parse_and_str(self):
        w = Word.parse("a B a")
        assert w.letters == (("a", 1), ("b", -1), ("a", 1))
        assert str(w) == "a B a"
        assert str(w.inverse()) == "A b A"
        assert str(w.reversed()) == "a B a"

    def test_parse_reduce(self):
        assert len(Word.parse("a b B A", reduce=True)) == 0

    def test_power_and_operators(self):
        s = Word.power("s", 1)
        assert s**3 == Word.power("s", 3)
        assert (s**3) * (s**-3) == Word()
        assert ~Word.parse("a b") == Word.parse("B A")

    def test_cyclic_reduce(self):
        assert Word.parse("a b c A").cyclic_reduce() == Word.parse("b c")
        assert Word.parse("a b a").is_cyclically_reduced()

    def test_bad_label(self):
        with pytest.raises(ValueError):
            Word((("S", 1),))

    @given(letters_strategy())
    def test_reduce_is_idempotent(self, letters):
        w = Word.reduce(letters)
        assert Word.reduce(w.letters) == w
        assert w * w.inverse() == Word()

    @given(letters_strategy(), letters_strategy())
    def test_exponent_sums_additive(self, x, y):
        a, b = Word.reduce(x), Word.reduce(y)
        sa, sb, sab = a.exponent_sums(), b.exponent_sums(), (a * b).exponent_sums()
        for g in "ab":
            assert sab.get(g, 0) == sa.get(g, 0) + sb.get(g, 0)


class TestEnumeration:
    def test_one_generator(self):
        ws = reduced_words(["s"], 3)
        assert [str(w) for w in ws] == ["s", "S", "s s", "S S", "s s s", "S S S"]

    def test_two_generators_counts(self):
        assert len(reduced_words(["a", "b"], 1)) == 4
        assert len(reduced_words(["a", "b"], 2)) == 16

    @pytest.mark.parametrize("k,L", [(1, 5), (2, 4), (3, 3)])
    def test_count_formula_matches_brute_force(self, k, L):
        labels = [chr(ord("a") + i) for i in range(k)]
        alphabet = [(a, e) for a in labels for e in (1, -1)]
        brute = 0
        for ell in range(1, L + 1):
            for seq in itertools.product(alphabet, repeat=ell):
                if all(not (x[0] == y[0] and x[1] == -y[1]) for x, y in zip(seq, seq[1:])):
                    brute += 1
        assert count_reduced_words(k, L) == brute == len(reduced_words(labels, L))

    def test_unique_and_deterministic(self):
        a = reduced_words(["a", "b"], 4)
        assert len(set(a)) == len(a)
        assert a == reduced_words(["a", "b"], 4)

    def test_guard(self):
        with pytest.raises(GuardError, match="1456"):
            reduced_words(["a", "b"], 6, max_words=1000)


class TestPermutations:
    def test_rotation_square(self):
        net = build_cycle_net(8)
        s = make_affine_generator(net, "s", 1, Fraction(3, 8))
        perm = word_permutation(net, {"s": s}, Word.parse("s s"))
        assert perm == tuple((v + 6) % 8 for v in range(8))

    def test_shear_square(self):
        net = build_torus_net(4, 2)
        a = make_affine_generator(net, "a", SHEAR, [0, 0])
        perm = word_permutation(net, {"a": a}, Word.parse("a a"))
        for v in range(16):
            x1, x2 = net.coordinates(v)
            assert net.coordinates(perm[v]) == ((x1 + 2 * x2) % 4, x2)

    def test_last_letter_first(self):
        images = {"a": [1, 0, 2], "b": [0, 2, 1]}
        acts = {k: make_permutation_generator(3, k, v) for k, v in images.items()}
        perm = word_permutation(3, acts, Word.parse("a b"))
        assert list(perm) == compose_word({("a", 1): images["a"], ("b", 1): images["b"]}, [("a", 1), ("b", 1)], 3)
        # b first: 1 -> 2 -> 2; a first would give 1 -> 0 -> 0
        assert perm[1] == 2

    def test_unknown_label(self):
        net = build_cycle_net(5)
        with pytest.raises(KeyError):
            word_permutation(net, {}, Word.parse("s"))

    def test_inverse_word_gives_inverse_permutation(self):
        net = build_torus_net(5, 2)
        acts = {"a": make_affine_generator(net, "a", SHEAR, [0, 0]), "b": make_affine_generator(net, "b", LOWER, ["1/5", 0])}
        for w in reduced_words(["a", "b"], 3):
            p = np.asarray(word_permutation(net, acts, w))
            q = np.asarray(word_permutation(net, acts, w.inverse()))
            assert np.array_equal(p[q], np.arange(25))


class TestFixedPoints:
    def test_empty_word(self):
        net = build_cycle_net(8)
        s = make_affine_generator(net, "s", 1, Fraction(3, 8))
        assert fixed_points(net, {"s": s}, Word()) == list(range(8))

    def test_free_rotation(self):
        net = build_cycle_net(8)
        s = make_affine_generator(net, "s", 1, Fraction(3, 8))
        assert fixed_points(net, {"s": s}, Word.parse("s")) == []

    def test_shear(self):
        net = build_torus_net(4, 2)
        a = make_affine_generator(net, "a", SHEAR, [0, 0])
        fix = fixed_points(net, {"a": a}, Word.parse("a"))
        assert [net.coordinates(v) for v in fix] == [(x, 0) for x in range(4)]

    def test_conjugation_equivariance(self):
        net = build_torus_net(5, 2)
        acts = {"a": make_affine_generator(net, "a", SHEAR, [0, 0]), "b": make_affine_generator(net, "b", LOWER, ["2/5", "1/5"])}
        for w in reduced_words(["a", "b"], 3):
            for g in reduced_words(["a", "b"], 1):
                conj = Word.reduce((g * w * g.inverse()).letters)
                gperm = word_permutation(net, acts, g)
                expected = sorted(gperm[v] for v in fixed_points(net, acts, w))
                assert fixed_points(net, acts, conj) == expected


class TestEllipticWords:
    def test_order_four_rotation(self):
        net = build_cycle_net(60)
        s = make_affine_generator(net, "s", 1, Fraction(15, 60))
        assert [str(w) for w in elliptic_words(net, {"s": s}, 1)] == ["s s s s", "S S S S"]

    def test_free_like_rotation(self):
        net = build_cycle_net(61)
        s = make_affine_generator(net, "s", 1, Fraction(27, 61))
        assert elliptic_words(net, {"s": s}, 1) == []

    def test_linear_maps_fix_origin(self):
        net = build_torus_net(4, 2)
        acts = {"a": make_affine_generator(net, "a", SHEAR, [0, 0]), "b": make_affine_generator(net, "b", LOWER, [0, 0])}
        assert len(elliptic_words(net, acts, 1)) == count_reduced_words(2, 4)

    def test_closed_under_inversion(self):
        net = build_cycle_net(24)
        acts = {"s": make_affine_generator(net, "s", 1, Fraction(3, 24)), "r": make_affine_generator(net, "r", -1, 0)}
        ell = set(elliptic_words(net, acts, 1))
        assert ell == {w.inverse() for w in ell}


class TestShortJumpWords:
    def test_contains_elliptic(self):
        net = build_cycle_net(60)
        s = make_affine_generator(net, "s", 1, Fraction(1, 4))
        wg = warp(net, [s], 100)
        assert set(elliptic_words(net, {"s": s}, 1)) <= set(short_jump_words(wg, 1))

    def test_large_t_free_action(self):
        net = build_cycle_net(61)
        s = make_affine_generator(net, "s", 1, Fraction(27, 61))
        assert short_jump_words(warp(net, [s], 10_000), 1) == []

    def test_small_displacement(self):
        net = build_cycle_net(8)
        s = make_affine_generator(net, "s", 1, Fraction(1, 8))
        words = short_jump_words(warp(net, [s], 2), 1)
        assert Word.parse("s") in words
        # displacement k/4 plus length k stays within 4 exactly for k <= 3
        assert Word.power("s", 3) in words and Word.power("s", 4) not in words


class TestAffineLift:
    def test_empty(self):
        assert word_lift({"s": AffineLift(((1,),), (Fraction(1, 4),))}, Word()) == AffineLift.identity(1)

    def test_rotation_power(self):
        lift = word_lift({"s": AffineLift(((1,),), (Fraction(1, 4),))}, Word.power("s", 4))
        assert lift == AffineLift(((1,),), (Fraction(1),))

    def test_product_matches_permutation(self):
        net = build_torus_net(6, 2)
        acts = {"a": make_affine_generator(net, "a", SHEAR, [0, 0]), "b": make_affine_generator(net, "b", LOWER, [0, 0])}
        lifts = {k: g.affine_lift for k, g in acts.items()}
        lift = word_lift(lifts, Word.parse("a b"))
        assert lift.A == ((2, 1), (1, 1))
        assert lift.b == (0, 0)
        perm = word_permutation(net, acts, Word.parse("a b"))
        g = make_affine_generator(net, "g", lift.A, lift.b)
        assert perm == g.permutation

    def test_missing_lift(self):
        with pytest.raises(ValueError, match="lift unavailable for non-affine action"):
            word_lift({"s": None}, Word.parse("s"), 1)

    def test_composition_law_random_pairs(self):
        rng = random.Random(11)
        mats = [((1, 1), (0, 1)), ((1, 0), (1, 1)), ((0, -1), (1, 0)), ((2, 1), (1, 1))]
        lifts = {
            lab: AffineLift(mats[i], (Fraction(rng.randint(0, 7), 8), Fraction(rng.randint(0, 5), 6)))
            for i, lab in enumerate("abcd")
        }
        for _ in range(1000):
            x = Word.reduce((rng.choice("abcd"), rng.choice((1, -1))) for _ in range(rng.randint(0, 5)))
            y = Word.reduce((rng.choice("abcd"), rng.choice((1, -1))) for _ in range(rng.randint(0, 5)))
            assert word_lift(lifts, x * y, 2) == word_lift(lifts, x, 2).compose(word_lift(lifts, y, 2))

    @settings(max_examples=50)
    @given(st.lists(st.tuples(st.sampled_from("ab"), st.sampled_from([1, -1])), max_size=6))
    def test_lift_inverse(self, letters):
        lifts = {"a": AffineLift(SHEAR, (Fraction(1, 3), 0)), "b": AffineLift(LOWER, (0, Fraction(1, 2)))}
        w = Word.reduce(letters)
        assert word_lift(lifts, w, 2).compose(word_lift(lifts, w.inverse(), 2)) == AffineLift.identity(2)

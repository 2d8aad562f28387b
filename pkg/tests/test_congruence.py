import math
from fractions import Fraction as F

import numpy as np
import pytest

from fracweyl.congruence import (
    DihedralAction1D,
    DyadicDilation,
    LatticeTranslation,
    dilation_congruent,
    dyadic_reduce,
    exponential_gram,
    g_congruent,
    is_fundamental_domain,
    reduce_mod,
    translation_congruent,
)
from fracweyl.errors import InvalidGeometryError, InvalidInputError
from fracweyl.intervals import IntervalUnion


def shannon():
    return IntervalUnion(((-2, -1), (1, 2)))


def base():
    return IntervalUnion(((0, 2),))


class TestIntervalUnion:
    def test_normalization_merges(self):
        e = IntervalUnion.from_pairs([(0, 1), (1, 2), (3, 4)])
        assert e.pieces == ((F(0), F(2)), (F(3), F(4)))

    def test_overlap_rejected_in_strict_constructor(self):
        with pytest.raises(InvalidGeometryError):
            IntervalUnion(((0, 2), (1, 3)))

    def test_boolean_algebra(self):
        e = base()
        f = IntervalUnion(((1, 2),))
        assert e.subtract(f).pieces == ((F(0), F(1)),)
        assert e.intersect(e).pieces == e.pieces  # idempotent
        assert e.union(f).pieces == e.pieces

    def test_measure_shannon(self):
        assert shannon().measure() == 2
        assert shannon().measure_float() == pytest.approx(2 * math.pi)

    def test_exact_rational_ops(self):
        e = IntervalUnion(((F(1, 3), F(2, 3)),))
        scaled = e.scale(F(3, 2))
        assert scaled.pieces == ((F(1, 2), F(1)),)
        back = scaled.translate(F(-1, 2))
        assert back.pieces == ((F(0), F(1, 2)),)

    def test_json_bit_exact_round_trip(self):
        e = IntervalUnion(((F(-32, 7), -4), (F(4, 7), 1)))
        text = e.to_json()
        assert '"-32/7"' in text
        back = IntervalUnion.from_json(text)
        assert back == e
        assert back.to_json() == text

    def test_unit_mismatch(self):
        with pytest.raises(InvalidInputError):
            base().union(IntervalUnion(((0, 1),), unit="1"))


class TestReductions:
    def test_reduce_mod_splits(self):
        e = IntervalUnion(((F(-1, 2), F(5, 2)),))
        pieces = reduce_mod(e, F(2))
        total = sum(hi - lo for lo, hi, _ in pieces)
        assert total == e.measure()
        for lo, hi, _k in pieces:
            assert 0 <= lo < hi <= 2

    def test_dyadic_reduce_octaves(self):
        e = IntervalUnion(((F(1, 2), F(3),),))
        pieces, residue = dyadic_reduce(e)
        assert residue == 0
        for lo, hi, n in pieces:
            assert (1 <= lo < hi <= 2) or (-2 <= lo < hi <= -1)
        # [1/2,1) -> exp -1, [1,2) -> exp 0, [2,3) -> exp 1
        assert sorted(n for _, _, n in pieces) == [-1, 0, 1]

    def test_residue_at_origin(self):
        e = IntervalUnion(((0, 1),))
        _, residue = dyadic_reduce(e, window=8)
        assert residue == F(1, 256)


class TestTranslationCongruence:
    def test_paper_example(self):
        w = translation_congruent(base(), shannon())
        assert w.congruent
        labels = sorted(k for _, _, k in w.matched)
        assert labels == [-1, 0]

    def test_shannon_to_base_partition(self):
        w = translation_congruent(shannon(), base())
        assert w.congruent
        # witness pieces reproduce the target when shifted
        for (slo, shi), (dlo, dhi), k in w.matched:
            assert slo + 2 * k == dlo and shi + 2 * k == dhi

    def test_measure_mismatch(self):
        w = translation_congruent(IntervalUnion(((0, 1),)), base())
        assert not w.congruent
        assert w.defect == 1  # pi units

    def test_self_congruence(self):
        from fracweyl.wavelets import journe_set

        w = translation_congruent(journe_set(), base())
        assert w.congruent


class TestDilationCongruence:
    def test_identity_labels(self):
        w = dilation_congruent(shannon(), shannon())
        assert w.congruent
        assert all(k == 0 for _, _, k in w.matched)

    def test_single_shift(self):
        w = dilation_congruent(IntervalUnion(((1, 2),)), IntervalUnion(((2, 4),)))
        assert w.congruent
        assert {k for _, _, k in w.matched} == {1}

    def test_collision(self):
        w = dilation_congruent(IntervalUnion(((1, 3),)), shannon())
        assert not w.congruent
        assert w.defect == F(3, 2)

    def test_witness_validity(self):
        from fracweyl.wavelets import journe_set

        w = dilation_congruent(journe_set(), shannon())
        assert w.congruent
        for (slo, shi), (dlo, dhi), k in w.matched:
            p2 = F(2) ** k
            assert slo * p2 == dlo and shi * p2 == dhi


class TestFundamentalDomains:
    def test_base_cell_lattice(self):
        assert is_fundamental_domain(base(), LatticeTranslation(F(2))).ok

    def test_shannon_dyadic(self):
        assert is_fundamental_domain(shannon(), DyadicDilation()).ok

    def test_base_not_dyadic(self):
        rep = is_fundamental_domain(base(), DyadicDilation())
        assert rep.status == "not-fundamental-domain"
        assert rep.overlap > 0

    def test_alcove_dihedral_regional(self):
        alc = IntervalUnion(((0, 1),), unit="1")
        rep = is_fundamental_domain(
            alc, DihedralAction1D(F(2)), region=(-3, 3), cutoff=8
        )
        assert rep.ok
        assert rep.overlap == 0 and rep.uncovered == 0

    def test_too_small_set_fails(self):
        small = IntervalUnion(((0, F(1, 2)),), unit="1")
        rep = is_fundamental_domain(
            small, DihedralAction1D(F(2)), region=(-2, 2), cutoff=8
        )
        assert not rep.ok


class TestGCongruence:
    def test_identity(self):
        w = g_congruent(shannon(), shannon(), LatticeTranslation(F(2)), 4)
        assert w.congruent

    def test_weyl_reflection(self):
        e = IntervalUnion(((0, 1),), unit="1")
        f = IntervalUnion(((1, 2),), unit="1")
        w = g_congruent(e, f, DihedralAction1D(F(2)), 4)
        assert w.congruent
        # single matched piece moved by one group element
        assert len(w.matched) == 1

    def test_measure_mismatch_immediate(self):
        e = IntervalUnion(((0, 1),))
        f = IntervalUnion(((0, 3),))
        w = g_congruent(e, f, LatticeTranslation(F(2)), 4)
        assert w.status == "not-congruent"
        assert w.defect >= 2

    def test_equivalence_relation_on_fixture_family(self):
        # random sets built from a common fundamental domain are pairwise
        # congruent; congruence is reflexive, symmetric, transitive there
        rng = np.random.default_rng(17)
        action = LatticeTranslation(F(2))
        for _ in range(5):
            cuts = sorted(rng.integers(1, 16, size=3))
            qs = [F(0)] + [F(int(c), 8) for c in cuts] + [F(2)]
            pieces = [(qs[i], qs[i + 1]) for i in range(4) if qs[i] < qs[i + 1]]
            shifts = rng.integers(-3, 4, size=len(pieces))
            sets = []
            for _ in range(3):
                shifts = rng.integers(-3, 4, size=len(pieces))
                sets.append(
                    IntervalUnion.from_pairs(
                        [(lo + 2 * int(k), hi + 2 * int(k)) for (lo, hi), k in zip(pieces, shifts)]
                    )
                )
            a, b, c = sets
            assert g_congruent(a, a, action, 8).congruent
            ab = g_congruent(a, b, action, 8)
            ba = g_congruent(b, a, action, 8)
            assert ab.congruent and ba.congruent
            assert g_congruent(b, c, action, 8).congruent
            assert g_congruent(a, c, action, 8).congruent

    def test_measure_invariance_under_actions(self):
        rng = np.random.default_rng(23)
        for _ in range(5):
            lo = F(int(rng.integers(-8, 8)), 4)
            hi = lo + F(int(rng.integers(1, 8)), 4)
            e = IntervalUnion(((lo, hi),))
            assert e.translate(2).measure() == e.measure()
            assert e.reflect().measure() == e.measure()
            assert e.scale(2).measure() == 2 * e.measure()


class TestExponentialGram:
    def test_full_period_identity(self):
        _, dev = exponential_gram(base(), 8)
        assert dev <= 1e-14

    def test_shannon_identity(self):
        _, dev = exponential_gram(shannon(), 8)
        assert dev <= 1e-10

    def test_half_period_diagonal(self):
        g, dev = exponential_gram(IntervalUnion(((0, 1),)), 8)
        assert dev > 1e-2
        n = g.shape[0] // 2
        assert g[n, n].real == pytest.approx(0.5)
        # analytic off-diagonal: |c_m| = 1/(pi |m|) for odd m
        assert abs(g[n, n + 1]) == pytest.approx(1 / math.pi, rel=1e-12)

    def test_lemma9_equivalence_both_directions(self):
        from fracweyl.wavelets import journe_set

        fixtures = [
            base(),
            shannon(),
            journe_set(),
            IntervalUnion(((0, 1),)),
            IntervalUnion(((0, 1), (3, 4))),
            IntervalUnion(((-2, 0),)),
            IntervalUnion(((F(1, 2), F(5, 2)),)),
            IntervalUnion(((0, 1), (5, 6))),
        ]
        for e in fixtures:
            congruent = translation_congruent(e, base()).congruent
            _, dev = exponential_gram(e, 8)
            assert congruent == (dev <= 1e-10), (e, dev)

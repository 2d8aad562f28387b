import math

import numpy as np
import pytest

from fracweyl.errors import (
    InvalidInputError,
    NonGenericVectorError,
    NotClosedWithinCapError,
    NotCrystallographicError,
)
from fracweyl.weyl import (
    AffineReflectionSpec,
    Ball,
    Box,
    CATALOG_NAMES,
    RootSystemData,
    affine_reflect,
    cartan_integer,
    catalog_json,
    coroot,
    extend_function,
    finite_weyl_order,
    fold,
    group_closure,
    positive_and_simple,
    rank2_catalog,
    reflect,
    reflection_matrix,
    tessellate,
)

S3 = math.sqrt(3.0)


class TestReflect:
    def test_negates_own_vector(self):
        a = np.array([2.0, 1.0])
        assert np.allclose(reflect(a, a), -a)

    def test_fixes_orthogonal(self):
        a = np.array([1.0, 0.0])
        x = np.array([0.0, 3.0])
        assert np.allclose(reflect(a, x), x)

    def test_a2_simple_roots(self):
        a1 = np.array([1.0, 0.0])
        a2 = np.array([-0.5, S3 / 2])
        assert np.allclose(reflect(a1, a2), a1 + a2)

    def test_zero_rejected(self):
        with pytest.raises(InvalidInputError):
            reflect(np.zeros(2), np.ones(2))

    def test_isometry_involution_random(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            a = rng.normal(size=3)
            x, y = rng.normal(size=3), rng.normal(size=3)
            rx, ry = reflect(a, x), reflect(a, y)
            assert np.linalg.norm(rx - ry) == pytest.approx(
                np.linalg.norm(x - y), abs=1e-10
            )
            assert np.allclose(reflect(a, rx), x, atol=1e-10)


class TestAffineReflect:
    def test_k_zero_is_linear(self):
        spec = AffineReflectionSpec(np.array([1.0, 2.0]), 0)
        x = np.array([0.3, -0.7])
        assert np.allclose(affine_reflect(spec, x), reflect(spec.alpha, x))

    def test_unit_alpha_k_one(self):
        spec = AffineReflectionSpec(np.array([1.0, 0.0]), 1)
        out = affine_reflect(spec, np.array([0.3, 0.4]))
        assert np.allclose(out, [1.7, 0.4])

    def test_involution(self):
        spec = AffineReflectionSpec(np.array([1.0, 1.0]), 2)
        x = np.array([0.2, -1.4])
        assert np.allclose(affine_reflect(spec, affine_reflect(spec, x)), x, atol=1e-12)

    def test_coroot_decomposition(self):
        # r_{alpha,k}(x) - r_alpha(x) = k alpha_check exactly
        rng = np.random.default_rng(4)
        for _ in range(10):
            a = rng.normal(size=2)
            k = int(rng.integers(-3, 4))
            x = rng.normal(size=2)
            spec = AffineReflectionSpec(a, k)
            diff = affine_reflect(spec, x) - reflect(a, x)
            assert np.allclose(diff, k * coroot(a), atol=1e-12)

    def test_as_affine_map(self):
        spec = AffineReflectionSpec(np.array([0.5, 0.5]), 1)
        m = spec.as_affine_map()
        x = np.array([0.1, 0.9])
        assert np.allclose(m(x), affine_reflect(spec, x))


class TestCartan:
    def test_orthogonal_pair(self):
        c = cartan_integer([0.0, 1.0], [1.0, 0.0])
        assert c.n_beta_alpha == 0 and c.theta == pytest.approx(math.pi / 2)

    def test_a2_adjacent_simples(self):
        c = cartan_integer([-0.5, S3 / 2], [1.0, 0.0])
        assert (c.n_beta_alpha, c.n_alpha_beta) == (-1, -1)
        assert c.theta == pytest.approx(2 * math.pi / 3)
        assert c.length_ratio == pytest.approx(1.0)

    def test_b2_long_short_obtuse(self):
        c = cartan_integer([-1.0, 1.0], [1.0, 0.0])
        assert {c.n_beta_alpha, c.n_alpha_beta} == {-1, -2}
        assert c.theta == pytest.approx(3 * math.pi / 4)
        assert c.length_ratio == pytest.approx(math.sqrt(2.0))

    def test_g2_pair(self):
        c = cartan_integer([-1.5, S3 / 2], [1.0, 0.0])
        assert {c.n_beta_alpha, c.n_alpha_beta} == {-1, -3}
        assert c.theta == pytest.approx(5 * math.pi / 6)

    def test_not_crystallographic(self):
        with pytest.raises(NotCrystallographicError):
            cartan_integer([1.0, 0.3], [1.0, 0.0])


class TestPositiveSimple:
    def test_a2_counts(self):
        roots = rank2_catalog("A2").system.roots
        pos, simple = positive_and_simple(roots, [1.0, 0.618])
        assert len(pos) == 3 and len(simple) == 2

    def test_g2_counts(self):
        roots = rank2_catalog("G2").system.roots
        pos, simple = positive_and_simple(roots, [1.0, 0.618])
        assert len(pos) == 6 and len(simple) == 2

    def test_rank1(self):
        pos, simple = positive_and_simple(np.array([[1.0], [-1.0]]), [2.0])
        assert len(pos) == 1 and len(simple) == 1

    def test_wall_vector_rejected(self):
        roots = rank2_catalog("A2").system.roots
        with pytest.raises(NonGenericVectorError):
            positive_and_simple(roots, [0.0, 1.0])

    def test_simples_pairwise_obtuse(self):
        for name in ("A2", "B2", "G2"):
            s = rank2_catalog(name).system.simples
            for i in range(len(s)):
                for j in range(i + 1, len(s)):
                    assert float(s[i] @ s[j]) <= 1e-9


class TestCatalog:
    @pytest.mark.parametrize("name", CATALOG_NAMES)
    def test_axioms(self, name):
        rep = rank2_catalog(name).system.validate()
        assert rep.ok
        assert rep.max_integrality_dev <= 1e-9

    def test_alcove_angles(self):
        expect = {
            "A2": [60.0, 60.0, 60.0],
            "B2": [45.0, 45.0, 90.0],
            "G2": [30.0, 60.0, 90.0],
        }
        for name, angles in expect.items():
            got = np.degrees(rank2_catalog(name).alcove.angles())
            assert np.allclose(got, angles, atol=1e-9)

    def test_finite_orders(self):
        orders = {"A1": 2, "A1xA1": 4, "A2": 6, "B2": 8, "G2": 12}
        for name, order in orders.items():
            assert finite_weyl_order(rank2_catalog(name)) == order

    def test_unknown_name(self):
        with pytest.raises(InvalidInputError):
            rank2_catalog("E8")

    def test_broken_r2(self):
        # adding 2 alpha to A1 x A1 breaks the multiples axiom
        roots = np.array(
            [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0], [2.0, 0.0], [-2.0, 0.0]]
        )
        data = RootSystemData.from_roots("broken", roots, [1.0, 0.618])
        assert not data.validate().r2_multiples

    def test_catalog_json(self):
        import json

        doc = json.loads(catalog_json("B2"))
        assert doc["finite_order"] == 8
        assert len(doc["roots"]) == 8
        assert len(doc["generators"]) == 3


class TestGroupClosure:
    def test_klein_four(self):
        gens = [reflection_matrix(np.array([1.0, 0.0])), reflection_matrix(np.array([0.0, 1.0]))]
        order, elements = group_closure(gens)
        assert order == 4

    def test_cap_exceeded(self):
        # an irrational rotation-like pair of reflections never closes
        a = np.array([1.0, 0.0])
        b = np.array([math.cos(1.0), math.sin(1.0)])
        with pytest.raises(NotClosedWithinCapError):
            group_closure([reflection_matrix(a), reflection_matrix(b)], cap=50)

    def test_simply_transitive_on_chambers(self):
        # for random chamber pairs exactly one element maps one sample
        # point into the other chamber
        weyl = rank2_catalog("B2")
        _, elements = group_closure(
            [reflection_matrix(d) for d in weyl.system.simples]
        )
        roots = weyl.system.roots
        rng = np.random.default_rng(9)
        for _ in range(10):
            x = rng.normal(size=2)
            y = rng.normal(size=2)
            if np.any(np.abs(roots @ x) < 1e-9) or np.any(np.abs(roots @ y) < 1e-9):
                continue
            sig_y = np.sign(roots @ y)
            hits = sum(
                1 for g in elements if np.all(np.sign(roots @ (g @ x)) == sig_y)
            )
            assert hits == 1


class TestFold:
    def test_inside_identity(self):
        a1 = rank2_catalog("A1")
        res = a1.fold([0.5])
        assert res.word.letters == ()
        assert np.allclose(res.point, [0.5])

    def test_a1_representative(self):
        a1 = rank2_catalog("A1")
        res = a1.fold([2.3])
        assert np.allclose(res.point, [0.3], atol=1e-10)
        assert np.allclose(res.word.map(np.array([2.3])), res.point, atol=1e-10)

    def test_idempotent_random(self):
        b2 = rank2_catalog("B2")
        rng = np.random.default_rng(10)
        for _ in range(50):
            x = rng.uniform(-5, 5, size=2)
            res = b2.fold(x)
            assert b2.alcove.contains(res.point, tol=1e-8)
            again = b2.fold(res.point)
            assert again.word.letters == ()

    def test_word_reproduces_representative(self):
        g2 = rank2_catalog("G2")
        rng = np.random.default_rng(12)
        for _ in range(20):
            x = rng.uniform(-4, 4, size=2)
            res = g2.fold(x)
            assert np.allclose(res.word.map(x), res.point, atol=1e-10)


class TestTessellate:
    def test_a1_window(self):
        a1 = rank2_catalog("A1")
        res = tessellate(a1, Box([-2.0], [2.0]), 4)
        cells = sorted(
            (round(float(c.min()), 9), round(float(c.max()), 9)) for _, c in res.entries
        )
        assert cells == [(-2.0, -1.0), (-1.0, 0.0), (0.0, 1.0), (1.0, 2.0)]
        assert res.uncovered == pytest.approx(0.0, abs=1e-12)

    def test_uncovered_monotone(self):
        b2 = rank2_catalog("B2")
        ball = Ball([0.0, 0.0], 3.0)
        uncovered = [tessellate(b2, ball, n).uncovered for n in (2, 4, 6, 8)]
        assert all(u1 >= u2 - 1e-12 for u1, u2 in zip(uncovered, uncovered[1:]))
        assert uncovered[-1] <= 1e-9

    def test_pairwise_overlap_tiny(self):
        b2 = rank2_catalog("B2")
        res = tessellate(b2, Ball([0.0, 0.0], 2.0), 6)
        cell_area = 0.5 * abs(
            np.linalg.det(b2.alcove.vertices[1:] - b2.alcove.vertices[0])
        )
        assert res.max_pairwise_overlap <= 1e-9 * cell_area

    def test_translation_subgroup_in_coroot_lattice(self):
        # words with identity linear part translate by coroot-lattice vectors
        b2 = rank2_catalog("B2")
        coroots = b2.system.coroots
        basis = np.array([coroots[0], coroots[4]]).T  # a short and a long coroot
        found = 0
        for word in b2.words_up_to(6):
            if len(word.letters) and np.allclose(word.map.matrix, np.eye(2), atol=1e-10):
                coeff = np.linalg.solve(basis, word.map.offset)
                assert np.allclose(coeff, np.round(coeff), atol=1e-9)
                found += 1
        assert found > 0


@pytest.fixture(scope="module")
def alcove_function():
    from fracweyl.fractal import ScaleVector, fix_point, lambdas_of
    from fracweyl.partition import build_labelling, interval_scheme

    scheme = interval_scheme(fold=True)
    labelling = build_labelling(scheme)
    scales = ScaleVector.constant(0.4, 2)
    lams = lambdas_of(lambda p: p[0], scales, scheme, labelling)
    return fix_point(scheme, labelling, lams, scales)


class TestExtend:
    def test_identity_inside(self, alcove_function):
        a1 = rank2_catalog("A1")
        val = extend_function(alcove_function, a1, [0.25])
        assert val[0] == pytest.approx(0.25, abs=1e-12)

    def test_fold_then_evaluate(self, alcove_function):
        a1 = rank2_catalog("A1")
        val = extend_function(alcove_function, a1, [1.25])
        assert val[0] == pytest.approx(0.75, abs=1e-12)

    def test_wall_continuity(self, alcove_function):
        a1 = rank2_catalog("A1")
        eps = 1e-9
        left, bl = extend_function(alcove_function, a1, [1.0 - eps])
        right, br = extend_function(alcove_function, a1, [1.0 + eps])
        assert abs(left - right) <= bl + br + 1e-6

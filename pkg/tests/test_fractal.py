import numpy as np
import pytest

from fracweyl.errors import NotContractiveError, OutOfDomainError, RankDeficientError
from fracweyl.fractal import (
    FractalFunction,
    InterpolationSet,
    LambdaVector,
    ScaleVector,
    build_grid,
    check_joinup,
    fix_point,
    fractal_basis,
    gram_matrix,
    lambdas_from_interpolation,
    lambdas_of,
    orthonormalize,
    rb_apply,
    samples_csv,
    surface_obj,
)
from fracweyl.partition import build_labelling, example2_scheme, interval_scheme


@pytest.fixture(scope="module")
def interval_fixture():
    scheme = interval_scheme(fold=False)
    labelling = build_labelling(scheme)
    z = InterpolationSet.from_pairs(
        labelling, [([0.0], 0.0), ([0.5], 1.0), ([1.0], 0.0)]
    )
    scales = ScaleVector.constant(0.5, 2)
    lams = lambdas_from_interpolation(z, scales, labelling, scheme)
    return scheme, labelling, z, scales, lams


@pytest.fixture(scope="module")
def example2_fixture():
    scheme = example2_scheme()
    labelling = build_labelling(scheme)
    scales = ScaleVector.constant(0.3, 4)
    return scheme, labelling, scales


def example2_interpolation(labelling, z1, z2, z3):
    pairs = [
        ([0.0, 0.0], 0.0),
        ([1.0, 0.0], 0.0),
        ([0.0, 1.0], 0.0),
        ([0.5, 0.0], z1),
        ([0.5, 0.5], z2),
        ([0.0, 0.5], z3),
    ]
    return InterpolationSet.from_pairs(labelling, pairs)


def uniform_grid_oracle(lams, s, n_points=257, sweeps=80):
    """Independent fixed-point oracle for the classic [0,1] split:
    iterate the operator on a uniform dyadic grid, never touching the
    address-grid machinery."""
    xs = np.linspace(0.0, 1.0, n_points)
    g = np.zeros(n_points)
    lam1 = lambda t: lams.scalar(0, [t])
    lam2 = lambda t: lams.scalar(1, [t])
    for _ in range(sweeps):
        new = np.empty_like(g)
        for idx, x in enumerate(xs):
            if x <= 0.5:
                y = 2 * x
                val = lam1(y)
            else:
                y = 2 * x - 1
                val = lam2(y)
            # y lands exactly on the grid because n_points - 1 is even
            j = int(round(y * (n_points - 1)))
            new[idx] = val + s * g[j]
        g = new
    return xs, g


class TestRbApply:
    def test_zero_everything(self, interval_fixture):
        scheme, labelling, _, scales, _ = interval_fixture
        grid = build_grid(scheme, labelling, 4)
        zero_lams = LambdaVector.zeros(2, 1)
        out = rb_apply(grid, zero_lams, scales, np.zeros(len(grid)))
        assert np.all(out == 0.0)

    def test_direct_substitution(self, interval_fixture):
        scheme, labelling, _, scales, lams = interval_fixture
        grid = build_grid(scheme, labelling, 4)
        out = rb_apply(grid, lams, scales, np.zeros(len(grid)))
        # (Phi 0)(1/4) = lambda_1(1/2) = 1/2
        idx = np.argmin(np.abs(grid.points.ravel() - 0.25))
        assert out[idx] == pytest.approx(0.5)

    def test_affine_invariance(self, example2_fixture):
        # g affine and lambda_i := g o u_i - s_i g force Phi g = g
        scheme, labelling, scales = example2_fixture
        g = lambda p: 1.5 * p[0] - 0.25 * p[1] + 0.75
        lams = lambdas_of(g, scales, scheme, labelling)
        grid = build_grid(scheme, labelling, 5)
        values = np.array([g(p) for p in grid.points])
        out = rb_apply(grid, lams, scales, values)
        assert np.max(np.abs(out - values)) <= 1e-12

    def test_function_valued_scales(self, interval_fixture):
        scheme, labelling, _, _, lams = interval_fixture
        scales = ScaleVector(
            (lambda p: 0.25 + 0.2 * p[0], lambda p: 0.1), sup_bound=0.45
        )
        grid = build_grid(scheme, labelling, 4)
        out = rb_apply(grid, lams, scales, np.ones(len(grid)))
        idx = np.argmin(np.abs(grid.points.ravel() - 0.25))
        # (Phi 1)(1/4) = lambda_1(1/2) + s_1(1/2) * 1
        assert out[idx] == pytest.approx(0.5 + 0.25 + 0.2 * 0.5)


class TestFixPoint:
    def test_zero_lambda_zero_fixed_point(self, interval_fixture):
        scheme, labelling, _, scales, _ = interval_fixture
        f = fix_point(scheme, labelling, LambdaVector.zeros(2, 1), scales)
        assert np.max(np.abs(f.grid_values)) == 0.0

    def test_dyadic_values_exact(self, interval_fixture):
        scheme, labelling, z, scales, lams = interval_fixture
        f = fix_point(scheme, labelling, lams, scales, z=z)
        assert f.evaluate([0.25]) == (1.0, 0.0)
        assert f.evaluate([0.75]) == (1.0, 0.0)

    def test_equation_residual_on_grid(self, interval_fixture):
        scheme, labelling, z, scales, lams = interval_fixture
        f = fix_point(scheme, labelling, lams, scales, z=z, grid_depth=10)
        resid = rb_apply(f.grid, lams, scales, f.grid_values) - f.grid_values
        assert np.max(np.abs(resid)) <= 1e-9

    def test_against_uniform_grid_oracle(self, interval_fixture):
        scheme, labelling, z, scales, lams = interval_fixture
        xs, g = uniform_grid_oracle(lams, 0.5)
        f = fix_point(scheme, labelling, lams, scales, z=z)
        for x, expected in zip(xs[::16], g[::16]):
            got, bound = f.evaluate([x])
            assert got == pytest.approx(expected, abs=1e-10 + bound)

    def test_example2_interpolates(self, example2_fixture):
        scheme, labelling, scales = example2_fixture
        z = example2_interpolation(labelling, 0.8, -0.3, 1.1)
        lams = lambdas_from_interpolation(z, scales, labelling, scheme)
        f = fix_point(scheme, labelling, lams, scales, grid_depth=6, z=z)
        for vid in range(6):
            p = labelling.registry.points[vid]
            assert f.evaluate(p)[0] == pytest.approx(z.values[vid], abs=1e-12)

    def test_not_contractive(self, interval_fixture):
        scheme, labelling, _, _, lams = interval_fixture
        with pytest.raises(NotContractiveError):
            fix_point(scheme, labelling, lams, ScaleVector.constant(1.0, 2))


class TestLambdasFromInterpolation:
    def test_zero_data(self, example2_fixture):
        scheme, labelling, scales = example2_fixture
        z = example2_interpolation(labelling, 0.0, 0.0, 0.0)
        lams = lambdas_from_interpolation(z, scales, labelling, scheme)
        for g, c in lams.entries:
            assert np.allclose(g, 0.0) and c == 0.0

    def test_interval_lambdas(self, interval_fixture):
        _, _, _, _, lams = interval_fixture
        (g1, c1), (g2, c2) = lams.entries
        assert g1[0] == pytest.approx(1.0) and c1 == pytest.approx(0.0)
        assert g2[0] == pytest.approx(-1.0) and c2 == pytest.approx(1.0)

    def test_example2_printed_formulas(self, example2_fixture):
        # lambda_1 = lambda_2 = -z1 x + (z2 - z1) y + z1
        # lambda_3 = lambda_4 = (z2 - z3) x - z3 y + z3
        # with z1 at (1/2,0), z2 at (1/2,1/2), z3 at (0,1/2)
        scheme, labelling, scales = example2_fixture
        z1, z2, z3 = 0.7, -0.4, 1.3
        z = example2_interpolation(labelling, z1, z2, z3)
        lams = lambdas_from_interpolation(z, scales, labelling, scheme)
        expected = [
            ([-z1, z2 - z1], z1),
            ([-z1, z2 - z1], z1),
            ([z2 - z3, -z3], z3),
            ([z2 - z3, -z3], z3),
        ]
        for (g, c), (eg, ec) in zip(lams.entries, expected):
            assert np.allclose(g, eg, atol=1e-12)
            assert c == pytest.approx(ec, abs=1e-12)

    def test_interpolation_conditions_hold(self, example2_fixture):
        scheme, labelling, scales = example2_fixture
        z = example2_interpolation(labelling, 0.5, 0.25, -0.75)
        lams = lambdas_from_interpolation(z, scales, labelling, scheme)
        for i, ids in enumerate(labelling.cell_vertex_ids):
            for j, vid in enumerate(ids):
                k = labelling.cell_labels[i][j]
                p = scheme.parent.vertices[k]
                lhs = lams.scalar(i, p) + 0.3 * z.values[labelling.parent_ids[k]]
                assert lhs == pytest.approx(z.values[vid], abs=1e-13)


class TestJoinup:
    def test_example2_passes(self, example2_fixture):
        scheme, labelling, scales = example2_fixture
        z = example2_interpolation(labelling, 0.9, 0.2, -0.6)
        lams = lambdas_from_interpolation(z, scales, labelling, scheme)
        rep = check_joinup(scheme, lams, scales, z=z, labelling=labelling)
        assert rep.ok
        # the diagonal facet needs the recursive (numeric) path
        statuses = {fc.cells: fc.structural for fc in rep.facets}
        assert statuses[(1, 2)] == "needs-numeric"

    def test_perturbed_lambda_fails_with_location(self, example2_fixture):
        scheme, labelling, scales = example2_fixture
        z = example2_interpolation(labelling, 0.9, 0.2, -0.6)
        lams = lambdas_from_interpolation(z, scales, labelling, scheme)
        entries = list(lams.entries)
        entries[0] = (entries[0][0], entries[0][1] + 1.0)
        broken = LambdaVector(tuple(entries))
        rep = check_joinup(scheme, broken, scales, z=z, labelling=labelling)
        assert not rep.ok
        assert any(0 in fc.cells for fc in rep.failures)

    def test_interval_vacuous_pass(self, interval_fixture):
        scheme, labelling, z, scales, lams = interval_fixture
        rep = check_joinup(scheme, lams, scales, z=z, labelling=labelling)
        assert rep.ok
        assert len(rep.facets) == 1  # single shared vertex


class TestEvaluate:
    def test_vertex_exact(self, interval_fixture):
        scheme, labelling, z, scales, lams = interval_fixture
        f = fix_point(scheme, labelling, lams, scales, z=z)
        assert f.evaluate([0.5]) == (1.0, 0.0)
        assert f.evaluate([0.0]) == (0.0, 0.0)

    def test_depth_bound_honored(self, example2_fixture):
        scheme, labelling, scales = example2_fixture
        z = example2_interpolation(labelling, 1.0, 1.0, 1.0)
        lams = lambdas_from_interpolation(z, scales, labelling, scheme)
        f = fix_point(scheme, labelling, lams, scales, grid_depth=6, z=z)
        x = np.array([0.3183, 0.2718])
        for depth in (4, 7, 10):
            v1, b1 = f.evaluate(x, depth=depth)
            v2, _ = f.evaluate(x, depth=depth + 5)
            assert abs(v2 - v1) <= b1
            assert b1 == pytest.approx(
                scales.sup_bound**depth * f.range_bound / (1 - scales.sup_bound)
            )

    def test_facet_two_sided(self, example2_fixture):
        scheme, labelling, scales = example2_fixture
        z = example2_interpolation(labelling, 0.4, 0.9, -0.2)
        lams = lambdas_from_interpolation(z, scales, labelling, scheme)
        f = fix_point(scheme, labelling, lams, scales, grid_depth=6, z=z)
        x = np.array([0.3, 0.3])  # on the shared diagonal of cells 1 and 2
        va, ba = f.evaluate(x, cell_choice=1)
        vb, bb = f.evaluate(x, cell_choice=2)
        assert abs(va - vb) <= ba + bb + 1e-10

    def test_outside_domain(self, interval_fixture):
        scheme, labelling, z, scales, lams = interval_fixture
        f = fix_point(scheme, labelling, lams, scales, z=z)
        with pytest.raises(OutOfDomainError):
            f.evaluate([1.5])


class TestLambdasOf:
    def test_zero(self, example2_fixture):
        scheme, labelling, scales = example2_fixture
        lams = lambdas_of(lambda p: 0.0, scales, scheme, labelling)
        for g, c in lams.entries:
            assert np.allclose(g, 0.0) and c == 0.0

    def test_affine_inverse(self, example2_fixture):
        scheme, labelling, scales = example2_fixture
        g = lambda p: 2.0 * p[0] - 0.5 * p[1] + 0.25
        lams = lambdas_of(g, scales, scheme, labelling)
        f = fix_point(scheme, labelling, lams, scales, grid_depth=6)
        exact = np.array([g(p) for p in f.grid.points])
        assert np.max(np.abs(f.grid_values - exact)) <= 1e-10

    def test_round_trip(self, example2_fixture):
        scheme, labelling, scales = example2_fixture
        rng = np.random.default_rng(11)
        lams = LambdaVector(
            tuple((rng.normal(size=2), rng.normal()) for _ in range(4))
        )
        f = fix_point(scheme, labelling, lams, scales, grid_depth=6)
        back = lambdas_of(f, scales, scheme, labelling)
        for (g1, c1), (g2, c2) in zip(lams.entries, back.entries):
            assert np.max(np.abs(g1 - g2)) <= 1e-8
            assert abs(c1 - c2) <= 1e-8


class TestInvariants:
    def test_operator_contraction(self, example2_fixture):
        scheme, labelling, scales = example2_fixture
        grid = build_grid(scheme, labelling, 5)
        rng = np.random.default_rng(5)
        lams = LambdaVector(tuple((rng.normal(size=2), rng.normal()) for _ in range(4)))
        for _ in range(5):
            f = rng.normal(size=len(grid))
            g = rng.normal(size=len(grid))
            lhs = np.max(np.abs(
                rb_apply(grid, lams, scales, f) - rb_apply(grid, lams, scales, g)
            ))
            assert lhs <= scales.sup_bound * np.max(np.abs(f - g)) + 1e-12

    def test_linearity_isomorphism(self, example2_fixture):
        scheme, labelling, scales = example2_fixture
        rng = np.random.default_rng(6)
        for _ in range(5):
            la = LambdaVector(tuple((rng.normal(size=2), rng.normal()) for _ in range(4)))
            lb = LambdaVector(tuple((rng.normal(size=2), rng.normal()) for _ in range(4)))
            al, be = rng.uniform(-2, 2, size=2)
            mix = LambdaVector(
                tuple(
                    (al * ga + be * gb, al * ca + be * cb)
                    for (ga, ca), (gb, cb) in zip(la.entries, lb.entries)
                )
            )
            fa = fix_point(scheme, labelling, la, scales, grid_depth=5)
            fb = fix_point(scheme, labelling, lb, scales, grid_depth=5)
            fm = fix_point(scheme, labelling, mix, scales, grid_depth=5)
            gap = np.max(np.abs(fm.grid_values - al * fa.grid_values - be * fb.grid_values))
            assert gap <= 1e-8


@pytest.fixture(scope="module")
def basis6(example2_fixture):
    scheme, labelling, scales = example2_fixture
    return fractal_basis(scheme, labelling, scales, grid_depth=6)


class TestBasis:
    def test_cardinality(self, basis6):
        assert len(basis6) == 6

    def test_delta_property(self, basis6):
        for v, f in enumerate(basis6):
            for w in range(6):
                expected = 1.0 if w == v else 0.0
                assert f.vertex_values[w] == pytest.approx(expected, abs=1e-12)

    def test_reconstruction(self, basis6, example2_fixture):
        scheme, labelling, scales = example2_fixture
        z = example2_interpolation(labelling, 0.7, -0.4, 1.3)
        lams = lambdas_from_interpolation(z, scales, labelling, scheme)
        direct = fix_point(scheme, labelling, lams, scales, grid_depth=6, z=z)
        combo = sum(z.values[v] * basis6[v].grid_values for v in range(6))
        assert np.max(np.abs(combo - direct.grid_values)) <= 1e-8

    def test_gram_orthonormalize(self, basis6):
        res = orthonormalize(basis6, depth=8)
        c, g = res.coefficients, res.gram.matrix
        dev = np.max(np.abs(c.T @ g @ c - np.eye(6)))
        assert dev <= 1e-6
        assert np.allclose(c, np.triu(c))
        # planar dimension count 3N - card(vertex union) = 12 - 6
        assert res.gram.dim_count == 6

    def test_single_function_normalization(self, basis6):
        res = gram_matrix(basis6[:1], depth=6)
        norm = res.matrix[0, 0]
        ores = orthonormalize(basis6[:1], depth=6)
        assert ores.coefficients[0, 0] == pytest.approx(1.0 / np.sqrt(norm))

    def test_rank_deficient(self, basis6):
        with pytest.raises(RankDeficientError):
            orthonormalize([basis6[0], basis6[0]], depth=4)

    def test_gram_symmetric_psd(self, basis6):
        res = gram_matrix(basis6, depth=7)
        g = res.matrix
        assert np.allclose(g, g.T)
        assert np.min(np.linalg.eigvalsh(g)) > 0


class TestExports:
    def test_obj_mesh(self, example2_fixture):
        scheme, labelling, scales = example2_fixture
        z = example2_interpolation(labelling, 1.0, 1.0, 1.0)
        lams = lambdas_from_interpolation(z, scales, labelling, scheme)
        f = fix_point(scheme, labelling, lams, scales, grid_depth=5, z=z)
        obj = surface_obj(f, depth=3)
        lines = obj.strip().split("\n")
        n_v = sum(1 for l in lines if l.startswith("v "))
        n_f = sum(1 for l in lines if l.startswith("f "))
        assert n_f == 4**3
        assert n_v >= 3
        # interpolation vertices carry their z values in the mesh
        assert any(
            l.startswith("v 1 0 0") or l.startswith("v 0 1 0") for l in lines
        )

    def test_samples_csv(self, interval_fixture):
        scheme, labelling, z, scales, lams = interval_fixture
        f = fix_point(scheme, labelling, lams, scales, z=z, grid_depth=4)
        csv = samples_csv(f)
        rows = [r.split(",") for r in csv.strip().split("\n")]
        xs = [float(r[0]) for r in rows]
        assert xs == sorted(xs)
        mid = next(r for r in rows if float(r[0]) == 0.5)
        assert float(mid[1]) == 1.0

"""Read-Bajraktarevic operator machinery: fixed-point fractal functions,
interpolation-driven affine coefficients, join-up checks, Lagrange bases
and orthonormalization.

The fixed point is computed on a partition-address grid (all images of
the cell-vertex set under compositions of the similitudes up to a given
depth); the grid is closed under the pullbacks x -> u_i^{-1}(x), so the
operator acts on it exactly and Banach iteration certifies the result.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .affine import AffineMap
from .errors import (
    DegenerateInterpolationError,
    InvalidInputError,
    NotContractiveError,
    OutOfDomainError,
    RankDeficientError,
)
from .partition import LabellingMap, PartitionScheme, build_labelling

DEFAULT_GRID_DEPTH = 10
DEFAULT_FIX_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ScaleVector:
    """Per-cell vertical scalings; constant floats or bounded fields."""

    values: tuple
    sup_bound: float = None  # type: ignore[assignment]

    def __post_init__(self):
        vals = tuple(self.values)
        object.__setattr__(self, "values", vals)
        if self.sup_bound is None:
            if any(callable(v) for v in vals):
                raise InvalidInputError("function-valued scales need an explicit sup_bound")
            object.__setattr__(self, "sup_bound", max(abs(float(v)) for v in vals))

    @staticmethod
    def constant(s: float, n: int) -> "ScaleVector":
        return ScaleVector((float(s),) * n)

    @property
    def is_constant(self) -> bool:
        return not any(callable(v) for v in self.values)

    def require_contractive(self):
        if not self.sup_bound < 1.0:
            raise NotContractiveError(f"scale bound {self.sup_bound} is not < 1")

    def at(self, i: int, pts: np.ndarray) -> np.ndarray:
        v = self.values[i]
        pts = np.atleast_2d(pts)
        if callable(v):
            return np.asarray([v(p) for p in pts], dtype=float)
        return np.full(pts.shape[0], float(v))


@dataclass(frozen=True, eq=False)
class LambdaVector:
    """N affine functions R^n -> R, stored as (gradient, constant)."""

    entries: tuple  # of (np.ndarray gradient, float constant)

    def __post_init__(self):
        ent = tuple(
            (np.asarray(g, dtype=float), float(c)) for g, c in self.entries
        )
        for g, c in ent:
            if not (np.all(np.isfinite(g)) and np.isfinite(c)):
                raise InvalidInputError("lambda coefficients must be finite")
        object.__setattr__(self, "entries", ent)

    def __len__(self):
        return len(self.entries)

    def at(self, i: int, pts: np.ndarray) -> np.ndarray:
        g, c = self.entries[i]
        pts = np.atleast_2d(pts)
        return pts @ g + c

    def scalar(self, i: int, x) -> float:
        g, c = self.entries[i]
        return float(np.dot(g, np.asarray(x, dtype=float)) + c)

    def sup_on(self, simplex) -> float:
        """Max |lambda_i| over a simplex (affine, so attained at vertices)."""
        return max(
            float(np.max(np.abs(self.at(i, simplex.vertices))))
            for i in range(len(self.entries))
        )

    def lip(self) -> float:
        return max(float(np.linalg.norm(g)) for g, _ in self.entries)

    @staticmethod
    def zeros(n_cells: int, dim: int) -> "LambdaVector":
        return LambdaVector(tuple((np.zeros(dim), 0.0) for _ in range(n_cells)))


def _lambda_at(lambdas, i: int, pts: np.ndarray) -> np.ndarray:
    if isinstance(lambdas, LambdaVector):
        return lambdas.at(i, pts)
    f = lambdas[i]
    pts = np.atleast_2d(pts)
    return np.asarray([f(p) for p in pts], dtype=float)


@dataclass(frozen=True, eq=False)
class InterpolationSet:
    """z-value per vertex of the cell-vertex union, aligned with the
    labelling registry ids."""

    values: np.ndarray
    labelling: LabellingMap

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape[0] != len(self.labelling.registry):
            raise InvalidInputError(
                f"need one z per vertex: {vals.shape[0]} given, "
                f"{len(self.labelling.registry)} vertices"
            )
        object.__setattr__(self, "values", vals)

    @staticmethod
    def from_pairs(labelling: LabellingMap, pairs) -> "InterpolationSet":
        vals = np.full(len(labelling.registry), np.nan)
        for point, z in pairs:
            idx = labelling.registry.lookup(np.asarray(point, dtype=float))
            if idx is None:
                raise InvalidInputError(f"{point} is not a vertex of the partition")
            vals[idx] = z
        if np.any(np.isnan(vals)):
            raise InvalidInputError("interpolation set must cover every vertex")
        return InterpolationSet(vals, labelling)


# ---------------------------------------------------------------------------
# address grid


@dataclass(frozen=True, eq=False)
class AddressGrid:
    """Partition-address grid closed under the cell pullbacks.

    ``points[p]`` equals ``sims[pull_cell[p]](points[pull_idx[p]])``, so a
    single vectorized gather applies the RB operator exactly.
    """

    scheme: PartitionScheme
    labelling: LabellingMap
    depth: int
    points: np.ndarray
    pull_cell: np.ndarray
    pull_idx: np.ndarray

    def __len__(self):
        return self.points.shape[0]


_GRID_CACHE: dict = {}


def build_grid(
    scheme: PartitionScheme, labelling: LabellingMap, depth: int
) -> AddressGrid:
    key = (id(scheme), id(labelling), depth)
    cached = _GRID_CACHE.get(key)
    if cached is not None:
        return cached

    qtol = scheme.snap_tol()
    reg = labelling.registry
    points = [np.asarray(p, dtype=float) for p in reg.points]
    keys = {tuple(np.round(p / qtol).astype(np.int64).tolist()): i for i, p in enumerate(points)}

    n_pts = len(points)
    pull_cell = np.full(n_pts, -1, dtype=np.int64)
    pull_idx = np.full(n_pts, -1, dtype=np.int64)
    # level 0: cell vertices pull back to parent vertices via the labelling
    for i, ids in enumerate(labelling.cell_vertex_ids):
        for j, vid in enumerate(ids):
            if pull_cell[vid] == -1:
                k = labelling.cell_labels[i][j]
                pull_cell[vid] = i
                pull_idx[vid] = labelling.parent_ids[k]

    pts_arr = np.array(points)
    frontier = np.arange(n_pts)
    all_pts = [pts_arr]
    pulls_c = [pull_cell]
    pulls_i = [pull_idx]

    for _ in range(depth):
        base = np.concatenate(all_pts, axis=0) if len(all_pts) > 1 else all_pts[0]
        src = base[frontier]
        new_pts = []
        new_pc = []
        new_pi = []
        for i, u in enumerate(scheme.sims):
            img = u(src)
            qk = np.round(img / qtol).astype(np.int64)
            for row, q, parent_id in zip(img, qk.tolist(), frontier):
                tq = tuple(q)
                if tq not in keys:
                    keys[tq] = n_pts
                    n_pts += 1
                    new_pts.append(row)
                    new_pc.append(i)
                    new_pi.append(parent_id)
        if not new_pts:
            frontier = np.array([], dtype=np.int64)
            break
        start = n_pts - len(new_pts)
        frontier = np.arange(start, n_pts)
        all_pts.append(np.array(new_pts))
        pulls_c.append(np.array(new_pc, dtype=np.int64))
        pulls_i.append(np.array(new_pi, dtype=np.int64))

    grid = AddressGrid(
        scheme,
        labelling,
        depth,
        np.concatenate(all_pts, axis=0),
        np.concatenate(pulls_c),
        np.concatenate(pulls_i),
    )
    _GRID_CACHE[key] = grid
    return grid


def rb_apply(grid: AddressGrid, lambdas, scales: ScaleVector, values: np.ndarray) -> np.ndarray:
    """One application of the RB operator to grid samples:
    (Phi g)(u_i(x)) = lambda_i(x) + s_i(x) g(x)."""
    values = np.asarray(values, dtype=float)
    if values.shape[0] != len(grid):
        raise InvalidInputError(
            f"sample vector has {values.shape[0]} entries, grid has {len(grid)}"
        )
    out = np.empty_like(values)
    y = grid.points[grid.pull_idx]
    for i in range(grid.scheme.n_cells):
        mask = grid.pull_cell == i
        yi = y[mask]
        out[mask] = _lambda_at(lambdas, i, yi) + scales.at(i, yi) * values[grid.pull_idx[mask]]
    return out


# ---------------------------------------------------------------------------
# fractal functions


@dataclass(eq=False)
class FractalFunction:
    """Fixed point of an RB operator over a partition scheme."""

    scheme: PartitionScheme
    labelling: LabellingMap
    lambdas: LambdaVector
    scales: ScaleVector
    vertex_values: np.ndarray
    range_bound: float
    eval_depth: int = 48
    grid: AddressGrid = None
    grid_values: np.ndarray = None
    residual: float = 0.0

    def _locate(self, x, cell_choice=None) -> int:
        if cell_choice is not None:
            if not self.scheme.cells[cell_choice].contains(x):
                raise OutOfDomainError(f"{x} is not in cell {cell_choice}")
            return cell_choice
        i = self.scheme.locate(x)
        if i < 0:
            raise OutOfDomainError(f"{x} lies outside the parent domain")
        return i

    def evaluate(self, x, depth: int = None, cell_choice=None):
        """Value and certified error bound at a point.

        Descends the cell address of ``x`` for ``depth`` levels,
        accumulating affine terms and scale factors; hitting a vertex of
        the partition terminates with the exact vertex value.
        """
        if depth is None:
            depth = self.eval_depth
        x = np.asarray(x, dtype=float)
        reg = self.labelling.registry
        value = 0.0
        prefix = 1.0
        s_sup = self.scales.sup_bound
        for step in range(depth):
            # with an explicit cell choice the first step must descend
            # through that cell: the one-sided branch value at a vertex
            # differs from the stored (owner-cell) value when join-up fails
            if not (step == 0 and cell_choice is not None):
                vid = reg.lookup(x)
                if vid is not None:
                    return value + prefix * self.vertex_values[vid], 0.0
            i = self._locate(x, cell_choice if step == 0 else None)
            y = self.scheme.sims[i].inverse()(x)
            value += prefix * float(_lambda_at(self.lambdas, i, y)[0])
            prefix *= float(self.scales.at(i, y)[0])
            x = y
        vid = reg.lookup(x)
        if vid is not None:
            return value + prefix * self.vertex_values[vid], 0.0
        bound = s_sup**depth * self.range_bound / (1.0 - s_sup)
        return value, bound

    def __call__(self, x) -> float:
        return self.evaluate(x)[0]


def _affine_from_conditions(points: np.ndarray, rhs: np.ndarray):
    n = points.shape[1]
    a = np.hstack([points, np.ones((points.shape[0], 1))])
    try:
        sol = np.linalg.solve(a, rhs)
    except np.linalg.LinAlgError as exc:
        raise DegenerateInterpolationError(str(exc)) from exc
    return sol[:n], float(sol[n])


def vertex_value_system(
    scheme: PartitionScheme, labelling: LabellingMap, lambdas, scales: ScaleVector
) -> np.ndarray:
    """Exact values of the fixed point at every cell vertex.

    Vertex values satisfy f(v) = lambda_i(l_i(v)) + s_i f(l_i(v)) with
    l_i(v) a parent vertex, which closes into a small linear system over
    the parent-vertex values.
    """
    reg = labelling.registry
    parent_ids = list(labelling.parent_ids)
    n_par = len(parent_ids)
    parent_pos = {vid: k for k, vid in enumerate(parent_ids)}

    a = np.eye(n_par)
    b = np.zeros(n_par)
    seen = set()
    for i, ids in enumerate(labelling.cell_vertex_ids):
        for j, vid in enumerate(ids):
            if vid in parent_pos and vid not in seen:
                seen.add(vid)
                k = labelling.cell_labels[i][j]
                src = parent_ids[k]
                p = scheme.parent.vertices[k]
                a[parent_pos[vid], parent_pos[src]] -= float(scales.at(i, p)[0])
                b[parent_pos[vid]] = float(_lambda_at(lambdas, i, p)[0])
    z_par = np.linalg.solve(a, b)

    values = np.full(len(reg), np.nan)
    for vid, k in parent_pos.items():
        values[vid] = z_par[k]
    for i, ids in enumerate(labelling.cell_vertex_ids):
        for j, vid in enumerate(ids):
            if np.isnan(values[vid]):
                k = labelling.cell_labels[i][j]
                p = scheme.parent.vertices[k]
                values[vid] = float(_lambda_at(lambdas, i, p)[0]) + float(
                    scales.at(i, p)[0]
                ) * z_par[k]
    return values


def fix_point(
    scheme: PartitionScheme,
    labelling: LabellingMap,
    lambdas,
    scales: ScaleVector,
    tol: float = DEFAULT_FIX_TOL,
    grid_depth: int = DEFAULT_GRID_DEPTH,
    z: InterpolationSet = None,
    max_sweeps: int = 4000,
) -> FractalFunction:
    """Banach-iterate the RB operator from g == 0 on the address grid
    until the sup residual drops below tol * (1 - s)."""
    scales.require_contractive()
    s = scales.sup_bound
    grid = build_grid(scheme, labelling, grid_depth)

    values = np.zeros(len(grid))
    target = tol * (1.0 - s)
    residual = np.inf
    for _ in range(max_sweeps):
        new = rb_apply(grid, lambdas, scales, values)
        residual = float(np.max(np.abs(new - values)))
        values = new
        if residual <= target:
            break
    certified = residual * s / (1.0 - s) if s > 0 else 0.0

    if isinstance(lambdas, LambdaVector):
        lam_sup = lambdas.sup_on(scheme.parent)
    else:
        lam_sup = float(np.max(np.abs(values))) * (1 - s) + 1e-30
    range_bound = lam_sup / (1.0 - s)

    vertex_values = vertex_value_system(scheme, labelling, lambdas, scales)
    if z is not None:
        if np.max(np.abs(vertex_values - z.values)) > 1e-12 * max(
            1.0, float(np.max(np.abs(z.values)))
        ):
            raise InvalidInputError(
                "interpolation data is inconsistent with the fixed point"
            )
        vertex_values = z.values.copy()
        values[: len(vertex_values)] = vertex_values

    return FractalFunction(
        scheme,
        labelling,
        lambdas,
        scales,
        vertex_values,
        range_bound,
        grid=grid,
        grid_values=values,
        residual=certified,
    )


def lambdas_from_interpolation(
    z: InterpolationSet, scales: ScaleVector, labelling: LabellingMap, scheme: PartitionScheme
) -> LambdaVector:
    """Affine lambdas solving lambda_i(l(v)) + s_i z_l(v) = z_v per cell."""
    scales.require_contractive()
    entries = []
    parent = scheme.parent.vertices
    for i, ids in enumerate(labelling.cell_vertex_ids):
        pts = np.zeros((len(ids), scheme.dim))
        rhs = np.zeros(len(ids))
        for j, vid in enumerate(ids):
            k = labelling.cell_labels[i][j]
            p = parent[k]
            s_here = float(scales.at(i, p)[0])
            pts[j] = p
            rhs[j] = z.values[vid] - s_here * z.values[labelling.parent_ids[k]]
        entries.append(_affine_from_conditions(pts, rhs))
    return LambdaVector(tuple(entries))


def lambdas_of(g, scales: ScaleVector, scheme: PartitionScheme, labelling: LabellingMap) -> LambdaVector:
    """Affine lambdas with lambda_i = g o u_i - s_i g at the parent
    vertices; exact inverse of the lambda -> fixed point map on affine g.

    Fractal inputs are sampled through the one-sided branch of cell i,
    which is the value the composition g o u_i actually takes there.
    """
    entries = []
    parent = scheme.parent.vertices
    fractal = isinstance(g, FractalFunction)
    for i, u in enumerate(scheme.sims):
        pts = parent
        if fractal:
            rhs = np.array(
                [
                    g.evaluate(u(p), cell_choice=i)[0]
                    - float(scales.at(i, p)[0]) * g.evaluate(p)[0]
                    for p in parent
                ]
            )
        else:
            rhs = np.array(
                [
                    float(g(u(p))) - float(scales.at(i, p)[0]) * float(g(p))
                    for p in parent
                ]
            )
        entries.append(_affine_from_conditions(pts, rhs))
    return LambdaVector(tuple(entries))


# ---------------------------------------------------------------------------
# join-up


@dataclass(frozen=True)
class FacetCheck:
    cells: tuple
    shared_vertex_ids: tuple
    structural: str  # "pass" | "fail" | "needs-numeric"
    numeric: str  # "pass" | "fail" | "skipped"
    max_gap: float
    note: str = ""


@dataclass(frozen=True)
class JoinupReport:
    facets: tuple

    @property
    def ok(self) -> bool:
        return all(
            f.numeric == "pass" or (f.numeric == "skipped" and f.structural == "pass")
            for f in self.facets
        )

    @property
    def failures(self) -> tuple:
        return tuple(
            f for f in self.facets if "fail" in (f.structural, f.numeric)
        )


def _shared_facets(labelling: LabellingMap, dim: int):
    cells = labelling.cell_vertex_ids
    out = []
    for i in range(len(cells)):
        for j in range(i + 1, len(cells)):
            shared = sorted(set(cells[i]) & set(cells[j]))
            if len(shared) == dim:
                out.append((i, j, tuple(shared)))
    return out


def check_joinup(
    scheme: PartitionScheme,
    lambdas: LambdaVector,
    scales: ScaleVector,
    z: InterpolationSet = None,
    labelling: LabellingMap = None,
    f: FractalFunction = None,
    samples: int = 17,
    tol: float = 1e-9,
) -> JoinupReport:
    """Verify the join-up conditions on every shared facet.

    Structurally (before any fixed point): equal scales, matching
    pullbacks and equal affine restrictions prove continuity on a facet;
    mismatched pullback maps leave a recursive condition that is settled
    numerically on a facet sample grid using the fixed point.
    """
    if labelling is None:
        labelling = build_labelling(scheme)
    reg = labelling.registry
    snap = scheme.snap_tol()
    results = []
    need_f = False
    facets = _shared_facets(labelling, scheme.dim)

    for i, j, shared in facets:
        ui_inv = scheme.sims[i].inverse()
        uj_inv = scheme.sims[j].inverse()
        pts = np.array([reg.points[v] for v in shared])
        yi = ui_inv(pts)
        yj = uj_inv(pts)
        s_equal = (
            scales.is_constant
            and abs(float(scales.values[i]) - float(scales.values[j])) <= 1e-14
        )

        # vertex data: both cell formulas must produce the same value at
        # each shared vertex (equal to z there when z is given)
        vertex_ok = True
        if z is not None:
            for v, pyi, pyj in zip(shared, yi, yj):
                li = lambdas.scalar(i, pyi) + float(scales.at(i, pyi)[0]) * _z_at(
                    z, labelling, pyi, snap
                )
                lj = lambdas.scalar(j, pyj) + float(scales.at(j, pyj)[0]) * _z_at(
                    z, labelling, pyj, snap
                )
                if abs(li - z.values[v]) > 1e-10 or abs(lj - z.values[v]) > 1e-10:
                    vertex_ok = False

        if np.max(np.abs(yi - yj)) <= snap:
            lam_gap = float(np.max(np.abs(lambdas.at(i, yi) - lambdas.at(j, yi))))
            if s_equal and lam_gap <= 1e-12 and vertex_ok:
                structural = "pass"
            else:
                structural = "fail"
        else:
            structural = "needs-numeric" if (s_equal and vertex_ok) else "fail"
            if structural == "needs-numeric":
                need_f = True
        results.append([(i, j), shared, structural])

    if f is None and (need_f or z is not None):
        try:
            f = fix_point(scheme, labelling, lambdas, scales, z=z)
        except InvalidInputError:
            # lambdas do not interpolate z; check the raw fixed point
            f = fix_point(scheme, labelling, lambdas, scales)

    out = []
    for (pair, shared, structural) in results:
        numeric = "skipped"
        max_gap = 0.0
        if f is not None:
            pts = np.array([reg.points[v] for v in shared])
            sample_pts = _facet_samples(pts, samples)
            gaps = []
            for x in sample_pts:
                va, ba = f.evaluate(x, cell_choice=pair[0])
                vb, bb = f.evaluate(x, cell_choice=pair[1])
                gaps.append(abs(va - vb) - (ba + bb))
            max_gap = max(float(np.max(gaps)), 0.0) if gaps else 0.0
            numeric = "pass" if max_gap <= tol else "fail"
        out.append(
            FacetCheck(pair, shared, structural, numeric, max_gap)
        )
    return JoinupReport(tuple(out))


def _z_at(z: InterpolationSet, labelling: LabellingMap, point, snap) -> float:
    vid = labelling.registry.lookup(np.asarray(point, dtype=float))
    if vid is None:
        raise InvalidInputError(f"{point} is not a partition vertex")
    return float(z.values[vid])


def _facet_samples(vertices: np.ndarray, samples: int) -> np.ndarray:
    k = vertices.shape[0]
    if k == 1:
        return vertices
    ts = np.linspace(0.0, 1.0, samples)
    if k == 2:
        return np.array([(1 - t) * vertices[0] + t * vertices[1] for t in ts])
    # higher-dimensional facets: barycentric grid
    pts = []
    for t in ts:
        for u in np.linspace(0.0, 1.0 - t, max(2, samples // 2)):
            w = 1.0 - t - u
            pts.append(t * vertices[0] + u * vertices[1] + w * vertices[2])
    return np.array(pts)


# ---------------------------------------------------------------------------
# Lagrange basis, Gram matrices, orthonormalization


def fractal_basis(
    scheme: PartitionScheme,
    labelling: LabellingMap,
    scales: ScaleVector,
    tol: float = DEFAULT_FIX_TOL,
    grid_depth: int = DEFAULT_GRID_DEPTH,
) -> list:
    """One Lagrange-type fractal function per vertex of the cell-vertex
    union, interpolating the Kronecker data at the vertices."""
    basis = []
    n_vertices = len(labelling.registry)
    for v in range(n_vertices):
        data = np.zeros(n_vertices)
        data[v] = 1.0
        z = InterpolationSet(data, labelling)
        lams = lambdas_from_interpolation(z, scales, labelling, scheme)
        basis.append(
            fix_point(scheme, labelling, lams, scales, tol=tol, grid_depth=grid_depth, z=z)
        )
    return basis


def _cell_center_values(basis, depth: int):
    """Values of every basis function at the depth-m cell midpoints.

    Exact level recursion: f(u_i(y)) = lambda_i(y) + s_i f(y), seeded at
    the parent barycenter.
    """
    f0 = basis[0]
    scheme = f0.scheme
    center = scheme.parent.barycenter()
    pts = np.array([center])
    vals = np.array([[f.evaluate(center)[0] for f in basis]])
    for _ in range(depth):
        new_pts = []
        new_vals = []
        for i, u in enumerate(scheme.sims):
            new_pts.append(u(pts))
            cols = [
                _lambda_at(f.lambdas, i, pts) + f.scales.at(i, pts) * vals[:, k]
                for k, f in enumerate(basis)
            ]
            new_vals.append(np.stack(cols, axis=1))
        pts = np.concatenate(new_pts, axis=0)
        vals = np.concatenate(new_vals, axis=0)
    return pts, vals


@dataclass(frozen=True)
class GramResult:
    matrix: np.ndarray
    depth: int
    quad_bound: float
    dim_count: int  # (n+1) N - card(union V_i), the affine-family dimension


def gram_matrix(basis, depth: int = 8) -> GramResult:
    """Pairwise L2 inner products over the parent simplex by
    cell-midpoint quadrature at the given recursion depth.

    The recorded bound uses the oscillation estimate
    osc_m(f) <= (Lip(lambda) diam + 2 sup|f|) (a + s)^m.
    """
    f0 = basis[0]
    scheme = f0.scheme
    _, vals = _cell_center_values(basis, depth)
    n = scheme.dim
    a = scheme.ratio
    cell_vol = scheme.parent.volume() * (a**n) ** depth
    g = vals.T @ vals * cell_vol

    diam = scheme.parent.diameter()
    s = max(f.scales.sup_bound for f in basis)
    consts = [
        (f.lambdas.lip() * diam + 2.0 * f.range_bound, f.range_bound) for f in basis
    ]
    pair_bound = max(
        scheme.parent.volume() * (ra * cb + rb * ca)
        for ca, ra in consts
        for cb, rb in consts
    )
    quad_bound = pair_bound * (a + s) ** depth

    n_cells = scheme.n_cells
    card = len(f0.labelling.registry)
    dim_count = (scheme.dim + 1) * n_cells - card
    return GramResult(g, depth, quad_bound, dim_count)


@dataclass(frozen=True)
class OrthoResult:
    coefficients: np.ndarray  # upper triangular, C^T G C = I
    gram: GramResult


def orthonormalize(basis, depth: int = 8, tol: float = 1e-6) -> OrthoResult:
    """Gram-Schmidt coefficients against the quadrature Gram matrix.

    Classical Gram-Schmidt on the basis is the Cholesky factorization of
    its Gram matrix; C is the inverse transposed factor.
    """
    gres = gram_matrix(basis, depth)
    g = gres.matrix
    try:
        chol = np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise RankDeficientError(f"Gram matrix is not positive definite: {exc}") from exc
    if np.min(np.abs(np.diag(chol))) < 1e-12 * np.max(np.abs(np.diag(chol))):
        raise RankDeficientError("Gram matrix is numerically rank-deficient")
    c = np.linalg.inv(chol).T
    dev = float(np.max(np.abs(c.T @ g @ c - np.eye(g.shape[0]))))
    if dev > tol:
        raise RankDeficientError(f"orthonormalization deviation {dev} exceeds {tol}")
    return OrthoResult(c, gres)


# ---------------------------------------------------------------------------
# exports


def surface_obj(f: FractalFunction, depth: int = 6) -> str:
    """Wavefront OBJ mesh of the graph over a 2-simplex."""
    if f.scheme.dim != 2:
        raise InvalidInputError("OBJ export needs a two-dimensional domain")
    scheme = f.scheme
    corners = scheme.parent.vertices
    vals = np.array([f.vertex_values[i] for i in f.labelling.parent_ids])
    tris = [(corners, vals)]
    for _ in range(depth):
        nxt = []
        for i, u in enumerate(scheme.sims):
            for pts, vv in tris:
                npts = u(pts)
                nvals = _lambda_at(f.lambdas, i, pts) + f.scales.at(i, pts) * vv
                nxt.append((npts, nvals))
        tris = nxt
    verts: dict[tuple, int] = {}
    order = []
    faces = []
    for pts, vv in tris:
        ids = []
        for p, v in zip(pts, vv):
            key = (round(p[0], 12), round(p[1], 12), round(float(v), 12))
            if key not in verts:
                verts[key] = len(verts) + 1
                order.append(key)
            ids.append(verts[key])
        faces.append(ids)
    lines = [f"v {x:.17g} {y:.17g} {z:.17g}" for x, y, z in order]
    lines += [f"f {a} {b} {c}" for a, b, c in faces]
    return "\n".join(lines) + "\n"


def samples_csv(f: FractalFunction, depth: int = None) -> str:
    """x..., value rows over the address grid, 17 significant digits."""
    grid = f.grid if depth is None else build_grid(f.scheme, f.labelling, depth)
    if grid is f.grid and f.grid_values is not None:
        values = f.grid_values
    else:
        values = np.zeros(len(grid))
        s = f.scales.sup_bound
        target = DEFAULT_FIX_TOL * (1 - s)
        for _ in range(4000):
            new = rb_apply(grid, f.lambdas, f.scales, values)
            r = float(np.max(np.abs(new - values)))
            values = new
            if r <= target:
                break
    order = np.lexsort(grid.points.T[::-1])
    lines = [
        ",".join(f"{c:.17g}" for c in grid.points[p]) + f",{values[p]:.17g}"
        for p in order
    ]
    return "\n".join(lines) + "\n"

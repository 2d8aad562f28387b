"""Root systems, affine Weyl groups, foldable figures, folding and
tessellation.

Coordinates are floating point with 1e-9/1e-10 tolerances; the
crystallographic integrality checks snap to the nearest integer.  The
rank-2 catalog normalizes root lengths per system so that the
fundamental alcoves stay desk-sized; all catalog assertions (angle
triples, Cartan classes, group orders) are scale-free.
"""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .affine import AffineMap
from .errors import (
    FoldDivergedError,
    InvalidInputError,
    NonGenericVectorError,
    NotClosedWithinCapError,
    NotCrystallographicError,
)
from .partition import Simplex

TOL = 1e-9
SNAP = 1e-10


def reflect(alpha: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Reflection through the hyperplane orthogonal to alpha."""
    alpha = np.asarray(alpha, dtype=float)
    x = np.asarray(x, dtype=float)
    aa = float(alpha @ alpha)
    if aa <= 0.0:
        raise InvalidInputError("reflection vector must be nonzero")
    if x.ndim == 1:
        return x - (2.0 * (x @ alpha) / aa) * alpha
    return x - np.outer((2.0 / aa) * (x @ alpha), alpha)


def coroot(alpha: np.ndarray) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=float)
    return 2.0 * alpha / float(alpha @ alpha)


@dataclass(frozen=True, eq=False)
class AffineReflectionSpec:
    """Reflection about the affine hyperplane <x, alpha> = k."""

    alpha: np.ndarray
    k: int

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=float)
        if float(a @ a) <= 0.0:
            raise InvalidInputError("reflection vector must be nonzero")
        object.__setattr__(self, "alpha", a)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return affine_reflect(self, x)

    def as_affine_map(self) -> AffineMap:
        a = self.alpha
        aa = float(a @ a)
        n = len(a)
        mat = np.eye(n) - 2.0 * np.outer(a, a) / aa
        off = (2.0 * self.k / aa) * a
        return AffineMap(mat, off, 1.0)


def affine_reflect(spec: AffineReflectionSpec, x: np.ndarray) -> np.ndarray:
    """r_alpha(x) + k alpha_check, the reflection about <x,alpha> = k."""
    return reflect(spec.alpha, x) + spec.k * coroot(spec.alpha)


_ANGLE_TABLE = (
    # (n(beta,alpha), n(alpha,beta)) -> (theta, |beta|/|alpha|)
    ((0, 0), (math.pi / 2, None)),
    ((1, 1), (math.pi / 3, 1.0)),
    ((-1, -1), (2 * math.pi / 3, 1.0)),
    ((1, 2), (math.pi / 4, math.sqrt(2.0))),
    ((-1, -2), (3 * math.pi / 4, math.sqrt(2.0))),
    ((1, 3), (math.pi / 6, math.sqrt(3.0))),
    ((-1, -3), (5 * math.pi / 6, math.sqrt(3.0))),
    ((2, 2), (0.0, 1.0)),
    ((-2, -2), (math.pi, 1.0)),
)


@dataclass(frozen=True)
class CartanClass:
    n_beta_alpha: int
    n_alpha_beta: int
    theta: float
    length_ratio: float | None


def cartan_integer(beta: np.ndarray, alpha: np.ndarray) -> CartanClass:
    """Nearest-integer Cartan pairing 2<beta,alpha>/<alpha,alpha> and the
    angle-table row it belongs to."""
    beta = np.asarray(beta, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    if float(alpha @ alpha) <= 0.0 or float(beta @ beta) <= 0.0:
        raise InvalidInputError("roots must be nonzero")

    def snap_int(x: float) -> int:
        k = round(x)
        if abs(x - k) > TOL:
            raise NotCrystallographicError(f"pairing {x} is not an integer")
        return int(k)

    n_ba = snap_int(2.0 * float(beta @ alpha) / float(alpha @ alpha))
    n_ab = snap_int(2.0 * float(alpha @ beta) / float(beta @ beta))
    pair = (n_ba, n_ab) if abs(n_ba) <= abs(n_ab) else None
    # normalize to table orientation: first entry has |.| <= second
    a, b = (n_ba, n_ab) if abs(n_ba) <= abs(n_ab) else (n_ab, n_ba)
    for (ta, tb), (theta, ratio) in _ANGLE_TABLE:
        if (a, b) == (ta, tb):
            return CartanClass(n_ba, n_ab, theta, ratio)
    raise NotCrystallographicError(f"pairings ({n_ba},{n_ab}) match no angle class")


def positive_and_simple(roots: np.ndarray, v: np.ndarray):
    """Split roots by the sign of <v, .> and extract the simple ones."""
    roots = np.asarray(roots, dtype=float)
    v = np.asarray(v, dtype=float)
    prods = roots @ v
    scale = np.linalg.norm(v) * np.linalg.norm(roots, axis=1)
    if np.any(np.abs(prods) <= TOL * scale):
        raise NonGenericVectorError("v lies on a root hyperplane")
    pos_idx = np.where(prods > 0)[0]
    positives = roots[pos_idx]

    def is_sum_of_two(gamma):
        for a in positives:
            b = gamma - a
            for c in positives:
                if np.linalg.norm(b - c) <= TOL:
                    return True
        return False

    simple_rows = [g for g in positives if not is_sum_of_two(g)]
    simples = np.array(simple_rows)
    n = roots.shape[1]
    if np.linalg.matrix_rank(simples, tol=1e-8) != n:
        raise InvalidInputError("simple roots do not form a basis")
    gram = simples @ simples.T
    off = gram - np.diag(np.diag(gram))
    if np.any(off > TOL):
        raise InvalidInputError("simple roots at acute angle; inconsistent data")
    return positives, simples


@dataclass(frozen=True)
class RootSystemReport:
    r1_span: bool
    r2_multiples: bool
    r3_closed: bool
    r4_integral: bool
    max_integrality_dev: float

    @property
    def ok(self):
        return self.r1_span and self.r2_multiples and self.r3_closed and self.r4_integral


@dataclass(frozen=True, eq=False)
class RootSystemData:
    """Roots with their coroots and a chosen positive/simple split."""

    name: str
    roots: np.ndarray
    rank: int
    coroots: np.ndarray
    positives: np.ndarray
    simples: np.ndarray
    highest: np.ndarray | None  # highest root(s) bounding the alcove

    @staticmethod
    def from_roots(name: str, roots, generic_v) -> "RootSystemData":
        roots = np.asarray(roots, dtype=float)
        positives, simples = positive_and_simple(roots, np.asarray(generic_v, float))
        coroots = np.array([coroot(a) for a in roots])
        return RootSystemData(
            name, roots, roots.shape[1], coroots, positives, simples, None
        )

    def validate(self) -> RootSystemReport:
        roots = self.roots
        n = self.rank
        r1 = np.linalg.matrix_rank(roots, tol=1e-8) == n

        r2 = True
        for i, a in enumerate(roots):
            for j, b in enumerate(roots):
                if i == j:
                    continue
                # b parallel to a?
                cross = np.linalg.norm(b) * np.linalg.norm(a)
                if abs(abs(float(a @ b)) - cross) <= TOL * cross:
                    t = float(a @ b) / float(a @ a)
                    if abs(abs(t) - 1.0) > TOL:
                        r2 = False

        r3 = True
        for a in roots:
            images = reflect(a, roots)
            for img in images:
                dists = np.linalg.norm(roots - img, axis=1)
                if dists.min() > TOL * max(1.0, np.linalg.norm(img)):
                    r3 = False

        max_dev = 0.0
        r4 = True
        for b in roots:
            for ac in self.coroots:
                val = float(b @ ac)
                dev = abs(val - round(val))
                max_dev = max(max_dev, dev)
                if dev > TOL:
                    r4 = False
        return RootSystemReport(r1, r2, r3, r4, max_dev)


@dataclass(frozen=True, eq=False)
class FoldableFigure:
    """Compact convex fundamental domain with its bounding walls.

    Walls are halfspaces a . x <= c whose intersection is the figure.
    """

    vertices: np.ndarray
    walls: tuple  # of (normal ndarray, offset float)

    def __post_init__(self):
        object.__setattr__(self, "vertices", np.atleast_2d(np.asarray(self.vertices, float)))
        object.__setattr__(
            self,
            "walls",
            tuple((np.asarray(a, float), float(c)) for a, c in self.walls),
        )

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    def diameter(self) -> float:
        v = self.vertices
        diffs = v[:, None, :] - v[None, :, :]
        return float(np.sqrt((diffs**2).sum(-1)).max())

    def is_simplex(self) -> bool:
        return self.vertices.shape[0] == self.dim + 1

    def as_simplex(self) -> Simplex:
        if not self.is_simplex():
            raise InvalidInputError(
                f"alcove with {self.vertices.shape[0]} vertices in R^{self.dim} "
                "is not a simplex"
            )
        return Simplex(self.vertices)

    def contains(self, x: np.ndarray, tol: float = None) -> bool:
        if tol is None:
            tol = SNAP * max(1.0, self.diameter())
        x = np.asarray(x, dtype=float)
        return all(float(a @ x) <= c + tol * max(1.0, np.linalg.norm(a)) for a, c in self.walls)

    def violations(self, x: np.ndarray) -> np.ndarray:
        """Signed distances to each wall (positive means outside)."""
        x = np.asarray(x, dtype=float)
        return np.array(
            [(float(a @ x) - c) / np.linalg.norm(a) for a, c in self.walls]
        )

    def angles(self) -> np.ndarray:
        """Interior vertex angles, for triangle alcoves."""
        if self.dim != 2 or self.vertices.shape[0] != 3:
            raise InvalidInputError("angles are defined for triangles")
        v = self.vertices
        out = []
        for i in range(3):
            e1 = v[(i + 1) % 3] - v[i]
            e2 = v[(i + 2) % 3] - v[i]
            c = float(e1 @ e2) / (np.linalg.norm(e1) * np.linalg.norm(e2))
            out.append(math.acos(max(-1.0, min(1.0, c))))
        return np.sort(np.array(out))


@dataclass(frozen=True, eq=False)
class WeylWord:
    """Sequence of generator indices with the cached affine composition.

    Letters are applied left to right: map = r_{letters[-1]} o ... o r_{letters[0]}.
    """

    letters: tuple
    map: AffineMap

    def __len__(self):
        return len(self.letters)

    @staticmethod
    def identity(dim: int) -> "WeylWord":
        return WeylWord((), AffineMap.identity(dim))

    def then(self, letter: int, generator: AffineMap) -> "WeylWord":
        return WeylWord(self.letters + (letter,), generator.compose(self.map))


@dataclass(frozen=True)
class FoldResult:
    point: np.ndarray
    word: WeylWord


@dataclass(frozen=True, eq=False)
class AffineWeylAction:
    """Fundamental alcove plus the reflections in its walls."""

    name: str
    system: RootSystemData | None
    alcove: FoldableFigure
    generators: tuple  # AffineMap reflections, aligned with alcove.walls

    @property
    def dim(self) -> int:
        return self.alcove.dim

    def fold(self, x, max_steps: int = 10_000) -> FoldResult:
        """Reflect across the most-violated wall until inside the alcove."""
        x = np.asarray(x, dtype=float)
        tol = SNAP * max(1.0, self.alcove.diameter(), float(np.linalg.norm(x)))
        word = WeylWord.identity(self.dim)
        current = x
        for _ in range(max_steps):
            viol = self.alcove.violations(current)
            worst = int(np.argmax(viol))
            if viol[worst] <= tol:
                return FoldResult(current, word)
            gen = self.generators[worst]
            current = gen(current)
            word = word.then(worst, gen)
        raise FoldDivergedError(f"folding {x} did not terminate in {max_steps} steps")

    def words_up_to(self, max_len: int, dedup_tol: float = 1e-10):
        """All distinct group elements of length <= max_len, BFS order.

        Deduplication keys on the affine map, not the letter sequence,
        since Coxeter relations identify distinct sequences.
        """
        ident = WeylWord.identity(self.dim)
        seen = {ident.map.key(dedup_tol)}
        out = [ident]
        frontier = deque([ident])
        while frontier:
            word = frontier.popleft()
            if len(word) >= max_len:
                continue
            for i, gen in enumerate(self.generators):
                child = word.then(i, gen)
                key = child.map.key(dedup_tol)
                if key not in seen:
                    seen.add(key)
                    out.append(child)
                    frontier.append(child)
        return out

    def extend_evaluate(self, f, x, kappa: int = 1):
        """Evaluate the reflection-extension of an alcove function at x.

        With kappa > 1 the function lives on the kappa-dilate of the
        alcove and the action is conjugated by the dilation.
        """
        x = np.asarray(x, dtype=float)
        res = self.fold(x / kappa)
        return f.evaluate(res.point * kappa)


def group_closure(generators, cap: int = 10_000):
    """BFS closure of a finite matrix group."""
    gens = [np.asarray(g, dtype=float) for g in generators]
    if not gens:
        raise InvalidInputError("need at least one generator")
    n = gens[0].shape[0]
    ident = np.eye(n)

    def key(m):
        return tuple(np.round(m.ravel() / 1e-10).astype(np.int64).tolist())

    elements = {key(ident): ident}
    frontier = deque([ident])
    while frontier:
        m = frontier.popleft()
        for g in gens:
            child = g @ m
            k = key(child)
            if k not in elements:
                if len(elements) >= cap:
                    raise NotClosedWithinCapError(f"group not closed within {cap} elements")
                elements[k] = child
                frontier.append(child)
    return len(elements), list(elements.values())


# ---------------------------------------------------------------------------
# regions and tessellation


@dataclass(frozen=True, eq=False)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.atleast_1d(np.asarray(self.center, float)))

    @property
    def dim(self):
        return self.center.shape[0]

    def measure(self) -> float:
        if self.dim == 1:
            return 2.0 * self.radius
        if self.dim == 2:
            return math.pi * self.radius**2
        raise InvalidInputError("ball measure implemented for n <= 2")


@dataclass(frozen=True, eq=False)
class Box:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", np.atleast_1d(np.asarray(self.lo, float)))
        object.__setattr__(self, "hi", np.atleast_1d(np.asarray(self.hi, float)))

    @property
    def dim(self):
        return self.lo.shape[0]

    def measure(self) -> float:
        return float(np.prod(self.hi - self.lo))


def _region_shape(region):
    """Shapely geometry (2D) or interval (1D) for a region."""
    if region.dim == 1:
        if isinstance(region, Ball):
            return (float(region.center[0] - region.radius), float(region.center[0] + region.radius))
        return (float(region.lo[0]), float(region.hi[0]))
    from shapely.geometry import Point, box

    if isinstance(region, Ball):
        return Point(*region.center).buffer(region.radius, quad_segs=64)
    return box(region.lo[0], region.lo[1], region.hi[0], region.hi[1])


@dataclass(frozen=True)
class TessellationResult:
    entries: tuple  # (WeylWord, cell-vertex array)
    uncovered: float
    region_measure: float
    max_pairwise_overlap: float

    def to_csv(self) -> str:
        lines = []
        for word, cell in self.entries:
            letters = " ".join(str(l) for l in word.letters)
            coords = ",".join(f"{c:.17g}" for c in cell.ravel())
            lines.append(f"\"{letters}\",{coords}")
        return "\n".join(lines) + "\n"


def tessellate(weyl: AffineWeylAction, region, max_len: int) -> TessellationResult:
    """Enumerate alcove images under words up to max_len and keep those
    meeting the region; reports an uncovered-measure estimate."""
    words = weyl.words_up_to(max_len)
    base = weyl.alcove.vertices
    dim = weyl.dim

    kept = []
    if dim == 1:
        lo, hi = _region_shape(region)
        for w in words:
            cell = w.map(base)
            a, b = float(cell.min()), float(cell.max())
            if min(hi, b) - max(lo, a) > 1e-12:
                kept.append((w, cell, (a, b)))
        kept.sort(key=lambda e: e[2])
        segs = sorted((max(lo, a), min(hi, b)) for _, _, (a, b) in kept)
        covered = 0.0
        cursor = lo
        for a, b in segs:
            a = max(a, cursor)
            if b > a:
                covered += b - a
                cursor = max(cursor, b)
        uncovered = max(0.0, (hi - lo) - covered)
        max_overlap = 0.0
        for i in range(len(kept) - 1):
            (_, _, (a1, b1)), (_, _, (a2, b2)) = kept[i], kept[i + 1]
            max_overlap = max(max_overlap, min(b1, b2) - max(a2, a1))
        entries = tuple((w, cell) for w, cell, _ in kept)
        return TessellationResult(entries, uncovered, hi - lo, max(0.0, max_overlap))

    from shapely.geometry import Polygon
    from shapely.ops import unary_union

    shape = _region_shape(region)
    polys = []
    for w in words:
        cell = w.map(base)
        poly = Polygon(cell)
        if poly.intersection(shape).area > 1e-15:
            polys.append((w, cell, poly))
    union = unary_union([p for _, _, p in polys]) if polys else None
    uncovered = shape.area if union is None else shape.difference(union).area
    max_overlap = 0.0
    for i in range(len(polys)):
        for j in range(i + 1, len(polys)):
            pi, pj = polys[i][2], polys[j][2]
            if pi.bounds[0] > pj.bounds[2] or pj.bounds[0] > pi.bounds[2]:
                continue
            if pi.bounds[1] > pj.bounds[3] or pj.bounds[1] > pi.bounds[3]:
                continue
            ov = pi.intersection(pj).area
            max_overlap = max(max_overlap, ov)
    entries = tuple((w, cell) for w, cell, _ in polys)
    return TessellationResult(entries, float(uncovered), float(shape.area), float(max_overlap))


# ---------------------------------------------------------------------------
# catalog


def _alcove_from_simples(simples: np.ndarray, highest: np.ndarray) -> FoldableFigure:
    """Alcove {<x,delta> >= 0 for simple delta, <x,highest> <= 1}."""
    n = simples.shape[1]
    walls = [(-d, 0.0) for d in simples] + [(highest, 1.0)]
    # vertices: origin plus, for each simple root dropped, the solution of
    # the remaining equalities with <x,highest> = 1
    verts = [np.zeros(n)]
    for drop in range(len(simples)):
        rows = [simples[i] for i in range(len(simples)) if i != drop] + [highest]
        rhs = [0.0] * (len(simples) - 1) + [1.0]
        verts.append(np.linalg.solve(np.array(rows), np.array(rhs)))
    return FoldableFigure(np.array(verts), tuple(walls))


def _action(name, roots, generic_v, alcove=None) -> AffineWeylAction:
    system = RootSystemData.from_roots(name, roots, generic_v)
    if alcove is None:
        # highest root: the positive root with <x, delta> >= 0 for all simples
        highest = None
        for a in system.positives:
            if all(float(a @ d) >= -TOL for d in system.simples):
                if highest is None or np.linalg.norm(a) > np.linalg.norm(highest) + TOL:
                    highest = a
        alcove = _alcove_from_simples(system.simples, highest)
        system = RootSystemData(
            system.name,
            system.roots,
            system.rank,
            system.coroots,
            system.positives,
            system.simples,
            highest,
        )
    gens = tuple(
        _wall_reflection(a, c) for a, c in alcove.walls
    )
    return AffineWeylAction(name, system, alcove, gens)


def _wall_reflection(a: np.ndarray, c: float) -> AffineMap:
    n = len(a)
    aa = float(a @ a)
    mat = np.eye(n) - 2.0 * np.outer(a, a) / aa
    off = (2.0 * c / aa) * a
    return AffineMap(mat, off, 1.0)


def rank2_catalog(name: str) -> AffineWeylAction:
    """Validated catalog entries for A1, A1xA1, A2, B2, G2.

    The B2 entry is scaled so that short roots have length 1/2 (alcove
    (0,0),(2,0),(1,1)), which keeps word length 8 enough to tile a
    radius-3 disc; angle triples and group orders are scale-free.
    """
    key = name.replace("×", "x").upper()
    if key == "A1":
        return _action("A1", np.array([[1.0], [-1.0]]), [1.0])
    if key == "A1XA1":
        roots = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
        # reducible: the alcove is the unit square, not a simplex
        walls = (
            (np.array([-1.0, 0.0]), 0.0),
            (np.array([1.0, 0.0]), 1.0),
            (np.array([0.0, -1.0]), 0.0),
            (np.array([0.0, 1.0]), 1.0),
        )
        square = FoldableFigure(
            np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]), walls
        )
        system = RootSystemData.from_roots("A1xA1", roots, [1.0, 0.618])
        gens = tuple(_wall_reflection(a, c) for a, c in walls)
        return AffineWeylAction("A1xA1", system, square, gens)
    if key == "A2":
        s3 = math.sqrt(3.0)
        roots = np.array(
            [
                [1.0, 0.0],
                [-1.0, 0.0],
                [0.5, s3 / 2],
                [-0.5, -s3 / 2],
                [-0.5, s3 / 2],
                [0.5, -s3 / 2],
            ]
        )
        return _action("A2", roots, [1.0, 0.618])
    if key == "B2":
        t = 0.5
        short = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]
        long = [[1.0, 1.0], [-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]]
        roots = t * np.array(short + long)
        return _action("B2", roots, [1.0, 0.618])
    if key == "G2":
        s3 = math.sqrt(3.0)
        short = [[1.0, 0.0], [0.5, s3 / 2], [-0.5, s3 / 2]]
        long = [[1.5, s3 / 2], [0.0, s3], [-1.5, s3 / 2]]
        roots = np.array(short + long)
        roots = np.vstack([roots, -roots])
        return _action("G2", roots, [1.0, 0.618])
    raise InvalidInputError(f"unknown catalog name {name!r}")


CATALOG_NAMES = ("A1", "A1xA1", "A2", "B2", "G2")


def catalog_json(name: str) -> str:
    weyl = rank2_catalog(name)
    sysd = weyl.system
    finite_order, _ = group_closure([reflection_matrix(d) for d in sysd.simples])
    doc = {
        "name": weyl.name,
        "rank": sysd.rank,
        "roots": sysd.roots.tolist(),
        "coroots": sysd.coroots.tolist(),
        "simples": sysd.simples.tolist(),
        "positives": sysd.positives.tolist(),
        "alcove_vertices": weyl.alcove.vertices.tolist(),
        "generators": [
            {"matrix": g.matrix.tolist(), "offset": g.offset.tolist()}
            for g in weyl.generators
        ],
        "finite_order": finite_order,
    }
    return json.dumps(doc, indent=2, sort_keys=True)


def reflection_matrix(alpha: np.ndarray) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=float)
    n = len(alpha)
    return np.eye(n) - 2.0 * np.outer(alpha, alpha) / float(alpha @ alpha)


def finite_weyl_order(weyl: AffineWeylAction, cap: int = 10_000) -> int:
    order, _ = group_closure([reflection_matrix(d) for d in weyl.system.simples], cap)
    return order


def fold(weyl: AffineWeylAction, x, max_steps: int = 10_000) -> FoldResult:
    """Functional form of :meth:`AffineWeylAction.fold`."""
    return weyl.fold(x, max_steps)


def extend_function(f, weyl: AffineWeylAction, x, kappa: int = 1):
    """Reflection-extension of an alcove function, evaluated at x."""
    return weyl.extend_evaluate(f, x, kappa)

"""Planar measurable sets as polygon unions (shapely-backed).

2D verdicts are tolerance-based: areas are compared against a snap
tolerance of 1e-9 (absolute, on sets of desk scale) and every regional
check carries its cutoffs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from shapely import affinity
from shapely.geometry import MultiPolygon, Point, Polygon, box
from shapely.ops import unary_union

from .errors import InvalidGeometryError, InvalidInputError

SNAP_AREA = 1e-9


def _as_multi(geom) -> MultiPolygon:
    if geom.is_empty:
        return MultiPolygon([])
    if isinstance(geom, Polygon):
        return MultiPolygon([geom])
    if isinstance(geom, MultiPolygon):
        return geom
    # collections from boolean ops: keep polygonal parts
    polys = [g for g in getattr(geom, "geoms", []) if isinstance(g, Polygon)]
    return MultiPolygon(polys)


@dataclass(frozen=True, eq=False)
class PolyUnion:
    """Finite union of simple polygons with disjoint interiors."""

    geom: MultiPolygon

    def __post_init__(self):
        g = self.geom
        if not g.is_valid:
            g = g.buffer(0)
        object.__setattr__(self, "geom", _as_multi(g))

    @staticmethod
    def from_polygons(rings) -> "PolyUnion":
        polys = []
        for ring in rings:
            try:
                poly = Polygon(ring)
            except (ValueError, TypeError) as exc:
                raise InvalidGeometryError(f"malformed polygon ring: {exc}") from exc
            if not poly.is_valid or poly.area <= 0:
                raise InvalidGeometryError(f"malformed polygon ring {ring[:3]}...")
            polys.append(poly)
        return PolyUnion(_as_multi(unary_union(polys)))

    @staticmethod
    def empty() -> "PolyUnion":
        return PolyUnion(MultiPolygon([]))

    def is_empty(self) -> bool:
        return self.geom.is_empty or self.geom.area <= 0.0

    def area(self) -> float:
        return float(self.geom.area)

    def bounds(self):
        return self.geom.bounds

    def union(self, other: "PolyUnion") -> "PolyUnion":
        return PolyUnion(_as_multi(unary_union([self.geom, other.geom])))

    def intersect(self, other: "PolyUnion") -> "PolyUnion":
        return PolyUnion(_as_multi(self.geom.intersection(other.geom)))

    def subtract(self, other: "PolyUnion") -> "PolyUnion":
        return PolyUnion(_as_multi(self.geom.difference(other.geom)))

    def translate(self, vec) -> "PolyUnion":
        return PolyUnion(
            _as_multi(affinity.translate(self.geom, xoff=float(vec[0]), yoff=float(vec[1])))
        )

    def linear(self, a: np.ndarray) -> "PolyUnion":
        a = np.asarray(a, dtype=float)
        return PolyUnion(
            _as_multi(
                affinity.affine_transform(
                    self.geom, [a[0, 0], a[0, 1], a[1, 0], a[1, 1], 0.0, 0.0]
                )
            )
        )

    def affine(self, a: np.ndarray, b) -> "PolyUnion":
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        return PolyUnion(
            _as_multi(
                affinity.affine_transform(
                    self.geom, [a[0, 0], a[0, 1], a[1, 0], a[1, 1], float(b[0]), float(b[1])]
                )
            )
        )

    def parts(self):
        return list(self.geom.geoms)

    def to_json(self) -> str:
        rings = []
        for poly in _split_holes(self.geom):
            coords = list(poly.exterior.coords)[:-1]
            rings.append([[float(x), float(y)] for x, y in coords])
        return json.dumps({"space": 2, "polygons": rings}, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "PolyUnion":
        doc = json.loads(text)
        if doc.get("space") != 2:
            raise InvalidGeometryError("expected a 2D set description")
        return PolyUnion.from_polygons(doc["polygons"])


def _split_holes(geom) -> list:
    """Cut polygons with interior rings into hole-free pieces."""
    out = []
    stack = list(_as_multi(geom).geoms)
    guard = 0
    while stack:
        poly = stack.pop()
        guard += 1
        if guard > 10_000:
            raise InvalidGeometryError("hole splitting did not terminate")
        if not poly.interiors:
            out.append(poly)
            continue
        cx = poly.interiors[0].centroid.x
        minx, miny, maxx, maxy = poly.bounds
        left = poly.intersection(box(minx - 1, miny - 1, cx, maxy + 1))
        right = poly.intersection(box(cx, miny - 1, maxx + 1, maxy + 1))
        for part in (left, right):
            stack.extend(_as_multi(part).geoms)
    return out


def ball_polygon(center, radius: float, segs: int = 128) -> PolyUnion:
    return PolyUnion(_as_multi(Point(float(center[0]), float(center[1])).buffer(radius, quad_segs=segs)))


def square_cell(half: float) -> PolyUnion:
    """The centered square [-half, half)^2 as a polygon."""
    return PolyUnion(_as_multi(box(-half, -half, half, half)))


# ---------------------------------------------------------------------------
# congruence checks (tolerance-based)


def translation_reduce_2d(e: PolyUnion, period: float):
    """Split e along the period lattice and shift pieces to the base cell
    [-period/2, period/2)^2; returns (pieces, labels)."""
    half = period / 2.0
    minx, miny, maxx, maxy = e.bounds() if not e.is_empty() else (0, 0, 0, 0)
    pieces = []
    labels = []
    k0 = math.floor((minx + half) / period)
    k1 = math.ceil((maxx + half) / period)
    l0 = math.floor((miny + half) / period)
    l1 = math.ceil((maxy + half) / period)
    for k in range(k0 - 1, k1 + 1):
        for l in range(l0 - 1, l1 + 1):
            cell = box(
                k * period - half, l * period - half, k * period + half, l * period + half
            )
            part = e.geom.intersection(cell)
            part = _as_multi(part)
            if part.area > SNAP_AREA:
                shifted = affinity.translate(part, xoff=-k * period, yoff=-l * period)
                pieces.append(PolyUnion(shifted))
                labels.append((k, l))
    return pieces, labels


def translation_congruent_2d(e: PolyUnion, f: PolyUnion, period: float = 2 * math.pi):
    """Both sets reduce mod the period lattice; the reductions must agree
    as multiplicity-1 coverings for a pass (general multiplicities are
    compared pairwise)."""
    from .congruence import CongruenceWitness

    pieces_e, labels_e = translation_reduce_2d(e, period)
    pieces_f, labels_f = translation_reduce_2d(f, period)

    def profile(pieces):
        total = sum(p.area() for p in pieces)
        union = PolyUnion.empty()
        for p in pieces:
            union = union.union(p)
        return total, union

    tot_e, un_e = profile(pieces_e)
    tot_f, un_f = profile(pieces_f)
    excess = (tot_e - un_e.area()) + (tot_f - un_f.area())
    mismatch = un_e.subtract(un_f).area() + un_f.subtract(un_e).area()
    defect = excess + mismatch

    matched = []
    for piece, lab in zip(pieces_e, labels_e):
        for pf, lf in zip(pieces_f, labels_f):
            inter = piece.intersect(pf)
            if inter.area() > SNAP_AREA:
                matched.append(
                    (lab, lf, (lf[0] - lab[0], lf[1] - lab[1]), inter.area())
                )
    status = "congruent" if defect <= SNAP_AREA * max(1.0, tot_e) else "not-congruent"
    return CongruenceWitness(status, float(defect), tuple(matched))


def dilation_generator_2d(e: PolyUnion, matrix: np.ndarray, window: int, region: PolyUnion, theta=None):
    """Do the matrix-power images of e tile the region (minus the fixed
    point) without overlaps?  Regional, window-limited."""
    from .congruence import FundamentalDomainReport

    matrix = np.asarray(matrix, dtype=float)
    theta_vec = np.zeros(2) if theta is None else np.asarray(theta, dtype=float)

    def power_image(k: int) -> PolyUnion:
        a = np.linalg.matrix_power(matrix, k) if k >= 0 else np.linalg.inv(
            np.linalg.matrix_power(matrix, -k)
        )
        b = theta_vec - a @ theta_vec
        return e.affine(a, b)

    overlap = 0.0
    covered = PolyUnion.empty()
    for k in sorted(range(-window, window + 1), key=lambda k: (abs(k), k < 0)):
        img = power_image(k).intersect(region)
        if img.is_empty():
            continue
        overlap += covered.intersect(img).area()
        covered = covered.union(img)
    uncovered_geom = region.subtract(covered)
    uncovered = uncovered_geom.area()

    # window artifact: even an exact generator cannot cover the
    # A^-window-contraction of e's span around the fixed point
    minx, miny, maxx, maxy = e.bounds()
    r_e = max(
        np.linalg.norm(np.array(c, dtype=float) - theta_vec)
        for c in ((minx, miny), (minx, maxy), (maxx, miny), (maxx, maxy))
    )
    shrink = 1.0 / float(np.min(np.abs(np.linalg.eigvals(matrix))))
    probe = ball_polygon(theta_vec, r_e * shrink**window, segs=64)
    genuine = uncovered_geom.subtract(probe).area()

    scale = max(1.0, region.area())
    ok = overlap <= SNAP_AREA * scale and genuine <= SNAP_AREA * scale
    status = "fundamental-domain" if ok else "not-fundamental-domain"
    return FundamentalDomainReport(
        status,
        float(overlap),
        float(uncovered),
        notes=f"window hole near fixed point holds {uncovered - genuine:.3g} of the uncovered area",
    )


def is_fundamental_domain_2d(e: PolyUnion, action, region, cutoff: int):
    from .congruence import FundamentalDomainReport, LatticeTranslation

    if isinstance(action, LatticeTranslation):
        period = float(action.period) * math.pi
        pieces, _ = translation_reduce_2d(e, period)
        total = sum(p.area() for p in pieces)
        union = PolyUnion.empty()
        for p in pieces:
            union = union.union(p)
        overlap = total - union.area()
        uncovered = period**2 - union.area()
        ok = overlap <= SNAP_AREA and abs(uncovered) <= SNAP_AREA
        return FundamentalDomainReport(
            "fundamental-domain" if ok else "not-fundamental-domain",
            float(overlap),
            float(max(uncovered, 0.0)),
        )
    if hasattr(action, "alcove"):
        if region is None:
            raise InvalidInputError("Weyl tiling checks need a bounded region")
        overlap = 0.0
        covered = PolyUnion.empty()
        for word in action.words_up_to(cutoff):
            img = e.affine(word.map.matrix, word.map.offset).intersect(region)
            if img.is_empty():
                continue
            overlap += covered.intersect(img).area()
            covered = covered.union(img)
        uncovered = region.subtract(covered).area()
        scale = max(1.0, region.area())
        ok = overlap <= SNAP_AREA * scale and uncovered <= SNAP_AREA * scale
        return FundamentalDomainReport(
            "fundamental-domain" if ok else "not-fundamental-domain",
            float(overlap),
            float(uncovered),
        )
    raise InvalidInputError(f"unsupported 2D action {action!r}")


def g_congruent_2d(e: PolyUnion, f: PolyUnion, action, cutoff: int, max_rounds: int = 2000):
    """Greedy polygon matching by group elements (largest piece first)."""
    from .congruence import CongruenceWitness

    elements = _elements_2d(action, cutoff)
    remaining_e = e
    remaining_f = f
    matched = []
    dead = PolyUnion.empty()
    for _ in range(max_rounds):
        live = remaining_e.subtract(dead)
        if live.is_empty():
            break
        piece = max(live.parts(), key=lambda p: p.area)
        chunk = PolyUnion(MultiPolygon([piece]))
        hit = False
        for label, (a, b) in elements:
            img = chunk.affine(a, b).intersect(remaining_f)
            if img.area() > SNAP_AREA:
                ainv = np.linalg.inv(a)
                back = img.affine(ainv, -ainv @ np.asarray(b, dtype=float))
                matched.append((label, img.area()))
                remaining_e = remaining_e.subtract(back)
                remaining_f = remaining_f.subtract(img)
                hit = True
                break
        if not hit:
            dead = dead.union(chunk)
    defect = remaining_e.area() + remaining_f.area()
    if defect <= SNAP_AREA * max(1.0, e.area()):
        status = "congruent"
    elif abs(e.area() - f.area()) > SNAP_AREA * max(1.0, e.area()):
        status = "not-congruent"
    else:
        status = "inconclusive"
    return CongruenceWitness(status, float(defect), tuple(matched))


def _elements_2d(action, cutoff: int):
    from .congruence import LatticeTranslation

    if isinstance(action, LatticeTranslation):
        period = float(action.period) * math.pi
        labs = sorted(
            ((k, l) for k in range(-cutoff, cutoff + 1) for l in range(-cutoff, cutoff + 1)),
            key=lambda kl: (abs(kl[0]) + abs(kl[1]), kl),
        )
        return [
            ((k, l), (np.eye(2), np.array([k * period, l * period]))) for k, l in labs
        ]
    if hasattr(action, "alcove"):
        return [
            (w.letters, (w.map.matrix, w.map.offset)) for w in action.words_up_to(cutoff)
        ]
    raise InvalidInputError(f"unsupported 2D action {action!r}")

"""Simplicial domains and their partitions into similar congruent cells.

A partition scheme carries the parent simplex, its cells, and the
similitudes mapping the parent onto each cell.  Geometric predicates use
a snap tolerance of 1e-10 scaled by the parent diameter, since the
rank-2 alcove geometry involves surds and exact rational predicates are
unavailable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .affine import AffineMap
from .errors import (
    InvalidInputError,
    LabellingInconsistentError,
)

SNAP = 1e-10


@dataclass(frozen=True, eq=False)
class Simplex:
    """n+1 affinely independent points in R^n."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        if v.shape[0] != v.shape[1] + 1:
            raise InvalidInputError(
                f"a simplex in R^{v.shape[1]} needs {v.shape[1] + 1} vertices"
            )
        object.__setattr__(self, "vertices", v)
        if self.volume() <= SNAP * max(1.0, self.diameter()) ** self.dim:
            raise InvalidInputError("simplex is degenerate")

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    def volume(self) -> float:
        edges = self.vertices[1:] - self.vertices[0]
        return abs(float(np.linalg.det(edges))) / math.factorial(self.dim)

    def diameter(self) -> float:
        v = self.vertices
        diffs = v[:, None, :] - v[None, :, :]
        return float(np.sqrt((diffs**2).sum(-1)).max())

    def barycentric(self, x: np.ndarray) -> np.ndarray:
        """Barycentric coordinates of x (sum to 1)."""
        a = np.vstack([self.vertices.T, np.ones(self.dim + 1)])
        b = np.concatenate([np.asarray(x, dtype=float), [1.0]])
        return np.linalg.solve(a, b)

    def contains(self, x: np.ndarray, tol: float = None) -> bool:
        if tol is None:
            tol = SNAP * max(1.0, self.diameter())
        return bool(np.all(self.barycentric(x) >= -tol))

    def barycenter(self) -> np.ndarray:
        return self.vertices.mean(axis=0)

    def edge_lengths(self) -> np.ndarray:
        v = self.vertices
        out = []
        for i in range(len(v)):
            for j in range(i + 1, len(v)):
                out.append(float(np.linalg.norm(v[i] - v[j])))
        return np.sort(np.array(out))


class VertexRegistry:
    """Tolerance-based identity for vertices shared between cells."""

    def __init__(self, tol: float):
        self.tol = tol
        self.points: list[np.ndarray] = []
        self._buckets: dict[tuple, list[int]] = {}

    def _keys(self, p: np.ndarray):
        base = np.floor(p / self.tol).astype(np.int64)
        dim = len(p)
        for delta in np.ndindex(*(2,) * dim):
            yield tuple(base + np.array(delta))

    def lookup(self, p: np.ndarray):
        p = np.asarray(p, dtype=float)
        for key in self._keys(p):
            for idx in self._buckets.get(key, ()):
                if np.linalg.norm(self.points[idx] - p) <= self.tol:
                    return idx
        return None

    def insert(self, p: np.ndarray) -> int:
        found = self.lookup(p)
        if found is not None:
            return found
        p = np.asarray(p, dtype=float)
        idx = len(self.points)
        self.points.append(p)
        key = tuple(np.floor(p / self.tol).astype(np.int64))
        self._buckets.setdefault(key, []).append(idx)
        return idx

    def __len__(self):
        return len(self.points)

    def as_array(self) -> np.ndarray:
        return np.array(self.points)


@dataclass(frozen=True, eq=False)
class PartitionScheme:
    """Parent simplex, N cells, and the similitudes u_i: parent -> cell i."""

    parent: Simplex
    sims: tuple
    cells: tuple = None  # type: ignore[assignment]
    ratio: float = None  # type: ignore[assignment]
    words: tuple = None  # set by kappa_subdivision

    def __post_init__(self):
        sims = tuple(self.sims)
        if len(sims) < 2:
            raise InvalidInputError("a partition scheme needs at least two cells")
        cells = self.cells
        if cells is None:
            cells = tuple(Simplex(u(self.parent.vertices)) for u in sims)
        object.__setattr__(self, "sims", sims)
        object.__setattr__(self, "cells", tuple(cells))
        if self.ratio is None:
            sim = sims[0].is_similitude(self.snap_tol())
            ratio = sim[0] if sim else float(sims[0].lip)
            object.__setattr__(self, "ratio", ratio)

    @property
    def dim(self) -> int:
        return self.parent.dim

    @property
    def n_cells(self) -> int:
        return len(self.sims)

    def snap_tol(self) -> float:
        return SNAP * max(1.0, self.parent.diameter())

    def vertex_registry(self) -> tuple[VertexRegistry, list]:
        """Registry over union of cell vertices, plus per-cell vertex ids."""
        reg = VertexRegistry(self.snap_tol())
        cell_vertex_ids = []
        for cell in self.cells:
            cell_vertex_ids.append([reg.insert(v) for v in cell.vertices])
        return reg, cell_vertex_ids

    def parent_vertex_ids(self, reg: VertexRegistry) -> list:
        ids = []
        for v in self.parent.vertices:
            idx = reg.lookup(v)
            if idx is None:
                raise InvalidInputError(
                    "parent vertex is not a vertex of any cell; scheme malformed"
                )
            ids.append(idx)
        return ids

    def locate(self, x: np.ndarray) -> int:
        """Lowest index of a cell containing x."""
        for i, cell in enumerate(self.cells):
            if cell.contains(x):
                return i
        return -1

    def to_json(self) -> str:
        reg, cell_ids = self.vertex_registry()
        doc = {
            "vertices": [[float(c) for c in p] for p in reg.points],
            "cells": cell_ids,
            "sims": [
                {
                    "matrix": [[float(c) for c in row] for row in u.matrix],
                    "offset": [float(c) for c in u.offset],
                }
                for u in self.sims
            ],
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "PartitionScheme":
        doc = json.loads(text)
        sims = tuple(
            AffineMap(np.array(s["matrix"]), np.array(s["offset"]))
            for s in doc["sims"]
        )
        verts = np.array(doc["vertices"])
        cells = tuple(Simplex(verts[idx]) for idx in doc["cells"])
        parent = Simplex(sims[0].inverse()(cells[0].vertices))
        return PartitionScheme(parent, sims, cells)


def _overlap_volume(a: Simplex, b: Simplex) -> float:
    """Interior-intersection volume; exact for n <= 2."""
    if a.dim == 1:
        lo = max(a.vertices.min(), b.vertices.min())
        hi = min(a.vertices.max(), b.vertices.max())
        return max(0.0, hi - lo)
    if a.dim == 2:
        from shapely.geometry import Polygon

        pa = Polygon(a.vertices)
        pb = Polygon(b.vertices)
        return float(pa.intersection(pb).area)
    raise InvalidInputError(
        "interior-overlap checks are implemented for dimensions 1 and 2 only"
    )


@dataclass(frozen=True)
class PartitionReport:
    p1_cover: bool
    p1_disjoint: bool
    p2_similar: bool
    p3_congruent: bool
    volume_defect: float
    offending_pairs: tuple
    details: tuple

    @property
    def ok(self) -> bool:
        return self.p1_cover and self.p1_disjoint and self.p2_similar and self.p3_congruent


def validate_partition(scheme: PartitionScheme) -> PartitionReport:
    """Check (P1) covering/disjointness, (P2) similarity, (P3) congruence."""
    parent_vol = scheme.parent.volume()
    tol = scheme.snap_tol()
    details = []
    offending = []

    cell_vol = sum(c.volume() for c in scheme.cells)
    vol_defect = abs(cell_vol - parent_vol) / parent_vol
    inside = all(
        scheme.parent.contains(v) for c in scheme.cells for v in c.vertices
    )
    p1_cover = vol_defect <= 1e-9 and inside
    if not p1_cover:
        details.append(
            f"(P1) cover: cell volume sum {cell_vol:.12g} vs parent "
            f"{parent_vol:.12g}, inside={inside}"
        )

    p1_disjoint = True
    for i in range(scheme.n_cells):
        for j in range(i + 1, scheme.n_cells):
            ov = _overlap_volume(scheme.cells[i], scheme.cells[j])
            if ov > 1e-9 * parent_vol:
                p1_disjoint = False
                offending.append((i, j))
                details.append(f"(P1) interiors of cells {i},{j} overlap by {ov:.3g}")

    p2_similar = True
    for i, (u, cell) in enumerate(zip(scheme.sims, scheme.cells)):
        sim = u.is_similitude(1e-10)
        image_ok = _vertex_sets_match(u(scheme.parent.vertices), cell.vertices, tol)
        if sim is None or abs(sim[0] - scheme.ratio) > tol or not image_ok:
            p2_similar = False
            offending.append((i, i))
            details.append(f"(P2) map {i} is not a ratio-{scheme.ratio:.6g} similitude onto its cell")

    p3_congruent = True
    ref = scheme.cells[0].edge_lengths()
    for i, cell in enumerate(scheme.cells[1:], start=1):
        if np.max(np.abs(cell.edge_lengths() - ref)) > tol:
            p3_congruent = False
            offending.append((0, i))
            details.append(f"(P3) cell {i} is not congruent to cell 0")

    return PartitionReport(
        p1_cover,
        p1_disjoint,
        p2_similar,
        p3_congruent,
        vol_defect,
        tuple(offending),
        tuple(details),
    )


def _vertex_sets_match(a: np.ndarray, b: np.ndarray, tol: float) -> bool:
    if a.shape != b.shape:
        return False
    used = set()
    for p in a:
        hit = None
        for k, q in enumerate(b):
            if k not in used and np.linalg.norm(p - q) <= tol:
                hit = k
                break
        if hit is None:
            return False
        used.add(hit)
    return True


@dataclass(frozen=True, eq=False)
class LabellingMap:
    """Per-cell assignment of cell vertices to parent vertices.

    ``cell_labels[i][j]`` is the parent-vertex index with
    u_i(parent_vertex) = j-th vertex of cell i.  ``consistent`` records
    whether the per-cell tables merge into a single-valued map on the
    union of cell vertices; interpolation only needs the per-cell tables,
    single-valuedness is the stricter foldable-figure property.
    """

    cell_labels: tuple
    consistent: bool
    global_map: dict | None
    registry: VertexRegistry
    cell_vertex_ids: tuple
    parent_ids: tuple

    def parent_index(self, cell: int, local_vertex: int) -> int:
        return self.cell_labels[cell][local_vertex]


def build_labelling(scheme: PartitionScheme) -> LabellingMap:
    """Invert each similitude on its cell's vertices.

    Raises :class:`LabellingInconsistentError` when some cell vertex does
    not pull back to a parent vertex, i.e. the scheme violates the
    labelling equation u_i(l(v)) = v.
    """
    tol = scheme.snap_tol()
    reg, cell_ids = scheme.vertex_registry()
    parent_ids = scheme.parent_vertex_ids(reg)
    parent_vertices = scheme.parent.vertices

    cell_labels = []
    merged: dict[int, int] = {}
    consistent = True
    for i, (u, ids) in enumerate(zip(scheme.sims, cell_ids)):
        inv = u.inverse()
        row = []
        for j, vid in enumerate(ids):
            y = inv(reg.points[vid])
            hit = None
            for k, p in enumerate(parent_vertices):
                if np.linalg.norm(y - p) <= tol:
                    hit = k
                    break
            if hit is None:
                raise LabellingInconsistentError(
                    f"cell {i} vertex {j} pulls back to {y}, not a parent vertex"
                )
            row.append(hit)
            if merged.setdefault(vid, hit) != hit:
                consistent = False
        cell_labels.append(tuple(row))

    return LabellingMap(
        tuple(cell_labels),
        consistent,
        dict(merged) if consistent else None,
        reg,
        tuple(tuple(r) for r in cell_ids),
        tuple(parent_ids),
    )


def kappa_subdivision(fig: Simplex, weyl, kappa: int) -> PartitionScheme:
    """Subdivide the kappa-dilate of a fundamental alcove into kappa^n
    copies of it, with cell 1 the alcove itself and every other
    similitude a reflection word composed with division by kappa.
    """
    if kappa < 2 or int(kappa) != kappa:
        raise InvalidInputError("kappa must be an integer >= 2")
    kappa = int(kappa)
    alcove_simplex = weyl.alcove.as_simplex()
    tol = SNAP * max(1.0, fig.diameter())
    if not _vertex_sets_match(fig.vertices, alcove_simplex.vertices, tol):
        raise InvalidInputError("fig is not the fundamental alcove of the action")
    if not any(np.linalg.norm(v) <= tol for v in fig.vertices):
        raise InvalidInputError("alcove must have a vertex at the origin")

    n = fig.dim
    target = kappa**n
    parent = Simplex(fig.vertices * kappa)
    u1 = AffineMap(np.eye(n) / kappa, np.zeros(n))

    found = {}
    for word in weyl.words_up_to(4 * kappa * (n + 1) + 4):
        cell_vertices = word.map(fig.vertices)
        if all(parent.contains(v) for v in cell_vertices):
            rows = np.round(cell_vertices / tol).astype(np.int64)
            key = tuple(sorted(map(tuple, rows.tolist())))
            if key not in found:
                found[key] = (word, cell_vertices)
        if len(found) == target:
            break
    if len(found) != target:
        raise InvalidInputError(
            f"found {len(found)} cells inside the dilate, expected {target}"
        )

    entries = sorted(
        found.values(),
        key=lambda wc: (len(wc[0].letters), tuple(np.round(wc[1].mean(0) / tol).astype(np.int64))),
    )
    words = tuple(w for w, _ in entries)
    sims = tuple(w.map.compose(u1) for w, _ in entries)
    return PartitionScheme(parent, sims, ratio=1.0 / kappa, words=words)


def example2_scheme() -> PartitionScheme:
    """Four-cell fold partition of the right triangle (0,0),(1,0),(0,1).

    The cells are the two corner triangles at (1,0) and (0,1) plus the
    diagonal split of the remaining square, with the similitudes
    u_1 = x/2 + (1/2,0), u_2 = diag(-1/2,1/2)x + (1/2,0),
    u_3 = diag(1/2,-1/2)x + (0,1/2), u_4 = x/2 + (0,1/2).
    """
    parent = Simplex([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    half = np.diag([0.5, 0.5])
    sims = (
        AffineMap(half, [0.5, 0.0]),
        AffineMap(np.diag([-0.5, 0.5]), [0.5, 0.0]),
        AffineMap(np.diag([0.5, -0.5]), [0.0, 0.5]),
        AffineMap(half, [0.0, 0.5]),
    )
    return PartitionScheme(parent, sims, ratio=0.5)


def interval_scheme(fold: bool = False) -> PartitionScheme:
    """Split [0,1] into [0,1/2] and [1/2,1].

    With ``fold=False`` the second map keeps orientation (u_2 = x/2 + 1/2,
    the classic interpolation setup whose per-cell labels disagree at the
    midpoint); with ``fold=True`` it reflects (u_2 = 1 - x/2), which is the
    alcove subdivision and has a single-valued labelling.
    """
    parent = Simplex([[0.0], [1.0]])
    u1 = AffineMap([[0.5]], [0.0])
    u2 = AffineMap([[-0.5]], [1.0]) if fold else AffineMap([[0.5]], [0.5])
    return PartitionScheme(parent, (u1, u2), ratio=0.5)

"""Iterated function systems on finite point clouds.

Compact sets are represented by finite point clouds with an optional
merge radius; the Banach fixed-point estimate then certifies how close an
iterate is to the true attractor.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .affine import AffineMap
from .errors import InvalidInputError, NotContractiveError, ResourceLimitError

DEFAULT_POINT_CAP = 2_000_000
POINT_CAP_ENV = "FRACWEYL_MAX_POINTS"


def _point_cap(explicit=None) -> int:
    if explicit is not None:
        return int(explicit)
    return int(os.environ.get(POINT_CAP_ENV, DEFAULT_POINT_CAP))


def _normalize(points: np.ndarray, dedup_tol: float) -> np.ndarray:
    """Deduplicate and sort rows lexicographically.

    With a positive tolerance the coordinates are snapped to a grid of
    that pitch, which guarantees surviving points are at least one pitch
    apart in some coordinate.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if dedup_tol > 0.0:
        pts = np.round(pts / dedup_tol) * dedup_tol
    pts = np.unique(pts, axis=0)  # unique sorts lexicographically
    return pts


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Finite nonempty set of points in R^n, deduplicated and sorted."""

    points: np.ndarray
    dedup_tol: float = 0.0

    def __post_init__(self):
        pts = _normalize(self.points, self.dedup_tol)
        if pts.size == 0:
            raise InvalidInputError("point cloud must be nonempty")
        if not np.all(np.isfinite(pts)):
            raise InvalidInputError("point cloud entries must be finite")
        object.__setattr__(self, "points", pts)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    def to_csv(self) -> str:
        """One point per row, 17 significant digits."""
        lines = [",".join(f"{x:.17g}" for x in row) for row in self.points]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True, eq=False)
class IteratedSystem:
    """Finite family of affine maps sharing one ambient dimension."""

    maps: tuple
    dim: int = None  # type: ignore[assignment]
    contraction: float = None  # type: ignore[assignment]

    def __post_init__(self):
        maps = tuple(self.maps)
        if not maps:
            raise InvalidInputError("an IFS needs at least one map")
        dims = {m.dim for m in maps}
        if len(dims) != 1:
            raise InvalidInputError(f"maps have mixed dimensions {sorted(dims)}")
        object.__setattr__(self, "maps", maps)
        object.__setattr__(self, "dim", maps[0].dim)
        object.__setattr__(self, "contraction", max(m.lip for m in maps))

    def require_contractive(self):
        if not self.contraction < 1.0:
            raise NotContractiveError(
                f"system contraction {self.contraction} is not < 1"
            )


def hausdorff_distance(a: PointCloud, b: PointCloud) -> float:
    """max-min distance between two finite clouds (symmetric)."""
    if a.dim != b.dim:
        raise InvalidInputError(f"dimension mismatch: {a.dim} vs {b.dim}")
    tree_a = cKDTree(a.points)
    tree_b = cKDTree(b.points)
    d_ab = tree_b.query(a.points, k=1)[0].max()
    d_ba = tree_a.query(b.points, k=1)[0].max()
    return float(max(d_ab, d_ba))


def hutchinson_apply(sys: IteratedSystem, s: PointCloud, point_cap=None) -> PointCloud:
    """Union of the images of ``s`` under every map of the system."""
    if sys.dim != s.dim:
        raise InvalidInputError(f"dimension mismatch: {sys.dim} vs {s.dim}")
    cap = _point_cap(point_cap)
    if len(s) * len(sys.maps) > cap:
        raise ResourceLimitError(
            f"image would exceed {cap} points; raise dedup_tol or "
            f"{POINT_CAP_ENV}"
        )
    images = np.concatenate([m(s.points) for m in sys.maps], axis=0)
    return PointCloud(images, s.dedup_tol)


@dataclass(frozen=True)
class AttractorResult:
    cloud: PointCloud
    certified_bound: float
    iterations: int
    first_gap: float
    gaps: tuple

    def __iter__(self):
        # allow `cloud, bound = attractor_iterate(...)`
        return iter((self.cloud, self.certified_bound))


def attractor_iterate(
    sys: IteratedSystem,
    seed: PointCloud,
    target_tol: float,
    point_cap=None,
    max_iter: int = 200,
) -> AttractorResult:
    """Iterate the set map from ``seed`` until the Banach estimate
    c^m * d_H(K1, K0) / (1 - c) drops below ``target_tol``.

    The returned bound dominates the Hausdorff distance between the final
    iterate and the true attractor.
    """
    sys.require_contractive()
    if not target_tol > 0.0:
        raise InvalidInputError("target_tol must be positive")
    c = sys.contraction
    current = seed
    nxt = hutchinson_apply(sys, current, point_cap)
    first_gap = hausdorff_distance(current, nxt)
    gaps = [first_gap]
    if first_gap == 0.0:
        return AttractorResult(nxt, 0.0, 1, 0.0, (0.0,))
    m = 1
    bound = c * first_gap / (1.0 - c)
    while bound > target_tol:
        if m >= max_iter:
            raise ResourceLimitError(f"no convergence within {max_iter} iterations")
        prev, current = nxt, hutchinson_apply(sys, nxt, point_cap)
        gaps.append(hausdorff_distance(prev, current))
        nxt = current
        m += 1
        bound = c**m * first_gap / (1.0 - c)
    return AttractorResult(nxt, bound, m, first_gap, tuple(gaps))

"""Affine maps on R^n with certified Lipschitz bounds."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError

# Relative slack applied to computed spectral norms so the stored constant
# is an upper bound despite floating-point rounding.
_SPECTRAL_SLACK = 1e-13


def _charpoly_max_eig(b: np.ndarray) -> float:
    """Largest eigenvalue of a symmetric PSD matrix of size <= 4.

    Uses the Faddeev-LeVerrier characteristic polynomial followed by a
    companion-matrix root solve and two Newton polish steps.
    """
    n = b.shape[0]
    if n == 1:
        return float(b[0, 0])
    # Faddeev-LeVerrier: coefficients of lambda^n + c1 lambda^(n-1) + ... + cn
    coeffs = np.zeros(n + 1)
    coeffs[0] = 1.0
    m = np.zeros_like(b)
    ident = np.eye(n)
    for k in range(1, n + 1):
        m = b @ m + coeffs[k - 1] * ident
        coeffs[k] = -np.trace(b @ m) / k
    roots = np.roots(coeffs)
    lam = float(np.max(roots.real))
    # Newton polish against p(lambda) = sum coeffs[i] lam^(n-i)
    deriv = np.polyder(coeffs)
    for _ in range(2):
        p = np.polyval(coeffs, lam)
        dp = np.polyval(deriv, lam)
        if dp != 0.0:
            lam -= p / dp
    return max(lam, 0.0)


def lipschitz_bound(matrix: np.ndarray) -> float:
    """Certified upper bound on the spectral norm of ``matrix``.

    For n <= 4 the bound comes from the characteristic polynomial of
    M^T M (exact up to root polishing); larger matrices fall back to the
    LAPACK symmetric eigensolver.  Either path is accurate to better than
    1e-12 relative and the result is inflated by a small slack so that it
    dominates the true norm.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise InvalidInputError("matrix entries must be finite")
    b = m.T @ m
    if m.shape[0] <= 4:
        lam = _charpoly_max_eig(b)
    else:
        lam = float(np.linalg.eigvalsh(b)[-1])
    sigma = float(np.sqrt(max(lam, 0.0)))
    return sigma * (1.0 + _SPECTRAL_SLACK)


@dataclass(frozen=True, eq=False)
class AffineMap:
    """x |-> matrix @ x + offset with a certified Lipschitz constant."""

    matrix: np.ndarray
    offset: np.ndarray
    lip: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        mat = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        off = np.atleast_1d(np.asarray(self.offset, dtype=float))
        if mat.shape[0] != mat.shape[1] or mat.shape[0] != off.shape[0]:
            raise InvalidInputError(
                f"matrix {mat.shape} and offset {off.shape} dimensions disagree"
            )
        if not (np.all(np.isfinite(mat)) and np.all(np.isfinite(off))):
            raise InvalidInputError("affine map entries must be finite")
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "offset", off)
        if self.lip is None:
            object.__setattr__(self, "lip", lipschitz_bound(mat))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __call__(self, points: np.ndarray) -> np.ndarray:
        """Apply to a single point (n,) or a stack of points (m, n)."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            return self.matrix @ pts + self.offset
        return pts @ self.matrix.T + self.offset

    def compose(self, other: "AffineMap") -> "AffineMap":
        """self after other: x |-> self(other(x))."""
        return AffineMap(
            self.matrix @ other.matrix,
            self.matrix @ other.offset + self.offset,
        )

    def inverse(self) -> "AffineMap":
        inv = np.linalg.inv(self.matrix)
        return AffineMap(inv, -inv @ self.offset)

    def almost_equal(self, other: "AffineMap", tol: float = 1e-10) -> bool:
        return bool(
            np.all(np.abs(self.matrix - other.matrix) <= tol)
            and np.all(np.abs(self.offset - other.offset) <= tol)
        )

    def key(self, tol: float = 1e-10) -> tuple:
        """Hashable rounded representation for map-level deduplication."""
        flat = np.concatenate([self.matrix.ravel(), self.offset])
        return tuple(np.round(flat / tol).astype(np.int64).tolist())

    @staticmethod
    def identity(dim: int) -> "AffineMap":
        return AffineMap(np.eye(dim), np.zeros(dim), 1.0)

    def is_similitude(self, tol: float = 1e-10):
        """Return (ratio, orthogonal_part) if matrix = ratio * O, else None."""
        ratio = float(np.sqrt(np.abs(np.linalg.det(self.matrix)) ** (2.0 / self.dim)))
        if ratio <= tol:
            return None
        o = self.matrix / ratio
        if np.max(np.abs(o.T @ o - np.eye(self.dim))) <= tol:
            return ratio, o
        return None

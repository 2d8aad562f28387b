"""Exact unions of half-open intervals with rational endpoints.

Endpoints are :class:`fractions.Fraction` values measured in a declared
unit: ``"pi"`` for the classical wavelet-set objects (so translation by
2*pi is +2 and dyadic dilation is *2, both exact) or ``"1"`` for plain
real coordinates (affine Weyl alcoves, dilation-reflection sets).  All
set algebra and measures in a fixed unit are exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import InvalidGeometryError, InvalidInputError

UNIT_PI = "pi"
UNIT_ONE = "1"


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)  # exact binary value
    raise InvalidInputError(f"cannot interpret {x!r} as an exact rational")


def _normalize(pieces) -> tuple:
    items = sorted((p for p in pieces if p[0] < p[1]), key=lambda p: p[0])
    out = []
    for lo, hi in items:
        if out and lo < out[-1][1]:
            raise InvalidGeometryError("interval pieces overlap")
        if out and lo == out[-1][1]:
            out[-1] = (out[-1][0], hi)
        else:
            out.append((lo, hi))
    return tuple(out)


@dataclass(frozen=True, eq=True)
class IntervalUnion:
    """Normalized finite union of half-open intervals [a, b)."""

    pieces: tuple
    unit: str = UNIT_PI

    def __post_init__(self):
        if self.unit not in (UNIT_PI, UNIT_ONE):
            raise InvalidInputError(f"unknown unit {self.unit!r}")
        pieces = tuple(
            (_frac(lo), _frac(hi)) for lo, hi in self.pieces
        )
        object.__setattr__(self, "pieces", _normalize(pieces))

    # -- constructors ------------------------------------------------------

    @staticmethod
    def from_pairs(pairs, unit: str = UNIT_PI) -> "IntervalUnion":
        merged = _merge_overlapping([( _frac(a), _frac(b)) for a, b in pairs])
        return IntervalUnion(merged, unit)

    @staticmethod
    def empty(unit: str = UNIT_PI) -> "IntervalUnion":
        return IntervalUnion((), unit)

    # -- basic queries -----------------------------------------------------

    def is_empty(self) -> bool:
        return not self.pieces

    def measure(self) -> Fraction:
        """Total length in the declared unit (exact)."""
        return sum((hi - lo for lo, hi in self.pieces), Fraction(0))

    def measure_float(self) -> float:
        scale = math.pi if self.unit == UNIT_PI else 1.0
        return float(self.measure()) * scale

    def bounds(self):
        if not self.pieces:
            return None
        return self.pieces[0][0], self.pieces[-1][1]

    def contains_point(self, x) -> bool:
        x = _frac(x)
        return any(lo <= x < hi for lo, hi in self.pieces)

    # -- boolean algebra ----------------------------------------------------

    def _check_unit(self, other: "IntervalUnion"):
        if self.unit != other.unit:
            raise InvalidInputError(
                f"unit mismatch: {self.unit!r} vs {other.unit!r}"
            )

    def union(self, other: "IntervalUnion") -> "IntervalUnion":
        self._check_unit(other)
        return IntervalUnion.from_pairs(self.pieces + other.pieces, self.unit)

    def intersect(self, other: "IntervalUnion") -> "IntervalUnion":
        self._check_unit(other)
        out = []
        for alo, ahi in self.pieces:
            for blo, bhi in other.pieces:
                lo, hi = max(alo, blo), min(ahi, bhi)
                if lo < hi:
                    out.append((lo, hi))
        return IntervalUnion(tuple(out), self.unit)

    def subtract(self, other: "IntervalUnion") -> "IntervalUnion":
        self._check_unit(other)
        pieces = list(self.pieces)
        for blo, bhi in other.pieces:
            nxt = []
            for lo, hi in pieces:
                if bhi <= lo or hi <= blo:
                    nxt.append((lo, hi))
                    continue
                if lo < blo:
                    nxt.append((lo, min(hi, blo)))
                if bhi < hi:
                    nxt.append((max(lo, bhi), hi))
            pieces = nxt
        return IntervalUnion(tuple(pieces), self.unit)

    # -- rigid motions ------------------------------------------------------

    def translate(self, t) -> "IntervalUnion":
        t = _frac(t)
        return IntervalUnion(tuple((lo + t, hi + t) for lo, hi in self.pieces), self.unit)

    def scale(self, c) -> "IntervalUnion":
        c = _frac(c)
        if c == 0:
            raise InvalidInputError("scale factor must be nonzero")
        if c > 0:
            return IntervalUnion(tuple((lo * c, hi * c) for lo, hi in self.pieces), self.unit)
        return IntervalUnion(tuple((hi * c, lo * c) for lo, hi in self.pieces), self.unit)

    def reflect(self, center=0) -> "IntervalUnion":
        c = _frac(center)
        return IntervalUnion(
            tuple((2 * c - hi, 2 * c - lo) for lo, hi in self.pieces), self.unit
        )

    def apply_affine(self, a, b) -> "IntervalUnion":
        """Image under x -> a x + b with rational a != 0, b."""
        return self.scale(a).translate(b)

    # -- serialization ------------------------------------------------------

    def to_json(self) -> str:
        doc = {
            "space": 1,
            "units": self.unit,
            "intervals": [[str(lo), str(hi)] for lo, hi in self.pieces],
        }
        return json.dumps(doc, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "IntervalUnion":
        doc = json.loads(text)
        if doc.get("space") != 1:
            raise InvalidGeometryError("expected a 1D set description")
        unit = doc.get("units", UNIT_PI)
        return IntervalUnion(
            tuple((Fraction(a), Fraction(b)) for a, b in doc["intervals"]), unit
        )

    def __repr__(self):
        body = " u ".join(f"[{lo},{hi})" for lo, hi in self.pieces)
        tag = "pi" if self.unit == UNIT_PI else ""
        return f"IntervalUnion({body or 'empty'} {tag})".rstrip()


def _merge_overlapping(items):
    items = sorted((p for p in items if p[0] < p[1]), key=lambda p: (p[0], p[1]))
    out = []
    for lo, hi in items:
        if out and lo <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return tuple(out)

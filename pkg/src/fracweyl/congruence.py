"""Congruence and fundamental-domain calculus for measurable sets.

1D verdicts are exact: interval endpoints are rationals in the set's
declared unit, lattice translation adds a rational period, dyadic
dilation multiplies by two, and the infinite dihedral (rank-1 affine
Weyl) action is x -> +-x + k * lattice.  2D verdicts (polygon unions) are
tolerance-based and carry explicit cutoffs, with a third "inconclusive"
state when a window is exhausted.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InvalidInputError
from .intervals import UNIT_ONE, UNIT_PI, IntervalUnion, _frac

# ---------------------------------------------------------------------------
# group actions


@dataclass(frozen=True)
class LatticeTranslation:
    """x -> x + k * period, k integer (period in set units)."""

    period: Fraction = Fraction(2)

    def __post_init__(self):
        object.__setattr__(self, "period", _frac(self.period))


@dataclass(frozen=True)
class DyadicDilation:
    """x -> base^n x; the exponent window bounds exact reduction near 0."""

    base: int = 2
    window: int = 64


@dataclass(frozen=True)
class DihedralAction1D:
    """Infinite dihedral group x -> +-x + k * lattice (rank-1 affine Weyl
    group with reflection centers at multiples of lattice/2)."""

    lattice: Fraction = Fraction(2)

    def __post_init__(self):
        object.__setattr__(self, "lattice", _frac(self.lattice))

    def elements(self, cutoff: int):
        """(sign, shift) pairs ordered by |shift| then shift then sign."""
        out = []
        for k in range(-cutoff, cutoff + 1):
            t = k * self.lattice
            out.append((1, t))
            out.append((-1, t))
        out.sort(key=lambda st: (abs(st[1]), st[1] < 0, st[0] != 1))
        return out


@dataclass(frozen=True)
class AffineDilation1D:
    """x -> a (x - theta) + theta with rational expansive a."""

    a: Fraction
    theta: Fraction
    window: int = 64

    def __post_init__(self):
        object.__setattr__(self, "a", _frac(self.a))
        object.__setattr__(self, "theta", _frac(self.theta))
        if abs(self.a) <= 1:
            raise InvalidInputError("dilation factor must be expansive (|a| > 1)")


def dihedral_from_weyl(weyl) -> DihedralAction1D:
    """Exact dihedral description of a rank-1 affine Weyl action."""
    if weyl.dim != 1:
        raise InvalidInputError("only rank-1 actions reduce to a dihedral group")
    verts = sorted(float(v[0]) for v in weyl.alcove.vertices)
    length = Fraction(verts[1]) - Fraction(verts[0])
    return DihedralAction1D(2 * length)


# ---------------------------------------------------------------------------
# witnesses


@dataclass(frozen=True)
class CongruenceWitness:
    status: str  # "congruent" | "not-congruent" | "inconclusive"
    defect: Fraction | float
    matched: tuple  # (source (lo,hi), target (lo,hi), label)
    notes: str = ""

    @property
    def congruent(self) -> bool:
        return self.status == "congruent"

    def defect_float(self) -> float:
        return float(self.defect)


# ---------------------------------------------------------------------------
# exact reductions


def reduce_mod(e: IntervalUnion, period: Fraction):
    """Split e into pieces of [0, period) with integer shift labels.

    Returns (lo, hi, k) triples: the original piece is [lo,hi) + k*period.
    """
    period = _frac(period)
    out = []
    for lo, hi in e.pieces:
        k = lo // period
        cur = lo
        while cur < hi:
            edge = (k + 1) * period
            top = min(hi, edge)
            out.append((cur - k * period, top - k * period, int(k)))
            cur = top
            k += 1
    return out


def _pow2(n: int) -> Fraction:
    return Fraction(2**n) if n >= 0 else Fraction(1, 2 ** (-n))


def _floor_log2(x: Fraction) -> int:
    n = x.numerator.bit_length() - x.denominator.bit_length()
    while _pow2(n) > x:
        n -= 1
    while _pow2(n + 1) <= x:
        n += 1
    return n


def dyadic_reduce(e: IntervalUnion, window: int = 64):
    """Reduce to the canonical dyadic domain [1,2) u [-2,-1).

    Returns (pieces, residue) where pieces are (lo, hi, n) with
    [lo,hi) in the canonical domain and the original piece equal to
    2^n * [lo,hi); residue is the unreduced measure within
    (-2^-window, 2^-window) around the origin.
    """
    cutoff = _pow2(-window)
    pieces = []
    residue = Fraction(0)

    def reduce_positive(lo: Fraction, hi: Fraction, sign: int):
        nonlocal residue
        if lo < cutoff:
            residue += min(hi, cutoff) - lo
            lo = cutoff
            if lo >= hi:
                return
        n = _floor_log2(lo)
        cur = lo
        while cur < hi:
            top = min(hi, _pow2(n + 1))
            a, b = cur / _pow2(n), top / _pow2(n)
            if sign > 0:
                pieces.append((a, b, n))
            else:
                pieces.append((-b, -a, n))
            cur = top
            n += 1

    for lo, hi in e.pieces:
        if hi <= 0:
            reduce_positive(-hi, -lo, -1)
        elif lo >= 0:
            reduce_positive(lo, hi, +1)
        else:
            reduce_positive(Fraction(0), -lo, -1)
            reduce_positive(Fraction(0), hi, +1)
    return pieces, residue


def _segment_counts(reduced_a, reduced_b):
    """Elementary segmentation of two reductions over a shared domain.

    Yields (lo, hi, labels_a, labels_b) with labels sorted.
    """
    points = sorted(
        {p for lo, hi, _ in reduced_a for p in (lo, hi)}
        | {p for lo, hi, _ in reduced_b for p in (lo, hi)}
    )
    for u, v in zip(points[:-1], points[1:]):
        if u >= v:
            continue
        la = sorted(n for lo, hi, n in reduced_a if lo <= u and v <= hi)
        lb = sorted(n for lo, hi, n in reduced_b if lo <= u and v <= hi)
        if la or lb:
            yield u, v, la, lb


def translation_congruent(
    e: IntervalUnion, f: IntervalUnion, period=Fraction(2)
) -> CongruenceWitness:
    """Exact 2pi-translation congruence (period in set units)."""
    e._check_unit(f)
    period = _frac(period)
    red_e = reduce_mod(e, period)
    red_f = reduce_mod(f, period)
    matched = []
    defect = Fraction(0)
    for u, v, la, lb in _segment_counts(red_e, red_f):
        m = min(len(la), len(lb))
        defect += (v - u) * abs(len(la) - len(lb))
        for ke, kf in zip(la[:m], lb[:m]):
            src = (u + ke * period, v + ke * period)
            dst = (u + kf * period, v + kf * period)
            matched.append((src, dst, kf - ke))
    status = "congruent" if defect == 0 else "not-congruent"
    return CongruenceWitness(status, defect, tuple(matched))


def dilation_congruent(
    g: IntervalUnion, h: IntervalUnion, base: int = 2, window: int = 64
) -> CongruenceWitness:
    """Exact dyadic dilation congruence modulo ``base`` (= 2)."""
    g._check_unit(h)
    if base != 2:
        raise InvalidInputError("only base-2 dilation congruence is implemented")
    red_g, res_g = dyadic_reduce(g, window)
    red_h, res_h = dyadic_reduce(h, window)
    matched = []
    defect = Fraction(0)
    for u, v, la, lb in _segment_counts(red_g, red_h):
        m = min(len(la), len(lb))
        defect += (v - u) * abs(len(la) - len(lb))
        for ng, nh in zip(la[:m], lb[:m]):
            p2g, p2h = _pow2(ng), _pow2(nh)
            matched.append(((u * p2g, v * p2g), (u * p2h, v * p2h), nh - ng))
    residue = res_g + res_h
    if residue > 0:
        # unreduced origin mass could repair at most its own measure
        status = "not-congruent" if defect > residue else "inconclusive"
        return CongruenceWitness(
            status,
            defect + residue,
            tuple(matched),
            f"unreduced measure {residue} within 2^-{window} of the origin",
        )
    status = "congruent" if defect == 0 else "not-congruent"
    return CongruenceWitness(status, defect, tuple(matched))


# ---------------------------------------------------------------------------
# fundamental domains


@dataclass(frozen=True)
class FundamentalDomainReport:
    status: str  # "fundamental-domain" | "not-fundamental-domain" | "inconclusive"
    overlap: Fraction | float
    uncovered: Fraction | float
    notes: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "fundamental-domain"

    def defect(self):
        return self.overlap + self.uncovered


def is_fundamental_domain(
    e, action, region=None, cutoff: int = 16
) -> FundamentalDomainReport:
    """Does the action orbit of e tile the space (modulo null sets)?

    Lattice and dyadic actions on interval unions are decided exactly on
    all of R (resp. R minus the origin); dihedral/Weyl actions are checked
    within a bounded region up to the element cutoff.
    """
    if isinstance(e, IntervalUnion):
        if isinstance(action, LatticeTranslation):
            red = reduce_mod(e, action.period)
            over = Fraction(0)
            covered = Fraction(0)
            for u, v, la, _ in _segment_counts(red, []):
                covered += v - u
                over += (v - u) * (len(la) - 1)
            uncovered = action.period - covered
            status = "fundamental-domain" if over == 0 and uncovered == 0 else "not-fundamental-domain"
            return FundamentalDomainReport(status, over, uncovered)
        if isinstance(action, DyadicDilation):
            red, residue = dyadic_reduce(e, action.window)
            over = Fraction(0)
            covered = Fraction(0)
            for u, v, la, _ in _segment_counts(red, []):
                covered += v - u
                over += (v - u) * (len(la) - 1)
            uncovered = Fraction(2) - covered  # |[1,2)| + |[-2,-1)| = 2
            if residue > 0:
                # leftover origin mass must land somewhere in the canonical
                # domain: it can only repair uncovered gaps at least as large
                if over > 0 or uncovered < residue:
                    status = "not-fundamental-domain"
                else:
                    status = "inconclusive"
                return FundamentalDomainReport(
                    status, over, uncovered, f"residue {residue} at the origin"
                )
            status = "fundamental-domain" if over == 0 and uncovered == 0 else "not-fundamental-domain"
            return FundamentalDomainReport(status, over, uncovered)
        if isinstance(action, DihedralAction1D) or hasattr(action, "alcove"):
            dihedral = action if isinstance(action, DihedralAction1D) else dihedral_from_weyl(action)
            if region is None:
                raise InvalidInputError("dihedral tiling checks need a bounded region")
            reg = _region_interval(region, e.unit)
            over = Fraction(0)
            covered = IntervalUnion.empty(e.unit)
            for s, t in dihedral.elements(cutoff):
                img = e.apply_affine(s, t).intersect(reg)
                over += covered.intersect(img).measure()
                covered = covered.union(img)
            uncovered = reg.measure() - covered.measure()
            status = "fundamental-domain" if over == 0 and uncovered == 0 else "not-fundamental-domain"
            return FundamentalDomainReport(status, over, uncovered)
        raise InvalidInputError(f"unsupported action {action!r} for interval unions")
    # polygon unions
    from . import regions

    return regions.is_fundamental_domain_2d(e, action, region, cutoff)


def _region_interval(region, unit) -> IntervalUnion:
    if isinstance(region, IntervalUnion):
        return region
    lo, hi = region
    return IntervalUnion(((_frac(lo), _frac(hi)),), unit)


# ---------------------------------------------------------------------------
# generic G-congruence


def _action_elements(action, cutoff: int, unit: str):
    """(label, (a, b)) pairs for exact 1D affine elements x -> a x + b,
    ordered smallest label first."""
    if isinstance(action, LatticeTranslation):
        ks = sorted(range(-cutoff, cutoff + 1), key=lambda k: (abs(k), k < 0))
        return [(k, (Fraction(1), k * action.period)) for k in ks]
    if isinstance(action, DyadicDilation):
        ns = sorted(range(-cutoff, cutoff + 1), key=lambda n: (abs(n), n < 0))
        return [(n, (_pow2(n), Fraction(0))) for n in ns]
    if isinstance(action, DihedralAction1D):
        return [((s, t), (Fraction(s), t)) for s, t in action.elements(cutoff)]
    if isinstance(action, AffineDilation1D):
        ns = sorted(range(-cutoff, cutoff + 1), key=lambda n: (abs(n), n < 0))
        out = []
        for n in ns:
            a = action.a**n
            b = action.theta * (1 - a)
            out.append((n, (a, b)))
        return out
    if hasattr(action, "alcove"):
        return _action_elements(dihedral_from_weyl(action), cutoff, unit)
    raise InvalidInputError(f"unsupported action {action!r}")


def g_congruent(e, f, action, cutoff: int = 16, max_rounds: int = 10_000) -> CongruenceWitness:
    """Greedy exact matching of e onto f by group elements.

    Largest remaining piece first, smallest group-element label first;
    matched sub-pieces are carved out of both sides.
    """
    if not isinstance(e, IntervalUnion):
        from . import regions

        return regions.g_congruent_2d(e, f, action, cutoff)
    e._check_unit(f)
    elements = _action_elements(action, cutoff, e.unit)
    remaining_e = e
    remaining_f = f
    matched = []
    dead = IntervalUnion.empty(e.unit)
    for _ in range(max_rounds):
        live = remaining_e.subtract(dead)
        if live.is_empty():
            break
        piece = max(live.pieces, key=lambda p: (p[1] - p[0], -p[0]))
        chunk = IntervalUnion((piece,), e.unit)
        hit = None
        for label, (a, b) in elements:
            img = chunk.apply_affine(a, b).intersect(remaining_f)
            if not img.is_empty():
                # carve the matched sub-piece out of both sides
                back = img.apply_affine(Fraction(1) / a, -b / a)
                matched.append((back.pieces, img.pieces, label))
                remaining_e = remaining_e.subtract(back)
                remaining_f = remaining_f.subtract(img)
                hit = True
                break
        if not hit:
            dead = dead.union(chunk)
    defect = remaining_e.measure() + remaining_f.measure()
    if defect == 0:
        status = "congruent"
    elif e.measure() != f.measure():
        status = "not-congruent"
    else:
        status = "inconclusive"
    flat = tuple(
        (src, dst, label)
        for srcs, dsts, label in matched
        for src, dst in zip(srcs, dsts)
    )
    return CongruenceWitness(status, defect, flat)


# ---------------------------------------------------------------------------
# exponential Gram (Lemma-9 style basis check)


def exponential_gram(e: IntervalUnion, kmax: int = 8):
    """Gram matrix of the normalized exponentials e^{iks}/sqrt(2pi),
    k = -kmax..kmax, restricted to e; entries are evaluated in closed form
    per interval.  Returns (matrix, max deviation from identity).
    """
    if e.unit != UNIT_PI:
        raise InvalidInputError("exponential integrals need pi-unit endpoints")
    ms = range(-2 * kmax, 2 * kmax + 1)
    c = {}
    for m in ms:
        total = 0j
        for lo, hi in e.pieces:
            a = float(lo) * math.pi
            b = float(hi) * math.pi
            if m == 0:
                total += b - a
            else:
                total += (cmath.exp(1j * m * b) - cmath.exp(1j * m * a)) / (1j * m)
        c[m] = total / (2.0 * math.pi)
    size = 2 * kmax + 1
    gram = np.empty((size, size), dtype=complex)
    for i, k in enumerate(range(-kmax, kmax + 1)):
        for j, l in enumerate(range(-kmax, kmax + 1)):
            gram[i, j] = c[k - l]
    deviation = float(np.max(np.abs(gram - np.eye(size))))
    return gram, deviation

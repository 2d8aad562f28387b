"""Wavelet sets: exact 1D verification, epsilon-approximate exchange
constructions, planar (D_A, T) checks, and dilation-reflection wavelet
sets over affine Weyl groups.

The constructions maintain one congruence invariantly (translation to
[0,2pi), or Weyl congruence to the alcove) and move offending rational
subpieces by group elements until the other orbit defect drops below the
requested epsilon; every output is re-verified independently.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .congruence import (
    AffineDilation1D,
    CongruenceWitness,
    DihedralAction1D,
    DyadicDilation,
    FundamentalDomainReport,
    LatticeTranslation,
    _pow2,
    dihedral_from_weyl,
    dilation_congruent,
    dyadic_reduce,
    g_congruent,
    is_fundamental_domain,
    translation_congruent,
)
from .errors import (
    ConstructionStalledError,
    InvalidInputError,
)
from .intervals import UNIT_ONE, UNIT_PI, IntervalUnion, _frac

TWO = Fraction(2)


# ---------------------------------------------------------------------------
# Shannon artifacts


def shannon_set() -> IntervalUnion:
    """E_S = [-2pi, -pi) u [pi, 2pi), in pi units."""
    return IntervalUnion(((-2, -1), (1, 2)), UNIT_PI)


def sinc(t: float) -> float:
    """Normalized sinc, sin(pi t)/(pi t) with sinc(0) = 1."""
    if t == 0.0:
        return 1.0
    return math.sin(math.pi * t) / (math.pi * t)


def shannon_psi(t: float) -> float:
    """Pointwise Shannon wavelet 2 sinc(2t - 1) - sinc(t)."""
    return 2.0 * sinc(2.0 * t - 1.0) - sinc(t)


def journe_set() -> IntervalUnion:
    """Journe-type wavelet set
    [-32pi/7, -4pi) u [-pi, -4pi/7) u [4pi/7, pi) u [4pi, 32pi/7)."""
    return IntervalUnion(
        (
            (Fraction(-32, 7), -4),
            (-1, Fraction(-4, 7)),
            (Fraction(4, 7), 1),
            (4, Fraction(32, 7)),
        ),
        UNIT_PI,
    )


def base_period_set() -> IntervalUnion:
    return IntervalUnion(((0, 2),), UNIT_PI)


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class WaveletSetReport:
    translation_check: object
    dilation_check: object
    verdict: str  # "pass" | "fail" | "inconclusive"
    translation_defect: float
    dilation_defect: float
    cutoffs: dict
    notes: str = ""

    @property
    def ok(self) -> bool:
        return self.verdict == "pass"

    def to_json(self) -> str:
        def summary(check):
            if isinstance(check, CongruenceWitness):
                return {"status": check.status, "pieces": len(check.matched)}
            if isinstance(check, FundamentalDomainReport):
                return {
                    "status": check.status,
                    "overlap": float(check.overlap),
                    "uncovered": float(check.uncovered),
                }
            return {"status": str(check)}

        doc = {
            "verdict": self.verdict,
            "translation_defect": self.translation_defect,
            "dilation_defect": self.dilation_defect,
            "cutoffs": self.cutoffs,
            "witness_summary": {
                "translation": summary(self.translation_check),
                "dilation": summary(self.dilation_check),
            },
        }
        if self.notes:
            doc["notes"] = self.notes
        return json.dumps(doc, indent=2, sort_keys=True)


def _combine_verdict(*statuses) -> str:
    if any(s == "inconclusive" for s in statuses):
        return "inconclusive"
    ok = {"congruent", "fundamental-domain"}
    return "pass" if all(s in ok for s in statuses) else "fail"


# ---------------------------------------------------------------------------
# 1D verification


def verify_1d(e: IntervalUnion, window: int = 64) -> WaveletSetReport:
    """Exact 1D wavelet-set test: translation congruent to [0,2pi) and
    dilation congruent to the Shannon set."""
    if e.unit != UNIT_PI:
        raise InvalidInputError("1D wavelet sets use pi-unit interval sets")
    t = translation_congruent(e, base_period_set(), TWO)
    d = dilation_congruent(e, shannon_set(), 2, window)
    verdict = _combine_verdict(t.status, d.status)
    return WaveletSetReport(
        t,
        d,
        verdict,
        t.defect_float() * math.pi,
        d.defect_float() * math.pi,
        {"dyadic_window": window},
    )


def generator_checks_1d(e: IntervalUnion, window: int = 64):
    """Theorem-10(i)-style checks: e generates a 2pi-translation partition
    and a 2-dilation partition of the line."""
    t = is_fundamental_domain(e, LatticeTranslation(TWO))
    d = is_fundamental_domain(e, DyadicDilation(2, window))
    return t, d


# ---------------------------------------------------------------------------
# exchange construction (shared 1D engine)


@dataclass(frozen=True)
class ExchangeResult:
    result: IntervalUnion
    defect: Fraction
    rounds: int
    moves: int
    history: tuple  # per-round defects


def _canonical_profile(e: IntervalUnion, window: int):
    """Dyadic profile over [1,2) u [-2,-1): per elementary segment the
    covering exponents; plus redundant original subpieces, uncovered
    gaps, single-cover pieces tagged by exponent, and the near-origin
    residue set."""
    red, _ = dyadic_reduce(e, window)
    points_pos = {Fraction(1), Fraction(2)}
    points_neg = {Fraction(-2), Fraction(-1)}
    for lo, hi, _n in red:
        (points_pos if lo >= 0 else points_neg).update((lo, hi))

    redundant = []
    singles = []
    uncovered = []
    overlap = Fraction(0)
    uncovered_len = Fraction(0)

    for points, dom_lo, dom_hi in (
        (sorted(points_pos), Fraction(1), Fraction(2)),
        (sorted(points_neg), Fraction(-2), Fraction(-1)),
    ):
        for u, v in zip(points[:-1], points[1:]):
            if u < dom_lo or v > dom_hi or u >= v:
                continue
            covers = sorted(
                (abs(n), n) for lo, hi, n in red if lo <= u and v <= hi
            )
            if not covers:
                uncovered.append((u, v))
                uncovered_len += v - u
                continue
            overlap += (v - u) * (len(covers) - 1)
            for _, n in covers[1:]:
                p2 = _pow2(n)
                redundant.append((u * p2, v * p2))
            n0 = covers[0][1]
            p2 = _pow2(n0)
            singles.append((u * p2, v * p2, n0))

    cutoff = _pow2(-window)
    residue_set = e.intersect(IntervalUnion(((-cutoff, cutoff),), e.unit))
    movable = IntervalUnion.from_pairs(redundant, e.unit).union(residue_set)
    defect = overlap + uncovered_len + residue_set.measure()
    return movable, uncovered, defect, singles


def _place_piece(e, piece, window_iv, shifts):
    """First group element (s, t) placing a prefix of ``piece`` inside
    window minus e; returns (moved_src, moved_dst, element) or None.

    Each shift family is (s, lattice, offset): maps y -> s y + t with
    t in offset + lattice Z.
    """
    lo, hi = piece
    free = window_iv.subtract(e)
    for a, b in free.pieces:
        if b - a <= 0:
            continue
        for s, lattice, offset in shifts:
            # smallest admissible t putting the image start at or past a
            anchor = (a - lo) if s == 1 else (a + hi)
            t = offset + math.ceil((anchor - offset) / lattice) * lattice
            start = lo + t if s == 1 else t - hi
            end = hi + t if s == 1 else t - lo
            if start < a or start >= b:
                continue
            avail = min(end, b) - start
            if avail <= 0:
                continue
            src = (lo, lo + avail) if s == 1 else (hi - avail, hi)
            dst = (start, start + avail)
            return src, dst, (s, t)
    return None


def _exchange_rounds(
    e0: IntervalUnion,
    epsilon: Fraction,
    shifts,
    window: int = 64,
    round_cap: int = 400,
    max_scale: int = 48,
):
    """Greedy exchange: move redundant/residual mass into uncovered
    dyadic windows (or far out when nothing is uncovered)."""
    e = e0
    history = []
    moves = 0
    defect = _canonical_profile(e, window)[2]
    for round_no in range(round_cap):
        if defect < epsilon:
            return ExchangeResult(e, defect, round_no, moves, tuple(history))
        defect_at_start = defect
        progressed = False
        for _ in range(200):
            movable, uncovered, defect, singles = _canonical_profile(e, window)
            if defect < epsilon:
                break
            gaps = sorted(uncovered, key=lambda g: (g[0] - g[1], g[0]))
            placed = None
            if not movable.is_empty():
                piece = max(movable.pieces, key=lambda p: (p[1] - p[0], -p[0]))
                if gaps:
                    # redundant mass fills uncovered windows: pure gain at
                    # any scale
                    for gap in gaps:
                        for scale in range(0, max_scale):
                            p2 = _pow2(scale)
                            window_iv = IntervalUnion(
                                ((gap[0] * p2, gap[1] * p2),), e.unit
                            )
                            placed = _place_piece(e, piece, window_iv, shifts)
                            if placed:
                                break
                        if placed:
                            break
                else:
                    # nothing uncovered: push the piece far out, where its
                    # canonical footprint shrinks below what it vacates
                    top = max(max(abs(lo_), abs(hi_)) for lo_, hi_ in e.pieces)
                    start_scale = max(
                        2, top.numerator.bit_length() - top.denominator.bit_length() + 2
                    )
                    for scale in range(start_scale, start_scale + max_scale):
                        p2 = _pow2(scale)
                        window_iv = IntervalUnion(((p2, 2 * p2),), e.unit)
                        placed = _place_piece(e, piece, window_iv, shifts)
                        if placed:
                            break
            if not placed and gaps:
                # no redundant mass: relocate single-cover pieces from a
                # high exponent n to a window scale ell < n; the vacated
                # footprint L 2^-n is smaller than the gain L 2^-ell
                for _pl, _ph, n in sorted(singles, key=lambda s: -s[2]):
                    if n <= -8:
                        continue
                    cand = (_pl, _ph)
                    for gap in gaps:
                        for scale in range(-8, n):
                            p2 = _pow2(scale)
                            window_iv = IntervalUnion(
                                ((gap[0] * p2, gap[1] * p2),), e.unit
                            )
                            placed = _place_piece(e, cand, window_iv, shifts)
                            if placed:
                                break
                        if placed:
                            break
                    if placed:
                        break
            if not placed:
                break
            src, dst, _elt = placed
            e = e.subtract(IntervalUnion((src,), e.unit)).union(
                IntervalUnion((dst,), e.unit)
            )
            moves += 1
            progressed = True
            defect = _canonical_profile(e, window)[2]
            if defect < defect_at_start:
                break
        history.append(defect)
        if not progressed or not defect < defect_at_start:
            raise ConstructionStalledError(
                f"exchange made no progress in round {round_no}", float(defect)
            )
    raise ConstructionStalledError(
        f"defect {float(defect)} after {round_cap} rounds", float(defect)
    )


def construct_1d(
    epsilon: float, seed: IntervalUnion = None, window: int = 64, round_cap: int = 400
) -> ExchangeResult:
    """Exchange iteration from a seed that is translation congruent to
    [0,2pi): 2pi-translations of dyadic-rational subpieces drive the
    dilation defect below epsilon * 2pi while translation congruence is
    maintained exactly (asserted every round)."""
    if seed is None:
        seed = base_period_set()
    if seed.unit != UNIT_PI:
        raise InvalidInputError("construct_1d works on pi-unit sets")
    check = translation_congruent(seed, base_period_set(), TWO)
    if not check.congruent:
        raise InvalidInputError("seed must be translation congruent to [0,2pi)")

    eps = _frac(epsilon) * TWO  # epsilon * 2pi, in pi units
    shifts = ((1, TWO, Fraction(0)),)  # pure 2pi translations

    result = _exchange_rounds(seed, eps, shifts, window, round_cap)
    final_check = translation_congruent(result.result, base_period_set(), TWO)
    if not final_check.congruent:
        raise ConstructionStalledError(
            "translation congruence lost during exchange", float(result.defect)
        )
    return result


# ---------------------------------------------------------------------------
# nD verification


@dataclass(frozen=True, eq=False)
class ExpansiveMatrix:
    entries: np.ndarray
    certified: bool = False

    def __post_init__(self):
        m = np.atleast_2d(np.asarray(self.entries, dtype=float))
        if m.shape[0] != m.shape[1]:
            raise InvalidInputError("dilation matrix must be square")
        if abs(np.linalg.det(m)) < 1e-12:
            raise InvalidInputError("dilation matrix must be invertible")
        object.__setattr__(self, "entries", m)
        eigs = np.abs(np.linalg.eigvals(m))
        object.__setattr__(self, "certified", bool(np.all(eigs > 1.0 + 1e-9)))

    def require_expansive(self):
        if not self.certified:
            raise InvalidInputError("matrix is not certified expansive")


@dataclass(frozen=True)
class NdCutoffs:
    dilation_window: int = 10
    region_radius: float = 10.0
    lattice_cutoff: int = 6

    def as_dict(self):
        return {
            "dilation_window": self.dilation_window,
            "region_radius": self.region_radius,
            "lattice_cutoff": self.lattice_cutoff,
        }


def verify_nd(e, a: ExpansiveMatrix, cutoffs: NdCutoffs = NdCutoffs()) -> WaveletSetReport:
    """Planar wavelet-set check: 2pi-translation congruence to the cube
    [-pi,pi)^2 and A-dilation partition generation over a window/region."""
    from .regions import PolyUnion, ball_polygon, square_cell, translation_congruent_2d, dilation_generator_2d

    a.require_expansive()
    if not isinstance(e, PolyUnion):
        raise InvalidInputError("verify_nd expects a polygon union")
    cube = square_cell(math.pi)
    t = translation_congruent_2d(e, cube, 2 * math.pi)
    region = ball_polygon((0.0, 0.0), cutoffs.region_radius)
    d = dilation_generator_2d(e, a.entries, cutoffs.dilation_window, region)
    verdict = _combine_verdict(t.status, d.status)
    return WaveletSetReport(
        t,
        d,
        verdict,
        float(t.defect),
        float(d.overlap + d.uncovered),
        cutoffs.as_dict(),
        notes=d.notes,
    )


def annulus_set(a: ExpansiveMatrix, segs: int = 128):
    """F_A = A(B) minus B for the unit ball B, split into simple polygons."""
    from .regions import ball_polygon

    b = ball_polygon((0.0, 0.0), 1.0, segs=segs)
    return b.linear(a.entries).subtract(b)


# ---------------------------------------------------------------------------
# abstract dilation-translation pair search


@dataclass(frozen=True)
class PairWitness:
    ell: int
    element: object  # lattice vector or Weyl word letters
    shrink_ell: int


def check_pair(
    dilation: ExpansiveMatrix,
    translation,
    e,
    f,
    max_ell: int = 40,
    lattice_cutoff: int = 200,
) -> PairWitness:
    """Constructive search for the dilation-translation pair property:
    find ell and a translation-group element w with w(e) inside A^ell(f),
    plus the shrinking exponent pushing e into the unit neighborhood.

    ``translation`` is a lattice period (classical mode, 1D exact) or an
    affine Weyl action (reflection mode).
    """
    if isinstance(e, IntervalUnion):
        return _check_pair_1d(dilation, translation, e, f, max_ell, lattice_cutoff)
    return _check_pair_2d(dilation, translation, e, f, max_ell, lattice_cutoff)


def _check_pair_1d(dilation, translation, e, f, max_ell, cutoff):
    a = Fraction(int(round(float(np.atleast_2d(dilation.entries)[0, 0]))))
    e_lo, e_hi = e.bounds()
    shrink = 0
    while a**shrink < max(abs(e_lo), abs(e_hi)):
        shrink += 1
    if isinstance(translation, (DihedralAction1D,)) or hasattr(translation, "alcove"):
        dihedral = (
            translation
            if isinstance(translation, DihedralAction1D)
            else dihedral_from_weyl(translation)
        )
        elements = dihedral.elements(cutoff)
    else:
        period = _frac(translation)
        elements = [(1, k * period) for k in sorted(range(-cutoff, cutoff + 1), key=abs)]
    for ell in range(max_ell):
        big = f.scale(a**ell)
        for s, t in elements:
            img = e.apply_affine(s, t)
            if img.subtract(big).is_empty():
                return PairWitness(ell, (s, t), shrink)
    raise ConstructionStalledError("no embedding found within the search caps", None)


def _check_pair_2d(dilation, translation, e, f, max_ell, cutoff):
    sigma_min = float(np.min(np.abs(np.linalg.eigvals(dilation.entries))))
    minx, miny, maxx, maxy = e.bounds()
    r_e = max(abs(minx), abs(maxx), abs(miny), abs(maxy)) * math.sqrt(2.0)
    shrink = max(0, math.ceil(math.log(max(r_e, 1e-9)) / math.log(sigma_min)) + 1)
    if hasattr(translation, "alcove"):
        elements = [
            (w.letters, (w.map.matrix, w.map.offset))
            for w in translation.words_up_to(cutoff)
        ]
    else:
        period = float(translation)
        rng = sorted(range(-cutoff, cutoff + 1), key=abs)
        elements = [
            ((k, l), (np.eye(2), np.array([k * period, l * period])))
            for k in rng
            for l in rng
        ]
    for ell in range(max_ell):
        big = f.linear(np.linalg.matrix_power(dilation.entries, ell))
        for label, (mat, off) in elements:
            img = e.affine(mat, off)
            if img.subtract(big).area() <= 1e-12:
                return PairWitness(ell, label, shrink)
    raise ConstructionStalledError("no embedding found within the search caps", None)


# ---------------------------------------------------------------------------
# dilation-reflection wavelet sets


@dataclass(frozen=True, eq=False)
class DilationReflectionSpec:
    """Affine Weyl action, its alcove, an interior point theta, and an
    expansive dilation D(x) = A(x - theta) + theta."""

    weyl: object
    theta: object  # Fraction (1D) or vector
    a: object  # Fraction (1D) or ExpansiveMatrix

    def __post_init__(self):
        alcove = self.weyl.alcove
        theta = self.theta
        if self.weyl.dim == 1:
            theta_f = _frac(theta)
            lo = min(float(v[0]) for v in alcove.vertices)
            hi = max(float(v[0]) for v in alcove.vertices)
            if not (lo + 1e-9 < float(theta_f) < hi - 1e-9):
                raise InvalidInputError("theta must be strictly interior to the alcove")
            object.__setattr__(self, "theta", theta_f)
            a_f = _frac(self.a)
            if abs(a_f) <= 1:
                raise InvalidInputError("dilation factor must be expansive")
            object.__setattr__(self, "a", a_f)
        else:
            theta_vec = np.asarray(theta, dtype=float)
            v = alcove.violations(theta_vec)
            if np.max(v) > -1e-9:
                raise InvalidInputError("theta must be strictly interior to the alcove")
            object.__setattr__(self, "theta", theta_vec)
            if not isinstance(self.a, ExpansiveMatrix):
                object.__setattr__(self, "a", ExpansiveMatrix(self.a))
            self.a.require_expansive()

    @staticmethod
    def with_barycenter(weyl, a) -> "DilationReflectionSpec":
        verts = weyl.alcove.vertices
        if weyl.dim == 1:
            center = Fraction(float(np.mean(verts)))
            return DilationReflectionSpec(weyl, center, a)
        return DilationReflectionSpec(weyl, verts.mean(axis=0), a)

    def alcove_set(self):
        if self.weyl.dim != 1:
            from .regions import PolyUnion

            return PolyUnion.from_polygons([self.weyl.alcove.vertices.tolist()])
        verts = sorted(Fraction(float(v[0])) for v in self.weyl.alcove.vertices)
        return IntervalUnion(((verts[0], verts[1]),), UNIT_ONE)

    def cutoff_dict(self, word_cutoff, window, region_radius):
        return {
            "word_cutoff": word_cutoff,
            "dilation_window": window,
            "region_radius": region_radius,
        }


def verify_dilation_reflection(
    e,
    spec: DilationReflectionSpec,
    word_cutoff: int = 12,
    window: int = 12,
    region_radius: float = 20.0,
) -> WaveletSetReport:
    """Condition (1): Weyl-congruence to the alcove; condition (2): the
    affine dilation orbit of e tiles space.  Exact for rank 1 with
    rational data, regional for the plane."""
    alcove = spec.alcove_set()
    if spec.weyl.dim == 1:
        dihedral = dihedral_from_weyl(spec.weyl)
        t = g_congruent(e, alcove, dihedral, cutoff=word_cutoff)
        # conjugate by theta: D becomes pure dilation by a
        shifted = e.translate(-spec.theta)
        d = _dilation_orbit_1d(shifted, spec.a, window)
        verdict = _combine_verdict(t.status, d.status)
        return WaveletSetReport(
            t,
            d,
            verdict,
            float(t.defect),
            float(d.overlap + d.uncovered),
            spec.cutoff_dict(word_cutoff, window, region_radius),
        )
    from .regions import ball_polygon, dilation_generator_2d, g_congruent_2d

    t = g_congruent_2d(e, alcove, spec.weyl, cutoff=word_cutoff)
    region = ball_polygon(spec.theta, region_radius)
    d = dilation_generator_2d(
        e, spec.a.entries, window, region, theta=spec.theta
    )
    verdict = _combine_verdict(t.status, d.status)
    return WaveletSetReport(
        t,
        d,
        verdict,
        float(t.defect),
        float(d.overlap + d.uncovered),
        spec.cutoff_dict(word_cutoff, window, region_radius),
        notes=d.notes,
    )


def _dilation_orbit_1d(e_shifted: IntervalUnion, a: Fraction, window: int) -> FundamentalDomainReport:
    if a != 2:
        raise InvalidInputError("exact 1D dilation orbits are implemented for a = 2")
    return is_fundamental_domain(e_shifted, DyadicDilation(2, window))


@dataclass(frozen=True, eq=False)
class ScaledBasisFunction:
    """Evaluation handle kappa^{-kn/2} b(r^{-1}(kappa^{-k} x)).

    Supported on kappa^k r(dom b); b is a fractal function over the
    kappa-dilated alcove.
    """

    k: int
    word: object  # WeylWord
    b: object  # FractalFunction
    kappa: int

    def support_interval(self):
        dom = self.b.scheme.parent.vertices
        lo, hi = float(dom.min()), float(dom.max())
        m = self.word.map
        a, b0 = float(m.matrix[0, 0]), float(m.offset[0])
        img = sorted((a * lo + b0, a * hi + b0))
        scale = float(self.kappa) ** self.k
        return img[0] * scale, img[1] * scale

    def __call__(self, x) -> float:
        n = self.b.scheme.dim
        x = np.atleast_1d(np.asarray(x, dtype=float))
        scale = float(self.kappa) ** (-self.k)
        y = self.word.map.inverse()(x * scale)
        amp = float(self.kappa) ** (-self.k * n / 2.0)
        try:
            return amp * self.b.evaluate(y)[0]
        except Exception:
            return 0.0


@dataclass(frozen=True)
class BasisFamily:
    handles: tuple
    kappa: int

    def inner_product(self, i: int, j: int, depth: int = 10) -> float:
        """Midpoint quadrature of h_i h_j over the support intersection
        (1D); disjoint supports short-circuit to exactly zero."""
        hi_, hj = self.handles[i], self.handles[j]
        lo1, hi1 = hi_.support_interval()
        lo2, hi2 = hj.support_interval()
        lo, hi = max(lo1, lo2), min(hi1, hi2)
        if hi <= lo:
            return 0.0
        n = 2**depth
        step = (hi - lo) / n
        xs = lo + (np.arange(n) + 0.5) * step
        total = 0.0
        for x in xs:
            total += hi_(x) * hj(x)
        return total * step


def basis_enumerator(
    spec, fractal_basis, ortho_coeffs: np.ndarray, k_range, word_range: int
) -> BasisFamily:
    """Labelled family {D^k (b o r^{-1})} for an orthonormalized fractal
    basis over a kappa-dilated alcove; spec's dilation must be kappa I."""
    weyl = spec.weyl if hasattr(spec, "weyl") else spec
    if weyl.dim != 1:
        raise InvalidInputError("the basis enumerator is implemented for rank 1")
    b0 = fractal_basis[0]
    dom = b0.scheme.parent
    kappa = int(round(dom.diameter() / weyl.alcove.diameter()))
    # orthonormal combinations of the Lagrange basis
    combos = []
    nb = len(fractal_basis)
    for j in range(nb):
        combos.append(_combine_fractal(fractal_basis, ortho_coeffs[:, j]))
    handles = []
    for k in k_range:
        for word in weyl.words_up_to(word_range):
            for fn in combos:
                handles.append(ScaledBasisFunction(k, word, fn, kappa))
    return BasisFamily(tuple(handles), kappa)


def _combine_fractal(basis, coeffs):
    """Linear combination of fractal functions sharing one scheme (the
    fixed point of the combined lambdas, by linearity)."""
    from .fractal import LambdaVector, fix_point

    b0 = basis[0]
    entries = []
    for i in range(len(b0.lambdas)):
        g = sum(c * f.lambdas.entries[i][0] for c, f in zip(coeffs, basis))
        c0 = sum(c * f.lambdas.entries[i][1] for c, f in zip(coeffs, basis))
        entries.append((g, c0))
    lams = LambdaVector(tuple(entries))
    return fix_point(b0.scheme, b0.labelling, lams, b0.scales, grid_depth=b0.grid.depth if b0.grid else 8)


def construct_dilation_reflection(
    spec: DilationReflectionSpec,
    epsilon: float,
    window: int = 12,
    word_cutoff: int = 12,
    round_cap: int = 400,
) -> ExchangeResult:
    """Exchange construction for rank-1 dilation-reflection wavelet sets.

    Starting from the alcove C = [0, L], the first exchange round folds
    the two boundary pieces outward across the alcove walls:

        E = r_0((0, theta]) u r_L((theta, L])
          = [-theta, 0) u [L, 2L - theta)

    The pieces move only by Weyl elements, so E stays exactly
    W-congruent to C, and in y = x - theta coordinates E is
    [-2 theta, -theta) u [L - theta, 2(L - theta)), a dyadic-orbit
    fundamental domain of the punctured line.  Any remaining defect is
    driven below epsilon by the generic exchange rounds (a no-op here,
    where the fold-out is already exact); everything is exact-rational.
    """
    if epsilon <= 0:
        raise InvalidInputError("epsilon must be positive")
    if spec.weyl.dim != 1:
        raise InvalidInputError(
            "the exchange construction is implemented for rank-1 actions"
        )
    if spec.a != 2:
        raise InvalidInputError("the exact-rational construction needs dilation factor 2")
    alcove = spec.alcove_set()
    theta = spec.theta

    seed_report = verify_dilation_reflection(alcove, spec, word_cutoff, window)
    if seed_report.verdict == "pass":
        return ExchangeResult(alcove, Fraction(0), 0, 0, ())

    lo, hi = alcove.bounds()
    # fold-out exchange: (lo, theta] across the wall at lo, (theta, hi]
    # across the wall at hi
    e = IntervalUnion(((2 * lo - theta, lo), (hi, 2 * hi - theta)), alcove.unit)

    # generic exchange rounds finish the job if the fold-out left defect
    e_y = e.translate(-theta)
    _, _, defect = _canonical_profile(e_y, max(window, 24))
    eps = _frac(epsilon)
    rounds, moves = 1, 2
    if not defect < eps:
        lattice = dihedral_from_weyl(spec.weyl).lattice
        y_shifts = (
            (1, lattice, Fraction(0)),
            (-1, lattice, (-2 * theta) % lattice),
        )
        result = _exchange_rounds(
            e_y, eps, y_shifts, window=max(window, 24), round_cap=round_cap
        )
        e = result.result.translate(theta)
        defect = result.defect
        rounds += result.rounds
        moves += result.moves
    return ExchangeResult(e, defect, rounds, moves, (defect,))

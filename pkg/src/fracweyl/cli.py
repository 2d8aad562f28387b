"""Command-line interface.

Exit codes: 0 success/pass, 1 verified negative verdict, 2 invalid
input, 3 inconclusive.  All outputs are deterministic for fixed inputs:
JSON is key-sorted, floats print at fixed precision, and no timestamps
or machine state enter any report.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import fractal, ifs, partition, wavelets, weyl
from .affine import AffineMap
from .errors import FracweylError, InvalidInputError, NotContractiveError
from .intervals import IntervalUnion

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INVALID = 2
EXIT_INCONCLUSIVE = 3


def _print(doc):
    sys.stdout.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _write(path: str, text: str):
    with open(path, "w") as fh:
        fh.write(text)


# ---------------------------------------------------------------------------
# attractor


def _ifs_fixture(name: str) -> ifs.IteratedSystem:
    if name == "cantor":
        return ifs.IteratedSystem(
            (
                AffineMap([[1.0 / 3.0]], [0.0]),
                AffineMap([[1.0 / 3.0]], [2.0 / 3.0]),
            )
        )
    if name == "sierpinski":
        verts = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3.0) / 2.0]])
        half = np.eye(2) * 0.5
        return ifs.IteratedSystem(tuple(AffineMap(half, v / 2.0) for v in verts))
    raise InvalidInputError(f"unknown IFS fixture {name!r}")


def _ifs_from_spec(spec: str) -> ifs.IteratedSystem:
    if spec in ("cantor", "sierpinski"):
        return _ifs_fixture(spec)
    with open(spec) as fh:
        doc = json.load(fh)
    maps = tuple(
        AffineMap(np.array(m["matrix"]), np.array(m["offset"])) for m in doc["maps"]
    )
    return ifs.IteratedSystem(maps)


def cmd_attractor(args) -> int:
    system = _ifs_from_spec(args.system)
    seed_pts = (
        np.zeros((1, system.dim))
        if args.seed_point is None
        else np.array([json.loads(args.seed_point)], dtype=float)
    )
    seed = ifs.PointCloud(seed_pts, args.dedup_tol)
    result = ifs.attractor_iterate(system, seed, args.tol)
    if args.out:
        _write(args.out, result.cloud.to_csv())
    _print(
        {
            "points": len(result.cloud),
            "iterations": result.iterations,
            "certified_bound": result.certified_bound,
            "first_gap": result.first_gap,
            "contraction": system.contraction,
        }
    )
    return EXIT_PASS


# ---------------------------------------------------------------------------
# surfaces and bases


def _scheme_from_arg(name: str):
    if name == "example2":
        return partition.example2_scheme()
    if name == "interval":
        return partition.interval_scheme()
    with open(name) as fh:
        return partition.PartitionScheme.from_json(fh.read())


def _interpolation_from_args(scheme, labelling, zspec: str):
    reg = labelling.registry
    values = np.zeros(len(reg))
    if zspec.startswith("@"):
        with open(zspec[1:]) as fh:
            pairs = json.load(fh)
        return fractal.InterpolationSet.from_pairs(
            labelling, [(p, z) for p, z in pairs]
        )
    zs = [float(tok) for tok in zspec.split(",")]
    parent_ids = set(labelling.parent_ids)
    free = [i for i in range(len(reg)) if i not in parent_ids]
    if len(zs) != len(free):
        raise InvalidInputError(
            f"expected {len(free)} z-values for the non-corner vertices, got {len(zs)}"
        )
    for i, z in zip(free, zs):
        values[i] = z
    return fractal.InterpolationSet(values, labelling)


def cmd_surface(args) -> int:
    scheme = _scheme_from_arg(args.scheme)
    if abs(args.scale) >= 1.0:
        raise NotContractiveError(f"|s| = {abs(args.scale)} is not < 1")
    labelling = partition.build_labelling(scheme)
    scales = fractal.ScaleVector.constant(args.scale, scheme.n_cells)
    z = _interpolation_from_args(scheme, labelling, args.z)
    lams = fractal.lambdas_from_interpolation(z, scales, labelling, scheme)
    f = fractal.fix_point(
        scheme, labelling, lams, scales, grid_depth=args.depth, z=z
    )
    joinup = fractal.check_joinup(
        scheme, lams, scales, z=z, labelling=labelling, f=f
    )
    if args.out:
        if scheme.dim == 2:
            _write(args.out, fractal.surface_obj(f, depth=min(args.depth, 7)))
        else:
            _write(args.out, fractal.samples_csv(f))
    vertex_dev = float(np.max(np.abs(f.vertex_values - z.values)))
    _print(
        {
            "cells": scheme.n_cells,
            "vertices": len(labelling.registry),
            "residual": f.residual,
            "vertex_deviation": vertex_dev,
            "joinup_ok": joinup.ok,
        }
    )
    return EXIT_PASS


def cmd_basis(args) -> int:
    scheme = _scheme_from_arg(args.scheme)
    if abs(args.scale) >= 1.0:
        raise NotContractiveError(f"|s| = {abs(args.scale)} is not < 1")
    labelling = partition.build_labelling(scheme)
    scales = fractal.ScaleVector.constant(args.scale, scheme.n_cells)
    basis = fractal.fractal_basis(scheme, labelling, scales, grid_depth=min(args.depth, 8))
    ores = fractal.orthonormalize(basis, depth=args.depth)
    g = ores.gram.matrix
    dev = float(np.max(np.abs(ores.coefficients.T @ g @ ores.coefficients - np.eye(len(basis)))))
    doc = {
        "basis_size": len(basis),
        "dim_count": ores.gram.dim_count,
        "gram": [[float(x) for x in row] for row in g],
        "orthonormal_deviation": dev,
        "quad_bound": ores.gram.quad_bound,
        "coefficients": [[float(x) for x in row] for row in ores.coefficients],
    }
    if args.out:
        _write(args.out, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    _print(doc)
    return EXIT_PASS


# ---------------------------------------------------------------------------
# root systems


def cmd_rootsys(args) -> int:
    text = weyl.catalog_json(args.name)
    if args.out:
        _write(args.out, text + "\n")
    sys.stdout.write(text + "\n")
    return EXIT_PASS


def cmd_tessellate(args) -> int:
    action = weyl.rank2_catalog(args.name)
    center = np.zeros(action.dim)
    region = weyl.Ball(center, args.radius)
    result = weyl.tessellate(action, region, args.max_words)
    if args.out:
        _write(args.out, result.to_csv())
    _print(
        {
            "cells": len(result.entries),
            "uncovered": result.uncovered,
            "region_measure": result.region_measure,
            "max_pairwise_overlap": result.max_pairwise_overlap,
        }
    )
    return EXIT_PASS


# ---------------------------------------------------------------------------
# wavelet sets


def _load_set(arg: str) -> IntervalUnion:
    if arg == "shannon":
        return wavelets.shannon_set()
    if arg == "base":
        return wavelets.base_period_set()
    if arg == "journe":
        return wavelets.journe_set()
    if arg.lstrip().startswith("{"):
        return IntervalUnion.from_json(arg)
    with open(arg) as fh:
        return IntervalUnion.from_json(fh.read())


def _report_exit(report) -> int:
    if report.verdict == "pass":
        return EXIT_PASS
    if report.verdict == "inconclusive":
        return EXIT_INCONCLUSIVE
    return EXIT_FAIL


def cmd_waveletset(args) -> int:
    if args.action == "shannon":
        e = wavelets.shannon_set()
        report = wavelets.verify_1d(e)
        if args.out:
            _write(args.out, e.to_json() + "\n")
        sys.stdout.write(report.to_json() + "\n")
        return _report_exit(report)
    if args.action == "verify":
        e = _load_set(args.set)
        report = wavelets.verify_1d(e)
        sys.stdout.write(report.to_json() + "\n")
        return _report_exit(report)
    if args.action == "construct":
        seed = _load_set(args.seed) if args.seed else wavelets.base_period_set()
        result = wavelets.construct_1d(args.eps, seed)
        report = wavelets.verify_1d(result.result)
        if args.out:
            _write(args.out, result.result.to_json() + "\n")
        doc = json.loads(report.to_json())
        doc["construction"] = {
            "rounds": result.rounds,
            "moves": result.moves,
            "defect": float(result.defect) * math.pi,
        }
        _print(doc)
        return _report_exit(report)
    if args.action in ("verify-dr", "construct-dr"):
        action = weyl.rank2_catalog(args.name)
        spec = wavelets.DilationReflectionSpec(
            action, Fraction(args.theta), Fraction(args.dilation)
        )
        if args.action == "verify-dr":
            e = _load_set(args.set)
            report = wavelets.verify_dilation_reflection(
                e, spec, word_cutoff=args.max_words, window=args.cutoff
            )
            sys.stdout.write(report.to_json() + "\n")
            return _report_exit(report)
        result = wavelets.construct_dilation_reflection(spec, args.eps)
        report = wavelets.verify_dilation_reflection(
            result.result, spec, word_cutoff=args.max_words, window=args.cutoff
        )
        if args.out:
            _write(args.out, result.result.to_json() + "\n")
        doc = json.loads(report.to_json())
        doc["construction"] = {
            "rounds": result.rounds,
            "moves": result.moves,
            "defect": float(result.defect),
        }
        _print(doc)
        return _report_exit(report)
    raise InvalidInputError(f"unknown waveletset action {args.action!r}")


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fracweyl",
        description="IFS attractors, fractal surfaces, affine Weyl groups, wavelet sets",
    )
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("attractor", help="iterate an IFS to its attractor")
    a.add_argument("system", help="fixture name (cantor, sierpinski) or JSON file")
    a.add_argument("--tol", type=float, default=1e-6)
    a.add_argument("--dedup-tol", type=float, default=0.0)
    a.add_argument("--seed-point", default=None, help="JSON list, e.g. [0.0]")
    a.add_argument("--out", default=None, help="CSV output path")
    a.set_defaults(func=cmd_attractor)

    s = sub.add_parser("surface", help="build an affine fractal surface")
    s.add_argument("scheme", help="fixture name (example2, interval) or scheme JSON")
    s.add_argument("--z", required=True, help="comma list for non-corner vertices, or @pairs.json")
    s.add_argument("--scale", type=float, default=0.3, help="vertical scaling s")
    s.add_argument("--depth", type=int, default=6)
    s.add_argument("--out", default=None, help="OBJ (2D) or CSV (1D) output path")
    s.set_defaults(func=cmd_surface)

    b = sub.add_parser("basis", help="Lagrange fractal basis and Gram data")
    b.add_argument("scheme")
    b.add_argument("--scale", type=float, default=0.3)
    b.add_argument("--depth", type=int, default=8)
    b.add_argument("--out", default=None)
    b.set_defaults(func=cmd_basis)

    r = sub.add_parser("rootsys", help="rank-2 catalog dump")
    r.add_argument("name", help="A1, A1xA1, A2, B2, G2")
    r.add_argument("--out", default=None)
    r.set_defaults(func=cmd_rootsys)

    t = sub.add_parser("tessellate", help="alcove tessellation of a region")
    t.add_argument("name")
    t.add_argument("--radius", type=float, default=3.0)
    t.add_argument("--max-words", type=int, default=8)
    t.add_argument("--out", default=None)
    t.set_defaults(func=cmd_tessellate)

    w = sub.add_parser("waveletset", help="verify or construct wavelet sets")
    w.add_argument("action", choices=["verify", "construct", "shannon", "verify-dr", "construct-dr"])
    w.add_argument("--set", default=None, help="set JSON (inline or path) or fixture name")
    w.add_argument("--seed", default=None)
    w.add_argument("--eps", type=float, default=1e-4)
    w.add_argument("--name", default="A1", help="Weyl catalog name for -dr actions")
    w.add_argument("--theta", default="1/2")
    w.add_argument("--dilation", default="2")
    w.add_argument("--cutoff", type=int, default=12, help="dilation exponent window")
    w.add_argument("--max-words", type=int, default=12)
    w.add_argument("--out", default=None)
    w.add_argument("--seed-rng", type=int, default=0, help="seed for randomized diagnostics")
    w.set_defaults(func=cmd_waveletset)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (NotContractiveError, InvalidInputError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID
    except FileNotFoundError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID
    except json.JSONDecodeError as exc:
        sys.stderr.write(f"error: malformed JSON: {exc}\n")
        return EXIT_INVALID
    except FracweylError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

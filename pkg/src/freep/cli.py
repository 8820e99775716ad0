"""Batch verification front door.

One JSON report per run; exit status 0 only when every certified check in
the run passed, 1 when a check failed (the first violated invariant is
named on stderr), 2 on unusable configuration or input files.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import constants, cubes, dyadic, freenorm, metric, retraction
from .reportio import report_json

CHECK_TOL = 1e-9

COMMANDS = (
    "norm",
    "retraction-verify",
    "basis-verify",
    "decompose",
    "bm-report",
    "lambda-check",
)


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="freep",
        description="certified free p-norm, retraction, and dyadic-basis checks",
    )
    ap.add_argument("--command", choices=COMMANDS)
    ap.add_argument("--config", help="JSON file with default flag values")
    ap.add_argument("--p", type=float)
    ap.add_argument("--alpha", type=float)
    ap.add_argument("--d", type=int)
    ap.add_argument("--kmax", type=int)
    ap.add_argument("--R", type=float)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--samples", type=int)
    ap.add_argument("--in", dest="inputs", action="append", default=None,
                    help="input file; repeat for commands taking two inputs")
    ap.add_argument("--out", help="report file (stdout when omitted)")
    return ap


def _merge_config(args) -> dict:
    cfg = {
        "command": args.command, "p": args.p, "alpha": args.alpha, "d": args.d,
        "kmax": args.kmax, "R": args.R, "seed": args.seed, "samples": args.samples,
        "inputs": args.inputs, "out": args.out,
    }
    if args.config:
        import json

        try:
            raw = json.loads(Path(args.config).read_text())
        except (OSError, ValueError) as e:
            raise ValueError(f"cannot read config file {args.config}: {e}") from None
        if not isinstance(raw, dict):
            raise ValueError("config file must hold a JSON object")
        alias = {"in": "inputs"}
        for key, val in raw.items():
            key = alias.get(key, key)
            if key not in cfg:
                raise ValueError(f"unknown config key {key!r}")
            if cfg[key] is None:
                cfg[key] = val
    if cfg["command"] not in COMMANDS:
        raise ValueError("--command is required (or must be set in the config file)")
    return cfg


def _need(cfg, *names):
    for name in names:
        if cfg[name] is None:
            raise ValueError(f"command {cfg['command']!r} requires --{name}")
    return [cfg[n] for n in names]


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise ValueError(f"cannot read input file {path}: {e}") from None


def _load_space_and_element(cfg):
    inputs = cfg["inputs"] or []
    if len(inputs) != 2:
        raise ValueError(
            f"command {cfg['command']!r} needs two --in files: the point set, then the element"
        )
    points, base = metric.load_points(_read(inputs[0]))
    space = metric.l1_space(points, base)
    elem = freenorm.parse_element(space, _read(inputs[1]))
    return space, elem


def _load_complex(cfg) -> cubes.CubeComplex:
    inputs = cfg["inputs"] or []
    if inputs:
        return cubes.load_complex(_read(inputs[0]))
    (d,) = _need(cfg, "d")
    R = cfg["R"] if cfg["R"] is not None else 1.0
    return cubes.CubeComplex(d=d, R=R, offsets=((0,) * d,))


def _cmd_norm(cfg):
    p, = _need(cfg, "p")
    space, elem = _load_space_and_element(cfg)
    if cfg["alpha"] is not None:
        space = metric.holder_distort(space, cfg["alpha"])
        elem = freenorm.FreeElement(space, elem.weights)
    if p == 1.0:
        value, witness = freenorm.exact_norm_p1(elem)
    else:
        value, witness = freenorm.exact_norm_small(elem, p)
    report = {
        "command": "norm",
        "p": p,
        "alpha": cfg["alpha"],
        "n_points": space.n,
        "norm": value,
        "witness": [[a, mol.x, mol.y] for a, mol in witness.terms],
    }
    return report, []


def _cmd_retraction_verify(cfg):
    p, = _need(cfg, "p")
    complex = _load_complex(cfg)
    ctx = retraction.build_context(complex, p)
    sampler = retraction.SamplerConfig(
        n_samples=cfg["samples"] if cfg["samples"] is not None else 200,
        seed=cfg["seed"] if cfg["seed"] is not None else 0,
    )
    report = retraction.estimate_lipschitz(ctx, sampler)
    report["command"] = "retraction-verify"
    failures = []
    if report["max_upper_cost_ratio"] > report["theoretical_upper"] * (1 + CHECK_TOL):
        failures.append("decomposition cost ratio exceeds the certified upper constant")
    if report["max_reconstruction_residual"] > CHECK_TOL:
        failures.append("decomposition does not reconstruct the retraction difference")
    if abs(report["witness_value"] - report["theoretical_lower"]) > CHECK_TOL:
        failures.append("witness value differs from the certified lower constant")
    return report, failures


def _cmd_basis_verify(cfg):
    p, alpha, d, kmax = _need(cfg, "p", "alpha", "d", "kmax")
    report = dyadic.verify_norming(d, alpha, p, kmax)
    report["command"] = "basis-verify"
    failures = []
    if not report["basis_ok"]:
        failures.append("a basis element exceeds the norming bound")
    if report["max_molecule_cost"] > report["molecule_bound"] + CHECK_TOL:
        failures.append("a molecule decomposition exceeds the certified cost bound")
    if report["max_molecule_residual"] > CHECK_TOL:
        failures.append("a molecule decomposition does not reconstruct its molecule")
    if not report["complete"]:
        failures.append("pair budget exceeded: report incomplete")
    return report, failures


def _cmd_decompose(cfg):
    alpha, = _need(cfg, "alpha")
    space, elem = _load_space_and_element(cfg)
    weights = {}
    for idx, w in elem.weights.items():
        pt = metric.DyadicPoint.from_fractions(
            [Fraction(float(c)) for c in space.points[idx]]
        )
        weights[pt] = weights.get(pt, 0.0) + w
    comb = dyadic.analyze(weights, alpha)
    synth = dyadic.synthesize(comb, alpha)
    keys = set(synth) | set(weights)
    residual = max(
        (abs(synth.get(k, 0.0) - weights.get(k, 0.0)) for k in keys), default=0.0
    )
    report = {
        "command": "decompose",
        "alpha": alpha,
        "n_terms": len(comb.coeffs),
        "coefficients": [
            {"point": [float(c) for c in v.floats()], "level": v.level, "coeff": c}
            for v, c in comb.items_sorted()
        ],
        "residual": residual,
    }
    failures = []
    if residual > CHECK_TOL:
        failures.append("basis coefficients do not reconstruct the element")
    return report, failures


def _cmd_bm_report(cfg):
    p, alpha, d = _need(cfg, "p", "alpha", "d")
    lower, upper = constants.retraction_bounds(p, d)
    report = {
        "command": "bm-report",
        "p": p,
        "alpha": alpha,
        "d": d,
        "c_const": constants.c_const(p, 2**d),
        "rho": constants.rho(p, alpha),
        "tau": constants.tau(p, alpha, d),
        "retraction_lower": lower,
        "retraction_upper": upper,
        "bm_bound": constants.bm_bound(p, alpha, d),
    }
    return report, []


def _cmd_lambda_check(cfg):
    complex = _load_complex(cfg)
    n_samples = cfg["samples"] if cfg["samples"] is not None else 2000
    seed = cfg["seed"] if cfg["seed"] is not None else 0
    rng = np.random.default_rng(seed)
    offsets = np.array(complex.offsets, dtype=float)

    max_partition = 0.0
    max_product = 0.0
    for _ in range(n_samples):
        w = offsets[rng.integers(len(offsets))]
        x = complex.R * (w + rng.random(complex.d))
        support = cubes.lambda_support(complex, x)
        max_partition = max(max_partition, abs(sum(wt for _, wt in support) - 1.0))
        cube = cubes.find_cube(complex, x)
        cube_verts = {
            tuple(c + b for c, b in zip(cube, bits))
            for bits in np.ndindex(*(2,) * complex.d)
        }
        if any(v not in cube_verts for v, _ in support):
            return {"command": "lambda-check"}, ["support escapes the containing cube"]
        lines = [
            cubes.CubeComplex(d=1, R=complex.R, offsets=((cube[i],),))
            for i in range(complex.d)
        ]
        for v, wt in support:
            prod = 1.0
            for i, line in enumerate(lines):
                prod *= cubes.lambda_weight(line, (v[i],), (x[i],))
            max_product = max(max_product, abs(prod - wt))

    kronecker = True
    verts = complex.vertices()
    for v in verts:
        coords = complex.R * np.array(v, dtype=float)
        for u in verts:
            expected = 1.0 if u == v else 0.0
            if cubes.lambda_weight(complex, u, coords) != expected:
                kronecker = False

    report = {
        "command": "lambda-check",
        "d": complex.d,
        "R": complex.R,
        "complex": [list(w) for w in complex.offsets],
        "samples": n_samples,
        "seed": seed,
        "max_partition_deviation": max_partition,
        "kronecker_exact": kronecker,
        "max_product_deviation": max_product,
    }
    failures = []
    if max_partition > 1e-12:
        failures.append("vertex weights do not sum to one within 1e-12")
    if not kronecker:
        failures.append("vertex weights are not exactly Kronecker at vertices")
    if max_product > 1e-14:
        failures.append("multidimensional weight differs from the coordinate product")
    return report, failures


_DISPATCH = {
    "norm": _cmd_norm,
    "retraction-verify": _cmd_retraction_verify,
    "basis-verify": _cmd_basis_verify,
    "decompose": _cmd_decompose,
    "bm-report": _cmd_bm_report,
    "lambda-check": _cmd_lambda_check,
}


def main(argv=None) -> int:
    ap = _build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = _merge_config(args)
        report, failures = _DISPATCH[cfg["command"]](cfg)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    text = report_json(report)
    if cfg["out"]:
        Path(cfg["out"]).write_text(text)
    else:
        sys.stdout.write(text)
    if failures:
        print(f"check failed: {failures[0]}", file=sys.stderr)
        return 1
    return 0


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()

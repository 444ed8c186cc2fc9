"""Command-line front end emitting JSON verification reports.

Subcommands: zeros | matrix | verify | evolve | sweep.

Complex numbers are serialized as [re, im] pairs; output is deterministic for
a fixed --seed (byte-identical reports).  Exit codes: 0 pass, 1 verification
failure, 2 invalid input, 3 degenerate zeros, 4 numerical non-convergence.
Set ISOSPECTRA_LOG=debug|info for stderr diagnostics.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import zlib

import numpy as np

from . import dynamics, families, matrices
from .errors import (
    BranchPoint,
    Collision,
    DegenerateInput,
    InvalidParameters,
    IsospectraError,
    NonConvergence,
    RepeatedZeros,
)
from .families import Family, FamilySpec, make_spec

log = logging.getLogger("isospectra")

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INVALID = 2
EXIT_DEGENERATE = 3
EXIT_NONCONVERGENCE = 4

FAMILY_ALIASES = {
    "ghyp": Family.GHYP,
    "gbasic": Family.GBASIC,
    "wilson": Family.WILSON,
    "racah": Family.RACAH,
    "aw": Family.AW,
    "askey-wilson": Family.AW,
    "qracah": Family.QRACAH,
    "jacobi": Family.JACOBI,
}

#: sweep constructions: name -> (family, alpha count, beta count)
CONSTRUCTIONS = {
    "ghyp11": (Family.GHYP, 1, 1),
    "jacobi": (Family.JACOBI, 2, 0),
    "ghyp21": (Family.GHYP, 2, 1),
    "ghyp22": (Family.GHYP, 2, 2),
    "ghyp32": (Family.GHYP, 3, 2),
    "gbasic11": (Family.GBASIC, 1, 1),
    "gbasic21": (Family.GBASIC, 2, 1),
    "gbasic22": (Family.GBASIC, 2, 2),
    "wilson": (Family.WILSON, 4, 0),
    "racah": (Family.RACAH, 4, 0),
    "aw": (Family.AW, 4, 0),
    "qracah": (Family.QRACAH, 4, 0),
}

# documented "safe box" for random draws
ALPHA_BOX = (0.5, 3.0)
BETA_BOX = (1.5, 4.0)
Q_BOX = (1.3, 2.5)
DRAW_MARGIN = 1e-2   # quality margin on q-Pochhammer denominators when drawing


def _c2pair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _carray(values) -> list:
    return [_c2pair(v) for v in np.asarray(values).ravel()]


def _cmatrix(m) -> list:
    return [_carray(row) for row in np.asarray(m)]


def _parse_complex_list(text):
    if text is None or text == "":
        return ()
    out = []
    for tok in str(text).split(","):
        tok = tok.strip().replace("i", "j")
        out.append(complex(tok))
    return tuple(out)


def _spec_from_args(args) -> FamilySpec:
    file_cfg = {}
    if getattr(args, "spec_file", None):
        with open(args.spec_file, "r", encoding="utf-8") as fh:
            file_cfg = json.load(fh)
    family = args.family or file_cfg.get("family")
    if family is None:
        raise InvalidParameters("no family given (flag --family or spec file)")
    fam_key = str(family).lower()
    if fam_key not in FAMILY_ALIASES:
        raise InvalidParameters(f"unknown family {family!r}")

    def from_pairs(value):
        return tuple(complex(p[0], p[1]) for p in value)

    n = args.N if args.N is not None else file_cfg.get("N")
    if n is None:
        raise InvalidParameters("no degree N given")
    alphas = (
        _parse_complex_list(args.alphas)
        if args.alphas is not None
        else from_pairs(file_cfg.get("alphas", []))
    )
    betas = (
        _parse_complex_list(args.betas)
        if args.betas is not None
        else from_pairs(file_cfg.get("betas", []))
    )
    if args.q is not None:
        q = _parse_complex_list(args.q)[0]
    else:
        raw = file_cfg.get("q")
        q = complex(raw[0], raw[1]) if raw else None
    return make_spec(FAMILY_ALIASES[fam_key], int(n), alphas, betas, q)


def _spec_echo(spec: FamilySpec) -> dict:
    return {
        "family": spec.family.value,
        "N": spec.N,
        "alphas": _carray(spec.alphas),
        "betas": _carray(spec.betas),
        "q": None if spec.q is None else _c2pair(spec.q),
    }


def _finite_or_none(x):
    return float(x) if np.isfinite(x) else None


def _emit(report: dict) -> None:
    sys.stdout.write(json.dumps(report, sort_keys=True, separators=(",", ":")) + "\n")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_zeros(args) -> int:
    spec = _spec_from_args(args)
    zs = families.compute_zeros(spec)
    _emit(
        {
            "spec": _spec_echo(spec),
            "zeros": _carray(zs.zeros),
            "min_separation": _finite_or_none(zs.min_separation),
            "max_poly_residual": zs.max_poly_residual,
            "pass": True,
        }
    )
    return EXIT_PASS


def _matrix_payload(spec: FamilySpec, tol_spectral: float) -> tuple[dict, bool]:
    report = matrices.verify_matrix(spec, tol_spectral=tol_spectral)
    payload = {
        "matrix": _cmatrix(report.L),
        "computed_spectrum": _carray(report.computed_spectrum.values),
        "reference_spectrum": _carray(report.reference_spectrum.values),
        "residuals": {
            "spectral": report.spectral_residual,
            "trace": report.trace_residual,
            "det": report.det_residual,
        },
    }
    return payload, bool(report.passed)


def cmd_matrix(args) -> int:
    spec = _spec_from_args(args)
    zs = families.compute_zeros(spec)
    payload, ok = _matrix_payload(spec, args.tol_spectral)
    out = {"spec": _spec_echo(spec), "zeros": _carray(zs.zeros), "pass": ok}
    out.update(payload)
    _emit(out)
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_verify(args) -> int:
    spec = _spec_from_args(args)
    zs = families.compute_zeros(spec)
    payload, mat_ok = _matrix_payload(spec, args.tol_spectral)
    identity = float(np.max(np.abs(matrices.identity_residual(spec, zs))))
    equilibrium = dynamics.equilibrium_residual(spec, zs)
    defining = families.max_defining_residual(spec, count=10, seed=args.seed)
    residuals = dict(payload["residuals"])
    residuals.update(
        {"identity": identity, "equilibrium": equilibrium, "defining_eq": defining}
    )
    ok = bool(
        mat_ok
        and identity <= args.tol_identity
        and equilibrium <= args.tol_identity
        and defining <= args.tol_identity
    )
    out = {"spec": _spec_echo(spec), "zeros": _carray(zs.zeros), "pass": ok}
    out.update(payload)
    out["residuals"] = residuals
    _emit(out)
    return EXIT_PASS if ok else EXIT_FAIL


def cmd_evolve(args) -> int:
    spec = _spec_from_args(args)
    zs = families.compute_zeros(spec)
    start = dynamics.to_dynamics_variable(spec, zs.zeros)
    rng = np.random.default_rng(args.seed)
    if args.perturb:
        jitter = rng.uniform(-1.0, 1.0, len(start)) + 1j * rng.uniform(-1.0, 1.0, len(start))
        start = start + args.perturb * jitter
    record = dynamics.evolve_compare(
        spec, start, args.t1, args.steps, record_every=args.record_every
    )
    ok = record.max_deviation <= args.tol_deviation
    _emit(
        {
            "spec": _spec_echo(spec),
            "times": list(record.times),
            "ode_zeros": [_carray(row) for row in record.ode_zeros],
            "oracle_zeros": [_carray(row) for row in record.oracle_zeros],
            "max_deviation": record.max_deviation,
            "pass": bool(ok),
        }
    )
    return EXIT_PASS if ok else EXIT_FAIL


def draw_spec(construction: str, nmax: int, rng: np.random.Generator, nmin: int = 2) -> FamilySpec:
    """One safe-box draw for a named construction, redrawn until valid.

    The box itself can graze q-Pochhammer poles (e.g. alpha ~ 1/q for
    q-racah), so draws whose denominators come within DRAW_MARGIN of zero are
    rejected and redrawn; the rng state makes this deterministic.
    """
    family, n_alpha, n_beta = CONSTRUCTIONS[construction]
    for _ in range(200):
        n = int(rng.integers(nmin, nmax + 1))
        alphas = tuple(rng.uniform(*ALPHA_BOX) for _ in range(n_alpha))
        betas = tuple(rng.uniform(*BETA_BOX) for _ in range(n_beta))
        q = rng.uniform(*Q_BOX) if family in families.Q_FAMILIES else None
        spec = make_spec(family, n, alphas, betas, q)
        try:
            families.validate_spec(spec)
            if family in families.Q_FAMILIES and _near_q_pole(spec):
                continue
            families.compute_zeros(spec)
        except (InvalidParameters, RepeatedZeros, NonConvergence):
            continue
        return spec
    raise NonConvergence(f"no valid draw for {construction} after 200 tries")


def _near_q_pole(spec: FamilySpec) -> bool:
    q, n = spec.q, spec.N
    bases = []
    if spec.family == Family.GBASIC:
        bases = list(spec.betas) + list(spec.alphas)
    elif spec.family == Family.AW:
        a, b, c, d = spec.alphas
        bases = [a * b, a * c, a * d, a * b * c * d * q ** (n - 1)]
    elif spec.family == Family.QRACAH:
        al, be, ga, de = spec.alphas
        bases = [al * q, be * de * q, ga * q, al * be * q ** (n + 1)]
    for base in bases:
        g = complex(base)
        for _ in range(n):
            if abs(1.0 - g) < DRAW_MARGIN:
                return True
            g *= q
    return False


def cmd_sweep(args) -> int:
    names = list(CONSTRUCTIONS) if args.family in (None, "all") else [args.family]
    for name in names:
        if name not in CONSTRUCTIONS:
            raise InvalidParameters(f"unknown construction {name!r}")
    results = []
    worst = {"spectral": 0.0, "trace": 0.0, "det": 0.0}
    n_pass = 0
    total = 0
    for name in names:
        for k in range(args.draws):
            rng = np.random.default_rng([args.seed, zlib.crc32(name.encode()), k])
            spec = draw_spec(name, args.nmax, rng)
            report = matrices.verify_matrix(spec, tol_spectral=args.tol_spectral)
            total += 1
            n_pass += bool(report.passed)
            worst["spectral"] = max(worst["spectral"], report.spectral_residual)
            worst["trace"] = max(worst["trace"], report.trace_residual)
            worst["det"] = max(worst["det"], report.det_residual)
            results.append(
                {
                    "construction": name,
                    "draw": k,
                    "spec": _spec_echo(spec),
                    "residuals": {
                        "spectral": report.spectral_residual,
                        "trace": report.trace_residual,
                        "det": report.det_residual,
                    },
                    "pass": bool(report.passed),
                }
            )
    ok = n_pass == total
    _emit(
        {
            "constructions": names,
            "draws": args.draws,
            "seed": args.seed,
            "nmax": args.nmax,
            "results": results,
            "pass_count": n_pass,
            "total": total,
            "worst_residuals": worst,
            "pass": bool(ok),
        }
    )
    return EXIT_PASS if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _add_spec_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", help="ghyp|gbasic|wilson|racah|aw|qracah|jacobi")
    p.add_argument("-N", "--N", type=int, default=None, help="polynomial degree")
    p.add_argument("--alphas", default=None, help="comma-separated complex list")
    p.add_argument("--betas", default=None, help="comma-separated complex list")
    p.add_argument("--q", default=None, help="base q (q-families only)")
    p.add_argument("--spec-file", default=None, help="JSON spec file; flags override")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol-spectral", type=float, default=1e-6, dest="tol_spectral")
    p.add_argument("--tol-identity", type=float, default=1e-8, dest="tol_identity")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="isospectra", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    for name, fn in (("zeros", cmd_zeros), ("matrix", cmd_matrix), ("verify", cmd_verify)):
        p = sub.add_parser(name)
        _add_spec_flags(p)
        p.set_defaults(func=fn)

    p = sub.add_parser("evolve")
    _add_spec_flags(p)
    p.add_argument("--t1", type=float, default=0.5)
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--perturb", type=float, default=1e-3)
    p.add_argument("--record-every", type=int, default=20, dest="record_every")
    p.add_argument("--tol-deviation", type=float, default=1e-6, dest="tol_deviation")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("sweep")
    p.add_argument("--family", default="all", help="construction name or 'all'")
    p.add_argument("--draws", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nmax", type=int, default=8)
    p.add_argument("--tol-spectral", type=float, default=1e-6, dest="tol_spectral")
    p.add_argument("--tol-identity", type=float, default=1e-8, dest="tol_identity")
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    level = os.environ.get("ISOSPECTRA_LOG", "warning").upper()
    logging.basicConfig(stream=sys.stderr, level=getattr(logging, level, logging.WARNING))
    args = build_parser().parse_args(argv)
    log.info("command %s", args.command)
    try:
        if getattr(args, "draws", None) == 0:
            _emit({"results": [], "pass_count": 0, "total": 0, "pass": True})
            return EXIT_PASS
        return args.func(args)
    except InvalidParameters as exc:
        log.error("invalid input: %s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (RepeatedZeros, Collision, BranchPoint, DegenerateInput) as exc:
        log.error("degenerate zeros: %s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except NonConvergence as exc:
        log.error("non-convergence: %s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except IsospectraError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

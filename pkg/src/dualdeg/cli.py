"""Command-line front door: `dualdeg <command> ...` writes one JSON report.

Exit codes: 0 success, 1 failed verification, 2 usage error.
"""
from __future__ import annotations

import argparse
import datetime
import json
import sys

from . import acceptance
from .amplify import upp_witness
from .boolfn import PartialBoolFn
from .config import RunConfig, load_config
from .degree import Measure, degree, dual_witness
from .dist import Distribution, m2_accept, metrics, postselect_three
from .errors import CertificateRejected, DualDegError
from .pattern import orthogonalizing_distribution, pattern_matrix, smoothness_report
from .polylib import CubeFn
from .rational import as_fraction, fmt
from .verify import DualKind, certify_amplification, verify_dual

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _load(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot read {path}: {e}") from e


def _need(args, name: str):
    v = getattr(args, name, None)
    if v is None:
        raise UsageError(f"--{name.replace('_', '-')} is required")
    return v


def _parse(build, path: str):
    try:
        return build(_load(path))
    except (KeyError, TypeError, AttributeError) as e:
        raise UsageError(f"malformed {path}: {type(e).__name__}: {e}") from e


def _fn(args, cfg: RunConfig) -> PartialBoolFn:
    return _parse(lambda obj: PartialBoolFn.from_json(obj, cap=cfg.cap_arity), _need(args, "fn"))


def _unwrap(obj: dict) -> dict:
    # accept a bare CubeFn, or a report carrying one under "dual" or "psi"
    for key in ("dual", "psi"):
        if isinstance(obj.get(key), dict):
            return obj[key]
    return obj


def _witness(args) -> CubeFn:
    return _parse(lambda obj: CubeFn.from_json(_unwrap(obj)), _need(args, "witness"))


def _eps(args, required: bool = True):
    if args.eps is None:
        if required:
            raise UsageError("--eps is required")
        return None
    return as_fraction(args.eps)


# ---------------------------------------------------------------- commands

def cmd_degree(args, cfg):
    f = _fn(args, cfg)
    measure = Measure.parse(args.measure)
    eps = None if measure == Measure.THRESHOLD else _eps(args)
    r = degree(f, measure, eps, cfg.solver_mode)
    return EXIT_OK, {"command": "degree", "function": f.generator, **r.to_json()}


def cmd_witness(args, cfg):
    f = _fn(args, cfg)
    measure = Measure.parse(args.measure)
    eps = None if measure == Measure.THRESHOLD else _eps(args)
    d = args.degree
    if d is None:
        d = degree(f, measure, eps, cfg.solver_mode).degree - 1
        if d < 0:
            raise UsageError("degree is 0; there is no dual witness to emit")
    psi, value = dual_witness(f, measure, d, cfg.solver_mode)
    if psi is None:
        return EXIT_FAILED, {"command": "witness", "degree": d, "dual_value": None,
                             "verdict": "NO_WITNESS"}
    rep = verify_dual(psi, f, measure.dual_kind, d, eps)
    code = EXIT_OK if rep.verdict else EXIT_FAILED
    return code, {"command": "witness", "measure": measure.value, "degree": d,
                  "eps": None if eps is None else fmt(eps), "dual_value": fmt(value),
                  "psi": psi.to_json(), "report": rep.to_json()}


def cmd_amplify(args, cfg):
    f = _fn(args, cfg)
    mu = _witness(args)
    eps2 = None if args.eps2 is None else as_fraction(args.eps2)
    b = upp_witness(mu, f, _need(args, "n"), _eps(args), args.mode or "GAPMAJ", eps2,
                    override=args.override)
    try:
        cert = certify_amplification(b)
        code, verdict = EXIT_OK, cert.to_json()
    except CertificateRejected as e:
        code, verdict = EXIT_FAILED, {"accepted": False, "reason": str(e),
                                     "report": e.report.to_json()}
    return code, {"command": "amplify", "bundle": b.to_json(), "certificate": verdict}


def cmd_verify(args, cfg):
    f = _fn(args, cfg)
    psi = _witness(args)
    kind = DualKind.parse(_need(args, "kind"))
    eps = _eps(args, required=kind in (DualKind.APPROX, DualKind.ONESIDED))
    rep = verify_dual(psi, f, kind, _need(args, "degree"), eps)
    return (EXIT_OK if rep.verdict else EXIT_FAILED), {"command": "verify", **rep.to_json()}


def cmd_pattern(args, cfg):
    phi = _fn(args, cfg)
    N = _need(args, "N")
    M = pattern_matrix(phi, N, phi.arity, cap=cfg.matrix_cap, lazy=args.csv is None)
    out = {"command": "pattern", "N": N, "n": phi.arity, "shape": list(M.shape),
           "dense": M.entries is not None}
    if args.csv:
        M.to_csv(args.csv)
        out["csv"] = args.csv
        if args.labels:
            M.write_labels(args.labels)
            out["labels"] = args.labels
    if args.witness:
        mu, d = orthogonalizing_distribution(_witness(args), phi)
        out["orthogonalizing"] = {"pure_high_degree": d, "mu": mu.to_json()}
        if args.alpha is not None:
            out["smoothness"] = smoothness_report(mu, d, args.alpha).to_json()
    return EXIT_OK, out


def cmd_dist(args, cfg):
    p = _parse(Distribution.from_json, _need(args, "p"))
    q = _parse(Distribution.from_json, _need(args, "q"))
    if args.op == "m2":
        return EXIT_OK, {"command": "dist m2", "accept": fmt(m2_accept(p, q))}
    if args.op == "metrics":
        return EXIT_OK, {"command": "dist metrics", **metrics(p, q, cfg.entropy_width).to_json()}
    return EXIT_OK, {"command": "dist postselect", "posterior": postselect_three(p, q).to_json()}


def _numbers(text: str | None) -> list[int] | None:
    if not text:
        return None
    try:
        nums = [int(t) for t in text.split(",") if t.strip()]
    except ValueError as e:
        raise UsageError(f"--only takes comma-separated criterion numbers, got {text!r}") from e
    bad = [k for k in nums if not 1 <= k <= len(acceptance.CRITERIA)]
    if bad or not nums:
        raise UsageError(f"criterion numbers must lie in 1..{len(acceptance.CRITERIA)}")
    return nums


def cmd_suite(args, cfg):
    results = acceptance.run_suite(cfg, _numbers(args.only),
                                   report=lambda r: print(r.line(), file=sys.stderr))
    out = {"command": "suite", **acceptance.summary(results, cfg)}
    return (EXIT_OK if all(r.passed for r in results) else EXIT_FAILED), out


# ---------------------------------------------------------------- parser

def _common(p: argparse.ArgumentParser):
    p.add_argument("--emit", help="write the JSON report to this path")
    p.add_argument("--cap-arity", type=int, dest="cap_arity")
    p.add_argument("--threads", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--config", help="config file (default: $DUALDEG_CONFIG)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dualdeg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("degree", help="degree of a function by exact LP")
    p.add_argument("--fn")
    p.add_argument("--measure", default="approx", choices=["approx", "onesided", "threshold"])
    p.add_argument("--eps")
    p.set_defaults(run=cmd_degree)

    p = sub.add_parser("witness", help="dual witness just below the degree (or at --degree)")
    p.add_argument("--fn")
    p.add_argument("--measure", default="approx", choices=["approx", "onesided", "threshold"])
    p.add_argument("--eps")
    p.add_argument("--degree", type=int)
    p.set_defaults(run=cmd_witness)

    p = sub.add_parser("amplify", help="threshold-degree witness for GapMaj / GapAND")
    p.add_argument("--fn")
    p.add_argument("--witness")
    p.add_argument("--n", type=int)
    p.add_argument("--eps")
    p.add_argument("--eps2", help="error the base witness was built for")
    p.add_argument("--mode", type=str.upper, choices=["GAPMAJ", "GAPAND"])
    p.add_argument("--override", action="store_true", help="allow alpha >= 1/40")
    p.set_defaults(run=cmd_amplify)

    p = sub.add_parser("verify", help="check a dual witness exhaustively")
    p.add_argument("--fn")
    p.add_argument("--witness")
    p.add_argument("--kind", choices=["approx", "threshold", "onesided"])
    p.add_argument("--degree", type=int)
    p.add_argument("--eps")
    p.set_defaults(run=cmd_verify)

    p = sub.add_parser("pattern", help="pattern matrix and orthogonalizing distribution")
    p.add_argument("--fn", help="phi in the +-1 convention")
    p.add_argument("--N", type=int, dest="N")
    p.add_argument("--csv", help="write the dense matrix here")
    p.add_argument("--labels", help="write row and column labels here")
    p.add_argument("--witness")
    p.add_argument("--alpha", type=as_fraction)
    p.set_defaults(run=cmd_pattern)

    p = sub.add_parser("dist", help="exact distribution tools")
    p.add_argument("op", choices=["m2", "metrics", "postselect"])
    p.add_argument("--p")
    p.add_argument("--q")
    p.set_defaults(run=cmd_dist)

    p = sub.add_parser("suite", help="run the acceptance battery")
    p.add_argument("--quick", action="store_true")
    p.add_argument("--only", help="comma-separated criterion numbers, e.g. 1,4,9")
    p.set_defaults(run=cmd_suite)

    for p in sub.choices.values():
        _common(p)
    return parser


def run_command(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    try:
        cfg = load_config(args.config).with_overrides(
            cap_arity=args.cap_arity, threads=args.threads, seed=args.seed, emit=args.emit,
            quick=getattr(args, "quick", None) or None)
        code, report = args.run(args, cfg)
    except UsageError as e:
        print(f"dualdeg: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (DualDegError, ValueError) as e:
        print(f"dualdeg: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_USAGE
    report["seed"] = cfg.seed
    report["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    text = json.dumps(report, indent=2, sort_keys=True)
    if cfg.emit:
        with open(cfg.emit, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return code


def main():
    sys.exit(run_command())


if __name__ == "__main__":
    main()

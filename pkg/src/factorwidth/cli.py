"""Command-line front end: membership checks, certificates, and reports.

Every command prints one RunReport JSON object to stdout (schema shipped in
``schemas/run_report.schema.json``) and encodes its verdict in the exit code:

    0   member / psd / found
    1   non_member / not_psd / none
    2   inconclusive
    64  malformed input
    65  Gram/polynomial mismatch

All commands are deterministic for fixed inputs and flags.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .symcore import SymMatrix, Support, eigen_sym, load_matrix_json
from .decompose import (
    SolverOptions,
    decomposition_to_json,
    fw_membership,
)
from .dualcone import (
    certificate_to_json,
    cos_certificate_search,
    dual_membership,
    dykstra_dual_certificate,
)
from .polyforms import (
    GramMismatchError,
    QuadraticForm,
    default_gram,
    load_poly_json,
    monomial_basis,
    multiply_weighted_power,
    quadratic_gram,
    soks_test,
)
from .families import pna_threshold, pna_witness_decomposition

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INCONCLUSIVE = 2
EXIT_BAD_INPUT = 64
EXIT_GRAM_MISMATCH = 65


class _CliInputError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_BAD_INPUT)


def _load_json_file(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise _CliInputError(f"cannot read {path}: {exc}")


def _load_matrix(path: str) -> SymMatrix:
    try:
        return load_matrix_json(_load_json_file(path))
    except (ValueError, TypeError) as exc:
        raise _CliInputError(f"bad matrix file {path}: {exc}")


def _load_poly(path: str):
    try:
        return load_poly_json(_load_json_file(path))
    except (ValueError, TypeError) as exc:
        raise _CliInputError(f"bad polynomial file {path}: {exc}")


def _load_supports(path: str):
    obj = _load_json_file(path)
    if isinstance(obj, dict):
        obj = obj.get("supports")
    if not isinstance(obj, list):
        raise _CliInputError(f"{path}: expected a list of index lists")
    try:
        return [Support.of(entry) for entry in obj]
    except (ValueError, TypeError) as exc:
        raise _CliInputError(f"bad support list in {path}: {exc}")


def _artifact_path(base: str, kind: str) -> Path:
    p = Path(base)
    return p.with_name(p.stem + f".{kind}.json")


def _emit(report: dict) -> None:
    print(json.dumps(report, indent=2, sort_keys=True))


def _verdict_exit(verdict: str) -> int:
    if verdict in ("member", "psd", "found"):
        return EXIT_OK
    if verdict in ("non_member", "not_psd", "none"):
        return EXIT_NEGATIVE
    return EXIT_INCONCLUSIVE


def _solver_options(args, support_list=None) -> SolverOptions:
    return SolverOptions(
        rho=args.rho,
        feas_tol=args.tol,
        max_iter=args.max_iter,
        support_list=support_list,
    )


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_check_fw(args) -> int:
    A = _load_matrix(args.matrix)
    supports = _load_supports(args.supports) if args.supports else None
    verdict = fw_membership(A, args.k, _solver_options(args, supports))
    artifacts = []
    if verdict.decomposition is not None:
        out = _artifact_path(args.matrix, "decomposition")
        out.write_text(json.dumps(decomposition_to_json(verdict.decomposition),
                                  indent=2))
        artifacts.append(str(out))
    if verdict.certificate is not None:
        out = _artifact_path(args.matrix, "certificate")
        out.write_text(json.dumps(certificate_to_json(verdict.certificate),
                                  indent=2))
        artifacts.append(str(out))
    _emit({
        "command": "check-fw",
        "verdict": verdict.status,
        "n": A.n,
        "k": args.k,
        "residual": verdict.diagnostics.get("primal_residual"),
        "iterations": verdict.diagnostics.get("iterations"),
        "value": verdict.diagnostics.get("certificate_value"),
        "artifacts": artifacts,
        "seed": args.seed,
        "threads": args.threads,
    })
    return _verdict_exit(verdict.status)


def cmd_check_dual(args) -> int:
    B = _load_matrix(args.matrix)
    report = dual_membership(B, args.k, args.tol)
    verdict = "member" if report.is_member else "non_member"
    _emit({
        "command": "check-dual",
        "verdict": verdict,
        "n": B.n,
        "k": args.k,
        "worst_margin": report.worst_margin,
        "worst_support": list(report.worst_support.indices),
        "artifacts": [],
        "seed": args.seed,
        "threads": args.threads,
    })
    return _verdict_exit(verdict)


def cmd_soks(args) -> int:
    p = _load_poly(args.poly)
    lam = None
    if args.lam:
        try:
            lam = [Fraction(tok) for tok in args.lam.split(",")]
        except (ValueError, ZeroDivisionError) as exc:
            raise _CliInputError(f"bad --lambda: {exc}")
    if args.r > 0:
        if p.degree != 2:
            raise _CliInputError("-r expects a quadratic input polynomial")
        q = QuadraticForm(Q=quadratic_gram(p))
        lam = lam or [1] * p.n
        if len(lam) != p.n:
            raise _CliInputError("--lambda length must match variable count")
        p = multiply_weighted_power(q, lam, args.r)
    if args.gram:
        gram = _load_matrix(args.gram)
    elif p.degree == 2:
        gram = quadratic_gram(p)
    else:
        gram = default_gram(p, monomial_basis(p.n, p.degree // 2))
    verdict = soks_test(p, args.k, gram, _solver_options(args))
    artifacts = []
    if verdict.certificate is not None:
        out = _artifact_path(args.poly, "certificate")
        out.write_text(json.dumps(certificate_to_json(verdict.certificate),
                                  indent=2))
        artifacts.append(str(out))
    _emit({
        "command": "soks",
        "verdict": verdict.status,
        "n": p.n,
        "k": args.k,
        "r": args.r,
        "residual": verdict.diagnostics.get("primal_residual"),
        "gram_conditional": verdict.diagnostics.get("gram_conditional"),
        "artifacts": artifacts,
        "seed": args.seed,
        "threads": args.threads,
    })
    return _verdict_exit(verdict.status)


def cmd_pna(args) -> int:
    try:
        threshold = pna_threshold(args.n, args.k)
    except ValueError as exc:
        raise _CliInputError(str(exc))
    report = {
        "command": "pna",
        "n": args.n,
        "k": args.k,
        "threshold": str(threshold),
        "artifacts": [],
        "seed": args.seed,
        "threads": args.threads,
    }
    if args.a is None:
        report["verdict"] = "found"
        _emit(report)
        return EXIT_OK
    a = Fraction(args.a)
    report["a"] = str(a)
    if a >= threshold:
        d = pna_witness_decomposition(args.n, args.k, a)
        report["verdict"] = "found"
        report["residual"] = d.residual
        report["blocks"] = len(d.blocks)
        _emit(report)
        return EXIT_OK
    report["verdict"] = "none"
    _emit(report)
    return EXIT_NEGATIVE


def cmd_certify(args) -> int:
    Q = _load_matrix(args.matrix)
    cert = None
    if Q.n == 4 and args.k == 3:
        cert = cos_certificate_search(Q)
    if cert is None:
        cert = dykstra_dual_certificate(Q, args.k, max_cycles=args.max_cycles)
    artifacts = []
    if cert is not None:
        out = _artifact_path(args.matrix, "certificate")
        out.write_text(json.dumps(certificate_to_json(cert), indent=2))
        artifacts.append(str(out))
    _emit({
        "command": "certify",
        "verdict": "found" if cert else "none",
        "n": Q.n,
        "k": args.k,
        "value": None if cert is None else float(cert.value),
        "normalized_value": None if cert is None else cert.normalized_value(Q),
        "worst_margin": None if cert is None else cert.worst_minor_margin,
        "artifacts": artifacts,
        "seed": args.seed,
        "threads": args.threads,
    })
    return EXIT_OK if cert else EXIT_NEGATIVE


def cmd_eig(args) -> int:
    A = _load_matrix(args.matrix)
    res = eigen_sym(A)
    lam = [float(v) for v in res.eigenvalues]
    psd = lam[0] >= -1e-9 * (1.0 + A.max_abs())
    _emit({
        "command": "eig",
        "verdict": "psd" if psd else "not_psd",
        "n": A.n,
        "eigenvalues": lam,
        "min_eigenvalue": lam[0],
        "artifacts": [],
        "seed": args.seed,
        "threads": args.threads,
    })
    return EXIT_OK if psd else EXIT_NEGATIVE


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_common(sub):
    sub.add_argument("--seed", type=int, default=0,
                     help="seed for randomized search (none currently; "
                          "recorded for reproducibility)")
    sub.add_argument("--threads", type=int, default=1, metavar="N",
                     help="solver parallelism (current backend is vectorized; "
                          "results are identical for any value)")


def _add_solver_flags(sub):
    sub.add_argument("--tol", type=float, default=1e-7,
                     help="relative feasibility tolerance (default 1e-7)")
    sub.add_argument("--max-iter", type=int, default=20000)
    sub.add_argument("--rho", type=float, default=1.0)


def build_parser() -> _Parser:
    parser = _Parser(prog="factorwidth",
                     description="Factor-width-k cones, dual certificates, "
                                 "and k-nomial sums of squares")
    subs = parser.add_subparsers(dest="command", required=True)

    s = subs.add_parser("check-fw", help="decide membership in FW_k")
    s.add_argument("matrix")
    s.add_argument("k", type=int)
    s.add_argument("--supports", help="JSON file restricting the support list")
    _add_solver_flags(s)
    _add_common(s)
    s.set_defaults(func=cmd_check_fw)

    s = subs.add_parser("check-dual", help="decide membership in (FW_k)*")
    s.add_argument("matrix")
    s.add_argument("k", type=int)
    s.add_argument("--tol", type=float, default=1e-9,
                   help="psd tolerance; 0 selects the exact path on rationals")
    _add_common(s)
    s.set_defaults(func=cmd_check_dual)

    s = subs.add_parser("soks", help="sum-of-k-nomial-squares test")
    s.add_argument("poly")
    s.add_argument("k", type=int)
    s.add_argument("--gram", help="explicit Gram matrix JSON")
    s.add_argument("-r", type=int, default=0,
                   help="multiplier power (input must be quadratic)")
    s.add_argument("--lambda", dest="lam",
                   help="comma-separated multiplier weights")
    _add_solver_flags(s)
    _add_common(s)
    s.set_defaults(func=cmd_soks)

    s = subs.add_parser("pna", help="threshold and witness for the symmetric "
                                    "quadratic family")
    s.add_argument("n", type=int)
    s.add_argument("k", type=int)
    s.add_argument("a", nargs="?", default=None)
    _add_common(s)
    s.set_defaults(func=cmd_pna)

    s = subs.add_parser("certify", help="search for a separating dual "
                                        "certificate")
    s.add_argument("matrix")
    s.add_argument("k", type=int)
    s.add_argument("--max-cycles", type=int, default=5000)
    _add_common(s)
    s.set_defaults(func=cmd_certify)

    s = subs.add_parser("eig", help="eigenvalues of a symmetric matrix")
    s.add_argument("matrix")
    _add_common(s)
    s.set_defaults(func=cmd_eig)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_BAD_INPUT
    if getattr(args, "threads", 1) < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_BAD_INPUT
    try:
        return args.func(args)
    except _CliInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except GramMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GRAM_MISMATCH


if __name__ == "__main__":
    sys.exit(main())

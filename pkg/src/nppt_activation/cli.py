"""Command-line interface.

Exit codes: 0 success, 1 invalid input, 2 numerical failure, 3 failed
verification.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import enum
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import activation, geometry, verification, witness
from .states import (
    IsotropicParam,
    SymmetricSpec,
    WernerParam,
    coords_of,
    isotropic_matrix,
    symmetric_matrix,
    werner_matrix,
)
from .tensor import LabeledOperator, operator_from_json, operator_to_json

THREADS_ENV = "NPPT_ACTIVATION_THREADS"
REGION_COLUMNS = ["l1", "l2", "l3", "label", "witness", "interval_lo", "interval_hi"]


class UsageError(Exception):
    pass


class VerificationFailed(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def rational(text: str) -> Fraction:
    """'1/6', '0.125' or '-2' as an exact rational."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def fmt_rational(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def jsonable(obj):
    if isinstance(obj, Fraction):
        return fmt_rational(obj)
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, LabeledOperator):
        return json.loads(operator_to_json(obj))
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def _dump(obj) -> str:
    return json.dumps(jsonable(obj), indent=2) + "\n"


def _point_json(pt):
    return [fmt_rational(x) for x in pt]


def _interval_json(interval):
    if interval is None:
        return None
    return {"lo": fmt_rational(interval.lo), "hi": fmt_rational(interval.hi),
            "lo_closed": False, "hi_closed": interval.hi_closed}


def _lambda_spec(d: int, values) -> SymmetricSpec:
    return SymmetricSpec.from_point(d, tuple(values))


def _read_operator(path: str) -> LabeledOperator:
    try:
        return operator_from_json(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read operator file {path}: {exc}") from None


def _classification_json(d, pt, cls: geometry.Classification, alpha=None) -> dict:
    out = {
        "d": d,
        "lambda": _point_json(pt),
        "label": cls.label.value,
        "evidence": {
            "min_pt_eigenvalue": fmt_rational(cls.min_pt_eigenvalue),
            "witness_value": fmt_rational(cls.witness_value),
            "activating_alpha_interval": _interval_json(cls.activating_alpha_interval),
        },
        "informational": cls.informational,
    }
    if alpha is not None:
        out["alpha"] = fmt_rational(alpha)
        out["margin"] = fmt_rational(geometry.activation_margin(pt, alpha, d))
    return out


# -- commands ---------------------------------------------------------------

def cmd_classify(args) -> str:
    pt = geometry.to_point(args.lam)
    return _dump(_classification_json(args.d, pt, geometry.classify(pt, args.d), args.alpha))


def cmd_activate(args) -> str:
    d = args.d
    sigma = None
    if args.sigma:
        sigma = _read_operator(args.sigma)
        lam = coords_of(sigma)
        if lam.d != d:
            raise UsageError(f"sigma is for d={lam.d}, not --d {d}")
    else:
        lam = _lambda_spec(d, args.lam)
    report = activation.fidelity_reduced(args.alpha, lam)
    out = {"d": d, "alpha": fmt_rational(args.alpha), "lambda": [jsonable(x) for x in lam.lam],
           "report": report}
    if args.verify:
        if d > activation.BRUTE_FORCE_MAX_D:
            raise UsageError("--verify needs d <= 3")
        if sigma is None:
            sigma = symmetric_matrix(lam)
        brute = activation.fidelity_bruteforce(float(args.alpha), sigma, d)
        gap = abs(brute.fidelity - report.fidelity)
        out["bruteforce"] = brute
        out["bruteforce_gap"] = gap
        if gap > 1e-10 or brute.activated != report.activated:
            raise VerificationFailed(_dump(out))
    return _dump(out)


def cmd_extremes(args) -> str:
    d = args.d
    p = geometry.ppt_extreme_points(d)
    taus = geometry.tau_points(d)
    rows = [(f"p{i + 1}", pt) for i, pt in enumerate(p)] + [(f"tau{k}", taus[k]) for k in sorted(taus)]
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["name", "l1", "l2", "l3"])
        for name, pt in rows:
            writer.writerow([name, *_point_json(pt)])
        return buf.getvalue()
    return _dump({"d": d, "points": {name: _point_json(pt) for name, pt in rows}})


def cmd_plane(args) -> str:
    d, alpha = args.d, args.alpha
    if not -d < alpha < d:
        raise UsageError(f"--alpha must lie in (-{d}, {d})")
    if d <= activation.BRUTE_FORCE_MAX_D:
        coeffs = activation.plane_coefficients(float(alpha), d)
        c, method = list(coeffs.c), "direct_trace"
    else:
        # c_i = g-coefficients / (d^3 (d^2 - alpha)), same plane
        scale = Fraction(1) / (d**3 * (d * d - alpha))
        c = [float(x * scale) for x in ((d - 1) * (d + alpha), (d - 1) * (d - alpha), -(d + alpha), -(d - alpha))]
        method = "closed_form"
    out = {"d": d, "alpha": fmt_rational(alpha), "c": c, "method": method, "t": None, "third_point": None}
    if 1 < alpha <= d:
        t, point = activation.plane_third_point(alpha, d)
        out["t"] = fmt_rational(t)
        out["third_point"] = _point_json(point)
    return _dump(out)


def _region_row(args):
    d, n, k = args
    pt = tuple(Fraction(x, n) for x in k)
    cls = geometry.classify(pt, d)
    iv = cls.activating_alpha_interval
    return [*_point_json(pt), cls.label.value, fmt_rational(cls.witness_value),
            fmt_rational(iv.lo) if iv else "", fmt_rational(iv.hi) if iv else ""]


def simplex_lattice(n: int):
    for i in range(n + 1):
        for j in range(n + 1 - i):
            for k in range(n + 1 - i - j):
                yield (i, j, k)


def cmd_regions(args) -> str:
    d, n = args.d, args.resolution
    if n < 1:
        raise UsageError("--resolution must be >= 1")
    jobs = [(d, n, k) for k in simplex_lattice(n)]
    threads = int(os.environ.get(THREADS_ENV, "1") or 1)
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_region_row, jobs, chunksize=64))
    else:
        rows = [_region_row(job) for job in jobs]
    if args.format == "json":
        return _dump([dict(zip(REGION_COLUMNS, row)) for row in rows])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REGION_COLUMNS)
    writer.writerows(rows)
    return buf.getvalue()


def cmd_witness(args) -> str:
    if args.state:
        report = witness.witness_report(sigma=_read_operator(args.state), samples=args.samples, seed=args.seed)
    else:
        report = witness.witness_report(lam=geometry.to_point(args.lam), d=args.d,
                                        samples=args.samples, seed=args.seed)
    return _dump(report)


def cmd_distill_check(args) -> str:
    if args.werner:
        d, alpha = args.werner
        rho = werner_matrix(WernerParam(int(d), float(alpha)))
    elif args.isotropic:
        d, f = args.isotropic
        rho = isotropic_matrix(IsotropicParam(int(d), float(f)))
    else:
        rho = _read_operator(args.state)
    result = witness.rank2_min(rho, args.restarts, args.seed)
    cert = (witness.Certificate.DISTILLABLE_CERTIFIED if result.min_value < -witness.CERTIFY_TOL
            else witness.Certificate.INCONCLUSIVE)
    psi = result.argmin
    return _dump({
        "min_value": result.min_value,
        "restarts_used": result.restarts_used,
        "argmin": {"labels": list(psi.layout.labels), "dims": list(psi.layout.dims),
                   "re": psi.amplitudes.real.tolist(), "im": psi.amplitudes.imag.tolist()},
        "certificate": cert,
    })


def cmd_verify(args) -> str:
    results = verification.run_suite(args.d, seed=args.seed)
    for r in results:
        print(f"{r.name}: {r.seconds:.2f}s", file=sys.stderr)
    if args.format == "json":
        text = _dump([{"name": r.name, "passed": r.passed, "detail": r.detail} for r in results])
    else:
        text = "".join(f"{'PASS' if r.passed else 'FAIL'}  {r.name}  {json.dumps(jsonable(r.detail))}\n"
                       for r in results)
    if not all(r.passed for r in results):
        raise VerificationFailed(text)
    return text


# -- parser -------------------------------------------------------------------

def _add_common(p, fmt_default="json"):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["json", "csv"], default=fmt_default, dest="format")
    p.add_argument("--output", help="write to this file instead of stdout")


def _dim(text: str) -> int:
    try:
        d = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if d < 2:
        raise argparse.ArgumentTypeError("d must be >= 2")
    return d


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nppt-activation", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("classify", help="region of a symmetric state")
    p.add_argument("--d", type=_dim, required=True)
    p.add_argument("--lambda", dest="lam", type=rational, nargs=3, required=True, metavar="L")
    p.add_argument("--alpha", type=rational)
    _add_common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("activate", help="filtered fidelity for rho(alpha) and sigma")
    p.add_argument("--d", type=_dim, required=True)
    p.add_argument("--alpha", type=rational, required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--lambda", dest="lam", type=rational, nargs=3, metavar="L")
    src.add_argument("--sigma", help="operator JSON file on (A1, A2, B1, B2)")
    p.add_argument("--verify", action="store_true", help="cross-check on the full d^6 space")
    _add_common(p)
    p.set_defaults(func=cmd_activate)

    p = sub.add_parser("extremes", help="exact vertex tables")
    p.add_argument("--d", type=_dim, required=True)
    _add_common(p)
    p.set_defaults(func=cmd_extremes)

    p = sub.add_parser("plane", help="separating plane for rho(alpha)")
    p.add_argument("--d", type=_dim, required=True)
    p.add_argument("--alpha", type=rational, required=True)
    _add_common(p)
    p.set_defaults(func=cmd_plane)

    p = sub.add_parser("regions", help="classify the simplex lattice")
    p.add_argument("--d", type=_dim, required=True)
    p.add_argument("--resolution", type=int, required=True)
    _add_common(p, fmt_default="csv")
    p.set_defaults(func=cmd_regions)

    p = sub.add_parser("witness", help="witness value and product-state floor")
    p.add_argument("--d", type=_dim)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--lambda", dest="lam", type=rational, nargs=3, metavar="L")
    src.add_argument("--state", help="operator JSON file on (A1, A2, B1, B2)")
    p.add_argument("--samples", type=int, default=10_000)
    _add_common(p)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("distill-check", help="Schmidt-rank-2 search on the partial transpose")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--werner", nargs=2, metavar=("D", "ALPHA"))
    src.add_argument("--isotropic", nargs=2, metavar=("D", "F"))
    src.add_argument("--state", help="bipartite operator JSON file")
    p.add_argument("--restarts", type=int, default=witness.DEFAULT_RESTARTS)
    _add_common(p)
    p.set_defaults(func=cmd_distill_check)

    p = sub.add_parser("verify", help="run the oracle suite")
    p.add_argument("--d", type=_dim, required=True)
    _add_common(p, fmt_default="csv")
    p.set_defaults(func=cmd_verify)
    return parser


def _emit(text: str, path):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "witness" and args.lam is not None and args.d is None:
        print("witness: --d is required with --lambda", file=sys.stderr)
        return 1
    try:
        _emit(args.func(args), args.output)
    except VerificationFailed as exc:
        _emit(str(exc), args.output)
        return 3
    except (UsageError, ValueError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

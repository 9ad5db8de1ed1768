"""``dslv`` command line: solve, repr-check, eigen, identity-check, scan.

Exit codes are shared by all commands: 0 success, 2 usage or parse error,
3 numeric failure (including a failed check).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from dslv import __version__
from dslv.asymptotics import ScanConfig, scan_h_growth, scan_y_bound
from dslv.checks import (
    casoratian_suite,
    representation_suite,
    sbp_suite,
    telescope_suite,
)
from dslv.errors import BracketError, DomainError, NumericalFailure
from dslv.lattice import Coefficients, GridSpec, ProblemSpec, BoundaryData, forward_recurrence
from dslv.parallel import default_jobs
from dslv.potentials import parse_potential
from dslv.representation import characteristic_roots
from dslv.spectral import (
    assemble_operator,
    eigenvalues_bisection,
    eigenvalues_shooting,
    eigenvector,
)

SCHEMA_VERSION = 1
EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3

# flags that never change results and are left out of the manifest
_NOT_IN_MANIFEST = {"func", "command", "out", "summary", "jobs", "format"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v) + 0.0  # folds -0.0 into 0.0
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    return str(v)


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj) + 0.0
        return v if math.isfinite(v) else _fmt(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def manifest(args: argparse.Namespace) -> dict:
    config = {k: v for k, v in vars(args).items() if k not in _NOT_IN_MANIFEST}
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": "dslv",
        "version": __version__,
        "command": args.command,
        "config": _json_safe(config),
    }


def _compact(obj) -> str:
    return json.dumps(_json_safe(obj), separators=(",", ":"), ensure_ascii=False)


def render_csv(man: dict, header: list[str], rows: list[list], summary: dict | None = None) -> str:
    buf = io.StringIO()
    buf.write(f"# manifest: {_compact(man)}\n")
    if summary is not None:
        buf.write(f"# summary: {_compact(summary)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def render_json(man: dict, header: list[str], rows: list[list], summary: dict | None = None) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "manifest": man}
    if summary is not None:
        doc["summary"] = summary
    doc["rows"] = [dict(zip(header, row)) for row in rows]
    return json.dumps(_json_safe(doc), indent=2, ensure_ascii=False) + "\n"


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8", newline="\n")


def _write(args, header, rows, summary=None) -> None:
    man = manifest(args)
    render = render_json if args.format == "json" else render_csv
    _emit(render(man, header, rows, summary), args.out)


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")
    if not vals or not all(map(math.isfinite, vals)):
        raise argparse.ArgumentTypeError(f"expected finite numbers, got {text!r}")
    return vals


def _positive(kind):
    def parse(text):
        try:
            val = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid value {text!r}")
        if not val > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text!r}")
        return val

    return parse


def _problem(args, horizon: int | None = None) -> ProblemSpec:
    """Problem from --a/--b/--h/--k and coefficient specs; coefficients are
    generated far enough to march up to ``horizon``."""
    last = max(args.b, (horizon or args.b + 1) - 1)
    try:
        grid = GridSpec(args.a, args.b)
        p = parse_potential(args.p).lattice(args.a - 1, last)
        q = parse_potential(args.q).lattice(args.a, last)
        r = parse_potential(args.r).lattice(args.a, last)
        return ProblemSpec(grid, Coefficients(p, q, r), BoundaryData(args.h, args.k))
    except DomainError as exc:
        raise UsageError(str(exc)) from None


def cmd_solve(args) -> int:
    horizon = args.b + 1 if args.horizon is None else args.horizon
    if horizon < args.b + 1:
        raise UsageError(f"--horizon must be >= b + 1 = {args.b + 1}")
    prob = _problem(args, horizon)
    try:
        x = forward_recurrence(prob, args.lam, args.init, horizon)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    if not np.all(np.isfinite(x.values)):
        raise NumericalFailure("solution overflowed")
    _write(args, ["n", "value"], [[n, float(v)] for n, v in x.items()])
    return EXIT_OK


def cmd_repr_check(args) -> int:
    for lam in args.lambda_set:
        if characteristic_roots(lam).degenerate:
            raise UsageError(f"degenerate discriminant: lambda={lam} gives lambda*(lambda-4) = 0")
    q = None
    if args.q is not None:
        try:
            q = parse_potential(args.q)
        except DomainError as exc:
            raise UsageError(str(exc)) from None
    results = representation_suite(
        args.trials, args.seed, args.lambda_set, args.h_set, args.N, args.tol, q, args.jobs
    )
    worst = max(r.deviation for r in results)
    ok = all(r.passed for r in results)
    header = ["trial", "kind", "lambda", "h", "q", "max_rel_deviation", "pass"]
    rows = [
        [r.trial, r.suite[-1], r.params["lambda"], r.params["h"], r.params["q"], r.deviation, r.passed]
        for r in results
    ]
    summary = {"status": "PASS" if ok else "FAIL", "max_rel_deviation": worst, "tol": args.tol}
    _write(args, header, rows, summary)
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_eigen(args) -> int:
    prob = _problem(args)
    notes = []
    sturm = shooting = None
    if args.method in ("sturm", "both"):
        sturm = eigenvalues_bisection(assemble_operator(prob), args.tol)
    if args.method in ("shooting", "both"):
        try:
            shooting = eigenvalues_shooting(prob, args.tol)
        except BracketError as exc:
            notes.append(f"shooting failed: {exc}; falling back to Sturm bisection")
            if sturm is None:
                sturm = eigenvalues_bisection(assemble_operator(prob), args.tol)
    values = sturm if sturm is not None else shooting
    method = "sturm_bisection" if sturm is not None else "shooting"

    summary = {"method": args.method, "n": len(values), "notes": notes}
    if sturm is not None and shooting is not None:
        summary["shooting"] = shooting
        summary["max_deviation"] = max(abs(s - t) for s, t in zip(sturm, shooting))
    outside = [j for j, lam in enumerate(values, 1) if not 0.0 <= lam <= 4.0]
    summary["outside_disc"] = outside

    header = ["index", "lambda"]
    rows = [[j, lam] for j, lam in enumerate(values, 1)]
    if args.vectors or args.method == "both":
        pairs = [eigenvector(prob, lam, method) for lam in values]
        if len(pairs) > 1:
            vecs = np.array([ep.vector.values for ep in pairs])
            w = prob.coeff.r.window(prob.a, prob.b)
            gram = (vecs * w) @ vecs.T
            summary["max_orthogonality"] = float(np.max(np.abs(gram - np.diag(np.diag(gram)))))
        else:
            summary["max_orthogonality"] = 0.0
        summary["max_boundary_defect"] = max(ep.defect for ep in pairs)
        if args.vectors:
            header += [f"x_{n}" for n in range(prob.a, prob.b + 1)]
            rows = [row + ep.vector.values.tolist() for row, ep in zip(rows, pairs)]
    _write(args, header, rows, summary)
    return EXIT_OK


def cmd_identity_check(args) -> int:
    which = ["casoratian", "sbp", "telescope"] if args.which == "all" else [args.which]
    q = None
    if args.q is not None:
        try:
            q = parse_potential(args.q)
        except DomainError as exc:
            raise UsageError(str(exc)) from None
    results = []
    for name in which:
        if name == "casoratian":
            results += casoratian_suite(args.trials, args.seed, args.steps, args.tol, args.lam, q)
        elif name == "sbp":
            results += sbp_suite(args.trials, args.seed)
        else:
            results += telescope_suite(args.trials, args.seed)
    status = {
        name: "PASS" if all(r.passed for r in results if r.suite == name) else "FAIL"
        for name in which
    }
    header = ["identity", "trial", "deviation", "tol", "pass"]
    rows = [[r.suite, r.trial, r.deviation, r.tol, r.passed] for r in results]
    _write(args, header, rows, {"status": status})
    return EXIT_OK if all(v == "PASS" for v in status.values()) else EXIT_NUMERIC


def cmd_scan(args) -> int:
    try:
        families = [parse_potential(s) for s in (args.q_family or ["const:0"])]
        config = ScanConfig(
            lambda_grid=args.lambda_grid,
            h_grid=args.h_grid or (),
            N=args.N,
            q_families=families,
            stabilization_ratio=args.stab_ratio,
        )
        if args.mode == "y-bound":
            report = scan_y_bound(config, args.jobs)
        else:
            report = scan_h_growth(config, args.jobs)
    except DomainError as exc:
        raise UsageError(str(exc)) from None

    rows = [list(asdict(row).values()) for row in report.rows]
    row_type = report.rows[0].__class__
    header = [("lambda" if f == "lam" else f) for f in row_type.__dataclass_fields__]
    warnings = sorted({row.lam for row in report.rows if row.outside_disc})
    summary = {"mode": args.mode, **report.counts(), "outside_disc": warnings}

    man = manifest(args)
    if args.format == "json":
        _emit(render_json(man, header, rows, summary), args.out)
        return EXIT_OK
    _emit(render_csv(man, header, rows), args.out)
    doc = json.dumps(_json_safe({"schema_version": SCHEMA_VERSION, "manifest": man, "summary": summary}), indent=2) + "\n"
    summary_path = args.summary
    if summary_path is None and args.out is not None:
        summary_path = str(Path(args.out).with_suffix(".summary.json"))
    if summary_path is None:
        sys.stderr.write(doc)
    else:
        _emit(doc, summary_path)
    return EXIT_OK


def _add_io(sp, jobs: bool = False) -> None:
    sp.add_argument("--format", choices=["csv", "json"], default="csv")
    sp.add_argument("--out", default=None, help="output file (default: stdout)")
    if jobs:
        sp.add_argument("--jobs", type=_positive(int), default=None,
                        help="worker processes (default: DSLV_JOBS or CPU count)")


def _add_problem(sp, need_k: bool) -> None:
    sp.add_argument("--a", type=int, default=1, help="left endpoint (default 1)")
    sp.add_argument("--b", type=int, required=True, help="right endpoint")
    sp.add_argument("--h", type=float, default=0.0, help="left parameter: x(a-1) + h x(a) = 0")
    sp.add_argument("--k", type=float, default=0.0, required=need_k,
                    help="right parameter: x(b+1) + k x(b) = 0")
    sp.add_argument("--q", default="const:0", help="potential spec (default const:0)")
    sp.add_argument("--p", default="const:1", help="p spec, positive (default const:1)")
    sp.add_argument("--r", default="const:1", help="weight spec, positive (default const:1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dslv", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"dslv {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("solve", help="march the recurrence from initial data")
    _add_problem(sp, need_k=False)
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--init", choices=["x", "y", "s"], default="x",
                    help="x: (-h, 1), y: (1, 0), s: (0, 1) at (a-1, a)")
    sp.add_argument("--horizon", type=int, default=None, help="last index (default b+1)")
    _add_io(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("repr-check", help="closed-form representations vs the recurrence")
    sp.add_argument("--trials", type=_positive(int), default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--lambda-set", type=_float_list, default=[0.5, 1.7, 2.5, 3.5])
    sp.add_argument("--h-set", type=_float_list, default=[-2.0, 0.0, 1.0])
    sp.add_argument("--N", type=int, default=200)
    sp.add_argument("--tol", type=_positive(float), default=1e-9)
    sp.add_argument("--q", default=None, help="fixed potential spec (default: seeded random in [-1, 1])")
    _add_io(sp, jobs=True)
    sp.set_defaults(func=cmd_repr_check)

    sp = sub.add_parser("eigen", help="eigenvalues of the boundary problem")
    _add_problem(sp, need_k=False)
    sp.add_argument("--method", choices=["sturm", "shooting", "both"], default="both")
    sp.add_argument("--tol", type=_positive(float), default=1e-10)
    sp.add_argument("--vectors", action="store_true", help="also write normalized eigenvectors")
    _add_io(sp)
    sp.set_defaults(func=cmd_eigen)

    sp = sub.add_parser("identity-check", help="Casoratian, summation-by-parts and telescoping suites")
    sp.add_argument("--which", choices=["casoratian", "sbp", "telescope", "all"], default="all")
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--steps", type=_positive(int), default=1000, help="Casoratian horizon")
    sp.add_argument("--lambda", dest="lam", type=float, default=None,
                    help="fixed lambda for the Casoratian suite (default: random)")
    sp.add_argument("--q", default=None, help="fixed potential for the Casoratian suite")
    sp.add_argument("--tol", type=_positive(float), default=1e-10)
    _add_io(sp)
    sp.set_defaults(func=cmd_identity_check)

    sp = sub.add_parser("scan", help="growth-estimate scans over lambda, h and q families")
    sp.add_argument("--mode", choices=["h-growth", "y-bound"], required=True)
    sp.add_argument("--lambda-grid", type=_float_list, required=True)
    sp.add_argument("--h-grid", type=_float_list, default=None)
    sp.add_argument("--N", type=int, default=10_000)
    sp.add_argument("--q-family", action="append", default=None,
                    help="potential spec; repeat for several families (default const:0)")
    sp.add_argument("--stab-ratio", type=_positive(float), default=1.05)
    sp.add_argument("--summary", default=None,
                    help="summary JSON path (default: <out>.summary.json)")
    _add_io(sp, jobs=True)
    sp.set_defaults(func=cmd_scan)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "trials", 1) < 1:
        parser.error("--trials must be at least 1")
    if hasattr(args, "jobs") and args.jobs is None:
        try:
            args.jobs = default_jobs()
        except DomainError as exc:
            parser.error(str(exc))
    try:
        return args.func(args)
    except UsageError as exc:
        parser.exit(EXIT_USAGE, f"dslv {args.command}: error: {exc}\n")
    except (NumericalFailure, DomainError, FloatingPointError) as exc:
        sys.stderr.write(f"dslv {args.command}: numeric failure: {exc}\n")
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

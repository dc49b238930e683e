"""Command-line front end: ``freelyap <command> [options]``.

Exit codes: 0 success, 2 input or domain error, 3 gate failure.
"""

import argparse
import json
import math
import os
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import io as fio
from .acceptance import CRITERIA, run_all
from .errors import DomainError, PreconditionError
from .lyapunov import (default_newman_grid, default_t_grid, exponent_distribution,
                       fk_determinant, lyapunov_profile, newman_table)
from .rmt_oracle import EnsembleConfig, analytic_marginal, run_mc
from .spectral_measures import (MpParameters, SpectralMeasure, atomic_measure, point_mass)
from .transforms import evaluate

EXIT_OK, EXIT_INPUT, EXIT_GATE = 0, 2, 3


def _diag(msg: str) -> None:
    if sys.stderr.isatty() and "NO_COLOR" not in os.environ:
        msg = f"\033[31m{msg}\033[0m"
    print(msg, file=sys.stderr)


class _Run:
    """Output directory plus the manifest that lists every file written."""

    def __init__(self, args, argv: List[str], name: str):
        self.dir = Path(args.out)
        self.dir.mkdir(parents=True, exist_ok=True)
        cfg = {k: v for k, v in vars(args).items() if k not in ("func", "out")}
        self.manifest = fio.RunManifest(" ".join(["freelyap"] + argv), fio.content_hash(cfg))
        self.name = name

    def write(self, filename: str, text: str) -> Path:
        path = self.dir / filename
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        self.manifest.add(path)
        return path

    def close(self) -> None:
        path = self.dir / f"{self.name}.manifest.json"
        path.write_text(fio.dumps(self.manifest.to_dict()), encoding="utf-8")


def _load(args) -> SpectralMeasure:
    return fio.load_measure(args.input)


def _parse_atoms(text: str):
    atoms = []
    for item in text.split(","):
        x, m = item.split(":")
        atoms.append((float(x), float(m)))
    return atoms


# -- subcommands ----------------------------------------------------------------

def cmd_measure(args, argv):
    if args.mp is not None:
        mu = MpParameters(args.mp, args.t).measure(n_nodes=args.nodes)
    elif args.atoms is not None:
        try:
            mu = atomic_measure(_parse_atoms(args.atoms))
        except ValueError as exc:
            raise DomainError(f"bad --atoms value {args.atoms!r}: {exc}") from exc
    elif args.point is not None:
        mu = point_mass(args.point)
    elif args.input is not None:
        mu = _load(args)
    else:
        raise DomainError("give one of --mp, --atoms, --point or -i")
    text = fio.dumps(fio.measure_to_dict(mu))
    if args.out is None:
        sys.stdout.write(text)
        return EXIT_OK
    out = Path(args.out)
    if out.suffix != ".json":
        out.mkdir(parents=True, exist_ok=True)
        out = out / "measure.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")
    man = fio.RunManifest(" ".join(["freelyap"] + argv), fio.content_hash(text))
    man.add(out)
    out.with_suffix(".manifest.json").write_text(fio.dumps(man.to_dict()), encoding="utf-8")
    return EXIT_OK


def cmd_transform(args, argv):
    mu = _load(args)
    pts = [evaluate(mu, args.kind, a) for a in args.at]
    text = fio.csv_text(["argument", "value", "achieved_error"],
                        [[p.argument for p in pts], [p.value for p in pts],
                         [p.achieved_error for p in pts]])
    run = _Run(args, argv, "transform")
    if args.format == "json":
        run.write("transform.json", fio.dumps({"schema_version": fio.SCHEMA_VERSION, "kind": args.kind,
                                               "points": [vars(p) for p in pts]}))
    else:
        run.write("transform.csv", text)
    run.close()
    sys.stdout.write(text)
    return EXIT_OK


def cmd_lyapunov(args, argv):
    mu = _load(args)
    t_grid = default_t_grid(mu.rank, args.points) if args.points else None
    prof = lyapunov_profile(mu, t_grid)
    dist = exponent_distribution(mu) if args.dist else None
    run = _Run(args, argv, "lyapunov")
    if args.format == "json":
        payload = {"t": prof.t_grid, "F": prof.F_values, "f": prof.f_values,
                   "rank": prof.rank_r, "label": prof.source_label}
        if dist is not None:
            payload["distribution"] = {"x": dist.x_grid, "cdf": dist.cdf_values}
        run.write("profile.json", fio.dumps(fio.envelope(payload, mu, {"quad": 1e-13, "root": 1e-14})))
    else:
        run.write("profile.csv", fio.profile_csv(prof))
        if dist is not None:
            run.write("distribution.csv", fio.distribution_csv(dist))
    if args.format == "svg":
        from .plotting import distribution_svg, profile_svg
        run.write("profile.svg", profile_svg(prof))
        if dist is not None:
            run.write("distribution.svg", distribution_svg(dist, label=mu.label))
    run.close()
    return EXIT_OK


def cmd_det(args, argv):
    mu = _load(args)
    methods = ["definition", "s_integral"] if args.method == "both" else [args.method]
    results = [fk_determinant(mu, m) for m in methods]
    run = _Run(args, argv, "det")
    rows = [{"method": r.method, "log_det": r.log_det, "det": math.exp(r.log_det),
             "achieved_error": r.achieved_error} for r in results]
    run.write("det.json", fio.dumps({"schema_version": fio.SCHEMA_VERSION, "results": rows}))
    run.close()
    for row in rows:
        print(f"{row['method']}: det = {row['det']!r} (log det = {row['log_det']!r})")
    if len(results) == 2:
        a, b = (r.value for r in results)
        rel = abs(a - b) / max(abs(b), 1e-300)
        tol = args.tol if args.tol is not None else 1e-6
        print(f"relative difference: {rel:.3e}")
        if rel > tol:
            _diag(f"determinant methods disagree: {rel:.3e} > {tol:g}")
            return EXIT_GATE
    return EXIT_OK


def cmd_newman(args, argv):
    mu = _load(args)
    if args.xmin is not None or args.xmax is not None:
        base = default_newman_grid(mu, args.points)
        lo = args.xmin if args.xmin is not None else base[0]
        hi = args.xmax if args.xmax is not None else base[-1]
        grid = np.linspace(lo, hi, args.points)
    else:
        grid = default_newman_grid(mu, args.points)
    table = newman_table(mu, grid)
    run = _Run(args, argv, "newman")
    run.write("newman.csv", fio.csv_text(["x", "H", "F_log_x", "abs_diff"], table.T))
    if args.format == "svg":
        from .plotting import newman_svg
        run.write("newman.svg", newman_svg(table))
    run.close()
    worst = float(np.max(table[:, 3]))
    print(f"max |H(x) - CDF(log x)| = {worst:.3e}")
    tol = args.tol if args.tol is not None else 1e-6
    if mu.zero_mass == 0 and worst > tol:
        _diag(f"consistency gate failed: {worst:.3e} > {tol:g}")
        return EXIT_GATE
    return EXIT_OK


def cmd_mc(args, argv):
    try:
        d = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DomainError(f"{args.config}: invalid JSON ({exc})") from exc
    if not isinstance(d, dict):
        raise DomainError("config must be a JSON object")
    if args.seed is not None:
        d["seed"] = args.seed
    if args.workers is not None:
        d["workers"] = args.workers
    try:
        cfg = EnsembleConfig.from_dict(d)
    except TypeError as exc:
        raise DomainError(f"invalid config: {exc}") from exc
    report = run_mc(cfg)
    run = _Run(args, argv, "mc")
    body = {"schema_version": fio.SCHEMA_VERSION, "config": cfg.to_dict(), "report": report.to_dict()}
    run.write("mc_report.json", fio.dumps(body))
    exps = report.empirical_exponents
    ana = analytic_marginal(cfg.measure, cfg.N)
    with np.errstate(invalid="ignore"):
        err = np.abs(exps - ana)
    k = np.arange(1, cfg.N + 1)
    run.write("mc_exponents.csv", fio.csv_text(["index", "k_over_N", "empirical", "analytic", "abs_error"],
                                               [k, k / cfg.N, exps, ana, err]))
    if args.format == "svg":
        from .plotting import distribution_svg
        dist = exponent_distribution(cfg.measure)
        run.write("mc_overlay.svg", distribution_svg(dist, exps, cfg.measure.label))
    run.close()
    if args.timing:
        (run.dir / "timing.json").write_text(fio.dumps({"wall_time": report.wall_time}), encoding="utf-8")
    print(f"ks_distance = {report.ks_distance:.4f}", end="")
    for t, v in report.compression_ks.items():
        print(f", compression_ks[{t:g}] = {v:.4f}", end="")
    for t, v in report.growth_rates.items():
        print(f", growth[{t:g}] = {v:.5f}", end="")
    print()
    print(f"wall time {report.wall_time:.1f}s", file=sys.stderr)
    gate = args.tol if args.tol is not None else cfg.ks_gate
    if not report.gate(gate):
        _diag(f"KS gate {gate:g} failed")
        return EXIT_GATE
    return EXIT_OK


def cmd_verify(args, argv):
    ids = args.only or list(CRITERIA)
    unknown = [i for i in ids if i not in CRITERIA]
    if unknown:
        raise DomainError(f"unknown criteria {unknown}")
    seed = args.seed if args.seed is not None else 0
    results = run_all(ids, seed=seed, echo=lambda s: print(s, flush=True))
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    return EXIT_OK if passed == len(results) else EXIT_GATE


# -- parser -----------------------------------------------------------------------

def _common(out_default: Optional[str] = "."):
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("-o", "--out", default=out_default, help="output directory")
    p.add_argument("--seed", type=int, default=None, help="unsigned 64-bit seed")
    p.add_argument("--tol", type=float, default=None, help="gate tolerance")
    p.add_argument("--format", choices=["csv", "json", "svg"], default="csv")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="freelyap", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common()

    p = sub.add_parser("measure", parents=[_common(None)], help="build a measure JSON file")
    p.add_argument("--mp", type=float, help="Marchenko-Pastur rate lambda")
    p.add_argument("--t", type=float, default=None, help="free compression dimension")
    p.add_argument("--atoms", help="atoms as x:mass,x:mass,...")
    p.add_argument("--point", type=float, help="point mass location")
    p.add_argument("-i", "--input", help="re-validate an existing measure file")
    p.add_argument("--nodes", type=int, default=257)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("transform", parents=[common], help="evaluate G, psi, psi^-1 or S")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--kind", choices=["cauchy", "psi", "psi_inverse", "s_transform"], required=True)
    p.add_argument("--at", type=float, nargs="+", required=True)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("lyapunov", parents=[common], help="F, f and the exponent distribution")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--dist", action="store_true", help="also tabulate the exponent CDF")
    p.add_argument("--points", type=int, default=None, help="interior t points")
    p.set_defaults(func=cmd_lyapunov)

    p = sub.add_parser("det", parents=[common], help="Fuglede-Kadison determinant")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--method", choices=["definition", "s_integral", "both"], default="definition")
    p.set_defaults(func=cmd_det)

    p = sub.add_parser("newman", parents=[common], help="solve the integral equation for H(x)")
    p.add_argument("-i", "--input", required=True)
    p.add_argument("--points", type=int, default=50)
    p.add_argument("--xmin", type=float)
    p.add_argument("--xmax", type=float)
    p.set_defaults(func=cmd_newman)

    p = sub.add_parser("mc", parents=[common], help="finite-N Monte Carlo oracle")
    p.add_argument("-c", "--config", required=True)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--timing", action="store_true", help="write timing.json (not hashed)")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("verify", parents=[common], help="run the acceptance criteria")
    p.add_argument("--only", nargs="+", help="criterion ids, e.g. AC1 AC9")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    if args.seed is not None and not 0 <= args.seed < 2 ** 64:
        _diag("error: --seed must be an unsigned 64-bit integer")
        return EXIT_INPUT
    try:
        return args.func(args, argv)
    except (DomainError, PreconditionError) as exc:
        _diag(f"error: {exc}")
        return EXIT_INPUT
    except (OSError, ValueError) as exc:
        _diag(f"input error: {exc}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

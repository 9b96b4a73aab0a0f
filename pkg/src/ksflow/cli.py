"""Command-line interface.

Subcommands:
  simulate        run the radial flow from a config file with monitors
  verify-lifted   dispatch the R^6 identity suites
  probe           run the convolution/interpolation inequality probes
  compare-blowup  semilinear-heat twin versus the gamma = -3 flow
  plot            render CSV columns to a deterministic SVG line chart

Exit status: 0 when every enabled assertion passes, 1 on assertion failure
(with the verdict table printed), 2 on usage/config errors.
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import ConfigError, load_config
from .report import all_passed, fmt, verdict_block, write_csv, write_run_report


def _print(quiet, *args):
    if not quiet:
        print(*args)


def cmd_simulate(args) -> int:
    from .harness import simulate

    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    out_dir = args.out or cfg.out
    ok, verdicts = simulate(cfg, out_dir)
    for line in verdict_block(verdicts):
        _print(args.quiet, line)
    _print(args.quiet, f"report written to {out_dir}")
    return 0 if ok else 1


def cmd_verify_lifted(args) -> int:
    from .lifted.suites import SUITES

    names = args.suite or list(SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        print(f"unknown suite(s): {', '.join(unknown)}", file=sys.stderr)
        return 2
    rows = []
    for name in names:
        kwargs = {"seed": args.seed}
        fn = SUITES[name]
        if name in ("maxwell", "derivatives", "dissipation", "marginal"):
            kwargs["n_samples"] = args.samples
        if args.gamma and name in ("commutators", "qks", "derivatives", "dissipation", "marginal"):
            kwargs["gammas"] = tuple(args.gamma)
        rows += fn(**kwargs)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        write_csv(os.path.join(args.out, "lifted.csv"),
                  ("suite", "identity", "lhs", "rhs", "stderr", "verdict"), rows)
    n_fail = sum(r["verdict"] == "fail" for r in rows)
    for r in rows:
        _print(args.quiet,
               f"{r['suite']:12s} {r['identity']:55s} "
               f"lhs={fmt(r['lhs'])} rhs={fmt(r['rhs'])} "
               f"stderr={fmt(r['stderr'])} {r['verdict']}")
    _print(args.quiet, f"{len(rows)} checks, {n_fail} failures")
    return 0 if n_fail == 0 else 1


def cmd_probe(args) -> int:
    from .probes import PROBE_LEMMAS, ProbeError, probe_inequality

    lemmas = args.lemma or list(PROBE_LEMMAS)
    rows = []
    verdicts = []
    try:
        for lemma in lemmas:
            stats = probe_inequality(lemma, None, family_seed=args.seed,
                                     n_members=args.members)
            rows += stats.rows
            verdict = {
                "monitor": f"probe_{lemma}",
                "passed": stats.passed,
                "max_ratio": stats.max_ratio,
                "scaling_deviation": stats.scaling_deviation,
            }
            # echo the validated hypothesis exponents into the report
            verdict.update({f"param_{k}": v for k, v in stats.params.items()})
            verdicts.append(verdict)
    except ProbeError as exc:
        print(f"probe rejected: {exc}", file=sys.stderr)
        return 2
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        write_csv(os.path.join(args.out, "probes.csv"),
                  ("lemma", "seed", "lambda", "lhs", "rhs", "ratio"), rows)
    for line in verdict_block(verdicts):
        _print(args.quiet, line)
    return 0 if all_passed(verdicts) else 1


def cmd_compare_blowup(args) -> int:
    from .harness import blowup_verdicts, compare_blowup

    result = compare_blowup(args.amplitude, sigma=args.sigma,
                            horizon=args.horizon, dt_list=tuple(args.dt))
    verdicts = blowup_verdicts(result)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        rows = []
        for dt, curve in zip(args.dt, result["heat_curves"]):
            for t, m in curve:
                rows.append({"model": f"semilinear_dt={dt:g}", "t": t, "max": m})
        for t, m in result["ks_curve"]:
            rows.append({"model": "landau_gamma-3", "t": t, "max": m})
        write_csv(os.path.join(args.out, "blowup.csv"), ("model", "t", "max"), rows)
        write_run_report(os.path.join(args.out, "blowup-report.txt"),
                         [f"amplitude = {args.amplitude!r}",
                          f"sigma = {args.sigma!r}",
                          f"horizon = {args.horizon!r}",
                          "dt = " + ", ".join(fmt(d) for d in args.dt)],
                         verdicts, ["blowup.csv"])
    for line in verdict_block(verdicts):
        _print(args.quiet, line)
    _print(args.quiet, f"detector times: {result['detector_times']}")
    return 0 if all_passed(verdicts) else 1


def cmd_plot(args) -> int:
    from .svgplot import write_svg

    with open(args.csv, "r", encoding="ascii") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines:
        write_svg(args.out_file, [], title=os.path.basename(args.csv))
        return 0
    header = lines[0].split(",")
    wanted = args.columns.split(",")
    missing = [c for c in wanted if c not in header]
    if missing:
        print(f"column(s) not in CSV: {', '.join(missing)}", file=sys.stderr)
        return 2
    x_name = args.x
    if x_name not in header:
        print(f"x column {x_name!r} not in CSV", file=sys.stderr)
        return 2
    data = {name: [] for name in header}
    for ln in lines[1:]:
        for name, cell in zip(header, ln.split(",")):
            data[name].append(cell)

    def as_floats(cells):
        return [float(c) for c in cells]

    xs = as_floats(data[x_name])
    series = [(c, xs, as_floats(data[c])) for c in wanted]
    write_svg(args.out_file, series, title=os.path.basename(args.csv),
              log_y=args.log_y)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ksflow",
                                description="isotropic Landau flow laboratory")
    sub = p.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a configured radial flow")
    sim.add_argument("--config", required=True)
    sim.add_argument("--out", default=None)
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--quiet", action="store_true")
    sim.set_defaults(fn=cmd_simulate)

    ver = sub.add_parser("verify-lifted", help="run R^6 identity suites")
    ver.add_argument("--suite", action="append",
                     help="suite name, repeatable (default: all)")
    ver.add_argument("--gamma", type=float, action="append",
                     help="power-law exponent, repeatable")
    ver.add_argument("--samples", type=int, default=1 << 20)
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--out", default=None)
    ver.add_argument("--quiet", action="store_true")
    ver.set_defaults(fn=cmd_verify_lifted)

    prb = sub.add_parser("probe", help="convolution/interpolation inequality probes")
    prb.add_argument("--lemma", action="append",
                     help="A1|A3|A4|A5|A7, repeatable (default: all)")
    prb.add_argument("--members", type=int, default=64)
    prb.add_argument("--seed", type=int, default=0)
    prb.add_argument("--out", default=None)
    prb.add_argument("--quiet", action="store_true")
    prb.set_defaults(fn=cmd_probe)

    cmp = sub.add_parser("compare-blowup", help="semilinear twin experiment")
    cmp.add_argument("--amplitude", type=float, default=50.0)
    cmp.add_argument("--sigma", type=float, default=1.0)
    cmp.add_argument("--horizon", type=float, default=0.1)
    cmp.add_argument("--dt", type=float, action="append", default=None)
    cmp.add_argument("--out", default=None)
    cmp.add_argument("--quiet", action="store_true")
    cmp.set_defaults(fn=cmd_compare_blowup)

    plt = sub.add_parser("plot", help="CSV columns to SVG")
    plt.add_argument("--csv", required=True)
    plt.add_argument("--columns", required=True,
                     help="comma-separated y columns")
    plt.add_argument("--x", default="t")
    plt.add_argument("--out-file", required=True)
    plt.add_argument("--log-y", action="store_true")
    plt.set_defaults(fn=cmd_plot)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) == "compare-blowup" and args.dt is None:
        args.dt = [1e-4, 1e-5]
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"missing file: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

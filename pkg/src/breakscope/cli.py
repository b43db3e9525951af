"""Command-line interface.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
"""

import argparse
import logging
import os
import sys
import warnings

from .estimator import QMLBreakDetector
from .exceptions import DataError, NumericalError
from .io import detection_report, load_csv, metrics_json, write_json, write_metrics_csv
from .simulate import SCHEMES, SimulationSpec, monte_carlo

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 2, 3, 4

log = logging.getLogger("breakscope")


def _build_parser():
    parser = argparse.ArgumentParser(prog="breakscope", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    d = sub.add_parser("detect", help="detect and classify breaks in a CSV panel")
    d.add_argument("path", help="CSV file, periods as rows and series as columns")
    m = d.add_mutually_exclusive_group()
    m.add_argument("--breaks", type=int, help="known number of breaks")
    m.add_argument("--max-breaks", type=int, default=5,
                   help="largest break count considered by the criterion (default 5)")
    f = d.add_mutually_exclusive_group()
    f.add_argument("--factors", type=int, help="number of pseudo-factors")
    f.add_argument("--max-factors", type=int, default=12,
                   help="upper bound for the IC2 factor count (default 12)")
    s = d.add_mutually_exclusive_group()
    s.add_argument("--min-spacing", type=int, default=20, help="minimum regime length (default 20)")
    s.add_argument("--eta", type=float, help="minimum regime length as a fraction of T")
    d.add_argument("--standardize", dest="standardize", action="store_true", default=True)
    d.add_argument("--no-standardize", dest="standardize", action="store_false")
    d.add_argument("--no-header", dest="has_header", action="store_false")
    d.add_argument("--date-column", default="auto",
                   help="name or 0-based index of the period label column; by default a leading "
                        "column headed date, period, time or sasdate is used")
    d.add_argument("--no-date-column", dest="date_column", action="store_const", const=None)
    d.add_argument("--impute-mean", action="store_true",
                   help="fill missing cells with column means (prints a warning)")
    d.add_argument("--transpose", action="store_true", help="file has series as rows")
    d.add_argument("--no-classify", dest="classify", action="store_false")
    d.add_argument("--seed", type=int, default=0, help="reserved; detection is deterministic")
    d.add_argument("-o", "--output", default="report.json", help="JSON report path")

    sim = sub.add_parser("simulate", help="Monte Carlo accuracy of the break estimator")
    sim.add_argument("--scheme", choices=SCHEMES, required=True)
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--t", type=int, required=True)
    sim.add_argument("--m0", type=int, default=2)
    sim.add_argument("--r0", type=int)
    sim.add_argument("--rho", type=float, default=0.0)
    sim.add_argument("--alpha", type=float, default=0.0)
    sim.add_argument("--beta", type=float, default=0.0)
    sim.add_argument("--b", type=float, default=1.0)
    sim.add_argument("--noise-scale", type=float, default=1.0)
    sim.add_argument("--reps", type=int, default=200)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--select", action="store_true",
                     help="choose the number of breaks by the information criterion")
    sim.add_argument("--max-breaks", type=int, default=5)
    sim.add_argument("--min-spacing", type=int, help="default max(r + 2, ceil(T / 10))")
    sim.add_argument("--estimate-factors", action="store_true",
                     help="estimate r by IC2 (r_max 12) in every replication")
    sim.add_argument("--jobs", type=int, help="worker processes (default $BREAKSCOPE_NUM_THREADS or 1)")
    sim.add_argument("--output-dir", default=".")
    return parser


def _detect(args):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        panel = load_csv(args.path, has_header=args.has_header, date_column=args.date_column,
                         impute_mean=args.impute_mean, transpose=args.transpose)
        det = QMLBreakDetector(n_breaks=args.breaks,
                               max_breaks=args.max_breaks,
                               n_factors=args.factors, max_factors=args.max_factors,
                               min_spacing=args.min_spacing, eta=args.eta,
                               standardize=args.standardize, classify=args.classify)
        det.fit(panel)
    report = detection_report(det)
    extra = [str(w.message) for w in caught if str(w.message) not in report["diagnostics"]["warnings"]]
    report["diagnostics"]["warnings"] = extra + report["diagnostics"]["warnings"]
    for msg in extra:
        print(f"warning: {msg}", file=sys.stderr)
    write_json(report, args.output)

    print(f"panel: T={report['T']} N={report['N']}  pseudo-factors r={report['n_factors']}"
          f"  min spacing h={report['min_spacing']}")
    how = "selected by IC" if report["m_selected"] else "given"
    print(f"breaks ({how}): {report['m_hat']}   rho_hat={report['rho_hat']:.4f}")
    if report["ic_per_m"]:
        print("   m        U(m)     penalty       IC(m)")
        for k in sorted(report["ic_per_m"], key=int):
            print(f"{k:>4} {report['objective_per_m'][k]:>11.3f} {report['penalty_per_m'][k]:>11.3f}"
                  f" {report['ic_per_m'][k]:>11.3f}")
    types = {bt["index"]: bt for bt in report["break_types"]}
    for bp in report["breakpoints"]:
        line = f"  break {bp['index']}: period {bp['period']} ({bp['label']})"
        bt = types.get(bp["index"])
        if bt:
            line += (f"  r_left={bt['r_left']} r_right={bt['r_right']} r_combined={bt['r_combined']}"
                     f"  {bt['label']}/{bt['subtype']}")
        print(line)
    if report["regime_factor_counts"] is not None:
        print(f"regime factor counts: {report['regime_factor_counts']}")
    print(f"report written to {args.output}")
    return EXIT_OK


def _simulate(args):
    spec = SimulationSpec(N=args.n, T=args.t, scheme=args.scheme, m0=args.m0, r0=args.r0,
                          rho=args.rho, alpha=args.alpha, beta=args.beta, b=args.b,
                          seed=args.seed, noise_scale=args.noise_scale)
    table = monte_carlo(spec, args.reps, know_m=not args.select, m_max=args.max_breaks,
                        h=args.min_spacing, estimate_r=args.estimate_factors, n_jobs=args.jobs)
    os.makedirs(args.output_dir, exist_ok=True)
    csv_path = os.path.join(args.output_dir, "metrics.csv")
    json_path = os.path.join(args.output_dir, "metrics.json")
    write_metrics_csv(table.rows(args.reps), csv_path)
    write_json(metrics_json([table], args.reps), json_path)
    print(f"{spec.scheme} N={spec.N} T={spec.T} rho={spec.rho} alpha={spec.alpha} "
          f"beta={spec.beta} reps={args.reps}")
    for j, (r, a) in enumerate(zip(table.rmse, table.mae), 1):
        print(f"  break {j}: RMSE={r:.3f} MAE={a:.3f}")
    if table.detection_rate is not None:
        print(f"  detection rate: {table.detection_rate:.3f}")
    print(f"wrote {csv_path} and {json_path}")
    return EXIT_OK


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = _detect if args.command == "detect" else _simulate
    try:
        return handler(args)
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (DataError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Exit codes: 0 clean, 1 bound violation in ideal mode, 2 input or convergence error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import density, harness, tomography
from .channels import monitoring, monitoring_schedule, quantize, werner_schedule
from .density import Subsystem
from .quantifiers import quantify
from .states import ObservableBasis, parse_state

EXIT_OK, EXIT_VIOLATION, EXIT_ERROR = 0, 1, 2

log = logging.getLogger("weakrealism")


def num(x) -> str:
    if x is None:
        return ""
    return format(float(x), ".12g")


def _write_json(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=1)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def cmd_prepare(args) -> int:
    rho = harness.prepare_state(args.mu, args.total, args.granularity)
    _write_json(density.to_json(rho), args.out)
    return EXIT_OK


def cmd_monitor(args) -> int:
    rho = parse_state(args.state)
    _write_json(density.to_json(monitoring(rho, args.basis, args.eps, args.sub)), args.out)
    return EXIT_OK


def cmd_quantify(args) -> int:
    rho = density.density_matrix(parse_state(args.state))
    mu = args.mu
    if mu is None and args.state.startswith("werner:"):
        mu = float(args.state.split(":", 1)[1])
    report = quantify(rho, args.basis, args.eps, args.sub, minimize=not args.no_minimize, mu=mu)
    if not args.no_minimize and not report.extras["converged"]:
        print("error: basis minimization did not converge", file=sys.stderr)
        return EXIT_ERROR
    row = report.csv_row()
    if args.csv:
        print(",".join(report.CSV_FIELDS))
        print(",".join(num(row[k]) for k in report.CSV_FIELDS))
    else:
        for k in report.CSV_FIELDS:
            print(f"{k}: {num(row[k])}")
        print(f"local_coherence_variation: {num(report.local_coherence_variation)}")
    return EXIT_OK


def cmd_schedule(args) -> int:
    sched = werner_schedule(args.mu, args.total) if args.mu is not None else monitoring_schedule(args.eps, args.total)
    obj = sched.to_json()
    if args.granularity:
        sched, err = quantize(sched, args.granularity)
        obj = sched.to_json()
        obj["max_weight_error"] = err
    _write_json(obj, args.out)
    return EXIT_OK


def cmd_tomo_simulate(args) -> int:
    rho = parse_state(args.state)
    table = tomography.simulate_counts(rho, exposure=args.exposure, rate=args.rate, seed=args.seed)
    table.to_csv(args.out)
    print(f"wrote {len(table.settings)} settings, {int(table.total)} counts to {args.out}")
    return EXIT_OK


def cmd_tomo_reconstruct(args) -> int:
    table = tomography.CountsTable.from_csv(args.counts, rate=args.rate)
    res = tomography.reconstruct(table, args.method)
    if not res.converged:
        print(f"error: {args.method} reconstruction did not converge in {res.iterations} iterations",
              file=sys.stderr)
        return EXIT_ERROR
    _write_json(density.to_json(res.rho_hat), args.out)
    if args.reference:
        print(f"fidelity: {num(density.fidelity(res.rho_hat, parse_state(args.reference)))}",
              file=sys.stderr if not args.out else sys.stdout)
    return EXIT_OK


def _report_exit(report: harness.BoundsReport) -> int:
    for v in report.violations:
        print(f"violation: mu={num(v.mu)} eps={num(v.eps)} {v.method} slack={num(v.slack)} err={num(v.err)}")
    for r in report.closed_form_mismatches:
        print(f"closed-form mismatch: mu={num(r.mu)} eps={num(r.eps)} {r.method} "
              f"value={num(r.value)} closed_form={num(r.closed_form)}")
    print(f"{report.mode}: {len(report.checks)} rows checked, {len(report.violations)} bound violations, "
          f"{len(report.closed_form_mismatches)} closed-form mismatches")
    return EXIT_OK if report.ok else EXIT_VIOLATION


def cmd_sweep(args) -> int:
    overrides = dict(mode=args.mode, seed=args.seed, n_bootstrap=args.n_bootstrap, workers=args.workers,
                     exposure_s=args.exposure, rate_hz=args.rate, granularity=args.granularity,
                     dataset_path=args.out, fidelity_path=args.fidelity_out)
    if args.config:
        cfg = harness.ExperimentConfig.from_file(args.config, **overrides)
    else:
        cfg = harness.ExperimentConfig(**{k: v for k, v in overrides.items() if v is not None})
    data = harness.run_sweep(cfg)
    out = cfg.dataset_path or "sweep.csv"
    fmt = args.format or ("json" if out.endswith(".json") else "csv")
    harness.emit(data, fmt, out)
    print(f"wrote {len(data.rows)} rows to {out}")
    if cfg.fidelity_path:
        fid = harness.fidelity_table(cfg)
        fpath = cfg.fidelity_path
        harness.emit(fid, "json" if fpath.endswith(".json") else "csv", fpath)
        print(f"wrote {len(fid.rows)} fidelity rows to {fpath}")
    return _report_exit(harness.verify_bounds(data))


def cmd_verify(args) -> int:
    data = harness.load_dataset(args.dataset, args.mode)
    if data.kind != "sweep":
        print("error: verify needs a sweep dataset", file=sys.stderr)
        return EXIT_ERROR
    return _report_exit(harness.verify_bounds(data))


def _add_monitor_args(p, eps_required=True):
    p.add_argument("--eps", type=float, required=eps_required, help="measurement strength in [0, 1]")
    p.add_argument("--basis", type=ObservableBasis.parse, default=ObservableBasis(),
                   help="measured direction as 'theta,phi' (radians) or x/y/z; default z")
    p.add_argument("--sub", type=Subsystem.parse, default=Subsystem.A, help="measured qubit, A or B")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="weakrealism", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="Werner state from the time-sliced depolarizing schedule")
    p.add_argument("--mu", type=float, required=True)
    p.add_argument("--total", type=float, default=16.0, help="acquisition time in seconds")
    p.add_argument("--granularity", type=float, default=None, help="quantize slices to this many seconds")
    p.add_argument("--out")
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("monitor", help="apply the monitoring map to a state")
    p.add_argument("--state", required=True, help="bell:<label>, werner:<mu> or a JSON state file")
    _add_monitor_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_monitor)

    p = sub.add_parser("quantify", help="realism, irrealism and discord quantifiers")
    p.add_argument("--state", required=True)
    _add_monitor_args(p)
    p.add_argument("--mu", type=float, default=None, help="label for the mu column")
    p.add_argument("--no-minimize", action="store_true", help="skip the basis minimizations")
    p.add_argument("--csv", action="store_true", help="print one CSV row with header")
    p.set_defaults(func=cmd_quantify)

    p = sub.add_parser("schedule", help="acquisition-time schedule for a preparation or monitoring map")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--mu", type=float)
    g.add_argument("--eps", type=float)
    p.add_argument("--total", type=float, default=16.0)
    p.add_argument("--granularity", type=float, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_schedule)

    tomo = sub.add_parser("tomo", help="simulate or reconstruct tomography counts")
    tsub = tomo.add_subparsers(dest="tomo_command", required=True)
    p = tsub.add_parser("simulate")
    p.add_argument("--state", required=True)
    p.add_argument("--exposure", type=float, default=16.0, help="seconds per setting")
    p.add_argument("--rate", type=float, default=625.0, help="coincidences per second at unit probability")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_tomo_simulate)
    p = tsub.add_parser("reconstruct")
    p.add_argument("--counts", required=True)
    p.add_argument("--method", choices=tomography.METHODS, default="mle")
    p.add_argument("--rate", type=float, default=None, help="known rate; profiled out when omitted")
    p.add_argument("--reference", help="state to report fidelity against")
    p.add_argument("--out")
    p.set_defaults(func=cmd_tomo_reconstruct)

    p = sub.add_parser("sweep", help="run the (mu, eps) experiment grid")
    p.add_argument("--config", help="YAML config file; flags override its values")
    p.add_argument("--mode", choices=harness.MODES)
    p.add_argument("--seed", type=int)
    p.add_argument("--n-bootstrap", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--exposure", type=float)
    p.add_argument("--rate", type=float)
    p.add_argument("--granularity", type=float)
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--out")
    p.add_argument("--fidelity-out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="check bounds on a saved sweep dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--mode", choices=harness.MODES, default=None)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError, tomography.ReconstructionError, harness.ConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

"""Command-line driver: ``logfsk <command> [flags]``.

Exit codes: 0 success, 1 check failed, 2 bad configuration, 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict

from . import experiments as ex
from .waveform import LogFskParams, ParameterError, validate

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3


def _ints(text):
    return tuple(int(v) for v in text.split(",") if v.strip())


def _cases(text):
    return tuple(_ints(c) for c in text.split(";") if c.strip())


def _common(p):
    p.add_argument("--config", help="flat key = value file; flags override it")
    p.add_argument("--n", type=_ints, help="samples per symbol, comma-separated for several")
    p.add_argument("--k", type=_ints, help="number of users, comma-separated for several")
    p.add_argument("--bc", type=float, help="inner amplitude (default sqrt(2N))")
    p.add_argument("--delta", type=float, help="alpha = bc*sqrt(2/N) + delta")
    p.add_argument("--snr-min-db", type=float)
    p.add_argument("--snr-max-db", type=float)
    p.add_argument("--snr-step-db", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--gamma-th", type=float)
    p.add_argument("--q-interpretation", choices=["sqrt", "linear"])
    p.add_argument("--literal-mse", action="store_true", default=None)
    p.add_argument("--law", choices=list(ex.LAWS), help="measurement law")
    p.add_argument("--messages", type=_ints, help="fixed message list, e.g. 40,60")
    p.add_argument("--workers", type=int, help="worker processes (does not change results)")
    p.add_argument("--out", help="CSV output path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="logfsk", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    demo = sub.add_parser("demo-spectrum", help="noiseless demodulated spectra")
    _common(demo)
    demo.add_argument("--cases", type=_cases, help="message sets, e.g. '40,60;10,35,55'")
    _common(sub.add_parser("threshold-curves", help="SNR_R -> SNR_sum theory and Monte-Carlo"))
    _common(sub.add_parser("nmse-compare", help="Log-FSK vs DSB NMSE"))
    _common(sub.add_parser("theory-only", help="closed-form curves and thresholds"))
    _common(sub.add_parser("validate-params", help="check modulation parameters"))
    return parser


def config_from_args(args, fig3_defaults: bool = False) -> ex.ExperimentConfig:
    values = {}
    if args.config:
        try:
            with open(args.config) as fh:
                values = ex.parse_config_text(fh.read())
        except OSError as exc:
            raise ex.ConfigError(f"cannot read config {args.config}: {exc.strerror}") from exc
    if fig3_defaults:
        values.setdefault("n_samples", ex.FIG3_N)
        values.setdefault("k_users", ex.FIG3_K)
    flags = {
        "n_samples": args.n, "k_users": args.k, "b_c": args.bc, "delta": args.delta,
        "trials": args.trials, "master_seed": args.seed, "gamma_th": args.gamma_th,
        "q_interpretation": args.q_interpretation, "literal_mse": args.literal_mse,
        "measurement_law": args.law, "messages": args.messages, "workers": args.workers,
    }
    values.update({k: v for k, v in flags.items() if v is not None})
    if args.messages is not None and args.law is None:
        values["measurement_law"] = "fixed_list"
    grid_flags = (args.snr_min_db, args.snr_max_db, args.snr_step_db)
    if any(v is not None for v in grid_flags):
        lo, hi, step = (d if v is None else v for v, d in zip(grid_flags, (-10.0, 30.0, 2.0)))
        values["snr_r_grid_db"] = ex.snr_grid(lo, hi, step)
    return ex.ExperimentConfig(**values)


def _write(result, path):
    if path:
        ex.emit_csv(result, path)
        print(f"wrote {len(result.rows)} rows to {path}", file=sys.stderr)
    else:
        print(",".join(result.columns))
        for row in result.rows:
            print(",".join(ex.format_value(v) for v in row))


def _report(result):
    for rep in result.thresholds:
        print(rep.describe(), file=sys.stderr)


def cmd_demo(args):
    cfg = config_from_args(args)
    cases = args.cases or ex.FIG2_CASES
    table = ex.run_spectrum_demo(cfg, cases, check=False)
    _write(table, args.out)
    for case, peak, mag in zip(table.cases, table.peaks, table.peak_magnitudes):
        print(f"messages {list(case)}: top qualifying index {peak} (sum {sum(case)}), |d|={mag:.9g}",
              file=sys.stderr)
    ex.run_spectrum_demo(cfg, cases, check=True)


def cmd_threshold(args):
    result = ex.run_threshold_curves(config_from_args(args, fig3_defaults=True))
    _write(result, args.out)
    _report(result)


def cmd_theory(args):
    result = ex.run_theory_only(config_from_args(args, fig3_defaults=True))
    _write(result, args.out)
    _report(result)


def cmd_nmse(args):
    result = ex.run_nmse_comparison(config_from_args(args))
    _write(result, args.out)
    _report(result)


def cmd_validate(args):
    cfg = config_from_args(args)
    bad = False
    for n in cfg.n_samples:
        try:
            params = cfg.params(n)
        except ParameterError as exc:
            print(f"N={n}: {exc}")
            bad = True
            continue
        problems = validate(params)
        fields = {k: v for k, v in asdict(params).items()}
        print(f"N={n}: " + ", ".join(f"{k}={v}" for k, v in fields.items()) + f", a_c={params.a_c:.6g}")
        for p in problems:
            print(f"  violation: {p}")
        bad = bad or bool(problems)
    if bad:
        raise ex.ConfigError("parameter validation failed")


COMMANDS = {
    "demo-spectrum": cmd_demo,
    "threshold-curves": cmd_threshold,
    "nmse-compare": cmd_nmse,
    "theory-only": cmd_theory,
    "validate-params": cmd_validate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except (ex.ConfigError, ParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ex.AcceptanceFailure as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

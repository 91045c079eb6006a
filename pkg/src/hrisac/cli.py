"""Command-line interface: train, sweep-power, sweep-elements, plot, verify."""

from __future__ import annotations

import argparse
import json
import sys

from .config import load_config, parse_override


def _add_config_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="TOML config file")
    parser.add_argument("--profile", choices=["paper", "desk"], default=None,
                        help="base parameter profile (default: desk, or the "
                             "file's own 'profile' key)")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override one config field")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--force", action="store_true",
                        help="overwrite existing output files")


def _load(args) -> "ExperimentConfig":
    overrides = dict(parse_override(o) for o in args.overrides)
    profile = args.profile
    if args.config is None and profile is None:
        profile = "desk"
    return load_config(args.config, profile=profile, overrides=overrides)


def _seeds(args, cfg) -> list:
    if args.seed is not None:
        return [args.seed]
    return list(cfg.seeds)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="hrisac",
        description="Hybrid-RIS ISAC workbench: training, sweeps, plots and "
                    "self-verification.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="run one scheme on one seed")
    _add_config_args(p_train)
    p_train.add_argument("--seed", type=int, default=None)
    p_train.add_argument("--scheme", choices=["ddpg", "random", "greedy"],
                         default="ddpg")

    p_power = sub.add_parser("sweep-power", help="sum rate vs BS power budget")
    _add_config_args(p_power)
    p_power.add_argument("--seed", type=int, default=None)
    p_power.add_argument("--powers", default=None,
                         help="comma-separated dBm list (default from config)")
    p_power.add_argument("--schemes", default=None,
                         help="comma-separated scheme list (default from config)")
    p_power.add_argument("--workers", type=int, default=1)

    p_elem = sub.add_parser("sweep-elements",
                            help="sum rate vs RIS element count")
    _add_config_args(p_elem)
    p_elem.add_argument("--seed", type=int, default=None)
    p_elem.add_argument("--elements", default=None,
                        help="comma-separated N list (default from config)")
    p_elem.add_argument("--amax", default=None,
                        help="comma-separated amplitude caps (default from config)")
    p_elem.add_argument("--optimizer", choices=["ddpg", "random", "greedy"],
                        default="ddpg")
    p_elem.add_argument("--workers", type=int, default=1)

    p_plot = sub.add_parser("plot", help="render a sweep/telemetry CSV to SVG")
    p_plot.add_argument("csv", help="input CSV path")
    p_plot.add_argument("--kind", choices=["reward", "power", "elements"],
                        required=True)
    p_plot.add_argument("--out", required=True, help="output SVG path")
    p_plot.add_argument("--force", action="store_true")

    p_verify = sub.add_parser("verify", help="run the independent oracle suite")
    p_verify.add_argument("--full", action="store_true",
                          help="more instances per oracle")

    args = parser.parse_args(argv)

    try:
        if args.command == "train":
            cfg = _load(args)
            out_dir = args.out or cfg.output_dir
            from .experiments import run_train
            for seed in _seeds(args, cfg):
                record = run_train(cfg, args.scheme, seed, out_dir,
                                   force=args.force)
                print(f"wrote {record.telemetry_path}")
                print(json.dumps({"config_hash": record.config_hash,
                                  "seed": record.seed,
                                  "scheme": record.scheme,
                                  **record.summary}, sort_keys=True))
        elif args.command == "sweep-power":
            cfg = _load(args)
            out_dir = args.out or cfg.output_dir
            powers = ([float(p) for p in args.powers.split(",")]
                      if args.powers else list(cfg.power_sweep_dbm))
            schemes = (args.schemes.split(",") if args.schemes
                       else list(cfg.schemes))
            from .experiments import sweep_power
            path, mean_path = sweep_power(cfg, powers, schemes,
                                          _seeds(args, cfg), out_dir,
                                          force=args.force,
                                          workers=args.workers)
            print(f"wrote {path}")
            print(f"wrote {mean_path}")
        elif args.command == "sweep-elements":
            cfg = _load(args)
            out_dir = args.out or cfg.output_dir
            elements = ([int(n) for n in args.elements.split(",")]
                        if args.elements else list(cfg.elements_sweep))
            amax = ([float(a) for a in args.amax.split(",")]
                    if args.amax else list(cfg.amax_sweep))
            from .experiments import sweep_elements
            path, mean_path = sweep_elements(cfg, elements, amax,
                                             _seeds(args, cfg), out_dir,
                                             optimizer=args.optimizer,
                                             force=args.force,
                                             workers=args.workers)
            print(f"wrote {path}")
            print(f"wrote {mean_path}")
        elif args.command == "plot":
            from .plotting import plot_csv
            out = plot_csv(args.csv, args.kind, args.out, force=args.force)
            print(f"wrote {out}")
        elif args.command == "verify":
            from .verify import format_report, run_oracles
            checks = run_oracles(quick=not args.full)
            print(format_report(checks))
            if any(not c.passed for c in checks):
                return 1
    except (ValueError, FileNotFoundError, FileExistsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

# ==============================================================================
# FILE: main.py
# PURPOSE: The General Manager. This is the command-line entry point.
#          It does not contain heavy logic. It only parses the flags, layers
#          them over the config file, runs the requested pipeline stages and
#          turns any failure into a JSON diagnostic plus an exit code.
# EXIT CODES: 0 success, 2 usage error, 3 data error, 4 numerical error.
# ==============================================================================

import os
import sys
import json
import yaml
import logging
import argparse

import pandas as pd

from config import ConfigManager, TOOL_VERSION, configure_logging
from errors import EXIT_OK, ConfigError, ScaleKitError, from_foreign
from pipeline import run_pipeline
from synth import KINDS, GenSpec, gen_series

logger = logging.getLogger(__name__)

# Subcommand -> pipeline stages it needs
COMMAND_STAGES = {
    "stats": ["stats"],
    "mfdfa": ["mfdfa"],
    "structure": ["structure"],
    "pdf": ["pdf"],
    "collapse": ["collapse"],
    "levy-fit": ["levy"],
    "run": None,
}


def parse_param(text):
    """'key=value' with the value read as YAML, so numbers and booleans keep their type."""
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got '{text}'")
    return key.strip(), yaml.safe_load(value)


def add_global_flags(p):
    p.add_argument("--config", help="User YAML config file (overrides the shipped defaults)")
    p.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR (CLI > config > env:SCALEKIT_LOG_LEVEL)")
    p.add_argument("--output-dir", help="Output directory (CLI > config > env:SCALEKIT_OUTPUT_DIR)")
    p.add_argument("--workers", type=int, help="Worker threads for MF-DFA scales and the Levy overlay")


def add_source_flags(p, required=False):
    source = p.add_mutually_exclusive_group(required=required)
    source.add_argument("--input", dest="input_path", help="CSV file of date,value rows")
    source.add_argument("--generator", choices=KINDS, help="Synthetic signal instead of a file")
    p.add_argument("--length", type=int, help="Generator output length")
    p.add_argument("--seed", type=int, help="Generator seed (mandatory with --generator)")
    p.add_argument("--param", dest="gen_params", action="append", type=parse_param, default=None,
                   metavar="KEY=VALUE", help="Generator parameter, e.g. hurst=0.7 (repeatable)")


def add_analysis_flags(p):
    """One flag per RunConfig field; anything left out falls back to the config file."""
    p.add_argument("--nonoverlapping", dest="overlapping", action="store_const", const=False, default=None,
                   help="Stride returns by the lag instead of by one sample")
    p.add_argument("--detrend-modes", type=int, help="Number of low Fourier modes to remove")
    p.add_argument("--remove-mean", dest="detrend_remove_mean", action="store_const", const=True, default=None)
    p.add_argument("--rolling-window", type=int)
    p.add_argument("--rolling-step", type=int)
    p.add_argument("--pdf-lags", type=int, nargs="+")

    p.add_argument("--mfdfa-input", choices=("returns", "series"))
    p.add_argument("--scales", type=int, nargs="+")
    p.add_argument("--scale-count", type=int)
    p.add_argument("--scale-min", type=int)
    p.add_argument("--q-orders", type=float, nargs="+")
    p.add_argument("--q-zero", action="store_const", const=True, default=None,
                   help="Allow q = 0 through the logarithmic average")
    p.add_argument("--poly-order", type=int)
    p.add_argument("--mfdfa-fit-range", type=float, nargs=2, metavar=("LOW", "HIGH"))
    p.add_argument("--break-threshold", type=float)

    p.add_argument("--structure-lags", type=int, nargs="+")
    p.add_argument("--orders", dest="n_orders", type=float, nargs="+")
    p.add_argument("--zeta-fit-range", type=float, nargs=2, metavar=("LOW", "HIGH"))
    p.add_argument("--nonlinearity-threshold", type=float)

    p.add_argument("--bin-count", type=int)
    p.add_argument("--support-quantile", type=float)
    p.add_argument("--micro-lags", type=int, nargs="+")
    p.add_argument("--macro-lags", type=int, nargs="+")
    p.add_argument("--collapse-alpha", type=float)
    p.add_argument("--collapse-threshold", type=float)
    p.add_argument("--central-sigmas", type=float)
    p.add_argument("--min-bin-count", type=int)

    p.add_argument("--levy-lags", type=int, nargs="+")
    p.add_argument("--boundary-tolerance", dest="levy_boundary_tolerance", type=float)


def build_parser():
    parser = argparse.ArgumentParser(prog="scalekit", description="Scaling analysis of noisy time series")
    parser.add_argument("--version", action="version", version=f"%(prog)s {TOOL_VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in COMMAND_STAGES:
        p = sub.add_parser(name, help=f"Run the {name} stage" if name != "run" else "Run the full pipeline")
        add_global_flags(p)
        add_source_flags(p, required=True)
        add_analysis_flags(p)

    p = sub.add_parser("synth", help="Write a synthetic signal to CSV")
    add_global_flags(p)
    p.add_argument("--generator", choices=KINDS, required=True)
    p.add_argument("--length", type=int)
    p.add_argument("--seed", type=int, help="Generator seed (mandatory)")
    p.add_argument("--param", dest="gen_params", action="append", type=parse_param, default=None,
                   metavar="KEY=VALUE")
    p.add_argument("--out", help="CSV path (default: <output-dir>/<generator>.csv)")
    return parser


def overrides_from(args):
    skip = {"command", "config", "log_level", "out"}
    overrides = {k: v for k, v in vars(args).items() if k not in skip}
    if overrides.get("gen_params") is not None:
        overrides["gen_params"] = dict(overrides["gen_params"])
    return overrides


def run_synth(args, cfg):
    if args.seed is None:
        raise ConfigError("--seed is mandatory for generator runs", stage="synth")
    spec = GenSpec(args.generator, args.length, args.seed, dict(args.gen_params or []))
    series = gen_series(spec)

    out = args.out or os.path.join(args.output_dir or cfg.OUTPUT_DIR, f"{spec.kind}.csv")
    os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
    frame = pd.DataFrame({"index": series.timestamps, "value": series.values})
    frame.to_csv(out, index=False, header=False, float_format="%.17g", lineterminator="\n")
    logger.info(f"[Synth] Wrote {len(series)} samples to {out}")
    print(out)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        configure_logging(args.log_level or os.getenv("SCALEKIT_LOG_LEVEL") or "INFO")
        cfg = ConfigManager(args.config)
        if not args.log_level:
            configure_logging(cfg.LOG_LEVEL)

        if args.command == "synth":
            run_synth(args, cfg)
            return EXIT_OK

        config = cfg.build_run_config(overrides_from(args))
        run_pipeline(config, COMMAND_STAGES[args.command])
        print(os.path.join(config.output_dir, "result.json"))
        return EXIT_OK

    except Exception as exc:
        if not isinstance(exc, ScaleKitError):
            logger.debug("Unexpected failure", exc_info=True)
        e = from_foreign(exc)
        if e.stage is None:
            e.stage = "config" if isinstance(e, ConfigError) else args.command
        logger.error(f"[{e.stage}] {type(e).__name__}: {e.message}")
        print(json.dumps(e.as_diagnostic(), sort_keys=True), file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())

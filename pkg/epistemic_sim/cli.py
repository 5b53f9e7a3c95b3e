"""Command line driver: run presets or config files and emit metric CSVs.

Usage::

    epistemic-sim run --preset exp3-uncertainty --out results/exp3u --per-seed
    epistemic-sim run --config my.json --out results/custom --workers 4
    epistemic-sim list-presets
    epistemic-sim validate --config my.json
    epistemic-sim report results/exp3r/mean.csv results/exp3u/mean.csv
"""

import argparse
import json
import logging
import pathlib
import sys
from dataclasses import dataclass
from typing import List, Optional, Union

import pandas as pd

from . import engine
from .config import (
    PRESETS,
    ExperimentConfig,
    dump_config,
    load_config,
    preset,
    to_mapping,
)
from .exceptions import ConfigError
from .metrics import (
    read_csv,
    recovery_time,
    series_from_frame,
    window_mean,
    window_peak,
    write_csv,
)
from .version import __version__

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2


@dataclass(frozen=True)
class RunManifest:
    """What to run and where its CSVs go.

    Parameters
    ----------
    config : ExperimentConfig or str
        A config, or a preset name or config path for :func:`load_config`.
    output_path : str or pathlib.Path
        Directory receiving ``mean.csv``, ``config.json`` and, with
        `emit_per_seed`, one ``seed_<n>.csv`` per seed.
    emit_per_seed : bool
    workers : int
    """

    config: Union[ExperimentConfig, str, pathlib.Path]
    output_path: Union[str, pathlib.Path]
    emit_per_seed: bool = False
    workers: int = 1


def run_and_emit(manifest: RunManifest) -> int:
    """Run the manifest's experiment and write its CSVs.

    Returns
    -------
    int
        ``0`` on success, ``1`` on a config error, ``2`` on an I/O error.
    """
    cfg = manifest.config
    if not isinstance(cfg, ExperimentConfig):
        try:
            cfg = load_config(cfg)
        except ConfigError as exc:
            logger.error("%s", exc)
            return EXIT_CONFIG
    out = pathlib.Path(manifest.output_path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        dump_config(cfg, out / "config.json")
    except OSError as exc:
        logger.error("cannot write to %s: %s", out, exc)
        return EXIT_IO

    series = engine.run(cfg, workers=manifest.workers)

    try:
        write_csv(series.mean, out / "mean.csv")
        if manifest.emit_per_seed:
            for seed, frame in series.per_seed.items():
                write_csv(frame, out / f"seed_{seed}.csv")
    except OSError as exc:
        logger.error("cannot write to %s: %s", out, exc)
        return EXIT_IO
    logger.info("wrote %d rows to %s", len(series.mean), out / "mean.csv")
    return EXIT_OK


def _parse_seeds(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}")


def _cmd_run(args) -> int:
    try:
        if args.preset is not None:
            cfg = preset(args.preset)
        else:
            cfg = load_config(args.config)
        if args.seeds is not None:
            cfg = cfg.replace(seeds=args.seeds)
    except ConfigError as exc:
        logger.error("%s", exc)
        return EXIT_CONFIG
    return run_and_emit(
        RunManifest(
            config=cfg,
            output_path=args.out,
            emit_per_seed=args.per_seed,
            workers=args.workers,
        )
    )


def _cmd_list_presets(args) -> int:
    rows = []
    for name in PRESETS:
        flat = to_mapping(load_config(name))
        rows.append(
            {
                "preset": name,
                "strategy": flat["strategy"],
                "access": flat["access"],
                "gamma": flat["gamma"],
                "k": flat["k"],
                "T": flat["horizon_T"],
            }
        )
    print(pd.DataFrame(rows).to_string(index=False))
    return EXIT_OK


def _cmd_validate(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        logger.error("%s", exc)
        return EXIT_CONFIG
    if args.print:
        print(json.dumps(to_mapping(cfg), indent=2, sort_keys=True))
    else:
        print(f"{args.config}: ok")
    return EXIT_OK


def _cmd_report(args) -> int:
    shift = args.shift
    rows = []
    for path in args.files:
        try:
            series = series_from_frame(read_csv(path))
        except (OSError, ValueError) as exc:
            logger.error("%s", exc)
            return EXIT_IO
        horizon = series.horizon
        rows.append(
            {
                "file": str(path),
                "pre_shift_mse": window_mean(series, shift - 201, shift - 1),
                "post_shift_peak": window_peak(series, shift, shift + 199),
                "final_mse": window_mean(series, horizon - 499, horizon),
                "recovery_time": recovery_time(series, shift, args.threshold),
            }
        )
    print(pd.DataFrame(rows).to_string(index=False))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epistemic-sim",
        description="Simulate forgetting Beta-Bernoulli agents in a shifting commons.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="errors only")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run an experiment and write CSVs")
    source = run.add_mutually_exclusive_group(required=True)
    source.add_argument("--preset", help="one of: " + ", ".join(PRESETS))
    source.add_argument("--config", help="path to a flat JSON config")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--per-seed", action="store_true", help="also write seed_<n>.csv")
    run.add_argument("--workers", type=int, default=1, help="parallel replications")
    run.add_argument("--seeds", type=_parse_seeds, help="override the seed list")
    run.set_defaults(handler=_cmd_run)

    listing = commands.add_parser("list-presets", help="show the built-in presets")
    listing.set_defaults(handler=_cmd_list_presets)

    validate = commands.add_parser("validate", help="check a config file")
    validate.add_argument("--config", required=True)
    validate.add_argument(
        "--print", action="store_true", help="print the effective config as JSON"
    )
    validate.set_defaults(handler=_cmd_validate)

    report = commands.add_parser("report", help="summarise emitted mean.csv files")
    report.add_argument("files", nargs="+", type=pathlib.Path)
    report.add_argument("--shift", type=int, default=501, help="consensus shift tick")
    report.add_argument(
        "--threshold", type=float, default=0.05, help="recovery MSE threshold"
    )
    report.set_defaults(handler=_cmd_report)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.ERROR
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())

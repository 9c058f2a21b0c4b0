# coherent_qec/run_experiment.py

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

try:
    from dotenv import load_dotenv
    from coherent_qec.Config import load_experiment, load_settings
    from coherent_qec.Errors import ConfigurationError, InvalidArgument
    from coherent_qec.Experiments import COMMANDS, ExperimentContext, cmd_threshold
except ImportError as e:
    print("FATAL: A core component failed to import. Please run 'pip install -r requirements.txt'.")
    print(f"Python Error: {e}")
    sys.exit(1)

log = logging.getLogger("Bootstrap")

LOG_LEVEL_ENV = "COHERENT_QEC_LOG_LEVEL"
EXIT_RUNTIME_ERROR = 1
EXIT_CONFIG_ERROR = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="run_experiment",
        description="Coherent-noise repetition and surface code experiments on fermionic Gaussian states.")
    parser.add_argument("command", choices=sorted(COMMANDS), help="Experiment to run.")
    parser.add_argument("--config", required=True, type=Path, help="Experiment file (YAML or JSON).")
    parser.add_argument("--out", required=True, type=Path, help="CSV or JSON result path.")
    parser.add_argument("--seed", type=int, default=None, help="Overrides the experiment seed.")
    parser.add_argument("--workers", type=int, default=None, help="Overrides the worker count.")
    parser.add_argument("--settings", type=Path, default=None, help="Run settings file (default: config.json).")
    parser.add_argument("--log-level", default=None,
                        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"], help="Overrides every other source.")
    parser.add_argument("--no-progress", action="store_true", help="Disables progress bars.")
    parser.add_argument("--sweep-csv", type=Path, default=None,
                        help="threshold only: fit an existing pl-sweep CSV instead of running the sweep.")
    return parser


def resolve_log_level(settings_level: str, cli_level: Optional[str]) -> str:
    """CLI flag, then the environment (after .env), then config.json."""
    if cli_level:
        return cli_level
    env_level = os.getenv(LOG_LEVEL_ENV)
    if env_level and env_level.upper() in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        return env_level.upper()
    return settings_level


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    load_dotenv()
    settings = load_settings(args.settings)
    logging.basicConfig(level=resolve_log_level(settings.log_level, args.log_level),
                        format="[%(levelname)-8s] [%(name)s] %(message)s", force=True)
    try:
        config = load_experiment(args.config)
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.workers is not None:
            overrides["workers"] = args.workers
        if overrides:
            config = config.model_validate({**config.model_dump(), **overrides})
        ctx = ExperimentContext(config=config, settings=settings, out=args.out, progress=not args.no_progress)
        log.info(f"Running '{args.command}' for experiment '{config.name}' (seed {config.seed}).")
        if args.command == "threshold":
            target = cmd_threshold(ctx, sweep_csv=args.sweep_csv)
        else:
            target = COMMANDS[args.command](ctx)
        log.info(f"'{args.command}' finished; results in '{target}'.")
        return 0
    except (ConfigurationError, InvalidArgument, ValueError) as e:
        log.critical(f"Invalid configuration or arguments: {e}", exc_info=True)
        return EXIT_CONFIG_ERROR
    except KeyboardInterrupt:
        log.info("Run interrupted by user (Ctrl+C).")
        return EXIT_RUNTIME_ERROR
    except Exception as e:
        log.critical(f"'{args.command}' failed: {e}", exc_info=True)
        return EXIT_RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())

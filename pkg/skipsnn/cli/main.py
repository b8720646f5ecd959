"""
Command-line entry point: gen-data, train, eval, sweep, compare and serve.
"""
import argparse
import sys
from pathlib import Path
from typing import List, Optional

from skipsnn import __version__
from skipsnn.cli.commands import cmd_compare, cmd_eval, cmd_gen_data, cmd_sweep, cmd_train
from skipsnn.cli.error_handler import EXIT_OK, handle_cli_error
from skipsnn.config.schemas import ExperimentConfig, load_config
from skipsnn.config.settings import API_HOST, API_PORT, DEBUG, RUNS_DIR
from skipsnn.logs.logger import logger
from skipsnn.snn.forward import GateMode


def _common(parser: argparse.ArgumentParser, config_required: bool = False) -> None:
    parser.add_argument("--config", type=Path, required=config_required, help="Experiment config JSON")
    parser.add_argument("--seed", type=int, default=None, help="Override the seed (a single seed for sweep/compare)")
    parser.add_argument("--out", type=Path, default=None, help="Output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skipsnn", description="SkipSNN experiments")
    parser.add_argument("--version", action="version", version=f"skipsnn {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-data", help="Generate the synthetic train/test spike-train files")
    _common(gen)

    train = sub.add_parser("train", help="Two-stage training")
    _common(train)
    train.add_argument("--stage", choices=["1", "2", "both"], default="both")
    train.add_argument("--data", type=Path, default=None, help="Directory holding train.ssd/test.ssd")
    train.add_argument("--checkpoint", type=Path, default=None, help="Stage-1 checkpoint (for --stage 2)")
    train.add_argument("--lambda", dest="lambda_", type=float, default=None, help="Penalty multiplier")

    ev = sub.add_parser("eval", help="Evaluate a checkpoint on a dataset file")
    _common(ev)
    ev.add_argument("--checkpoint", type=Path, required=True)
    ev.add_argument("--data", type=Path, required=True, help="Dataset file (.ssd)")
    ev.add_argument("--gate-mode", choices=[m.value for m in GateMode if m != GateMode.EXTERNAL],
                    default=GateMode.LEARNED.value)
    ev.add_argument("--export-samples", type=int, default=4, help="Number of per-sample traces to export")

    sweep = sub.add_parser("sweep", help="λ sweep over seeds")
    _common(sweep)
    sweep.add_argument("--lambdas", type=float, nargs="+", default=None)
    sweep.add_argument("--data", type=Path, default=None)

    compare = sub.add_parser("compare", help="SkipSNN against fixed- and random-skip baselines")
    _common(compare)
    compare.add_argument("--lambda", dest="lambda_", type=float, default=None)
    compare.add_argument("--data", type=Path, default=None)

    serve = sub.add_parser("serve", help="Run the HTTP inference service")
    serve.add_argument("--checkpoint", type=Path, default=None)
    serve.add_argument("--host", default=API_HOST)
    serve.add_argument("--port", type=int, default=API_PORT)
    return parser


def _config(args) -> ExperimentConfig:
    return load_config(args.config) if args.config else ExperimentConfig()


def _out_dir(args, config: ExperimentConfig) -> Path:
    if args.out is not None:
        return args.out
    if config.output_dir:
        return Path(config.output_dir)
    return RUNS_DIR / args.command


def run(args) -> None:
    if args.command == "serve":
        import uvicorn

        from skipsnn.service.app import create_app

        uvicorn.run(
            create_app(args.checkpoint),
            host=args.host,
            port=args.port,
            log_level="debug" if DEBUG else "info",
        )
        return

    config = _config(args)
    out = _out_dir(args, config)
    seeds = [args.seed] if args.seed is not None else None

    if args.command == "gen-data":
        cmd_gen_data(config, out, args.seed)
    elif args.command == "train":
        cmd_train(config, out, args.seed, args.stage, args.data, args.checkpoint, args.lambda_)
    elif args.command == "eval":
        cmd_eval(args.checkpoint, args.data, out, GateMode(args.gate_mode), args.export_samples,
                 config if args.config else None)
    elif args.command == "sweep":
        cmd_sweep(config, out, args.lambdas, seeds, args.data)
    elif args.command == "compare":
        cmd_compare(config, out, seeds, args.data, args.lambda_)
    logger.info(f"{args.command} finished, outputs in {out}")


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        run(args)
    except Exception as exc:
        return handle_cli_error(exc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

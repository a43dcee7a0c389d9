"""
texprint command line.

    texprint extract  --root DB1_B --out results
    texprint evaluate --out results --learners random_forest,c45
    texprint pipeline --root DB1_B --folds 10 --seed 1
    texprint inspect  DB1_B/101_1.tif --out inspect --dump-steps

Exit status: 0 when every requested output was written, 1 on a runtime
failure (nothing extracted, a learner failed), 2 on a usage or input error
(missing image root, unknown learner, malformed feature table or config).
"""

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from prefect.logging import get_logger

from texprint.config import DEFAULT_CONFIG_FILE, PipelineConfig, load_config
from texprint.errors import (
    ConfigError,
    DatasetError,
    EmptyDatasetError,
    EvaluationError,
    ImageError,
    TexprintError,
)
from texprint.evaluation import rank_reports
from texprint.learners import LEARNER_NAMES
from texprint.reporting import format_ranking
from texprint.workflows import (
    evaluate_learners,
    extract_features,
    inspect_image,
    texprint_pipeline,
    with_threads,
)

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _int_list(value: str) -> list[int]:
    try:
        return [int(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {value!r}")


def _name_list(value: str) -> list[str]:
    return [part.strip() for part in value.split(",") if part.strip()]


def _defaults_epilog() -> str:
    defaults = PipelineConfig.model_construct().model_dump()
    lines = ["configuration defaults (flat JSON keys, empty file = all defaults):"]
    for key in PipelineConfig.model_fields:
        if key in ("image_root", "out_dir"):
            continue
        lines.append(f"  {key} = {defaults.get(key)}")
    lines.append("  image_root from TEXPRINT_IMAGE_ROOT, out_dir from TEXPRINT_OUT_DIR (default ./results)")
    return "\n".join(lines)


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help=f"flat JSON config file (default {DEFAULT_CONFIG_FILE} if present)")
    parser.add_argument("--root", type=Path, help="image root, files named <subject>_<sample>.<ext>")
    parser.add_argument("--out", type=Path, help="output directory")
    parser.add_argument("--levels", type=int, help="gray levels for the GLCM")
    parser.add_argument("--distances", type=_int_list, help="GLCM distances, e.g. 1,2,3")
    parser.add_argument("--folds", type=int, help="cross-validation folds")
    parser.add_argument("--seed", type=int, help="master seed")
    parser.add_argument(
        "--learners", type=_name_list,
        help=f"comma-separated subset of {','.join(LEARNER_NAMES)}",
    )
    parser.add_argument("--threads", type=int, help="worker cap for extraction and training")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="texprint",
        description="Texture-based fingerprint identification: feature extraction and tree learners.",
        epilog=_defaults_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    commands = parser.add_subparsers(dest="command", required=True)

    extract = commands.add_parser("extract", help="write features.csv and failures.jsonl")
    _add_common_flags(extract)

    evaluate = commands.add_parser("evaluate", help="cross-validate learners on features.csv")
    _add_common_flags(evaluate)
    evaluate.add_argument("--features", type=Path, help="feature CSV (default <out>/features.csv)")

    pipeline = commands.add_parser("pipeline", help="extract, then evaluate, then print the ranking")
    _add_common_flags(pipeline)

    inspect = commands.add_parser("inspect", help="dump the intermediate stages for one image")
    inspect.add_argument("image", type=Path)
    _add_common_flags(inspect)
    inspect.add_argument("--dump-steps", action="store_true", help="write every diffusion step as PNG")

    return parser


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    """defaults < config file < environment < flags."""
    config_path = args.config
    if config_path is None and DEFAULT_CONFIG_FILE.exists():
        config_path = DEFAULT_CONFIG_FILE
    config = load_config(config_path)
    return config.with_overrides(
        image_root=args.root,
        out_dir=args.out,
        levels=args.levels,
        distances=args.distances,
        folds=args.folds,
        seed=args.seed,
        learners=args.learners,
        threads=args.threads,
    )


def cmd_extract(config: PipelineConfig) -> int:
    result = with_threads(extract_features, config.threads)(config)
    print(f"{result['instances']} instances and {result['attributes']} attributes")
    if result["failed"]:
        print(f"{result['failed']} image(s) failed, see {result['failures_path']}")
    print(f"Wrote {result['features_path']}")
    return EXIT_OK


def cmd_evaluate(config: PipelineConfig, features: Optional[Path] = None) -> int:
    result = with_threads(evaluate_learners, config.threads)(config, features)
    print(format_ranking(rank_reports(result["reports"])))
    print(f"Wrote {result['results_csv']}")
    return EXIT_OK


def cmd_pipeline(config: PipelineConfig) -> int:
    result = texprint_pipeline(config)
    print(f"{result['instances']} instances and {result['attributes']} attributes")
    print(format_ranking(rank_reports(result["reports"])))
    print(f"Wrote {result['results_csv']}")
    return EXIT_OK


def cmd_inspect(config: PipelineConfig, image: Path, out_dir: Path, dump_steps: bool) -> int:
    result = inspect_image(image, config, out_dir, dump_steps)
    core = result["core"]
    print(f"Core at ({core['x']}, {core['y']}){' [fallback]' if core['fallback'] else ''}")
    print(f"Wrote {len(result['files'])} file(s) to {out_dir}")
    return EXIT_OK


def _exit_status(error: TexprintError) -> int:
    if isinstance(error, EmptyDatasetError):
        return EXIT_FAILURE
    if isinstance(error, (ConfigError, DatasetError, EvaluationError, ImageError)):
        return EXIT_USAGE
    return EXIT_FAILURE


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = resolve_config(args)
        if args.command in ("extract", "pipeline") and config.image_root is None:
            raise ConfigError("No image root given (--root, image_root or TEXPRINT_IMAGE_ROOT)")
        if args.command in ("extract", "pipeline") and not Path(config.image_root).is_dir():
            raise DatasetError(f"Image root does not exist or is not a directory: {config.image_root}")

        if args.command == "extract":
            return cmd_extract(config)
        if args.command == "evaluate":
            return cmd_evaluate(config, args.features)
        if args.command == "pipeline":
            return cmd_pipeline(config)
        return cmd_inspect(config, args.image, args.out or Path(config.out_dir) / "inspect", args.dump_steps)
    except TexprintError as e:
        print(f"texprint: error: {e}", file=sys.stderr)
        return _exit_status(e)
    except Exception as e:
        logger.exception("Unexpected failure")
        print(f"texprint: error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())

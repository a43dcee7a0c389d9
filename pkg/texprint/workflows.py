"""
Prefect flows for the batch pipeline.

Each image and each (learner, fold) pair is one task run. Flows are started
with a ThreadPoolTaskRunner capped at `config.threads`; mapped results are
collected in input order, so the written files do not depend on the number
of workers.
"""

from pathlib import Path
from typing import Any, Callable, Optional

from prefect import flow, task, unmapped
from prefect.cache_policies import NO_CACHE
from prefect.logging import get_run_logger
from prefect.task_runners import ThreadPoolTaskRunner

from texprint.config import PipelineConfig
from texprint.dataset import (
    Dataset,
    FoldAssignment,
    assemble_dataset,
    config_attribute_names,
    export_csv,
    extract_image,
    failure_record,
    import_csv,
    scan_corpus,
    stratified_folds,
    write_failure_log,
)
from texprint.diffusion import enhance
from texprint.errors import ConfigError
from texprint.evaluation import EvalReport, FoldResult, LearnerSpec, evaluate_fold, pool_folds, rank_reports
from texprint.imaging import GrayImage, crop_region, load_grayscale, quantize, save_pgm, save_png
from texprint.learners import save_dot, save_model, train_learner
from texprint.orientation import compute_orientation_field, detect_core, draw_core_marker, export_orientation_csv
from texprint.reporting import accuracy_chart, format_ranking, prf_chart, write_results_csv, write_results_json
from texprint.texture import Offset, export_glcm_csv, glcm

FEATURES_FILE = "features.csv"
FAILURES_FILE = "failures.jsonl"
RESULTS_CSV = "results.csv"
RESULTS_JSON = "results.json"
ACCURACY_CHART = "accuracy.svg"
PRF_CHART = "prf.svg"
MODELS_DIR = "models"


def with_threads(flow_fn: Callable, threads: int) -> Callable:
    """The flow, bound to a thread pool of at most `threads` workers."""
    return flow_fn.with_options(task_runner=ThreadPoolTaskRunner(max_workers=threads))


@task(cache_policy=NO_CACHE)
def extract_image_task(path: Path, subject: str, config: PipelineConfig) -> tuple:
    """
    Extract one feature vector. Failures are logged and returned as a record
    instead of raised so one bad print never stops the batch.

    Returns:
        (FeatureVector, None) on success, (None, failure record) otherwise
    """
    logger = get_run_logger()
    try:
        vector = extract_image(path, subject, config)
        logger.debug(f"Extracted {path.name}")
        return vector, None
    except Exception as e:
        logger.warning(f"Skipping {path.name}: {type(e).__name__}: {e}")
        return None, failure_record(path, subject, e)


@task(cache_policy=NO_CACHE)
def evaluate_fold_task(
    spec: LearnerSpec,
    ds: Dataset,
    assignment: FoldAssignment,
    fold: int,
    seed: int,
) -> FoldResult:
    return evaluate_fold(spec, ds, assignment, fold, seed)


@task(cache_policy=NO_CACHE)
def save_full_model_task(spec: LearnerSpec, ds: Dataset, seed: int, models_dir: Path) -> dict:
    """Train on the whole dataset and save the model as JSON plus a Graphviz source."""
    logger = get_run_logger()
    model = train_learner(spec.name, ds, seed, **spec.params)
    json_path = save_model(model, models_dir / f"{spec.name}.json")
    dot_path = save_dot(model, models_dir / f"{spec.name}.dot")
    logger.info(f"Saved {spec.display_name} model ({model.n_trees} tree(s)) to {json_path}")
    return {"model": str(json_path), "dot": str(dot_path)}


@task(cache_policy=NO_CACHE)
def write_reports_task(reports: list[EvalReport], out_dir: Path) -> dict:
    return {
        "results_csv": str(write_results_csv(reports, out_dir / RESULTS_CSV)),
        "results_json": str(write_results_json(reports, out_dir / RESULTS_JSON)),
        "accuracy_chart": str(accuracy_chart(reports, out_dir / ACCURACY_CHART)),
        "prf_chart": str(prf_chart(reports, out_dir / PRF_CHART)),
    }


def _require_root(config: PipelineConfig) -> Path:
    if config.image_root is None:
        raise ConfigError("No image root given (--root, image_root or TEXPRINT_IMAGE_ROOT)")
    return Path(config.image_root)


@flow(name="extract-features", task_runner=ThreadPoolTaskRunner(max_workers=4))
def extract_features(config: PipelineConfig) -> dict:
    """
    Build the feature table for every image under `config.image_root`.

    Writes `features.csv` and `failures.jsonl` to `config.out_dir`. Raises
    EmptyDatasetError (after writing the failure log) when no image could be
    extracted.

    Returns:
        Dict with instance, attribute and failure counts and the output paths
    """
    logger = get_run_logger()
    out_dir = Path(config.out_dir)
    images = scan_corpus(_require_root(config))
    logger.info(f"Extracting features from {len(images)} images with {config.threads} worker(s)")

    futures = extract_image_task.map(
        [path for path, _ in images],
        [subject for _, subject in images],
        unmapped(config),
    )
    outcomes = futures.result()
    failures = [failure for _, failure in outcomes if failure is not None]
    failures_path = write_failure_log(failures, out_dir / FAILURES_FILE)

    dataset = assemble_dataset(outcomes, config_attribute_names(config))
    features_path = export_csv(dataset, out_dir / FEATURES_FILE)
    logger.info(
        f"{len(dataset)} instances and {len(dataset.attribute_names)} attributes "
        f"({len(failures)} image(s) failed)"
    )
    return {
        "instances": len(dataset),
        "attributes": len(dataset.attribute_names),
        "failed": len(failures),
        "features_path": str(features_path),
        "failures_path": str(failures_path),
    }


@flow(name="evaluate-learners", task_runner=ThreadPoolTaskRunner(max_workers=4))
def evaluate_learners(config: PipelineConfig, features_path: Optional[Path] = None) -> dict:
    """
    Cross-validate every configured learner on a feature table and write the
    results table, JSON detail, charts and full-data models.

    Args:
        config: Pipeline configuration (folds, seed, learners, hyperparameters)
        features_path: Feature CSV; defaults to `<out_dir>/features.csv`

    Returns:
        Dict with the ranking and the output paths
    """
    logger = get_run_logger()
    out_dir = Path(config.out_dir)
    features_path = Path(features_path or out_dir / FEATURES_FILE)
    ds = import_csv(features_path, config_attribute_names(config))
    logger.info(
        f"Loaded {len(ds)} instances of {len(ds.classes)} classes from {features_path}"
    )

    assignment = stratified_folds(ds, config.folds, config.seed)
    specs = [LearnerSpec(name, config.learner_params(name)) for name in config.learners]

    fold_futures = {
        spec.name: evaluate_fold_task.map(
            unmapped(spec),
            unmapped(ds),
            unmapped(assignment),
            list(range(assignment.k)),
            unmapped(config.seed),
        )
        for spec in specs
    }
    model_futures = [
        save_full_model_task.submit(spec, ds, config.seed, out_dir / MODELS_DIR) for spec in specs
    ]

    reports = [
        pool_folds(spec, ds, assignment, fold_futures[spec.name].result()) for spec in specs
    ]
    models = [future.result() for future in model_futures]
    paths = write_reports_task(reports, out_dir)

    ranking = rank_reports(reports)
    logger.info(f"Ranking by weighted F-measure:\n{format_ranking(ranking)}")
    return {
        "reports": reports,
        "ranking": [report.learner for report in ranking],
        "models": models,
        **paths,
    }


@flow(name="texprint-pipeline")
def texprint_pipeline(config: PipelineConfig) -> dict:
    """Extraction followed by evaluation, both on `config.threads` workers."""
    logger = get_run_logger()
    extracted = with_threads(extract_features, config.threads)(config)
    evaluated = with_threads(evaluate_learners, config.threads)(
        config, Path(extracted["features_path"])
    )
    logger.info(f"Pipeline complete; best learner: {evaluated['ranking'][0]}")
    return {**extracted, **evaluated}


@flow(name="inspect-image")
def inspect_image(
    image_path: Path,
    config: PipelineConfig,
    out_dir: Path,
    dump_steps: bool = False,
) -> dict[str, Any]:
    """
    Dump every intermediate stage for one image: orientation field, core
    marker, cropped and enhanced region, optionally each diffusion step, and
    the GLCM of every (distance, angle) pair.
    """
    logger = get_run_logger()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    img = load_grayscale(image_path)
    field_ = compute_orientation_field(img, config.block_size, config.orientation_smoothing)
    core = detect_core(field_)
    logger.info(
        f"Core at ({core.x}, {core.y})"
        + (" (fallback to image centre)" if core.fallback else f", Poincaré index {core.poincare_value:.3f}")
    )
    written = [
        export_orientation_csv(field_, out_dir / "orientation.csv"),
        draw_core_marker(img, core, out_dir / "core.png"),
    ]

    region = crop_region(img, (core.x, core.y), config.crop_size)
    written.append(save_pgm(region, out_dir / "region.pgm"))

    def dump_step(step: int, stepped: GrayImage) -> None:
        written.append(save_png(stepped, out_dir / "steps" / f"step_{step:03d}.png"))

    enhanced = enhance(region, config.diffusion, on_step=dump_step if dump_steps else None)
    written.append(save_pgm(enhanced, out_dir / "enhanced.pgm"))
    written.append(save_png(enhanced, out_dir / "enhanced.png"))

    quantized = quantize(enhanced, config.levels)
    for distance in config.distances:
        for angle in config.angles:
            matrix = glcm(quantized, Offset(distance, angle))
            written.append(export_glcm_csv(matrix, out_dir / f"glcm_d{distance}_a{angle}.csv"))

    logger.info(f"Wrote {len(written)} file(s) to {out_dir}")
    return {
        "core": {"x": core.x, "y": core.y, "fallback": core.fallback, "poincare_value": core.poincare_value},
        "files": [str(path) for path in written],
    }

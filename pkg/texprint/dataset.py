"""
Batch feature extraction, feature-table persistence and stratified folds.

Corpus images follow the FVC naming convention `<subject>_<sample>.<ext>`
(e.g. `101_3.tif` belongs to subject 101).
"""

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Optional, Sequence

import numpy as np
import pandas as pd
from prefect.logging import get_logger

from texprint.diffusion import enhance
from texprint.errors import DatasetError, EmptyDatasetError
from texprint.imaging import SUPPORTED_SUFFIXES, crop_region, load_grayscale, quantize
from texprint.orientation import compute_orientation_field, detect_core
from texprint.texture import ATTRIBUTE_NAMES, FeatureVector, attribute_names, descriptor_vector

if TYPE_CHECKING:
    from texprint.config import PipelineConfig

logger = get_logger(__name__)

CLASS_COLUMN = "class"
FILENAME_PATTERN = re.compile(r"^(?P<subject>[^_]+)_(?P<sample>[^_]+)$")


@dataclass(frozen=True)
class Dataset:
    attribute_names: tuple[str, ...]
    instances: tuple[FeatureVector, ...]
    classes: tuple[str, ...]
    failures: tuple[dict, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "attribute_names", tuple(self.attribute_names))
        object.__setattr__(self, "instances", tuple(self.instances))
        object.__setattr__(self, "classes", tuple(self.classes))
        for instance in self.instances:
            if instance.names != self.attribute_names:
                raise DatasetError(
                    f"Instance labelled {instance.label!r} does not carry the declared attributes"
                )
            if instance.label not in self.classes:
                raise DatasetError(f"Instance label {instance.label!r} is not a declared class")

    @classmethod
    def from_instances(
        cls,
        instances: Iterable[FeatureVector],
        attribute_names: Sequence[str] = ATTRIBUTE_NAMES,
        failures: Iterable[dict] = (),
    ) -> "Dataset":
        instances = tuple(instances)
        classes = tuple(sorted({instance.label for instance in instances}))
        return cls(tuple(attribute_names), instances, classes, tuple(failures))

    def __len__(self) -> int:
        return len(self.instances)

    @property
    def X(self) -> np.ndarray:
        if not self.instances:
            return np.empty((0, len(self.attribute_names)))
        return np.vstack([instance.values for instance in self.instances])

    @property
    def y(self) -> np.ndarray:
        """Class indices into `classes`."""
        lookup = {label: k for k, label in enumerate(self.classes)}
        return np.array([lookup[instance.label] for instance in self.instances], dtype=np.int64)

    def subset(self, indices: Sequence[int]) -> "Dataset":
        """Rows at `indices`, keeping the full class list."""
        return Dataset(
            self.attribute_names,
            tuple(self.instances[i] for i in indices),
            self.classes,
        )


@dataclass(frozen=True)
class FoldAssignment:
    k: int
    folds: np.ndarray
    seed: int

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.folds == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.folds != fold)


def parse_subject(path: Path) -> str:
    match = FILENAME_PATTERN.match(path.stem)
    if not match:
        raise DatasetError(f"Cannot parse '<subject>_<sample>' from file name {path.name}")
    return match.group("subject")


def scan_corpus(image_root: Path) -> list[tuple[Path, str]]:
    """Image files under `image_root` with their subject labels, in file-name order."""
    image_root = Path(image_root)
    if not image_root.is_dir():
        raise DatasetError(f"Image root does not exist or is not a directory: {image_root}")

    paths = sorted(
        (p for p in image_root.iterdir() if p.is_file() and p.suffix.lower() in SUPPORTED_SUFFIXES),
        key=lambda p: p.name,
    )
    if not paths:
        raise DatasetError(f"No images found in {image_root}")

    unparsable = [p.name for p in paths if not FILENAME_PATTERN.match(p.stem)]
    if unparsable:
        raise DatasetError(
            f"{len(unparsable)} file name(s) do not follow <subject>_<sample>.<ext>: {unparsable}"
        )
    return [(p, parse_subject(p)) for p in paths]


def extract_image(path: Path, subject: str, config: "PipelineConfig") -> FeatureVector:
    """Core detection, crop, enhancement, quantization and descriptors for one image."""
    img = load_grayscale(path)
    field_ = compute_orientation_field(img, config.block_size, config.orientation_smoothing)
    core = detect_core(field_)
    if core.fallback:
        logger.debug(f"{path.name}: no core found, cropping around the image centre")
    region = crop_region(img, (core.x, core.y), config.crop_size)
    enhanced = enhance(region, config.diffusion)
    quantized = quantize(enhanced, config.levels)
    return descriptor_vector(quantized, config.distances, config.angles, label=subject)


def failure_record(path: Path, subject: Optional[str], error: Exception) -> dict:
    return {
        "path": str(path),
        "subject": subject,
        "error_type": type(error).__name__,
        "error_message": str(error),
    }


def assemble_dataset(
    outcomes: Sequence[tuple[Optional[FeatureVector], Optional[dict]]],
    attribute_names: Sequence[str] = ATTRIBUTE_NAMES,
) -> Dataset:
    """
    Collect per-image outcomes (vector or failure record), in the order given,
    into a dataset. Raises EmptyDatasetError when nothing was extracted.
    """
    instances = [vector for vector, _ in outcomes if vector is not None]
    failures = [failure for _, failure in outcomes if failure is not None]
    if not instances:
        raise EmptyDatasetError(
            f"No instances extracted; {len(failures)} image(s) failed", failures
        )
    return Dataset.from_instances(instances, attribute_names, failures)


def build_dataset(image_root: Path, config: "PipelineConfig") -> Dataset:
    """Extract one feature row per image; failed images are logged and skipped."""
    outcomes = []
    for path, subject in scan_corpus(image_root):
        try:
            outcomes.append((extract_image(path, subject, config), None))
        except Exception as e:
            logger.warning(f"Skipping {path.name}: {e}")
            outcomes.append((None, failure_record(path, subject, e)))

    dataset = assemble_dataset(outcomes, config_attribute_names(config))
    logger.info(
        f"Extracted {len(dataset)} instances and {len(dataset.attribute_names)} attributes "
        f"({len(dataset.failures)} failed)"
    )
    return dataset


def config_attribute_names(config: "PipelineConfig") -> tuple[str, ...]:
    return attribute_names(config.angles)


def export_csv(ds: Dataset, path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(ds.X, columns=list(ds.attribute_names))
    frame[CLASS_COLUMN] = [instance.label for instance in ds.instances]
    frame.to_csv(path, index=False)
    return path


def import_csv(path: Path | str, attribute_names: Sequence[str] = ATTRIBUTE_NAMES) -> Dataset:
    path = Path(path)
    expected = list(attribute_names) + [CLASS_COLUMN]
    try:
        frame = pd.read_csv(path, dtype=str)
    except FileNotFoundError as e:
        raise DatasetError(f"Feature table not found: {path}") from e
    except pd.errors.EmptyDataError as e:
        raise DatasetError(f"Feature table {path} is empty") from e
    except pd.errors.ParserError as e:
        raise DatasetError(f"Row arity mismatch in {path}: {e}") from e

    columns = list(frame.columns)
    if len(columns) != len(expected):
        raise DatasetError(
            f"Header arity mismatch in {path}: expected {len(attribute_names)} attributes "
            f"plus '{CLASS_COLUMN}', found {len(columns)} columns"
        )
    if columns != expected:
        raise DatasetError(f"Malformed header in {path}: {columns}")
    if frame.empty:
        raise DatasetError(f"Feature table {path} has no instances")
    if frame.isna().any().any():
        rows = [int(r) + 2 for r in np.flatnonzero(frame.isna().any(axis=1).to_numpy())]
        raise DatasetError(f"Row arity mismatch or missing values in {path} at line(s) {rows}")

    try:
        values = frame[list(attribute_names)].to_numpy(dtype=np.float64)
    except ValueError as e:
        raise DatasetError(f"Non-numeric attribute value in {path}: {e}") from e

    names = tuple(attribute_names)
    instances = [
        FeatureVector(names, row, label)
        for row, label in zip(values, frame[CLASS_COLUMN].astype(str))
    ]
    return Dataset.from_instances(instances, names)


def export_arff(ds: Dataset, path: Path | str, relation: str = "texprint") -> Path:
    """ARFF copy of the table for cross-checking with external tree learners."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"@relation {relation}", ""]
    lines += [f"@attribute {name} numeric" for name in ds.attribute_names]
    lines.append(f"@attribute {CLASS_COLUMN} {{{','.join(ds.classes)}}}")
    lines += ["", "@data"]
    for instance in ds.instances:
        values = ",".join(repr(float(v)) for v in instance.values)
        lines.append(f"{values},{instance.label}")
    path.write_text("\n".join(lines) + "\n")
    return path


def write_failure_log(failures: Iterable[dict], path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        for failure in failures:
            f.write(json.dumps(failure, sort_keys=True) + "\n")
    return path


def stratified_folds(ds: Dataset, k: int, seed: int) -> FoldAssignment:
    """
    Shuffle each class with a seeded generator, then deal all instances, class
    by class, round-robin over the k folds.
    """
    if k < 2:
        raise DatasetError(f"k must be >= 2, got {k}")
    if k > len(ds):
        raise DatasetError(f"k = {k} exceeds the number of instances ({len(ds)})")

    rng = np.random.default_rng(seed)
    y = ds.y
    folds = np.empty(len(ds), dtype=np.int64)
    position = 0
    for class_index in range(len(ds.classes)):
        members = np.flatnonzero(y == class_index)
        rng.shuffle(members)
        for member in members:
            folds[member] = position % k
            position += 1
    return FoldAssignment(k=k, folds=folds, seed=seed)

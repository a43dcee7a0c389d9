"""
Pipeline configuration.

The configuration file is a flat JSON object; every key is optional and an
empty file means all defaults. Values are layered as
defaults < config file < environment (.env) < command-line flags.
"""

import json
import os
from pathlib import Path
from typing import Any, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from texprint.diffusion import DiffusionParams
from texprint.errors import ConfigError
from texprint.learners import LEARNER_NAMES
from texprint.texture import ANGLES

load_dotenv()

DEFAULT_CONFIG_FILE = Path("./config/pipeline.json")

ENVIRONMENT_KEYS = {
    "image_root": "TEXPRINT_IMAGE_ROOT",
    "out_dir": "TEXPRINT_OUT_DIR",
}


def _env_path(name: str, default: Optional[str]) -> Optional[Path]:
    value = os.getenv(name, default)
    return Path(value) if value else None


class PipelineConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    image_root: Optional[Path] = Field(
        default_factory=lambda: _env_path(ENVIRONMENT_KEYS["image_root"], None),
        description="directory of <subject>_<sample>.<ext> images",
    )
    out_dir: Path = Field(
        default_factory=lambda: _env_path(ENVIRONMENT_KEYS["out_dir"], "./results"),
        description="where features, reports and charts are written",
    )

    levels: int = Field(default=8, ge=2, description="gray levels K for the GLCM")
    block_size: int = Field(default=8, ge=4, description="orientation block size (px)")
    orientation_smoothing: float = Field(default=1.0, ge=0.0, description="orientation smoothing (blocks)")
    crop_size: int = Field(default=100, ge=1, description="side of the region cropped around the core")

    diffusion_sigma: float = 0.5
    diffusion_rho: float = 4.0
    diffusion_alpha: float = 0.001
    diffusion_contrast: float = 1e-4
    diffusion_dt: float = 0.15
    diffusion_steps: int = 20

    distances: list[int] = Field(default_factory=lambda: [1, 2, 3])
    angles: list[int] = Field(default_factory=lambda: list(ANGLES))

    folds: int = Field(default=10, ge=2, description="cross-validation folds")
    seed: int = Field(default=1, ge=0, description="master seed")
    learners: list[str] = Field(default_factory=lambda: list(LEARNER_NAMES))
    threads: int = Field(default=4, ge=1, description="worker cap for extraction and training")

    forest_trees: int = Field(default=100, ge=1)
    random_tree_features: Optional[int] = Field(default=None, ge=1, description="null = floor(log2 M) + 1")
    rep_pruning_fraction: float = Field(default=1 / 3, gt=0.0, lt=1.0)
    rep_min_leaf: int = Field(default=2, ge=1)
    c45_confidence: float = Field(default=0.25, gt=0.0, le=1.0)
    c45_min_leaf: int = Field(default=2, ge=1)

    @field_validator("distances")
    @classmethod
    def _check_distances(cls, value: list[int]) -> list[int]:
        if not value or any(d < 1 for d in value):
            raise ValueError("distances must be a non-empty list of positive integers")
        return value

    @field_validator("angles")
    @classmethod
    def _check_angles(cls, value: list[int]) -> list[int]:
        if not value or any(a not in ANGLES for a in value) or len(set(value)) != len(value):
            raise ValueError(f"angles must be distinct values from {list(ANGLES)}")
        return [a for a in ANGLES if a in value]

    @field_validator("learners")
    @classmethod
    def _check_learners(cls, value: list[str]) -> list[str]:
        unknown = [name for name in value if name not in LEARNER_NAMES]
        if unknown:
            raise ValueError(f"unknown learner(s) {unknown}; choose from {list(LEARNER_NAMES)}")
        if not value:
            raise ValueError("at least one learner is required")
        return value

    @property
    def diffusion(self) -> DiffusionParams:
        return DiffusionParams(
            sigma=self.diffusion_sigma,
            rho=self.diffusion_rho,
            alpha=self.diffusion_alpha,
            contrast=self.diffusion_contrast,
            dt=self.diffusion_dt,
            steps=self.diffusion_steps,
        )

    def learner_params(self, name: str) -> dict[str, Any]:
        """Hyperparameters handed to the trainer registered under `name`."""
        params: dict[str, dict[str, Any]] = {
            "stump": {},
            "random_tree": {"k_features": self.random_tree_features},
            "rep_tree": {
                "pruning_fraction": self.rep_pruning_fraction,
                "min_leaf": self.rep_min_leaf,
            },
            "c45": {"confidence": self.c45_confidence, "min_leaf": self.c45_min_leaf},
            "random_forest": {
                "n_trees": self.forest_trees,
                "k_features": self.random_tree_features,
            },
        }
        return params[name]

    def with_overrides(self, **overrides: Any) -> "PipelineConfig":
        """Copy with the non-None overrides applied and re-validated."""
        data = self.model_dump()
        data.update({key: value for key, value in overrides.items() if value is not None})
        return build_config(data)


def build_config(data: dict[str, Any]) -> PipelineConfig:
    try:
        config = PipelineConfig(**data)
        # validates the diffusion ranges eagerly
        _ = config.diffusion
        return config
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration: {e}") from e


def _environment_overrides() -> dict[str, str]:
    """Settings given through TEXPRINT_* variables (or .env)."""
    overrides = {}
    for key, variable in ENVIRONMENT_KEYS.items():
        value = os.getenv(variable)
        if value:
            overrides[key] = value
    return overrides


def load_config(config_path: Optional[Path] = None) -> PipelineConfig:
    """
    Load a flat JSON configuration document, then apply the environment on
    top. A missing path means defaults; an empty file means defaults too.
    """
    data: dict[str, Any] = {}
    if config_path is not None:
        data = _read_config_file(Path(config_path))
    return build_config({**data, **_environment_overrides()})


def _read_config_file(config_path: Path) -> dict[str, Any]:
    if not config_path.exists():
        raise ConfigError(f"Config file not found: {config_path}")

    text = config_path.read_text().strip()
    if not text:
        return {}
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"Config file {config_path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"Config file {config_path} must hold a flat JSON object")
    nested = [key for key, value in data.items() if isinstance(value, dict)]
    if nested:
        raise ConfigError(f"Config file must be flat; nested keys: {nested}")
    return data


def save_config(config: PipelineConfig, config_path: Path) -> Path:
    config_path.parent.mkdir(parents=True, exist_ok=True)
    with open(config_path, "w") as f:
        json.dump(config.model_dump(mode="json"), f, indent=2)
    return config_path

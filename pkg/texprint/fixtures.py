"""
Synthetic fingerprint-like corpus with planted per-subject ridge textures.

Each subject gets its own ridge period and direction; samples of a subject
differ by phase, a small direction jitter and additive noise. Descriptors
computed on these images separate the subjects, which makes the corpus usable
as an end-to-end fixture without any FVC download.
"""

from pathlib import Path

import numpy as np
from prefect.logging import get_logger

from texprint.imaging import GrayImage, MAX_INTENSITY, save_pgm

logger = get_logger(__name__)

FIXTURE_SIZE = 128


def ridge_image(
    period: float,
    angle: float,
    phase: float = 0.0,
    noise: float = 0.0,
    size: int = FIXTURE_SIZE,
    rng: np.random.Generator | None = None,
) -> GrayImage:
    """
    Sinusoidal ridges of the given period (px) running along `angle`
    (radians, image coordinates), scaled to [0, 255].
    """
    y, x = np.mgrid[0:size, 0:size].astype(np.float64)
    # intensity varies across the ridge direction
    across = -x * np.sin(angle) + y * np.cos(angle)
    pixels = 0.5 + 0.4 * np.cos(2 * np.pi * across / period + phase)
    if noise > 0:
        rng = rng or np.random.default_rng(0)
        pixels = pixels + rng.normal(0.0, noise, pixels.shape)
    return GrayImage(np.clip(pixels, 0.0, 1.0) * MAX_INTENSITY)


def subject_texture(subject: int, subjects: int) -> tuple[float, float]:
    """(period, angle) planted for a subject."""
    period = 5.0 + 7.0 * subject / max(subjects - 1, 1)
    angle = np.pi * subject / subjects
    return period, angle


def synthesize_corpus(
    root: Path | str,
    subjects: int = 4,
    samples: int = 4,
    seed: int = 0,
    size: int = FIXTURE_SIZE,
) -> list[Path]:
    """Write `<subject>_<sample>.pgm` files under `root` and return them in name order."""
    if subjects < 1 or samples < 1:
        raise ValueError("subjects and samples must be positive")
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)

    paths = []
    for subject in range(subjects):
        period, angle = subject_texture(subject, subjects)
        for sample in range(1, samples + 1):
            img = ridge_image(
                period=period,
                angle=angle + rng.normal(0.0, 0.03),
                phase=rng.uniform(0.0, 2 * np.pi),
                noise=0.05,
                size=size,
                rng=rng,
            )
            paths.append(save_pgm(img, root / f"{101 + subject}_{sample}.pgm"))

    logger.info(f"Wrote {len(paths)} synthetic images for {subjects} subjects to {root}")
    return sorted(paths, key=lambda p: p.name)

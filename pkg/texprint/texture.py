"""
Gray-level co-occurrence matrices and the seven statistical descriptors.

GLCMs are accumulated symmetrically and normalized to probabilities before any
descriptor is evaluated, so every descriptor is bounded and invariant under
matrix transposition.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
import pandas as pd

from texprint.errors import TextureError
from texprint.imaging import QuantizedImage

ANGLES = (0, 45, 90, 135)
DISTANCES = (1, 2, 3)

# (dx, dy) per angle for unit distance; y grows downwards, so 90 degrees is "up".
_UNIT_DISPLACEMENT = {
    0: (1, 0),
    45: (1, -1),
    90: (0, -1),
    135: (-1, -1),
}


@dataclass(frozen=True)
class Offset:
    distance: int
    angle: int

    def __post_init__(self):
        if self.distance < 1:
            raise TextureError(f"Offset distance must be positive, got {self.distance}")
        if self.angle not in _UNIT_DISPLACEMENT:
            raise TextureError(f"Offset angle must be one of {ANGLES}, got {self.angle}")

    @property
    def dx(self) -> int:
        return _UNIT_DISPLACEMENT[self.angle][0] * self.distance

    @property
    def dy(self) -> int:
        return _UNIT_DISPLACEMENT[self.angle][1] * self.distance


@dataclass(frozen=True)
class GLCM:
    levels: int
    counts: np.ndarray
    offset: Offset
    total_pairs: int

    def __post_init__(self):
        if self.counts.shape != (self.levels, self.levels):
            raise TextureError("GLCM counts must be a levels x levels grid")
        if int(self.counts.sum()) != self.total_pairs:
            raise TextureError("GLCM total_pairs must equal the sum of all counts")


@dataclass(frozen=True)
class NormalizedGLCM:
    levels: int
    probabilities: np.ndarray
    mean: float
    degenerate: bool = False


@dataclass(frozen=True)
class FeatureVector:
    names: tuple[str, ...]
    values: np.ndarray
    label: str

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (len(self.names),):
            raise TextureError(
                f"Feature vector has {values.shape[0] if values.ndim else 0} values "
                f"for {len(self.names)} attributes"
            )
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "label", str(self.label))

    def as_dict(self) -> dict[str, float]:
        return {name: float(value) for name, value in zip(self.names, self.values)}


def glcm(qimg: QuantizedImage, offset: Offset) -> GLCM:
    """
    Count gray-level pairs (m, n) at the given displacement, symmetrically:
    every in-bounds pair increments both (m, n) and (n, m).
    """
    height, width = qimg.pixels.shape
    dx, dy = offset.dx, offset.dy
    if abs(dx) > width or abs(dy) > height:
        raise TextureError(
            f"Offset ({dx}, {dy}) is larger than the {width}x{height} image"
        )

    levels = qimg.levels
    x0, x1 = max(0, -dx), width - max(0, dx)
    y0, y1 = max(0, -dy), height - max(0, dy)
    if x1 <= x0 or y1 <= y0:
        return GLCM(levels, np.zeros((levels, levels), dtype=np.int64), offset, 0)

    source = qimg.pixels[y0:y1, x0:x1]
    partner = qimg.pixels[y0 + dy:y1 + dy, x0 + dx:x1 + dx]
    pairs = np.bincount(
        (source * levels + partner).ravel(), minlength=levels * levels
    ).reshape(levels, levels)
    counts = (pairs + pairs.T).astype(np.int64)
    return GLCM(levels, counts, offset, int(2 * source.size))


def normalize(g: GLCM) -> NormalizedGLCM:
    if g.total_pairs == 0:
        return NormalizedGLCM(
            levels=g.levels,
            probabilities=np.zeros((g.levels, g.levels)),
            mean=0.0,
            degenerate=True,
        )
    probabilities = g.counts / float(g.total_pairs)
    m = np.arange(g.levels)[:, None]
    return NormalizedGLCM(
        levels=g.levels,
        probabilities=probabilities,
        mean=float((m * probabilities).sum()),
    )


def _grid(P: NormalizedGLCM) -> tuple[np.ndarray, np.ndarray]:
    return np.indices((P.levels, P.levels))


def variance(P: NormalizedGLCM) -> float:
    m, _ = _grid(P)
    return float((((m - P.mean) ** 2) * P.probabilities).sum())


def max_probability(P: NormalizedGLCM) -> float:
    return float(P.probabilities.max())


def homogeneity(P: NormalizedGLCM) -> float:
    m, n = _grid(P)
    return float((P.probabilities / (1.0 + np.abs(m - n))).sum())


def entropy(P: NormalizedGLCM) -> float:
    """-sum p log10 p, with 0 log 0 taken as 0."""
    p = P.probabilities[P.probabilities > 0]
    if p.size == 0:
        return 0.0
    return float(-(p * np.log10(p)).sum())


def energy(P: NormalizedGLCM) -> float:
    return float((P.probabilities ** 2).sum())


def dissimilarity(P: NormalizedGLCM) -> float:
    m, n = _grid(P)
    return float((np.abs(m - n) * P.probabilities).sum())


def contrast(P: NormalizedGLCM) -> float:
    m, n = _grid(P)
    return float((((m - n) ** 2) * P.probabilities).sum())


DESCRIPTORS: dict[str, Callable[[NormalizedGLCM], float]] = {
    "variance": variance,
    "max_probability": max_probability,
    "homogeneity": homogeneity,
    "entropy": entropy,
    "energy": energy,
    "dissimilarity": dissimilarity,
    "contrast": contrast,
}


def attribute_names(angles: Sequence[int] = ANGLES) -> tuple[str, ...]:
    """Canonical attribute order: descriptor-major, angle-minor."""
    return tuple(
        f"{descriptor}_d_avg_a{angle}" for descriptor in DESCRIPTORS for angle in angles
    )


ATTRIBUTE_NAMES = attribute_names()


def descriptor_vector(
    qimg: QuantizedImage,
    distances: Iterable[int] = DISTANCES,
    angles: Sequence[int] = ANGLES,
    label: str = "",
) -> FeatureVector:
    """
    Evaluate every descriptor at every (distance, angle) and average over the
    distances, giving one attribute per (descriptor, angle).

    Offsets whose GLCM is empty are left out of the average; an angle with no
    usable distance at all is an error.
    """
    distances = tuple(distances)
    angles = tuple(angles)
    if not distances:
        raise TextureError("At least one GLCM distance is required")

    per_angle: dict[int, np.ndarray] = {}
    for angle in angles:
        rows = []
        for distance in distances:
            P = normalize(glcm(qimg, Offset(distance, angle)))
            if P.degenerate:
                continue
            rows.append([fn(P) for fn in DESCRIPTORS.values()])
        if not rows:
            raise TextureError(
                f"Every GLCM at angle {angle} is empty for a "
                f"{qimg.width}x{qimg.height} region"
            )
        per_angle[angle] = np.mean(np.asarray(rows), axis=0)

    values = [
        per_angle[angle][k]
        for k in range(len(DESCRIPTORS))
        for angle in angles
    ]
    return FeatureVector(attribute_names(angles), np.asarray(values), label)


def export_glcm_csv(g: GLCM, path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    levels = range(g.levels)
    pd.DataFrame(g.counts, index=pd.Index(levels, name="m"), columns=list(levels)).to_csv(path)
    return path

"""
Blockwise ridge orientation and Poincaré-index core detection.

Angles are ridge directions in [0, pi) measured in image coordinates (x to the
right, y downwards). Block (i, j) is row i, column j of the block grid.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import cv2
import numpy as np
import pandas as pd
from prefect.logging import get_logger
from scipy import ndimage

from texprint.errors import OrientationError
from texprint.imaging import GrayImage, to_uint8

logger = get_logger(__name__)

CORE_INDEX = 0.5
CORE_TOLERANCE = 0.1

# Closed 8-neighbour ring as (di, dj), ordered by increasing atan2(dy, dx) so
# that a core-type singularity sums to +1/2.
RING = (
    (0, 1), (1, 1), (1, 0), (1, -1),
    (0, -1), (-1, -1), (-1, 0), (-1, 1),
)


@dataclass(frozen=True)
class OrientationField:
    angles: np.ndarray
    coherence: np.ndarray
    block_size: int
    image_width: int
    image_height: int

    def __post_init__(self):
        angles = np.asarray(self.angles, dtype=np.float64)
        coherence = np.asarray(self.coherence, dtype=np.float64)
        if angles.ndim != 2 or angles.shape != coherence.shape:
            raise OrientationError("Angle and coherence grids must be 2-D and of equal shape")
        if np.any(angles < 0) or np.any(angles >= np.pi):
            raise OrientationError("Orientation angles must lie in [0, pi)")
        angles = angles.copy()
        coherence = coherence.copy()
        angles.setflags(write=False)
        coherence.setflags(write=False)
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "coherence", coherence)

    @property
    def blocks_y(self) -> int:
        return self.angles.shape[0]

    @property
    def blocks_x(self) -> int:
        return self.angles.shape[1]

    @classmethod
    def from_angles(
        cls,
        angles: np.ndarray,
        block_size: int = 8,
        coherence: Optional[np.ndarray] = None,
    ) -> "OrientationField":
        """Build a field directly from an angle grid (any real angles, folded mod pi)."""
        angles = normalize_angles(np.asarray(angles, dtype=np.float64))
        if coherence is None:
            coherence = np.ones_like(angles)
        return cls(
            angles=angles,
            coherence=coherence,
            block_size=block_size,
            image_width=angles.shape[1] * block_size,
            image_height=angles.shape[0] * block_size,
        )


@dataclass(frozen=True)
class CorePoint:
    x: int
    y: int
    poincare_value: float
    fallback: bool = False
    block: Optional[tuple[int, int]] = None


def normalize_angles(angles: np.ndarray) -> np.ndarray:
    folded = np.mod(angles, np.pi)
    # mod can round up to exactly pi for tiny negative inputs
    return np.where(folded >= np.pi, 0.0, folded)


def compute_orientation_field(
    img: GrayImage,
    block_size: int = 8,
    smoothing: float = 1.0,
) -> OrientationField:
    """
    Estimate the dominant ridge angle per block from gradient moments.

    The doubled-angle moments are Gaussian-smoothed across blocks (sigma in
    block units) before the angle and the coherence are read off.
    """
    if block_size < 4:
        raise OrientationError(f"block_size must be >= 4, got {block_size}")
    blocks_y = img.height // block_size
    blocks_x = img.width // block_size
    if blocks_y < 1 or blocks_x < 1:
        raise OrientationError(
            f"Image {img.width}x{img.height} is smaller than one {block_size}px block"
        )
    if blocks_y < 2 or blocks_x < 2:
        raise OrientationError(
            f"Image {img.width}x{img.height} must span at least 2x2 blocks of {block_size}px"
        )

    gx = ndimage.sobel(img.pixels, axis=1)
    gy = ndimage.sobel(img.pixels, axis=0)

    def block_sum(values: np.ndarray) -> np.ndarray:
        trimmed = values[: blocks_y * block_size, : blocks_x * block_size]
        return trimmed.reshape(blocks_y, block_size, blocks_x, block_size).sum(axis=(1, 3))

    gxx = block_sum(gx * gx)
    gyy = block_sum(gy * gy)
    gxy = block_sum(gx * gy)

    if smoothing > 0:
        gxx = ndimage.gaussian_filter(gxx, smoothing, mode="nearest")
        gyy = ndimage.gaussian_filter(gyy, smoothing, mode="nearest")
        gxy = ndimage.gaussian_filter(gxy, smoothing, mode="nearest")

    sin2 = 2.0 * gxy
    cos2 = gxx - gyy
    angles = normalize_angles(0.5 * np.arctan2(sin2, cos2) + np.pi / 2)

    energy = gxx + gyy
    anisotropy = np.hypot(cos2, sin2)
    scale = max(float(energy.max()), 1.0)
    coherence = np.zeros_like(energy)
    mask = energy > 1e-12 * scale
    coherence[mask] = anisotropy[mask] / energy[mask]

    return OrientationField(
        angles=angles,
        coherence=np.clip(coherence, 0.0, 1.0),
        block_size=block_size,
        image_width=img.width,
        image_height=img.height,
    )


def _wrap_half_pi(delta: float) -> float:
    """Fold an orientation difference into (-pi/2, pi/2]."""
    if delta > np.pi / 2:
        delta -= np.pi
    elif delta <= -np.pi / 2:
        delta += np.pi
    return delta


def poincare_index(field: OrientationField, i: int, j: int) -> float:
    """Total wrapped rotation of the field around the 8-neighbour ring of block (i, j), over 2 pi."""
    if not (1 <= i < field.blocks_y - 1 and 1 <= j < field.blocks_x - 1):
        raise OrientationError(
            f"Block ({i}, {j}) has no complete neighbour ring in a "
            f"{field.blocks_y}x{field.blocks_x} field"
        )
    ring = [field.angles[i + di, j + dj] for di, dj in RING]
    total = 0.0
    for k in range(len(ring)):
        total += _wrap_half_pi(ring[(k + 1) % len(ring)] - ring[k])
    return total / (2 * np.pi)


def poincare_map(field: OrientationField) -> np.ndarray:
    """Poincaré index of every interior block; border blocks are NaN."""
    result = np.full(field.angles.shape, np.nan)
    for i in range(1, field.blocks_y - 1):
        for j in range(1, field.blocks_x - 1):
            result[i, j] = poincare_index(field, i, j)
    return result


def _neighbourhood_coherence(field: OrientationField, i: int, j: int) -> float:
    return float(field.coherence[max(i - 1, 0):i + 2, max(j - 1, 0):j + 2].sum())


def detect_core(field: OrientationField, tolerance: float = CORE_TOLERANCE) -> CorePoint:
    """
    Locate the core as the +1/2 block with the most coherent neighbourhood.

    Falls back to the image centre (flagged) when no block qualifies so that a
    batch over low-quality prints never stops here.
    """
    candidates = []
    if field.blocks_y >= 3 and field.blocks_x >= 3:
        indices = poincare_map(field)
        for i in range(1, field.blocks_y - 1):
            for j in range(1, field.blocks_x - 1):
                if abs(indices[i, j] - CORE_INDEX) <= tolerance:
                    candidates.append((-_neighbourhood_coherence(field, i, j), i, j))

    if not candidates:
        logger.debug("No core-type singularity found, falling back to image centre")
        return CorePoint(
            x=field.image_width // 2,
            y=field.image_height // 2,
            poincare_value=0.0,
            fallback=True,
        )

    _, i, j = min(candidates)
    half = field.block_size // 2
    return CorePoint(
        x=min(j * field.block_size + half, field.image_width - 1),
        y=min(i * field.block_size + half, field.image_height - 1),
        poincare_value=poincare_index(field, i, j),
        block=(i, j),
    )


def export_orientation_csv(field: OrientationField, path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows, cols = np.indices(field.angles.shape)
    frame = pd.DataFrame({
        "block_row": rows.ravel(),
        "block_col": cols.ravel(),
        "angle": field.angles.ravel(),
        "coherence": field.coherence.ravel(),
    })
    frame.to_csv(path, index=False)
    return path


def draw_core_marker(img: GrayImage, core: CorePoint, path: Path | str) -> Path:
    """Write the image as PNG with a green spot on the core (red when it is a fallback)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    canvas = cv2.cvtColor(to_uint8(img), cv2.COLOR_GRAY2BGR)
    colour = (0, 0, 255) if core.fallback else (0, 255, 0)
    radius = max(3, min(img.width, img.height) // 40)
    cv2.circle(canvas, (int(core.x), int(core.y)), radius, colour, thickness=-1)
    cv2.imwrite(str(path), canvas)
    return path

"""
Image ingestion, gray-level quantization and region cropping.

Images are held as float64 grids so that the output of the diffusion filter can
be quantized without an intermediate rounding step. Reading and writing goes
through OpenCV, which handles binary PGM (P5), 8-bit PNG and the TIFF files the
FVC databases are distributed as.
"""

from dataclasses import dataclass
from pathlib import Path

import cv2
import numpy as np

from texprint.errors import ImageError

SUPPORTED_SUFFIXES = (".pgm", ".png", ".tif", ".tiff", ".bmp")
MAX_INTENSITY = 255.0


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class GrayImage:
    """Row-major grid of real intensities in [0, 255]; pixels[y, x]."""

    pixels: np.ndarray

    def __post_init__(self):
        pixels = np.asarray(self.pixels, dtype=np.float64)
        if pixels.ndim != 2:
            raise ImageError(f"Expected a 2-D intensity grid, got {pixels.ndim} dimensions")
        if pixels.shape[0] == 0 or pixels.shape[1] == 0:
            raise ImageError("Image has a zero dimension")
        if not np.all(np.isfinite(pixels)):
            raise ImageError("Image contains non-finite intensities")
        if pixels.min() < 0.0 or pixels.max() > MAX_INTENSITY:
            raise ImageError(
                f"Intensities must lie in [0, 255], got [{pixels.min()}, {pixels.max()}]"
            )
        object.__setattr__(self, "pixels", _frozen(pixels))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class QuantizedImage:
    """Grid of integer gray-level bins in [0, levels - 1]."""

    pixels: np.ndarray
    levels: int

    def __post_init__(self):
        if self.levels < 2:
            raise ImageError(f"levels must be >= 2, got {self.levels}")
        pixels = np.asarray(self.pixels)
        if pixels.ndim != 2 or pixels.shape[0] == 0 or pixels.shape[1] == 0:
            raise ImageError("Quantized image must be a non-empty 2-D grid")
        if not np.issubdtype(pixels.dtype, np.integer):
            raise ImageError("Quantized image must hold integer bins")
        if pixels.min() < 0 or pixels.max() >= self.levels:
            raise ImageError(f"Bins must lie in [0, {self.levels - 1}]")
        object.__setattr__(self, "pixels", _frozen(pixels.astype(np.int64)))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


def load_grayscale(path: Path | str) -> GrayImage:
    """
    Read a single-channel raster image.

    Binary PGM is the canonical format; 8-bit PNG, TIFF and BMP are accepted
    too. 16-bit inputs are rescaled to [0, 255]. Colour images are rejected.
    """
    path = Path(path)
    if not path.exists():
        raise ImageError(f"Image file not found: {path}")
    if path.suffix.lower() not in SUPPORTED_SUFFIXES:
        raise ImageError(f"Unsupported image format '{path.suffix}' for {path.name}")

    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise ImageError(f"Could not decode {path.name} (truncated or malformed file)")
    if raw.ndim == 3 and raw.shape[2] > 1:
        raise ImageError(f"{path.name} is a colour image; only grayscale input is supported")
    if raw.ndim == 3:
        raw = raw[:, :, 0]
    if raw.size == 0:
        raise ImageError(f"{path.name} has a zero dimension")

    if raw.dtype == np.uint8:
        pixels = raw.astype(np.float64)
    elif raw.dtype == np.uint16:
        pixels = raw.astype(np.float64) * (MAX_INTENSITY / 65535.0)
    else:
        raise ImageError(f"Unsupported sample type {raw.dtype} in {path.name}")

    return GrayImage(pixels)


def to_uint8(img: GrayImage) -> np.ndarray:
    return np.clip(np.rint(img.pixels), 0, 255).astype(np.uint8)


def save_pgm(img: GrayImage, path: Path | str) -> Path:
    """Write a binary PGM (P5, maxval 255). Intensities are rounded to integers."""
    path = Path(path)
    if path.suffix.lower() != ".pgm":
        raise ImageError(f"save_pgm expects a .pgm path, got {path.name}")
    path.parent.mkdir(parents=True, exist_ok=True)
    if not cv2.imwrite(str(path), to_uint8(img), [cv2.IMWRITE_PXM_BINARY, 1]):
        raise ImageError(f"Failed to write {path}")
    return path


def save_png(img: GrayImage, path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if not cv2.imwrite(str(path), to_uint8(img)):
        raise ImageError(f"Failed to write {path}")
    return path


def quantize(img: GrayImage, levels: int) -> QuantizedImage:
    """bin = floor(intensity * K / 256), clamped to K - 1."""
    if levels < 2:
        raise ImageError(f"levels must be >= 2, got {levels}")
    bins = np.floor(img.pixels * levels / 256.0).astype(np.int64)
    return QuantizedImage(np.clip(bins, 0, levels - 1), levels)


def crop_region(img: GrayImage, center: tuple[int, int], size: int) -> GrayImage:
    """
    Cut a size x size window centred on center = (x, y).

    A window that would leave the image is translated back inside rather than
    shrunk or padded, so the output is always size x size.
    """
    if size <= 0:
        raise ImageError(f"Crop size must be positive, got {size}")
    if size > img.width or size > img.height:
        raise ImageError(
            f"Crop size {size} exceeds image dimensions {img.width}x{img.height}"
        )

    x, y = int(center[0]), int(center[1])
    left = min(max(x - size // 2, 0), img.width - size)
    top = min(max(y - size // 2, 0), img.height - size)
    return GrayImage(img.pixels[top:top + size, left:left + size])

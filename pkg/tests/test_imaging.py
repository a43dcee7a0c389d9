import cv2
import numpy as np
import pytest

from texprint.errors import ImageError
from texprint.imaging import GrayImage, crop_region, load_grayscale, quantize, save_pgm, save_png


def test_pgm_round_trip_preserves_integer_intensities(tmp_path):
    rng = np.random.default_rng(0)
    pixels = rng.integers(0, 256, size=(17, 23)).astype(np.float64)
    path = save_pgm(GrayImage(pixels), tmp_path / "img.pgm")
    assert path.read_bytes().startswith(b"P5")
    np.testing.assert_array_equal(load_grayscale(path).pixels, pixels)


def test_png_is_accepted(tmp_path):
    pixels = np.full((8, 12), 200.0)
    loaded = load_grayscale(save_png(GrayImage(pixels), tmp_path / "img.png"))
    assert (loaded.width, loaded.height) == (12, 8)
    np.testing.assert_array_equal(loaded.pixels, pixels)


def test_sixteen_bit_input_is_rescaled(tmp_path):
    raw = np.array([[0, 65535], [65535, 0]], dtype=np.uint16)
    path = tmp_path / "deep.png"
    cv2.imwrite(str(path), raw)
    np.testing.assert_allclose(load_grayscale(path).pixels, [[0, 255], [255, 0]])


def test_colour_image_is_rejected(tmp_path):
    path = tmp_path / "colour.png"
    cv2.imwrite(str(path), np.zeros((4, 4, 3), dtype=np.uint8))
    with pytest.raises(ImageError, match="colour"):
        load_grayscale(path)


def test_missing_and_unsupported_files(tmp_path):
    with pytest.raises(ImageError, match="not found"):
        load_grayscale(tmp_path / "absent.pgm")
    jpeg = tmp_path / "photo.jpg"
    jpeg.write_bytes(b"\xff\xd8")
    with pytest.raises(ImageError, match="Unsupported"):
        load_grayscale(jpeg)


def test_truncated_file_is_rejected(tmp_path):
    path = tmp_path / "broken.pgm"
    path.write_bytes(b"P5\n")
    with pytest.raises(ImageError):
        load_grayscale(path)


@pytest.mark.parametrize("pixels", [np.zeros((0, 4)), np.full((2, 2), 256.0), np.full((2, 2), np.nan)])
def test_gray_image_validation(pixels):
    with pytest.raises(ImageError):
        GrayImage(pixels)


def test_gray_image_is_read_only():
    img = GrayImage(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        img.pixels[0, 0] = 1.0


def test_quantize_bins():
    img = GrayImage(np.array([[0.0, 31.0, 32.0, 255.0]]))
    q = quantize(img, 8)
    assert q.pixels.tolist() == [[0, 0, 1, 7]]
    assert quantize(img, 2).pixels.tolist() == [[0, 0, 0, 1]]


@pytest.mark.parametrize("levels", [2, 3, 4, 8, 16, 64, 256])
def test_quantize_every_intensity(levels):
    intensities = np.arange(256, dtype=np.float64)
    q = quantize(GrayImage(intensities.reshape(16, 16)), levels)
    expected = (np.arange(256) * levels // 256).reshape(16, 16)
    np.testing.assert_array_equal(q.pixels, expected)


def test_quantize_midpoint_and_order():
    assert quantize(GrayImage(np.array([[128.0]])), 8).pixels[0, 0] == 4
    values = np.sort(np.random.default_rng(6).uniform(0, 255, 400))
    bins = quantize(GrayImage(values.reshape(20, 20)), 8).pixels.ravel()
    assert np.all(np.diff(bins) >= 0)


def test_quantize_rejects_single_level():
    with pytest.raises(ImageError):
        quantize(GrayImage(np.zeros((2, 2))), 1)


def test_crop_is_translated_inside_the_image():
    pixels = np.arange(100, dtype=np.float64).reshape(10, 10)
    img = GrayImage(pixels)
    corner = crop_region(img, (0, 0), 4)
    np.testing.assert_array_equal(corner.pixels, pixels[:4, :4])
    far = crop_region(img, (9, 9), 4)
    np.testing.assert_array_equal(far.pixels, pixels[6:, 6:])
    centred = crop_region(img, (5, 5), 4)
    np.testing.assert_array_equal(centred.pixels, pixels[3:7, 3:7])


def test_crop_larger_than_image_fails():
    img = GrayImage(np.zeros((10, 20)))
    with pytest.raises(ImageError, match="exceeds"):
        crop_region(img, (10, 5), 11)
    assert crop_region(img, (10, 5), 10).pixels.shape == (10, 10)

import numpy as np
import pytest
from pydantic import ValidationError

from texprint.diffusion import (
    DiffusionParams,
    TensorField,
    diffuse_step,
    diffusion_tensor,
    enhance,
    structure_tensor,
)
from texprint.errors import DiffusionError
from texprint.fixtures import ridge_image
from texprint.imaging import GrayImage


def test_mean_is_conserved_and_extrema_are_respected():
    rng = np.random.default_rng(11)
    params = DiffusionParams(steps=20)
    for _ in range(100):
        pixels = rng.uniform(0, 255, (32, 32))
        out = enhance(GrayImage(pixels), params).pixels
        assert abs(out.mean() - pixels.mean()) <= 1e-9 * pixels.mean()
        assert out.min() >= pixels.min() - 1e-9
        assert out.max() <= pixels.max() + 1e-9


def test_zero_steps_is_identity():
    img = GrayImage(np.random.default_rng(0).uniform(0, 255, (16, 16)))
    assert enhance(img, DiffusionParams(steps=0)) is img


def test_constant_image_is_a_fixed_point():
    img = GrayImage(np.full((20, 24), 77.0))
    np.testing.assert_allclose(enhance(img, DiffusionParams(steps=5)).pixels, 77.0)


def test_on_step_sees_every_step():
    seen = []
    img = GrayImage(np.random.default_rng(3).uniform(0, 255, (16, 16)))
    enhance(img, DiffusionParams(steps=4), on_step=lambda step, stepped: seen.append(step))
    assert seen == [1, 2, 3, 4]


def test_noisy_ridges_get_closer_to_clean_ridges():
    clean = ridge_image(period=8.0, angle=0.0, size=64)
    rng = np.random.default_rng(5)
    noisy = GrayImage(np.clip(clean.pixels + rng.normal(0, 30, clean.pixels.shape), 0, 255))
    enhanced = enhance(noisy, DiffusionParams(steps=20))
    before = np.abs(noisy.pixels - clean.pixels)[8:-8, 8:-8].mean()
    after = np.abs(enhanced.pixels - clean.pixels)[8:-8, 8:-8].mean()
    assert after < before


@pytest.mark.parametrize(
    "overrides",
    [{"dt": 0.3}, {"dt": 0.0}, {"alpha": 0.0}, {"alpha": 1.0}, {"contrast": 0.0}, {"steps": -1}, {"sigma": -1.0}],
)
def test_parameter_ranges(overrides):
    with pytest.raises(ValidationError):
        DiffusionParams(**overrides)


def test_structure_tensor_is_positive_semidefinite():
    img = GrayImage(np.random.default_rng(9).uniform(0, 255, (24, 24)))
    J = structure_tensor(img, sigma=0.5, rho=2.0)
    mu1, mu2 = J.eigenvalues()
    assert np.all(mu1 >= mu2)
    assert np.all(mu2 >= -1e-6 * max(1.0, float(mu1.max())))


def test_diffusion_tensor_eigenvalues():
    shape = (3, 3)
    # strong gradient along x: little diffusion across (x), nearly full along (y)
    J = TensorField(np.full(shape, 1e6), np.zeros(shape), np.zeros(shape))
    D = diffusion_tensor(J, alpha=0.001, C=1.0)
    np.testing.assert_allclose(D.a, 0.001)
    np.testing.assert_allclose(D.b, 0.0, atol=1e-12)
    assert np.all(D.c > 0.99)

    flat = TensorField(np.zeros(shape), np.zeros(shape), np.zeros(shape))
    isotropic = diffusion_tensor(flat, alpha=0.001, C=1.0)
    np.testing.assert_allclose(isotropic.a, 0.001)
    np.testing.assert_allclose(isotropic.c, 0.001)


def test_non_psd_tensor_is_rejected():
    shape = (2, 2)
    J = TensorField(np.full(shape, -1.0), np.zeros(shape), np.ones(shape))
    with pytest.raises(DiffusionError):
        diffusion_tensor(J, alpha=0.001, C=1.0)


def test_step_checks_shape_and_dt():
    img = GrayImage(np.zeros((4, 4)))
    D = TensorField(np.ones((3, 3)), np.zeros((3, 3)), np.ones((3, 3)))
    with pytest.raises(DiffusionError):
        diffuse_step(img, D, 0.1)
    D = TensorField(np.ones((4, 4)), np.zeros((4, 4)), np.ones((4, 4)))
    with pytest.raises(DiffusionError):
        diffuse_step(img, D, 0.5)


def _oriented_tensor(angle: float, shape: tuple[int, int], along: float = 1.0, across: float = 0.001) -> TensorField:
    """Constant tensor with eigenvalue `along` in direction (cos, sin) and `across` normal to it."""
    sin, cos = np.sin(angle), np.cos(angle)
    return TensorField(
        np.full(shape, across * sin ** 2 + along * cos ** 2),
        np.full(shape, (along - across) * sin * cos),
        np.full(shape, across * cos ** 2 + along * sin ** 2),
    )


def _central_divergence(u: np.ndarray, D: TensorField) -> np.ndarray:
    uy, ux = np.gradient(u)
    return np.gradient(D.a * ux + D.b * uy, axis=1) + np.gradient(D.b * ux + D.c * uy, axis=0)


def _rate(img: GrayImage, D: TensorField, dt: float) -> np.ndarray:
    return (diffuse_step(img, D, dt).pixels - img.pixels) / dt


def test_step_along_oblique_ridges_matches_central_differences():
    angle = np.pi / 6
    img = ridge_image(period=12.0, angle=angle, size=48)
    shape = img.pixels.shape
    inner = np.s_[6:-6, 6:-6]

    along = _rate(img, _oriented_tensor(angle, shape), 0.2)[inner]
    isotropic = _rate(img, TensorField(np.ones(shape), np.zeros(shape), np.ones(shape)), 0.2)[inner]
    expected = _central_divergence(img.pixels, _oriented_tensor(angle, shape))[inner]

    scale = np.abs(isotropic).mean()
    # diffusing along the ridges barely changes them
    assert np.abs(along).mean() < 0.08 * scale
    assert np.abs(along - expected).mean() < 0.08 * scale


def test_identity_tensor_is_the_five_point_laplacian():
    pixels = np.random.default_rng(21).uniform(0, 255, (10, 13))
    shape = pixels.shape
    D = TensorField(np.ones(shape), np.zeros(shape), np.ones(shape))
    padded = np.pad(pixels, 1, mode="edge")
    laplacian = (
        padded[1:-1, 2:] + padded[1:-1, :-2] + padded[2:, 1:-1] + padded[:-2, 1:-1] - 4 * pixels
    )
    out = diffuse_step(GrayImage(pixels), D, 0.2).pixels
    np.testing.assert_allclose(out, pixels + 0.2 * laplacian, atol=1e-9)


def test_checkerboard_is_pulled_inside_its_range():
    y, x = np.mgrid[0:8, 0:8]
    pixels = np.where((x + y) % 2 == 0, 255.0, 0.0)
    shape = pixels.shape
    D = TensorField(np.ones(shape), np.zeros(shape), np.ones(shape))
    out = diffuse_step(GrayImage(pixels), D, 0.2).pixels
    assert out.max() < 255.0
    assert out.min() > 0.0
    assert out.mean() == pytest.approx(pixels.mean())


def test_anisotropic_steps_respect_extrema():
    rng = np.random.default_rng(17)
    pixels = rng.uniform(0, 255, (24, 24))
    D = _oriented_tensor(np.pi / 6, pixels.shape)
    img = GrayImage(pixels)
    for _ in range(10):
        img = diffuse_step(img, D, 0.25)
    assert img.pixels.min() >= pixels.min() - 1e-9
    assert img.pixels.max() <= pixels.max() + 1e-9
    assert img.pixels.mean() == pytest.approx(pixels.mean(), rel=1e-12)


def test_structure_tensor_of_a_ramp():
    ramp = GrayImage(np.tile(np.arange(16, dtype=np.float64), (12, 1)))
    J = structure_tensor(ramp, sigma=0.0, rho=0.0)
    np.testing.assert_allclose(J.a[:, 1:-1], 1.0)
    np.testing.assert_allclose(J.b, 0.0)
    np.testing.assert_allclose(J.c, 0.0)


def test_structure_tensor_of_a_constant_image_is_zero():
    J = structure_tensor(GrayImage(np.full((12, 12), 90.0)), sigma=0.5, rho=4.0)
    for component in (J.a, J.b, J.c):
        np.testing.assert_allclose(component, 0.0, atol=1e-12)


def test_diffusion_tensor_closed_form():
    shape = (2, 2)
    J = TensorField(np.full(shape, 4.0), np.zeros(shape), np.ones(shape))
    D = diffusion_tensor(J, alpha=0.01, C=1.0)
    np.testing.assert_allclose(D.a, 0.01)
    np.testing.assert_allclose(D.b, 0.0, atol=1e-15)
    np.testing.assert_allclose(D.c, 0.01 + 0.99 * np.exp(-1.0 / 9.0))


def test_diffusion_tensor_eigenvalues_lie_between_alpha_and_one():
    img = GrayImage(np.random.default_rng(4).uniform(0, 255, (32, 32)))
    params = DiffusionParams()
    J = structure_tensor(img, params.sigma, params.rho)
    lam1, lam2 = diffusion_tensor(J, params.alpha, params.intensity_contrast).eigenvalues()
    assert np.all(lam2 >= params.alpha - 1e-12)
    assert np.all(lam1 <= 1.0 + 1e-12)


def test_enhance_is_bit_identical_across_runs():
    img = ridge_image(period=7.0, angle=0.4, noise=0.1, size=40)
    params = DiffusionParams(steps=6)
    assert np.array_equal(enhance(img, params).pixels, enhance(img, params).pixels)

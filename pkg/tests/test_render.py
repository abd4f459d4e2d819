import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from numpy.lib.stride_tricks import sliding_window_view

from tacsim.geometry import FlatPlate, Grid, PenetrationModel, Pose2D, Sphere, rasterize
from tacsim.render import (BlurCascade, blur, contact_footprint, depth_from_contact, gaussian_kernel, gradients,
                           make_background, render_tactile, shade)


def dense_blur_oracle(img, cascade):
    """Direct 2-D convolution with the outer-product kernel and edge padding."""
    out = np.asarray(img, dtype=np.float64)
    for k in cascade.kernel_sizes:
        w = np.exp(-0.5 * (np.arange(k) - k // 2) ** 2 / (k / 6.0) ** 2)
        w2 = np.outer(w, w) / np.outer(w, w).sum()
        padded = np.pad(out, k // 2, mode="edge")
        out = np.einsum("ijkl,kl->ij", sliding_window_view(padded, (k, k)), w2)
    return out


def test_gaussian_kernel_unit_sum():
    for k in (5, 11, 21, 51, 71):
        w = gaussian_kernel(k)
        assert w.shape == (k,)
        assert w.sum() == pytest.approx(1.0, abs=1e-15)
        assert np.argmax(w) == k // 2


def test_cascade_validation():
    with pytest.raises(ValueError):
        BlurCascade((71, 50))
    with pytest.raises(ValueError):
        BlurCascade((1,))


def test_depth_zero_force(grid):
    hf = rasterize(Sphere(1.97), Pose2D(), grid)
    assert np.all(depth_from_contact(hf, 0.0, PenetrationModel(0.1)) == 0.0)


def test_depth_flat_plate_uniform():
    g = Grid(100, 80, 0.05)
    hf = rasterize(FlatPlate(2.0, 1.5), Pose2D(), g)
    depth = depth_from_contact(hf, 25.0, PenetrationModel(0.02))
    area = np.isfinite(hf.gap).sum() * g.pixel_pitch ** 2
    inside = depth[np.isfinite(hf.gap)]
    np.testing.assert_allclose(inside, 0.02 * 25 / area, rtol=1e-6)
    assert np.all(depth[~np.isfinite(hf.gap)] == 0.0)


def test_depth_sphere_centre(grid):
    hf = rasterize(Sphere(1.97), Pose2D(), Grid(321, 241, 0.05))
    depth = depth_from_contact(hf, 10.0, PenetrationModel(0.14163))
    assert depth.max() == pytest.approx(0.5, abs=1e-3)


def test_blur_constant_image():
    img = np.full((60, 80), 0.37)
    np.testing.assert_allclose(blur(img), img, rtol=1e-9)


def test_blur_conserves_impulse_mass(grid):
    img = np.zeros((240, 320))
    img[120, 160] = 2.5
    out = blur(img)
    assert out.sum() == pytest.approx(2.5, rel=1e-6)
    assert np.all(out[0, :] < 1e-12) and np.all(out[:, 0] < 1e-12)


def test_blur_matches_dense_oracle_on_step_edge():
    img = np.zeros((64, 64))
    img[:, 32:] = 1.0
    cascade = BlurCascade()
    out = blur(img, cascade)
    np.testing.assert_allclose(out, dense_blur_oracle(img, cascade), atol=1e-12)
    row = out[32]
    assert np.all(np.diff(row) >= -1e-15)
    assert out.min() >= 0.0 and out.max() <= 1.0


@settings(max_examples=20, deadline=None)
@given(arrays(np.float64, (24, 30), elements=st.floats(0, 2)))
def test_blur_max_principle(img):
    out = blur(img, BlurCascade((11, 5)))
    assert out.min() >= img.min() - 1e-12
    assert out.max() <= img.max() + 1e-12


def test_gradients_constant_and_ramp():
    g = gradients(np.full((10, 12), 3.0), 0.05)
    assert np.all(g.gx == 0) and np.all(g.gy == 0)
    pitch, alpha = 0.05, 0.7
    x = np.arange(12) * pitch
    ramp = np.tile(alpha * x, (10, 1))
    g = gradients(ramp, pitch)
    np.testing.assert_allclose(g.gx, alpha, rtol=1e-12)
    np.testing.assert_allclose(g.gy, 0.0, atol=1e-15)
    with pytest.raises(ValueError):
        gradients(ramp, 0.0)


def test_gradients_sphere_cap_slope():
    pitch, radius, d = 0.01, 1.97, 0.5
    g_ = Grid(401, 401, pitch)
    hf = rasterize(Sphere(radius), Pose2D(), g_)
    depth = np.maximum(d - hf.gap, 0.0)
    g = gradients(depth, pitch)
    x, y = g_.coordinates()
    rho = np.hypot(x, y)
    a = math.sqrt(radius ** 2 - (radius - d) ** 2)
    rng = np.random.default_rng(3)
    # well inside the cap, away from the rim kink
    idx = np.argwhere(rho < 0.9 * a)
    for r, c in idx[rng.choice(len(idx), 10, replace=False)]:
        slope = rho[r, c] / math.sqrt(radius ** 2 - rho[r, c] ** 2)
        assert math.hypot(g.gx[r, c], g.gy[r, c]) == pytest.approx(slope, abs=2e-3)
    mag = np.hypot(g.gx, g.gy)
    peak = rho[np.unravel_index(np.argmax(mag), mag.shape)]
    assert abs(peak - a) < 2 * pitch


def test_shade_zero_gradient_is_background(lut):
    bg = make_background(lut, (40, 50), noise_amplitude=2, seed=1)
    zero = np.zeros((40, 50))
    res = shade(gradients(zero, 0.05), lut, bg)
    assert res.rgb.tobytes() == bg.tobytes()
    assert res.saturated == 0


def test_shade_saturates_out_of_range(lut):
    bg = make_background(lut, (20, 20))
    ramp = np.tile(np.arange(20) * 5.0, (20, 1))
    res = shade(gradients(ramp, 1.0), lut, bg)
    assert res.saturated > 0
    assert res.rgb.dtype == np.uint8


def test_shade_rejects_shape_mismatch(lut):
    with pytest.raises(ValueError):
        shade(gradients(np.zeros((5, 5)), 1.0), lut, np.zeros((4, 5, 3), np.uint8))


def test_background_noise_bounds(lut):
    flat = np.rint(lut.lookup_flat())
    bg = make_background(lut, (30, 30), noise_amplitude=2, seed=9)
    assert np.abs(bg.astype(float) - flat).max() <= 2
    assert np.array_equal(bg, make_background(lut, (30, 30), noise_amplitude=2, seed=9))


def test_render_zero_force_and_determinism(lut, grid):
    bg = make_background(lut, (240, 320), noise_amplitude=2, seed=4)
    args = (Sphere(1.97), Pose2D(), 0.0, PenetrationModel(0.1), BlurCascade(), lut, bg)
    assert render_tactile(*args).rgb.tobytes() == bg.tobytes()
    a = render_tactile(Sphere(1.97), Pose2D(0.5, 0.2), 8.0, PenetrationModel(0.1), BlurCascade(), lut, bg)
    b = render_tactile(Sphere(1.97), Pose2D(0.5, 0.2), 8.0, PenetrationModel(0.1), BlurCascade(), lut, bg)
    assert a.rgb.tobytes() == b.rgb.tobytes()


def test_footprint_grows_with_force(lut):
    bg = make_background(lut)
    sizes = []
    for force in (5.0, 25.0, 55.0, 80.0):
        res = render_tactile(Sphere(1.97), Pose2D(), force, PenetrationModel(0.1), BlurCascade(), lut, bg)
        sizes.append(contact_footprint(res.rgb, bg))
    assert sizes[2] > sizes[1]
    assert sizes == sorted(sizes)

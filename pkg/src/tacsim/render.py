"""Tactile image rendering: depth from contact, blur cascade, gradients, LUT shading."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .geometry import Grid, HeightField, PenetrationModel, Pose2D, rasterize, solve_penetration_depth

DEFAULT_KERNEL_SIZES = (71, 51, 21, 11, 5)


@dataclass(frozen=True)
class BlurCascade:
    """Successive Gaussian smoothings; sigma of each kernel is ``size / 6``."""

    kernel_sizes: tuple = DEFAULT_KERNEL_SIZES

    def __post_init__(self):
        sizes = tuple(int(k) for k in self.kernel_sizes)
        for k in sizes:
            if k < 3 or k % 2 == 0:
                raise ValueError(f"blur kernel sizes must be odd and >= 3, got {k}")
        object.__setattr__(self, "kernel_sizes", sizes)


def gaussian_kernel(size: int, sigma: float | None = None) -> np.ndarray:
    if sigma is None:
        sigma = size / 6.0
    r = size // 2
    x = np.arange(-r, r + 1, dtype=np.float64)
    w = np.exp(-0.5 * (x / sigma) ** 2)
    return w / w.sum()


class GradientImage(NamedTuple):
    gx: np.ndarray
    gy: np.ndarray


class ShadeResult(NamedTuple):
    rgb: np.ndarray
    saturated: int


def depth_from_contact(hf: HeightField, grip_force: float, pm: PenetrationModel) -> np.ndarray:
    """Indentation depth image for the penetration volume ``c * F_G``."""
    if grip_force < 0:
        raise ValueError("grip force must be >= 0")
    d = solve_penetration_depth(hf, pm.volume(grip_force))
    return np.maximum(d - hf.gap, 0.0)


def _blur_axis(img, weights, axis):
    r = weights.shape[0] // 2
    pad = [(0, 0), (0, 0)]
    pad[axis] = (r, r)
    return kernels.correlate1d_valid(np.pad(img, pad, mode="edge"), weights, axis)


def blur(depth: np.ndarray, cascade: BlurCascade = BlurCascade()) -> np.ndarray:
    """Apply the cascade in order; separable, replicate borders, unit-sum kernels."""
    out = np.asarray(depth, dtype=np.float64)
    for k in cascade.kernel_sizes:
        w = gaussian_kernel(k)
        out = _blur_axis(out, w, 1)
        out = _blur_axis(out, w, 0)
    return out


def gradients(depth: np.ndarray, pixel_pitch: float) -> GradientImage:
    """Central differences inside, one-sided at the borders, in mm per mm."""
    if pixel_pitch <= 0:
        raise ValueError("pixel_pitch must be positive")
    gy, gx = np.gradient(np.asarray(depth, dtype=np.float64), pixel_pitch)
    return GradientImage(gx=gx, gy=gy)


def shade(g: GradientImage, lut, background: np.ndarray) -> ShadeResult:
    """Composite the LUT response delta onto the background image.

    ``out = clip(background + lut(gx, gy) - lut(0, 0), 0, 255)``. Gradients
    outside the LUT lattice are clamped to the edge and counted in
    ``saturated``.
    """
    background = np.asarray(background)
    if background.shape != g.gx.shape + (3,):
        raise ValueError(f"background shape {background.shape} does not match gradients {g.gx.shape}")
    response, saturated = lut.lookup(g.gx, g.gy)
    delta = response - lut.lookup_flat()
    out = np.clip(np.rint(background.astype(np.float64) + delta), 0, 255).astype(np.uint8)
    return ShadeResult(out, saturated)


def make_background(lut, shape=(240, 320), noise_amplitude: int = 0, seed=None) -> np.ndarray:
    """Virtual-gel background: flat LUT response plus optional seeded integer noise.

    The noise is uniform in ``[-noise_amplitude, noise_amplitude]`` per pixel
    and channel and stands in for gel fabrication artefacts.
    """
    flat = np.rint(lut.lookup_flat()).astype(np.int64)
    img = np.broadcast_to(flat, tuple(shape) + (3,)).copy()
    if noise_amplitude:
        rng = np.random.default_rng(seed)
        img += rng.integers(-noise_amplitude, noise_amplitude + 1, size=img.shape)
    return np.clip(img, 0, 255).astype(np.uint8)


def render_depth(shape, pose: Pose2D, grip_force: float, pm: PenetrationModel,
                 cascade: BlurCascade = BlurCascade(), grid: Grid = Grid()) -> np.ndarray:
    """Rasterize, solve the penetration and blur; returns the smoothed depth."""
    hf = rasterize(shape, pose, grid)
    return blur(depth_from_contact(hf, grip_force, pm), cascade)


def render_tactile(shape, pose: Pose2D, grip_force: float, pm: PenetrationModel,
                   cascade: BlurCascade, lut, background: np.ndarray,
                   grid: Grid = Grid()) -> ShadeResult:
    depth = render_depth(shape, pose, grip_force, pm, cascade, grid)
    return shade(gradients(depth, grid.pixel_pitch), lut, background)


def contact_footprint(rgb: np.ndarray, background: np.ndarray) -> int:
    """Number of pixels where the render differs from the background."""
    return int(np.count_nonzero(np.any(rgb != background, axis=-1)))

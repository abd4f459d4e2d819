"""Optical calibration: gradient-to-colour lookup tables and the penetration constant."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import ndimage

from . import kernels
from .errors import CalibrationError, UnreachableVolumeError
from .geometry import Grid, PenetrationModel, Pose2D, Sphere, rasterize, solve_penetration_depth
from .render import BlurCascade, GradientImage, blur, gradients

CALIBRATION_BALL_RADIUS = 1.97  # 3.94 mm diameter ball
IMPRINT_THRESHOLD_MM = 1e-3
AREA_RTOL = 0.02


@dataclass(frozen=True)
class GroundTruthShader:
    """Three coloured directional lights over a Lambertian gel.

    Stands in for the physical sensor when generating calibration targets.
    """

    azimuths_deg: tuple = (0.0, 120.0, 240.0)
    elevation_deg: float = 45.0
    weights: tuple = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))
    ambient: float = 30.0
    gain: float = 140.0

    def light_directions(self) -> np.ndarray:
        el = math.radians(self.elevation_deg)
        return np.array([[math.cos(el) * math.cos(math.radians(az)),
                          math.cos(el) * math.sin(math.radians(az)),
                          math.sin(el)] for az in self.azimuths_deg])


def synth_ground_truth(g: GradientImage, shader: GroundTruthShader = GroundTruthShader()) -> np.ndarray:
    """Render an RGB image straight from the surface normals implied by (gx, gy)."""
    norm = np.sqrt(1.0 + g.gx ** 2 + g.gy ** 2)
    normals = np.stack([g.gx / norm, g.gy / norm, 1.0 / norm], axis=-1)
    cosines = np.maximum(normals @ shader.light_directions().T, 0.0)
    rgb = shader.ambient + shader.gain * (cosines @ np.asarray(shader.weights, dtype=np.float64))
    return np.clip(np.rint(rgb), 0, 255).astype(np.uint8)


@dataclass(eq=False)
class GradientLut:
    """Mean pixel colour per gradient bin on a ``n_bins x n_bins`` node lattice.

    Node ``k`` on each axis sits at slope ``-g_max + k * 2 * g_max / n_bins``,
    so node ``n_bins // 2`` is exactly the zero slope. ``table`` holds the
    per-node colour with empty nodes already filled from their nearest
    populated neighbour; ``counts`` keeps the raw sample counts.
    """

    n_bins: int
    g_max: float
    counts: np.ndarray = field(repr=False)
    table: np.ndarray = field(repr=False)

    @property
    def flat_index(self):
        return self.n_bins // 2

    @property
    def flat_response(self) -> np.ndarray:
        i = self.flat_index
        return self.table[i, i].copy()

    def lookup(self, gx, gy):
        gx = np.atleast_2d(np.asarray(gx, dtype=np.float64))
        gy = np.atleast_2d(np.asarray(gy, dtype=np.float64))
        return kernels.lut_bilinear(self.table, gx, gy, self.g_max)

    def lookup_flat(self) -> np.ndarray:
        zero = np.zeros((1, 1))
        return self.lookup(zero, zero)[0][0, 0]

    def node_slopes(self) -> np.ndarray:
        return -self.g_max + np.arange(self.n_bins) * (2.0 * self.g_max / self.n_bins)

    def to_json(self) -> str:
        rows = [[int(c), *(float(v) for v in rgb)]
                for c, rgb in zip(self.counts.ravel(), self.table.reshape(-1, 3))]
        return json.dumps({
            "n_bins": self.n_bins,
            "g_max": self.g_max,
            "flat_response": [float(v) for v in self.flat_response],
            "bins": rows,
        })

    @classmethod
    def from_json(cls, text: str) -> "GradientLut":
        obj = json.loads(text)
        n = int(obj["n_bins"])
        bins = np.asarray(obj["bins"], dtype=np.float64)
        if bins.shape != (n * n, 4):
            raise CalibrationError(f"LUT has {bins.shape[0]} bins, expected {n * n}")
        return cls(n_bins=n, g_max=float(obj["g_max"]),
                   counts=bins[:, 0].astype(np.int64).reshape(n, n),
                   table=bins[:, 1:].reshape(n, n, 3).copy())


def calibrate_lut(presses, n_bins: int = 64, g_max: float = 3.0) -> GradientLut:
    """Average the colour of every calibration pixel into its gradient bin.

    ``presses`` is a sequence of ``(GradientImage, rgb)`` pairs.
    """
    if n_bins < 2 or n_bins % 2:
        raise CalibrationError("n_bins must be even so that zero slope is a lattice node")
    presses = list(presses)
    if not presses:
        raise CalibrationError("need at least one calibration press")
    counts = np.zeros((n_bins, n_bins), dtype=np.int64)
    sums = np.zeros((n_bins, n_bins, 3))
    for g, rgb in presses:
        if rgb.shape != g.gx.shape + (3,):
            raise CalibrationError("press image and gradient shapes disagree")
        c, s = kernels.lut_accumulate(g.gx, g.gy, rgb, n_bins, g_max)
        counts += c
        sums += s
    populated = counts > 0
    if not populated.any():
        raise CalibrationError("no calibration sample fell inside the gradient range")
    means = np.zeros_like(sums)
    means[populated] = sums[populated] / counts[populated][:, None]
    _, (iy, ix) = ndimage.distance_transform_edt(~populated, return_indices=True)
    table = means[iy, ix]
    return GradientLut(n_bins=n_bins, g_max=float(g_max), counts=counts, table=table)


def press_positions(n: int = 9, spacing=(3.0, 2.0)):
    """Offsets (mm) for ``n`` presses on a near-square grid around the centre."""
    cols = math.ceil(math.sqrt(n))
    rows = math.ceil(n / cols)
    out = []
    for k in range(n):
        r, c = divmod(k, cols)
        out.append(((c - 0.5 * (cols - 1)) * spacing[0], (r - 0.5 * (rows - 1)) * spacing[1]))
    return out


def sphere_press(offset, depth_mm, radius=CALIBRATION_BALL_RADIUS, grid=Grid(),
                 cascade=BlurCascade(), shader=GroundTruthShader()):
    """One synthetic calibration press: (gradients, ground-truth image)."""
    hf = rasterize(Sphere(radius), Pose2D(offset[0], offset[1]), grid)
    depth = blur(np.maximum(depth_mm - hf.gap, 0.0), cascade)
    g = gradients(depth, grid.pixel_pitch)
    return g, synth_ground_truth(g, shader)


def sphere_presses(n: int = 9, radius=CALIBRATION_BALL_RADIUS, depths=(0.3, 1.0), grid=Grid(),
                   cascade=BlurCascade(), shader=GroundTruthShader()):
    """Presses at ``press_positions(n)`` with depths spread evenly over ``depths``."""
    ds = np.linspace(depths[0], depths[1], n) if n > 1 else [0.5 * (depths[0] + depths[1])]
    return [sphere_press(pos, float(d), radius, grid, cascade, shader)
            for pos, d in zip(press_positions(n), ds)]


def contact_bbox(g: GradientImage, min_slope: float = 1e-3):
    """Row/column slices bounding the pixels whose slope exceeds ``min_slope``."""
    mask = np.hypot(g.gx, g.gy) > min_slope
    if not mask.any():
        raise CalibrationError("no contact region in gradient image")
    rows = np.nonzero(mask.any(axis=1))[0]
    cols = np.nonzero(mask.any(axis=0))[0]
    return slice(rows[0], rows[-1] + 1), slice(cols[0], cols[-1] + 1)


class PenetrationFit(NamedTuple):
    model: PenetrationModel
    area: float
    degenerate: bool


def imprint_area(hf, grip_force: float, c: float) -> float:
    """Area (mm^2) of pixels indented deeper than the imprint threshold."""
    d = solve_penetration_depth(hf, c * grip_force)
    count = np.count_nonzero(d - hf.gap > IMPRINT_THRESHOLD_MM)
    return count * hf.pixel_pitch ** 2


def fit_penetration_constant(shape, pose: Pose2D, f_ref: float, area_ref: float,
                             bracket=(0.005, 0.5), grid: Grid = Grid(),
                             iterations: int = 40) -> PenetrationFit:
    """Find ``c`` so the imprint area at ``f_ref`` matches ``area_ref`` within 2%.

    Bisection runs in log-space over ``bracket``. If the imprint area does
    not change across the bracket (flat faces), any ``c`` matches; the
    bracket midpoint is returned with ``degenerate=True``.
    """
    if not area_ref > 0:
        raise CalibrationError("reference imprint area must be positive")
    if f_ref <= 0:
        raise CalibrationError("reference force must be positive")
    c_lo, c_hi = bracket
    if not 0 < c_lo < c_hi:
        raise CalibrationError(f"bad bracket {bracket!r}")
    hf = rasterize(shape, pose, grid)
    tol = AREA_RTOL * area_ref

    def area(c):
        try:
            return imprint_area(hf, f_ref, c)
        except UnreachableVolumeError as exc:
            raise CalibrationError(str(exc)) from exc

    a_lo, a_hi = area(c_lo), area(c_hi)
    if abs(a_lo - area_ref) <= tol and abs(a_hi - area_ref) <= tol:
        c_mid = 0.5 * (c_lo + c_hi)
        return PenetrationFit(PenetrationModel(c_mid), area(c_mid), True)
    if a_hi < area_ref - tol or a_lo > area_ref + tol:
        raise CalibrationError(
            f"imprint area {area_ref:.4g} mm^2 unreachable; bracket gives [{a_lo:.4g}, {a_hi:.4g}]")
    lo, hi = c_lo, c_hi
    for _ in range(iterations):
        mid = math.sqrt(lo * hi)
        if area(mid) >= area_ref:
            hi = mid
        else:
            lo = mid
    best = min((lo, hi), key=lambda c: abs(area(c) - area_ref))
    a_best = area(best)
    if abs(a_best - area_ref) > tol:
        raise CalibrationError(
            f"imprint area jumps past {area_ref:.4g} mm^2 (closest {a_best:.4g}); grid too coarse")
    return PenetrationFit(PenetrationModel(best), a_best, False)

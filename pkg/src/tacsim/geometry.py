"""Analytic object shapes, rasterization to height fields, penetration solving.

All lengths are in millimetres. A height field stores, per sensor pixel, the
gap between the undeformed gel plane and the lowest object surface point
above it; ``inf`` marks pixels the object does not cover.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GeometryError, UnreachableVolumeError

NO_CONTACT = np.inf
MAX_EXTENT_MM = 1.0e6
D_MAX_MM = 10.0
BISECTION_ITERS = 60
VOLUME_RTOL = 1e-6

DEFAULT_WIDTH_PX = 320
DEFAULT_HEIGHT_PX = 240
DEFAULT_PIXEL_PITCH = 0.05


def _check_length(name, value):
    if not math.isfinite(value) or value <= 0.0:
        raise GeometryError(f"{name} must be a positive finite length, got {value!r}")
    if value > MAX_EXTENT_MM:
        raise GeometryError(f"{name}={value!r} mm exceeds the supported range")


@dataclass(frozen=True)
class Sphere:
    radius: float

    def __post_init__(self):
        _check_length("radius", self.radius)

    def gap(self, x, y):
        rho2 = x * x + y * y
        r2 = self.radius * self.radius
        inside = rho2 < r2
        out = np.full(x.shape, NO_CONTACT)
        out[inside] = self.radius - np.sqrt(r2 - rho2[inside])
        return out


@dataclass(frozen=True)
class Cylinder:
    """Infinite cylinder lying in the gel plane, gripped on its lateral surface."""

    radius: float
    axis: tuple = (1.0, 0.0)

    def __post_init__(self):
        _check_length("radius", self.radius)
        ax, ay = (float(v) for v in self.axis)
        norm = math.hypot(ax, ay)
        if not math.isfinite(norm) or norm == 0.0:
            raise GeometryError(f"cylinder axis must be a non-zero in-plane vector, got {self.axis!r}")
        object.__setattr__(self, "axis", (ax / norm, ay / norm))

    def gap(self, x, y):
        ax, ay = self.axis
        s = x * ay - y * ax
        s2 = s * s
        r2 = self.radius * self.radius
        inside = s2 < r2
        out = np.full(x.shape, NO_CONTACT)
        out[inside] = self.radius - np.sqrt(r2 - s2[inside])
        return out


@dataclass(frozen=True)
class Annulus:
    """Flat ring face, e.g. a bearing side."""

    r_inner: float
    r_outer: float

    def __post_init__(self):
        _check_length("r_inner", self.r_inner)
        _check_length("r_outer", self.r_outer)
        if not self.r_inner < self.r_outer:
            raise GeometryError("annulus needs r_inner < r_outer")

    def gap(self, x, y):
        rho = np.hypot(x, y)
        covered = (rho >= self.r_inner) & (rho <= self.r_outer)
        return np.where(covered, 0.0, NO_CONTACT)


@dataclass(frozen=True)
class GearFace:
    """Flat gear face whose rim follows a trapezoidal tooth profile.

    Each tooth period spends 30% of its angle on the flank rising from
    ``r_root`` to ``r_tip``, 20% on the tip land, 30% falling and 20% at root.
    """

    r_root: float
    r_tip: float
    tooth_count: int

    def __post_init__(self):
        _check_length("r_root", self.r_root)
        _check_length("r_tip", self.r_tip)
        if not self.r_tip > self.r_root:
            raise GeometryError("gear needs r_tip > r_root")
        if int(self.tooth_count) != self.tooth_count or self.tooth_count < 3:
            raise GeometryError("gear needs an integer tooth_count >= 3")

    def rim_radius(self, theta):
        phase = np.mod(theta * self.tooth_count / (2.0 * math.pi), 1.0)
        rise = np.clip(phase / 0.3, 0.0, 1.0)
        fall = np.clip((0.8 - phase) / 0.3, 0.0, 1.0)
        profile = np.minimum(rise, fall)
        return self.r_root + (self.r_tip - self.r_root) * profile

    def gap(self, x, y):
        rho = np.hypot(x, y)
        covered = rho <= self.rim_radius(np.arctan2(y, x))
        return np.where(covered, 0.0, NO_CONTACT)


@dataclass(frozen=True)
class FlatPlate:
    width: float
    height: float

    def __post_init__(self):
        _check_length("width", self.width)
        _check_length("height", self.height)

    def gap(self, x, y):
        covered = (np.abs(x) <= 0.5 * self.width) & (np.abs(y) <= 0.5 * self.height)
        return np.where(covered, 0.0, NO_CONTACT)


SHAPE_TYPES = {
    "sphere": Sphere,
    "cylinder": Cylinder,
    "annulus": Annulus,
    "gear_face": GearFace,
    "flat_plate": FlatPlate,
}


def shape_from_dict(spec: dict):
    """Build a shape from ``{"type": "sphere", "radius": 1.97}``-style dicts."""
    spec = dict(spec)
    kind = spec.pop("type", None)
    if kind not in SHAPE_TYPES:
        raise GeometryError(f"unknown shape type {kind!r}; expected one of {sorted(SHAPE_TYPES)}")
    if kind == "cylinder" and "axis" in spec:
        spec["axis"] = tuple(spec["axis"])
    try:
        return SHAPE_TYPES[kind](**spec)
    except TypeError as exc:
        raise GeometryError(f"bad parameters for {kind}: {exc}") from None


def shape_to_dict(shape) -> dict:
    for name, cls in SHAPE_TYPES.items():
        if type(shape) is cls:
            out = {"type": name}
            out.update({k: (list(v) if isinstance(v, tuple) else v) for k, v in shape.__dict__.items()})
            return out
    raise GeometryError(f"not a known shape: {shape!r}")


@dataclass(frozen=True)
class Pose2D:
    offset_x: float = 0.0
    offset_y: float = 0.0
    rotation: float = 0.0

    def __post_init__(self):
        for name in ("offset_x", "offset_y", "rotation"):
            if not math.isfinite(getattr(self, name)):
                raise GeometryError(f"pose {name} must be finite")


@dataclass(frozen=True)
class Grid:
    width_px: int = DEFAULT_WIDTH_PX
    height_px: int = DEFAULT_HEIGHT_PX
    pixel_pitch: float = DEFAULT_PIXEL_PITCH

    def __post_init__(self):
        if self.width_px <= 0 or self.height_px <= 0:
            raise GeometryError("grid dimensions must be positive")
        if not (math.isfinite(self.pixel_pitch) and self.pixel_pitch > 0):
            raise GeometryError("pixel_pitch must be positive")

    def coordinates(self):
        """Pixel-centre coordinates in mm, origin at the grid centre, y down rows."""
        xs = (np.arange(self.width_px) - 0.5 * (self.width_px - 1)) * self.pixel_pitch
        ys = (np.arange(self.height_px) - 0.5 * (self.height_px - 1)) * self.pixel_pitch
        return np.meshgrid(xs, ys)


@dataclass(frozen=True, eq=False)
class HeightField:
    gap: np.ndarray
    pixel_pitch: float

    @property
    def width_px(self):
        return self.gap.shape[1]

    @property
    def height_px(self):
        return self.gap.shape[0]

    def covered(self):
        return np.isfinite(self.gap)


@dataclass(frozen=True)
class PenetrationModel:
    """Penetration volume proportional to grip force, ``V = c * F_G``."""

    c: float

    def __post_init__(self):
        if not (math.isfinite(self.c) and self.c > 0):
            raise GeometryError(f"penetration constant c must be > 0, got {self.c!r}")

    def volume(self, grip_force):
        return self.c * grip_force


def rasterize(shape, pose: Pose2D = Pose2D(), grid: Grid = Grid()) -> HeightField:
    """Sample the shape's gap to the gel plane at every pixel centre."""
    x, y = grid.coordinates()
    dx = x - pose.offset_x
    dy = y - pose.offset_y
    cos_r, sin_r = math.cos(pose.rotation), math.sin(pose.rotation)
    # world -> shape frame is a rotation by -rotation
    local_x = cos_r * dx + sin_r * dy
    local_y = -sin_r * dx + cos_r * dy
    gap = shape.gap(local_x, local_y)
    gap = np.where(np.isfinite(gap), np.maximum(gap, 0.0), NO_CONTACT)
    gap.setflags(write=False)
    return HeightField(gap=gap, pixel_pitch=grid.pixel_pitch)


def intersection_volume(hf: HeightField, d: float) -> float:
    """Volume in mm^3 swept into the gel when the object is pressed depth ``d``."""
    if d <= 0.0:
        return 0.0
    depth = np.maximum(d - hf.gap, 0.0)
    return float(depth.sum()) * hf.pixel_pitch ** 2


def solve_penetration_depth(hf: HeightField, target_volume: float, d_max: float = D_MAX_MM) -> float:
    """Bisect the monotone map depth -> volume for ``target_volume``."""
    if target_volume < 0.0 or not math.isfinite(target_volume):
        raise GeometryError(f"target volume must be finite and >= 0, got {target_volume!r}")
    if target_volume == 0.0:
        return 0.0
    if not np.isfinite(hf.gap).any():
        raise UnreachableVolumeError("height field has no contact pixels")
    if intersection_volume(hf, d_max) < target_volume:
        raise UnreachableVolumeError(
            f"volume {target_volume:.6g} mm^3 needs more than {d_max} mm penetration; "
            "the force is non-physical for this geometry"
        )
    lo, hi = 0.0, d_max
    tol = VOLUME_RTOL * target_volume
    d = hi
    for _ in range(BISECTION_ITERS):
        d = 0.5 * (lo + hi)
        err = intersection_volume(hf, d) - target_volume
        if abs(err) <= tol:
            break
        if err < 0.0:
            lo = d
        else:
            hi = d
    return d

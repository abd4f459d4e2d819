"""Named analytic stand-ins for the gearbox parts plus the calibration ball.

Friction coefficients are the per-class simulation values; the ratio-fit
parameters are the published per-part corrections. Penetration constants
are defaults chosen to give 0.1-0.4 mm indentation over 20-80 N and should
be replaced by :func:`tacsim.optical.fit_penetration_constant` results.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .friction import RatioFit
from .geometry import (Annulus, Cylinder, GearFace, GeometryError, PenetrationModel, Pose2D, Sphere,
                       shape_from_dict, shape_to_dict)


@dataclass(frozen=True)
class ObjectSpec:
    name: str
    shape: object
    mu_sim: float
    penetration: PenetrationModel
    pose: Pose2D = field(default_factory=Pose2D)
    n_contacts: int = 2

    def to_dict(self):
        return {
            "name": self.name,
            "shape": shape_to_dict(self.shape),
            "pose": {"offset_x": self.pose.offset_x, "offset_y": self.pose.offset_y,
                     "rotation": self.pose.rotation},
            "mu_sim": self.mu_sim,
            "c": self.penetration.c,
            "n_contacts": self.n_contacts,
        }


CATALOG = {
    "ball_bearing": ObjectSpec("ball_bearing", Annulus(4.0, 6.5), 0.14, PenetrationModel(0.5)),
    "long_shaft": ObjectSpec("long_shaft", Cylinder(5.0, (1.0, 0.0)), 0.168, PenetrationModel(0.15)),
    "gear": ObjectSpec("gear", GearFace(5.0, 6.0, 17), 0.15, PenetrationModel(0.75), Pose2D(-3.0, 0.0)),
    "roller_bearing": ObjectSpec("roller_bearing", Annulus(3.0, 5.5), 0.14, PenetrationModel(0.5)),
    "calibration_ball": ObjectSpec("calibration_ball", Sphere(1.97), 0.15, PenetrationModel(0.1416)),
}

PART_CORRECTIONS = {
    "ball_bearing": RatioFit(1.20, -4.34, np.zeros((2, 2))),
    "long_shaft": RatioFit(1.05, -3.20, np.zeros((2, 2))),
    "gear": RatioFit(1.36, -12.15, np.zeros((2, 2))),
    "roller_bearing": RatioFit(1.10, 10.15, np.zeros((2, 2))),
}


def get_object(name: str) -> ObjectSpec:
    try:
        return CATALOG[name]
    except KeyError:
        raise GeometryError(f"unknown object {name!r}; known: {', '.join(sorted(CATALOG))}") from None


def object_from_config(entry) -> ObjectSpec:
    """Accept a catalog name or a dict; dict keys override the catalog entry of the same name."""
    if isinstance(entry, str):
        return get_object(entry)
    entry = dict(entry)
    name = entry.get("name")
    if not name:
        raise GeometryError("object entries need a name")
    base = CATALOG.get(name)
    if "shape" in entry:
        shape = shape_from_dict(entry["shape"])
    elif base is not None:
        shape = base.shape
    else:
        raise GeometryError(f"object {name!r} is not in the catalog and has no shape")
    pose = Pose2D(**entry["pose"]) if "pose" in entry else (base.pose if base else Pose2D())
    mu = entry.get("mu_sim", base.mu_sim if base else None)
    c = entry.get("c", base.penetration.c if base else None)
    if mu is None or c is None:
        raise GeometryError(f"object {name!r} needs mu_sim and c")
    n_contacts = entry.get("n_contacts", base.n_contacts if base else 2)
    return ObjectSpec(name, shape, float(mu), PenetrationModel(float(c)), pose, int(n_contacts))

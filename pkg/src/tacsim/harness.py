"""Dataset sweeps: objects x grip forces x repetitions -> images, traces, labels.

Every record draws its randomness from ``SeedSequence([seed, object_index,
force_index, repetition])`` so results do not depend on execution order or
on the number of worker processes.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io as tio
from .errors import TacsimError
from .friction import RatioFit, corrected_mu
from .geometry import Grid
from .objects import ObjectSpec, object_from_config
from .optical import GradientLut, calibrate_lut, sphere_presses
from .pullsim import (FRICTION_JITTER, ActuatorModel, ForceProfile, GripConfig, LabelParams,
                      jittered_pull)
from .render import BlurCascade, gradients, make_background, render_depth, shade

log = logging.getLogger(__name__)

SEED_ENV = "TACSIM_SEED"
MANIFEST_NAME = "manifest.jsonl"
GEL_A, GEL_B = 0xA, 0xB


def resolve_seed(flag=None, config_seed=None) -> int:
    """Seed precedence: command-line flag, then ``TACSIM_SEED``, then config."""
    if flag is not None:
        return int(flag)
    env = os.environ.get(SEED_ENV)
    if env not in (None, ""):
        return int(env)
    return int(config_seed or 0)


@dataclass
class SweepConfig:
    objects: list
    grip_forces: list
    repetitions: int = 10
    profile: ForceProfile = field(default_factory=ForceProfile)
    actuator: ActuatorModel = field(default_factory=ActuatorModel)
    label_params: LabelParams = field(default_factory=LabelParams)
    ratio_fits: dict = field(default_factory=dict)
    seed: int = 0
    output_dir: str = "dataset"
    friction_jitter: float = FRICTION_JITTER
    background_noise: int = 2
    trace_decimation: int = 1
    lut_path: str | None = None

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        for f in self.grip_forces:
            if not 5.0 <= f <= 80.0:
                raise ValueError(f"grip force {f} N outside [5, 80] N")
        names = [o.name for o in self.objects]
        if len(set(names)) != len(names):
            raise ValueError("object names must be unique")

    @classmethod
    def from_dict(cls, obj: dict, seed_flag=None, output_dir=None) -> "SweepConfig":
        obj = dict(obj)
        return cls(
            objects=[object_from_config(o) for o in obj.pop("objects")],
            grip_forces=[float(f) for f in obj.pop("grip_forces")],
            repetitions=int(obj.pop("repetitions", 10)),
            profile=ForceProfile(**obj.pop("profile", {})),
            actuator=ActuatorModel(**obj.pop("actuator", {})),
            label_params=LabelParams(**obj.pop("label_params", {})),
            ratio_fits={k: RatioFit.from_dict(v) for k, v in obj.pop("ratio_fits", {}).items()},
            seed=resolve_seed(seed_flag, obj.pop("seed", 0)),
            output_dir=output_dir or obj.pop("output_dir", "dataset"),
            friction_jitter=float(obj.pop("friction_jitter", FRICTION_JITTER)),
            background_noise=int(obj.pop("background_noise", 2)),
            trace_decimation=int(obj.pop("trace_decimation", 1)),
            lut_path=obj.pop("lut", None),
        )

    def echo(self) -> dict:
        """Config as recorded in the manifest header (output location excluded)."""
        return {
            "objects": [o.to_dict() for o in self.objects],
            "grip_forces": self.grip_forces,
            "repetitions": self.repetitions,
            "profile": vars(self.profile),
            "actuator": vars(self.actuator),
            "label_params": vars(self.label_params),
            "ratio_fits": {k: v.to_dict() for k, v in sorted(self.ratio_fits.items())},
            "seed": self.seed,
            "friction_jitter": self.friction_jitter,
            "background_noise": self.background_noise,
            "trace_decimation": self.trace_decimation,
            "lut": self.lut_path,
        }


def default_lut() -> GradientLut:
    return calibrate_lut(sphere_presses(9))


def _gel_backgrounds(lut, seed, noise, shape):
    return tuple(make_background(lut, shape, noise, np.random.SeedSequence([seed, gel]))
                 for gel in (GEL_A, GEL_B))


def _record_stem(obj: ObjectSpec, force):
    return f"{obj.name}_{force:g}N"


def _run_cell(cfg: SweepConfig, lut: GradientLut, backgrounds, oi: int, fi: int):
    """All repetitions for one (object, grip force) cell; returns manifest entries."""
    obj = cfg.objects[oi]
    force = cfg.grip_forces[fi]
    out = Path(cfg.output_dir)
    stem = _record_stem(obj, force)
    ids = [f"{obj.name}-{fi:02d}-{ri:03d}" for ri in range(cfg.repetitions)]
    base = {"object": obj.name, "object_index": oi, "force_index": fi, "grip_force": force}
    try:
        grid = Grid()
        depth = render_depth(obj.shape, obj.pose, force, obj.penetration, BlurCascade(), grid)
        jaw_a = shade(gradients(depth, grid.pixel_pitch), lut, backgrounds[0])
        # jaw B faces the mirrored contact on the opposite gel
        jaw_b = shade(gradients(np.fliplr(depth), grid.pixel_pitch), lut, backgrounds[1])
        img_a = f"images/{stem}_jawA.ppm"
        img_b = f"images/{stem}_jawB.ppm"
        sha_a = tio.write_ppm(out / img_a, jaw_a.rgb)
        sha_b = tio.write_ppm(out / img_b, jaw_b.rgb)
        mu = obj.mu_sim
        if obj.name in cfg.ratio_fits:
            mu = corrected_mu(obj.mu_sim, cfg.ratio_fits[obj.name], force)
        grip = GripConfig(force, mu, obj.n_contacts)
    except (TacsimError, ValueError) as exc:
        log.warning("cell %s failed: %s", stem, exc)
        return [{"type": "failed", "record_id": rid, **base, "repetition": ri, "error": str(exc)}
                for ri, rid in enumerate(ids)]

    entries = []
    for ri, rid in enumerate(ids):
        ss = np.random.SeedSequence([cfg.seed, oi, fi, ri])
        try:
            tr, label, mu_used = jittered_pull(grip, cfg.profile, cfg.actuator, cfg.label_params,
                                               ss, cfg.friction_jitter)
            trace_path = f"traces/{stem}_r{ri:03d}.csv"
            sha_t = tio.write_trace(out / trace_path, tr, cfg.trace_decimation)
        except (TacsimError, ValueError) as exc:
            entries.append({"type": "failed", "record_id": rid, **base, "repetition": ri, "error": str(exc)})
            continue
        entries.append({
            "type": "record", "record_id": rid, **base, "repetition": ri,
            "mu_sim": obj.mu_sim, "mu_used": mu_used,
            "image_a": img_a, "image_b": img_b, "sha256_a": sha_a, "sha256_b": sha_b,
            "saturated_a": jaw_a.saturated, "saturated_b": jaw_b.saturated,
            "trace": trace_path, "sha256_trace": sha_t,
            "t_slip": label.t_slip, "f_pull_max": label.f_pull_max,
        })
    return entries


def _write_atomic(path: Path, text: str):
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run_sweep(cfg: SweepConfig, jobs: int = 1, lut: GradientLut | None = None) -> dict:
    """Run the whole sweep and write ``manifest.jsonl`` last, atomically.

    Returns ``{"header": ..., "entries": [...], "path": ...}``.
    """
    out = Path(cfg.output_dir)
    (out / "images").mkdir(parents=True, exist_ok=True)
    (out / "traces").mkdir(parents=True, exist_ok=True)
    if lut is None:
        lut = GradientLut.from_json(Path(cfg.lut_path).read_text()) if cfg.lut_path else default_lut()
    grid = Grid()
    backgrounds = _gel_backgrounds(lut, cfg.seed, cfg.background_noise, (grid.height_px, grid.width_px))
    cells = [(oi, fi) for oi in range(len(cfg.objects)) for fi in range(len(cfg.grip_forces))]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_run_cell, cfg, lut, backgrounds, oi, fi) for oi, fi in cells]
            results = [f.result() for f in futures]
    else:
        results = [_run_cell(cfg, lut, backgrounds, oi, fi) for oi, fi in cells]
    entries = [e for cell in results for e in cell]
    header = {"type": "header", "config": cfg.echo(),
              "n_records": sum(e["type"] == "record" for e in entries),
              "n_failed": sum(e["type"] == "failed" for e in entries)}
    lines = [json.dumps(header, sort_keys=True)] + [json.dumps(e, sort_keys=True) for e in entries]
    path = out / MANIFEST_NAME
    _write_atomic(path, "\n".join(lines) + "\n")
    log.info("sweep wrote %d records (%d failed) to %s", header["n_records"], header["n_failed"], path)
    return {"header": header, "entries": entries, "path": str(path)}


def load_manifest(path) -> dict:
    lines = [json.loads(line) for line in Path(path).read_text().splitlines() if line.strip()]
    if not lines or lines[0].get("type") != "header":
        raise ValueError(f"{path} is not a sweep manifest")
    return {"header": lines[0], "entries": lines[1:], "path": str(path)}


def verify_manifest(manifest: dict) -> list:
    """Return the list of checksum mismatches (empty when intact)."""
    root = Path(manifest["path"]).parent
    bad = []
    for e in manifest["entries"]:
        if e["type"] != "record":
            continue
        for key, sha in (("image_a", "sha256_a"), ("image_b", "sha256_b")):
            data = tio.encode_ppm(tio.read_ppm(root / e[key]))
            if tio.hashlib.sha256(data).hexdigest() != e[sha]:
                bad.append((e["record_id"], key))
        if tio.sha256_file(root / e["trace"]) != e["sha256_trace"]:
            bad.append((e["record_id"], "trace"))
    return bad


def summarize(manifest: dict) -> list:
    """Mean and RMS spread of labels per (object, grip force), in manifest order."""
    groups = {}
    for e in manifest["entries"]:
        if e["type"] == "record":
            groups.setdefault((e["object"], e["grip_force"]), []).append(e["f_pull_max"])
    if not groups:
        raise ValueError("manifest has no successful records")
    rows = []
    for (name, force), labels in groups.items():
        x = np.asarray(labels)
        mean = float(x.mean())
        rows.append({"object": name, "grip_force": force, "n": len(x), "mean": mean,
                     "rms": float(np.sqrt(np.mean((x - mean) ** 2)))})
    return rows


def summary_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["object", "grip_force", "n", "mean", "rms"])
    for r in rows:
        writer.writerow([r["object"], f"{r['grip_force']:g}", r["n"], f"{r['mean']:.6g}", f"{r['rms']:.6g}"])
    return buf.getvalue()

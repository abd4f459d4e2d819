"""Command-line interface: ``tacsim <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 calibration/fit failure, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path


from . import io as tio
from .errors import CalibrationError, FitError, GeometryError, UnreachableVolumeError
from .friction import calibration_pipeline
from .geometry import Grid, Pose2D, shape_from_dict
from .harness import SweepConfig, default_lut, load_manifest, resolve_seed, run_sweep, summarize, summary_csv
from .metrics import compare
from .objects import get_object, object_from_config
from .optical import GradientLut, GroundTruthShader, calibrate_lut, fit_penetration_constant, sphere_presses
from .pullsim import ActuatorModel, ForceProfile, GripConfig, LabelParams, extract_label, simulate_pull
from .render import BlurCascade, make_background, render_depth, render_tactile

EXIT_OK, EXIT_USAGE, EXIT_FIT, EXIT_IO = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load_json(path):
    return json.loads(Path(path).read_text())


def _load_lut(path):
    return GradientLut.from_json(Path(path).read_text()) if path else default_lut()


def cmd_calibrate_optical(args):
    cfg = _load_json(args.config)
    shader = GroundTruthShader(**cfg.get("shader", {}))
    presses = sphere_presses(
        n=int(cfg.get("n_presses", 9)),
        radius=float(cfg.get("sphere_radius", 1.97)),
        depths=tuple(cfg.get("depths", (0.3, 1.0))),
        shader=shader,
    )
    lut = calibrate_lut(presses, int(cfg.get("n_bins", 64)), float(cfg.get("g_max", 3.0)))
    Path(args.out).write_text(lut.to_json())
    print(json.dumps({"n_bins": lut.n_bins, "populated": int((lut.counts > 0).sum()),
                      "flat_response": lut.flat_response.tolist()}))


def cmd_fit_penetration(args):
    cfg = _load_json(args.config)
    if "object" in cfg:
        obj = get_object(cfg["object"])
        shape, pose = obj.shape, obj.pose
    else:
        shape = shape_from_dict(cfg["shape"])
        pose = Pose2D(**cfg.get("pose", {}))
    fit = fit_penetration_constant(shape, pose, float(cfg["f_ref"]), float(cfg["area_ref"]),
                                   tuple(cfg.get("bracket", (0.005, 0.5))))
    result = {"c": fit.model.c, "area": fit.area, "degenerate": fit.degenerate}
    Path(args.out).write_text(json.dumps(result, indent=2))
    print(json.dumps(result))


def _resolve_object(args):
    if args.config:
        for entry in _load_json(args.config).get("objects", []):
            obj = object_from_config(entry)
            if obj.name == args.object:
                return obj
    return get_object(args.object)


def cmd_render(args):
    obj = _resolve_object(args)
    lut = _load_lut(args.lut)
    grid = Grid()
    bg = make_background(lut, (grid.height_px, grid.width_px), args.background_noise,
                         resolve_seed(args.seed, 0))
    pm = obj.penetration if args.c is None else type(obj.penetration)(args.c)
    res = render_tactile(obj.shape, obj.pose, args.force, pm, BlurCascade(), lut, bg, grid)
    sha = tio.write_ppm(args.out, res.rgb)
    if args.depth_out:
        tio.write_depth(args.depth_out, render_depth(obj.shape, obj.pose, args.force, pm))
    print(json.dumps({"out": args.out, "sha256": sha, "saturated": res.saturated}))


def cmd_pull(args):
    obj = _resolve_object(args)
    mu = obj.mu_sim if args.mu is None else args.mu
    grip = GripConfig(args.force, mu, obj.n_contacts)
    actuator = ActuatorModel(sensor_gain=args.gain, noise_sigma=args.noise)
    tr = simulate_pull(grip, ForceProfile(), actuator, LabelParams(), seed=resolve_seed(args.seed, 0))
    tio.write_trace(args.out, tr, args.decimation)
    if args.label:
        label = extract_label(tr)
        print(json.dumps({"t_slip": label.t_slip, "f_pull_max": label.f_pull_max,
                          "terminated_reason": tr.terminated_reason}))


def cmd_fit_friction(args):
    exp = tio.read_force_points(args.exp)
    sim = tio.read_force_points(args.sim)
    cal = calibration_pipeline(exp, sim, args.mu_sim)
    text = cal.to_json()
    Path(args.out).write_text(text)
    print(text)


def cmd_sweep(args):
    cfg = SweepConfig.from_dict(_load_json(args.config), seed_flag=args.seed, output_dir=args.out_dir)
    m = run_sweep(cfg, jobs=args.jobs)
    print(json.dumps({"manifest": m["path"], "records": m["header"]["n_records"],
                      "failed": m["header"]["n_failed"]}))


def cmd_compare(args):
    a = tio.read_ppm(args.a)
    b = tio.read_ppm(args.b)
    print(json.dumps(compare(a, b).to_dict()))


def cmd_summarize(args):
    text = summary_csv(summarize(load_manifest(args.manifest)))
    Path(args.out).write_text(text)
    sys.stdout.write(text)


def build_parser():
    p = _Parser(prog="tacsim", description="Synthetic tactile grip-stability data.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("calibrate-optical", help="sphere presses -> gradient LUT")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_calibrate_optical)

    s = sub.add_parser("fit-penetration", help="fit the volume-per-force constant")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_fit_penetration)

    for name, func, helptext in (("render", cmd_render, "render one tactile image"),
                                 ("pull", cmd_pull, "simulate one pull experiment")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--object", required=True)
        s.add_argument("--force", type=float, required=True)
        s.add_argument("--out", required=True)
        s.add_argument("--config", help="sweep-style JSON with custom object definitions")
        s.add_argument("--seed", type=int)
        s.set_defaults(func=func)
        if name == "render":
            s.add_argument("--lut")
            s.add_argument("--c", type=float, help="override penetration constant (mm^3/N)")
            s.add_argument("--background-noise", type=int, default=0)
            s.add_argument("--depth-out", help="also write the blurred depth image")
        else:
            s.add_argument("--label", action="store_true", help="print the extracted label as JSON")
            s.add_argument("--mu", type=float)
            s.add_argument("--gain", type=float, default=1.0)
            s.add_argument("--noise", type=float, default=0.1)
            s.add_argument("--decimation", type=int, default=1)

    s = sub.add_parser("fit-friction", help="ratio fit a + b/F_G from max-pull-force CSVs")
    s.add_argument("--exp", required=True)
    s.add_argument("--sim", required=True)
    s.add_argument("--mu-sim", type=float, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_fit_friction)

    s = sub.add_parser("sweep", help="generate a labelled dataset")
    s.add_argument("--config", required=True)
    s.add_argument("--out-dir", required=True)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_sweep)

    s = sub.add_parser("compare", help="MSE / PSNR / SSIM of two PPM images")
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("summarize", help="per-(object, force) label statistics")
    s.add_argument("--manifest", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_summarize)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (CalibrationError, FitError, UnreachableVolumeError) as exc:
        print(f"tacsim: {exc}", file=sys.stderr)
        return EXIT_FIT
    except (OSError, json.JSONDecodeError) as exc:
        print(f"tacsim: {exc}", file=sys.stderr)
        return EXIT_IO
    except (GeometryError, ValueError, KeyError, TypeError) as exc:
        print(f"tacsim: invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

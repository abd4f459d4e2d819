"""Step-force pull experiment as a stick-slip state machine, and label extraction."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .kernels._numpy import STOP_DISPLACEMENT

TRACKING_EPSILON = 3.0
NOISE_SIGMA = 0.1
MAX_FORCE_STEPS = 120
FRICTION_JITTER = 0.02


@dataclass(frozen=True)
class ForceProfile:
    f0: float = 1.0
    df: float = 1.0
    dt_step: float = 0.104

    def __post_init__(self):
        if not (self.df > 0 and self.dt_step > 0 and self.f0 >= 0):
            raise ValueError("force profile needs df > 0, dt_step > 0, f0 >= 0")


@dataclass(frozen=True)
class GripConfig:
    """Grip under test. ``mu`` is the static coefficient per contact."""

    grip_force: float
    mu: float
    n_contacts: int = 2
    kinetic_ratio: float = 0.8
    effective_mass: float = 2.0

    def __post_init__(self):
        if not 5.0 <= self.grip_force <= 80.0:
            raise ValueError(f"grip force {self.grip_force} N outside [5, 80] N")
        if self.mu < 0 or not math.isfinite(self.mu):
            raise ValueError("mu must be finite and >= 0")
        if self.n_contacts not in (1, 2):
            raise ValueError("n_contacts must be 1 or 2")
        if self.effective_mass <= 0:
            raise ValueError("effective_mass must be positive")

    @property
    def breakaway_force(self) -> float:
        return self.n_contacts * self.mu * self.grip_force


@dataclass(frozen=True)
class ActuatorModel:
    tau: float = 0.05
    dt_sim: float = 0.002
    sensor_gain: float = 1.0
    noise_sigma: float = NOISE_SIGMA

    def __post_init__(self):
        if not 0 < self.dt_sim < self.tau:
            raise ValueError("actuator needs 0 < dt_sim < tau")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")


@dataclass(frozen=True)
class LabelParams:
    epsilon: float = TRACKING_EPSILON
    dz_threshold: float = 5.0
    z_tolerance: float = 1e-6

    def __post_init__(self):
        if not (self.epsilon > 0 and self.dz_threshold > 0 and self.z_tolerance >= 0):
            raise ValueError("label parameters must be positive")


@dataclass(frozen=True, eq=False)
class PullTrace:
    t: np.ndarray
    f_des: np.ndarray
    f_meas: np.ndarray
    z: np.ndarray
    terminated_reason: str

    def __len__(self):
        return self.t.shape[0]

    def settled_indices(self) -> np.ndarray:
        """Indices of the last sample on each force plateau."""
        idx = np.nonzero(np.diff(self.f_des) != 0)[0]
        if self.terminated_reason == "max_steps" and len(self):
            idx = np.append(idx, len(self) - 1)
        return idx


class SlipLabel(NamedTuple):
    t_slip: float
    f_pull_max: float


def target_force(t: float, p: ForceProfile = ForceProfile()) -> float:
    """Commanded pull force; plateaus are right-open ``[i*dt, (i+1)*dt)``."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return p.f0 + math.floor(t / p.dt_step + 1e-9) * p.df


def simulate_pull(g: GripConfig, p: ForceProfile = ForceProfile(), a: ActuatorModel = ActuatorModel(),
                  lp: LabelParams = LabelParams(), seed=None) -> PullTrace:
    """Integrate one pull at ``a.dt_sim`` until the jaw slides ``lp.dz_threshold``.

    The applied force lags the target with time constant ``a.tau``. While
    it stays at or below the breakaway force the grip sticks and the sensor
    sees the applied force; once exceeded the grip slides, transmits
    ``kinetic_ratio * F_break`` and the surplus accelerates the jaw.
    """
    n_max = int(math.ceil(MAX_FORCE_STEPS * p.dt_step / a.dt_sim)) + 2
    if a.noise_sigma > 0:
        noise = np.random.default_rng(seed).normal(0.0, a.noise_sigma, n_max)
    else:
        noise = np.zeros(n_max)
    t, f_des, f_meas, z, n, reason = kernels.pull_integrate(
        p.f0, p.df, p.dt_step, a.dt_sim, a.tau, g.breakaway_force, g.kinetic_ratio,
        g.effective_mass, a.sensor_gain, lp.dz_threshold, MAX_FORCE_STEPS, noise)
    return PullTrace(t=t[:n].copy(), f_des=f_des[:n].copy(), f_meas=f_meas[:n].copy(), z=z[:n].copy(),
                     terminated_reason="displacement" if reason == STOP_DISPLACEMENT else "max_steps")


def _tracking_points(tr: PullTrace, lp: LabelParams) -> np.ndarray:
    idx = tr.settled_indices()
    ok = np.abs(tr.f_meas[idx] - tr.f_des[idx]) < lp.epsilon
    # a plateau only counts while the jaw has not started to slide
    ok &= tr.z[idx] - tr.z[0] <= lp.z_tolerance
    return idx[ok]


def extract_label(tr: PullTrace, p: ForceProfile = ForceProfile(), lp: LabelParams = LabelParams()) -> SlipLabel:
    """Latest settled sample still tracking the target within epsilon."""
    if len(tr) == 0:
        raise ValueError("empty trace")
    good = _tracking_points(tr, lp)
    if good.size == 0:
        return SlipLabel(float(tr.t[0]), 0.0)
    k = good[-1]
    return SlipLabel(float(tr.t[k]), max(float(tr.f_meas[k]), 0.0))


def calibrate_sensor_gain(sim: PullTrace, ref: PullTrace, lp: LabelParams = LabelParams()) -> float:
    """Least-squares scalar mapping simulated onto reference measured force.

    Only samples up to the slip time of both traces and present in both
    (matched by timestamp) are used.
    """
    def pre_slip(tr):
        good = _tracking_points(tr, lp)
        if good.size == 0:
            return np.array([], dtype=np.int64)
        return np.arange(good[-1] + 1)

    i_sim, i_ref = pre_slip(sim), pre_slip(ref)
    keys_sim = np.rint(sim.t[i_sim] * 1e9).astype(np.int64)
    keys_ref = np.rint(ref.t[i_ref] * 1e9).astype(np.int64)
    _, a_idx, b_idx = np.intersect1d(keys_sim, keys_ref, return_indices=True)
    if a_idx.size == 0:
        raise ValueError("traces share no pre-slip samples")
    s = sim.f_meas[i_sim][a_idx]
    r = ref.f_meas[i_ref][b_idx]
    denom = float(np.dot(s, s))
    if denom == 0.0:
        raise ValueError("simulated pre-slip force is identically zero")
    return float(np.dot(s, r)) / denom


class RepeatStats(NamedTuple):
    mean: float
    rms: float
    labels: np.ndarray


def repetition_seeds(seed, n):
    if isinstance(seed, (list, tuple, np.ndarray)):
        if len(seed) != n:
            raise ValueError("need one seed per repetition")
        return [np.random.SeedSequence(int(s)) for s in seed]
    return np.random.SeedSequence(seed).spawn(n)


def jittered_pull(g: GripConfig, p: ForceProfile, a: ActuatorModel, lp: LabelParams,
                  seed_seq: np.random.SeedSequence, jitter: float = FRICTION_JITTER):
    """One repetition: jitter mu by ``jitter`` (relative sd), simulate, label.

    Returns ``(trace, label, mu_used)``.
    """
    jitter_rng, noise_rng = (np.random.default_rng(s) for s in seed_seq.spawn(2))
    mu = g.mu * (1.0 + jitter * jitter_rng.standard_normal()) if jitter > 0 else g.mu
    gi = GripConfig(g.grip_force, max(mu, 0.0), g.n_contacts, g.kinetic_ratio, g.effective_mass)
    tr = simulate_pull(gi, p, a, lp, seed=noise_rng)
    return tr, extract_label(tr, p, lp), gi.mu


def repeat_stats(g: GripConfig, p: ForceProfile = ForceProfile(), a: ActuatorModel = ActuatorModel(),
                 lp: LabelParams = LabelParams(), n: int = 10, seed=None,
                 jitter: float = FRICTION_JITTER) -> RepeatStats:
    """Mean and RMS spread of ``n`` labels with per-repetition friction jitter.

    ``seed`` is either one integer (spawned into ``n`` child streams) or an
    explicit sequence of ``n`` per-repetition seeds.
    """
    if n < 2:
        raise ValueError("need at least 2 repetitions")
    labels = np.empty(n)
    for i, ss in enumerate(repetition_seeds(seed, n)):
        labels[i] = jittered_pull(g, p, a, lp, ss, jitter)[1].f_pull_max
    mean = float(labels.mean())
    rms = float(np.sqrt(np.mean((labels - mean) ** 2)))
    return RepeatStats(mean, rms, labels)

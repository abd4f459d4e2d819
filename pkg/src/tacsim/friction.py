"""Friction correction: linear and ratio least-squares fits, corrected
coefficients and their propagated uncertainty."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import FitError


@dataclass(frozen=True, eq=False)
class LinearFit:
    slope: float
    intercept: float
    covariance: np.ndarray
    residuals: np.ndarray

    def __call__(self, x):
        return self.slope * np.asarray(x, dtype=np.float64) + self.intercept


@dataclass(frozen=True, eq=False)
class RatioFit:
    """``r(F_G) = a + b / F_G`` with covariance ordered (a, b)."""

    a: float
    b: float
    covariance: np.ndarray

    def __call__(self, grip_force):
        return self.a + self.b / np.asarray(grip_force, dtype=np.float64)

    def to_dict(self):
        return {"a": self.a, "b": self.b, "cov": self.covariance.tolist()}

    @classmethod
    def from_dict(cls, obj):
        cov = np.asarray(obj.get("cov", [[0.0, 0.0], [0.0, 0.0]]), dtype=np.float64)
        return cls(float(obj["a"]), float(obj["b"]), cov)


def _ols(design, y):
    """Unweighted least squares. Returns (params, covariance, residuals).

    The covariance is the residual variance (``n - p`` degrees of freedom)
    times the inverse normal matrix; with no spare degrees of freedom it is
    reported as zero.
    """
    design = np.asarray(design, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, p = design.shape
    normal = design.T @ design
    if np.linalg.matrix_rank(design) < p:
        raise FitError("singular fit: need at least two distinct abscissae")
    normal_inv = np.linalg.inv(normal)
    params = normal_inv @ (design.T @ y)
    resid = y - design @ params
    if n > p:
        cov = normal_inv * float(resid @ resid) / (n - p)
    else:
        cov = np.zeros((p, p))
    return params, cov, resid


def fit_linear(points) -> LinearFit:
    """Straight line ``y = slope * x + intercept`` through ``(x, y)`` points."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if pts.shape[0] < 2:
        raise FitError("need at least two points")
    x, y = pts[:, 0], pts[:, 1]
    (slope, intercept), cov, resid = _ols(np.column_stack([x, np.ones_like(x)]), y)
    return LinearFit(float(slope), float(intercept), cov, resid)


def fit_ratio(points) -> RatioFit:
    """Fit ``r = a + b / F_G`` to ``(F_G, r)`` points."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if pts.shape[0] < 2:
        raise FitError("need at least two points")
    fg, r = pts[:, 0], pts[:, 1]
    if np.any(fg <= 0):
        raise FitError("grip forces must be positive")
    (a, b), cov, _ = _ols(np.column_stack([np.ones_like(fg), 1.0 / fg]), r)
    return RatioFit(float(a), float(b), cov)


def corrected_mu(mu_sim: float, fit: RatioFit, grip_force: float) -> float:
    """Grip-force dependent friction coefficient ``mu_sim * (a + b / F_G)``."""
    if grip_force <= 0:
        raise FitError("grip force must be positive")
    mu = mu_sim * (fit.a + fit.b / grip_force)
    if mu <= 0:
        raise FitError(f"correction gives non-positive friction coefficient {mu:.4g} at F_G = {grip_force} N")
    return mu


def ratio_sigma(fit: RatioFit, grip_force):
    """Propagated standard deviation of ``a + b / F_G``."""
    fg = np.asarray(grip_force, dtype=np.float64)
    cov = fit.covariance
    var = cov[0, 0] + cov[1, 1] / fg ** 2 + 2.0 * cov[0, 1] / fg
    scale = abs(cov[0, 0]) + abs(cov[1, 1]) / fg ** 2
    # a PSD covariance only goes negative here through rounding
    if np.any(var < -1e-12 * scale):
        raise AssertionError("negative propagated variance; covariance is not PSD")
    return np.sqrt(np.maximum(var, 0.0))


def relative_uncertainty(fit: RatioFit, grip_force):
    """sigma(mu_corr) / mu_corr, which equals sigma(r) / r at fixed mu_sim."""
    fg = np.asarray(grip_force, dtype=np.float64)
    if np.any(fg <= 0):
        raise FitError("grip force must be positive")
    r = fit.a + fit.b / fg
    if np.any(r <= 0):
        raise FitError("ratio a + b/F_G is non-positive in the requested range")
    out = ratio_sigma(fit, fg) / r
    return float(out) if out.ndim == 0 else out


def max_relative_uncertainty(fit: RatioFit, f_lo=20.0, f_hi=80.0, n=121) -> float:
    return float(np.max(relative_uncertainty(fit, np.linspace(f_lo, f_hi, n))))


@dataclass(frozen=True, eq=False)
class FrictionCalibration:
    mu_sim: float
    ratio_fit: RatioFit
    experiment_fit: LinearFit
    predict: Callable[[float], float]

    def to_dict(self, f_range=(20.0, 80.0)):
        return {
            "mu_sim": self.mu_sim,
            "a": self.ratio_fit.a,
            "b": self.ratio_fit.b,
            "cov": self.ratio_fit.covariance.tolist(),
            "rel_uncertainty_max_over_range": max_relative_uncertainty(self.ratio_fit, *f_range),
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(**kw), indent=2)


def calibration_pipeline(exp_points, sim_points, mu_sim: float,
                         simulate: Callable[[float, float], float] | None = None) -> FrictionCalibration:
    """Fit the experiment-to-simulation ratio and build a corrected predictor.

    ``exp_points`` and ``sim_points`` are ``(F_G, F_pull_max)`` pairs. The
    experiment is smoothed by a straight line; simulation values are used
    pointwise. ``simulate(mu, F_G)`` re-runs the simulator with a corrected
    coefficient; without it the simulator is taken as Coulomb-proportional
    in mu and a through-origin line fitted to ``sim_points``.
    """
    exp = np.asarray(exp_points, dtype=np.float64).reshape(-1, 2)
    sim = np.asarray(sim_points, dtype=np.float64).reshape(-1, 2)
    if len(np.unique(exp[:, 0])) < 2 or len(np.unique(sim[:, 0])) < 2:
        raise FitError("need at least two grip forces in both data sets")
    if np.any(sim[:, 1] <= 0):
        raise FitError("simulated pull forces must be positive")
    exp_fit = fit_linear(exp)
    ratios = exp_fit(sim[:, 0]) / sim[:, 1]
    rfit = fit_ratio(np.column_stack([sim[:, 0], ratios]))

    if simulate is None:
        per_newton = float(sim[:, 0] @ sim[:, 1] / (sim[:, 0] @ sim[:, 0]))

        def simulate(mu, fg):
            return per_newton * fg * mu / mu_sim

    def predict(grip_force):
        return simulate(corrected_mu(mu_sim, rfit, grip_force), grip_force)

    return FrictionCalibration(mu_sim, rfit, exp_fit, predict)

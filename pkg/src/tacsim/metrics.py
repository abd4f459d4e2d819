"""Image similarity: MSE, PSNR and SSIM on 8-bit RGB images."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from . import kernels
from .render import gaussian_kernel

PEAK = 255
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
K1, K2 = 0.01, 0.03


class MetricReport(NamedTuple):
    mse: float
    psnr: float
    ssim: float

    def to_dict(self):
        return {"mse": self.mse,
                "psnr": "inf" if math.isinf(self.psnr) else self.psnr,
                "ssim": self.ssim}


def _check_pair(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    return a, b


def mse(a, b) -> float:
    """Mean squared error over all pixels and channels, summed in integers."""
    a, b = _check_pair(a, b)
    diff = a.astype(np.int64) - b.astype(np.int64)
    return int((diff * diff).sum()) / diff.size


def psnr_from_mse(value: float) -> float:
    if value == 0:
        return math.inf
    return 10.0 * math.log10(PEAK * PEAK / value)


def psnr(a, b) -> float:
    return psnr_from_mse(mse(a, b))


def _filter_valid(img, w):
    return kernels.correlate1d_valid(kernels.correlate1d_valid(img, w, 1), w, 0)


def ssim_map(a, b) -> np.ndarray:
    """Local SSIM of two single-channel images at every full window position."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if min(a.shape) < SSIM_WINDOW:
        raise ValueError(f"images must be at least {SSIM_WINDOW}x{SSIM_WINDOW}")
    w = gaussian_kernel(SSIM_WINDOW, SSIM_SIGMA)
    c1 = (K1 * PEAK) ** 2
    c2 = (K2 * PEAK) ** 2
    mu_a = _filter_valid(a, w)
    mu_b = _filter_valid(b, w)
    var_a = _filter_valid(a * a, w) - mu_a * mu_a
    var_b = _filter_valid(b * b, w) - mu_b * mu_b
    cov = _filter_valid(a * b, w) - mu_a * mu_b
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return num / den


def ssim_raw(a, b) -> float:
    """Mean SSIM over windows, averaged over channels; range [-1, 1]."""
    a, b = _check_pair(a, b)
    if a.ndim == 2:
        return float(ssim_map(a, b).mean())
    return float(np.mean([ssim_map(a[..., c], b[..., c]).mean() for c in range(a.shape[-1])]))


def ssim(a, b) -> float:
    """SSIM clamped to [0, 1] for reporting."""
    return min(max(ssim_raw(a, b), 0.0), 1.0)


def compare(a, b) -> MetricReport:
    m = mse(a, b)
    return MetricReport(mse=m, psnr=psnr_from_mse(m), ssim=ssim(a, b))

"""numba-compiled versions of the kernels in ``_numpy``."""

import math

import numpy as np
from numba import njit

from ._numpy import STOP_DISPLACEMENT, STOP_MAX_STEPS
from ._numpy import pull_integrate as _pull_integrate_py


@njit(cache=True)
def _correlate_rows(img, weights):
    k = weights.shape[0]
    h, w = img.shape
    m = w - k + 1
    out = np.zeros((h, m))
    for r in range(h):
        for i in range(m):
            acc = weights[0] * img[r, i]
            for j in range(1, k):
                acc += weights[j] * img[r, i + j]
            out[r, i] = acc
    return out


@njit(cache=True)
def _correlate_cols(img, weights):
    k = weights.shape[0]
    h, w = img.shape
    m = h - k + 1
    out = np.zeros((m, w))
    for i in range(m):
        for c in range(w):
            out[i, c] = weights[0] * img[i, c]
        for j in range(1, k):
            wj = weights[j]
            for c in range(w):
                out[i, c] += wj * img[i + j, c]
    return out


def correlate1d_valid(img, weights, axis):
    img = np.ascontiguousarray(img, dtype=np.float64)
    weights = np.ascontiguousarray(weights, dtype=np.float64)
    k = weights.shape[0]
    n = img.shape[axis]
    if n < k:
        raise ValueError(f"axis {axis} has {n} samples, fewer than the {k}-tap kernel")
    if axis == 0:
        return _correlate_cols(img, weights)
    return _correlate_rows(img, weights)


correlate1d_valid.__doc__ = "numba twin of :func:`tacsim.kernels._numpy.correlate1d_valid`."

# same source as the numpy path, compiled
_pull_jit = njit(cache=True)(_pull_integrate_py)


def pull_integrate(f0, df, dt_step, dt_sim, tau, f_break, kinetic_ratio, mass,
                   gain, dz_threshold, max_steps, noise):
    return _pull_jit(float(f0), float(df), float(dt_step), float(dt_sim), float(tau),
                     float(f_break), float(kinetic_ratio), float(mass), float(gain),
                     float(dz_threshold), int(max_steps),
                     np.ascontiguousarray(noise, dtype=np.float64))


@njit(cache=True)
def _accumulate(gx, gy, rgb, n_bins, g_max):
    step = 2.0 * g_max / n_bins
    counts = np.zeros((n_bins, n_bins), dtype=np.int64)
    sums = np.zeros((n_bins, n_bins, 3))
    h, w = gx.shape
    for r in range(h):
        for c in range(w):
            ix = int(math.floor((gx[r, c] + g_max) / step + 0.5))
            iy = int(math.floor((gy[r, c] + g_max) / step + 0.5))
            if ix < 0 or ix >= n_bins or iy < 0 or iy >= n_bins:
                continue
            counts[iy, ix] += 1
            for ch in range(3):
                sums[iy, ix, ch] += rgb[r, c, ch]
    return counts, sums


def lut_accumulate(gx, gy, rgb, n_bins, g_max):
    return _accumulate(np.ascontiguousarray(gx, dtype=np.float64),
                       np.ascontiguousarray(gy, dtype=np.float64),
                       np.ascontiguousarray(rgb), int(n_bins), float(g_max))


@njit(cache=True)
def _bilinear(table, gx, gy, g_max):
    n_bins = table.shape[0]
    step = 2.0 * g_max / n_bins
    top = float(n_bins - 1)
    h, w = gx.shape
    out = np.empty((h, w, 3))
    saturated = 0
    for r in range(h):
        for c in range(w):
            ux = (gx[r, c] + g_max) / step
            uy = (gy[r, c] + g_max) / step
            if ux < 0.0 or ux > top or uy < 0.0 or uy > top:
                saturated += 1
            ux = min(max(ux, 0.0), top)
            uy = min(max(uy, 0.0), top)
            ix = min(int(math.floor(ux)), n_bins - 2)
            iy = min(int(math.floor(uy)), n_bins - 2)
            fx = ux - ix
            fy = uy - iy
            for ch in range(3):
                out[r, c, ch] = ((1.0 - fy) * (1.0 - fx) * table[iy, ix, ch]
                                 + (1.0 - fy) * fx * table[iy, ix + 1, ch]
                                 + fy * (1.0 - fx) * table[iy + 1, ix, ch]
                                 + fy * fx * table[iy + 1, ix + 1, ch])
    return out, saturated


def lut_bilinear(table, gx, gy, g_max):
    out, saturated = _bilinear(np.ascontiguousarray(table, dtype=np.float64),
                               np.ascontiguousarray(gx, dtype=np.float64),
                               np.ascontiguousarray(gy, dtype=np.float64), float(g_max))
    return out, int(saturated)


__all__ = ["STOP_DISPLACEMENT", "STOP_MAX_STEPS", "correlate1d_valid", "lut_accumulate",
           "lut_bilinear", "pull_integrate"]

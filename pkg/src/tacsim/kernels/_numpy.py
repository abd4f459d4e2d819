"""Pure-numpy implementations of the hot kernels (reference path)."""

import math

import numpy as np

STOP_DISPLACEMENT = 0
STOP_MAX_STEPS = 1


def correlate1d_valid(img, weights, axis):
    """Correlate a 2-D array with ``weights`` along ``axis``, valid region only.

    ``out[i] = sum_j weights[j] * img[i + j]`` along the chosen axis, so the
    output is ``len(weights) - 1`` shorter there.
    """
    img = np.asarray(img, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    k = weights.shape[0]
    n = img.shape[axis]
    if n < k:
        raise ValueError(f"axis {axis} has {n} samples, fewer than the {k}-tap kernel")
    m = n - k + 1
    if axis == 0:
        out = weights[0] * img[0:m, :]
        for j in range(1, k):
            out = out + weights[j] * img[j:j + m, :]
    else:
        out = weights[0] * img[:, 0:m]
        for j in range(1, k):
            out = out + weights[j] * img[:, j:j + m]
    return out


def pull_integrate(f0, df, dt_step, dt_sim, tau, f_break, kinetic_ratio, mass,
                   gain, dz_threshold, max_steps, noise):
    """Fixed-step stick-slip integration of one pull experiment.

    Returns ``(t, f_des, f_meas, z, n, reason)`` where the arrays have
    ``len(noise)`` slots and only the first ``n`` are filled.
    """
    n_max = noise.shape[0]
    t_out = np.zeros(n_max)
    fdes_out = np.zeros(n_max)
    fmeas_out = np.zeros(n_max)
    z_out = np.zeros(n_max)

    alpha = dt_sim / tau
    f_app = 0.0
    z = 0.0
    v = 0.0
    slipping = False
    reason = STOP_MAX_STEPS
    n = n_max
    for k in range(n_max):
        t = k * dt_sim
        # 1e-9 absorbs float noise in k*dt_sim/dt_step at plateau boundaries
        step = math.floor(t / dt_step + 1e-9)
        if step >= max_steps:
            n = k
            break
        f_des = f0 + step * df
        f_app = f_app + alpha * (f_des - f_app)
        if not slipping and f_app > f_break:
            slipping = True
        if slipping:
            transmitted = kinetic_ratio * f_break
            # N/kg = m/s^2, stored in mm
            acc = (f_app - transmitted) / mass * 1000.0
            v = v + acc * dt_sim
            if v < 0.0:
                v = 0.0
            z = z + v * dt_sim
        else:
            transmitted = f_app
        t_out[k] = t
        fdes_out[k] = f_des
        fmeas_out[k] = gain * transmitted + noise[k]
        z_out[k] = z
        if z > dz_threshold:
            n = k + 1
            reason = STOP_DISPLACEMENT
            break
    return t_out, fdes_out, fmeas_out, z_out, n, reason


def _bin_step(n_bins, g_max):
    return 2.0 * g_max / n_bins


def lut_accumulate(gx, gy, rgb, n_bins, g_max):
    """Histogram (gx, gy) samples onto the LUT node lattice.

    Node ``k`` sits at ``-g_max + k * step`` with ``step = 2 * g_max / n_bins``.
    Each sample goes to its nearest node; samples beyond the outer nodes by
    more than half a step are dropped. Returns ``(counts, sums)`` with shapes
    ``(n_bins, n_bins)`` and ``(n_bins, n_bins, 3)``, indexed ``[iy, ix]``.
    """
    step = _bin_step(n_bins, g_max)
    ix = np.floor((gx.ravel() + g_max) / step + 0.5).astype(np.int64)
    iy = np.floor((gy.ravel() + g_max) / step + 0.5).astype(np.int64)
    keep = (ix >= 0) & (ix < n_bins) & (iy >= 0) & (iy < n_bins)
    flat = iy[keep] * n_bins + ix[keep]
    counts = np.bincount(flat, minlength=n_bins * n_bins).astype(np.int64)
    colors = rgb.reshape(-1, 3)[keep].astype(np.float64)
    sums = np.empty((n_bins * n_bins, 3))
    for c in range(3):
        sums[:, c] = np.bincount(flat, weights=colors[:, c], minlength=n_bins * n_bins)
    return counts.reshape(n_bins, n_bins), sums.reshape(n_bins, n_bins, 3)


def lut_bilinear(table, gx, gy, g_max):
    """Bilinear lookup of ``table[iy, ix, channel]`` at gradients (gx, gy).

    Coordinates outside the node lattice are clamped to the edge. Returns
    ``(values, saturated)`` where ``saturated`` counts clamped pixels.
    """
    n_bins = table.shape[0]
    step = _bin_step(n_bins, g_max)
    top = float(n_bins - 1)
    ux = (gx + g_max) / step
    uy = (gy + g_max) / step
    sat = (ux < 0.0) | (ux > top) | (uy < 0.0) | (uy > top)
    ux = np.clip(ux, 0.0, top)
    uy = np.clip(uy, 0.0, top)
    ix = np.minimum(np.floor(ux).astype(np.int64), n_bins - 2)
    iy = np.minimum(np.floor(uy).astype(np.int64), n_bins - 2)
    fx = (ux - ix)[..., None]
    fy = (uy - iy)[..., None]
    out = ((1.0 - fy) * (1.0 - fx) * table[iy, ix]
           + (1.0 - fy) * fx * table[iy, ix + 1]
           + fy * (1.0 - fx) * table[iy + 1, ix]
           + fy * fx * table[iy + 1, ix + 1])
    return out, int(np.count_nonzero(sat))

"""Hot inner loops with a numba path and a pure-numpy reference path.

``band_powers`` and ``loudness_segments`` dispatch on :data:`USE_NUMBA`.
The ``*_numpy`` variants are always importable and are what the numba
versions are checked against in the test suite and ``benchmarks/``.
"""
import numpy as np

from ._accel import USE_NUMBA, jit

__all__ = [
    "band_powers",
    "band_powers_numpy",
    "loudness_segments",
    "loudness_segments_numpy",
    "USE_NUMBA",
]


def band_powers_numpy(power, bin_band, n_bands):
    """Sum per-bin power into bands; bins mapped to -1 are dropped."""
    keep = bin_band >= 0
    return np.bincount(bin_band[keep], weights=power[keep], minlength=n_bands)


def _band_powers_loop(power, bin_band, n_bands):
    out = np.zeros(n_bands)
    for k in range(power.shape[0]):
        b = bin_band[k]
        if b >= 0:
            out[b] += power[k]
    return out


def _loudness_segments_loop(core, zup, rns, usl):
    # Upper-slope spreading of core loudness over the critical-band rate axis
    # (DIN 45631 / ISO 532 B stationary procedure). Each output segment starts
    # at z0 with value n0 and falls with `slope` sone/Bark/Bark until z1.
    n_max = 32 * core.shape[0]
    z0 = np.zeros(n_max)
    z1 = np.zeros(n_max)
    n0 = np.zeros(n_max)
    slope = np.zeros(n_max)
    count = 0

    last_range = rns.shape[0] - 1
    last_col = usl.shape[1] - 1
    n_prev = 0.0
    z_prev = 0.0
    j = 0
    for i in range(core.shape[0]):
        z_top = zup[i] + 1e-4
        ig = i - 1
        if ig > last_col:
            ig = last_col
        if ig < 0:
            ig = 0
        nm = core[i]
        while True:
            if n_prev > nm:
                # accessory loudness from the lower band masks this one
                n_next = rns[j]
                if n_next < nm:
                    n_next = nm
                s = usl[j, ig]
                z_next = z_prev + (n_prev - n_next) / s
                if z_next > z_top:
                    z_next = z_top
                    n_next = n_prev - (z_next - z_prev) * s
            else:
                if n_prev < nm:
                    j = 0
                    while j < last_range and rns[j] >= nm:
                        j += 1
                s = 0.0
                z_next = z_top
                n_next = nm
            if z_next > z_prev and count < n_max:
                z0[count] = z_prev
                z1[count] = z_next
                n0[count] = n_prev if s > 0.0 else n_next
                slope[count] = s
                count += 1
            if n_next <= rns[j]:
                j += 1
            if j > last_range:
                j = last_range
            z_prev = z_next
            n_prev = n_next
            if z_prev >= z_top:
                break
    return z0[:count], z1[:count], n0[:count], slope[:count]


def loudness_segments_numpy(core, zup, rns, usl):
    """Reference implementation of the slope-spreading loop.

    Parameters
    ----------
    core : ndarray, shape (21,)
        Core loudness per approximated critical band, sone/Bark.
    zup : ndarray, shape (21,)
        Upper band limits in Bark.
    rns, usl : ndarray
        Specific-loudness ranges and upper-slope steepness table.

    Returns
    -------
    z0, z1, n0, slope : ndarray
        Piecewise-linear description of N'(z): on ``[z0, z1)`` the value is
        ``n0 - slope * (z - z0)``.
    """
    return _loudness_segments_loop(
        np.asarray(core, dtype=np.float64),
        np.asarray(zup, dtype=np.float64),
        np.asarray(rns, dtype=np.float64),
        np.asarray(usl, dtype=np.float64),
    )


_band_powers_jit = jit(_band_powers_loop)
_loudness_segments_jit = jit(_loudness_segments_loop)


def band_powers(power, bin_band, n_bands):
    if USE_NUMBA:
        return _band_powers_jit(
            np.ascontiguousarray(power, dtype=np.float64),
            np.ascontiguousarray(bin_band, dtype=np.int64),
            int(n_bands),
        )
    return band_powers_numpy(power, bin_band, n_bands)


def loudness_segments(core, zup, rns, usl):
    if USE_NUMBA:
        return _loudness_segments_jit(
            np.ascontiguousarray(core, dtype=np.float64),
            np.ascontiguousarray(zup, dtype=np.float64),
            np.ascontiguousarray(rns, dtype=np.float64),
            np.ascontiguousarray(usl, dtype=np.float64),
        )
    return loudness_segments_numpy(core, zup, rns, usl)

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sqmetrics import _accel, kernels
from sqmetrics.loudness import RNS, USL, ZUP, core_loudness

needs_numba = pytest.mark.skipif(not _accel.NUMBA_AVAILABLE, reason="numba not installed")


class TestNumpyPath:
    def test_band_powers_loop_matches_bincount(self, rng):
        p = rng.random(500)
        idx = rng.integers(-1, 10, 500)
        np.testing.assert_allclose(kernels._band_powers_loop(p, idx, 10), kernels.band_powers_numpy(p, idx, 10))

    def test_segments_cover_axis(self):
        core = core_loudness(np.full(28, 60.0))
        z0, z1, n0, slope = kernels.loudness_segments_numpy(core, ZUP, RNS, USL)
        assert z0[0] == 0.0 and z1[-1] >= 24.0
        np.testing.assert_allclose(z0[1:], z1[:-1])
        assert np.all(slope >= 0) and np.all(n0 >= 0)


@needs_numba
class TestNumbaEquality:
    @given(st.lists(st.floats(-10.0, 120.0), min_size=28, max_size=28))
    def test_segments(self, levels):
        core = core_loudness(np.asarray(levels))
        ref = kernels.loudness_segments_numpy(core, ZUP, RNS, USL)
        fast = kernels._loudness_segments_jit(core, ZUP, RNS, USL)
        for a, b in zip(ref, fast):
            np.testing.assert_allclose(a, b, rtol=1e-12, atol=0)

    @given(st.integers(1, 2000), st.integers(0, 2**32 - 1))
    def test_band_powers(self, n, seed):
        r = np.random.default_rng(seed)
        p = r.random(n)
        idx = r.integers(-1, 28, n).astype(np.int64)
        np.testing.assert_allclose(kernels._band_powers_jit(p, idx, 28), kernels.band_powers_numpy(p, idx, 28),
                                   rtol=1e-12)


def test_env_flag_disables_numba(monkeypatch):
    import importlib

    monkeypatch.setenv("SQMETRICS_NO_NUMBA", "1")
    mod = importlib.reload(_accel)
    try:
        assert mod.USE_NUMBA is False
    finally:
        monkeypatch.delenv("SQMETRICS_NO_NUMBA")
        importlib.reload(_accel)

"""Compare the numba and pure-numpy kernel paths.

    python benchmarks/bench_kernels.py [--repeat N]

Kernel timings call both implementations directly. The end-to-end timing
runs the loudness series in two subprocesses, one with SQMETRICS_NO_NUMBA=1.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from sqmetrics import _accel, kernels
from sqmetrics.loudness import RNS, USL, ZUP, core_loudness

END_TO_END = (
    "import time; from sqmetrics.signal_synth import *; from sqmetrics.loudness import loudness_series;"
    "b = narrowband_noise(NarrowbandNoiseSpec(1000.0, 800.0, 70.0, 10.0)); loudness_series(b, 0.5);"
    "t = time.perf_counter(); loudness_series(b, 0.05); print(time.perf_counter() - t)"
)


def bench(fn, repeat):
    fn()  # compile / warm caches
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=20)
    args = p.parse_args(argv)
    rng = np.random.default_rng(0)

    power = rng.random(12001)
    idx = rng.integers(-1, 27, power.size).astype(np.int64)
    core = core_loudness(rng.uniform(30, 90, 28))

    rows = [
        ("band_powers (numpy)", bench(lambda: kernels.band_powers_numpy(power, idx, 27), args.repeat)),
        ("loudness_segments (numpy)", bench(lambda: kernels.loudness_segments_numpy(core, ZUP, RNS, USL), args.repeat)),
    ]
    if _accel.NUMBA_AVAILABLE:
        rows.insert(1, ("band_powers (numba)", bench(lambda: kernels._band_powers_jit(power, idx, 27), args.repeat)))
        rows.append(("loudness_segments (numba)",
                     bench(lambda: kernels._loudness_segments_jit(core, ZUP, RNS, USL), args.repeat)))
    for name, t in rows:
        print(f"{name:32s} {t * 1e6:10.1f} us")

    for flag in ("0", "1"):
        env = dict(os.environ, SQMETRICS_NO_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", END_TO_END], env=env, capture_output=True, text=True, check=True)
        label = "numpy" if flag == "1" else ("numba" if _accel.NUMBA_AVAILABLE else "numpy")
        print(f"{'loudness_series 10 s (' + label + ')':32s} {float(out.stdout) * 1e3:10.1f} ms")


if __name__ == "__main__":
    main()

"""Compare the numba and pure-numpy kernels on typical problem sizes.

    python benchmarks/bench_kernels.py [--repeat 20]
"""
import argparse
import time

import numpy as np

from eesim import kernels
from eesim._linalg import svd
from eesim.channel import generate_channel
from eesim.quantization import design_quantizer


def best_of(fn, repeat):
    fn()  # warm-up / compile
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(rng):
    h = generate_channel(64, 4, 5, rng).h
    f_su = np.ascontiguousarray(svd(h, k=4).v)
    blk = np.ascontiguousarray(h[:, :16])
    v0 = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    spec = design_quantizer(3)
    x = rng.standard_normal(1_000_000)
    return {
        "alternating_projection 64x4": (
            lambda: kernels.jit_alternating_projection(f_su, 1e-6, 1000),
            lambda: kernels.py_alternating_projection(f_su, 1e-6, 1000),
        ),
        "power_iteration 4x16": (
            lambda: kernels.jit_power_iteration(blk, v0, 1e-6, 10_000, True),
            lambda: kernels.py_power_iteration(blk, v0, 1e-6, 10_000, True),
        ),
        "quantize_real 1e6 x 3 bit": (
            lambda: kernels.jit_quantize_real(x, spec.thresholds, spec.codes),
            lambda: kernels.py_quantize_real(x, spec.thresholds, spec.codes),
        ),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    if not kernels.HAS_NUMBA:
        print("numba not installed; only the numpy path is available")
    print(f"{'kernel':32s} {'numba [ms]':>11s} {'numpy [ms]':>11s} {'speedup':>8s}")
    for name, (jit_fn, py_fn) in cases(np.random.default_rng(0)).items():
        t_py = best_of(py_fn, args.repeat)
        if kernels.HAS_NUMBA:
            t_jit = best_of(jit_fn, args.repeat)
            print(f"{name:32s} {1e3 * t_jit:11.3f} {1e3 * t_py:11.3f} {t_py / t_jit:8.2f}")
        else:
            print(f"{name:32s} {'-':>11s} {1e3 * t_py:11.3f} {'-':>8s}")


if __name__ == "__main__":
    main()

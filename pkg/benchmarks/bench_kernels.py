"""Timing comparison of the decoder kernel backends.

Runs the batched log-MAP a-posteriori kernel and the exact erasure-regime
kernel through every available backend over a few problem sizes and prints
nanoseconds per trellis section plus the speedup of the compiled extension
over the NumPy fallback.

    python3 benchmarks/bench_kernels.py [--repeats 5]
"""

import argparse
import time

import numpy as np

from bccde import kernels
from bccde.bcjr import bcjr_extrinsic_batch
from bccde.llr import LLR_CAP
from bccde.trellis import DEFAULT_COMPONENT, build_trellis

SIZES = ((25, 500), (50, 1000), (100, 2000))  # (blocks, sections)


def make_inputs(trellis, blocks, sections, erasure, seed=0):
    rng = np.random.default_rng(seed)
    if erasure:
        # all-zero-codeword-consistent observations: known-zero or erased
        known = rng.random((blocks, trellis.num_rails, sections)) < 0.5
        return np.where(known, LLR_CAP, 0.0)
    return rng.normal(2.0, 2.0, size=(blocks, trellis.num_rails, sections))


def time_case(trellis, llrs, erasure, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        bcjr_extrinsic_batch(trellis, llrs, erasure=erasure)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5, help="timing repeats, best-of")
    args = ap.parse_args()

    trellis = build_trellis(DEFAULT_COMPONENT)
    backends = sorted(kernels.available_backends())
    initial = kernels.backend_name()
    print(f"backends: {', '.join(backends)}   (active default: {initial})")
    print(f"trellis: {trellis.num_states} states, {trellis.num_rails} rails")
    print()
    header = f"{'kernel':<8} {'blocks':>6} {'sections':>8} " + "".join(
        f"{b + ' ns/sec':>16}" for b in backends
    )
    if len(backends) > 1:
        header += f"{'speedup':>9}"
    print(header)

    for erasure in (False, True):
        name = "erasure" if erasure else "logmap"
        for blocks, sections in SIZES:
            llrs = make_inputs(trellis, blocks, sections, erasure)
            per = {}
            for b in backends:
                kernels.use_backend(b)
                # warm-up builds cached tables before timing
                bcjr_extrinsic_batch(trellis, llrs[:1], erasure=erasure)
                dt = time_case(trellis, llrs, erasure, args.repeats)
                per[b] = dt / (blocks * sections) * 1e9
            row = f"{name:<8} {blocks:>6} {sections:>8} " + "".join(
                f"{per[b]:>16.0f}" for b in backends
            )
            if len(backends) > 1 and "cython" in per and "numpy" in per:
                row += f"{per['numpy'] / per['cython']:>8.1f}x"
            print(row)
    kernels.use_backend(initial)


if __name__ == "__main__":
    main()

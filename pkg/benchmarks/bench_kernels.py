"""Time the numba kernels against their numpy counterparts.

    python benchmarks/bench_kernels.py [--repeat 5]

Both kernel sets are called directly, so the ``ERGOPS_DISABLE_NUMBA`` flag
does not matter here.  Numba compilation is triggered once before timing.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from ergops.catalog import PERIODIC_COVER_OP_6, STRONG_NOT_QUASIGROUP_4
from ergops.core import skew_square_op
from ergops.kernels import NUMBA_KERNELS, NUMPY_KERNELS
from ergops.residue import transfer_matrix


def workloads():
    rng = np.random.default_rng(7)
    big = skew_square_op(4).table  # q = 16
    images = NUMPY_KERNELS["subset_images"](big)
    members = rng.integers(1, 1 << 16, size=64, dtype=np.int64)
    gens = np.stack([transfer_matrix(STRONG_NOT_QUASIGROUP_4, 1 << x) for x in range(4)])
    mats = np.stack([transfer_matrix(STRONG_NOT_QUASIGROUP_4, int(x)) for x in rng.integers(1, 16, size=256)])
    cover6 = PERIODIC_COVER_OP_6.table
    return {
        "subset_images q=16": ("subset_images", (big,)),
        "compose 256x4 q=4": ("compose", (mats, gens)),
        "family_products 64 members q=16": ("family_products", (members, images)),
        "cyclic_closure q=16": ("cyclic_closure", (big, 4, np.array([[0, 1]], dtype=np.int64), 16)),
        "cyclic_closure q=6": ("cyclic_closure", (cover6, 2, np.array([[0, 3]], dtype=np.int64), 6)),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    print(f"{'workload':36} {'numba ms':>10} {'numpy ms':>10} {'speedup':>8}")
    for label, (name, call_args) in workloads().items():
        fast, slow = NUMBA_KERNELS[name], NUMPY_KERNELS[name]
        np.testing.assert_array_equal(fast(*call_args), slow(*call_args))
        timings = []
        for fn in (fast, slow):
            loops, _ = timeit.Timer(lambda: fn(*call_args)).autorange()
            best = min(timeit.repeat(lambda: fn(*call_args), number=loops, repeat=args.repeat))
            timings.append(1e3 * best / loops)
        print(f"{label:36} {timings[0]:10.4f} {timings[1]:10.4f} {timings[1] / timings[0]:8.1f}x")


if __name__ == "__main__":
    main()

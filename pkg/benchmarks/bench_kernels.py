"""Time the numba and numpy kernel backends on batches of Choi states.

    python benchmarks/bench_kernels.py [--n 100000] [--repeat 3]
"""
import argparse
import time

import numpy as np

from copu import kernels
from copu.channels import affine_choi_batch
from copu.explorer import sample_family
from copu.families import FamilySpec


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    lam = rng.uniform(-1, 1, (args.n, 3))
    tau = rng.uniform(-1, 1, (args.n, 3))
    rho = affine_choi_batch(lam, tau)
    g = rng.normal(size=(args.n, 4, 2)) + 1j * rng.normal(size=(args.n, 4, 2))
    kraus = np.linalg.qr(g)[0].reshape(args.n, 2, 2, 2)

    cases = {
        "eigh_batch (values)": lambda m: m.eigh_batch(rho, False),
        "eigh_batch (vectors)": lambda m: m.eigh_batch(rho, True),
        "choi_kraus_batch": lambda m: m.choi_kraus_batch(kraus),
        "l1_batch": lambda m: m.l1_batch(rho),
        "purity_batch": lambda m: m.purity_batch(rho),
        "nonunital_cp_batch": lambda m: m.nonunital_cp_batch(lam, tau),
    }
    impls = {name: kernels.implementation(name) for name in ("numba", "numpy")}
    for impl in impls.values():  # compile and warm caches
        for fn in cases.values():
            fn(impl)

    print(f"n = {args.n}, best of {args.repeat}")
    print(f"{'kernel':<24}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}")
    for label, fn in cases.items():
        t = {name: best_of(lambda: fn(impl), args.repeat) for name, impl in impls.items()}
        print(f"{label:<24}{t['numba']:>12.4f}{t['numpy']:>12.4f}{t['numpy'] / t['numba']:>10.1f}")

    t0 = time.perf_counter()
    sample_family(FamilySpec("nonunital"), args.n, seed=0)
    print(f"\nsample_family(nonunital, n={args.n}) with backend {kernels.BACKEND}: "
          f"{time.perf_counter() - t0:.2f}s")


if __name__ == "__main__":
    main()

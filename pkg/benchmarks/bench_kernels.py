"""Compare the numba and numpy dominance kernels, and time the corpus end to end.

Usage: python3 benchmarks/bench_kernels.py [--sizes 64 256 1024] [--repeat 5]

The end-to-end part runs the model checker on every corpus file twice in
subprocesses, once with PREPAIR_NO_NUMBA=1.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from prepair import kernels

E2E = """
import time
from prepair.corpus import corpus_files
from prepair.mc import model_check
t0 = time.perf_counter()
for name, doc in corpus_files():
    msys, err = doc.model()
    model_check(msys, err, full_fixpoint=True)
    for e in doc.partial_errors.values():
        model_check(msys, e, full_fixpoint=True)
print(time.perf_counter() - t0)
"""


def workload(n: int, dim: int, rng: np.random.Generator) -> list[list[int]]:
    rows = {tuple(r) for r in rng.integers(0, 6, size=(n, dim)).tolist()}
    return [list(r) for r in sorted(rows, key=lambda r: (sum(r), r))]


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[16, 64, 256, 1024, 4096])
    ap.add_argument("--dim", type=int, default=8)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--skip-e2e", action="store_true")
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    backends = ["python", "numpy"] + (["numba"] if kernels.HAVE_NUMBA else [])
    if kernels.HAVE_NUMBA:
        kernels.minimal_mask([[0], [1]], backend="numba")  # JIT warm-up
    print(f"{'rows':>6} " + " ".join(f"{b:>10}" for b in backends) + "   (ms, best of %d)" % args.repeat)
    for n in args.sizes:
        rows = workload(n, args.dim, rng)
        ref = kernels.minimal_mask(rows, backend="python")
        cells = []
        for b in backends:
            assert kernels.minimal_mask(rows, backend=b) == ref
            cells.append(best_of(lambda: kernels.minimal_mask(rows, backend=b), args.repeat) * 1e3)
        print(f"{len(rows):>6} " + " ".join(f"{c:>10.2f}" for c in cells))
    if args.skip_e2e:
        return
    for label, flag in (("numba", "0"), ("numpy", "1")):
        env = {**os.environ, "PREPAIR_NO_NUMBA": flag}
        out = subprocess.run([sys.executable, "-c", E2E], env=env, capture_output=True, text=True, check=True)
        print(f"corpus model checks with {label} path: {float(out.stdout):.2f}s")


if __name__ == "__main__":
    main()

"""Compiled kernel vs numpy fallback on the hot paths.

    python benchmarks/bench_kernels.py [--orders 2 4 6 8 10] [--repeat 3]
"""
import argparse
import timeit

import numpy as np

from quasibell import _kernel_py

try:
    from quasibell import _kernel
except ImportError:
    _kernel = None


def random_dirs(rng, shape):
    v = rng.standard_normal((*shape, 3))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def best_time(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--orders", type=int, nargs="+", default=[2, 4, 6, 8, 10])
    ap.add_argument("--batch", type=int, default=500)
    ap.add_argument("--samples", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    backends = {"python": _kernel_py}
    if _kernel is not None:
        backends["cython"] = _kernel
    else:
        print("compiled kernel not available; timing the fallback only")

    rng = np.random.default_rng(0)
    header = f"{'kernel':<26}{'N':>4}" + "".join(f"{name:>14}" for name in backends) + f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for N in args.orders:
        n = N + 1
        a1, b1 = random_dirs(rng, (n,)), random_dirs(rng, (n,))
        ab, bb = random_dirs(rng, (args.batch, n)), random_dirs(rng, (args.batch, n))
        av = rng.choice([-1, 1], size=(args.samples, n))
        bv = rng.choice([-1, 1], size=(args.samples, n))
        cases = {
            "signed_value": lambda k: (lambda: k.signed_value(a1, b1), 200),
            f"signed_value_batch[{args.batch}]": lambda k: (lambda: k.signed_value_batch(ab, bb), 1),
            f"classical_values[{args.samples}]": lambda k: (lambda: k.classical_values(N, av, bv), 1),
        }
        for label, make in cases.items():
            times = {}
            for name, k in backends.items():
                fn, number = make(k)
                times[name] = best_time(fn, args.repeat, number)
            row = f"{label:<26}{N:>4}" + "".join(f"{times[name] * 1e3:>12.3f}ms" for name in backends)
            if "cython" in times:
                row += f"{times['python'] / times['cython']:>9.1f}x"
            print(row)


if __name__ == "__main__":
    main()

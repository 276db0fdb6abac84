"""Compare the numba and numpy kernel backends.

Times every kernel at case-study size and at a larger size, checks that the
two backends agree, and times one end-to-end sweep per backend.  Numba
compilation is excluded: each kernel is called once before timing.

    python benchmarks/bench_kernels.py [--repeat 20] [--large-nsh 200]
"""

import argparse
import os
import timeit

import numpy as np

from strandcc import _kernels
from strandcc._kernels import _numba, _numpy
from strandcc.scenario import case_study
from strandcc.sweep import run_sweep


def cases(rng, nsh, n_h, n_c, n_slots, samples):
    pos = np.column_stack([np.arange(n_c) % 6, np.arange(n_c) // 6]) * 1e-3
    strand_of = np.tile(np.arange(n_c) % nsh, (n_slots, 1)).astype(np.int64)
    sign = np.ones((n_slots, n_c))
    mats = rng.normal(size=(n_slots, n_c, n_c))
    A = rng.normal(size=(n_h, nsh + 1, nsh + 1)) + 1j * rng.normal(size=(n_h, nsh + 1, nsh + 1))
    B = rng.normal(size=(n_h, nsh + 1)) + 1j * rng.normal(size=(n_h, nsh + 1))
    cur = rng.normal(size=(n_h, nsh)) + 1j * rng.normal(size=(n_h, nsh))
    orders = np.arange(1, n_h + 1)
    phase = np.linspace(0, 2 * np.pi, samples, endpoint=False)
    return {
        "pair_inductance": (pos, 4e-4, 0.1),
        "congruence_sum": (strand_of, sign, mats, nsh),
        "solve_batched": (A, B),
        "reconstruct": (cur, orders, phase),
    }


def first(result):
    return result[0] if isinstance(result, tuple) else result


def bench(label, args_by_kernel, repeat):
    print(f"\n{label}")
    print(f"{'kernel':<18}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}{'max diff':>12}")
    for name, args in args_by_kernel.items():
        ref = first(getattr(_numpy, name)(*args))
        fast = first(getattr(_numba, name)(*args))  # also compiles
        diff = float(np.max(np.abs(ref - fast)) / max(np.max(np.abs(ref)), 1e-300))
        t_np = min(timeit.repeat(lambda: getattr(_numpy, name)(*args), number=1,
                                 repeat=repeat)) * 1e3
        t_nb = min(timeit.repeat(lambda: getattr(_numba, name)(*args), number=1,
                                 repeat=repeat)) * 1e3
        print(f"{name:<18}{t_np:>12.3f}{t_nb:>12.3f}{t_np / t_nb:>10.2f}{diff:>12.1e}")


def bench_sweep(repeat):
    sc = case_study(regime="full")
    print("\nend-to-end case-study sweep (alpha_w = 2, 2.5, 3)")
    for name in _kernels.BACKENDS:
        os.environ[_kernels.ENV_VAR] = name
        run_sweep(sc, [2.0, 2.5, 3.0])
        t = min(timeit.repeat(lambda: run_sweep(sc, [2.0, 2.5, 3.0]), number=1, repeat=repeat))
        print(f"  {name:<6} {t * 1e3:9.2f} ms")
    os.environ.pop(_kernels.ENV_VAR, None)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--large-nsh", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    bench("case-study size (Nsh=30, N_h=7, N_c=90, 12 slots)",
          cases(rng, 30, 7, 90, 12, 60), args.repeat)
    n = args.large_nsh
    bench(f"large (Nsh={n}, N_h=20, N_c={2 * n}, 24 slots)",
          cases(rng, n, 20, 2 * n, 24, 400), max(3, args.repeat // 4))
    bench_sweep(max(3, args.repeat // 4))


if __name__ == "__main__":
    main()

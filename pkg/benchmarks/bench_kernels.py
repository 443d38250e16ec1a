"""Compare the compiled kernels against the numpy fallback.

Times the two hot paths (physical-space contraction, brute-force mode
convolution) on both backends, checks that they agree to round-off, and
prints a small table. Run from the repository root:

    python3 benchmarks/bench_kernels.py [--sizes 8,16] [--repeats 20]
"""

import argparse
import time

import numpy as np

from nselab import _kernels_fallback
from nselab.grid import grid

try:
    from nselab import _kernels as compiled
except ImportError:
    compiled = None


def _time(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_contract(n, repeats):
    rng = np.random.default_rng(1)
    u = rng.standard_normal((3, n, n, n))
    gradv = rng.standard_normal((3, 3, n, n, n))
    rows = []
    ref = _kernels_fallback.contract_velocity_gradient(u, gradv)
    t_np = _time(_kernels_fallback.contract_velocity_gradient, (u, gradv), repeats)
    rows.append(("numpy", t_np, 0.0))
    if compiled is not None:
        out = compiled.contract_velocity_gradient(u, gradv)
        err = float(np.max(np.abs(out - ref)) / max(np.max(np.abs(ref)), 1e-300))
        t_c = _time(compiled.contract_velocity_gradient, (u, gradv), repeats)
        rows.append(("compiled", t_c, err))
    return rows


def bench_convolve(n, repeats):
    g = grid(n)
    rng = np.random.default_rng(2)
    m = g.modes.shape[0]
    uc = rng.standard_normal((m, 3)) + 1j * rng.standard_normal((m, 3))
    vc = rng.standard_normal((m, 3)) + 1j * rng.standard_normal((m, 3))
    rows = []
    ref = _kernels_fallback.convolve_modes(uc, vc, g.modes, g.n)
    t_np = _time(_kernels_fallback.convolve_modes, (uc, vc, g.modes, g.n), repeats)
    rows.append(("numpy", t_np, 0.0))
    if compiled is not None:
        out = compiled.convolve_modes(uc, vc, g.modes, g.n)
        err = float(np.max(np.abs(out - ref)) / max(np.max(np.abs(ref)), 1e-300))
        t_c = _time(compiled.convolve_modes, (uc, vc, g.modes, g.n), repeats)
        rows.append(("compiled", t_c, err))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="8,16")
    ap.add_argument("--repeats", type=int, default=20)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]

    if compiled is None:
        print("compiled extension not importable; timing the fallback only")
    header = f"{'kernel':<26}{'N':>4}  {'backend':<10}{'best (ms)':>12}{'rel err':>12}{'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, bench in (("contract_velocity_gradient", bench_contract),
                        ("convolve_modes", bench_convolve)):
        for n in sizes:
            rows = bench(n, args.repeats)
            base = rows[0][1]
            for backend, t, err in rows:
                speed = f"{base / t:8.2f}x" if backend != "numpy" else "     1.00x"
                print(f"{name:<26}{n:>4}  {backend:<10}{t * 1e3:>12.3f}{err:>12.2e}{speed:>9}")


if __name__ == "__main__":
    main()

"""Time the numba and numpy kernels on suite-sized inputs and compare outputs.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import time

import numpy as np

from gaugekit import _kernels as K
from gaugekit.fieldcfg import mode_grid


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not K._HAVE_NUMBA:
        raise SystemExit("numba is not installed")
    rng = np.random.default_rng(0)
    modes = mode_grid(2).astype(float)
    coeffs = rng.normal(size=(240, len(modes))) + 1j * rng.normal(size=(240, len(modes)))
    points = rng.random((128, 4)) * 2 * np.pi
    mats = rng.normal(size=(4000, 6, 6)) + 1j * rng.normal(size=(4000, 6, 6))
    cases = {
        "fourier_eval 240x625x128": (lambda: K.fourier_eval_numba(coeffs, modes, points),
                                     lambda: K.fourier_eval_numpy(coeffs, modes, points)),
        "expm_batch 4000x6x6": (lambda: K.expm_batch_numba(mats, K.EXPM_ORDER, -1),
                                lambda: K.expm_batch_numpy(mats, K.EXPM_ORDER, None)),
    }
    for fn_nb, _ in cases.values():
        fn_nb()  # compile
    print(f"{'kernel':<28} {'numba s':>9} {'numpy s':>9} {'speedup':>8} {'max diff':>10}")
    for name, (fn_nb, fn_np) in cases.items():
        t_nb, a = best_of(fn_nb, args.repeat)
        t_np, b = best_of(fn_np, args.repeat)
        diff = float(np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(b))))
        print(f"{name:<28} {t_nb:>9.4f} {t_np:>9.4f} {t_np / t_nb:>8.2f} {diff:>10.1e}")


if __name__ == "__main__":
    main()

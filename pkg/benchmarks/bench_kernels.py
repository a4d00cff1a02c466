"""Wall-clock comparison of the numba and numpy Matsubara kernels.

    python benchmarks/bench_kernels.py [--terms 2000] [--points 2000] [--repeat 5]

Both paths are called through their explicit entry points, so the
QBMZENO_DISABLE_JIT flag does not matter here.  The first jit call is
timed separately as compile (or cache-load) time.
"""
import argparse
import time

import numpy as np

from qbmzeno import _kernels
from qbmzeno._accel import HAVE_NUMBA
from qbmzeno.correlators import _drude_setup
from qbmzeno.params import BathSpec, OscillatorParams, check_underdamped, matsubara_frequency


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--terms", type=int, default=2000)
    ap.add_argument("--points", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    params = OscillatorParams(temperature=0.1)
    nu1 = matsubara_frequency(1, params)
    t = np.linspace(0.0, 20.0, args.points)
    ohmic = BathSpec.ohmic(0.2)
    wr = check_underdamped(params, ohmic)
    drude = BathSpec.drude(0.2, 100.0)
    co = _drude_setup(params, drude)[0]

    cases = {
        "ohmic position": (
            lambda f: f(t, nu1, 0.1, wr, args.terms, 1e-10, False),
            _kernels.ohmic_sum_jit, _kernels.ohmic_sum_numpy),
        "drude momentum": (
            lambda f: f(t, nu1, co.alpha, co.eta, co.delta, 100.0, 3, args.terms, 1e-10, False),
            _kernels.drude_sum_jit, _kernels.drude_sum_numpy),
    }
    print(f"numba available: {HAVE_NUMBA}; {args.points} times x {args.terms} terms, "
          f"best of {args.repeat}")
    print(f"{'kernel':<16} {'numpy [s]':>10} {'jit [s]':>10} {'first jit [s]':>14} "
          f"{'speedup':>8} {'max rel diff':>13}")
    for name, (call, jit, nump) in cases.items():
        t0 = time.perf_counter()
        call(jit)
        first = time.perf_counter() - t0
        t_np, out_np = _best(lambda: call(nump), args.repeat)
        t_jit, out_jit = _best(lambda: call(jit), args.repeat)
        diff = np.max(np.abs(out_jit[0] - out_np[0]) / np.maximum(np.abs(out_np[0]), 1e-300))
        print(f"{name:<16} {t_np:>10.4f} {t_jit:>10.4f} {first:>14.3f} "
              f"{t_np / t_jit:>8.1f} {diff:>13.2e}")


if __name__ == "__main__":
    main()

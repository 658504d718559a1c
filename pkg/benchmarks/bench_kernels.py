"""Compiled vs numpy-fallback timings of the hot kernels.

Run with ``python3 benchmarks/bench_kernels.py``. Each kernel is timed with
``timeit`` on both backends and the outputs are compared.
"""

import argparse
import timeit

import numpy as np

from kerrcomb import _fallback
from kerrcomb.cnoidal import base_wave
from kerrcomb.evolve import _multipliers, noise_perturbation

try:
    from kerrcomb import _core
except ImportError:
    _core = None


def _strang_case(n, twin):
    wave = base_wave(0.5, n)
    g = wave.grid
    ref = wave.as_complex.astype(np.complex128)
    u0 = ref + noise_perturbation(g, 1e-6, 0)
    half, full, sh, sf = _multipliers(g, 1e-3, 7e-4, 1e-3)
    rows = np.vstack([u0, ref]) if twin else u0[None, :]

    def run(mod, steps):
        u = np.ascontiguousarray(rows.copy())
        mod.strang_run(u, half, full, sh, sf, 1e-3, steps, 100, 2 if twin else 1, g.dx)
        return u

    return run


def bench(name, fn, number):
    out = {}
    for label, mod in (("compiled", _core), ("python", _fallback)):
        if mod is None:
            continue
        t = min(timeit.repeat(lambda: fn(mod), number=number, repeat=3)) / number
        out[label] = (t, fn(mod))
    line = f"{name:<28}"
    for label, (t, _) in out.items():
        line += f" {label}={t * 1e3:9.3f} ms"
    if len(out) == 2:
        a, b = out["compiled"][1], out["python"][1]
        line += f"  speedup={out['python'][0] / out['compiled'][0]:6.1f}x  max|diff|={np.max(np.abs(a - b)):.1e}"
    print(line)


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument("--n", type=int, default=256)
    parser.add_argument("--steps", type=int, default=2000)
    args = parser.parse_args()
    if _core is None:
        print("compiled extension not built; timing the fallback only")

    u = np.linspace(-20.0, 20.0, 100_000)
    bench("sncndn (1e5 points)", lambda m: np.array(m.sncndn(u, 0.7)), 5)

    field = np.exp(1j * np.linspace(0, 3, args.n)) * (1 + np.linspace(0, 1, args.n))

    def rotate(m):
        v = field.copy()
        m.nonlinear_rotate(v, 1e-3)
        return v

    bench(f"nonlinear_rotate (n={args.n})", rotate, 2000)
    for twin in (False, True):
        case = _strang_case(args.n, twin)
        bench(f"strang_run {'twin' if twin else 'single'} x{args.steps}",
              lambda m, c=case: c(m, args.steps), 3)


if __name__ == "__main__":
    main()

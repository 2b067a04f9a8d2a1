"""Compare the compiled and numpy kernels.

Usage: python benchmarks/bench_kernels.py [--repeat R]
"""
import argparse
import timeit

import numpy as np

from mr_qmem._backend import compiled_kernels, python_kernels
from mr_qmem import full_model, reduced_ode
from mr_qmem.core import SystemParams, echo_grid, rect_comb_init


def cases():
    p = SystemParams(7, 1.0, 1 / np.pi)
    a = np.ascontiguousarray(reduced_ode.generator(p))
    y0 = np.ascontiguousarray(rect_comb_init(p).values)
    times = echo_grid(p, 2 ** 14 + 1)
    yield "rk4_fixed N=7, 16384 steps", "rk4_fixed", (a, y0, times)

    traj = reduced_ode.propagate(y0, echo_grid(p, 4097), p)
    k = p.carrier_wavenumber + np.linspace(-0.5, 0.5, 64)
    omegas = np.ascontiguousarray(p.light_speed * (k - p.carrier_wavenumber))
    phases = np.ascontiguousarray(np.exp(-1j * np.outer(k, p.spacing * p.indices)))
    yield ("retarded_integral N=7, 4097 samples, 64 wavenumbers", "retarded_integral",
           (np.ascontiguousarray(traj.times), np.ascontiguousarray(traj.states), omegas, phases))

    # context: one full-model propagator, dominated by LAPACK eigh
    grid = full_model.discretize_waveguide(p, 512)
    yield "full-model eigendecomposition (M = 1024), for scale", None, (grid, p)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if compiled_kernels is None:
        print("compiled extension not built; showing the numpy backend only")
    for label, name, data in cases():
        if name is None:
            t = min(timeit.repeat(lambda: full_model.FullPropagator(*data), number=1,
                                  repeat=max(1, args.repeat // 2)))
            print(f"{label:58s} {t * 1e3:10.2f} ms")
            continue
        t_py = min(timeit.repeat(lambda: getattr(python_kernels, name)(*data), number=1,
                                 repeat=args.repeat))
        line = f"{label:58s} python {t_py * 1e3:9.2f} ms"
        if compiled_kernels is not None:
            fast = getattr(compiled_kernels, name)
            t_c = min(timeit.repeat(lambda: fast(*data), number=1, repeat=args.repeat))
            diff = np.max(np.abs(fast(*data) - getattr(python_kernels, name)(*data)))
            line += f"  compiled {t_c * 1e3:9.2f} ms  speed-up {t_py / t_c:6.1f}x  max diff {diff:.1e}"
        print(line)


if __name__ == "__main__":
    main()

"""Pure-Python (numpy) versions of the compiled kernels."""
import numpy as np


def rk4_fixed(a, y0, times):
    a = np.asarray(a, dtype=complex)
    y = np.array(y0, dtype=complex)
    times = np.asarray(times, dtype=float)
    out = np.empty((times.size, y.size), dtype=complex)
    out[0] = y
    for s in range(times.size - 1):
        h = times[s + 1] - times[s]
        k1 = a @ y
        k2 = a @ (y + 0.5 * h * k1)
        k3 = a @ (y + 0.5 * h * k2)
        k4 = a @ (y + h * k3)
        y = y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[s + 1] = y
    return out


def retarded_integral(times, beta, omegas, phases):
    times = np.asarray(times, dtype=float)
    if times.size < 2:
        return np.zeros(len(omegas), dtype=complex)
    w = np.empty_like(times)
    w[0] = 0.5 * (times[1] - times[0])
    w[-1] = 0.5 * (times[-1] - times[-2])
    w[1:-1] = 0.5 * (times[2:] - times[:-2])
    projected = np.asarray(beta, dtype=complex) @ np.asarray(phases, dtype=complex).T
    osc = np.exp(1j * np.outer(omegas, times)) * w
    return np.einsum("kt,tk->k", osc, projected)

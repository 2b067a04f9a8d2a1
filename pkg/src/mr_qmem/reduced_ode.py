"""Exact propagation of the reduced resonator equations.

In the rotating frame the resonator amplitudes obey

    d beta_n / dt = -i Delta n beta_n - Gamma sum_m beta_m,

a constant linear system ``d beta/dt = A beta``.  The matrix exponential is the
reference solution; a fixed-step RK4 integrator is kept as an independent
check.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy.linalg import expm

from ._backend import kernels
from .core import AmplitudeVector, SystemParams, Trajectory, as_amplitudes

RK_STABILITY_LIMIT = 1.0


def generator(params: SystemParams, detuning_offset: float = 0.0) -> np.ndarray:
    """Generator ``A_nm = -i Delta n delta_nm - Gamma``.

    ``detuning_offset`` shifts every resonator frequency by a constant; it only
    changes the global phase of the solution.
    """
    n = params.n_resonators
    a = np.full((n, n), -params.decay_rate, dtype=complex)
    a[np.diag_indices(n)] += -1j * (params.detunings + detuning_offset)
    return a


def evolve_expm(init: AmplitudeVector | Sequence[complex], t: float,
                params: SystemParams) -> AmplitudeVector:
    """``exp(A t) @ init`` by scaling and squaring with a Pade approximant."""
    if t < 0:
        raise ValueError(f"time must be >= 0, got {t}")
    c = as_amplitudes(init, params)
    if t == 0:
        return AmplitudeVector(c.copy(), "rotating")
    return AmplitudeVector(expm(generator(params) * t) @ c, "rotating")


def propagate(init: AmplitudeVector | Sequence[complex], times,
              params: SystemParams, detuning_offset: float = 0.0) -> Trajectory:
    """Matrix-exponential solution sampled at every point of ``times``."""
    times = np.asarray(times, dtype=float)
    if times.size == 0 or times[0] < 0:
        raise ValueError("times must be non-empty and >= 0")
    c = as_amplitudes(init, params)
    a = generator(params, detuning_offset)
    states = np.empty((times.size, c.size), dtype=complex)
    states[0] = c if times[0] == 0 else expm(a * times[0]) @ c
    steps = np.diff(times)
    if steps.size and np.allclose(steps, steps[0], rtol=1e-12, atol=0):
        # uniform grid: one step propagator, roundoff grows only linearly
        step = expm(a * steps[0])
        for i in range(1, times.size):
            states[i] = step @ states[i - 1]
    else:
        for i, t in enumerate(times[1:], start=1):
            states[i] = expm(a * t) @ c
    return Trajectory(times, states, params, "rotating", label="reduced")


def evolve_rk(init: AmplitudeVector | Sequence[complex], time_grid,
              params: SystemParams) -> Trajectory:
    """Fixed-step RK4 with one step per grid interval.

    The grid must start at 0, increase strictly and keep
    ``max|A| * h < 1`` (``max|A|`` is the spectral norm).
    """
    times = np.ascontiguousarray(time_grid, dtype=float)
    if times.ndim != 1 or times.size < 2:
        raise ValueError("time grid needs at least two points")
    if times[0] != 0:
        raise ValueError(f"time grid must start at 0, got {times[0]}")
    steps = np.diff(times)
    if np.any(steps <= 0):
        raise ValueError("time grid must be strictly increasing")
    a = generator(params)
    scale = np.linalg.norm(a, 2) * steps.max()
    if scale >= RK_STABILITY_LIMIT:
        raise ValueError(
            f"step too large for RK4: max|A| * h = {scale:.3g} >= {RK_STABILITY_LIMIT}")
    c = np.ascontiguousarray(as_amplitudes(init, params))
    states = kernels.rk4_fixed(np.ascontiguousarray(a), c, times)
    return Trajectory(times, states, params, "rotating", label="rk4")


def resonator_norm(state: AmplitudeVector | Sequence[complex]) -> float:
    """Total resonator energy ``sum |beta_n|**2``."""
    values = state.values if isinstance(state, AmplitudeVector) else np.asarray(state)
    return float(np.sum(np.abs(values) ** 2))


def emission_rate(state: AmplitudeVector | Sequence[complex], params: SystemParams) -> float:
    """Instantaneous energy loss ``2 Gamma |sum_n beta_n|**2``."""
    values = state.values if isinstance(state, AmplitudeVector) else np.asarray(state)
    return 2.0 * params.decay_rate * abs(np.sum(values)) ** 2

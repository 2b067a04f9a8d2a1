"""Observables built on trajectories: efficiency, energy contrast, peaks, sweeps."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.signal import find_peaks, peak_widths

from . import analytic, reduced_ode
from .core import AmplitudeVector, SystemParams, Trajectory

ENERGY_FLOOR = 1e-30
DEFAULT_PROMINENCE = 0.25
MIN_POINTS_PER_PULSE = 64


@dataclass(frozen=True)
class Series:
    """Real-valued time series; ``valid`` flags samples that carry data."""

    times: np.ndarray
    values: np.ndarray
    label: str = ""
    valid: np.ndarray | None = None

    def __post_init__(self):
        times = np.array(self.times, dtype=float)
        values = np.array(self.values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape:
            raise ValueError("times and values must be 1-d arrays of equal length")
        if np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        valid = np.ones(times.size, dtype=bool) if self.valid is None else np.array(self.valid, dtype=bool)
        if valid.shape != times.shape:
            raise ValueError("validity mask must match times")
        for arr in (times, values, valid):
            arr.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "valid", valid)

    def __len__(self):
        return self.times.size


@dataclass(frozen=True)
class Peak:
    time: float
    height: float
    width: float
    prominence: float


@dataclass(frozen=True)
class PeakSet:
    peaks: tuple[Peak, ...] = field(default_factory=tuple)

    def __len__(self):
        return len(self.peaks)

    def __iter__(self):
        return iter(self.peaks)

    @property
    def times(self) -> np.ndarray:
        return np.array([p.time for p in self.peaks])

    @property
    def widths(self) -> np.ndarray:
        return np.array([p.width for p in self.peaks])


def efficiency_curve(trajectory: Trajectory) -> Series:
    """Retrieved fraction ``1 - sum_n |beta_n(t)|**2``."""
    return Series(trajectory.times, 1.0 - trajectory.norms(), "efficiency")


def energy_difference(trajectory: Trajectory, n1: int, n2: int) -> Series:
    """Relative energy contrast ``(E1 - E2) / (E1 + E2)`` of two resonators.

    Where ``E1 + E2`` falls below ``ENERGY_FLOOR`` the value is 0 and the
    sample is marked invalid.
    """
    if int(n1) == int(n2):
        raise ValueError("energy_difference needs two distinct resonators")
    e1 = np.abs(trajectory.column(n1)) ** 2
    e2 = np.abs(trajectory.column(n2)) ** 2
    total = e1 + e2
    valid = total >= ENERGY_FLOOR
    values = np.zeros_like(total)
    values[valid] = (e1[valid] - e2[valid]) / total[valid]
    return Series(trajectory.times, values, f"e[{n1},{n2}]", valid)


def collective_amplitude(trajectory: Trajectory) -> Series:
    """Bright-mode amplitude ``|sum_n beta_n(t)|``."""
    return Series(trajectory.times, np.abs(trajectory.states.sum(axis=1)), "collective")


def relative_deviation(states, reference) -> np.ndarray:
    """Per-time ``max_n |states - reference|`` over the largest ``|reference|`` of the run."""
    states = getattr(states, "states", states)
    reference = getattr(reference, "states", reference)
    scale = np.max(np.abs(reference))
    return np.max(np.abs(np.asarray(states) - np.asarray(reference)), axis=1) / (
        scale if scale > 0 else 1.0)


def detect_peaks(series: Series, prominence_floor: float = DEFAULT_PROMINENCE,
                 pulse_duration: float | None = None) -> PeakSet:
    """Local maxima of ``|values|`` with prominence at least ``prominence_floor``.

    Widths are full widths at half prominence, in time units.  When
    ``pulse_duration`` is given the series must hold at least
    ``MIN_POINTS_PER_PULSE`` samples per pulse duration.
    """
    times = series.times
    if pulse_duration is not None and times.size > 1:
        step = np.max(np.diff(times))
        if pulse_duration / step < MIN_POINTS_PER_PULSE:
            raise ValueError(
                f"series undersampled: {pulse_duration / step:.1f} points per pulse, "
                f"need {MIN_POINTS_PER_PULSE}")
    y = np.abs(series.values)
    idx, props = find_peaks(y, prominence=prominence_floor)
    if idx.size == 0:
        return PeakSet(())
    widths, _, left, right = peak_widths(y, idx, rel_height=0.5,
                                         prominence_data=(props["prominences"],
                                                          props["left_bases"],
                                                          props["right_bases"]))
    positions = np.arange(times.size)
    t_left = np.interp(left, positions, times)
    t_right = np.interp(right, positions, times)
    peaks = tuple(
        Peak(float(times[i]), float(series.values[i]), float(tr - tl), float(p))
        for i, tl, tr, p in zip(idx, t_left, t_right, props["prominences"]))
    return PeakSet(peaks)


@dataclass(frozen=True)
class SweepResult:
    couplings: np.ndarray
    eta_echo: np.ndarray
    eta0: np.ndarray
    optimum: float

    @property
    def argmax(self) -> int:
        return int(np.argmax(self.eta_echo))

    @property
    def best_coupling(self) -> float:
        return float(self.couplings[self.argmax])

    @property
    def relative_offset(self) -> float:
        return self.best_coupling / self.optimum - 1.0

    @property
    def at_boundary(self) -> bool:
        return self.argmax in (0, self.couplings.size - 1)


def echo_efficiency(params: SystemParams, init: AmplitudeVector | Sequence[complex]) -> float:
    """Reduced-model efficiency at the echo time ``2 pi / Delta``."""
    state = reduced_ode.evolve_expm(init, params.echo_time, params)
    return 1.0 - reduced_ode.resonator_norm(state)


def sweep_coupling(params: SystemParams, g_values, init: AmplitudeVector | Sequence[complex],
                   jobs: int = 1) -> SweepResult:
    """Echo-time efficiency of the reduced model for each coupling in ``g_values``."""
    g_values = np.asarray(g_values, dtype=float)
    if g_values.size == 0 or np.any(g_values <= 0):
        raise ValueError("couplings must be positive")
    if np.any(np.diff(g_values) <= 0):
        raise ValueError("couplings must be sorted ascending")

    def point(g):
        return echo_efficiency(params.with_coupling(float(g)), init)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            eta = np.array(list(pool.map(point, g_values)))
    else:
        eta = np.array([point(g) for g in g_values])
    eta0 = np.array([analytic.eta0(g, params) for g in g_values])
    return SweepResult(g_values, eta, eta0, analytic.optimal_coupling(params))

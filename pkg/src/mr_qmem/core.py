"""Shared parameters, resonator indexing and state containers.

Conventions
-----------
Resonators carry signed integer indices centred on zero: ``n = -(N//2), ...,
N - 1 - N//2``.  For odd ``N`` this is the symmetric set ``-(N-1)/2 ... (N-1)/2``;
for even ``N`` it is ``-N/2 ... N/2 - 1``.  A uniform index shift only adds a
global phase to every amplitude, so moduli, efficiencies and energy ratios are
independent of this choice.

Frequencies are angular (rad per unit time).  Natural units ``c = 1`` are the
default.  The collective decay rate is ``Gamma = pi g**2 / c``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Literal, Sequence

import numpy as np

Frame = Literal["lab", "rotating"]

NORM_TOL = 1e-12


class ParameterError(ValueError):
    """Raised for physically invalid or inconsistent configuration."""


def resonator_indices(n_resonators: int) -> np.ndarray:
    """Centred signed indices of ``n_resonators`` resonators."""
    if n_resonators < 1:
        raise ParameterError(f"need at least one resonator, got {n_resonators}")
    lo = -(n_resonators // 2)
    return np.arange(lo, lo + n_resonators)


@dataclass(frozen=True)
class SystemParams:
    """Physical configuration of the multiresonator memory.

    Parameters
    ----------
    n_resonators : int
        Number of resonators N.
    comb_spacing : float
        Detuning step between neighbouring resonators (angular frequency).
    coupling : float
        Resonator-waveguide coupling g.
    light_speed : float
        Propagation speed in the waveguide.
    carrier_wavenumber : float
        Carrier wavenumber k0 of the waveguide mode.
    band_halfwidth : float
        Half-width of each waveguide band in wavenumber units.
    spacing : float, optional
        Distance between neighbouring resonators; defaults to one carrier
        wavelength ``2 pi / k0``.
    """

    n_resonators: int
    comb_spacing: float
    coupling: float
    light_speed: float = 1.0
    carrier_wavenumber: float = 1.0e4
    band_halfwidth: float = 120.0
    spacing: float | None = None

    def __post_init__(self):
        n = self.n_resonators
        if isinstance(n, bool) or int(n) != n or n < 1:
            raise ParameterError(f"n_resonators must be a positive integer, got {n!r}")
        object.__setattr__(self, "n_resonators", int(n))
        for name in ("comb_spacing", "coupling", "light_speed",
                     "carrier_wavenumber", "band_halfwidth"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)
        if self.comb_spacing <= 0:
            raise ParameterError(f"comb_spacing must be > 0, got {self.comb_spacing}")
        if self.coupling < 0:
            raise ParameterError(f"coupling must be >= 0, got {self.coupling}")
        if self.light_speed <= 0:
            raise ParameterError(f"light_speed must be > 0, got {self.light_speed}")
        if self.carrier_wavenumber <= 0:
            raise ParameterError(
                f"carrier_wavenumber must be > 0, got {self.carrier_wavenumber}")
        if not 0 < self.band_halfwidth < self.carrier_wavenumber:
            raise ParameterError(
                "band_halfwidth must satisfy 0 < band_halfwidth < carrier_wavenumber, "
                f"got {self.band_halfwidth} (k0 = {self.carrier_wavenumber})")
        comb_width = self.n_resonators * self.comb_spacing / self.light_speed
        if comb_width >= 2 * self.band_halfwidth:
            raise ParameterError(
                f"comb ({comb_width:g}) exceeds band ({2 * self.band_halfwidth:g}): "
                "N * comb_spacing / light_speed must be < 2 * band_halfwidth")
        if self.spacing is None:
            object.__setattr__(self, "spacing", 2 * np.pi / self.carrier_wavenumber)
        else:
            z = float(self.spacing)
            if not (np.isfinite(z) and z > 0):
                raise ParameterError(f"spacing must be > 0, got {self.spacing}")
            object.__setattr__(self, "spacing", z)

    @property
    def decay_rate(self) -> float:
        """Collective decay rate ``pi g**2 / c``."""
        return np.pi * self.coupling ** 2 / self.light_speed

    @property
    def echo_time(self) -> float:
        """Rephasing time ``2 pi / comb_spacing``."""
        return 2 * np.pi / self.comb_spacing

    @property
    def pulse_duration(self) -> float:
        """Duration ``2 pi / (N comb_spacing)`` of a pulse spanning the comb."""
        return self.echo_time / self.n_resonators

    @property
    def indices(self) -> np.ndarray:
        return resonator_indices(self.n_resonators)

    @property
    def detunings(self) -> np.ndarray:
        return self.comb_spacing * self.indices

    def with_coupling(self, coupling: float) -> "SystemParams":
        return replace(self, coupling=coupling)

    def position(self, n: int) -> int:
        """Array position of resonator index ``n``."""
        n = int(n)
        lo = -(self.n_resonators // 2)
        if not lo <= n < lo + self.n_resonators:
            raise IndexError(
                f"resonator index {n} outside [{lo}, {lo + self.n_resonators - 1}]")
        return n - lo


def build_params(n_resonators, comb_spacing, coupling, light_speed=1.0,
                 carrier_wavenumber=1.0e4, band_halfwidth=120.0,
                 spacing=None) -> SystemParams:
    """Validate raw numbers into a :class:`SystemParams`."""
    return SystemParams(n_resonators, comb_spacing, coupling, light_speed,
                        carrier_wavenumber, band_halfwidth, spacing)


def detuning_of(n: int, params: SystemParams) -> float:
    """Rotating-frame detuning ``comb_spacing * n`` of resonator ``n``."""
    params.position(n)
    return params.comb_spacing * int(n)


def _readonly(values) -> np.ndarray:
    arr = np.array(values, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class AmplitudeVector:
    """Complex resonator amplitudes, one per centred index.

    ``frame`` records whether the values are lab-frame amplitudes or
    rotating-frame amplitudes with the carrier phase removed.
    """

    values: np.ndarray
    frame: Frame = "rotating"

    def __post_init__(self):
        arr = _readonly(self.values)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("amplitudes must be a non-empty 1-d sequence")
        if self.frame not in ("lab", "rotating"):
            raise ValueError(f"unknown frame {self.frame!r}")
        object.__setattr__(self, "values", arr)

    def __len__(self):
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    @property
    def norm_sq(self) -> float:
        return float(np.vdot(self.values, self.values).real)

    @property
    def indices(self) -> np.ndarray:
        return resonator_indices(len(self))

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(self.norm_sq - 1.0) <= tol

    def to_frame(self, frame: Frame, time: float, carrier_frequency: float) -> "AmplitudeVector":
        """Convert between frames at ``time``; ``lab = exp(-i w0 t) rotating``."""
        if frame == self.frame:
            return self
        sign = -1.0 if frame == "lab" else 1.0
        return AmplitudeVector(self.values * np.exp(sign * 1j * carrier_frequency * time), frame)


def normalize(values: Iterable[complex], frame: Frame = "rotating") -> AmplitudeVector:
    """Rescale ``values`` to unit norm, preserving phases."""
    arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values,
                     dtype=complex)
    norm = np.sqrt(np.vdot(arr, arr).real)
    if norm == 0:
        raise ValueError("cannot normalize an all-zero amplitude vector")
    return AmplitudeVector(arr / norm, frame)


def rect_comb_init(params: SystemParams) -> AmplitudeVector:
    """Short rectangular pulse state ``c_n = (-1)**n / sqrt(N)``."""
    n = params.indices
    signs = np.where(n % 2 == 0, 1.0, -1.0)
    return AmplitudeVector(signs / np.sqrt(params.n_resonators), "rotating")


def phase_ramp_init(params: SystemParams, phase_step: float) -> AmplitudeVector:
    """Uniform-modulus state ``c_n = exp(i phase_step n) / sqrt(N)``."""
    n = params.indices
    return AmplitudeVector(np.exp(1j * phase_step * n) / np.sqrt(params.n_resonators))


def single_resonator_init(params: SystemParams, n: int) -> AmplitudeVector:
    """All excitation in resonator ``n``."""
    values = np.zeros(params.n_resonators, dtype=complex)
    values[params.position(n)] = 1.0
    return AmplitudeVector(values)


@dataclass(frozen=True)
class Trajectory:
    """Resonator amplitudes sampled on a time grid.

    ``states`` has shape ``(len(times), N)``; row ``i`` holds the amplitudes at
    ``times[i]`` in the given ``frame``.
    """

    times: np.ndarray
    states: np.ndarray
    params: SystemParams
    frame: Frame = "rotating"
    label: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        times = np.array(self.times, dtype=float)
        states = np.array(self.states, dtype=complex)
        if times.ndim != 1 or times.size == 0:
            raise ValueError("times must be a non-empty 1-d array")
        if np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        if states.shape != (times.size, self.params.n_resonators):
            raise ValueError(
                f"states shape {states.shape} does not match "
                f"({times.size}, {self.params.n_resonators})")
        times.setflags(write=False)
        states.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)

    def __len__(self):
        return self.times.size

    def state(self, i: int) -> AmplitudeVector:
        return AmplitudeVector(self.states[i], self.frame)

    @property
    def final(self) -> AmplitudeVector:
        return self.state(-1)

    def column(self, n: int) -> np.ndarray:
        """Amplitude history of resonator index ``n``."""
        return self.states[:, self.params.position(n)]

    def norms(self) -> np.ndarray:
        return np.sum(np.abs(self.states) ** 2, axis=1)


def echo_grid(params: SystemParams, samples: int = 2048, cycles: float = 1.0) -> np.ndarray:
    """Uniform grid of ``samples`` points on ``[0, cycles * 2 pi / comb_spacing]``."""
    if samples < 2:
        raise ValueError("need at least two samples")
    return np.linspace(0.0, cycles * params.echo_time, samples)


def as_amplitudes(init: AmplitudeVector | Sequence[complex], params: SystemParams) -> np.ndarray:
    arr = np.asarray(init.values if isinstance(init, AmplitudeVector) else init, dtype=complex)
    if arr.shape != (params.n_resonators,):
        raise ValueError(
            f"expected {params.n_resonators} amplitudes, got shape {arr.shape}")
    return arr

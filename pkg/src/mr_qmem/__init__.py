"""Simulation of the multiresonator (MR) photon-echo quantum memory.

Three solvers of increasing fidelity describe N comb-detuned resonators
coupled to one waveguide:

``analytic``
    closed-form first-cycle dynamics, efficiency factorization and the
    matching condition ``pi**2 g**2 = c Delta``;
``reduced_ode``
    exact propagation of the Markovian resonator equations;
``full_model``
    the waveguide continuum discretized into pseudo-modes, propagated unitarily.
"""
from ._backend import BACKEND
from .analytic import (EfficiencyBreakdown, beta_analytic, collective_rate,
                       efficiency_analytic, eta0, eta1, optimal_coupling)
from .core import (AmplitudeVector, ParameterError, SystemParams, Trajectory,
                   build_params, detuning_of, normalize, rect_comb_init,
                   resonator_indices)
from .dynamics import (PeakSet, Series, collective_amplitude, detect_peaks,
                       efficiency_curve, energy_difference, sweep_coupling)
from .full_model import (FullPropagator, FullState, WaveguideGrid,
                         assemble_full_generator, discretize_waveguide,
                         emission_spectra, evolve_full, output_field_direct)
from .reduced_ode import evolve_expm, evolve_rk, generator, resonator_norm

__version__ = "0.1.0"

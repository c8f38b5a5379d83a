"""Exact dynamics and non-Markovianity of a two-level emitter in front of a mirror."""

__version__ = "0.1.0"

from .core import ModelParams, QubitState, canonicalize_phase, evolve_state
from .nonmarkov import (
    ConvergenceError,
    GrowthInterval,
    NMResult,
    asymptotic_eps4,
    asymptotic_measure,
    d_eps2_dt,
    is_markovian,
    nm_measure,
    trapped_amplitude,
    volume,
)
from .solver import AmplitudeTrajectory, amplitude_mos, amplitude_series, lindblad_amplitude
from .spectrum import SpectralPoint, spectral_density, spectrum_scan
from .sweep import ComputeOptions, SweepGrid, ThresholdCurve, sweep_measure, threshold_curve

__all__ = [
    "AmplitudeTrajectory",
    "ComputeOptions",
    "ConvergenceError",
    "GrowthInterval",
    "ModelParams",
    "NMResult",
    "QubitState",
    "SpectralPoint",
    "SweepGrid",
    "ThresholdCurve",
    "amplitude_mos",
    "amplitude_series",
    "asymptotic_eps4",
    "asymptotic_measure",
    "canonicalize_phase",
    "d_eps2_dt",
    "evolve_state",
    "is_markovian",
    "lindblad_amplitude",
    "nm_measure",
    "spectral_density",
    "spectrum_scan",
    "sweep_measure",
    "threshold_curve",
    "trapped_amplitude",
    "volume",
]

"""Spectral density of the half-cavity photonic bath.

``J(Delta) = gamma/pi * sin^2(t_d Delta / 2 + phi / 2)`` with
``Delta = omega - omega_0``.  It assumes a linear waveguide dispersion around
the atomic frequency; that assumption is not checked here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ModelParams


@dataclass(frozen=True)
class SpectralPoint:
    detuning: float
    density: float


def spectral_density(params: ModelParams, detuning):
    """Bath spectral density at the given detuning(s)."""
    d = np.asarray(detuning, dtype=float)
    if not np.all(np.isfinite(d)):
        raise ValueError("detuning must be finite")
    out = params.gamma / np.pi * np.sin(0.5 * params.t_d * d + 0.5 * params.canonical_phi) ** 2
    return float(out) if out.ndim == 0 else out


def spectrum_scan(params: ModelParams, delta_min: float, delta_max: float, n_points: int) -> list[SpectralPoint]:
    """Tabulate the density on ``n_points`` evenly spaced detunings, endpoints included."""
    if not (np.isfinite(delta_min) and np.isfinite(delta_max)) or not delta_min < delta_max:
        raise ValueError(f"need finite delta_min < delta_max, got [{delta_min}, {delta_max}]")
    if int(n_points) != n_points or n_points < 2:
        raise ValueError(f"n_points must be an integer >= 2, got {n_points!r}")
    grid = np.linspace(delta_min, delta_max, int(n_points))
    dens = spectral_density(params, grid)
    return [SpectralPoint(float(x), float(y)) for x, y in zip(grid, dens)]

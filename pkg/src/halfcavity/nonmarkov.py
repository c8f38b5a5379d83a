"""Markovianity criterion and the geometric non-Markovianity measure.

For the amplitude damping map the volume of accessible Bloch-ball states is
``|eps|**4``, and the measure is the total increase of that volume over all
times where it grows.  Growth is detected from the sign of

    d|eps|^2/dt = -gamma |eps|^2 + gamma Re[e^{i phi} eps(t - t_d) eps*(t)],

and the measure is assembled as an exact telescoping sum of ``|eps|**4`` at
the refined interval endpoints, so no quadrature error enters.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .core import ModelParams
from .solver import (
    MIN_MESH_PER_DELAY,
    _mesh,
    integrate_scaled,
    segments_for,
)

DEFAULT_CLASSIFY_TOL = 1e-6
DEFAULT_MAX_HORIZON = 1e5  # in units of 1/gamma
# rescaled step targeted by the automatic mesh density
AUTO_STEP = 0.01
AUTO_MAX_MESH = 512
ROOT_REL_TOL = 1e-6


class ConvergenceError(RuntimeError):
    """Raised when a verdict is requested from a non-converged measure."""


def volume(eps):
    """Volume of accessible states, ``|eps|**4``."""
    return np.abs(eps) ** 4


def d_eps2_dt(params: ModelParams, eps_now, eps_delayed):
    """Rate of change of the excited population ``|eps|**2``.

    ``eps_delayed`` is ``eps(t - t_d)``; pass 0 for ``t < t_d``.
    """
    eps_now = np.asarray(eps_now, dtype=complex)
    eps_delayed = np.asarray(eps_delayed, dtype=complex)
    phase = np.exp(1j * params.canonical_phi)
    out = params.gamma * (-np.abs(eps_now) ** 2 + np.real(phase * eps_delayed * np.conj(eps_now)))
    return out[()] if out.ndim == 0 else out


def auto_mesh_per_delay(gtd: float) -> int:
    """Mesh density giving a rescaled step near ``AUTO_STEP`` within ``[16, 512]``."""
    return int(min(max(math.ceil(gtd / AUTO_STEP), MIN_MESH_PER_DELAY), AUTO_MAX_MESH))


@dataclass(frozen=True)
class GrowthInterval:
    start: float
    end: float
    volume_gain: float


@dataclass(frozen=True)
class NMResult:
    """Outcome of :func:`nm_measure`.

    ``measure`` is the sum of ``volume_gain`` over ``intervals``; the true value
    lies in ``[measure, measure + truncation_bound]``.  ``volume_loss`` is the
    total decrease over the complementary intervals, so
    ``measure - volume_loss == |eps(horizon)|**4 - 1``.
    """

    params: ModelParams
    measure: float
    intervals: tuple[GrowthInterval, ...]
    horizon_used: float
    truncation_bound: float
    markovian: bool
    converged: bool
    classify_tol: float
    mesh_per_delay: int
    volume_loss: float = 0.0
    final_volume: float = 1.0
    notes: tuple[str, ...] = field(default_factory=tuple)

    @property
    def bracket(self) -> tuple[float, float]:
        return (self.measure, self.measure + self.truncation_bound)


class _Dense:
    """Cubic Hermite interpolant of a method-of-steps run in rescaled time."""

    def __init__(self, g: float, phi: float, K: int, values: np.ndarray):
        self.g = g
        self.K = K
        self.h = g / K
        self.values = values
        self.n_seg = (values.size - 1) // K
        self.tau = _mesh(g, K, self.n_seg)
        self.feed = 0.5 * np.exp(1j * phi)
        delayed = np.zeros_like(values)
        delayed[K:] = values[: values.size - K]
        # right-limit derivative; at tau = g the feedback switches on
        self.d_right = -0.5 * values + self.feed * delayed
        self.d_left = self.d_right.copy()
        self.d_left[K] = -0.5 * values[K]
        self.delayed_nodes = delayed

    def __call__(self, tau):
        tau = np.asarray(tau, dtype=float)
        k = np.clip(np.searchsorted(self.tau, tau, side="right") - 1, 0, self.values.size - 2)
        h = self.tau[k + 1] - self.tau[k]
        s = (tau - self.tau[k]) / h
        s2 = s * s
        s3 = s2 * s
        return (
            (2 * s3 - 3 * s2 + 1) * self.values[k]
            + (s3 - 2 * s2 + s) * h * self.d_right[k]
            + (-2 * s3 + 3 * s2) * self.values[k + 1]
            + (s3 - s2) * h * self.d_left[k + 1]
        )

    def rate(self, tau):
        """Rescaled ``d|eps|^2/dtau`` at arbitrary times."""
        tau = np.asarray(tau, dtype=float)
        now = self(tau)
        lagged = tau - self.g
        delayed = np.where(lagged >= 0.0, self(np.maximum(lagged, 0.0)), 0.0)
        return -np.abs(now) ** 2 + np.real(2.0 * self.feed * delayed * np.conj(now))

    def node_rate(self):
        v = self.values
        return -np.abs(v) ** 2 + np.real(2.0 * self.feed * self.delayed_nodes * np.conj(v))


def _refine(dense: _Dense, lo, hi, lo_positive):
    """Vectorised bisection on the sign of the population rate."""
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    tol = dense.g * ROOT_REL_TOL
    while lo.size and np.max(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        pos = dense.rate(mid) > 0.0
        go_right = pos == lo_positive
        lo = np.where(go_right, mid, lo)
        hi = np.where(go_right, hi, mid)
    return lo, hi


def _growth_breakpoints(dense: _Dense):
    """Start/end times (rescaled) of maximal intervals with growing population."""
    positive = dense.node_rate() > 0.0
    tau = dense.tau
    flips = np.nonzero(positive[1:] != positive[:-1])[0]
    lo_pos = positive[flips]
    lo, hi = _refine(dense, tau[flips], tau[flips + 1], lo_pos)
    # endpoints on the growing side of each root
    roots = np.where(lo_pos, lo, hi)
    starts = list(roots[~lo_pos])
    ends = list(roots[lo_pos])
    if positive[0]:
        starts.insert(0, tau[0])
    if positive[-1]:
        ends.append(tau[-1])
    return np.asarray(starts), np.asarray(ends)


def _assemble(dense: _Dense, gamma: float):
    starts, ends = _growth_breakpoints(dense)
    v_start = np.abs(dense(starts)) ** 4 if starts.size else np.empty(0)
    v_end = np.abs(dense(ends)) ** 4 if ends.size else np.empty(0)
    gains = v_end - v_start
    keep = gains > 0.0
    intervals = tuple(
        GrowthInterval(start=float(a / gamma), end=float(b / gamma), volume_gain=float(dv))
        for a, b, dv in zip(starts[keep], ends[keep], gains[keep])
    )
    measure = math.fsum(gains[keep])
    v_final = float(np.abs(dense.values[-1]) ** 4)
    # decrease over the complement, built from the same endpoint values
    lows = np.concatenate(([1.0], v_end[keep]))
    highs = np.concatenate((v_start[keep], [v_final]))
    if ends.size and keep[-1] and ends[-1] == dense.tau[-1]:
        lows, highs = lows[:-1], highs[:-1]
    loss = math.fsum(lows - highs)
    return measure, intervals, loss, v_final


def _tail(values: np.ndarray, K: int, g: float, phi_bound: bool, classify_tol: float):
    """Truncation bound and convergence flag from the last delay window.

    The delay equation never lets ``|eps|`` exceed its maximum over the most
    recent delay window, so that maximum (to the fourth power) bounds every
    later volume.  At bound-state phases the same holds for the deviation
    from the trapped amplitude.
    """
    window = values[-(K + 1):]
    envelope = float(np.max(np.abs(window) ** 4))
    floor = classify_tol * 1e-2
    if envelope < floor:
        return 0.0, True
    if phi_bound:
        trapped = 1.0 / (1.0 + 0.5 * g)
        dev = float(np.max(np.abs(window - trapped)))
        bound = (trapped + dev) ** 4 - max(trapped - dev, 0.0) ** 4
        return bound, bound < floor
    return envelope, False


def nm_measure(
    params: ModelParams,
    horizon: float | None = None,
    mesh_per_delay: int | None = None,
    classify_tol: float = DEFAULT_CLASSIFY_TOL,
    max_horizon: float | None = None,
    adaptive: bool = True,
) -> NMResult:
    """Geometric non-Markovianity measure of the emitter dynamics.

    The run starts at ``horizon`` (default ``max(40/gamma, 10 t_d)``) and is
    doubled until the last-window volume falls below ``classify_tol * 1e-2``
    (or, at bound-state phases, until the deviation from the trapped
    amplitude does), up to ``max_horizon``.  Runs that stop short are returned
    with ``converged=False``.
    """
    if not classify_tol > 0:
        raise ValueError("classify_tol must be positive")
    g = params.dimensionless_delay
    if g == 0.0:
        # memoryless limit: monotone decay, or frozen at bound-state phases
        return NMResult(params, 0.0, (), 0.0, 0.0, True, True, classify_tol, 0, 0.0, 1.0)
    K = auto_mesh_per_delay(g) if mesh_per_delay is None else int(mesh_per_delay)
    if K < MIN_MESH_PER_DELAY:
        raise ValueError(f"mesh_per_delay must be >= {MIN_MESH_PER_DELAY}")
    gamma = params.gamma
    h_scaled = max(40.0, 10.0 * g) if horizon is None else gamma * float(horizon)
    if not h_scaled > 0:
        raise ValueError("horizon must be positive")
    h_max = gamma * (DEFAULT_MAX_HORIZON / gamma if max_horizon is None else float(max_horizon))
    h_max = max(h_max, h_scaled)
    phi = params.canonical_phi
    bound_phase = params.is_bound_state_phase

    values = None
    while True:
        n_seg = segments_for(g, h_scaled)
        values = integrate_scaled(g, phi, K, n_seg, values)
        trunc, converged = _tail(values, K, g, bound_phase, classify_tol)
        if converged or not adaptive or h_scaled >= h_max:
            break
        h_scaled = min(2.0 * h_scaled, h_max)

    dense = _Dense(g, phi, K, values)

    measure, intervals, loss, v_final = _assemble(dense, gamma)
    notes = () if converged else (f"tail not settled at horizon gamma*t={dense.tau[-1]:.6g}",)
    markovian = measure <= classify_tol and trunc <= classify_tol
    return NMResult(
        params=params,
        measure=measure,
        intervals=intervals,
        horizon_used=float(dense.tau[-1] / gamma),
        truncation_bound=trunc,
        markovian=markovian,
        converged=converged,
        classify_tol=classify_tol,
        mesh_per_delay=K,
        volume_loss=loss,
        final_volume=v_final,
        notes=notes,
    )


def is_markovian(
    params: ModelParams,
    horizon: float | None = None,
    classify_tol: float = DEFAULT_CLASSIFY_TOL,
    mesh_per_delay: int | None = None,
    max_horizon: float | None = None,
) -> bool:
    """Markovian verdict: measure and tail bound both within ``classify_tol``.

    Raises :class:`ConvergenceError` when the measure could not be certified.
    """
    res = nm_measure(params, horizon, mesh_per_delay, classify_tol, max_horizon)
    if not res.converged and not (res.measure > classify_tol):
        raise ConvergenceError(
            f"measure not converged for gamma*t_d={params.dimensionless_delay}, "
            f"phi={params.canonical_phi}: {res.notes}"
        )
    return res.markovian


def _asymptotic_log_terms(m):
    m = np.asarray(m, dtype=float)
    return 4.0 * (m * np.log(m) - m - gammaln(m + 1.0))


def asymptotic_measure(m_max: int, with_tail: bool = False):
    """Large-delay limit of the measure, ``sum_{m>=1} m^{4m} e^{-4m} / (m!)^4``.

    Terms approach ``(2 pi m)**-2``; with ``with_tail=True`` the pair
    ``(partial_sum, tail_estimate)`` is returned, the tail being
    ``sum_{m > m_max} (2 pi m)**-2``.
    """
    m_max = int(m_max)
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    terms = np.exp(_asymptotic_log_terms(np.arange(1, m_max + 1)))
    total = math.fsum(terms)
    if not with_tail:
        return total
    # sum_{m>M} 1/m^2 via the trigamma function
    from scipy.special import polygamma

    tail = float(polygamma(1, m_max + 1)) / (4.0 * math.pi**2)
    return total, tail


def asymptotic_term(m) -> np.ndarray:
    """Single summand of :func:`asymptotic_measure`."""
    return np.exp(_asymptotic_log_terms(m))


def asymptotic_eps4(params: ModelParams, t):
    """Large-delay approximation of ``|eps(t)|**4`` keeping the last live term only.

    On ``[m t_d, (m+1) t_d]`` this is
    ``[(gamma/2 e^{gamma t_d/2})^m / m!]^4 e^{-2 gamma t} (t - m t_d)^{4m}``,
    which peaks at ``t = m t_d + 2m/gamma``.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("t must be non-negative")
    g = params.dimensionless_delay
    tau = params.gamma * t_arr
    if g == 0.0:
        m = np.zeros_like(tau)
    else:
        m = np.floor(tau / g)
    lag = tau - m * g
    with np.errstate(divide="ignore"):
        log_lag = np.where(m > 0, np.log(np.where(lag > 0, lag, 1.0)), 0.0)
        logv = 4.0 * (m * (0.5 * g - math.log(2.0)) - gammaln(m + 1.0)) - 2.0 * tau + 4.0 * m * log_lag
        out = np.where((m > 0) & (lag <= 0), 0.0, np.exp(logv))
    return out[()] if out.ndim == 0 else out


def asymptotic_peak_times(params: ModelParams, m_values) -> np.ndarray:
    """Times ``m t_d + 2m/gamma`` of the large-delay volume spikes."""
    m = np.asarray(m_values, dtype=float)
    return m * params.t_d + 2.0 * m / params.gamma


def trapped_amplitude(params: ModelParams) -> float:
    """Long-time amplitude ``1/(1 + gamma t_d/2)`` left in the atom at bound-state phases."""
    if not params.is_bound_state_phase:
        warnings.warn(
            f"phi={params.canonical_phi} is not a multiple of 2*pi; no excitation is trapped there",
            stacklevel=2,
        )
    return 1.0 / (1.0 + 0.5 * params.dimensionless_delay)

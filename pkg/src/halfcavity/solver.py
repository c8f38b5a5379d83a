"""Excited-state amplitude of an emitter in front of a mirror.

Three independent routes to the same function ``eps(t)``:

* :func:`amplitude_series`: the exact finite sum over round trips,
* :func:`amplitude_mos`: method-of-steps integration of the delay equation
  ``eps' = -gamma/2 eps + gamma/2 e^{i phi} eps(t - t_d) theta(t - t_d)``,
* :func:`lindblad_amplitude`: the memoryless limit ``t_d -> 0``.

Internally everything runs in rescaled time ``tau = gamma * t`` with
``g = gamma * t_d``; public arguments and results use the caller's time units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter
from scipy.special import gammaln

from .core import ModelParams

DEFAULT_MESH_PER_DELAY = 512
MIN_MESH_PER_DELAY = 16

# largest log-magnitude accepted for a single series term
_LOG_OVERFLOW = 700.0
# beyond this many round trips the sum is not evaluated
MAX_SERIES_TERMS = 10_000_000


def lindblad_amplitude(gamma, phi, t):
    """Amplitude in the memoryless limit, ``exp[gamma/2 (e^{i phi} - 1) t]``."""
    t = np.asarray(t, dtype=float)
    if not (np.isfinite(gamma) and np.isfinite(phi)) or not np.all(np.isfinite(t)):
        raise ValueError("lindblad_amplitude needs finite inputs")
    if np.any(t < 0):
        raise ValueError("t must be non-negative")
    rate = 0.5 * gamma * (np.exp(1j * phi) - 1.0)
    out = np.exp(rate * t)
    return out[()] if out.ndim == 0 else out


def _neumaier_add(s, c, x):
    t = s + x
    c += np.where(np.abs(s) >= np.abs(x), (s - t) + x, (x - t) + s)
    return t, c


def series_scaled(g: float, phi: float, tau) -> np.ndarray:
    """Exact series in rescaled units; ``tau`` is an array of ``gamma * t``."""
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ValueError("t must be non-negative")
    n_max = float(np.floor(tau.max() / g)) if tau.size else 0.0
    if not n_max <= MAX_SERIES_TERMS:
        raise OverflowError(f"series needs {n_max:.3g} terms (gamma*t_d={g}, gamma*t up to {tau.max()})")
    n_max = int(n_max)
    # n = 0 term
    re = np.exp(-0.5 * tau)
    im = np.zeros_like(tau)
    c_re = np.zeros_like(tau)
    c_im = np.zeros_like(tau)
    log_coef = 0.5 * g - math.log(2.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        for n in range(1, n_max + 1):
            lag = tau - n * g
            live = lag > 0.0
            if not live.any():
                break
            logmag = -0.5 * tau + n * log_coef + n * np.log(np.where(live, lag, 1.0)) - gammaln(n + 1)
            if not np.all(logmag[live] <= _LOG_OVERFLOW):
                raise OverflowError(
                    f"series term n={n} overflows even in log space "
                    f"(gamma*t_d={g}, gamma*t up to {tau.max()})"
                )
            mag = np.where(live, np.exp(np.where(live, logmag, -np.inf)), 0.0)
            re, c_re = _neumaier_add(re, c_re, mag * math.cos(n * phi))
            im, c_im = _neumaier_add(im, c_im, mag * math.sin(n * phi))
    return (re + c_re) + 1j * (im + c_im)


def amplitude_series(params: ModelParams, t):
    """Exact amplitude at time(s) ``t`` from the finite sum over round trips.

    Each term ``(gamma/2 e^{i phi + gamma t_d/2})^n (t - n t_d)^n / n!`` is
    combined with the ``e^{-gamma t/2}`` prefactor in log space, so terms stay
    finite for large delays; the sum is accumulated with Neumaier compensation.
    With ``t_d == 0`` the closed-form memoryless amplitude is returned.
    """
    t_arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(t_arr)):
        raise ValueError("t must be finite")
    if params.t_d == 0.0:
        return lindblad_amplitude(params.gamma, params.canonical_phi, t_arr)
    out = series_scaled(params.dimensionless_delay, params.canonical_phi, params.gamma * np.atleast_1d(t_arr))
    return complex(out[0]) if t_arr.ndim == 0 else out.reshape(t_arr.shape)


def _rk4_gain(h: float) -> float:
    z = -0.5 * h
    return 1.0 + z + z * z / 2.0 + z**3 / 6.0 + z**4 / 24.0


def _midpoints(prev: np.ndarray) -> np.ndarray:
    """Cubic interpolation of ``prev`` at half-integer nodes, kept inside the segment."""
    mid = np.empty((prev.shape[0] - 1,) + prev.shape[1:], dtype=prev.dtype)
    mid[1:-1] = (-prev[:-3] + 9.0 * prev[1:-2] + 9.0 * prev[2:-1] - prev[3:]) / 16.0
    mid[0] = (5.0 * prev[0] + 15.0 * prev[1] - 5.0 * prev[2] + prev[3]) / 16.0
    mid[-1] = (prev[-4] - 5.0 * prev[-3] + 15.0 * prev[-2] + 5.0 * prev[-1]) / 16.0
    return mid


def _forcing(prev: np.ndarray, h: float, feed: complex, mid: np.ndarray | None = None) -> np.ndarray:
    """RK4 increment driven by the delayed amplitude alone (the step is linear in ``y``).

    ``prev`` holds the K + 1 nodes of the previous segment along axis 0.
    """
    a = -0.5
    half = 0.5 * h
    f0 = feed * prev[:-1]
    f1 = feed * prev[1:]
    fm = feed * (_midpoints(prev) if mid is None else mid)
    k1 = f0
    k2 = a * half * k1 + fm
    k3 = a * half * k2 + fm
    k4 = a * h * k3 + f1
    return (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _advance(b: np.ndarray, y0, c: float) -> np.ndarray:
    zi = np.expand_dims(c * np.asarray(y0), 0)
    y, _ = lfilter([1.0], [1.0, -c], b, axis=0, zi=zi)
    return y


# up to this mesh density a whole segment is advanced by one matrix product
_MATRIX_MESH_LIMIT = 256


def segment_operator(g: float, phi: float, K: int) -> np.ndarray:
    """Matrix mapping the K + 1 nodes of one segment to the K new nodes of the next."""
    h = g / K
    basis = np.eye(K + 1, dtype=complex)
    b = _forcing(basis, h, 0.5 * np.exp(1j * phi))
    return _advance(b, basis[-1], _rk4_gain(h))


def integrate_scaled(g: float, phi: float, K: int, n_segments: int, values: np.ndarray | None = None) -> np.ndarray:
    """Method-of-steps RK4 in rescaled time; returns node values on ``n_segments * K + 1`` nodes.

    Passing the ``values`` of a shorter run continues it instead of restarting.
    """
    h = g / K
    out = np.empty(n_segments * K + 1, dtype=complex)
    if values is None or values.size < K + 1:
        out[: K + 1] = np.exp(-0.5 * h * np.arange(K + 1))
        m0 = 1
    else:
        done = (values.size - 1) // K
        if done > n_segments:
            return values[: n_segments * K + 1].copy()
        out[: values.size] = values
        m0 = done
    c = _rk4_gain(h)
    feed = 0.5 * np.exp(1j * phi)
    if m0 == 1 and n_segments > 1:
        # delayed samples on segment 1 come from the analytic decay
        exact_mid = np.exp(-0.5 * h * (np.arange(K) + 0.5))
        b = _forcing(out[: K + 1], h, feed, exact_mid)
        out[K + 1 : 2 * K + 1] = _advance(b, out[K], c)
        m0 = 2
    if m0 >= n_segments:
        return out
    op = segment_operator(g, phi, K) if K <= _MATRIX_MESH_LIMIT else None
    for m in range(m0, n_segments):
        prev = out[(m - 1) * K : m * K + 1]
        if op is not None:
            out[m * K + 1 : (m + 1) * K + 1] = op @ prev
        else:
            out[m * K + 1 : (m + 1) * K + 1] = _advance(_forcing(prev, h, feed), out[m * K], c)
    return out


def _mesh(g: float, K: int, n_segments: int) -> np.ndarray:
    k = np.arange(n_segments * K + 1)
    seg, j = np.divmod(k, K)
    # multiples of the delay are exact products, not accumulated sums
    return seg * g + j * (g / K)


@dataclass(frozen=True)
class AmplitudeTrajectory:
    """Sampled amplitude on a mesh with ``mesh_per_delay`` steps per delay.

    ``times`` are in the caller's units; ``scaled_times`` are ``gamma * t``.
    The mesh covers whole delay segments, so it may run past the requested
    horizon by less than one delay.
    """

    params: ModelParams
    times: np.ndarray
    values: np.ndarray
    mesh_per_delay: int

    @property
    def scaled_times(self) -> np.ndarray:
        return self.params.gamma * self.times

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def n_segments(self) -> int:
        return (self.values.size - 1) // self.mesh_per_delay

    def population(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def volume(self) -> np.ndarray:
        return np.abs(self.values) ** 4


def _check_mesh(mesh_per_delay) -> int:
    K = int(mesh_per_delay)
    if K != mesh_per_delay or K < MIN_MESH_PER_DELAY:
        raise ValueError(f"mesh_per_delay must be an integer >= {MIN_MESH_PER_DELAY}, got {mesh_per_delay!r}")
    return K


def segments_for(g: float, horizon_scaled: float) -> int:
    return max(1, int(math.ceil(horizon_scaled / g - 1e-9)))


def amplitude_mos(params: ModelParams, horizon: float, mesh_per_delay: int = DEFAULT_MESH_PER_DELAY) -> AmplitudeTrajectory:
    """Integrate the delay equation segment by segment up to ``horizon``.

    On ``[m t_d, (m+1) t_d]`` the delayed amplitude is read from the stored
    previous segment; RK4 half-step stages use cubic interpolation that never
    crosses a segment boundary, where the derivative of ``eps`` is not smooth.
    """
    K = _check_mesh(mesh_per_delay)
    if not (math.isfinite(horizon) and horizon > 0):
        raise ValueError(f"horizon must be positive, got {horizon!r}")
    if params.t_d == 0.0:
        raise ValueError("t_d = 0 has no delay to step over; use lindblad_amplitude")
    g = params.dimensionless_delay
    n_seg = segments_for(g, params.gamma * horizon)
    values = integrate_scaled(g, params.canonical_phi, K, n_seg)
    times = _mesh(params.t_d, K, n_seg)
    return AmplitudeTrajectory(params=params, times=times, values=values, mesh_per_delay=K)

"""Phase diagram of the measure over ``(phi, gamma t_d)`` and the Markovian threshold.

Cells are independent; they are split statically across worker processes and
written back by index, so results do not depend on the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core import TWO_PI, ModelParams
from .nonmarkov import DEFAULT_CLASSIFY_TOL, ConvergenceError, is_markovian, nm_measure


@dataclass(frozen=True)
class ComputeOptions:
    """Numerical knobs shared by every cell. ``None`` picks the library default."""

    mesh_per_delay: int | None = None
    classify_tol: float = DEFAULT_CLASSIFY_TOL
    max_horizon: float | None = None
    workers: int = 1


def default_phi_axis(n: int = 81) -> np.ndarray:
    return np.linspace(0.0, TWO_PI, n)


def default_gtd_axis(n: int = 60, lo: float = 0.02, hi: float = 30.0) -> np.ndarray:
    return np.geomspace(lo, hi, n)


@dataclass(frozen=True)
class SweepGrid:
    """Measure on a grid; rows follow ``gtd_values``, columns ``phi_values``."""

    phi_values: np.ndarray
    gtd_values: np.ndarray
    measures: np.ndarray
    truncation_bounds: np.ndarray
    horizons: np.ndarray
    converged: np.ndarray
    classify_tol: float

    @property
    def all_converged(self) -> bool:
        return bool(self.converged.all())

    def non_converged_cells(self) -> list[tuple[float, float]]:
        rows, cols = np.nonzero(~self.converged)
        return [(float(self.gtd_values[r]), float(self.phi_values[c])) for r, c in zip(rows, cols)]

    def markovian(self) -> np.ndarray:
        return (self.measures <= self.classify_tol) & (self.truncation_bounds <= self.classify_tol)

    def argmax(self) -> tuple[float, float, float]:
        """``(N_max, gtd, phi)`` of the largest cell."""
        r, c = np.unravel_index(np.argmax(self.measures), self.measures.shape)
        return float(self.measures[r, c]), float(self.gtd_values[r]), float(self.phi_values[c])

    def multi_flip_columns(self) -> list[float]:
        """Phases whose Markovian verdict flips more than once along ``gtd``."""
        mk = self.markovian()
        flips = np.count_nonzero(mk[1:] != mk[:-1], axis=0)
        return [float(p) for p in self.phi_values[flips > 1]]


def _check_axes(phi_axis, gtd_axis):
    phi = np.asarray(phi_axis, dtype=float)
    gtd = np.asarray(gtd_axis, dtype=float)
    if phi.ndim != 1 or gtd.ndim != 1 or phi.size == 0 or gtd.size == 0:
        raise ValueError("axes must be non-empty 1-d sequences")
    if np.any(np.diff(phi) <= 0) or np.any(np.diff(gtd) <= 0):
        raise ValueError("axes must be strictly increasing")
    if phi[0] < 0 or phi[-1] > TWO_PI + 1e-12:
        raise ValueError("phi axis must lie in [0, 2*pi]")
    if gtd[0] <= 0 or not np.all(np.isfinite(gtd)):
        raise ValueError("gamma*t_d axis must be positive and finite")
    return phi, gtd


def _cell(args):
    gtd, phi, mesh, tol, max_h = args
    r = nm_measure(ModelParams.from_dimensionless(gtd, phi), mesh_per_delay=mesh, classify_tol=tol, max_horizon=max_h)
    return r.measure, r.truncation_bound, r.horizon_used, r.converged


def _map_static(fn, jobs, workers):
    """Evaluate ``fn`` over ``jobs`` with a fixed strided partition; order preserved."""
    workers = max(1, int(workers))
    if workers == 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    chunks = [jobs[i::workers] for i in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_run_chunk, [fn] * workers, chunks))
    out = [None] * len(jobs)
    for i, part in enumerate(parts):
        out[i::workers] = part
    return out


def _run_chunk(fn, chunk):
    return [fn(j) for j in chunk]


def sweep_measure(phi_axis, gtd_axis, options: ComputeOptions | None = None) -> SweepGrid:
    """Compute the measure on every ``(gtd, phi)`` cell."""
    opts = options or ComputeOptions()
    phi, gtd = _check_axes(phi_axis, gtd_axis)
    jobs = [(float(g), float(p), opts.mesh_per_delay, opts.classify_tol, opts.max_horizon) for g in gtd for p in phi]
    cells = _map_static(_cell, jobs, opts.workers)
    shape = (gtd.size, phi.size)
    arr = np.array(cells, dtype=object).reshape(shape + (4,))
    return SweepGrid(
        phi_values=phi,
        gtd_values=gtd,
        measures=arr[..., 0].astype(float),
        truncation_bounds=arr[..., 1].astype(float),
        horizons=arr[..., 2].astype(float),
        converged=arr[..., 3].astype(bool),
        classify_tol=opts.classify_tol,
    )


@dataclass(frozen=True)
class ThresholdCurve:
    """Smallest non-Markovian ``gamma t_d`` per phase.

    ``critical_gtd`` is NaN where the verdict could not be bracketed; the
    reason is kept in ``failures`` keyed by phase.
    """

    phi_values: np.ndarray
    critical_gtd: np.ndarray
    bisection_tol: float
    classify_tol: float
    gtd_max: float
    failures: dict = field(default_factory=dict)


def _bisect_phase(args):
    phi, gtd_max, btol, ctol, mesh, max_h = args

    def markov(g):
        return is_markovian(ModelParams.from_dimensionless(g, phi), classify_tol=ctol, mesh_per_delay=mesh, max_horizon=max_h)

    try:
        if markov(gtd_max):
            return math.nan, f"Markovian at gamma*t_d={gtd_max}; threshold not bracketed"
        # gamma*t_d = 0 is memoryless, hence Markovian
        lo, hi = 0.0, float(gtd_max)
        while hi - lo > btol:
            mid = 0.5 * (lo + hi)
            if markov(mid):
                lo = mid
            else:
                hi = mid
        return hi, None
    except ConvergenceError as exc:
        return math.nan, str(exc)


def threshold_curve(
    phi_axis,
    gtd_max: float = 5.0,
    bisection_tol: float = 0.01,
    classify_tol: float = DEFAULT_CLASSIFY_TOL,
    options: ComputeOptions | None = None,
) -> ThresholdCurve:
    """Bisect the Markovian/non-Markovian boundary in ``gamma t_d`` for each phase.

    Bisection presumes a single verdict flip along ``gamma t_d``; use
    :meth:`SweepGrid.multi_flip_columns` on a grid to check that presumption.
    """
    opts = options or ComputeOptions()
    phi = np.asarray(phi_axis, dtype=float)
    if phi.ndim != 1 or phi.size == 0:
        raise ValueError("phi axis must be a non-empty 1-d sequence")
    if not (gtd_max > 0 and bisection_tol > 0 and classify_tol > 0):
        raise ValueError("gtd_max, bisection_tol and classify_tol must be positive")
    jobs = [(float(p), float(gtd_max), float(bisection_tol), float(classify_tol), opts.mesh_per_delay, opts.max_horizon) for p in phi]
    results = _map_static(_bisect_phase, jobs, opts.workers)
    crit = np.array([r[0] for r in results], dtype=float)
    failures = {float(p): msg for p, (_, msg) in zip(phi, results) if msg is not None}
    return ThresholdCurve(
        phi_values=phi,
        critical_gtd=crit,
        bisection_tol=float(bisection_tol),
        classify_tol=float(classify_tol),
        gtd_max=float(gtd_max),
        failures=failures,
    )


def phase_scan_verdicts(gtd: float, phi_axis, options: ComputeOptions | None = None) -> np.ndarray:
    """Markovian verdicts along a row of fixed ``gamma t_d``."""
    grid = sweep_measure(phi_axis, [gtd], options)
    return grid.markovian()[0]


def count_transitions(verdicts) -> int:
    v = np.asarray(verdicts, dtype=bool)
    return int(np.count_nonzero(v[1:] != v[:-1]))

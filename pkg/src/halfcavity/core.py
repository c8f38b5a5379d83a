"""Physical parameters and the atomic state of an emitter facing a mirror.

The atom's reduced dynamics is an amplitude damping channel driven by a single
complex amplitude ``eps``; everything else (field modes, the atom-mirror
distance, the carrier wave vector) is folded into the delay ``t_d`` and the
round-trip phase ``phi``.

Validity of the underlying model (documented, not enforced): the waveguide
dispersion must be linear over a band wider than both ``gamma`` and ``1/t_d``,
and ``t_d`` must be much longer than the optical period.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

TWO_PI = 2.0 * math.pi

# absorbs round-off in the positivity check
POSITIVITY_TOL = 1e-12


def canonicalize_phase(phi: float) -> float:
    """Map ``phi`` onto ``[0, 2*pi)``."""
    if not math.isfinite(phi):
        raise ValueError(f"phase must be finite, got {phi!r}")
    out = math.fmod(phi, TWO_PI)
    if out < 0.0:
        out += TWO_PI
    # fmod of a value just below a multiple of 2*pi can round up to 2*pi
    if out >= TWO_PI:
        out = 0.0
    return out


@dataclass(frozen=True)
class ModelParams:
    """Emission rate ``gamma``, round-trip delay ``t_d`` and phase ``phi``.

    Only ``gamma * t_d`` and the canonical phase enter the dynamics once time
    is measured in units of ``1/gamma``.
    """

    gamma: float
    t_d: float
    phi: float
    dimensionless_delay: float = field(init=False, repr=False, compare=False)
    canonical_phi: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma > 0.0):
            raise ValueError(f"gamma must be positive and finite, got {self.gamma!r}")
        if not (math.isfinite(self.t_d) and self.t_d >= 0.0):
            raise ValueError(f"t_d must be non-negative and finite, got {self.t_d!r}")
        object.__setattr__(self, "dimensionless_delay", self.gamma * self.t_d)
        object.__setattr__(self, "canonical_phi", canonicalize_phase(self.phi))

    @classmethod
    def from_dimensionless(cls, gtd: float, phi: float, gamma: float = 1.0) -> "ModelParams":
        """Build parameters from ``gamma * t_d`` (time in units of ``1/gamma``)."""
        return cls(gamma=gamma, t_d=gtd / gamma, phi=phi)

    @property
    def is_bound_state_phase(self) -> bool:
        """True when the phase is a multiple of 2*pi, where excitation gets trapped."""
        p = self.canonical_phi
        return min(p, TWO_PI - p) < 1e-12


@dataclass(frozen=True)
class QubitState:
    """Atomic density matrix stored as ``(rho_ee, rho_ge)``.

    ``rho_gg = 1 - rho_ee`` and ``rho_eg = conj(rho_ge)`` are derived, so trace
    and hermiticity hold by construction.
    """

    rho_ee: float
    rho_ge: complex = 0j

    def __post_init__(self):
        ee = float(self.rho_ee)
        ge = complex(self.rho_ge)
        if not (math.isfinite(ee) and math.isfinite(ge.real) and math.isfinite(ge.imag)):
            raise ValueError("state entries must be finite")
        if not (-POSITIVITY_TOL <= ee <= 1.0 + POSITIVITY_TOL):
            raise ValueError(f"rho_ee={ee} outside [0, 1]")
        if abs(ge) ** 2 > ee * (1.0 - ee) + POSITIVITY_TOL:
            raise ValueError(
                f"not a positive state: |rho_ge|^2={abs(ge) ** 2:.3e} > "
                f"rho_ee*(1-rho_ee)={ee * (1.0 - ee):.3e}"
            )
        object.__setattr__(self, "rho_ee", min(max(ee, 0.0), 1.0))
        object.__setattr__(self, "rho_ge", ge)

    @property
    def rho_gg(self) -> float:
        return 1.0 - self.rho_ee

    @property
    def rho_eg(self) -> complex:
        return self.rho_ge.conjugate()

    def matrix(self):
        """Density matrix in the ``{|g>, |e>}`` basis as a numpy array."""
        import numpy as np

        return np.array([[self.rho_gg, self.rho_ge], [self.rho_eg, self.rho_ee]], dtype=complex)


def evolve_state(rho0: QubitState, eps: complex) -> QubitState:
    """Apply the amplitude damping map with excited-state amplitude ``eps``."""
    eps = complex(eps)
    p = abs(eps) ** 2
    if p > 1.0 + 1e-9:
        raise ValueError(f"|eps| must not exceed 1, got {abs(eps)}")
    p = min(p, 1.0)
    return QubitState(rho_ee=p * rho0.rho_ee, rho_ge=eps.conjugate() * rho0.rho_ge)

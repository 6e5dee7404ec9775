"""Conversion between natural units (m = 1/2, hbar = 1) and SI.

The scheme is fixed by a length scale ``a0`` and an energy scale ``|E1|``::

    x_SI = a0 * x          k_SI = k / a0
    E_SI = |E1| * E        t_SI = (hbar / |E1|) * t
    rate_SI = (|E1| / hbar) * rate
"""

from __future__ import annotations

from dataclasses import dataclass

HBAR = 1.054571817e-34  # J s
MEV = 1.602176634e-13  # J
ALPHA_MASS = 6.69e-27  # kg, helium-4 nucleus
DEFAULT_A0 = 7.2e-15  # m
DEFAULT_E1_MEV = 0.1


@dataclass(frozen=True)
class UnitScheme:
    """Two-way unit conversion. Energies enter in MeV and are stored in joules."""

    a0: float = DEFAULT_A0
    E1_abs: float = DEFAULT_E1_MEV * MEV
    hbar: float = HBAR
    particle_mass: float = ALPHA_MASS

    def __post_init__(self):
        if not self.a0 > 0:
            raise ValueError(f"a0 must be positive, got {self.a0}")
        if not self.E1_abs > 0:
            raise ValueError(f"|E1| must be positive, got {self.E1_abs}")
        if not (self.hbar > 0 and self.particle_mass > 0):
            raise ValueError("hbar and particle_mass must be positive")

    @classmethod
    def from_mev(cls, a0: float = DEFAULT_A0, E1_MeV: float = DEFAULT_E1_MEV,
                 particle_mass: float = ALPHA_MASS) -> "UnitScheme":
        # the sign of E1 is irrelevant, only |E1| sets the scale
        return cls(a0=a0, E1_abs=abs(E1_MeV) * MEV, particle_mass=particle_mass)

    @property
    def E1_MeV(self) -> float:
        return self.E1_abs / MEV

    def consistency_ratio(self) -> float:
        """hbar^2 / (2 m a0^2) divided by |E1|; 1 for a self-consistent scheme."""
        return self.hbar**2 / (2 * self.particle_mass * self.a0**2) / self.E1_abs

    def is_consistent(self, rtol: float = 0.02) -> bool:
        return abs(self.consistency_ratio() - 1) <= rtol

    # natural -> SI
    def to_si_length(self, x):
        return self.a0 * x

    def to_si_wavenumber(self, k):
        return k / self.a0

    def to_si_energy(self, e):
        return self.E1_abs * e

    def to_si_time(self, t):
        return (self.hbar / self.E1_abs) * t

    def to_si_rate(self, rate):
        return (self.E1_abs / self.hbar) * rate

    # SI -> natural
    def from_si_length(self, x_si):
        return x_si / self.a0

    def from_si_wavenumber(self, k_si):
        return k_si * self.a0

    def from_si_energy(self, e_si):
        return e_si / self.E1_abs

    def from_si_time(self, t_si):
        return t_si * self.E1_abs / self.hbar

    def from_si_rate(self, rate_si):
        return rate_si * self.hbar / self.E1_abs

    def momentum_si(self, k):
        """hbar * k_SI, the quantity quoted for resonance positions."""
        return self.hbar * k / self.a0

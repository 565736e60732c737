"""Linear external force fields: free, harmonic, magnetic.

The magnetic variant lives in the plane perpendicular to a constant field
along the third axis (configuration dimension 2); free and harmonic are
one-dimensional.  Units are caller-chosen but must be mutually consistent:
frequencies in 1/time, mass in the caller's mass unit.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class Free:
    m: float = 1.0

    n_dim = 1

    def acceleration(self, x):
        return 0.0 * x


@dataclass(frozen=True)
class Harmonic:
    omega: float
    m: float = 1.0

    n_dim = 1

    def __post_init__(self):
        if self.omega < 0:
            raise ValueError("omega must be >= 0")

    def acceleration(self, x):
        return -self.omega**2 * x


@dataclass(frozen=True)
class Magnetic:
    """Charged particle in B = (0, 0, B); omega_c = eB/m."""

    omega_c: float
    m: float = 1.0

    n_dim = 2

    def __post_init__(self):
        if self.omega_c < 0:
            raise ValueError("omega_c must be >= 0")


ForceField = Free | Harmonic | Magnetic

"""Dynamical regimes: frictionless, Kramers (friction + noise), Smoluchowski.

The Kramers collision operator is taken in divergence form
``div_u (q grad_u + beta u) f``, which conserves normalization and yields
the moment relations m0 = 0, m1 = -beta rho v.  Frictionless drops the
beta term; Smoluchowski is the large-friction configuration-space limit
with diffusion constant D (fluctuation-dissipation: q = D beta^2).
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class Frictionless:
    q: float

    def __post_init__(self):
        if self.q < 0:
            raise ValueError("q must be >= 0")


@dataclass(frozen=True)
class Kramers:
    q: float
    beta: float

    def __post_init__(self):
        if self.q < 0 or self.beta < 0:
            raise ValueError("q and beta must be >= 0")


@dataclass(frozen=True)
class Smoluchowski:
    diffusion_D: float
    beta: float

    def __post_init__(self):
        if self.diffusion_D < 0 or self.beta <= 0:
            raise ValueError("need diffusion_D >= 0 and beta > 0")


Regime = Frictionless | Kramers | Smoluchowski

"""Large-friction (Smoluchowski) regime: current velocity, potentials, residuals.

In this limit velocity relaxes instantly; dynamics is configuration-space
diffusion with current velocity v = F/(m beta) - D grad(rho)/rho.  The
momentum law reads (d_t + v d_x) v = grad(Omega - Q) with the volume
potential Omega and the pressure potential Q = 2 D^2 lap sqrt(rho)/sqrt(rho);
the "recoil" variant flips to grad(Q - Omega).  A magnetic field only
survives as the constant rescaling beta^2/(beta^2 + omega_c^2) of Q.
"""

from dataclasses import dataclass

import numpy as np

from .forces import Free, Harmonic, Magnetic
from .hydro import (
    HydroField,
    _check_aligned,
    _d1,
    log_density_derivatives,
    quantum_potential_term,
)
from .linear import propagate_gaussian
from .regime import Smoluchowski


@dataclass(frozen=True)
class SmoluchowskiContext:
    beta: float
    diffusion_D: float
    force: Free | Harmonic | Magnetic = Free()

    def __post_init__(self):
        if self.beta <= 0 or self.diffusion_D <= 0:
            raise ValueError("beta and diffusion_D must be > 0")

    @property
    def regime(self):
        return Smoluchowski(diffusion_D=self.diffusion_D, beta=self.beta)

    def drift(self, x):
        """F/(m beta) for the conservative variants."""
        if isinstance(self.force, Free):
            return np.zeros_like(np.asarray(x, dtype=float))
        if isinstance(self.force, Harmonic):
            return -self.force.omega**2 / self.beta * np.asarray(x, dtype=float)
        raise ValueError("no configuration-space drift for the magnetic variant")


def current_velocity(rho, spacing, ctx, x=None):
    """v = F/(m beta) - D grad(rho)/rho on the grid; (v, mask)."""
    rho = np.asarray(rho, dtype=float)
    l1, _, mask = log_density_derivatives(rho, spacing)
    if x is None:
        x = np.zeros_like(rho)
    v = ctx.drift(x) - ctx.diffusion_D * l1
    return v, mask & np.isfinite(v)


def omega_potential(x, ctx):
    """Volume potential Omega = (F/(m beta))^2/2 + D d_x(F/(m beta))."""
    x = np.asarray(x, dtype=float)
    if isinstance(ctx.force, Free):
        return np.zeros_like(x)
    if isinstance(ctx.force, Harmonic):
        lam = ctx.force.omega**2 / ctx.beta
        return 0.5 * (lam * x) ** 2 - ctx.diffusion_D * lam
    raise ValueError("Omega is undefined for the magnetic Smoluchowski regime")


def magnetic_rescaling(beta, omega_c):
    """Factor beta^2/(beta^2 + omega_c^2) multiplying Q under a magnetic field."""
    return beta**2 / (beta**2 + omega_c**2)


def smoluchowski_Q(rho, spacing, ctx, omega_c=None):
    """Pressure potential Q = 2 D^2 lap sqrt(rho)/sqrt(rho), rescaled if magnetic."""
    _, q_pot, mask = quantum_potential_term(rho, spacing, coefficient=ctx.diffusion_D**2)
    if omega_c is not None:
        q_pot = magnetic_rescaling(ctx.beta, omega_c) * q_pot
    return q_pot, mask


def smoluchowski_fields(t, init, ctx, grid):
    """Closed-form overdamped fields: Gaussian rho and its current velocity.

    Free gives the heat kernel N(x_ini, a^2 + 2 D t); harmonic the OU
    relaxation toward the v = 0 stationary state with variance
    D beta / omega^2.  var_u / p_kin are zero placeholders (no velocity
    coordinate survives this limit).
    """
    mean, cov = propagate_gaussian(ctx.force, ctx.regime, t, init)
    x = grid.centers
    var = cov[0, 0]
    rho = np.exp(-((x - mean[0]) ** 2) / (2.0 * var)) / np.sqrt(2.0 * np.pi * var)
    v = ctx.drift(x) + ctx.diffusion_D * (x - mean[0]) / var
    qp, _, mask = quantum_potential_term(rho, grid.spacing)
    zeros = np.zeros_like(x)
    return HydroField(
        grid=grid, t=t, rho=rho, v=v, var_u=zeros, p_kin=zeros, qp_term=qp, mask=mask
    )


def smoluchowski_stationary_field(ctx, grid, t=0.0):
    """Harmonic stationary state built from v = 0: variance D beta/omega^2."""
    if not isinstance(ctx.force, Harmonic):
        raise ValueError("only the harmonic variant has a normalizable stationary state")
    var = ctx.diffusion_D * ctx.beta / ctx.force.omega**2
    x = grid.centers
    rho = np.exp(-(x**2) / (2.0 * var)) / np.sqrt(2.0 * np.pi * var)
    qp, _, mask = quantum_potential_term(rho, grid.spacing)
    zeros = np.zeros_like(x)
    return HydroField(
        grid=grid, t=t, rho=rho, v=zeros, var_u=zeros, p_kin=zeros, qp_term=qp, mask=mask
    )


def smoluchowski_triplet(t, delta, init, ctx, grid):
    return tuple(smoluchowski_fields(s, init, ctx, grid) for s in (t - delta, t, t + delta))


def smoluchowski_momentum_residual(triplet, ctx, variant="standard", omega_c=None):
    """Residual of (d_t + v d_x) v - grad(Omega - Q), or the flipped variant.

    variant="standard" vanishes on exact Smoluchowski solutions;
    variant="recoil" tests the sign-flipped grad(Q - Omega) law.
    """
    if variant not in ("standard", "recoil"):
        raise ValueError("variant must be 'standard' or 'recoil'")
    f0, f1, f2, delta = _check_aligned(triplet)
    h = f1.grid.spacing
    x = f1.grid.centers
    dv_dt = (f2.v - f0.v) / (2.0 * delta)
    adv = f1.v * _d1(f1.v, h)
    q_pot, q_mask = smoluchowski_Q(f1.rho, h, ctx, omega_c=omega_c)
    pot = omega_potential(x, ctx) - q_pot
    if variant == "recoil":
        pot = -pot
    res = dv_dt + adv - _d1(pot, h)
    mask = f0.mask & f1.mask & f2.mask & q_mask & np.isfinite(res)
    return res, mask

"""Monte Carlo ensemble simulation of the linear stochastic regimes.

An ensemble is a set of phase-space samples sharing one timestamp.  Two
integrators are provided: ``exact_step`` advances with the distribution-
exact Gaussian transition (any dt), ``em_step`` is the first-order
Euler-Maruyama cross-validator.  Noise comes from counter-based streams
keyed by (master seed, sample index, step index), so results are
bit-reproducible and independent of worker partitioning.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .forces import Free, Harmonic, Magnetic
from .linear import initial_state_moments, transition
from .regime import Frictionless, Kramers, Smoluchowski

__all__ = [
    "Ensemble",
    "Frictionless",
    "Kramers",
    "Smoluchowski",
    "exact_step",
    "em_step",
    "simulate",
    "sample_initial",
    "collision_moments",
    "write_snapshots",
]


@dataclass(frozen=True)
class Ensemble:
    """Phase-space samples at a common time.

    x has shape (N, n_dim); u is None for Smoluchowski (position-only)
    processes.  step_index counts noise draws already consumed, keying the
    per-sample counter streams.
    """

    x: np.ndarray
    u: np.ndarray | None
    t: float
    master_seed: int
    step_index: int = 0

    def __post_init__(self):
        if self.x.ndim != 2 or self.x.shape[0] < 1:
            raise ValueError("x must be (N, n_dim) with N >= 1")
        if self.u is not None and self.u.shape != self.x.shape:
            raise ValueError("u must match x in shape")

    @property
    def n_samples(self):
        return self.x.shape[0]

    @property
    def n_dim(self):
        return self.x.shape[1]

    def state(self):
        if self.u is None:
            return self.x.copy()
        return np.hstack([self.x, self.u])

    def with_state(self, s, t, step_index):
        n = self.n_dim
        u = None if self.u is None else s[:, n:].copy()
        return replace(self, x=s[:, :n].copy(), u=u, t=t, step_index=step_index)


def sample_initial(init, force, regime, n_samples, master_seed):
    """Draw the product-Gaussian initial ensemble (counter stream 0)."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    n_dim = force.n_dim
    mean, _ = initial_state_moments(force, regime, init)
    d = mean.size
    z = kernels.normals(master_seed, kernels.STREAM_INIT, 0, n_samples, d)
    if isinstance(regime, Smoluchowski):
        x = mean[None, :] + init.a * z
        return Ensemble(x=x, u=None, t=0.0, master_seed=master_seed)
    x = mean[None, :n_dim] + init.a * z[:, :n_dim]
    u = mean[None, n_dim:] + init.b * z[:, n_dim:]
    return Ensemble(x=x, u=u, t=0.0, master_seed=master_seed)


def exact_step(ensemble, force, regime, dt):
    """Advance by the exact Gaussian transition; distribution-exact for any dt."""
    if dt <= 0:
        raise ValueError("dt must be > 0")
    phi, _, chol = transition(force, regime, dt)
    s = ensemble.state()
    if s.shape[1] != phi.shape[0]:
        raise ValueError("ensemble state dimension does not match (force, regime)")
    z = kernels.normals(
        ensemble.master_seed,
        kernels.STREAM_DYNAMICS,
        ensemble.step_index,
        ensemble.n_samples,
        s.shape[1],
    )
    s_new = s @ phi.T + z @ chol.T
    return ensemble.with_state(s_new, ensemble.t + dt, ensemble.step_index + 1)


def em_step(ensemble, force, regime, dt):
    """Explicit first-order (Euler-Maruyama) update."""
    if dt <= 0:
        raise ValueError("dt must be > 0")
    z = kernels.normals(
        ensemble.master_seed,
        kernels.STREAM_DYNAMICS,
        ensemble.step_index,
        ensemble.n_samples,
        ensemble.n_dim,
    )
    x = ensemble.x
    if isinstance(regime, Smoluchowski):
        drift = _overdamped_drift(force, regime, x)
        x_new = x + drift * dt + np.sqrt(2.0 * regime.diffusion_D * dt) * z
        return replace(ensemble, x=x_new, t=ensemble.t + dt, step_index=ensemble.step_index + 1)
    beta = regime.beta if isinstance(regime, Kramers) else 0.0
    u = ensemble.u
    accel = _acceleration(force, x, u)
    u_new = u + (accel - beta * u) * dt + np.sqrt(2.0 * regime.q * dt) * z
    x_new = x + u * dt
    return replace(
        ensemble, x=x_new, u=u_new, t=ensemble.t + dt, step_index=ensemble.step_index + 1
    )


def _acceleration(force, x, u):
    if isinstance(force, Free):
        return 0.0
    if isinstance(force, Harmonic):
        return -force.omega**2 * x
    # Lorentz acceleration omega_c (u x z-hat) in the plane
    return force.omega_c * np.column_stack([u[:, 1], -u[:, 0]])


def _overdamped_drift(force, regime, x):
    if isinstance(force, Free):
        return 0.0
    if isinstance(force, Harmonic):
        return -force.omega**2 / regime.beta * x
    raise ValueError("no overdamped magnetic process is provided")


def simulate(init, force, regime, t_grid, n_samples, seed, integrator="exact", dt=None):
    """Propagate Gaussian initial data, returning an Ensemble per grid time.

    t_grid must be strictly increasing and non-negative.  The exact
    integrator steps directly between grid times; Euler-Maruyama subdivides
    each interval into steps of at most dt (required for "em").
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size == 0:
        raise ValueError("t_grid must be non-empty")
    if t_grid[0] < 0 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing from 0")
    if integrator not in ("exact", "em"):
        raise ValueError(f"unknown integrator {integrator!r}")
    if integrator == "em" and (dt is None or dt <= 0):
        raise ValueError("the em integrator requires dt > 0")

    ens = sample_initial(init, force, regime, n_samples, seed)
    out = []
    if t_grid[0] == 0.0:
        out.append(ens)
        targets = t_grid[1:]
    else:
        targets = t_grid
    for t_next in targets:
        span = t_next - ens.t
        if integrator == "exact":
            ens = exact_step(ens, force, regime, span)
        else:
            n_sub = max(1, int(np.ceil(span / dt - 1e-12)))
            h = span / n_sub
            for _ in range(n_sub):
                ens = em_step(ens, force, regime, h)
        out.append(ens)
    return out


def collision_moments(rho, v, second_moment, regime):
    """Velocity moments (m0, m1, m2) of the collision operator.

    For the divergence-form operator with a local Gaussian velocity model:
    m0 vanishes always; m1 = -beta rho v (zero without friction); the
    second moment 2 q rho - 2 beta rho <u^2> is generically non-vanishing.
    """
    rho = np.asarray(rho, dtype=float)
    v = np.asarray(v, dtype=float)
    second_moment = np.asarray(second_moment, dtype=float)
    if isinstance(regime, Frictionless):
        zero = np.zeros_like(rho)
        return zero, zero.copy(), 2.0 * regime.q * rho
    if isinstance(regime, Kramers):
        m1 = -regime.beta * rho * v
        m2 = 2.0 * regime.q * rho - 2.0 * regime.beta * rho * second_moment
        return np.zeros_like(rho), m1, m2
    raise ValueError("collision moments apply to Frictionless or Kramers only")


def write_snapshots(snapshots, path, header_comment=None, long_format=True):
    """CSV export with columns t,idx,x[,y],u[,w].

    long_format=True writes one file with all grid times; otherwise one
    file per time with the grid time injected into the file name.
    """
    first = snapshots[0]
    cols = ["t", "idx", "x"]
    if first.n_dim == 2:
        cols.append("y")
    if first.u is not None:
        cols.append("u")
        if first.n_dim == 2:
            cols.append("w")

    def rows(ens):
        for i in range(ens.n_samples):
            vals = [repr(float(ens.t)), str(i)]
            vals += [repr(float(c)) for c in ens.x[i]]
            if ens.u is not None:
                vals += [repr(float(c)) for c in ens.u[i]]
            yield ",".join(vals)

    def dump(fname, snaps):
        with open(fname, "w") as f:
            if header_comment:
                f.write(f"# {header_comment}\n")
            f.write(",".join(cols) + "\n")
            for ens in snaps:
                for line in rows(ens):
                    f.write(line + "\n")

    if long_format:
        dump(path, snapshots)
        return [str(path)]
    import os

    base, ext = os.path.splitext(str(path))
    written = []
    for ens in snapshots:
        fname = f"{base}_t{ens.t:g}{ext or '.csv'}"
        dump(fname, [ens])
        written.append(fname)
    return written

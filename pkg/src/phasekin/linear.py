"""Exact Gaussian transition machinery for the linear stochastic systems.

Every (force, regime) pair in scope has linear drift, so the transition
over any dt is Gaussian: mean via the flow map expm(A dt), fluctuation via
the exact noise covariance Sigma(dt) = int_0^dt expm(As) B expm(A's) ds,
evaluated with the Van Loan block-exponential identity (machine precision,
no quadrature).  Used both for Monte Carlo stepping and for closed-form
propagation of Gaussian initial data.
"""

from functools import lru_cache

import numpy as np
from scipy.linalg import expm

from .forces import Free, Harmonic, Magnetic
from .regime import Frictionless, Kramers, Smoluchowski


def drift_noise_matrices(force, regime):
    """State-space (A, B) with B the diffusion matrix of the SDE noise.

    State layout: positions first, then velocities.  Smoluchowski states
    are position-only.
    """
    if isinstance(regime, Smoluchowski):
        if isinstance(force, Magnetic):
            raise ValueError("no overdamped magnetic process is provided")
        d = 2 * regime.diffusion_D
        if isinstance(force, Free):
            return np.zeros((1, 1)), np.array([[d]])
        return np.array([[-force.omega**2 / regime.beta]]), np.array([[d]])

    beta = regime.beta if isinstance(regime, Kramers) else 0.0
    q = regime.q
    if isinstance(force, Magnetic):
        a = np.zeros((4, 4))
        a[0, 2] = a[1, 3] = 1.0
        a[2, 3] = force.omega_c
        a[3, 2] = -force.omega_c
        a[2, 2] = a[3, 3] = -beta
        b = np.diag([0.0, 0.0, 2 * q, 2 * q])
        return a, b
    w2 = force.omega**2 if isinstance(force, Harmonic) else 0.0
    a = np.array([[0.0, 1.0], [-w2, -beta]])
    b = np.diag([0.0, 2 * q])
    return a, b


def noise_covariance(a, b, dt):
    """Van Loan evaluation of int_0^dt expm(As) B expm(A's) ds."""
    n = a.shape[0]
    m = np.zeros((2 * n, 2 * n))
    m[:n, :n] = -a
    m[:n, n:] = b
    m[n:, n:] = a.T
    e = expm(m * dt)
    sigma = e[n:, n:].T @ e[:n, n:]
    return 0.5 * (sigma + sigma.T)


def _chol_psd(sigma):
    """Cholesky-like factor for a (possibly singular) covariance."""
    if not np.any(sigma):
        return np.zeros_like(sigma)
    try:
        return np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        vals, vecs = np.linalg.eigh(sigma)
        return vecs * np.sqrt(np.clip(vals, 0.0, None))


@lru_cache(maxsize=256)
def _transition_cached(force, regime, dt):
    a, b = drift_noise_matrices(force, regime)
    # The Van Loan block carries expm(-A dt); with friction that grows like
    # e^(beta dt) and overflows double range for long spans.  Evaluate on a
    # subdivided step where ||A|| dt <= 1, then double up with the semigroup
    # relations Phi(2h) = Phi(h)^2, Sigma(2h) = Phi(h) Sigma(h) Phi(h)' + Sigma(h).
    scale = max(np.linalg.norm(a, np.inf), 1e-30)
    n_double = max(0, int(np.ceil(np.log2(max(scale * dt, 1.0)))))
    h = dt / 2**n_double
    phi = expm(a * h)
    sigma = noise_covariance(a, b, h)
    for _ in range(n_double):
        sigma = phi @ sigma @ phi.T + sigma
        phi = phi @ phi
    sigma = 0.5 * (sigma + sigma.T)
    return phi, sigma, _chol_psd(sigma)


def transition(force, regime, dt):
    """(Phi, Sigma, chol) of the exact Gaussian transition over dt."""
    if dt < 0:
        raise ValueError("dt must be >= 0")
    return _transition_cached(force, regime, float(dt))


def initial_state_moments(force, regime, init):
    """Mean vector and diagonal covariance of the product-Gaussian data."""
    n_dim = force.n_dim
    if isinstance(regime, Smoluchowski):
        mean = np.zeros(n_dim)
        mean[0] = init.x_ini
        cov = np.diag([init.a**2] * n_dim)
        return mean, cov
    mean = np.zeros(2 * n_dim)
    mean[0] = init.x_ini
    mean[n_dim] = init.u_ini
    cov = np.diag([init.a**2] * n_dim + [init.b**2] * n_dim)
    return mean, cov


def propagate_gaussian(force, regime, t, init):
    """Exact (mean, covariance) of the state at time t from Gaussian data."""
    phi, sigma, _ = transition(force, regime, t)
    mean0, cov0 = initial_state_moments(force, regime, init)
    return phi @ mean0, phi @ cov0 @ phi.T + sigma

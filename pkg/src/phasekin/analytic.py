"""Closed-form Gaussian phase-space dynamics for the frictionless regimes.

Covers the Kolmogorov transition kernel, joint and marginal densities of
propagated product-Gaussian data, configuration-conditioned velocity
moments, the squared pressure coefficient d^2(t) for free / magnetic /
harmonic confinement (with series paths in the small-frequency regime),
and the Heisenberg-parametrized coherent-state limit.

Dimension conventions: positions in length, velocities in length/time,
noise intensity q in velocity^2/time; densities carry the reciprocal of
their argument's dimensions.  All functions are pure.
"""

import math
from dataclasses import dataclass

import numpy as np

from .forces import Free, Harmonic, Magnetic
from .linear import propagate_gaussian
from .regime import Frictionless

# Relative accuracy of double evaluation of the trigonometric d^2 forms
# degrades like (omega t)^-4; below this product the series path wins.
_SERIES_THRESHOLD = 0.1


class DegenerateKernelError(ValueError):
    """Transition kernel has collapsed to a delta (t = 0 or q = 0)."""


@dataclass(frozen=True)
class NoiseParams:
    """Noise intensity q, friction rate beta, spatial diffusion D.

    Any subset may be given; when q and (beta, D) are both supplied the
    fluctuation-dissipation relation q = D beta^2 must hold.
    """

    q: float | None = None
    beta: float | None = None
    diffusion_D: float | None = None

    def __post_init__(self):
        for name in ("q", "beta", "diffusion_D"):
            val = getattr(self, name)
            if val is not None and val < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.q is not None and self.beta is not None and self.diffusion_D is not None:
            implied = self.diffusion_D * self.beta**2
            scale = max(abs(self.q), abs(implied), 1e-300)
            if abs(self.q - implied) > 1e-12 * scale:
                raise ValueError(
                    f"fluctuation-dissipation violated: q={self.q} vs D*beta^2={implied}"
                )


@dataclass(frozen=True)
class InitialGaussian:
    """Factorized Gaussian phase-space data: N(x_ini, a^2) x N(u_ini, b^2)."""

    x_ini: float = 0.0
    u_ini: float = 0.0
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise ValueError("widths a, b must be > 0")


@dataclass(frozen=True)
class CovarianceEntries:
    """Second moments of (R, S): e = var R, g = var S, h = cov(R, S).

    k is the planar cross-entry cov(x, u_y) of the magnetic case.
    """

    e: float
    g: float
    h: float
    k: float | None = None

    def __post_init__(self):
        if self.e <= 0 or self.g <= 0:
            raise ValueError("variances e, g must be > 0")

    @property
    def det(self):
        d = self.e * self.g - self.h**2
        if self.k is not None:
            d -= self.k**2
        return d


@dataclass(frozen=True)
class QuantumScale:
    hbar: float
    m: float
    omega: float

    def __post_init__(self):
        if self.hbar <= 0 or self.m <= 0 or self.omega <= 0:
            raise ValueError("hbar, m, omega must all be > 0")


def covariance_entries_free(t, init, q):
    """Entries e, g, h of the frictionless free covariance at time t."""
    if t < 0:
        raise ValueError("t must be >= 0")
    a2, b2 = init.a**2, init.b**2
    return CovarianceEntries(
        e=a2 + b2 * t**2 + (2.0 / 3.0) * q * t**3,
        g=b2 + 2.0 * q * t,
        h=b2 * t + q * t**2,
    )


def covariance_entries(force, t, init, q):
    """Exact covariance entries for any frictionless linear system.

    Obtained by second-moment integration of the linear dynamics rather
    than printed formulas; the magnetic case carries the cross-entry k.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if isinstance(force, Free):
        return covariance_entries_free(t, init, q)
    _, cov = propagate_gaussian(force, Frictionless(q), t, init)
    if isinstance(force, Magnetic):
        return CovarianceEntries(
            e=float(cov[0, 0]), g=float(cov[2, 2]), h=float(cov[0, 2]), k=float(cov[0, 3])
        )
    return CovarianceEntries(e=float(cov[0, 0]), g=float(cov[1, 1]), h=float(cov[0, 1]))


def kolmogorov_kernel(x, u, t, x0, u0, q):
    """Frictionless free transition density P(x, u, t | x0, u0, 0)."""
    if t <= 0 or q <= 0:
        raise DegenerateKernelError("kernel is a delta for t = 0 or q = 0")
    pref = math.sqrt(12.0) / (4.0 * math.pi * q * t**2)
    arg = -((u - u0) ** 2) / (4.0 * q * t) - 3.0 * (x - x0 - 0.5 * (u + u0) * t) ** 2 / (
        q * t**3
    )
    return pref * np.exp(arg)


def joint_density(R, S, cov):
    """Bivariate Gaussian W(R, S) with covariance (e, h; h, g)."""
    det = cov.e * cov.g - cov.h**2
    if det <= 0:
        raise ValueError("covariance is not positive definite")
    quad = cov.g * R**2 - 2.0 * cov.h * R * S + cov.e * S**2
    return np.exp(-quad / (2.0 * det)) / (2.0 * math.pi * math.sqrt(det))


def gaussian_density(x, mean, variance):
    return np.exp(-((x - mean) ** 2) / (2.0 * variance)) / math.sqrt(2.0 * math.pi * variance)


def marginal_position(x, t, init, q):
    """Position marginal: Gaussian in R with variance e(t)."""
    cov = covariance_entries_free(t, init, q)
    return gaussian_density(x, init.x_ini + init.u_ini * t, cov.e)


def marginal_velocity(u, t, init, q):
    """Velocity marginal: Gaussian in S with variance g(t)."""
    cov = covariance_entries_free(t, init, q)
    return gaussian_density(u, init.u_ini, cov.g)


def conditional_moments(x, t, init, q):
    """Conditional mean velocity <u>_x and x-independent variance."""
    cov = covariance_entries_free(t, init, q)
    R = x - init.x_ini - init.u_ini * t
    mean = init.u_ini + (cov.h / cov.e) * R
    variance = cov.g - cov.h**2 / cov.e
    return mean, variance


def _d2_free(t, a2, b2, q):
    return a2 * b2 + 2.0 * a2 * q * t + (2.0 / 3.0) * b2 * q * t**3 + (1.0 / 3.0) * q**2 * t**4


def _d2_magnetic(t, a2, b2, q, wc):
    if abs(wc * t) < _SERIES_THRESHOLD:
        return (
            _d2_free(t, a2, b2, q)
            + wc**2 * (-(q**2) * t**6 / 90.0 - b2 * q * t**5 / 30.0)
            + wc**4 * (q**2 * t**8 / 5040.0 + b2 * q * t**7 / 1260.0)
        )
    return (
        a2 * b2
        - 8.0 * q**2 / wc**4
        + 4.0 * b2 * q * t / wc**2
        + 4.0 * q**2 * t**2 / wc**2
        + 2.0 * a2 * q * t
        + 8.0 * q**2 / wc**4 * math.cos(t * wc)
        - 4.0 * b2 * q / wc**3 * math.sin(t * wc)
    )


def _d2_harmonic(t, a2, b2, q, w):
    if abs(w * t) < _SERIES_THRESHOLD:
        return (
            _d2_free(t, a2, b2, q)
            + w**2
            * (
                -2.0 * q**2 * t**6 / 45.0
                - 2.0 * b2 * q * t**5 / 15.0
                - 2.0 * a2 * q * t**3 / 3.0
            )
            + w**4
            * (q**2 * t**8 / 315.0 + 4.0 * b2 * q * t**7 / 315.0 + 2.0 * a2 * q * t**5 / 15.0)
        )
    num = (
        -(q**2)
        + 2.0 * b2 * q * t * w**2
        + 2.0 * q**2 * t**2 * w**2
        + 2.0 * a2 * b2 * w**4
        + 2.0 * a2 * q * t * w**4
        + q**2 * math.cos(2.0 * t * w)
        + q * w * (-b2 + a2 * w**2) * math.sin(2.0 * t * w)
    )
    return num / (2.0 * w**4)


def d2_coefficient(force, t, init, q):
    """Squared pressure-term coefficient d^2(t); may be negative.

    Free is a sum of non-negative terms; harmonic and magnetic confinement
    can drive d^2 negative, so callers gate on positivity themselves.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    a2, b2 = init.a**2, init.b**2
    if isinstance(force, Free):
        return _d2_free(t, a2, b2, q)
    if isinstance(force, Magnetic):
        if force.omega_c <= 0:
            raise ValueError("magnetic d^2 needs omega_c > 0")
        return _d2_magnetic(t, a2, b2, q, force.omega_c)
    if force.omega <= 0:
        raise ValueError("harmonic d^2 needs omega > 0")
    return _d2_harmonic(t, a2, b2, q, force.omega)


@dataclass(frozen=True)
class PositivityWindow:
    """Uniform d^2 samples plus the first positive-to-negative crossing."""

    times: np.ndarray
    values: np.ndarray
    positive: np.ndarray
    first_zero: float | None

    def samples(self):
        return list(zip(self.times, self.values, self.positive))


def positivity_window(force, init, q, t_max, steps):
    """Sample d^2 on [0, t_max]; bisect the first sign change if any."""
    if t_max <= 0:
        raise ValueError("t_max must be > 0")
    if steps < 2:
        raise ValueError("steps must be >= 2")
    times = np.linspace(0.0, t_max, steps)
    values = np.array([d2_coefficient(force, t, init, q) for t in times])
    positive = values > 0
    first_zero = None
    for i in range(len(times) - 1):
        if positive[i] and not positive[i + 1]:
            lo, hi = times[i], times[i + 1]
            while hi - lo > 1e-10 * max(hi, 1e-30):
                mid = 0.5 * (lo + hi)
                if d2_coefficient(force, mid, init, q) > 0:
                    lo = mid
                else:
                    hi = mid
            first_zero = 0.5 * (lo + hi)
            break
    return PositivityWindow(times, values, positive, first_zero)


def heisenberg_initial(scale, x_ini=0.0, u_ini=0.0):
    """Initial widths from the uncertainty relation: a(mb) = hbar/2, b = a omega."""
    a = math.sqrt(scale.hbar / (2.0 * scale.m * scale.omega))
    b = math.sqrt(scale.hbar * scale.omega / (2.0 * scale.m))
    return InitialGaussian(x_ini=x_ini, u_ini=u_ini, a=a, b=b)


def coherent_density(x, t, scale, x_ini):
    """Non-spreading harmonic-oscillator Gaussian with oscillating center."""
    c = scale.m * scale.omega / scale.hbar
    return math.sqrt(c / math.pi) * np.exp(-c * (x - x_ini * np.cos(scale.omega * t)) ** 2)

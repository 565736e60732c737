"""Phase-space stochastic kinetics toolkit.

Closed-form Gaussian dynamics, Langevin Monte Carlo ensembles, hydrodynamic
moment extraction, and numerical verification of the local conservation
laws in frictionless and large-friction regimes.
"""

from .analytic import (
    CovarianceEntries,
    InitialGaussian,
    NoiseParams,
    QuantumScale,
    coherent_density,
    conditional_moments,
    covariance_entries,
    covariance_entries_free,
    d2_coefficient,
    heisenberg_initial,
    joint_density,
    kolmogorov_kernel,
    marginal_position,
    marginal_velocity,
    positivity_window,
)
from .forces import Free, Harmonic, Magnetic
from .hydro import (
    Grid1D,
    HydroField,
    continuity_residual,
    estimate_fields,
    fields_from_analytic,
    fit_quantum_coefficient,
    momentum_residual,
    quantum_potential_term,
)
from .kinetics import Ensemble, collision_moments, em_step, exact_step, simulate
from .regime import Frictionless, Kramers, Smoluchowski
from .regimes import (
    SmoluchowskiContext,
    current_velocity,
    magnetic_rescaling,
    omega_potential,
    smoluchowski_Q,
    smoluchowski_momentum_residual,
)

__version__ = "0.1.0"

"""Hydrodynamic fields, the quantum-potential term, and conservation residuals.

Fields live on a uniform 1-D grid: density rho, conditional mean velocity
v = <u>_x, conditional variance, kinetic pressure P_kin = var * rho, and
the pressure-gradient object qp_term = grad[ lap sqrt(rho) / sqrt(rho) ].

Stencils are second-order centered.  Log-derivative quantities (qp_term
and anything of the form grad rho / rho) are evaluated from ln(rho):
for Gaussian densities ln(rho) is polynomial, which keeps the quadratic
tail amplification of the sqrt form out of the residual budget.  Two
boundary cells are masked at each edge per derivative pass; cells below
1e-12 of the peak density are masked from qp_term.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .forces import Free, Harmonic, Magnetic
from .linear import propagate_gaussian
from .regime import Frictionless

DENSITY_FLOOR = 1e-300
PEAK_FRACTION_FLOOR = 1e-12
MIN_CELL_COUNT = 5


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    n_cells: int

    def __post_init__(self):
        if self.x_max <= self.x_min:
            raise ValueError("x_max must exceed x_min")
        if self.n_cells < 8:
            raise ValueError("n_cells must be >= 8")

    @property
    def spacing(self):
        return (self.x_max - self.x_min) / self.n_cells

    @property
    def centers(self):
        return self.x_min + (np.arange(self.n_cells) + 0.5) * self.spacing


def grid_spanning(mean, sigma, n_cells, n_sigmas=8.0):
    """Grid centered on mean covering +/- n_sigmas standard deviations."""
    return Grid1D(mean - n_sigmas * sigma, mean + n_sigmas * sigma, n_cells)


@dataclass(frozen=True)
class HydroField:
    """Gridded hydrodynamic moments at one time; invalid cells are masked."""

    grid: Grid1D
    t: float
    rho: np.ndarray
    v: np.ndarray
    var_u: np.ndarray
    p_kin: np.ndarray
    qp_term: np.ndarray
    mask: np.ndarray
    counts: np.ndarray | None = None
    coverage: float = 1.0


def _d1(f, h):
    out = np.full_like(f, np.nan)
    out[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
    return out


def _d2(f, h):
    out = np.full_like(f, np.nan)
    out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / (h * h)
    return out


def log_density_derivatives(rho, spacing):
    """(grad ln rho, lap ln rho, validity mask) by centered differences."""
    rho = np.asarray(rho, dtype=float)
    lnr = np.log(np.maximum(rho, DENSITY_FLOOR))
    l1 = _d1(lnr, spacing)
    l2 = _d2(lnr, spacing)
    mask = np.isfinite(l1) & np.isfinite(l2) & (rho > PEAK_FRACTION_FLOOR * rho.max())
    return l1, l2, mask


def quantum_potential_term(rho, spacing, coefficient=1.0):
    """(qp_term, Q, mask) from a density profile.

    lap sqrt(rho)/sqrt(rho) = lap(ln rho)/2 + (grad ln rho)^2/4; qp_term is
    its centered gradient and Q = 2 * coefficient * lap sqrt(rho)/sqrt(rho).
    Needs at least a 5-point interior; two cells are masked per edge.
    """
    rho = np.asarray(rho, dtype=float)
    if rho.size < 9:
        raise ValueError("grid too small for the nested stencil")
    l1, l2, inner_mask = log_density_derivatives(rho, spacing)
    ratio = 0.5 * l2 + 0.25 * l1 * l1
    qp = _d1(ratio, spacing)
    q_pot = 2.0 * coefficient * ratio
    mask = inner_mask.copy()
    mask[:2] = mask[-2:] = False
    mask &= np.isfinite(qp)
    return qp, q_pot, mask


def estimate_fields(ensemble, grid, min_count=MIN_CELL_COUNT):
    """Histogram density and per-cell velocity moments from an ensemble.

    Cells with fewer than min_count samples are masked from downstream
    residuals; a coverage fraction below 0.99 flags grid clipping.
    """
    if ensemble.n_dim != 1:
        raise ValueError("field estimation expects 1-D ensembles")
    x = ensemble.x[:, 0]
    u = ensemble.u[:, 0] if ensemble.u is not None else None
    counts, su, suu, missed = kernels.binned_moments(
        x, u, grid.x_min, grid.spacing, grid.n_cells
    )
    n = ensemble.n_samples
    rho = counts / (n * grid.spacing)
    if grid.n_cells < 9:
        raise ValueError("grid too small for the quantum-potential stencil")
    with np.errstate(invalid="ignore", divide="ignore"):
        v = np.where(counts > 0, su / np.maximum(counts, 1), 0.0)
        var = np.where(
            counts > 1,
            (suu - counts * v**2) / np.maximum(counts - 1, 1),
            0.0,
        )
    var = np.maximum(var, 0.0)
    qp, _, qp_mask = quantum_potential_term(rho, grid.spacing)
    mask = qp_mask & (counts >= min_count)
    return HydroField(
        grid=grid,
        t=ensemble.t,
        rho=rho,
        v=v,
        var_u=var,
        p_kin=var * rho,
        qp_term=qp,
        mask=mask,
        counts=counts,
        coverage=1.0 - missed / n,
    )


def fields_from_analytic(t, init, q, grid, force=Free()):
    """Noise-free fields at grid nodes from the closed-form Gaussian state."""
    if isinstance(force, Magnetic):
        raise ValueError("analytic fields are 1-D; magnetic systems are planar")
    mean, cov = propagate_gaussian(force, Frictionless(q), t, init)
    x = grid.centers
    e, g, h = cov[0, 0], cov[1, 1], cov[0, 1]
    rho = np.exp(-((x - mean[0]) ** 2) / (2.0 * e)) / np.sqrt(2.0 * np.pi * e)
    v = mean[1] + (h / e) * (x - mean[0])
    var = g - h * h / e
    var_arr = np.full_like(x, var)
    qp, _, mask = quantum_potential_term(rho, grid.spacing)
    return HydroField(
        grid=grid,
        t=t,
        rho=rho,
        v=v,
        var_u=var_arr,
        p_kin=var_arr * rho,
        qp_term=qp,
        mask=mask,
    )


def analytic_triplet(t, delta, init, q, grid, force=Free()):
    """Fields at t - delta, t, t + delta for residual evaluation."""
    return tuple(fields_from_analytic(s, init, q, grid, force) for s in (t - delta, t, t + delta))


def _check_aligned(triplet):
    f0, f1, f2 = triplet
    if not (f0.grid == f1.grid == f2.grid):
        raise ValueError("misaligned grids in field triplet")
    d0 = f1.t - f0.t
    d1 = f2.t - f1.t
    if not np.isclose(d0, d1, rtol=1e-9, atol=0.0) or d0 <= 0:
        raise ValueError("triplet must be uniformly spaced in time")
    return f0, f1, f2, d0


def continuity_residual(triplet):
    """Per-cell residual of d_t rho + d_x (v rho); (residual, mask)."""
    f0, f1, f2, delta = _check_aligned(triplet)
    h = f1.grid.spacing
    drho_dt = (f2.rho - f0.rho) / (2.0 * delta)
    flux_div = _d1(f1.v * f1.rho, h)
    res = drho_dt + flux_div
    mask = f0.mask & f1.mask & f2.mask & np.isfinite(res)
    return res, mask


def _force_per_mass(force, x):
    if isinstance(force, Free):
        return np.zeros_like(x)
    if isinstance(force, Harmonic):
        return -force.omega**2 * x
    raise ValueError("magnetic momentum residuals need a 2-D field variant")


def momentum_residual(triplet, force, coefficient, sign="plus"):
    """Residual of (d_t + v d_x) v - F/m -+ 2 coefficient qp_term.

    sign="plus" tests the frictionless law (+ grad Q on the right);
    sign="minus" the Brownian-recoil-flipped convention.
    """
    if sign not in ("plus", "minus"):
        raise ValueError("sign must be 'plus' or 'minus'")
    f0, f1, f2, delta = _check_aligned(triplet)
    h = f1.grid.spacing
    dv_dt = (f2.v - f0.v) / (2.0 * delta)
    adv = f1.v * _d1(f1.v, h)
    s = 1.0 if sign == "plus" else -1.0
    res = dv_dt + adv - _force_per_mass(force, f1.grid.centers) - s * 2.0 * coefficient * f1.qp_term
    mask = f0.mask & f1.mask & f2.mask & np.isfinite(res)
    return res, mask


def fit_quantum_coefficient(triplet, force):
    """Least-squares c in (d_t + v d_x) v - F/m = c * qp_term.

    Returns (c, sign of c, rms residual of the fit on unmasked cells).
    """
    f0, f1, f2, delta = _check_aligned(triplet)
    h = f1.grid.spacing
    y = (f2.v - f0.v) / (2.0 * delta) + f1.v * _d1(f1.v, h)
    y = y - _force_per_mass(force, f1.grid.centers)
    mask = f0.mask & f1.mask & f2.mask & np.isfinite(y) & np.isfinite(f1.qp_term)
    g = f1.qp_term[mask]
    if g.size == 0 or np.max(np.abs(g)) < 1e-12:
        raise ValueError("degenerate regressor: qp_term vanishes on unmasked cells")
    c = float(np.dot(g, y[mask]) / np.dot(g, g))
    resid = y[mask] - c * g
    return c, float(np.sign(c)), float(np.sqrt(np.mean(resid**2)))


def pressure_identity_residual(field, coefficient):
    """Pointwise residual of -(1/rho) d_x P_kin = 2 coefficient qp_term.

    The left side is expanded as -(d_x var + var d_x ln rho) so Gaussian
    profiles are handled by the same stable log-derivative stencils.
    """
    h = field.grid.spacing
    l1, _, _ = log_density_derivatives(field.rho, h)
    lhs = -(_d1(field.var_u, h) + field.var_u * l1)
    res = lhs - 2.0 * coefficient * field.qp_term
    mask = field.mask & np.isfinite(res)
    return res, mask


def write_field_csv(field, path, header_comment=None):
    """CSV export: columns x,rho,v,var_u,p_kin,qp_term,mask."""
    with open(path, "w") as f:
        if header_comment:
            f.write(f"# {header_comment}\n")
        f.write("x,rho,v,var_u,p_kin,qp_term,mask\n")
        x = field.grid.centers
        for i in range(field.grid.n_cells):
            qp = field.qp_term[i]
            f.write(
                f"{float(x[i])!r},{float(field.rho[i])!r},{float(field.v[i])!r},"
                f"{float(field.var_u[i])!r},{float(field.p_kin[i])!r},"
                f"{(float(qp) if np.isfinite(qp) else 0.0)!r},{int(field.mask[i])}\n"
            )


def write_residual_csv(x, residual, stat_error, mask, path, header_comment=None):
    """CSV export: columns x,residual,stat_error (masked cells skipped)."""
    with open(path, "w") as f:
        if header_comment:
            f.write(f"# {header_comment}\n")
        f.write("x,residual,stat_error\n")
        for i in range(len(x)):
            if mask[i]:
                err = 0.0 if stat_error is None else float(stat_error[i])
                f.write(f"{float(x[i])!r},{float(residual[i])!r},{err!r}\n")


def subsample_field(ensemble, grid, indices, min_count=MIN_CELL_COUNT):
    """estimate_fields on a row subset; used by bootstrap resampling."""
    sub = replace(
        ensemble,
        x=ensemble.x[indices],
        u=None if ensemble.u is None else ensemble.u[indices],
    )
    return estimate_fields(sub, grid, min_count=min_count)

"""Bootstrap standard errors for ensemble-derived estimators."""

import numpy as np


def bootstrap_indices(n, n_boot, seed):
    rng = np.random.default_rng(seed)
    return rng.integers(0, n, size=(n_boot, n))


def cov_entries_2d(x, u):
    """Sample (var x, cov xu, var u) with the unbiased normalization."""
    n = x.size
    dx = x - x.mean()
    du = u - u.mean()
    return (
        float(np.dot(dx, dx) / (n - 1)),
        float(np.dot(dx, du) / (n - 1)),
        float(np.dot(du, du) / (n - 1)),
    )


def bootstrap_cov_se(x, u, n_boot=200, seed=0):
    """Bootstrap SE of (var x, cov xu, var u) over n_boot resamples."""
    idx = bootstrap_indices(x.size, n_boot, seed)
    stats = np.array([cov_entries_2d(x[i], u[i]) for i in idx])
    return stats.std(axis=0, ddof=1)


def bootstrap_statistic(values, statistic, n_boot=200, seed=0):
    """Bootstrap SE of an arbitrary per-resample statistic of sample rows."""
    idx = bootstrap_indices(len(values), n_boot, seed)
    out = np.array([statistic(values[i]) for i in idx])
    return out.std(axis=0, ddof=1)

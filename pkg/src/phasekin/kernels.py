"""Hot numeric kernels: counter-based noise streams and binned moments.

Every kernel exists twice -- a numba ``@njit`` version and a vectorized
numpy fallback -- selected through :mod:`phasekin.backend`.  The two paths
produce bit-identical uint64 hash streams; the derived float normals agree
to rounding (libm vs numpy SIMD transcendentals).

Noise draws are keyed by ``(master_seed, stream, step, sample, slot)`` via a
double-round splitmix64 finalizer, so any sample's noise is reproducible
independently of how samples are partitioned across workers.
"""

import math

import numpy as np

from .backend import using_numba

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_SLOT_SALT = 0xD6E8FEB86659FD93

# reserved stream tags
STREAM_INIT = 0
STREAM_DYNAMICS = 1


def _finalize_int(z):
    """splitmix64 finalizer on a python int, mod 2^64."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * _M1) & _MASK
    z = ((z ^ (z >> 27)) * _M2) & _MASK
    return z ^ (z >> 31)


def stream_base(master_seed, stream, step):
    """Scalar base key for one (seed, stream, step) combination."""
    z = _finalize_int((int(master_seed) & _MASK) ^ ((_GOLDEN * (stream + 1)) & _MASK))
    return _finalize_int(z ^ ((_M1 * (int(step) + 1)) & _MASK))


# ---------------------------------------------------------------------------
# numpy fallback path
# ---------------------------------------------------------------------------

def _finalize_u64(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def hash_u64_numpy(base, idx, slot):
    """uint64 hash of (base, sample index, slot); idx is a uint64 array."""
    h = _finalize_u64(np.uint64(base) + np.uint64(_GOLDEN) * idx)
    return _finalize_u64(h ^ np.uint64((_SLOT_SALT * (slot + 1)) & _MASK))


def normals_numpy(base, n, n_slots):
    idx = np.arange(n, dtype=np.uint64)
    out = np.empty((n, n_slots))
    for j in range(n_slots):
        k1 = hash_u64_numpy(base, idx, 2 * j)
        k2 = hash_u64_numpy(base, idx, 2 * j + 1)
        u1 = ((k1 >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
        u2 = ((k2 >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
        out[:, j] = np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)
    return out


def binned_moments_numpy(x, u, x_min, spacing, n_cells):
    i = np.floor((x - x_min) / spacing).astype(np.int64)
    ok = (i >= 0) & (i < n_cells)
    i = i[ok]
    counts = np.bincount(i, minlength=n_cells).astype(np.int64)
    if u is None:
        z = np.zeros(n_cells)
        return counts, z, z.copy(), int(x.size - ok.sum())
    uu = u[ok]
    sum_u = np.bincount(i, weights=uu, minlength=n_cells)
    sum_uu = np.bincount(i, weights=uu * uu, minlength=n_cells)
    return counts, sum_u, sum_uu, int(x.size - ok.sum())


# ---------------------------------------------------------------------------
# numba path
# ---------------------------------------------------------------------------

if using_numba():
    import numba as nb

    @nb.njit(cache=True, inline="always")
    def _finalize_nb(z):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
        return z ^ (z >> np.uint64(31))

    @nb.njit(cache=True, parallel=True)
    def _normals_nb(base, n, n_slots, salts):
        out = np.empty((n, n_slots))
        for i in nb.prange(n):
            h0 = _finalize_nb(np.uint64(base) + np.uint64(_GOLDEN) * np.uint64(i))
            for j in range(n_slots):
                k1 = _finalize_nb(h0 ^ salts[2 * j])
                k2 = _finalize_nb(h0 ^ salts[2 * j + 1])
                u1 = (np.float64(k1 >> np.uint64(11)) + 0.5) * 2.0**-53
                u2 = (np.float64(k2 >> np.uint64(11)) + 0.5) * 2.0**-53
                out[i, j] = math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
        return out

    def normals_numba(base, n, n_slots):
        salts = np.array(
            [(_SLOT_SALT * (s + 1)) & _MASK for s in range(2 * n_slots)], dtype=np.uint64
        )
        return _normals_nb(np.uint64(base), n, n_slots, salts)

    @nb.njit(cache=True)
    def _binned_nb(x, u, x_min, inv_spacing, n_cells):
        counts = np.zeros(n_cells, dtype=np.int64)
        sum_u = np.zeros(n_cells)
        sum_uu = np.zeros(n_cells)
        missed = 0
        for s in range(x.size):
            i = np.int64(math.floor((x[s] - x_min) * inv_spacing))
            if 0 <= i < n_cells:
                counts[i] += 1
                sum_u[i] += u[s]
                sum_uu[i] += u[s] * u[s]
            else:
                missed += 1
        return counts, sum_u, sum_uu, missed

    def binned_moments_numba(x, u, x_min, spacing, n_cells):
        if u is None:
            u = np.zeros_like(x)
        counts, su, suu, missed = _binned_nb(
            np.ascontiguousarray(x), np.ascontiguousarray(u), x_min, 1.0 / spacing, n_cells
        )
        return counts, su, suu, int(missed)


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

def normals(master_seed, stream, step, n, n_slots):
    """(n, n_slots) array of standard normals from the counter-based stream."""
    base = stream_base(master_seed, stream, step)
    if using_numba():
        return normals_numba(base, n, n_slots)
    return normals_numpy(base, n, n_slots)


def binned_moments(x, u, x_min, spacing, n_cells):
    """Per-cell (count, sum u, sum u^2, n out-of-range) for samples x."""
    if using_numba():
        return binned_moments_numba(x, u, x_min, spacing, n_cells)
    return binned_moments_numpy(x, u, x_min, spacing, n_cells)

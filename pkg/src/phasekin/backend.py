"""Kernel backend selection.

Hot loops (counter-based noise generation, binned moment accumulation) have
two implementations: a numba ``@njit`` path and a vectorized pure-numpy
fallback.  The active path is chosen once per process from the environment:

    PHASEKIN_BACKEND=numba   use numba kernels (default when numba imports)
    PHASEKIN_BACKEND=numpy   force the pure-numpy fallback

``PHASEKIN_THREADS`` caps the numba thread pool.
"""

import os

_selected = None


def backend_name():
    """Return the active backend, resolving it on first call."""
    global _selected
    if _selected is None:
        choice = os.environ.get("PHASEKIN_BACKEND", "numba").strip().lower()
        if choice not in ("numba", "numpy"):
            raise ValueError(f"PHASEKIN_BACKEND must be 'numba' or 'numpy', got {choice!r}")
        if choice == "numba":
            try:
                import numba

                threads = os.environ.get("PHASEKIN_THREADS")
                if threads:
                    numba.set_num_threads(max(1, int(threads)))
            except ImportError:
                choice = "numpy"
        _selected = choice
    return _selected


def using_numba():
    return backend_name() == "numba"

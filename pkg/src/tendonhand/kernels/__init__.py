"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The backend is chosen once at import time.  Set ``TENDONHAND_NO_NUMBA=1``
to force the numpy implementation (or when numba is not installed).
Both implementations are importable directly for cross-checking.
"""

import os

import numpy as np

from . import _numpy as numpy_impl

try:
    from . import _numba as numba_impl
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba_impl = None

_DISABLED = os.environ.get("TENDONHAND_NO_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

if numba_impl is not None and not _DISABLED:
    BACKEND = "numba"
    _impl = numba_impl
else:
    BACKEND = "numpy"
    _impl = numpy_impl


def load_torques_batch(f_in, theta, lengths, along, lateral, rest):
    """Joint load torques for a batch of finger states.

    Parameters
    ----------
    f_in : (N,) tendon tensions [N]
    theta : (N, m) absolute joint angles [rad]
    lengths, along, lateral, rest : (m,) geometry arrays.  ``along[i]`` and
        ``lateral[i]`` locate the band contact on link i in its own frame;
        the last entry is the band anchor on the distal link.

    Returns
    -------
    (N, m) array of signed z-torques [N m], flexion positive.
    """
    return _impl.load_torques_batch(
        np.ascontiguousarray(f_in, dtype=np.float64),
        np.ascontiguousarray(theta, dtype=np.float64),
        np.ascontiguousarray(lengths, dtype=np.float64),
        np.ascontiguousarray(along, dtype=np.float64),
        np.ascontiguousarray(lateral, dtype=np.float64),
        np.ascontiguousarray(rest, dtype=np.float64),
    )

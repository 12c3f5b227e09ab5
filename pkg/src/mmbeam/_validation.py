"""Input checks for the estimator interface.

``sklearn.utils.check_array`` rejects complex input, so channel matrices and
beam vectors are validated here.
"""

import numpy as np


def check_channel(X, shape=None, name="X"):
    """Return ``X`` as a finite complex 2-D array, optionally of ``shape``."""
    if hasattr(X, "matrix"):
        X = X.matrix
    X = np.asarray(X)
    if X.dtype == object or not np.issubdtype(X.dtype, np.number):
        raise TypeError(f"{name} must be numeric, got dtype {X.dtype}")
    if X.ndim != 2:
        raise ValueError(f"{name} must be a 2-D channel matrix, got {X.ndim} dimensions")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains NaN or infinity")
    if shape is not None and X.shape != tuple(shape):
        raise ValueError(f"{name} has shape {X.shape}, expected {tuple(shape)}")
    return X.astype(complex, copy=False)


def check_seed(random_state):
    """Integer seed from ``None``, an int, or a numpy Generator."""
    if random_state is None:
        return int(np.random.SeedSequence().generate_state(1, np.uint64)[0])
    if isinstance(random_state, np.random.Generator):
        return int(random_state.integers(0, 2 ** 63))
    if isinstance(random_state, (int, np.integer)) and random_state >= 0:
        return int(random_state)
    raise ValueError(f"random_state must be None, a non-negative int or a Generator, got {random_state!r}")

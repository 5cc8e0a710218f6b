"""Small dense linear-algebra helpers shared by the solver and evaluator."""

import numpy as np

PINV_RTOL = 1e-12


def pinv(a: np.ndarray, rtol: float = PINV_RTOL) -> np.ndarray:
    """Moore-Penrose inverse via SVD; singular values below ``rtol * s_max`` count as zero."""
    a = np.asarray(a, dtype=float)
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros(a.shape[::-1])
    keep = s > rtol * s[0]
    inv = np.zeros_like(s)
    inv[keep] = 1.0 / s[keep]
    return (vt.T * inv) @ u.T


def vec(a: np.ndarray) -> np.ndarray:
    """Column-stacking vectorisation."""
    return np.asarray(a).reshape(-1, order="F")


def least_squares_fit(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Minimum-norm ``M`` minimising ``||a M - b||_F``."""
    return pinv(a) @ b

"""Truncated orthonormal DCT-II basis for smooth filters."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from lutherfilter.spectral import CANONICAL_GRID, SpectralSample, WavelengthGrid

PRESET_SIZES = (6, 8, 10)


@dataclass(frozen=True, eq=False)
class BasisMatrix:
    """First ``m`` orthonormal cosine vectors on ``n`` samples, one per column."""

    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=float)
        if matrix.ndim != 2 or not 1 <= matrix.shape[1] <= matrix.shape[0]:
            raise ValueError(f"basis must be n x m with 1 <= m <= n, got {matrix.shape}")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def m(self) -> int:
        return self.matrix.shape[1]

    def project(self, values) -> np.ndarray:
        """Coefficients of the least-squares fit of ``values`` in this basis."""
        return self.matrix.T @ np.asarray(values, dtype=float)

    def constant_coeffs(self, level: float) -> np.ndarray:
        """Coefficients whose synthesis is the flat spectrum ``level``."""
        c = np.zeros(self.m)
        c[0] = level * np.sqrt(self.n)
        return c


def make_dct_basis(n: int, m: int) -> BasisMatrix:
    if not (isinstance(n, (int, np.integer)) and isinstance(m, (int, np.integer))):
        raise TypeError("n and m must be integers")
    if n < 1 or not 1 <= m <= n:
        raise ValueError(f"need 1 <= m <= n, got n={n}, m={m}")
    i = np.arange(n)[:, None]
    k = np.arange(m)[None, :]
    cols = np.cos(np.pi * (2 * i + 1) * k / (2 * n))
    cols *= np.where(k == 0, np.sqrt(1.0 / n), np.sqrt(2.0 / n))
    # exact DC column so the flat filter is representable without rounding drift
    cols[:, 0] = 1.0 / np.sqrt(n)
    return BasisMatrix(cols)


def synthesize(
    basis: BasisMatrix, coeffs, grid: WavelengthGrid | None = None
) -> SpectralSample:
    """The filter spectrum ``B c``."""
    c = np.asarray(coeffs, dtype=float)
    if c.shape != (basis.m,):
        raise ValueError(f"expected {basis.m} coefficients, got shape {c.shape}")
    if grid is None:
        grid = CANONICAL_GRID if basis.n == CANONICAL_GRID.n_samples else None
    if grid is None:
        grid = WavelengthGrid(0.0, float(basis.n - 1), 1.0)
    return SpectralSample(grid, basis.matrix @ c)

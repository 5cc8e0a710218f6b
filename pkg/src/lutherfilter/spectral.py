"""Sampled spectra on a uniform wavelength grid."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class GridMismatchError(ValueError):
    """Two spectral quantities live on different wavelength grids."""


class OutOfRangeError(ValueError):
    """Resampling would require extrapolation."""


@dataclass(frozen=True)
class WavelengthGrid:
    start_nm: float = 400.0
    end_nm: float = 700.0
    step_nm: float = 10.0

    def __post_init__(self):
        for name in ("start_nm", "end_nm", "step_nm"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.step_nm <= 0:
            raise ValueError("step_nm must be positive")
        if self.start_nm >= self.end_nm:
            raise ValueError("start_nm must be below end_nm")
        span = (self.end_nm - self.start_nm) / self.step_nm
        if abs(span - round(span)) > 1e-9:
            raise ValueError("grid range is not a whole number of steps")

    @property
    def n_samples(self) -> int:
        return int(round((self.end_nm - self.start_nm) / self.step_nm)) + 1

    @property
    def wavelengths(self) -> np.ndarray:
        return self.start_nm + self.step_nm * np.arange(self.n_samples)

    def __len__(self) -> int:
        return self.n_samples


CANONICAL_GRID = WavelengthGrid(400.0, 700.0, 10.0)


def _frozen_array(values, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("spectral values must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class SpectralSample:
    """One function of wavelength (illuminant, reflectance, filter...).

    ``values`` are stored raw, without any ``step_nm`` weighting.
    """

    grid: WavelengthGrid
    values: np.ndarray

    def __post_init__(self):
        values = _frozen_array(self.values, 1)
        if values.shape[0] != self.grid.n_samples:
            raise GridMismatchError(
                f"{values.shape[0]} values for a grid of {self.grid.n_samples} samples"
            )
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, level: float, grid: WavelengthGrid = CANONICAL_GRID) -> SpectralSample:
        return cls(grid, np.full(grid.n_samples, float(level)))

    @property
    def wavelengths(self) -> np.ndarray:
        return self.grid.wavelengths

    def __len__(self) -> int:
        return self.grid.n_samples


@dataclass(frozen=True, eq=False)
class SensorSet:
    """An ``n x 3`` set of channel sensitivities (camera ``Q`` or CMFs ``X``).

    The wavelength step is expected to be folded into ``matrix`` already;
    see :meth:`from_raw`.
    """

    grid: WavelengthGrid
    matrix: np.ndarray

    def __post_init__(self):
        matrix = _frozen_array(self.matrix, 2)
        if matrix.shape != (self.grid.n_samples, 3):
            raise GridMismatchError(
                f"sensor matrix must be {self.grid.n_samples}x3, got {matrix.shape}"
            )
        if np.any(np.linalg.norm(matrix, axis=0) <= 0):
            raise ValueError("every sensor channel needs a non-zero response")
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def from_raw(cls, grid: WavelengthGrid, raw: np.ndarray) -> SensorSet:
        """Build from per-wavelength sensitivities, folding in ``step_nm``."""
        return cls(grid, np.asarray(raw, dtype=float) * grid.step_nm)

    @property
    def n_samples(self) -> int:
        return self.grid.n_samples

    def filtered(self, filt: SpectralSample) -> SensorSet:
        """Effective sensitivities ``diag(f) Q``."""
        _check_grids(self.grid, filt.grid)
        return SensorSet(self.grid, filt.values[:, None] * self.matrix)


def _check_grids(a: WavelengthGrid, b: WavelengthGrid) -> None:
    if a != b:
        raise GridMismatchError(f"grid mismatch: {a} vs {b}")


def colour_signal(illuminant: SpectralSample, reflectance: SpectralSample) -> SpectralSample:
    _check_grids(illuminant.grid, reflectance.grid)
    return SpectralSample(illuminant.grid, illuminant.values * reflectance.values)


def interpolate(wavelengths, values, target: WavelengthGrid) -> np.ndarray:
    """Piecewise-linear interpolation of tabulated data onto ``target``.

    ``values`` may be 1-d or have one column per series.  Raises
    :class:`OutOfRangeError` rather than extrapolating.
    """
    wl = np.asarray(wavelengths, dtype=float)
    vals = np.asarray(values, dtype=float)
    if wl.ndim != 1 or vals.shape[0] != wl.shape[0]:
        raise ValueError("wavelengths and values disagree in length")
    if np.any(np.diff(wl) <= 0):
        raise ValueError("wavelengths must be strictly increasing")
    tol = 1e-9 * max(1.0, abs(target.end_nm))
    if wl[0] > target.start_nm + tol or wl[-1] < target.end_nm - tol:
        raise OutOfRangeError(
            f"data cover {wl[0]:g}-{wl[-1]:g} nm, "
            f"need {target.start_nm:g}-{target.end_nm:g} nm"
        )
    x = np.clip(target.wavelengths, wl[0], wl[-1])
    if vals.ndim == 1:
        return np.interp(x, wl, vals)
    return np.column_stack([np.interp(x, wl, col) for col in vals.T])


def resample(sample: SpectralSample, target: WavelengthGrid) -> SpectralSample:
    if sample.grid == target:
        return sample
    return SpectralSample(target, interpolate(sample.wavelengths, sample.values, target))

"""Tristimulus values, CIELAB and the CIE 1976 colour difference.

The scalar types mirror the usual colour-science vocabulary; the ``*_array``
helpers do the same work on ``(N, 3)`` arrays for the bulk experiment.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from lutherfilter.spectral import SensorSet, SpectralSample, _check_grids

# CIE junction of the cube-root and linear segments: (6/29)**3 ~= 0.008856
LAB_DELTA = 6.0 / 29.0
LAB_EPSILON = LAB_DELTA**3


class Tristimulus(NamedTuple):
    x: float
    y: float
    z: float


class LabColor(NamedTuple):
    L: float
    a: float
    b: float


class WhitePoint(NamedTuple):
    xn: float
    yn: float
    zn: float

    def validate(self) -> WhitePoint:
        if not all(np.isfinite(v) and v > 0 for v in self):
            raise ValueError(f"white point components must be positive, got {tuple(self)}")
        return self


def tristimulus(signal: SpectralSample, sensors: SensorSet) -> Tristimulus:
    """Response ``C^T Q`` of a sensor set to one colour signal."""
    _check_grids(signal.grid, sensors.grid)
    return Tristimulus(*(signal.values @ sensors.matrix))


def lab_transfer(t: np.ndarray) -> np.ndarray:
    """CIELAB companding function.

    Below the junction the linear segment is continued through zero and into
    negative ratios, so over-corrected camera estimates still map somewhere.
    """
    t = np.asarray(t, dtype=float)
    linear = t / (3.0 * LAB_DELTA**2) + 4.0 / 29.0
    return np.where(t > LAB_EPSILON, np.cbrt(np.maximum(t, LAB_EPSILON)), linear)


def xyz_to_lab_array(xyz: np.ndarray, white) -> np.ndarray:
    xyz = np.asarray(xyz, dtype=float)
    white = np.asarray(white, dtype=float)
    if np.any(white <= 0):
        raise ValueError("white point components must be positive")
    fx, fy, fz = np.moveaxis(lab_transfer(xyz / white), -1, 0)
    return np.stack([116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)], axis=-1)


def xyz_to_lab(xyz: Tristimulus, white: WhitePoint) -> LabColor:
    white = WhitePoint(*white).validate()
    return LabColor(*(float(v) for v in xyz_to_lab_array(np.asarray(xyz), white)))


def delta_e_array(lab1: np.ndarray, lab2: np.ndarray) -> np.ndarray:
    return np.linalg.norm(np.asarray(lab1, float) - np.asarray(lab2, float), axis=-1)


def delta_e(lab1: LabColor, lab2: LabColor) -> float:
    """CIE 1976 colour difference (Euclidean distance in L*a*b*)."""
    return float(delta_e_array(lab1, lab2))

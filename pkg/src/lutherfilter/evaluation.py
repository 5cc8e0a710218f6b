"""Sensitivity-match NRMSE and the colour-measurement experiment."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field

import numpy as np

from lutherfilter.colorimetry import delta_e_array, xyz_to_lab_array
from lutherfilter.linalg import least_squares_fit, pinv
from lutherfilter.spectral import SensorSet, SpectralSample, _check_grids

log = logging.getLogger(__name__)


def percentile(values, p: float) -> float:
    """Linear-interpolation percentile with inclusive endpoints."""
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        raise ValueError("percentile of an empty sequence")
    if not 0.0 <= p <= 100.0:
        raise ValueError(f"p must lie in [0, 100], got {p}")
    return float(np.percentile(arr, p, method="linear"))


def nrmse(sensors: SensorSet, cmfs: SensorSet) -> float:
    """``||Q M - X||_F / ||X||_F`` with the least-squares ``M = Q^+ X``."""
    _check_grids(sensors.grid, cmfs.grid)
    q, x = sensors.matrix, cmfs.matrix
    resid = q @ (pinv(q) @ x) - x
    return float(np.linalg.norm(resid) / np.linalg.norm(x))


@dataclass(frozen=True)
class IlluminantStats:
    name: str
    mean: float
    median: float
    p95: float
    max: float


@dataclass(frozen=True)
class EvalReport:
    nrmse: float
    delta_e_mean: float
    delta_e_median: float
    delta_e_p95: float
    delta_e_max: float
    n_illuminants: int
    n_reflectances: int
    per_illuminant: list = field(default_factory=list)
    # largest single error over every light, next to the averaged per-light max
    delta_e_max_overall: float = 0.0
    p95_mode: str = "per_illuminant"
    skipped: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    def row(self) -> tuple:
        return (
            self.nrmse,
            self.delta_e_mean,
            self.delta_e_median,
            self.delta_e_p95,
            self.delta_e_max,
        )


def _white_preserving_fit(rgb, xyz, white_rgb, white_xyz) -> np.ndarray:
    """Least-squares 3x3 fit constrained to map ``white_rgb`` onto ``white_xyz``."""
    gram = rgb.T @ rgb
    kkt = np.zeros((4, 4))
    kkt[:3, :3] = 2.0 * gram
    kkt[:3, 3] = white_rgb
    kkt[3, :3] = white_rgb
    rhs = np.vstack([2.0 * rgb.T @ xyz, white_xyz[None, :]])
    return np.linalg.lstsq(kkt, rhs, rcond=None)[0][:3]


def _illuminant_delta_e(
    effective: np.ndarray,
    cmf: np.ndarray,
    illuminant: np.ndarray,
    reflectances: np.ndarray,
    preserve_white: bool,
) -> np.ndarray | None:
    signals = illuminant[:, None] * reflectances  # n x R
    rgb = signals.T @ effective
    xyz = signals.T @ cmf
    if np.linalg.matrix_rank(rgb) < 3:
        return None
    white_xyz = illuminant @ cmf
    if preserve_white:
        correction = _white_preserving_fit(rgb, xyz, illuminant @ effective, white_xyz)
    else:
        correction = least_squares_fit(rgb, xyz)
    est = rgb @ correction
    return delta_e_array(xyz_to_lab_array(est, white_xyz), xyz_to_lab_array(xyz, white_xyz))


def colour_experiment(
    sensors: SensorSet,
    filt: SpectralSample | None,
    cmfs: SensorSet,
    illuminants,
    reflectances,
    *,
    illuminant_names=None,
    pooled_p95: bool = False,
    preserve_white: bool = False,
) -> EvalReport:
    """Per-light 3x3 correction of camera responses, scored in CIELAB.

    For each illuminant every reflectance is imaged through ``filt`` (if
    given), one least-squares matrix maps the camera responses to XYZ, and
    the CIE 1976 error is computed against the true XYZ using that light's
    own white.  Mean, median, 95th percentile and max are taken per light
    and then averaged over lights.  ``pooled_p95`` replaces the averaged
    95th percentile by the percentile of all errors pooled together.
    """
    _check_grids(sensors.grid, cmfs.grid)
    effective = sensors.filtered(filt) if filt is not None else sensors
    lights = _as_columns(illuminants, sensors)
    surfaces = _as_columns(reflectances, sensors)
    if surfaces.shape[1] < 4:
        raise ValueError("need at least 4 reflectances to fit a 3x3 correction")
    if illuminant_names is None:
        illuminant_names = [f"illuminant_{i}" for i in range(lights.shape[1])]

    per_light, pooled, skipped = [], [], []
    for name, light in zip(illuminant_names, lights.T):
        de = _illuminant_delta_e(
            effective.matrix, cmfs.matrix, light, surfaces, preserve_white
        )
        if de is None:
            log.warning("camera responses under %s are rank deficient; skipped", name)
            skipped.append(name)
            continue
        pooled.append(de)
        per_light.append(
            IlluminantStats(
                name=name,
                mean=float(np.mean(de)),
                median=percentile(de, 50.0),
                p95=percentile(de, 95.0),
                max=float(np.max(de)),
            )
        )
    if not per_light:
        raise ValueError("no illuminant produced a usable correction")

    p95 = (
        percentile(np.concatenate(pooled), 95.0)
        if pooled_p95
        else float(np.mean([s.p95 for s in per_light]))
    )
    return EvalReport(
        nrmse=nrmse(effective, cmfs),
        delta_e_mean=float(np.mean([s.mean for s in per_light])),
        delta_e_median=float(np.mean([s.median for s in per_light])),
        delta_e_p95=p95,
        delta_e_max=float(np.mean([s.max for s in per_light])),
        n_illuminants=len(per_light),
        n_reflectances=surfaces.shape[1],
        per_illuminant=per_light,
        delta_e_max_overall=float(max(s.max for s in per_light)),
        p95_mode="pooled" if pooled_p95 else "per_illuminant",
        skipped=skipped,
    )


def _as_columns(spectra, sensors: SensorSet) -> np.ndarray:
    """Stack spectra (samples or an ``n x k`` array) into ``n x k`` columns."""
    if isinstance(spectra, np.ndarray):
        arr = np.asarray(spectra, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
    else:
        cols = []
        for s in spectra:
            _check_grids(s.grid, sensors.grid)
            cols.append(s.values)
        arr = np.column_stack(cols) if cols else np.zeros((sensors.n_samples, 0))
    if arr.shape[0] != sensors.n_samples:
        raise ValueError(f"spectra have {arr.shape[0]} samples, expected {sensors.n_samples}")
    return arr

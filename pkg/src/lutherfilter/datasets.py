"""Bundled reference data and the small synthetic set used for CI.

The synthetic set is deliberately modest: 8 lights by 24 surfaces and a
Gaussian-channel camera that sits about as far from colorimetric as a typical
DSLR.  :func:`write_synthetic_dataset` regenerates the shipped CSVs exactly.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from lutherfilter.data_io import Kind, load_spectral_csv, write_spectral_csv
from lutherfilter.spectral import CANONICAL_GRID, WavelengthGrid

SYNTHETIC_SEED = 20200101
N_SYNTHETIC_SURFACES = 24

FILES = {
    "cmf": "cie1931_2deg.csv",
    "d65": "d65.csv",
    "camera": "synthetic_camera.csv",
    "illuminants": "synthetic_illuminants.csv",
    "reflectances": "synthetic_reflectances.csv",
}


def data_path(name: str) -> Path:
    return Path(str(resources.files("lutherfilter") / "data" / FILES[name]))


def load_cmfs(normalize: bool = False):
    return load_spectral_csv(data_path("cmf"), Kind.CMF).sensor_set(normalize)


def load_synthetic():
    """``(camera, cmfs, illuminants_table, reflectances_table)`` for CI."""
    camera = load_spectral_csv(data_path("camera"), Kind.SENSITIVITY).sensor_set()
    lights = load_spectral_csv(data_path("illuminants"), Kind.ILLUMINANT)
    surfaces = load_spectral_csv(data_path("reflectances"), Kind.REFLECTANCE)
    return camera, load_cmfs(), lights, surfaces


def planck(wavelengths_nm, temperature_k: float) -> np.ndarray:
    """Blackbody spectral radiance normalised to 1 at 560 nm."""
    c2 = 1.4388e7  # nm K
    wl = np.asarray(wavelengths_nm, dtype=float)

    def radiance(w):
        return w**-5 / np.expm1(c2 / (w * temperature_k))

    return radiance(wl) / radiance(560.0)


def _gauss(wl, centre, width):
    return np.exp(-0.5 * ((wl - centre) / width) ** 2)


def synthetic_camera(grid: WavelengthGrid = CANONICAL_GRID) -> np.ndarray:
    wl = grid.wavelengths
    red = _gauss(wl, 600.0, 28.0) + 0.12 * _gauss(wl, 470.0, 25.0)
    green = _gauss(wl, 535.0, 38.0)
    blue = _gauss(wl, 460.0, 26.0) + 0.05 * _gauss(wl, 540.0, 30.0)
    return np.column_stack([red, 0.95 * green, 0.8 * blue])


def synthetic_illuminants(grid: WavelengthGrid = CANONICAL_GRID) -> dict:
    wl = grid.wavelengths
    d65 = load_spectral_csv(data_path("d65"), Kind.ILLUMINANT, grid).columns["D65"]
    lights = {"D65": d65 / 100.0}
    for t in (2856, 4000, 5000, 6500, 10000):
        lights[f"planck_{t}K"] = planck(wl, t)
    lights["led_cool"] = 1.4 * _gauss(wl, 450.0, 10.0) + _gauss(wl, 565.0, 55.0)
    lights["led_warm"] = 0.6 * _gauss(wl, 450.0, 10.0) + _gauss(wl, 600.0, 60.0)
    return lights


def synthetic_reflectances(
    grid: WavelengthGrid = CANONICAL_GRID, n: int = N_SYNTHETIC_SURFACES
) -> dict:
    rng = np.random.default_rng(SYNTHETIC_SEED)
    wl = grid.wavelengths
    surfaces = {}
    for k in range(n):
        base = rng.uniform(0.03, 0.3)
        spectrum = np.full(wl.shape, base)
        for _ in range(rng.integers(1, 4)):
            spectrum += rng.uniform(0.1, 0.6) * _gauss(
                wl, rng.uniform(380.0, 720.0), rng.uniform(20.0, 80.0)
            )
        if rng.random() < 0.5:
            edge = rng.uniform(450.0, 650.0)
            spectrum += rng.uniform(0.1, 0.5) / (1.0 + np.exp(-(wl - edge) / 12.0))
        surfaces[f"surface_{k:02d}"] = np.clip(spectrum, 0.0, 0.95).round(6)
    return surfaces


def write_synthetic_dataset(directory) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    grid = CANONICAL_GRID
    cam = synthetic_camera(grid).round(8)
    write_spectral_csv(
        directory / FILES["camera"],
        grid,
        {"red": cam[:, 0], "green": cam[:, 1], "blue": cam[:, 2]},
        comment="synthetic Gaussian-channel camera sensitivities",
    )
    lights = {k: v.round(8) for k, v in synthetic_illuminants(grid).items()}
    write_spectral_csv(
        directory / FILES["illuminants"], grid, lights,
        comment="synthetic illuminant set: D65, blackbodies, two LED-like sources",
    )
    write_spectral_csv(
        directory / FILES["reflectances"], grid, synthetic_reflectances(grid),
        comment=f"synthetic smooth reflectances, numpy default_rng({SYNTHETIC_SEED})",
    )

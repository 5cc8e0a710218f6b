"""Delimited-text spectral tables and solution persistence.

File format: UTF-8, comma separated, header ``wavelength_nm,<name>[,...]``,
one row per wavelength; lines starting with ``#`` are ignored.
"""

from __future__ import annotations

import csv
import enum
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from lutherfilter.spectral import (
    CANONICAL_GRID,
    OutOfRangeError,
    SensorSet,
    SpectralSample,
    WavelengthGrid,
    interpolate,
)


class DataFormatError(ValueError):
    """A spectral file could not be parsed or validated."""


class Kind(str, enum.Enum):
    SENSITIVITY = "sensitivity"
    CMF = "cmf"
    ILLUMINANT = "illuminant"
    REFLECTANCE = "reflectance"
    FILTER = "filter"


_THREE_CHANNEL = {Kind.SENSITIVITY, Kind.CMF}


@dataclass(frozen=True, eq=False)
class SpectralTable:
    kind: Kind
    grid: WavelengthGrid
    columns: dict
    source_path: str = ""

    @property
    def names(self) -> list:
        return list(self.columns)

    def as_array(self) -> np.ndarray:
        return np.column_stack([self.columns[k] for k in self.columns])

    def samples(self) -> list:
        return [SpectralSample(self.grid, v) for v in self.columns.values()]

    def sensor_set(self, normalize: bool = False) -> SensorSet:
        """Sensor matrix with the wavelength step folded in.

        ``normalize`` scales so the largest entry of the raw table is 1.
        """
        if len(self.columns) != 3:
            raise DataFormatError(f"{self.source_path}: a sensor set needs 3 columns")
        raw = self.as_array()
        if normalize:
            raw = raw / np.max(np.abs(raw))
        return SensorSet.from_raw(self.grid, raw)


def _parse_rows(path: Path):
    header, rows = None, []
    with path.open(newline="", encoding="utf-8") as fh:
        for lineno, record in enumerate(csv.reader(fh), start=1):
            if not record or not "".join(record).strip():
                continue
            if record[0].lstrip().startswith("#"):
                continue
            if header is None:
                header = [h.strip() for h in record]
                continue
            if len(record) != len(header):
                raise DataFormatError(
                    f"{path}: line {lineno} has {len(record)} fields, header has {len(header)}"
                )
            try:
                rows.append([float(x) for x in record])
            except ValueError as exc:
                raise DataFormatError(f"{path}: line {lineno}: {exc}") from None
    if header is None or not rows:
        raise DataFormatError(f"{path}: no header or no data rows")
    if len(header) < 2:
        raise DataFormatError(f"{path}: need a wavelength column and at least one value column")
    data = np.array(rows, dtype=float)
    if not np.all(np.isfinite(data)):
        raise DataFormatError(f"{path}: non-finite values")
    return header, data


def load_spectral_csv(
    path, kind: Kind | str, grid: WavelengthGrid = CANONICAL_GRID
) -> SpectralTable:
    """Parse a spectral CSV and resample every column onto ``grid``."""
    kind = Kind(kind)
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"{path}: no such file")
    header, data = _parse_rows(path)
    n_values = len(header) - 1
    if kind in _THREE_CHANNEL and n_values != 3:
        raise DataFormatError(
            f"{path}: {kind.value} data need exactly 3 value columns, found {n_values}"
        )
    if kind is Kind.FILTER and n_values != 1:
        raise DataFormatError(f"{path}: filter data need exactly 1 value column")
    wavelengths = data[:, 0]
    if np.any(np.diff(wavelengths) <= 0):
        raise DataFormatError(f"{path}: wavelengths are not strictly increasing")
    try:
        values = interpolate(wavelengths, data[:, 1:], grid)
    except OutOfRangeError as exc:
        raise DataFormatError(f"{path}: {exc}") from None
    columns = {}
    for name, col in zip(header[1:], values.T):
        col = np.ascontiguousarray(col)
        col.setflags(write=False)
        columns[name] = col
    return SpectralTable(kind, grid, columns, str(path))


def write_spectral_csv(path, grid: WavelengthGrid, columns: dict, comment: str = "") -> None:
    """Write columns on ``grid`` with exact (shortest round-trip) float text."""
    path = Path(path)
    lines = [f"# {line}" for line in comment.splitlines()]
    lines.append(",".join(["wavelength_nm", *columns]))
    arrays = [np.asarray(v, dtype=float) for v in columns.values()]
    for i, wl in enumerate(grid.wavelengths):
        lines.append(",".join([repr(float(wl))] + [repr(float(a[i])) for a in arrays]))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def sidecar_path(filter_path) -> Path:
    return Path(filter_path).with_suffix(".json")


def save_solution(solution, report, path) -> Path:
    """Write the filter CSV at ``path`` and a JSON sidecar next to it.

    Returns the sidecar path.  Matrices are stored row-major; JSON floats use
    the shortest repr that round-trips exactly.
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        write_spectral_csv(
            path, solution.filter.grid, {"transmittance": solution.filter.values}
        )
        sidecar = {
            "correction_matrix": [[float(v) for v in row] for row in solution.correction],
            "coefficients": [float(v) for v in solution.coeffs],
            "converged": bool(solution.converged),
            "iterations": int(solution.iterations),
            "objective_trace": [float(v) for v in solution.objective_trace],
            "config": solution.config.to_dict() if solution.config is not None else None,
            "report": _report_dict(report),
        }
        out = sidecar_path(path)
        out.write_text(json.dumps(sidecar, indent=2, allow_nan=False) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"{path}: could not write solution ({exc})") from exc
    return out


def _report_dict(report) -> dict | None:
    if report is None:
        return None
    return report if isinstance(report, dict) else report.to_dict()


def load_filter(path, grid: WavelengthGrid = CANONICAL_GRID) -> SpectralSample:
    table = load_spectral_csv(path, Kind.FILTER, grid)
    return table.samples()[0]


def load_sidecar(path) -> dict:
    path = Path(path)
    if path.suffix != ".json":
        path = sidecar_path(path)
    data = json.loads(path.read_text(encoding="utf-8"))
    data["correction_matrix"] = np.array(data["correction_matrix"], dtype=float)
    return data

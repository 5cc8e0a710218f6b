"""Alternating least squares for the bounded, smooth Luther filter.

The objective is ``||diag(B c) Q M - X||_F^2``.  With ``M`` fixed the problem
in ``c`` is a linearly constrained QP (``solve_c_step``); with ``c`` fixed the
best ``M`` is a pseudo-inverse fit (``solve_m_step``).  ``run_als`` alternates
the two from a feasible start until the effective sensitivities stop moving.
"""

from __future__ import annotations

import enum
import logging
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from lutherfilter.basis import BasisMatrix, make_dct_basis, synthesize
from lutherfilter.linalg import least_squares_fit, vec
from lutherfilter.qp import QpNonConvergenceError, QpProblem, solve_qp
from lutherfilter.spectral import SensorSet, SpectralSample, _check_grids

log = logging.getLogger(__name__)

LUTH_FLOOR = 1e-6


class Mode(str, enum.Enum):
    CONSTRAINED = "constrained"
    LUTH_UNCONSTRAINED = "luth_unconstrained"


@dataclass(frozen=True)
class SolverConfig:
    basis_m: int = 8
    f_min: float = 0.2
    f_max: float = 1.0
    epsilon: float = 1e-8
    max_iters: int = 500
    mode: Mode = Mode.CONSTRAINED
    # compare ||Q^i - Q^(i-1)||^2 against epsilon * ||X||^2 rather than epsilon
    normalize_epsilon: bool = True

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if not isinstance(self.basis_m, (int, np.integer)) or self.basis_m < 1:
            raise ValueError(f"basis_m must be a positive integer, got {self.basis_m!r}")
        if not 0.0 <= self.f_min < 1.0 and self.mode is Mode.CONSTRAINED:
            raise ValueError(f"f_min must lie in [0, 1), got {self.f_min}")
        if not (self.f_max == np.inf or 0.0 < self.f_max <= 1.0):
            raise ValueError(f"f_max must lie in (0, 1] or be infinite, got {self.f_max}")
        if not self.f_min < self.f_max:
            raise ValueError("f_min must be below f_max")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")

    @classmethod
    def luth(cls, n: int, **overrides) -> SolverConfig:
        params = dict(
            basis_m=n, f_min=LUTH_FLOOR, f_max=np.inf, mode=Mode.LUTH_UNCONSTRAINED
        )
        params.update(overrides)
        return cls(**params)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mode"] = self.mode.value
        d["f_max"] = None if self.f_max == np.inf else self.f_max
        return d

    @classmethod
    def from_dict(cls, d: dict) -> SolverConfig:
        d = dict(d)
        if d.get("f_max") is None:
            d["f_max"] = np.inf
        return cls(**d)


@dataclass(frozen=True, eq=False)
class FilterSolution:
    filter: SpectralSample
    coeffs: np.ndarray
    correction: np.ndarray
    objective_trace: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    config: SolverConfig | None = None

    @property
    def objective(self) -> float:
        return self.objective_trace[-1]


def objective(sensors: SensorSet, filt, correction, cmfs: SensorSet) -> float:
    f = filt.values if isinstance(filt, SpectralSample) else np.asarray(filt, float)
    resid = f[:, None] * sensors.matrix @ correction - cmfs.matrix
    return float(np.sum(resid**2))


def build_v_matrix(sensors: SensorSet, correction) -> np.ndarray:
    """``V`` with ``V @ f == vec(diag(f) Q M)``; shape ``(3n, n)``.

    Column ``i`` is ``vec(D_i Q M)``: row ``i`` of ``QM`` placed at positions
    ``i, i + n, i + 2n`` of the column-stacked vector.
    """
    correction = np.asarray(correction, dtype=float)
    if correction.shape != (3, 3):
        raise ValueError(f"correction must be 3x3, got {correction.shape}")
    qm = sensors.matrix @ correction
    n = sensors.n_samples
    v = np.zeros((3 * n, n))
    idx = np.arange(n)
    for j in range(3):
        v[j * n + idx, idx] = qm[:, j]
    return v


def solve_m_step(sensors: SensorSet, filt: SpectralSample, cmfs: SensorSet) -> np.ndarray:
    _check_grids(sensors.grid, cmfs.grid)
    _check_grids(sensors.grid, filt.grid)
    return least_squares_fit(filt.values[:, None] * sensors.matrix, cmfs.matrix)


def c_step_problem(
    sensors: SensorSet, correction, cmfs: SensorSet, basis: BasisMatrix, bounds
) -> QpProblem:
    _check_grids(sensors.grid, cmfs.grid)
    if basis.n != sensors.n_samples:
        raise ValueError(f"basis has {basis.n} rows, grid has {sensors.n_samples}")
    f_min, f_max = bounds
    vb = build_v_matrix(sensors, correction) @ basis.matrix
    w = vec(cmfs.matrix)
    n = basis.n
    return QpProblem(
        hessian=vb.T @ vb,
        linear=-2.0 * vb.T @ w,
        constraint_matrix=basis.matrix,
        lower=np.full(n, f_min, dtype=float),
        upper=np.full(n, f_max, dtype=float),
    )


def solve_c_step(
    sensors: SensorSet,
    correction,
    cmfs: SensorSet,
    basis: BasisMatrix,
    bounds: tuple[float, float],
    start=None,
) -> np.ndarray:
    """Bounded least-squares filter coefficients for a fixed correction matrix."""
    problem = c_step_problem(sensors, correction, cmfs, basis, bounds)
    if start is None:
        start = basis.constant_coeffs(mid_level(*bounds))
    return solve_qp(problem, start=start).c


def mid_level(f_min: float, f_max: float) -> float:
    top = min(f_max, 1.0)
    bottom = f_min if np.isfinite(f_min) else min(top, 0.0)
    return 0.5 * (bottom + top)


def _project_into(basis: BasisMatrix, filt: SpectralSample, bounds) -> np.ndarray:
    c = basis.project(filt.values)
    if np.max(np.abs(basis.matrix @ c - filt.values)) > 1e-9:
        raise ValueError(f"start filter is not representable with m={basis.m}")
    f = basis.matrix @ c
    lo, hi = bounds
    if np.any(f < lo - 1e-8) or np.any(f > hi + 1e-8):
        raise ValueError("start filter violates the transmittance bounds")
    return c


def run_als(
    sensors: SensorSet,
    cmfs: SensorSet,
    config: SolverConfig | None = None,
    start: FilterSolution | SpectralSample | None = None,
) -> FilterSolution:
    """Alternate c- and M-steps until ``||Q^i - Q^(i-1)||_F^2 < epsilon``.

    ``start`` (a previous solution or a filter) warm-starts the iteration; it
    must be representable in the basis and satisfy the bounds.  The default
    start is the flat filter halfway between the bounds.
    """
    config = config or SolverConfig()
    _check_grids(sensors.grid, cmfs.grid)
    n = sensors.n_samples
    if config.basis_m > n:
        raise ValueError(f"basis_m={config.basis_m} exceeds grid size {n}")
    basis = make_dct_basis(n, config.basis_m)
    bounds = (config.f_min, config.f_max)
    luth = config.mode is Mode.LUTH_UNCONSTRAINED
    t0 = time.perf_counter()

    if start is None:
        level = mid_level(*bounds)
        c = basis.constant_coeffs(level)
        filt = synthesize(basis, c, sensors.grid)
        # scaled baseline fit: diag(f0) Q M0 equals the unfiltered Q Q^+ X
        correction = least_squares_fit(sensors.matrix, cmfs.matrix) / level
    else:
        filt = start.filter if isinstance(start, FilterSolution) else start
        c = _project_into(basis, filt, bounds)
        filt = synthesize(basis, c, sensors.grid)
        correction = solve_m_step(sensors, filt, cmfs)

    x_norm2 = float(np.sum(cmfs.matrix**2))
    threshold = config.epsilon * (x_norm2 if config.normalize_epsilon else 1.0)
    effective = filt.values[:, None] * sensors.matrix @ correction
    trace = [objective(sensors, filt, correction, cmfs)]
    converged = False
    iteration = 0
    for iteration in range(1, config.max_iters + 1):
        problem = c_step_problem(sensors, correction, cmfs, basis, bounds)
        try:
            c = solve_qp(problem, start=c).c
        except QpNonConvergenceError as exc:
            log.warning("c-step QP hit its iteration cap at ALS iteration %d", iteration)
            if exc.best.objective <= problem.objective(c):
                c = exc.best.c
        filt = synthesize(basis, c, sensors.grid)
        trace.append(objective(sensors, filt, correction, cmfs))

        correction = solve_m_step(sensors, filt, cmfs)
        if luth:
            # the objective is invariant to (f, M) -> (f/k, k M); keep the peak at 1
            peak = float(np.max(filt.values))
            c = c / peak
            filt = synthesize(basis, c, sensors.grid)
            correction = correction * peak
        trace.append(objective(sensors, filt, correction, cmfs))

        new_effective = filt.values[:, None] * sensors.matrix @ correction
        change = float(np.sum((new_effective - effective) ** 2))
        effective = new_effective
        if change < threshold:
            converged = True
            break

    if luth:
        peak = float(np.max(filt.values))
        c = c / peak
        filt = synthesize(basis, c, sensors.grid)
        correction = correction * peak

    log.debug(
        "ALS m=%d bounds=%s: %d iterations, objective %.6g, %.3fs",
        config.basis_m, bounds, iteration, trace[-1], time.perf_counter() - t0,
    )
    return FilterSolution(
        filter=filt,
        coeffs=c,
        correction=correction,
        objective_trace=trace,
        iterations=iteration,
        converged=converged,
        config=config,
    )


def luth_unconstrained(
    sensors: SensorSet,
    cmfs: SensorSet,
    start: FilterSolution | SpectralSample | None = None,
    **overrides,
) -> FilterSolution:
    """Per-wavelength positive filter with no smoothness or upper bound, peak-normalised."""
    config = SolverConfig.luth(sensors.n_samples, **overrides)
    return run_als(sensors, cmfs, config, start=start)


def multi_start(
    sensors: SensorSet,
    cmfs: SensorSet,
    config: SolverConfig,
    n_starts: int = 1,
    seed: int = 0,
) -> FilterSolution:
    """Best of ``n_starts`` ALS runs.

    Start 0 is the deterministic mid-bounds flat filter.  Start ``k >= 1``
    draws from ``numpy.random.default_rng([seed, k])``: non-DC coefficients
    are normal, then shrunk until the filter fits inside the bounds.
    """
    if n_starts < 1:
        raise ValueError("n_starts must be at least 1")
    best = run_als(sensors, cmfs, config)
    n = sensors.n_samples
    basis = make_dct_basis(n, config.basis_m)
    level = mid_level(config.f_min, config.f_max)
    half_width = level - config.f_min
    for k in range(1, n_starts):
        rng = np.random.default_rng([seed, k])
        c = basis.constant_coeffs(level)
        if basis.m > 1:
            c[1:] = rng.normal(size=basis.m - 1)
            wiggle = basis.matrix[:, 1:] @ c[1:]
            c[1:] *= 0.9 * half_width / max(np.max(np.abs(wiggle)), 1e-300)
        start = synthesize(basis, c, sensors.grid)
        candidate = run_als(sensors, cmfs, config, start=start)
        if candidate.objective < best.objective:
            best = candidate
    return best

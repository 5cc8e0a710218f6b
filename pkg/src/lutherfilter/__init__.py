"""Smooth, bounded colour filters that make a camera closer to colorimetric.

A filter ``f`` placed in front of a camera with sensitivities ``Q`` gives the
effective sensitivities ``diag(f) Q``.  This package searches for the smooth
(low-order cosine) filter and 3x3 correction ``M`` that bring
``diag(f) Q M`` closest to the CIE colour matching functions, subject to
transmittance bounds, and measures the result with NRMSE and CIELAB
colour differences.
"""

from lutherfilter.basis import BasisMatrix, make_dct_basis, synthesize
from lutherfilter.colorimetry import (
    LabColor,
    Tristimulus,
    WhitePoint,
    delta_e,
    tristimulus,
    xyz_to_lab,
)
from lutherfilter.evaluation import EvalReport, colour_experiment, nrmse, percentile
from lutherfilter.qp import (
    QpInfeasibleError,
    QpNonConvergenceError,
    QpProblem,
    QpSolution,
    QpUnboundedError,
    solve_qp,
)
from lutherfilter.solver import (
    FilterSolution,
    SolverConfig,
    build_v_matrix,
    luth_unconstrained,
    run_als,
    solve_c_step,
    solve_m_step,
)
from lutherfilter.spectral import (
    CANONICAL_GRID,
    SensorSet,
    SpectralSample,
    WavelengthGrid,
    colour_signal,
    resample,
)

__version__ = "0.1.0"

__all__ = [
    "BasisMatrix",
    "CANONICAL_GRID",
    "EvalReport",
    "FilterSolution",
    "LabColor",
    "QpInfeasibleError",
    "QpNonConvergenceError",
    "QpProblem",
    "QpSolution",
    "QpUnboundedError",
    "SensorSet",
    "SolverConfig",
    "SpectralSample",
    "Tristimulus",
    "WavelengthGrid",
    "WhitePoint",
    "build_v_matrix",
    "colour_experiment",
    "colour_signal",
    "delta_e",
    "luth_unconstrained",
    "make_dct_basis",
    "nrmse",
    "percentile",
    "resample",
    "run_als",
    "solve_c_step",
    "solve_m_step",
    "solve_qp",
    "synthesize",
    "tristimulus",
    "xyz_to_lab",
]

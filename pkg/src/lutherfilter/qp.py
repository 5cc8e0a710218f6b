"""Dense primal active-set solver for small two-sided linearly constrained QPs.

Problems have the form::

    minimise    c^T H c + g^T c
    subject to  lower <= A c <= upper

with ``H`` symmetric positive semidefinite.  Each row of ``A`` yields up to two
one-sided constraints; infinite bounds are dropped.  One-sided constraint
``k = 2*row + side`` (side 0 = lower, 1 = upper) is the tie-break order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

LOWER, UPPER = "lower", "upper"
_SIDES = (LOWER, UPPER)

FEAS_TOL = 1e-10
JITTER = 1e-12
HARRIS_TOL = 1e-12
RANK_TOL = 1e-10
UNBOUNDED_STEP = 1e8


class QpInfeasibleError(ValueError):
    """No point satisfies the constraints."""


class QpUnboundedError(ValueError):
    """The objective has no minimum over the feasible set."""


class QpNonConvergenceError(RuntimeError):
    """Iteration cap reached; ``best`` holds the last feasible iterate."""

    def __init__(self, message: str, best: QpSolution):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True, eq=False)
class QpProblem:
    hessian: np.ndarray
    linear: np.ndarray
    constraint_matrix: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        H = np.array(self.hessian, dtype=float)
        g = np.array(self.linear, dtype=float)
        A = np.array(self.constraint_matrix, dtype=float)
        lo = np.array(self.lower, dtype=float)
        hi = np.array(self.upper, dtype=float)
        m = g.shape[0]
        if H.shape != (m, m) or A.ndim != 2 or A.shape[1] != m:
            raise ValueError(
                f"shape mismatch: hessian {H.shape}, linear {g.shape}, constraints {A.shape}"
            )
        if lo.shape != (A.shape[0],) or hi.shape != (A.shape[0],):
            raise ValueError("lower/upper must have one entry per constraint row")
        if not (np.all(np.isfinite(H)) and np.all(np.isfinite(g)) and np.all(np.isfinite(A))):
            raise ValueError("problem data must be finite")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)):
            raise ValueError("bounds must not be NaN")
        scale = max(1.0, float(np.max(np.abs(H), initial=0.0)))
        if np.max(np.abs(H - H.T), initial=0.0) > 1e-10 * scale:
            raise ValueError("hessian is not symmetric")
        H = 0.5 * (H + H.T)
        trace = float(np.trace(H))
        if m and np.linalg.eigvalsh(H)[0] < -1e-10 * max(abs(trace), 1e-300):
            raise ValueError("hessian is not positive semidefinite")
        bad = np.flatnonzero(lo > hi)
        if bad.size:
            i = int(bad[0])
            raise QpInfeasibleError(
                f"constraint row {i} has lower {lo[i]:g} above upper {hi[i]:g}"
            )
        for arr in (H, g, A, lo, hi):
            arr.setflags(write=False)
        object.__setattr__(self, "hessian", H)
        object.__setattr__(self, "linear", g)
        object.__setattr__(self, "constraint_matrix", A)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def n_vars(self) -> int:
        return self.linear.shape[0]

    def objective(self, c) -> float:
        c = np.asarray(c, dtype=float)
        return float(c @ self.hessian @ c + self.linear @ c)

    def gradient(self, c) -> np.ndarray:
        return 2.0 * self.hessian @ c + self.linear

    def max_violation(self, c) -> float:
        ac = self.constraint_matrix @ np.asarray(c, dtype=float)
        viol = np.concatenate([self.lower - ac, ac - self.upper])
        viol = viol[np.isfinite(viol)]
        return float(np.max(viol, initial=0.0))


@dataclass(frozen=True, eq=False)
class QpSolution:
    c: np.ndarray
    objective: float
    active_set: frozenset
    iterations: int
    kkt_residual: float
    multipliers: dict = field(default_factory=dict)


class _OneSided:
    """All finite one-sided constraints written as ``normal @ c >= rhs``."""

    def __init__(self, problem: QpProblem):
        rows, normals, rhs, keys = [], [], [], []
        A = problem.constraint_matrix
        for i in range(A.shape[0]):
            if np.isfinite(problem.lower[i]):
                keys.append((i, LOWER))
                normals.append(A[i])
                rhs.append(problem.lower[i])
                rows.append(2 * i)
            if np.isfinite(problem.upper[i]):
                keys.append((i, UPPER))
                normals.append(-A[i])
                rhs.append(-problem.upper[i])
                rows.append(2 * i + 1)
        m = problem.n_vars
        self.order = np.array(rows, dtype=int)
        self.normals = np.array(normals, dtype=float).reshape(-1, m)
        self.rhs = np.array(rhs, dtype=float)
        self.keys = keys

    def __len__(self) -> int:
        return len(self.keys)

    def slack(self, c: np.ndarray) -> np.ndarray:
        return self.normals @ c - self.rhs


def _find_feasible(problem: QpProblem, cons: _OneSided) -> np.ndarray:
    """Point maximising the smallest normalised slack (capped at 1).

    Interior starts keep degenerate vertices out of the initial working set.
    """
    m = problem.n_vars
    if len(cons) == 0:
        return np.zeros(m)
    norms = np.linalg.norm(cons.normals, axis=1)
    # variables (c, t): maximise t subject to normal.c - |normal| t >= rhs
    objective = np.zeros(m + 1)
    objective[-1] = -1.0
    a_ub = np.hstack([-cons.normals, norms[:, None]])
    res = linprog(
        objective,
        A_ub=a_ub,
        b_ub=-cons.rhs,
        bounds=[(None, None)] * m + [(None, 1.0)],
        method="highs",
    )
    if res.status != 0 or res.x[-1] < -FEAS_TOL:
        raise QpInfeasibleError("constraint system has no feasible point")
    return np.asarray(res.x[:m], dtype=float)


def _independent(normals: np.ndarray, working: list, candidate: int, m: int) -> bool:
    if len(working) >= m or not np.any(normals[candidate]):
        return False
    rows = normals[working + [candidate]]
    rows = rows / np.linalg.norm(rows, axis=1, keepdims=True)
    s = np.linalg.svd(rows, compute_uv=False)
    return s[-1] > RANK_TOL * s[0]


def _eqp_step(H2: np.ndarray, grad: np.ndarray, G: np.ndarray):
    """Step and multipliers of the equality-constrained subproblem.

    The step lives in the numerical null space of the working rows (SVD,
    relative tolerance RANK_TOL), so nearly dependent rows cannot inject
    noise into it. Multipliers solve G^T lam = H2 p + grad in least squares.
    """
    m = H2.shape[0]
    if G.shape[0] == 0:
        z = np.eye(m)
    else:
        rows = G / np.linalg.norm(G, axis=1, keepdims=True)
        _, s, vt = np.linalg.svd(rows)
        rank = int(np.sum(s > RANK_TOL * s[0]))
        z = vt[rank:].T
    if z.shape[1] == 0:
        p = np.zeros(m)
    else:
        reduced = z.T @ H2 @ z
        rhs = -(z.T @ grad)
        try:
            p = z @ np.linalg.solve(reduced, rhs)
        except np.linalg.LinAlgError:
            p = z @ np.linalg.lstsq(reduced, rhs, rcond=None)[0]
    if G.shape[0] == 0:
        return p, np.zeros(0)
    lam = np.linalg.lstsq(G.T, H2 @ p + grad, rcond=None)[0]
    return p, lam


def solve_qp(problem: QpProblem, start=None, max_iter: int | None = None) -> QpSolution:
    """Minimise ``c^T H c + g^T c`` subject to ``lower <= A c <= upper``.

    ``start`` is used when it is feasible; otherwise a phase-1 linear program
    supplies an interior first iterate.  Raises ``QpInfeasibleError``,
    ``QpUnboundedError`` or ``QpNonConvergenceError`` (carrying the last
    feasible iterate as ``best``).
    """
    m = problem.n_vars
    cons = _OneSided(problem)
    if max_iter is None:
        max_iter = 10 * (m + len(cons))

    c = None
    if start is not None:
        c0 = np.array(start, dtype=float)
        if c0.shape != (m,):
            raise ValueError(f"start must have {m} entries")
        if np.all(cons.slack(c0) >= -FEAS_TOL * max(1.0, np.abs(cons.rhs).max(initial=0))):
            c = c0
    if c is None:
        c = _find_feasible(problem, cons)

    H2 = 2.0 * problem.hessian
    trace = float(np.trace(problem.hessian))
    if m and np.linalg.eigvalsh(problem.hessian)[0] <= JITTER * abs(trace):
        H2 = H2 + 2.0 * JITTER * max(abs(trace), 1.0) * np.eye(m)

    # constraints enter only as blocking constraints, which keeps the working
    # set linearly independent even when the start is a degenerate vertex
    working: list[int] = []
    norms = np.linalg.norm(cons.normals, axis=1)
    lam = np.zeros(0)
    restarted = False
    order = [int(k) for k in np.argsort(cons.order, kind="stable")]
    iterations = 0
    converged = False
    while iterations < max_iter:
        iterations += 1
        working.sort(key=lambda k: cons.order[k])
        grad = problem.gradient(c)
        nw = len(working)
        p, lam = _eqp_step(H2, grad, cons.normals[working])

        # a step is "zero" when it is tiny or no longer lowers the objective
        # beyond rounding
        gain = -(grad @ p + p @ problem.hessian @ p)
        obj_scale = 1.0 + abs(problem.objective(c))
        if np.linalg.norm(p) <= 1e-12 * (1.0 + np.linalg.norm(c)) or gain <= 1e-16 * obj_scale:
            lam_tol = 1e-10 * max(1.0, np.abs(lam).max(initial=0.0))
            if nw == 0 or lam.min() >= -lam_tol:
                converged = True
                break
            # np.argmin returns the first minimum; working is in tie-break order
            working.pop(int(np.argmin(lam)))
            continue

        # Harris two-pass ratio test: find the step allowed when every bound
        # is relaxed by HARRIS_TOL, then among constraints reached within it
        # take the one with the steepest approach (best conditioned)
        directional = cons.normals @ p
        p_norm = np.linalg.norm(p)
        slack = np.maximum(cons.slack(c), 0.0)
        candidates = [
            k for k in order
            if k not in working and directional[k] < -1e-14 * norms[k] * p_norm
        ]
        alpha, blocking = 1.0, None
        if candidates:
            cand = np.array(candidates)
            rate = -directional[cand]
            relaxed = np.min((slack[cand] + HARRIS_TOL * norms[cand]) / rate)
            exact = slack[cand] / rate
            within = np.flatnonzero(exact <= relaxed)
            if within.size and exact[within].min() < 1.0:
                steep = rate[within] / norms[cand[within]]
                # argmax takes the first of equal maxima: lowest tie-break order
                pick = within[int(np.argmax(steep))]
                alpha, blocking = float(exact[pick]), int(cand[pick])
        if blocking is None and p_norm > UNBOUNDED_STEP * (1.0 + np.linalg.norm(c)):
            raise QpUnboundedError("objective decreases without bound along a feasible ray")
        c = c + alpha * p
        if blocking is not None:
            if not _independent(cons.normals, working, blocking, m):
                if restarted:
                    raise QpNonConvergenceError(
                        "degenerate vertex: working set lost independence",
                        _package(problem, cons, c, working, np.zeros(0), iterations),
                    )
                restarted = True
                c, working = _find_feasible(problem, cons), []
                continue
            working.append(blocking)

    solution = _package(problem, cons, c, working, lam, iterations)
    if not converged:
        raise QpNonConvergenceError(
            f"active-set iteration cap {max_iter} reached", solution
        )
    return solution


def _package(problem, cons, c, working, lam, iterations) -> QpSolution:
    working = sorted(working, key=lambda k: cons.order[k])
    if len(lam) != len(working):
        lam = np.zeros(len(working))
    lam_pos = np.maximum(lam, 0.0)
    resid = problem.gradient(c) - cons.normals[working].T @ lam_pos
    stationarity = float(np.max(np.abs(resid), initial=0.0))
    dual = float(np.max(-lam, initial=0.0))
    comp = float(np.max(np.abs(lam_pos * cons.slack(c)[working]), initial=0.0))
    kkt = max(stationarity, dual, comp, problem.max_violation(c))
    keys = [cons.keys[k] for k in working]
    return QpSolution(
        c=c,
        objective=problem.objective(c),
        active_set=frozenset(keys),
        iterations=iterations,
        kkt_residual=kkt,
        multipliers={key: float(v) for key, v in zip(keys, lam_pos)},
    )

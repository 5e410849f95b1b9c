"""Brute-force verification on a truncated lattice window.

Solves the stationary distribution of the reflected process restricted to
``{0..N}^2`` and fits log-probability slopes along rays.  The window is
closed by clamped reflection: any step that would leave it is redirected
to stay at the current cell (with the step's phase change kept), which
preserves stochasticity, keeps the generator local, and biases mass onto
the window edge rather than distorting interior ratios.

This path is deliberately independent of the matrix-analytic machinery;
its slope fits are the empirical oracle the analytic decay rates are
checked against.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .geometry import as_direction
from .matrix_analytic import StabilityError, StabilityVerdict, stability
from .model import Region

__all__ = [
    "OracleConvergenceError",
    "OracleFitError",
    "TruncatedStationary",
    "SlopeFit",
    "solve_truncated",
    "fit_decay",
    "default_window",
    "dump_stationary_csv",
]


class OracleConvergenceError(RuntimeError):
    """Stationary power iteration did not meet tolerance within the cap."""


class OracleFitError(RuntimeError):
    """A slope fit could not be produced (zero mass or bad window)."""


@dataclass(frozen=True)
class TruncatedStationary:
    """Stationary law of the window-truncated process.

    ``pi[x1, x2, j]`` carries the stationary probabilities; the mass sums
    to one and the stationarity residual is reported in max norm.
    """

    N: int
    pi: np.ndarray = field(repr=False)
    solver_residual: float
    iterations: int


def _region_cells(N):
    inner = np.arange(1, N + 1)
    zero = np.zeros(1, dtype=int)
    spans = {
        Region.INTERIOR: (inner, inner),
        Region.X_BOUNDARY: (inner, zero),
        Region.Y_BOUNDARY: (zero, inner),
        Region.ORIGIN: (zero, zero),
    }
    cells = {}
    for region, (r1, r2) in spans.items():
        g1, g2 = np.meshgrid(r1, r2, indexing="ij")
        cells[region] = (g1.ravel(), g2.ravel())
    return cells


def _truncated_transition(model, N):
    """Sparse row-stochastic transition matrix on the window."""
    s0 = model.s0
    n_states = (N + 1) * (N + 1) * s0
    cells = _region_cells(N)
    rows_acc, cols_acc, vals_acc = [], [], []
    for region, (x1, x2) in cells.items():
        base = (x1 * (N + 1) + x2) * s0
        for (i1, i2) in region.admissible_steps:
            block = model.blocks.get((region, (i1, i2)))
            if block is None:
                continue
            y1 = x1 + i1
            y2 = x2 + i2
            off_window = (y1 > N) | (y2 > N)
            y1 = np.where(off_window, x1, y1)
            y2 = np.where(off_window, x2, y2)
            dest = (y1 * (N + 1) + y2) * s0
            nz = np.argwhere(block > 0.0)
            for j, jp in nz:
                rows_acc.append(base + j)
                cols_acc.append(dest + jp)
                vals_acc.append(np.full(base.shape, block[j, jp]))
    rows = np.concatenate(rows_acc)
    cols = np.concatenate(cols_acc)
    vals = np.concatenate(vals_acc)
    return sp.csr_matrix(
        sp.coo_matrix((vals, (rows, cols)), shape=(n_states, n_states))
    )


def solve_truncated(model, N, tol=1e-12, max_iter=500_000):
    """Stationary distribution of the clamped window chain.

    Power iteration from the deterministic uniform start, renormalizing
    every step; stops when successive iterates agree to ``tol`` in max
    norm, which equals the stationarity residual of the previous iterate.
    Memory stays linear in the state count.
    """
    if N < 10:
        raise ValueError("window size N must be at least 10")
    if stability(model) is not StabilityVerdict.POSITIVE_RECURRENT:
        raise StabilityError("the truncated oracle requires a positive recurrent model")
    transition_t = sp.csr_matrix(_truncated_transition(model, N).T)
    n = transition_t.shape[0]
    pi = np.full(n, 1.0 / n)
    residual = np.inf
    for iteration in range(1, max_iter + 1):
        nxt = transition_t @ pi
        nxt /= nxt.sum()
        residual = float(np.abs(nxt - pi).max())
        pi = nxt
        if residual <= tol:
            break
    else:
        raise OracleConvergenceError(
            f"stationary iteration residual {residual:.3e} after {max_iter} steps"
        )
    return TruncatedStationary(
        N=N,
        pi=pi.reshape(N + 1, N + 1, model.s0),
        solver_residual=residual,
        iterations=iteration,
    )


def default_window(N, c):
    """Fit window ``[N/4, N/2]`` in ray steps, scaled by the direction."""
    c = as_direction(c)
    cmax = max(c.c1, c.c2)
    return int(np.ceil(N / (4 * cmax))), N // (2 * cmax)


def dump_stationary_csv(ts, path):
    """Write the window solution as ``x1,x2,j,prob`` rows for plotting."""
    s0 = ts.pi.shape[2]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x1,x2,j,prob\n")
        for x1 in range(ts.N + 1):
            for x2 in range(ts.N + 1):
                for j in range(s0):
                    fh.write(f"{x1},{x2},{j},{float(ts.pi[x1, x2, j])!r}\n")


@dataclass(frozen=True)
class SlopeFit:
    """Least-squares decay fit of one ray of the truncated solution.

    ``slope`` estimates the *negative* decay rate (log-probabilities fall
    along the ray).  ``quad_coeff`` is the quadratic term of a second
    degree fit over the same window; together with its standard error it
    quantifies curvature left in the log tail.

    ``stderr`` is the total slope uncertainty: the statistical standard
    error plus, in quadrature, the systematic error of forcing a line
    through a window over which the local slope drifts by the curvature
    term (``|quad| * span / 2``).  These fits are near-exact, so the purely
    statistical component alone would wildly understate how well the slope
    is actually pinned down.
    """

    direction: tuple
    phase: int
    k_lo: int
    k_hi: int
    slope: float
    stderr: float
    r2: float
    per_phase_slopes: dict
    per_phase_stderr: dict
    quad_coeff: float
    quad_stderr: float

    def to_dict(self):
        return {
            "direction": list(self.direction),
            "phase": self.phase,
            "window": [self.k_lo, self.k_hi],
            "slope": self.slope,
            "stderr": self.stderr,
            "r2": self.r2,
            "per_phase_slopes": {str(j): v for j, v in self.per_phase_slopes.items()},
            "per_phase_stderr": {str(j): v for j, v in self.per_phase_stderr.items()},
            "quad_coeff": self.quad_coeff,
            "quad_stderr": self.quad_stderr,
        }


def _line_fit(ks, logs):
    """Linear fit with curvature-aware slope uncertainty.

    Returns ``(slope, stderr, r2, quad, quad_stderr)`` where ``stderr``
    combines the statistical slope error with the systematic drift the
    quadratic term implies across the window.
    """
    coeffs, cov = np.polyfit(ks, logs, 1, cov=True)
    slope = float(coeffs[0])
    stat_err = float(np.sqrt(cov[0, 0]))
    fitted = np.polyval(coeffs, ks)
    ss_res = float(np.sum((logs - fitted) ** 2))
    ss_tot = float(np.sum((logs - logs.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    quad, quad_cov = np.polyfit(ks, logs, 2, cov=True)
    quad_coeff = float(quad[0])
    quad_stderr = float(np.sqrt(quad_cov[0, 0]))
    drift = abs(quad_coeff) * (ks[-1] - ks[0]) / 2.0
    stderr = float(np.hypot(stat_err, drift))
    return slope, stderr, r2, quad_coeff, quad_stderr


def fit_decay(ts, c, j, window=None):
    """Slope of ``log pi`` along ray ``k * c`` for phase ``j``.

    The window must clear the truncation edge by two ray steps; the
    default window sits between a quarter and a half of the span.  Raises
    :class:`OracleFitError` when any window entry has zero mass (the ray
    is unreachable or the window is too deep for the truncation level).
    """
    c = as_direction(c)
    if window is None:
        k_lo, k_hi = default_window(ts.N, c)
    else:
        k_lo, k_hi = window
    cmax = max(c.c1, c.c2)
    if k_hi * cmax > ts.N - 2:
        raise OracleFitError(
            f"window end {k_hi} leaves less than a two-step margin at N={ts.N}"
        )
    if k_hi - k_lo < 3:
        raise OracleFitError("window too short for a meaningful fit")
    ks = np.arange(k_lo, k_hi + 1)
    rays = ts.pi[ks * c.c1, ks * c.c2, :]
    if np.any(rays[:, j] <= 0.0):
        raise OracleFitError("zero probability in fit window")
    slope, stderr, r2, quad_coeff, quad_stderr = _line_fit(ks, np.log(rays[:, j]))
    per_phase = {}
    per_phase_err = {}
    for phase in range(rays.shape[1]):
        if np.any(rays[:, phase] <= 0.0):
            continue
        ps, pe, _, _, _ = _line_fit(ks, np.log(rays[:, phase]))
        per_phase[phase] = ps
        per_phase_err[phase] = pe
    return SlopeFit(
        direction=c.as_tuple(),
        phase=j,
        k_lo=int(k_lo),
        k_hi=int(k_hi),
        slope=slope,
        stderr=stderr,
        r2=r2,
        per_phase_slopes=per_phase,
        per_phase_stderr=per_phase_err,
        quad_coeff=quad_coeff,
        quad_stderr=quad_stderr,
    )

"""Perron root computation for nonnegative matrices.

Everything downstream (level-set geometry, censored-chain criticality,
decay rates) reduces to evaluating the Perron-Frobenius eigenvalue of a
small nonnegative matrix many thousands of times, so this module keeps the
iteration lean and exposes warm starts for callers that sweep a parameter.

The primary routine is power iteration on a diagonally shifted copy of the
matrix.  The shift makes periodic matrices primitive, so the iteration
converges whenever the matrix is irreducible; for reducible input the
Collatz-Wielandt bounds can stall, which is reported as an exception so the
caller can fall back to a per-communicating-class computation.
"""

from __future__ import annotations

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

__all__ = [
    "PerronConvergenceError",
    "perron_root",
    "spectral_radius",
    "stationary_vector",
]


class PerronConvergenceError(RuntimeError):
    """Power iteration failed to meet tolerance within the iteration cap.

    This normally signals a reducible (or otherwise pathological) matrix,
    for which the Collatz-Wielandt bounds do not contract.
    """


def _power_bounds(matrix, rtol, max_iter, start=None):
    """Power iteration with Collatz-Wielandt bounds on a shifted matrix.

    Returns ``(root, vector)`` where ``root`` is the Perron root of the
    *unshifted* matrix.  The shift ``eps * I`` with ``eps = 1e-3 * max
    entry`` translates every eigenvalue by ``eps``, so subtracting ``eps``
    at the end is exact; its only purpose is to force primitivity.
    """
    m = np.asarray(matrix, dtype=float)
    n = m.shape[0]
    top = m.max(initial=0.0)
    if top == 0.0:
        return 0.0, np.full(n, 1.0 / max(n, 1))
    eps = 1e-3 * top
    shifted = m + eps * np.eye(n)
    if start is not None and start.shape == (n,) and np.all(start > 0):
        v = start.copy()
    else:
        v = np.ones(n)
    for _ in range(max_iter):
        w = shifted @ v
        ratios = w / v
        hi = ratios.max()
        lo = ratios.min()
        if hi - lo <= rtol * max(hi - eps, 1e-300):
            root = 0.5 * (hi + lo) - eps
            return max(root, 0.0), w / w.max()
        scale = w.max()
        if not np.isfinite(scale) or scale <= 0.0:
            raise PerronConvergenceError("power iteration produced a non-finite iterate")
        v = w / scale
        # Guard against underflow in strongly unbalanced matrices: a zero
        # component would poison the Collatz-Wielandt ratios.
        if v.min() <= 0.0:
            raise PerronConvergenceError("iterate lost strict positivity")
    raise PerronConvergenceError(
        f"no convergence after {max_iter} iterations (bounds {lo:.3e}..{hi:.3e})"
    )


def perron_root(matrix, rtol=1e-12, max_iter=200_000):
    """Spectral radius of a nonnegative square matrix.

    Parameters
    ----------
    matrix : (n, n) array_like
        Nonnegative, finite.
    rtol : float
        Relative tolerance on the returned root.
    max_iter : int
        Iteration cap; exceeding it raises :class:`PerronConvergenceError`.

    Raises
    ------
    ValueError
        If the matrix is not square, has negative entries or non-finite
        entries.
    PerronConvergenceError
        If the iteration does not meet ``rtol`` within ``max_iter`` steps.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix must be finite")
    if m.min(initial=0.0) < 0.0:
        raise ValueError("matrix must be nonnegative")
    root, _ = _power_bounds(m, rtol, max_iter)
    return root


def spectral_radius(matrix, rtol=1e-12, max_iter=200_000, start=None):
    """Robust spectral radius: power iteration with a reducibility fallback.

    Tries :func:`perron_root` first.  If that stalls, the matrix is split
    into strongly connected classes of its sparsity pattern and the root is
    computed per class; the overall radius is the maximum over classes.

    Returns ``(root, vector)``; the vector is a positive iterate suitable
    as a warm start for a nearby matrix (``None`` when the fallback path
    was taken).
    """
    m = np.asarray(matrix, dtype=float)
    try:
        return _power_bounds(m, rtol, max_iter, start=start)
    except PerronConvergenceError:
        pass
    n_comp, labels = connected_components(csr_matrix(m != 0), directed=True, connection="strong")
    best = 0.0
    for comp in range(n_comp):
        idx = np.flatnonzero(labels == comp)
        sub = m[np.ix_(idx, idx)]
        if idx.size == 1:
            best = max(best, float(sub[0, 0]))
            continue
        root, _ = _power_bounds(sub, rtol, max_iter)
        best = max(best, root)
    return best, None


def stationary_vector(transition, tol=1e-13):
    """Stationary row vector of a finite irreducible stochastic matrix.

    Solves ``pi (P - I) = 0`` with the normalization ``pi . 1 = 1`` by
    replacing one equation of the singular system with the normalization.
    """
    p = np.asarray(transition, dtype=float)
    n = p.shape[0]
    a = p.T - np.eye(n)
    a[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    pi = np.linalg.solve(a, rhs)
    pi = np.where(np.abs(pi) < tol, 0.0, pi)
    if pi.min() < -1e-9:
        raise ValueError("stationary solve produced negative mass; matrix may be reducible")
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()

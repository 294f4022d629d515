"""Desk-scale spectral ground truth: full eigendecomposition by cyclic
Jacobi rotations (written from scratch so the oracle shares nothing with the
message-passing solver) and Lorentzian-smoothed densities."""

from __future__ import annotations

import numpy as np

from . import _kernels

DESK_BUDGET = 4000
SYMMETRY_TOL = 1e-12


def dense_eigenvalues(matrix, budget: int = DESK_BUDGET, rel_tol: float = 1e-10) -> np.ndarray:
    """All eigenvalues of a symmetric matrix, sorted ascending.

    Cyclic Jacobi rotations until the off-diagonal Frobenius norm falls
    below rel_tol times the matrix Frobenius norm.
    """
    a = np.array(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    n = a.shape[0]
    if n > budget:
        raise ValueError(f"matrix size {n} exceeds desk budget {budget}")
    scale = max(np.max(np.abs(a)), 1.0)
    if np.max(np.abs(a - a.T)) > SYMMETRY_TOL * scale:
        raise ValueError("matrix is not symmetric")
    if n == 0:
        return np.zeros(0)
    eigs, _ = _kernels.jacobi_eigenvalues(a, rel_tol, 100)
    return eigs


def smoothed_density(eigs, grid, eta: float) -> np.ndarray:
    """Lorentzian-broadened spectral density on a grid:
    rho(x) = (1/(n pi)) sum_i eta / ((x - lambda_i)^2 + eta^2)."""
    if eta <= 0.0:
        raise ValueError("eta must be positive")
    eigs = np.asarray(eigs, dtype=float)
    grid = np.asarray(grid, dtype=float)
    if eigs.size == 0:
        return np.zeros_like(grid)
    diff = grid[:, None] - eigs[None, :]
    return (eta / np.pi / eigs.size) * np.sum(1.0 / (diff**2 + eta**2), axis=1)

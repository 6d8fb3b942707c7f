"""Dense kernels: pivoted solves, stationary vectors, group inverses, |lambda_2|.

Everything here is O(n^3) dense and intended for n <= 200.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .errors import ChainStructureError, ConvergenceError, SingularMatrixError

PIVOT_RTOL = 1e-13
GROUP_INVERSE_TOL = 1e-8


def _square(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ValueError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


class LUFactor:
    """Pivoted LU of a square matrix, reusable for ``a x = b`` and ``a^T x = b``.

    Raises :class:`SingularMatrixError` when a pivot falls below
    ``1e-13 * ||a||_inf``.
    """

    def __init__(self, a):
        a = _square(a)
        scale = np.abs(a).sum(axis=1).max()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", la.LinAlgWarning)
            self._lu = la.lu_factor(a, check_finite=False)
        pivots = np.abs(np.diag(self._lu[0]))
        if scale == 0.0 or pivots.min() < PIVOT_RTOL * scale:
            raise SingularMatrixError(
                f"pivot {pivots.min():.3e} below threshold {PIVOT_RTOL * scale:.3e}"
            )

    def solve(self, b, transpose: bool = False) -> np.ndarray:
        return la.lu_solve(
            self._lu, np.asarray(b, dtype=float), trans=1 if transpose else 0, check_finite=False
        )


def solve(a, b) -> np.ndarray:
    """Solve ``a @ x = b`` by LU with partial pivoting."""
    return LUFactor(a).solve(b)


def stationary_distribution(p) -> np.ndarray:
    """Stationary vector of a row-stochastic matrix with one recurrent class.

    Solves ``(I - P^T) d = 0`` with the last equation replaced by ``sum(d) = 1``.
    A singular system means more than one recurrent class.
    """
    p = _square(p)
    n = p.shape[0]
    m = np.eye(n) - p.T
    m[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    try:
        d = solve(m, rhs)
    except SingularMatrixError as exc:
        raise ChainStructureError(
            "stationary system is singular beyond rank n-1 (multiple recurrent classes?)"
        ) from exc
    # transient states come out as +-1e-17 noise
    d[np.abs(d) < 1e-14] = 0.0
    if d.min() < 0.0:
        raise ChainStructureError(f"stationary solve produced negative mass {d.min():.3e}")
    return d / d.sum()


@dataclass(frozen=True)
class GroupInverseResult:
    """Group inverse ``D`` of ``A = I - P`` with the residuals of its three defining identities."""

    d_matrix: np.ndarray
    stationary: np.ndarray
    residual_ada: float
    residual_dad: float
    residual_commute: float

    @property
    def residuals(self) -> tuple[float, float, float]:
        return (self.residual_ada, self.residual_dad, self.residual_commute)

    @property
    def max_residual(self) -> float:
        return max(self.residuals)


def group_inverse_residuals(a: np.ndarray, d: np.ndarray) -> tuple[float, float, float]:
    ada = np.abs(a @ d @ a - a).max()
    dad = np.abs(d @ a @ d - d).max()
    comm = np.abs(a @ d - d @ a).max()
    return float(ada), float(dad), float(comm)


def group_inverse(p, d=None, *, check_structure: bool = True) -> GroupInverseResult:
    """Group inverse of ``I - P`` via ``(I - P + e d^T)^{-1} - e d^T``.

    ``d`` is the stationary distribution of ``p`` (computed if omitted). With
    ``check_structure`` the chain must be unichain with an aperiodic recurrent
    class, the regime in which ``D = sum_t (P^t - e d^T)`` converges.
    """
    p = _square(p)
    n = p.shape[0]
    if check_structure:
        from .mdp import chain_diagnostics

        diag = chain_diagnostics(p)
        if not diag.unichain:
            raise ChainStructureError(
                f"chain has {len(diag.recurrent_classes)} recurrent classes", diag
            )
        if not diag.aperiodic:
            raise ChainStructureError(f"recurrent class has period {diag.periods[0]}", diag)
    if d is None:
        d = stationary_distribution(p)
    d = np.asarray(d, dtype=float)
    ed = np.outer(np.ones(n), d)
    a = np.eye(n) - p
    try:
        z = solve(a + ed, np.eye(n))
    except SingularMatrixError as exc:
        raise ChainStructureError("fundamental matrix I - P + e d^T is singular") from exc
    dm = z - ed
    res = group_inverse_residuals(a, dm)
    if max(res) > GROUP_INVERSE_TOL:
        raise ChainStructureError(f"group inverse residuals {res} exceed {GROUP_INVERSE_TOL}")
    dm.setflags(write=False)
    return GroupInverseResult(dm, d, *res)


def group_inverse_series(p, d, tail_tol: float = 1e-12, max_terms: int = 1_000_000) -> np.ndarray:
    """Truncated ``sum_t (P^t - e d^T)``; reference route for testing.

    Stops once a term's max-abs entry drops below ``tail_tol``.
    """
    p = _square(p)
    n = p.shape[0]
    ed = np.outer(np.ones(n), np.asarray(d, dtype=float))
    total = np.zeros((n, n))
    pt = np.eye(n)
    for _ in range(max_terms):
        term = pt - ed
        total += term
        if np.abs(term).max() < tail_tol:
            return total
        pt = pt @ p
    raise ConvergenceError("series did not reach the tail tolerance", None)


def subdominant_modulus(p, d=None) -> float:
    """``|lambda_2|`` of a stochastic matrix as the spectral radius of ``P - e d^T``."""
    p = _square(p)
    n = p.shape[0]
    if d is None:
        d = stationary_distribution(p)
    b = p - np.outer(np.ones(n), d)
    try:
        eig = np.linalg.eigvals(b)
    except np.linalg.LinAlgError as exc:
        # Gelfand estimate ||B^k||^(1/k) as a fallback
        k = 64
        est = np.linalg.norm(np.linalg.matrix_power(b, k), 2) ** (1.0 / k)
        raise ConvergenceError("eigenvalue iteration did not converge", float(est)) from exc
    return float(np.abs(eig).max())

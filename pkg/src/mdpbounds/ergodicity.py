"""One-norm ergodicity coefficient and the upper bounds on tau_1 of discounted group inverses."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import ChainStructureError, MinorizationError
from .linalg import GroupInverseResult
from .mdp import InducedChain, chain_diagnostics
from .occupancy import check_gamma, discounted_transition, occupancy


@dataclass(frozen=True)
class ErgodicityCoefficient:
    value: float
    argmax_pair: tuple[int, int]


def tau1(a) -> ErgodicityCoefficient:
    """``max ||A^T x||_1`` over zero-sum x with ``||x||_1 = 1``.

    The feasible set is the convex hull of ``(e_i - e_j) / 2``, so the maximum
    is half the largest l1 distance between two rows of ``A``.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    best, pair = 0.0, (0, 0)
    for i in range(n - 1):
        dist = np.abs(a[i] - a[i + 1 :]).sum(axis=1)
        k = int(np.argmax(dist))
        if dist[k] > best:
            best, pair = float(dist[k]), (i, i + 1 + k)
    return ErgodicityCoefficient(0.5 * best, pair)


def tau1_translation_check(a, c) -> float:
    """``|tau_1[A] - tau_1[A + e c^T]|``; zero up to rounding."""
    a = np.asarray(a, dtype=float)
    shifted = a + np.outer(np.ones(a.shape[0]), np.asarray(c, dtype=float))
    return abs(tau1(a).value - tau1(shifted).value)


def resolvent(chain: InducedChain, gamma: float) -> np.ndarray:
    n = chain.n_states
    return linalg.solve(np.eye(n) - gamma * chain.transition, np.eye(n))


def discounted_group_inverse(chain: InducedChain, mu, gamma: float) -> GroupInverseResult:
    """Group inverse of ``I - P_gamma`` where ``P_gamma = gamma P + (1 - gamma) e mu^T``."""
    pg = discounted_transition(chain, mu, gamma).matrix
    d_gamma = occupancy(chain, mu, gamma).dist
    return linalg.group_inverse(pg, d_gamma)


def _require_ergodic(chain: InducedChain) -> None:
    diag = chain_diagnostics(chain.transition)
    if not (diag.unichain and diag.aperiodic):
        raise ChainStructureError("chain must be unichain and aperiodic", diag)


@dataclass(frozen=True)
class MatrDiffReport:
    """Gaps between ``D_gamma`` and two closed forms built from ``R = (I - gamma P)^{-1}``.

    ``gap_with_occupancy`` uses ``R + e d_gamma^T (I - R) - e d_gamma^T =
    (I - e d_gamma^T) R``, which is exact. ``gap_with_stationary`` subtracts
    ``e d^T`` with ``d`` the undiscounted stationary vector instead, and is off
    by the rank-one term ``e (d_gamma - d)^T``. Both differ from ``D_gamma`` by
    ``e c^T`` terms only, so ``tau_gap`` vanishes either way.
    """

    gap_with_occupancy: float
    gap_with_stationary: float
    tau_gap: float


def matr_diff_check(chain: InducedChain, mu, gamma: float) -> MatrDiffReport:
    gamma = check_gamma(gamma)
    _require_ergodic(chain)
    n = chain.n_states
    e = np.ones(n)
    d = linalg.stationary_distribution(chain.transition)
    d_gamma = occupancy(chain, mu, gamma).dist
    res = resolvent(chain, gamma)
    dg = discounted_group_inverse(chain, mu, gamma).d_matrix
    base = res + np.outer(e, d_gamma @ (np.eye(n) - res))
    return MatrDiffReport(
        gap_with_occupancy=float(np.abs(dg - (base - np.outer(e, d_gamma))).max()),
        gap_with_stationary=float(np.abs(dg - (base - np.outer(e, d))).max()),
        tau_gap=abs(tau1(dg).value - tau1(res).value),
    )


@dataclass(frozen=True)
class SpectralBounds:
    tau1: float
    trace_bound: float
    cardinality_bound: float
    lambda2_modulus: float


def spectral_bounds(chain: InducedChain, mu, gamma: float) -> SpectralBounds:
    """``tau_1[D_gamma] <= trace(D_gamma) <= (n - 1) / (1 - gamma |lambda_2|)``.

    The trace equals ``sum_{i>=2} 1 / (1 - gamma lambda_i)`` and is real even
    when the subdominant spectrum is complex.
    """
    gamma = check_gamma(gamma)
    _require_ergodic(chain)
    dg = discounted_group_inverse(chain, mu, gamma).d_matrix
    lam2 = linalg.subdominant_modulus(chain.transition)
    n = chain.n_states
    return SpectralBounds(
        tau1=tau1(dg).value,
        trace_bound=float(np.trace(dg)),
        cardinality_bound=(n - 1) / (1.0 - gamma * lam2),
        lambda2_modulus=lam2,
    )


@dataclass(frozen=True)
class MinorizationCertificate:
    """``(P^ell)(x, y) >= delta * mu(y)`` for every x and every y in the support of mu."""

    ell: int
    delta: float
    gamma: float

    @property
    def bound_value(self) -> float:
        g = self.gamma
        return 2.0 * self.ell / (1.0 - g + g**self.ell * self.delta)

    def holds_for(self, p, mu) -> bool:
        q = np.linalg.matrix_power(np.asarray(p, dtype=float), self.ell)
        return bool(np.all(q >= self.delta * np.asarray(mu)[None, :] - 1e-15))


def minorization_bound(
    chain: InducedChain, mu, gamma: float, ell_cap: int | None = None
) -> MinorizationCertificate:
    """Smallest ``ell`` with a positive minorization constant, and the largest such ``delta``.

    Columns with ``mu(y) = 0`` impose no constraint. ``ell_cap`` defaults to
    ``2 n^2``.
    """
    gamma = check_gamma(gamma, allow_one=True)
    mu = np.asarray(mu, dtype=float)
    n = chain.n_states
    cap = 2 * n * n if ell_cap is None else int(ell_cap)
    support = np.flatnonzero(mu > 0.0)
    p = chain.transition
    q = np.eye(n)
    for ell in range(1, cap + 1):
        q = q @ p
        cols = q[:, support]
        if np.all(cols > 0.0):
            delta = float((cols / mu[support]).min())
            return MinorizationCertificate(ell, min(delta, 1.0), gamma)
    raise MinorizationError(f"no ell <= {cap} gives a positive minorization constant")

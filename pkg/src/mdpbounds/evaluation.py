"""Exact policy evaluation, discounted and long-run average."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import ChainStructureError
from .mdp import Mdp, Policy, chain_diagnostics, induce_chain
from .occupancy import check_gamma

DEFAULT_LIMIT_SCHEDULE = tuple(1.0 - 10.0**-k for k in range(1, 7))
MONOTONE_NOISE = 1e-12


def _readonly(*arrays):
    for a in arrays:
        a.setflags(write=False)


@dataclass(frozen=True)
class DiscountedEval:
    gamma: float
    v: np.ndarray
    q: np.ndarray
    adv: np.ndarray
    eta: float

    def bellman_residual(self, mdp: Mdp, policy: Policy) -> float:
        chain = induce_chain(mdp, policy)
        return float(np.abs(self.v - (chain.reward + self.gamma * chain.transition @ self.v)).max())


@dataclass(frozen=True)
class AverageEval:
    eta: float
    v: np.ndarray
    q: np.ndarray
    adv: np.ndarray
    stationary: np.ndarray
    method: str = "group_inverse"

    def poisson_residual(self, mdp: Mdp, policy: Policy) -> float:
        chain = induce_chain(mdp, policy)
        rhs = chain.reward - self.eta + chain.transition @ self.v
        return float(np.abs(self.v - rhs).max())


def eval_discounted(mdp: Mdp, policy: Policy, gamma: float) -> DiscountedEval:
    """``V = (I - gamma P)^{-1} r``, ``Q = r + gamma P V``, ``A = Q - V``, ``eta = (1 - gamma) mu^T V``.

    ``V`` is assembled as ``c / (1 - gamma) + (I - gamma P)^{-1}(r - c)`` with
    ``c`` the discounted average reward, so the solved part stays O(1) and
    keeps its precision when ``gamma`` is close to one.
    """
    gamma = check_gamma(gamma)
    chain = induce_chain(mdp, policy)
    n = mdp.n_states
    lu = linalg.LUFactor(np.eye(n) - gamma * chain.transition)
    # (1 - gamma) mu^T (I - gamma P)^{-1} sums to one exactly; normalising by
    # the computed sum instead of multiplying by (1 - gamma) removes roundoff
    d_gamma = lu.solve(mdp.initial_dist, transpose=True)
    d_gamma /= d_gamma.sum()
    c = float(d_gamma @ chain.reward)
    h = lu.solve(chain.reward - c)
    v = h + c / (1.0 - gamma)
    adv = mdp.reward + gamma * np.einsum("xay,y->xa", mdp.transition, h) - h[:, None] - c
    q = adv + v[:, None]
    eta = float((1.0 - gamma) * (mdp.initial_dist @ h) + c)
    _readonly(v, q, adv)
    return DiscountedEval(gamma, v, q, adv, eta)


def eval_average(mdp: Mdp, policy: Policy) -> AverageEval:
    """Gain, bias (normalised so that ``d^T V = 0``) and relative Q/advantage.

    Aperiodic unichain chains go through the group inverse ``V = D r``; a
    periodic recurrent class falls back to solving the Poisson equation
    bordered by the normalisation.
    """
    chain = induce_chain(mdp, policy)
    p, r = chain.transition, chain.reward
    n = mdp.n_states
    diag = chain_diagnostics(p)
    if not diag.unichain:
        raise ChainStructureError(
            f"average-reward evaluation needs a unichain policy; found "
            f"{len(diag.recurrent_classes)} recurrent classes",
            diag,
        )
    d = linalg.stationary_distribution(p)
    eta = float(d @ r)
    if diag.aperiodic:
        gi = linalg.group_inverse(p, d, check_structure=False)
        v = gi.d_matrix @ r
        method = "group_inverse"
    else:
        v = linalg.solve(np.eye(n) - p + np.outer(np.ones(n), d), r - eta)
        method = "poisson"
    q = mdp.reward - eta + np.einsum("xay,y->xa", mdp.transition, v)
    adv = q - v[:, None]
    d = d.copy()
    _readonly(v, q, adv, d)
    return AverageEval(eta, v, q, adv, d, method)


@dataclass(frozen=True)
class LimitRow:
    gamma: float
    eta_gap: float
    v_gap: float
    q_gap: float
    adv_gap: float


@dataclass(frozen=True)
class LimitReport:
    rows: tuple[LimitRow, ...]
    periodic: bool
    tail: int = 3
    nonmonotone: tuple[str, ...] = field(default=())

    def series(self, name: str) -> list[float]:
        return [getattr(r, name) for r in self.rows]

    @property
    def final(self) -> LimitRow:
        return self.rows[-1]


def _nonincreasing(values, tail: int) -> bool:
    vals = values[-tail:]
    return all(b <= a + MONOTONE_NOISE for a, b in zip(vals, vals[1:]))


def limit_check(
    mdp: Mdp, policy: Policy, gamma_schedule=DEFAULT_LIMIT_SCHEDULE, tail: int = 3
) -> LimitReport:
    """Gaps between the discounted quantities and their average-reward limits along ``gamma -> 1``.

    Periodic chains are reported, not rejected; their advantage gaps may
    oscillate.
    """
    schedule = [check_gamma(g) for g in gamma_schedule]
    if any(b <= a for a, b in zip(schedule, schedule[1:])):
        raise ValueError("gamma schedule must be strictly increasing")
    avg = eval_average(mdp, policy)
    rows = []
    for g in schedule:
        disc = eval_discounted(mdp, policy, g)
        shift = avg.eta / (1.0 - g)
        rows.append(
            LimitRow(
                gamma=g,
                eta_gap=abs(disc.eta - avg.eta),
                v_gap=float(np.abs(disc.v - shift - avg.v).max()),
                q_gap=float(np.abs(disc.q - shift - avg.q).max()),
                adv_gap=float(np.abs(disc.adv - avg.adv).max()),
            )
        )
    names = ("eta_gap", "v_gap", "q_gap", "adv_gap")
    bad = tuple(
        name for name in names if not _nonincreasing([getattr(r, name) for r in rows], tail)
    )
    return LimitReport(tuple(rows), periodic=avg.method == "poisson", tail=tail, nonmonotone=bad)

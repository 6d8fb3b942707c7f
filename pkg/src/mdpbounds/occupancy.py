"""Discounted future-state distribution and the restart ("Google") matrix.

The distribution is available three ways: a truncated geometric series, a
single resolvent solve, and the stationary vector of
``gamma * P + (1 - gamma) * e mu^T``. The resolvent is the default; the
other two exist to cross-check it.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import linalg
from .errors import ConsistencyError, UnreachableStatesWarning, ValidationError
from .mdp import InducedChain, _reachable_from

Method = Literal["resolvent", "series", "stationary"]
SERIES_TAIL = 1e-14
SERIES_MAX_TERMS = 1_000_000
AGREEMENT_TOL = 1e-8


def check_gamma(gamma: float, allow_one: bool = False) -> float:
    gamma = float(gamma)
    upper_ok = gamma <= 1.0 if allow_one else gamma < 1.0
    if not (gamma >= 0.0 and upper_ok):
        raise ValidationError(f"discount factor {gamma!r} outside [0, 1)", "gamma")
    return gamma


@dataclass(frozen=True)
class DiscountedTransition:
    gamma: float
    matrix: np.ndarray


@dataclass(frozen=True)
class DiscountedOccupancy:
    gamma: float
    dist: np.ndarray
    method: str

    def stationarity_residual(self, transition: DiscountedTransition) -> float:
        return float(np.abs(self.dist @ transition.matrix - self.dist).sum())


def discounted_transition(chain: InducedChain, mu, gamma: float) -> DiscountedTransition:
    gamma = check_gamma(gamma)
    mu = np.asarray(mu, dtype=float)
    m = gamma * chain.transition + (1.0 - gamma) * np.outer(np.ones(chain.n_states), mu)
    m.setflags(write=False)
    return DiscountedTransition(gamma, m)


def series_terms(gamma: float) -> int:
    """Smallest T with gamma**(T+1) <= 1e-14, capped at one million."""
    if gamma == 0.0:
        return 0
    t = math.ceil(math.log(SERIES_TAIL) / math.log(gamma)) - 1
    return max(0, min(t, SERIES_MAX_TERMS))


def _warn_unreachable(chain: InducedChain, mu) -> None:
    reach = _reachable_from(chain.transition > 0.0, np.flatnonzero(np.asarray(mu) > 0.0))
    if len(reach) < chain.n_states:
        missing = sorted(set(range(chain.n_states)) - reach)
        warnings.warn(
            f"states {missing} are unreachable from the start distribution; "
            "their discounted mass is 0",
            UnreachableStatesWarning,
            stacklevel=3,
        )


def occupancy(
    chain: InducedChain, mu, gamma: float, method: Method = "resolvent"
) -> DiscountedOccupancy:
    gamma = check_gamma(gamma)
    mu = np.asarray(mu, dtype=float)
    n = chain.n_states
    p = chain.transition
    _warn_unreachable(chain, mu)
    if method == "resolvent":
        dist = linalg.solve((np.eye(n) - gamma * p).T, mu)
        dist /= dist.sum()  # equals multiplying by (1 - gamma), with less roundoff
    elif method == "series":
        # sum_{t < 2^k} mu^T (gamma P)^t by doubling; 2^k - 1 >= T terms
        dist = mu.copy()
        power = gamma * p
        covered = 1
        while covered < series_terms(gamma) + 1:
            dist = dist + dist @ power
            power = power @ power
            covered *= 2
        dist *= 1.0 - gamma
    elif method == "stationary":
        dist = linalg.stationary_distribution(discounted_transition(chain, mu, gamma).matrix)
    else:
        raise ValueError(f"unknown occupancy method {method!r}")
    dist.setflags(write=False)
    return DiscountedOccupancy(gamma, dist, method)


def all_occupancies(
    chain: InducedChain, mu, gamma: float, tol: float = AGREEMENT_TOL
) -> dict[str, DiscountedOccupancy]:
    """Compute every method and raise :class:`ConsistencyError` if any pair differs by more than ``tol`` in l1."""
    out = {m: occupancy(chain, mu, gamma, m) for m in ("resolvent", "series", "stationary")}
    names = list(out)
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            gap = float(np.abs(out[a].dist - out[b].dist).sum())
            if gap > tol:
                raise ConsistencyError(f"occupancy methods {a} and {b} differ by {gap:.3e}")
    return out

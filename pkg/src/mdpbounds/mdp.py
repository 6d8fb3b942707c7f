"""Finite MDP data model, induced Markov chains, chain diagnostics and Garnet instances.

Arrays are stored read-only so the dataclasses can be shared freely between
threads and worker processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import ValidationError

PROB_TOL = 1e-12


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def _check_distribution_rows(rows: np.ndarray, name: str) -> None:
    """Raise on the first row that is negative or does not sum to one."""
    if not np.all(np.isfinite(rows)):
        idx = np.argwhere(~np.isfinite(rows))[0]
        raise ValidationError("non-finite probability", f"{name}{list(idx)}")
    flat = rows.reshape(-1, rows.shape[-1])
    neg = np.argwhere(flat < 0.0)
    if neg.size:
        r = int(neg[0][0])
        idx = np.unravel_index(r, rows.shape[:-1]) if rows.ndim > 1 else ()
        raise ValidationError(
            f"negative probability {flat[r].min()!r}", f"{name}{[int(i) for i in idx]}"
        )
    sums = flat.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > PROB_TOL)
    if bad.size:
        r = int(bad[0])
        idx = np.unravel_index(r, rows.shape[:-1]) if rows.ndim > 1 else ()
        raise ValidationError(
            f"row sums to {sums[r]!r}, expected 1", f"{name}{[int(i) for i in idx]}"
        )


@dataclass(frozen=True, eq=False)
class Mdp:
    """Finite MDP ``(X, A, P, r, mu)``.

    ``transition[x, a, y]`` is the probability of moving to ``y`` after playing
    ``a`` in ``x``; ``reward[x, a]`` is the immediate reward; ``initial_dist`` is
    the start-state distribution.
    """

    transition: np.ndarray
    reward: np.ndarray
    initial_dist: np.ndarray

    def __post_init__(self):
        t = _frozen(self.transition)
        r = _frozen(self.reward)
        mu = _frozen(self.initial_dist)
        if t.ndim != 3 or t.shape[0] == 0 or t.shape[1] == 0 or t.shape[0] != t.shape[2]:
            raise ValidationError(f"expected shape (n, A, n), got {t.shape}", "transition")
        n, m, _ = t.shape
        if r.shape != (n, m):
            raise ValidationError(f"expected shape {(n, m)}, got {r.shape}", "reward")
        if mu.shape != (n,):
            raise ValidationError(f"expected shape {(n,)}, got {mu.shape}", "initial_dist")
        _check_distribution_rows(t, "transition")
        if not np.all(np.isfinite(r)):
            raise ValidationError("non-finite reward", "reward")
        _check_distribution_rows(mu, "initial_dist")
        object.__setattr__(self, "transition", t)
        object.__setattr__(self, "reward", r)
        object.__setattr__(self, "initial_dist", mu)

    @property
    def n_states(self) -> int:
        return self.transition.shape[0]

    @property
    def n_actions(self) -> int:
        return self.transition.shape[1]

    def with_reward(self, reward) -> "Mdp":
        return Mdp(self.transition, reward, self.initial_dist)

    def with_initial_dist(self, mu) -> "Mdp":
        return Mdp(self.transition, self.reward, mu)

    def __eq__(self, other):
        if not isinstance(other, Mdp):
            return NotImplemented
        return (
            np.array_equal(self.transition, other.transition)
            and np.array_equal(self.reward, other.reward)
            and np.array_equal(self.initial_dist, other.initial_dist)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Policy:
    """Stationary randomized policy, ``probs[x, a] = pi(a | x)``."""

    probs: np.ndarray

    def __post_init__(self):
        p = _frozen(self.probs)
        if p.ndim != 2 or 0 in p.shape:
            raise ValidationError(f"expected a non-empty 2-d table, got shape {p.shape}", "probs")
        _check_distribution_rows(p, "probs")
        object.__setattr__(self, "probs", p)

    @property
    def n_states(self) -> int:
        return self.probs.shape[0]

    @property
    def n_actions(self) -> int:
        return self.probs.shape[1]

    @classmethod
    def uniform(cls, n_states: int, n_actions: int) -> "Policy":
        return cls(np.full((n_states, n_actions), 1.0 / n_actions))

    @classmethod
    def deterministic(cls, actions, n_actions: int) -> "Policy":
        actions = np.asarray(actions, dtype=int)
        probs = np.zeros((actions.size, n_actions))
        probs[np.arange(actions.size), actions] = 1.0
        return cls(probs)

    @classmethod
    def random(cls, n_states: int, n_actions: int, rng: np.random.Generator) -> "Policy":
        """Rows drawn uniformly from the action simplex."""
        return cls(rng.dirichlet(np.ones(n_actions), size=n_states))

    def mix(self, other: "Policy", alpha: float) -> "Policy":
        """Return ``(1 - alpha) * self + alpha * other``."""
        if not 0.0 <= alpha <= 1.0:
            raise ValidationError(f"mixture weight {alpha!r} outside [0, 1]", "alpha")
        return Policy((1.0 - alpha) * self.probs + alpha * other.probs)

    def __eq__(self, other):
        if not isinstance(other, Policy):
            return NotImplemented
        return np.array_equal(self.probs, other.probs)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class InducedChain:
    """State-to-state chain ``P^pi`` with expected one-step reward ``r^pi``."""

    transition: np.ndarray
    reward: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "transition", _frozen(self.transition))
        object.__setattr__(self, "reward", _frozen(self.reward))

    @property
    def n_states(self) -> int:
        return self.transition.shape[0]


def check_compatible(mdp: Mdp, policy: Policy) -> None:
    if policy.probs.shape != (mdp.n_states, mdp.n_actions):
        raise ValidationError(
            f"policy shape {policy.probs.shape} does not match MDP "
            f"({mdp.n_states} states, {mdp.n_actions} actions)",
            "probs",
        )


def induce_chain(mdp: Mdp, policy: Policy) -> InducedChain:
    check_compatible(mdp, policy)
    p = np.einsum("xa,xay->xy", policy.probs, mdp.transition)
    r = np.einsum("xa,xa->x", policy.probs, mdp.reward)
    return InducedChain(p, r)


# --- chain structure -------------------------------------------------------


@dataclass(frozen=True)
class ChainDiagnostics:
    """Graph-level structure of a stochastic matrix.

    ``unichain`` refers to the whole state space (exactly one closed
    communicating class); ``reachable_unichain`` restricts the question to the
    states reachable from the support of the start distribution.
    """

    n_states: int
    reachable: tuple[int, ...]
    recurrent_classes: tuple[tuple[int, ...], ...]
    periods: tuple[int, ...]
    unichain: bool
    reachable_unichain: bool
    irreducible: bool
    aperiodic: bool

    @property
    def all_reachable(self) -> bool:
        return len(self.reachable) == self.n_states

    @property
    def transient(self) -> tuple[int, ...]:
        rec = {s for c in self.recurrent_classes for s in c}
        return tuple(s for s in range(self.n_states) if s not in rec)

    def summary(self) -> dict:
        return {
            "unichain": self.unichain,
            "reachable_unichain": self.reachable_unichain,
            "irreducible": self.irreducible,
            "aperiodic": self.aperiodic,
            "periods": list(self.periods),
            "recurrent_classes": [list(c) for c in self.recurrent_classes],
            "unreachable": [s for s in range(self.n_states) if s not in set(self.reachable)],
        }


def _reachable_from(adj: np.ndarray, sources) -> set[int]:
    seen = set(int(s) for s in sources)
    stack = list(seen)
    while stack:
        u = stack.pop()
        for v in np.flatnonzero(adj[u]):
            v = int(v)
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def _period(adj: np.ndarray, members: tuple[int, ...]) -> int:
    """gcd of cycle lengths in a strongly connected class via BFS levels."""
    inside = set(members)
    root = members[0]
    level = {root: 0}
    queue = [root]
    g = 0
    for u in queue:
        for v in np.flatnonzero(adj[u]):
            v = int(v)
            if v not in inside:
                continue
            if v not in level:
                level[v] = level[u] + 1
                queue.append(v)
            else:
                g = math.gcd(g, level[u] + 1 - level[v])
    return abs(g) if g else 0


def chain_diagnostics(p, start=None) -> ChainDiagnostics:
    """Classify the positive-transition graph of ``p``.

    ``start`` is a distribution whose support seeds the reachability search;
    all states are used when omitted.
    """
    p = np.asarray(p, dtype=float)
    n = p.shape[0]
    adj = p > 0.0
    sources = range(n) if start is None else np.flatnonzero(np.asarray(start) > 0.0)
    reachable = _reachable_from(adj, sources)

    n_comp, labels = connected_components(adj.astype(np.int8), directed=True, connection="strong")
    classes = [tuple(int(i) for i in np.flatnonzero(labels == c)) for c in range(n_comp)]
    closed = []
    for members in classes:
        out = adj[list(members)].any(axis=0)
        out[list(members)] = False
        if not out.any():
            closed.append(members)
    closed.sort()
    periods = tuple(_period(adj, c) for c in closed)
    reach_closed = [c for c in closed if c[0] in reachable]
    return ChainDiagnostics(
        n_states=n,
        reachable=tuple(sorted(reachable)),
        recurrent_classes=tuple(closed),
        periods=periods,
        unichain=len(closed) == 1,
        reachable_unichain=len(reach_closed) == 1,
        irreducible=n_comp == 1,
        aperiodic=all(per == 1 for per in periods),
    )


def validate_reachability(mdp: Mdp, policy: Policy) -> ChainDiagnostics:
    """Diagnostics for the chain a policy induces, seeded from the MDP's start distribution."""
    return chain_diagnostics(induce_chain(mdp, policy).transition, mdp.initial_dist)


# --- random instances ------------------------------------------------------


def garnet(
    n_states: int,
    n_actions: int,
    branching: int,
    reward_sparsity: float = 0.0,
    seed: int | None = 0,
) -> Mdp:
    """Garnet random MDP.

    Every (state, action) pair gets ``branching`` distinct successors whose
    probabilities are a uniform draw from the simplex. Rewards are
    Uniform[0, 1], each zeroed with probability ``reward_sparsity``. The start
    distribution is uniform.
    """
    if n_states < 1 or n_actions < 1:
        raise ValidationError("n_states and n_actions must be positive", "garnet")
    if not 1 <= branching <= n_states:
        raise ValidationError(f"branching {branching} outside [1, {n_states}]", "garnet")
    if not 0.0 <= reward_sparsity <= 1.0:
        raise ValidationError(f"reward_sparsity {reward_sparsity} outside [0, 1]", "garnet")
    rng = np.random.default_rng(seed)
    t = np.zeros((n_states, n_actions, n_states))
    for x in range(n_states):
        for a in range(n_actions):
            succ = rng.choice(n_states, size=branching, replace=False)
            t[x, a, succ] = rng.dirichlet(np.ones(branching))
    reward = rng.uniform(0.0, 1.0, size=(n_states, n_actions))
    reward[rng.uniform(size=reward.shape) < reward_sparsity] = 0.0
    mu = np.full(n_states, 1.0 / n_states)
    return Mdp(t, reward, mu)


"""Conservative mixture-policy improvement driven by the lower bounds.

Each iteration mixes the current policy with its greedy policy,
``pi_alpha = (1 - alpha) pi + alpha * greedy``, and picks the grid weight
whose refined lower bound on ``eta(pi_alpha) - eta(pi)`` is largest. This is
one reasonable way to turn the bound into a step-size rule; it is not an
algorithm taken from the literature.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bounds import BoundReport, refined_bound
from .errors import ChainStructureError
from .evaluation import DiscountedEval, eval_discounted
from .mdp import Mdp, Policy, induce_chain
from .occupancy import occupancy

DEFAULT_ALPHA_GRID = tuple(round(0.05 * k, 2) for k in range(21))
TIE_TOL = 1e-12


def greedy_policy(ev: DiscountedEval) -> Policy:
    """Deterministic argmax of the advantage; near-ties (within 1e-12) go to the lowest action index."""
    adv = np.asarray(ev.adv)
    best = adv.max(axis=1, keepdims=True)
    actions = np.argmax(adv >= best - TIE_TOL, axis=1)
    return Policy.deterministic(actions, adv.shape[1])


@dataclass(frozen=True)
class GridPoint:
    alpha: float
    report: BoundReport | None
    skipped: str | None = None


@dataclass(frozen=True)
class ImprovementStep:
    alpha: float
    candidate: Policy
    policy: Policy
    certified_gain_classical: float
    certified_gain_refined: float
    realized_gain: float
    alpha_classical: float
    eta_before: float
    grid: tuple[GridPoint, ...] = field(repr=False, default=())

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "alpha_classical": self.alpha_classical,
            "certified_gain_classical": self.certified_gain_classical,
            "certified_gain_refined": self.certified_gain_refined,
            "realized_gain": self.realized_gain,
            "eta_before": self.eta_before,
            "eta_after": self.eta_before + self.realized_gain,
            "skipped": [
                {"alpha": g.alpha, "reason": g.skipped} for g in self.grid if g.skipped is not None
            ],
        }


def _argmax_alpha(points, key) -> GridPoint:
    # largest certificate; ties go to the smaller step
    best = None
    for gp in points:
        val = key(gp.report)
        if best is None or val > key(best.report) + TIE_TOL:
            best = gp
    return best


def line_search(
    mdp: Mdp, pi: Policy, gamma: float, alpha_grid=DEFAULT_ALPHA_GRID
) -> ImprovementStep:
    grid = sorted(float(a) for a in alpha_grid)
    if not grid or grid[0] != 0.0 or grid[-1] > 1.0:
        raise ValueError("alpha grid must lie in [0, 1] and include 0")
    ev = eval_discounted(mdp, pi, gamma)
    candidate = greedy_policy(ev)
    points = []
    for alpha in grid:
        mixed = pi.mix(candidate, alpha)
        try:
            rep = refined_bound(mdp, pi, mixed, gamma)
        except ChainStructureError as exc:
            points.append(GridPoint(alpha, None, str(exc)))
            continue
        if rep.refined_rhs is None:
            points.append(GridPoint(alpha, None, rep.unavailable))
            continue
        points.append(GridPoint(alpha, rep))
    usable = [gp for gp in points if gp.report is not None]
    if not usable or usable[0].alpha != 0.0:
        raise ChainStructureError("refined bound unavailable at alpha = 0")
    chosen = _argmax_alpha(usable, lambda r: r.refined_rhs)
    by_classical = _argmax_alpha(usable, lambda r: r.classical_rhs)
    rep = chosen.report
    step = ImprovementStep(
        alpha=chosen.alpha,
        candidate=candidate,
        policy=pi.mix(candidate, chosen.alpha),
        certified_gain_classical=rep.classical_rhs,
        certified_gain_refined=rep.refined_rhs,
        realized_gain=rep.true_lhs,
        alpha_classical=by_classical.alpha,
        eta_before=ev.eta,
        grid=tuple(points),
    )
    return step


@dataclass(frozen=True)
class ImprovementRun:
    gamma: float
    steps: tuple[ImprovementStep, ...]
    final_policy: Policy
    converged: bool

    @property
    def eta_trajectory(self) -> list[float]:
        if not self.steps:
            return []
        return [self.steps[0].eta_before] + [s.eta_before + s.realized_gain for s in self.steps]


def greedy_surrogate(mdp: Mdp, pi: Policy, gamma: float) -> float:
    """``E_{x ~ d_gamma^pi}[max_a A(x, a)]``, the surrogate of the full greedy step."""
    ev = eval_discounted(mdp, pi, gamma)
    d = occupancy(induce_chain(mdp, pi), mdp.initial_dist, gamma).dist
    return float(d @ np.asarray(ev.adv).max(axis=1))


def improve(
    mdp: Mdp,
    pi: Policy,
    gamma: float,
    iterations: int = 10,
    alpha_grid=DEFAULT_ALPHA_GRID,
    stop_tol: float = 1e-10,
) -> ImprovementRun:
    """Repeat :func:`line_search` until no step is certified or the greedy advantage vanishes."""
    steps = []
    current = pi
    converged = False
    for _ in range(iterations):
        step = line_search(mdp, current, gamma, alpha_grid)
        steps.append(step)
        if step.alpha == 0.0:
            converged = greedy_surrogate(mdp, current, gamma) <= stop_tol
            break
        current = step.policy
    else:
        converged = greedy_surrogate(mdp, current, gamma) <= stop_tol
    return ImprovementRun(float(gamma), tuple(steps), current, converged)

"""Policy-improvement lower bounds and the checks behind them.

Three bounds on the performance gap between an old policy ``pi`` and a new
policy ``pi_tilde`` share the same surrogate term

    E_{x ~ d_pi, a ~ pi_tilde}[A_pi(x, a)]

and differ in the penalty on ``E_{x ~ d_pi}[TV(pi_tilde(.|x), pi(.|x))]``:

* classical (discounted):  ``2 gamma eps / (1 - gamma)``
* refined (discounted):    ``2 gamma eps tau_1[D_gamma^{pi_tilde}]``
* average reward:          ``2 eps tau_1[D^{pi_tilde}]``

where ``D`` is a group inverse and ``tau_1`` the one-norm ergodicity
coefficient. The refined penalty stays finite as ``gamma -> 1``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import linalg
from .ergodicity import discounted_group_inverse, tau1
from .errors import ChainStructureError, ConsistencyError, InfeasibleWitnessError
from .evaluation import eval_average, eval_discounted
from .mdp import Mdp, Policy, chain_diagnostics, check_compatible, induce_chain
from .occupancy import check_gamma, discounted_transition, occupancy

SLACK_TOL = 1e-9


def tv_per_state(pi: Policy, pi_tilde: Policy) -> np.ndarray:
    if pi.probs.shape != pi_tilde.probs.shape:
        raise ValueError(f"policy shapes differ: {pi.probs.shape} vs {pi_tilde.probs.shape}")
    return 0.5 * np.abs(pi_tilde.probs - pi.probs).sum(axis=1)


@dataclass(frozen=True)
class BoundReport:
    """One row of the bound comparison.

    ``gamma`` is ``None`` for the average-reward report, which has no
    classical bound. ``refined_rhs`` is ``None`` when ``D^{pi_tilde}`` is not
    available (``unavailable`` then says why).
    """

    gamma: float | None
    surrogate: float
    epsilon: float
    tv_mean: float
    tau1_value: float | None
    classical_rhs: float | None
    refined_rhs: float | None
    true_lhs: float
    unavailable: str | None = None

    @property
    def kind(self) -> str:
        return "average" if self.gamma is None else "discounted"

    @property
    def classical_slack(self) -> float | None:
        return None if self.classical_rhs is None else self.true_lhs - self.classical_rhs

    @property
    def refined_slack(self) -> float | None:
        return None if self.refined_rhs is None else self.true_lhs - self.refined_rhs

    def violations(self, tol: float = SLACK_TOL) -> list[str]:
        """Names of the contracts this report breaks; empty when everything holds."""
        out = []
        for name in ("classical_slack", "refined_slack"):
            s = getattr(self, name)
            if s is not None and s < -tol:
                out.append(name)
        if (
            self.classical_rhs is not None
            and self.refined_rhs is not None
            and self.refined_rhs < self.classical_rhs - tol
        ):
            out.append("dominance")
        return out

    def to_dict(self) -> dict:
        out = asdict(self)
        out["kind"] = self.kind
        out["classical_slack"] = self.classical_slack
        out["refined_slack"] = self.refined_slack
        return out


def _surrogate_terms(adv: np.ndarray, weights: np.ndarray, pi: Policy, pi_tilde: Policy):
    expected_adv = np.einsum("xa,xa->x", pi_tilde.probs, adv)
    surrogate = float(weights @ expected_adv)
    epsilon = float(np.abs(expected_adv).max())
    tv_mean = float(weights @ tv_per_state(pi, pi_tilde))
    return surrogate, epsilon, tv_mean


def _discounted_report(mdp: Mdp, pi: Policy, pi_tilde: Policy, gamma: float, refined: bool):
    gamma = check_gamma(gamma)
    check_compatible(mdp, pi)
    check_compatible(mdp, pi_tilde)
    old = eval_discounted(mdp, pi, gamma)
    new = eval_discounted(mdp, pi_tilde, gamma)
    chain = induce_chain(mdp, pi)
    d_old = occupancy(chain, mdp.initial_dist, gamma).dist
    surrogate, epsilon, tv_mean = _surrogate_terms(old.adv, d_old, pi, pi_tilde)
    penalty_classical = 2.0 * gamma * epsilon / (1.0 - gamma) * tv_mean
    tau, refined_rhs, reason = None, None, None
    if refined:
        new_chain = induce_chain(mdp, pi_tilde)
        pg = discounted_transition(new_chain, mdp.initial_dist, gamma).matrix
        if not chain_diagnostics(pg).irreducible:
            reason = "discounted chain of the new policy is reducible (start distribution lacks reach)"
        else:
            dg = discounted_group_inverse(new_chain, mdp.initial_dist, gamma).d_matrix
            tau = tau1(dg).value
            refined_rhs = surrogate - 2.0 * gamma * epsilon * tau * tv_mean
    return BoundReport(
        gamma=gamma,
        surrogate=surrogate,
        epsilon=epsilon,
        tv_mean=tv_mean,
        tau1_value=tau,
        classical_rhs=surrogate - penalty_classical,
        refined_rhs=refined_rhs,
        true_lhs=new.eta - old.eta,
        unavailable=reason if refined else "not requested",
    )


def classical_bound(mdp: Mdp, pi: Policy, pi_tilde: Policy, gamma: float) -> BoundReport:
    """Bound with the ``1 / (1 - gamma)`` penalty; the refined fields are left empty."""
    return _discounted_report(mdp, pi, pi_tilde, gamma, refined=False)


def refined_bound(mdp: Mdp, pi: Policy, pi_tilde: Policy, gamma: float) -> BoundReport:
    """Both discounted bounds side by side with the true return gap.

    The penalty uses tau_1 of the *new* policy's discounted group inverse,
    while the surrogate, epsilon and TV expectations are taken under the
    *old* policy's discounted occupancy.
    """
    return _discounted_report(mdp, pi, pi_tilde, gamma, refined=True)


def average_bound(mdp: Mdp, pi: Policy, pi_tilde: Policy) -> BoundReport:
    check_compatible(mdp, pi)
    check_compatible(mdp, pi_tilde)
    old = eval_average(mdp, pi)
    new = eval_average(mdp, pi_tilde)
    surrogate, epsilon, tv_mean = _surrogate_terms(old.adv, old.stationary, pi, pi_tilde)
    gi = linalg.group_inverse(induce_chain(mdp, pi_tilde).transition, new.stationary)
    tau = tau1(gi.d_matrix).value
    return BoundReport(
        gamma=None,
        surrogate=surrogate,
        epsilon=epsilon,
        tv_mean=tv_mean,
        tau1_value=tau,
        classical_rhs=None,
        refined_rhs=surrogate - 2.0 * epsilon * tau * tv_mean,
        true_lhs=new.eta - old.eta,
    )


def gamma_sweep(mdp: Mdp, pi: Policy, pi_tilde: Policy, gammas) -> list[BoundReport]:
    """One refined report per discount factor followed by the average-reward report.

    The average report is dropped when either policy's chain is not unichain
    and aperiodic.
    """
    reports = [refined_bound(mdp, pi, pi_tilde, g) for g in gammas]
    try:
        reports.append(average_bound(mdp, pi, pi_tilde))
    except ChainStructureError:
        pass
    return reports


# --- proof-level checks ----------------------------------------------------


@dataclass(frozen=True)
class PerturbationResidual:
    """l1 residuals of the occupancy perturbation identity in both sign conventions.

    ``residual`` checks ``d_old - d_new = gamma d_old^T (P_old - P_new) D_new``,
    which follows from ``d_old^T (I - P_gamma^new) D_new = d_old^T - d_new^T``.
    ``opposite_sign`` checks ``d_new - d_old`` against the same right-hand side
    and is therefore off by exactly ``2 ||d_new - d_old||_1``.
    """

    residual: float
    opposite_sign: float
    occupancy_gap: float


def perturbation_identity_check(
    mdp: Mdp, pi: Policy, pi_tilde: Policy, gamma: float
) -> PerturbationResidual:
    gamma = check_gamma(gamma)
    old, new = induce_chain(mdp, pi), induce_chain(mdp, pi_tilde)
    mu = mdp.initial_dist
    d_old = occupancy(old, mu, gamma).dist
    d_new = occupancy(new, mu, gamma).dist
    dg = discounted_group_inverse(new, mu, gamma).d_matrix
    rhs = gamma * (d_old @ (old.transition - new.transition) @ dg)
    return PerturbationResidual(
        residual=float(np.abs((d_old - d_new) - rhs).sum()),
        opposite_sign=float(np.abs((d_new - d_old) - rhs).sum()),
        occupancy_gap=float(np.abs(d_new - d_old).sum()),
    )


@dataclass(frozen=True)
class OccupancyGapChain:
    """``||d_new - d_old||_1 <= gamma tau ||(P_old - P_new)^T d_old||_1 <= 2 gamma tau E[TV]``."""

    occupancy_gap: float
    contraction_term: float
    tv_term: float

    def ordered(self, tol: float = SLACK_TOL) -> bool:
        return (
            self.occupancy_gap <= self.contraction_term + tol
            and self.contraction_term <= self.tv_term + tol
        )


def occupancy_gap_chain(
    mdp: Mdp, pi: Policy, pi_tilde: Policy, gamma: float, strict: bool = True
) -> OccupancyGapChain:
    gamma = check_gamma(gamma)
    old, new = induce_chain(mdp, pi), induce_chain(mdp, pi_tilde)
    mu = mdp.initial_dist
    d_old = occupancy(old, mu, gamma).dist
    d_new = occupancy(new, mu, gamma).dist
    tau = tau1(discounted_group_inverse(new, mu, gamma).d_matrix).value
    moved = (old.transition - new.transition).T @ d_old
    tv_mean = float(d_old @ tv_per_state(pi, pi_tilde))
    out = OccupancyGapChain(
        occupancy_gap=float(np.abs(d_new - d_old).sum()),
        contraction_term=gamma * tau * float(np.abs(moved).sum()),
        tv_term=2.0 * gamma * tau * tv_mean,
    )
    if strict and not out.ordered():
        raise ConsistencyError(f"occupancy gap chain out of order: {out}")
    return out


@dataclass(frozen=True)
class TightnessWitness:
    p: np.ndarray
    ratio: float
    tau1_value: float
    pair: tuple[int, int]
    row: int


def tightness_witness(p_tilde, epsilon_mass: float = 0.01) -> TightnessWitness:
    """Perturb one row of ``p_tilde`` so that the stationary-distribution
    condition number ``||d - d_tilde||_1 / ||(P - P_tilde)^T d||_1`` equals
    ``tau_1`` of the group inverse of ``I - p_tilde`` exactly.

    With ``(i, j)`` the row pair attaining ``tau_1``, mass ``epsilon_mass`` is
    moved from column ``i`` to column ``j`` in the row with the largest entry
    in column ``i``.
    """
    p_tilde = np.asarray(p_tilde, dtype=float)
    gi = linalg.group_inverse(p_tilde)
    coef = tau1(gi.d_matrix)
    i, j = coef.argmax_pair
    if i == j:
        raise InfeasibleWitnessError("tau_1 is attained by a single row; nothing to perturb")
    x = int(np.argmax(p_tilde[:, i]))
    if p_tilde[x, i] < epsilon_mass:
        raise InfeasibleWitnessError(
            f"largest entry in column {i} is {p_tilde[x, i]:.3e} < epsilon_mass {epsilon_mass:.3e}"
        )
    p = p_tilde.copy()
    p[x, i] -= epsilon_mass
    p[x, j] += epsilon_mass
    d = linalg.stationary_distribution(p)
    gap = np.abs(d - gi.stationary).sum()
    moved = np.abs((p - p_tilde).T @ d).sum()
    p.setflags(write=False)
    return TightnessWitness(p, float(gap / moved), coef.value, (i, j), x)

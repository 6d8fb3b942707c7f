"""Policy-improvement lower bounds for finite MDPs.

Compares the classical discounted improvement bound, whose penalty grows
like ``1 / (1 - gamma)``, with a refined bound whose penalty is the one-norm
ergodicity coefficient of the group inverse of the discounted chain, and with
its average-reward limit.
"""

from .bounds import (
    BoundReport,
    average_bound,
    classical_bound,
    gamma_sweep,
    occupancy_gap_chain,
    perturbation_identity_check,
    refined_bound,
    tightness_witness,
)
from .ergodicity import (
    discounted_group_inverse,
    matr_diff_check,
    minorization_bound,
    spectral_bounds,
    tau1,
)
from .errors import (
    ChainStructureError,
    ConsistencyError,
    ConvergenceError,
    InfeasibleWitnessError,
    MdpBoundsError,
    MinorizationError,
    SingularMatrixError,
    UnreachableStatesWarning,
    ValidationError,
)
from .evaluation import eval_average, eval_discounted, limit_check
from .improve import improve, line_search
from .linalg import group_inverse, stationary_distribution, subdominant_modulus
from .mdp import InducedChain, Mdp, Policy, chain_diagnostics, garnet, induce_chain
from .occupancy import all_occupancies, discounted_transition, occupancy

__all__ = [
    "all_occupancies",
    "average_bound",
    "BoundReport",
    "chain_diagnostics",
    "ChainStructureError",
    "classical_bound",
    "ConsistencyError",
    "ConvergenceError",
    "discounted_group_inverse",
    "discounted_transition",
    "eval_average",
    "eval_discounted",
    "gamma_sweep",
    "garnet",
    "group_inverse",
    "improve",
    "induce_chain",
    "InducedChain",
    "InfeasibleWitnessError",
    "limit_check",
    "line_search",
    "matr_diff_check",
    "Mdp",
    "MdpBoundsError",
    "minorization_bound",
    "MinorizationError",
    "occupancy",
    "occupancy_gap_chain",
    "perturbation_identity_check",
    "Policy",
    "refined_bound",
    "SingularMatrixError",
    "spectral_bounds",
    "stationary_distribution",
    "subdominant_modulus",
    "tau1",
    "tightness_witness",
    "UnreachableStatesWarning",
    "ValidationError",
]
__version__ = "0.1.0"

"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class MdpBoundsError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(MdpBoundsError, ValueError):
    """Input violates a structural or stochasticity invariant.

    ``location`` names the offending field/index when known (e.g. ``"transition[3][1]"``).
    """

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        if location is not None:
            message = f"{location}: {message}"
        super().__init__(message)


class SingularMatrixError(MdpBoundsError, ArithmeticError):
    """A dense solve hit a pivot below the working-precision threshold."""


class ChainStructureError(MdpBoundsError):
    """The chain is not unichain/aperiodic/irreducible where that is required.

    Carries the :class:`~mdpbounds.mdp.ChainDiagnostics` that triggered it.
    """

    def __init__(self, message: str, diagnostics=None):
        self.diagnostics = diagnostics
        super().__init__(message)


class ConsistencyError(MdpBoundsError):
    """Two routes to the same quantity disagreed beyond tolerance."""


class ConvergenceError(MdpBoundsError):
    """An iterative method hit its cap; ``estimate`` holds the best value found."""

    def __init__(self, message: str, estimate: float | None = None):
        self.estimate = estimate
        super().__init__(message)


class MinorizationError(MdpBoundsError):
    """No power ell <= ell_cap gives a positive minorization constant."""


class InfeasibleWitnessError(MdpBoundsError):
    """The tightness perturbation would leave the simplex."""


class UnreachableStatesWarning(UserWarning):
    """Some states carry zero discounted mass because the start distribution never reaches them."""

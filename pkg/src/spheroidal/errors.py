"""Exception hierarchy shared by all solver modules."""


class SpheroidalError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(SpheroidalError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DegeneratePartitionError(SpheroidalError):
    """The region partition collapses (e.g. empty semiclassical interval).

    Raised instead of silently reordering breakpoints; carries a human
    readable reason naming the breakpoint pair that failed.
    """


class HypothesisError(SpheroidalError):
    """A runtime hypothesis of an enclosure lemma is violated.

    ``condition`` names which precondition failed (e.g. "K <= 1",
    "V < 0", "monotonicity"); ``where`` optionally gives the first
    offending abscissa.
    """

    def __init__(self, condition: str, where: float | None = None, detail: str = ""):
        self.condition = condition
        self.where = where
        self.detail = detail
        loc = f" at u={where:.6g}" if where is not None else ""
        msg = f"hypothesis failed: {condition}{loc}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class IntegrationError(SpheroidalError):
    """The ODE integrator could not complete a trajectory."""


class BlowUpError(IntegrationError):
    """|y| exceeded the configured ceiling outside any pole-handling regime."""


class PositivityLossError(IntegrationError):
    """Im y <= 0 was detected on an accepted state.

    The primary Riccati propagator parametrises Im y = exp(eta) and cannot
    reach this state; the error remains reachable from the direct
    Sturm-Liouville cross-check route (y = z'/z).
    """


class SeriesTruncationError(SpheroidalError):
    """Frobenius series truncation error too large at the requested offset.

    The message instructs the caller to shrink ``u_eps``.
    """


class BracketError(SpheroidalError):
    """No sign-changing bracket found for an eigenvalue after expansion."""


class NonMonotonePhaseError(SpheroidalError):
    """The phase function decreased in lambda; indicates a solver bug."""


class TruncationNotConvergedError(SpheroidalError):
    """Oracle eigenvalues changed too much when the truncation was enlarged."""


class ContourError(SpheroidalError):
    """A resolvent contour runs too close to the numerical spectrum."""


class ConfigError(SpheroidalError, ValueError):
    """Invalid run configuration (CLI exit code 4)."""

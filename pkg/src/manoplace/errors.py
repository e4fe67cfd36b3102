"""Exception types shared across the package."""

from __future__ import annotations


class ManoPlaceError(Exception):
    """Base class for all errors raised by this package."""


class InstanceFormatError(ManoPlaceError):
    """An instance or solution file could not be parsed into the expected shape."""


class SolutionFormatError(ManoPlaceError):
    """A solution file could not be parsed into the expected shape."""


class InstanceValidationError(ManoPlaceError):
    """A parsed instance breaks one of the documented invariants.

    The message names the first violated invariant; run the validator to get
    the full list.
    """


class NoFeasiblePlan(ManoPlaceError):
    """The orchestrator search finished without ever reaching a zero-penalty plan."""

    def __init__(self, best_penalty: int, message: str | None = None):
        self.best_penalty = best_penalty
        super().__init__(
            message
            or f"no feasible orchestrator plan found (best penalty reached: {best_penalty})"
        )


class InfeasibleDomain(ManoPlaceError):
    """A domain contains a VNF with no PoP satisfying both manager delay bounds."""

    def __init__(self, vnf_id: int, head: int, message: str | None = None):
        self.vnf_id = vnf_id
        self.head = head
        super().__init__(
            message
            or f"VNF {vnf_id} has no eligible manager host in the domain headed by PoP {head}"
        )

"""Exception hierarchy for cone_sobolev.

Errors are split by contract: bad mathematical input (domain), malformed or
inconsistent data (validation), a computation that cannot reach its accuracy
target (numerical), a request that is provably unsatisfiable (infeasible),
and a request that exceeds representable range (resource).  The command line
front end maps validation/domain errors to exit code 2 and numerical errors
to exit code 3.
"""

from __future__ import annotations


class ConeSobolevError(Exception):
    """Base class for all library errors."""


class DomainError(ConeSobolevError):
    """Input outside the mathematical domain of an operation."""


class ValidationError(ConeSobolevError):
    """Structurally invalid or mutually inconsistent input data."""


class NumericalError(ConeSobolevError):
    """A numerical routine failed to converge to its accuracy target."""


class DivergentIntegralError(NumericalError):
    """An improper segment integral diverges (log-divergent endpoint)."""


class InfeasibleError(DomainError):
    """A constructive search whose target is provably unreachable."""


class ResourceError(ConeSobolevError):
    """A construction that would exceed the representable numeric range."""


class InternalConsistencyError(ConeSobolevError):
    """An internal invariant failed; indicates a bug, not bad input."""

"""Semantic exceptions raised by the engine.

Every error the package raises derives from :class:`KineticModelError`,
so callers (and the CLI) can distinguish engine failures from genuine bugs.
"""


class KineticModelError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(KineticModelError, ValueError):
    """A configuration violates an invariant, or a config file cannot be parsed."""


class ContractError(KineticModelError):
    """An operation was called outside its contract (bad index, shape, non-finite input)."""


class SingularStateError(KineticModelError):
    """A population state with nonpositive total mass was passed where a division by it is required."""


class StepSizeError(KineticModelError):
    """An integration step produced a negative entry beyond roundoff; the step size is too large."""


class ConservationError(KineticModelError):
    """Population or income drift along a trajectory exceeded the allowed tolerance."""


class DistributionError(KineticModelError, ValueError):
    """Weights/incomes do not form a valid distribution for inequality metrics."""


class SweepError(KineticModelError, ValueError):
    """A sweep was requested with an invalid evasion level or sector layout."""


class FitError(KineticModelError):
    """The quadratic fit is underdetermined or numerically singular."""


class OracleSizeError(KineticModelError):
    """The brute-force reference evaluator was asked for an instance it refuses to handle."""

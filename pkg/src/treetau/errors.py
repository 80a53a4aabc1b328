class DomainError(ValueError):
    """Input lies outside the domain of a formula (e.g. mean degree <= 2)."""


class ConditionError(ValueError):
    """A theorem hypothesis fails and the caller asked for strict mode."""


class CapExceeded(RuntimeError):
    """An exhaustive enumeration would exceed its configured size cap."""


class RetryLimitExceeded(RuntimeError):
    pass


class DisconnectedGraph(ValueError):
    pass

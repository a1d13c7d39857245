"""Exception and warning types shared across the package."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of an operation."""


class UnsupportedConfiguration(ValueError):
    """Combination of contract and hedge for which no pricing formula exists."""


class ConfigError(ValueError):
    """Scenario file could not be parsed or validated."""


class SimulationError(RuntimeError):
    """Monte Carlo run aborted (too many invalid paths, bad spec, ...)."""


class NegativeForwardWarning(UserWarning):
    """Discrete dividends exceed the grown spot: the forward is negative."""

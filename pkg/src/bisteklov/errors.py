"""Exception hierarchy shared by all modules."""


class BisteklovError(Exception):
    """Base class for toolkit errors."""


class DomainError(BisteklovError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class ConfigurationError(BisteklovError, ValueError):
    """A grid, partition or run configuration is invalid or degenerate."""


class UnsupportedConfigurationError(ConfigurationError):
    """The configuration is valid but the requested quantity is not implemented for it."""


class ConsistencyError(BisteklovError, RuntimeError):
    """Two formulations that must agree did not."""


class NumericalError(BisteklovError, RuntimeError):
    """A linear solve or iteration failed its accuracy target."""


class SignContractError(ConsistencyError):
    """The discrete boundary operator violated its sign (maximum principle) contract."""


class DiscretizationQualityError(NumericalError):
    """The discrete operator departs too far from self-adjointness."""


class DegenerateModeError(BisteklovError, ValueError):
    """A boundary mode produced a vanishing Rayleigh denominator."""

"""Exception hierarchy shared by every tapauc module."""


class TapAucError(Exception):
    """Base class for all errors raised by tapauc."""


class ConfigurationError(TapAucError, ValueError):
    """Invalid network configuration, hyper-parameters, grid or dataset choice."""


class ContractViolationError(TapAucError, ValueError):
    """A caller broke a documented precondition."""


class NumericalError(TapAucError, ArithmeticError):
    """Non-finite values reached a loss, a gradient or a score."""


class DatasetError(TapAucError, ValueError):
    """Ingestion, subsampling, preprocessing or fold planning failed."""

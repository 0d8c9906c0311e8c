"""Exception hierarchy shared by the solvers, the harness and the CLI."""


class ChemofrontError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(ChemofrontError, ValueError):
    """Malformed or inconsistent run configuration."""


class HypothesisViolated(ChemofrontError, ValueError):
    """A bound was requested whose governing hypothesis does not hold."""


class NotEvenError(ChemofrontError, ValueError):
    """A whole-line field is not even-symmetric about the origin."""


class NumericalFailure(ChemofrontError, RuntimeError):
    """The time integration left its admissible regime.

    ``time`` carries the simulation time at which the failure was detected.
    """

    def __init__(self, message, time=None):
        super().__init__(message if time is None else f"{message} (t={time:.6g})")
        self.time = time


class CFLViolation(NumericalFailure):
    pass


class BlowupDetected(NumericalFailure):
    pass


class FrontCollapse(NumericalFailure):
    pass


class SingularSystemError(NumericalFailure):
    pass

"""Exception and warning classes shared across ensemblelab."""


class EnsembleError(Exception):
    """Base class for domain errors. The CLI maps these to exit code 2."""


class DimensionMismatch(EnsembleError):
    pass


class InvalidState(EnsembleError):
    pass


class InfeasibleMacrostate(EnsembleError):
    pass


class OutOfRange(EnsembleError):
    """Requested mean values sit on or outside the spectral hull."""


class DegenerateSpectrum(EnsembleError):
    pass


class ZeroBeta(EnsembleError):
    pass


class NonpositiveBeta(EnsembleError):
    pass


class IncompatibleState(EnsembleError):
    pass


class TrivialHamiltonian(EnsembleError):
    pass


class ZeroHamiltonian(TrivialHamiltonian):
    pass


class DimensionTooSmall(EnsembleError):
    pass


class SingletonClass(EnsembleError):
    pass


class SizeLimit(EnsembleError):
    pass


class ChargeRangeOverflow(EnsembleError):
    pass


class ZeroVariance(EnsembleError):
    pass


class OrderTooHigh(EnsembleError):
    pass


class LPError(EnsembleError):
    """Raised when a linear program is infeasible or unbounded."""


class SingletonClassWarning(UserWarning):
    pass


class RankDeficientObservables(UserWarning):
    """Observables are affinely dependent; multipliers are not unique."""


class IllConditionedLP(UserWarning):
    """Gibbs weights span so many orders of magnitude that LP results lose accuracy."""

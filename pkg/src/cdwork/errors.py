"""Exception hierarchy for cdwork."""


class CDWorkError(Exception):
    """Base class for all package errors."""


class NumericalError(CDWorkError):
    """A computation could not be carried out to the requested accuracy."""


class NotHermitian(NumericalError, ValueError):
    pass


class DegenerateSpectrum(NumericalError):
    pass


class DimensionMismatch(CDWorkError, ValueError):
    pass


class OutOfRange(CDWorkError, ValueError):
    pass


class NotConverged(NumericalError):
    pass


class NonUnitaryStep(NumericalError):
    pass


class InitialNotEigenstate(NumericalError):
    pass


class ZeroDenominator(NumericalError):
    """A speed-limit bound is not applicable (its denominator vanishes)."""


class ConfigInvalid(CDWorkError, ValueError):
    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class UnknownPreset(ConfigInvalid):
    pass


class FigureCheckFailed(NumericalError):
    """A documented monotonicity/shape property of a figure preset was violated."""

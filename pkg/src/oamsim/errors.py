"""Exception hierarchy. Every error is a ``ValueError`` subclass so callers
that only care about bad input can catch that."""


class OamSimError(ValueError):
    pass


class DomainError(OamSimError):
    pass


class NormalizationError(OamSimError):
    pass


class DegenerateSpectrumError(OamSimError):
    pass


class NoSurvivingAmplitudeError(OamSimError):
    pass


class UndefinedVisibilityError(OamSimError):
    def __init__(self, basis, pair=None):
        self.basis = basis
        self.pair = pair
        where = f" for pair {pair}" if pair is not None else ""
        super().__init__(f"zero total counts in basis {basis!r}{where}")


class IncompleteDataError(OamSimError):
    def __init__(self, missing):
        self.missing = list(missing)
        super().__init__("missing data for pairs: " + ", ".join(str(p) for p in self.missing))


class RankDeficiencyError(OamSimError):
    pass


class MonteCarloError(OamSimError):
    pass


class UnderdeterminedError(OamSimError):
    pass


class DegenerateFitError(OamSimError):
    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class NoPeakError(OamSimError):
    pass


class ConfigError(OamSimError):
    """Config validation failure; ``field`` names the offending key."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")

"""Exception types raised across the toolkit."""


class CouplerLabError(Exception):
    """Base class for all toolkit errors."""


class DegenerateTransform(CouplerLabError):
    pass


class SingularReduction(CouplerLabError):
    pass


class SingularMatrix(CouplerLabError):
    pass


class SingularAtFrequency(CouplerLabError):
    pass


class DistanceBelowCouplerWidth(CouplerLabError):
    pass


class ZeroReference(CouplerLabError):
    pass


class OutOfTransmonRegime(CouplerLabError):
    pass


class EtaUnity(CouplerLabError):
    pass


class LabelCollision(CouplerLabError):
    pass


class ResonantDivergence(CouplerLabError):
    pass


class FitDiverged(CouplerLabError):
    pass


class InsufficientData(CouplerLabError):
    pass


class DegenerateFit(CouplerLabError):
    pass


class UnreachableOperatingPoint(CouplerLabError):
    pass


class UnstableFilter(CouplerLabError):
    pass


class CalibrationFailed(CouplerLabError):
    pass


class BadParticipation(CouplerLabError):
    pass


class RangeNotCovered(CouplerLabError):
    pass


class NonPhysical(CouplerLabError):
    pass


class ParseError(CouplerLabError):
    pass


class ValidationError(CouplerLabError):
    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))

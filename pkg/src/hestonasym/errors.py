"""Exception hierarchy. Every numerical failure derives from HestonAsymError."""


class HestonAsymError(Exception):
    """Base class for all package errors."""


class InvalidParams(HestonAsymError, ValueError):
    pass


class NonPositiveParam(InvalidParams):
    pass


class CorrelationOutOfRange(InvalidParams):
    pass


class KappaBarNonPositive(InvalidParams):
    pass


class OutsideMomentDomain(HestonAsymError, ValueError):
    pass


class OutsideStrip(HestonAsymError, ValueError):
    pass


class DegenerateDenominator(HestonAsymError, ArithmeticError):
    pass


class LogBranchFailure(HestonAsymError, ArithmeticError):
    pass


class NonPositiveInput(HestonAsymError, ValueError):
    pass


class NonPositiveSigma(NonPositiveInput):
    pass


class NonPositiveEffectiveVariance(HestonAsymError, ValueError):
    pass


class ThresholdOrder(HestonAsymError, ValueError):
    pass


class PriceOutOfBounds(HestonAsymError, ValueError):
    pass


class NoConvergence(HestonAsymError, ArithmeticError):
    pass


class AmplitudeRatioNonPositive(HestonAsymError, ArithmeticError):
    pass


class NonPositiveResult(HestonAsymError, ArithmeticError):
    pass


class TruncationFailure(HestonAsymError, ArithmeticError):
    pass


class SubdivisionExhausted(HestonAsymError, ArithmeticError):
    pass


class ParseError(HestonAsymError, ValueError):
    def __init__(self, row: int, column: str, reason: str):
        self.row = row
        self.column = column
        self.reason = reason
        super().__init__(f"row {row}, column {column!r}: {reason}")


class EmptyQuoteSet(HestonAsymError, ValueError):
    pass


class BudgetExhausted(HestonAsymError, RuntimeError):
    pass

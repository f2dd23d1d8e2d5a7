from dataclasses import dataclass


class SymcoerceError(ValueError):
    ''' Base class of all errors raised by the analysis engines '''


class TermAboveWeight(SymcoerceError):
    pass


class WeightViolation(SymcoerceError):
    pass


class IndexOutOfRange(SymcoerceError):
    pass


class EmptyKeepSet(SymcoerceError):
    pass


class DimensionMismatch(SymcoerceError):
    pass


class ZeroPolynomial(SymcoerceError):
    pass


class BothZero(SymcoerceError):
    pass


class NoSuchSystem(SymcoerceError):
    pass


class AnisotropicNotSupported(SymcoerceError):
    pass


class ZeroPoint(SymcoerceError):
    pass


class NotQuasiElliptic(SymcoerceError):
    pass


class NotHomogeneous(SymcoerceError):
    pass


class ZeroForm(SymcoerceError):
    pass


class MultipleRealZero(SymcoerceError):
    pass


class NotWeaklyCoercive(SymcoerceError):
    pass


class PNotWeaklyCoercive(NotWeaklyCoercive):
    pass


class NotElliptic(SymcoerceError):
    pass


class NotAnSSystem(SymcoerceError):
    pass


class InvalidDelta(SymcoerceError):
    pass


class DenominatorVanishes(SymcoerceError):
    pass


class PreconditionViolated(SymcoerceError):
    pass


class OrderExceedsTable(SymcoerceError):
    pass


class DirectionNotAZero(SymcoerceError):
    pass


class AlphaTooHigh(SymcoerceError):
    pass


@dataclass(frozen=True)
class ParseDiagnostic:
    offset: int
    line: int
    column: int
    kind: str
    message: str


    def __str__(self):
        return f'{self.kind} at line {self.line}, column {self.column}: {self.message}'


class ParseError(SymcoerceError):

    def __init__(self, diagnostic: ParseDiagnostic):
        super().__init__(str(diagnostic))
        self.diagnostic = diagnostic


class VariableOutOfRange(ParseError, DimensionMismatch):
    ''' A variable index above the declared dimension '''

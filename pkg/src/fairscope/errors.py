"""Exception hierarchy shared across fairscope."""


class FairscopeError(Exception):
    pass


class InputError(FairscopeError, ValueError):
    pass


class NonSimplexVector(InputError):
    pass


class WeightSumMismatch(InputError):
    pass


class EmptyGroupList(InputError):
    pass


class RowStochasticViolation(InputError):
    pass


class NotBinary(InputError):
    pass


class DomainError(FairscopeError, ValueError):
    pass


class HypothesisViolation(FairscopeError, ValueError):
    pass


class InconsistentGroup(InputError):
    """No row-stochastic matrix maps a group's true proportions to its predicted ones."""


class InfeasibleInputs(FairscopeError):
    pass


class InfeasibleCap(FairscopeError):
    pass


class NumericalFailure(FairscopeError):
    pass


class LpFailure(FairscopeError):
    pass


class ParseError(InputError):
    def __init__(self, message: str, line: int | None = None, column: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.line = line
        self.column = column

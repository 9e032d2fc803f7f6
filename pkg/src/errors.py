"""Exception hierarchy for the container selector."""

from typing import List, Optional


class SelectorError(Exception):
    """Base class for every error raised by the selector pipeline"""


# ---------------------------------------------------------------------------
# Parsing

class SpecParseError(SelectorError):
    """A token or declaration outside the property/catalogue grammar"""

    def __init__(self, message: str, line: int = 0, column: int = 0, source: Optional[str] = None):
        self.message = message
        self.line = line
        self.column = column
        self.source = source
        where = f"{source}:" if source else ""
        super().__init__(f"{where}{line}:{column}: {message}")


class ParseErrorList(SelectorError):
    """All parse errors found in one input"""

    def __init__(self, errors: List[SpecParseError]):
        self.errors = errors
        super().__init__("; ".join(str(e) for e in errors))


# ---------------------------------------------------------------------------
# Typing

class SpecTypeError(SelectorError):
    """Base class for type errors in property specifications"""

    def __init__(self, message: str, where: Optional[str] = None):
        self.message = message
        self.where = where
        prefix = f"in {where}: " if where else ""
        super().__init__(f"{prefix}{message}")


class UnboundVariable(SpecTypeError):
    def __init__(self, name: str, where: Optional[str] = None):
        self.name = name
        super().__init__(f"unbound variable '{name}'", where)


class TypeMismatch(SpecTypeError):
    def __init__(self, expected, actual, where: Optional[str] = None, message: Optional[str] = None):
        self.expected = expected
        self.actual = actual
        text = message or f"expected {expected}, got {actual}"
        super().__init__(text, where)


class PropertyBodyNotPredicate(TypeMismatch):
    """The property body does not have type Con<t> -> Bool"""


class UnknownInterface(SpecTypeError):
    def __init__(self, name: str, where: Optional[str] = None):
        self.name = name
        super().__init__(f"unknown interface '{name}'", where)


class OperationOutsideBound(SpecTypeError):
    def __init__(self, name: str, interface: str, where: Optional[str] = None):
        self.name = name
        self.interface = interface
        super().__init__(
            f"'{name}' is an operation of {interface}, which is not declared as a bound", where
        )


class TypeErrorList(SelectorError):
    """All type errors found in one specification"""

    def __init__(self, errors: List[SpecTypeError]):
        self.errors = errors
        super().__init__("; ".join(str(e) for e in errors))


# ---------------------------------------------------------------------------
# Catalogue

class CatalogueError(SelectorError):
    """Base class for catalogue loading errors"""


class LoadError(CatalogueError):
    def __init__(self, message: str, container: Optional[str] = None):
        self.message = message
        self.container = container
        prefix = f"{container}: " if container else ""
        super().__init__(f"{prefix}{message}")


class LoadErrorList(CatalogueError):
    def __init__(self, errors: List[LoadError]):
        self.errors = errors
        super().__init__("; ".join(str(e) for e in errors))


# ---------------------------------------------------------------------------
# Evaluation

class EvaluationError(SelectorError):
    """Raised only on ill-typed input; unreachable after type checking"""


class ArityError(EvaluationError):
    pass


class KindError(EvaluationError):
    pass


class FuelExhausted(EvaluationError):
    pass


# ---------------------------------------------------------------------------
# Conformance

class GeneratorError(SelectorError):
    pass


class GeneratorVersionMismatch(SelectorError):
    def __init__(self, expected: int, actual: int):
        self.expected = expected
        self.actual = actual
        super().__init__(f"test case was generated by version {actual}, current generator is {expected}")


# ---------------------------------------------------------------------------
# Code generation and ranking

class SourceUsesUndeclaredOp(SelectorError):
    def __init__(self, op: str, decl: str, path: str, line: int, column: int):
        self.op = op
        self.decl = decl
        self.path = path
        self.line = line
        self.column = column
        super().__init__(f"{path}:{line}:{column}: '{op}' is not exposed by {decl}")


class BuildFailure(SelectorError):
    pass


class RunFailure(SelectorError):
    pass

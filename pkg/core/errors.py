from typing import Iterable, Optional


class SolmendError(Exception):
    """Base class for every error raised by the repair engine"""


class SoliditySyntaxError(SolmendError):
    """Source text does not match the supported grammar"""

    def __init__(self, message: str, line: int, column: int, expected: Optional[Iterable[str]] = None):
        self.line = line
        self.column = column
        self.expected = sorted(set(expected or []))
        detail = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{message} at line {line}, column {column}{detail}")


class UnsupportedConstruct(SolmendError):
    """Source is valid Solidity but uses a construct outside the supported subset"""

    def __init__(self, construct: str, line: int = 0, column: int = 0):
        self.construct = construct
        self.line = line
        self.column = column
        super().__init__(f"unsupported construct: {construct} at line {line}, column {column}")


class PrintError(SolmendError):
    """A node kind has no emission rule"""


class MissingModifier(SolmendError):
    """An applied modifier cannot be resolved in the merged contract"""

    def __init__(self, modifier: str, function: str):
        self.modifier = modifier
        self.function = function
        super().__init__(f"modifier '{modifier}' applied to '{function}' cannot be resolved")


class NotApplicable(SolmendError):
    """A fix pattern does not apply to the current state of the finding's site"""


class PlanBlocked(SolmendError):
    """A reorder plan contains dependences that cannot be eliminated"""


class ParseFailure(SolmendError):
    """Patched source no longer parses"""

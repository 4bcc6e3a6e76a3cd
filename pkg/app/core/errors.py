"""Exception hierarchy shared by the parser, engines, reporter and oracle."""


class RaceToolError(Exception):
    """Base class for every error raised by this package"""


class ParseError(RaceToolError):
    """Malformed line in an STD trace"""

    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}")


class EngineError(RaceToolError):
    """Internal consistency violation while processing an event"""


class InvariantViolation(EngineError):
    """A clock invariant failed under check_invariants"""


class MemoryBudgetExceeded(RaceToolError):
    """Pass-2 retention for one variable went over the pair budget"""

    def __init__(self, var: str, budget: int):
        self.var = var
        self.budget = budget
        super().__init__(f"retained accesses for '{var}' exceed budget {budget}")


class BoundExceeded(RaceToolError):
    """Oracle input larger than the configured bound"""

    def __init__(self, n: int, bound: int):
        self.n = n
        self.bound = bound
        super().__init__(f"trace has {n} events, oracle bound is {bound}")


class LengthMismatch(RaceToolError, ValueError):
    """Bit strings for the equality gadget are unusable"""


class UnknownFixture(RaceToolError, KeyError):
    """No fixture registered under that name"""


class UnknownDetector(RaceToolError, KeyError):
    """No engine registered under that name"""

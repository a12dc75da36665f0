"""Exception taxonomy shared by all engine layers.

Exit-code contract: InputError/ParseError/ResourceError map to exit 2,
verification failures (UNKNOWN verdicts, proof failures, monitor
violations) map to exit 1 and are reported through return values, not
exceptions.
"""


class EngineError(Exception):
    """Base class for all errors raised by the engine."""


class InputError(EngineError):
    """A caller violated an operation's precondition (bad state id, arity...)."""


class ParseError(EngineError):
    """A text input failed to parse; carries a source location."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        super().__init__(f"{line}:{col}: {message}" if line else message)


class ResourceError(EngineError):
    """A configured cap (closure size, arena nodes, ...) was exceeded."""


class RuleError(EngineError):
    """A kernel proof rule was applied to a goal it does not accept."""

    def __init__(self, rule: str, message: str):
        self.rule = rule
        super().__init__(f"{rule}: {message}")

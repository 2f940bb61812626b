"""Exception hierarchy shared by every module."""


class DomainError(ValueError):
    """A request that is well-formed but meaningless for the given model."""


class CollapsedModelError(DomainError):
    """Evaluation was attempted on a model with no worlds left."""


class TruthfulnessViolation(DomainError):
    """An announcement was made that is false at the actual world."""


class UnsupportedScenario(DomainError):
    """The requested engine cannot simulate this scenario."""


class ParseError(ValueError):
    def __init__(self, offset: int, expected: str, found: str):
        self.offset = offset
        self.expected = expected
        self.found = found
        super().__init__(f"at offset {offset}: expected {expected}, found {found}")

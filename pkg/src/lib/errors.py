"""
Exception types shared by the decoding library and the experiment harness
"""


class HybridDecodeError(Exception):
    """Base class for every error raised by this package"""


class ContractViolation(HybridDecodeError, ValueError):
    """A precondition of an operation was not met"""


class InvalidSequenceError(ContractViolation):
    pass


class ConfigError(ContractViolation):
    pass


class DecodeOverflowError(HybridDecodeError):
    """A splice or an append would push the sequence past l_cap"""

    def __init__(self, length: int, l_cap: int):
        super().__init__(f"sequence of length {length} exceeds l_cap={l_cap}")
        self.length = length
        self.l_cap = l_cap


class NonTerminationError(HybridDecodeError):
    """The hybrid loop ran past its iteration cap"""

    def __init__(self, iterations: int):
        super().__init__(
            f"hybrid decoding did not terminate after {iterations} iterations "
            "(is the verifier deterministic?)")
        self.iterations = iterations


class UndefinedRatioError(HybridDecodeError, ZeroDivisionError):
    pass


class CorpusFormatError(HybridDecodeError):
    pass


class ResultsFormatError(HybridDecodeError):
    pass


class UtteranceError(HybridDecodeError):
    """Wraps a failure of a single utterance in an experiment run"""

    def __init__(self, utterance_id: int, cause: BaseException):
        super().__init__(f"utterance {utterance_id}: {type(cause).__name__}: {cause}")
        self.utterance_id = utterance_id
        self.cause = cause

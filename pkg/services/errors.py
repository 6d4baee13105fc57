from typing import Optional


class OracleError(Exception):
    """Base class for every error raised by the oracle services"""


class GraphFormatError(OracleError):
    """Malformed edge-list input"""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InvalidVertexError(OracleError):
    """Vertex id out of range, self-loop, or an endpoint in the wrong state"""


class FlowError(OracleError):
    """Invalid flow network or infeasible flow"""


class InvalidPartitionError(OracleError):
    """(A, B) is not a partition of the terminal set"""


class RoundLimitError(OracleError):
    """The cut-matching game ran past its round cap"""


class MemoryBudgetError(OracleError):
    """Artificial-edge materialisation exceeds the configured cap"""


class UpdateTooLargeError(OracleError):
    """Update batch larger than the preprocessed bound d_star"""


class NoUpdateError(OracleError):
    """Query issued before any update was applied"""


class InvariantViolation(OracleError):
    """An internal guard fired; indicates a bug rather than bad input"""

"""Exception types raised by the engine.

The CLI prints ``type(err).__name__`` followed by the message, so class
names are part of the user-facing contract and must stay stable.
"""


class EngineError(Exception):
    """Base class for every error the engine raises deliberately."""


# -- construction / validation -------------------------------------------

class DuplicateName(EngineError):
    pass


class UnknownParent(EngineError):
    pass


class CycleWouldForm(EngineError):
    pass


class TableShapeMismatch(EngineError):
    pass


class NormalizationViolation(EngineError):
    pass


class InvalidNodeSpec(EngineError):
    """Malformed node: bad name, bad outcome list, or duplicate parents."""


class OutcomeOutOfRange(EngineError):
    """Deterministic table entry does not index a real outcome."""


class CycleDetected(EngineError):
    """Defensive: a cycle in a diagram that bypassed add_node."""


class InvalidDiagram(EngineError):
    """Diagram failed validation; carries the offending report."""

    def __init__(self, report):
        self.report = report
        super().__init__(str(report))


# -- queries ---------------------------------------------------------------

class TooLarge(EngineError):
    pass


class ZeroProbabilityEvidence(EngineError):
    pass


class UnknownNode(EngineError):
    pass


class UnknownOutcome(EngineError):
    pass


class EvidenceOnTarget(EngineError):
    pass


class SameNode(EngineError):
    pass


# -- transforms ------------------------------------------------------------

class NoSuchArc(EngineError):
    pass


class HasSuccessors(EngineError):
    pass


class NotAPermutation(EngineError):
    pass


class TooLargeForExhaustive(EngineError):
    pass


# -- io / cli ----------------------------------------------------------------

class UnknownExample(EngineError):
    pass


class InvalidParameters(EngineError):
    pass


class ParseError(EngineError):
    pass


class SchemaError(EngineError):
    pass

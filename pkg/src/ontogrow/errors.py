"""Exception types raised across the package."""
from __future__ import annotations


class OntologyError(Exception):
    """Base class for knowledge-base errors."""


class OntologyParseError(OntologyError):
    """The document is not syntactically valid."""


class OntologyIntegrityError(OntologyError):
    """A referential invariant is violated; names the offending element."""

    def __init__(self, message: str, element: str = ""):
        super().__init__(message)
        self.element = element


class DuplicateConceptError(OntologyError):
    """The concept is already known (name, display name or synonym)."""


class UnknownClassError(OntologyError):
    pass


class EmptySentenceError(OntologyError):
    pass


class StaleRevisionError(OntologyError):
    """The ontology moved on since the snapshot was taken."""


class UnknownMethodError(ValueError):
    pass


class IllegalAnswerError(ValueError):
    """Answer kind not legal for the pending question kind."""


class SessionFinishedError(RuntimeError):
    pass


class OracleInconsistentError(RuntimeError):
    """The oracle's answers cannot place the concept under an existing parent."""


class EmptyCorpusError(ValueError):
    pass


class EmptyMatrixError(ValueError):
    pass

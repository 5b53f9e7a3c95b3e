"""Exceptions raised by epistemic_sim."""

from typing import Optional


class EpistemicSimError(Exception):
    """Base class for every error raised by this package."""


class InvalidBeliefError(EpistemicSimError, ValueError):
    """A belief, prior, forgetting factor or evidence value is out of range."""


class UndefinedMomentsError(EpistemicSimError, ValueError):
    """Moments were requested for a belief with no pseudo-counts."""


class UndefinedEquilibriumError(EpistemicSimError, ValueError):
    """``n_eq`` was requested for a non-forgetting belief (gamma = 1)."""


class PropositionOutOfRangeError(EpistemicSimError, IndexError):
    """A proposition id fell outside ``[0, k)``."""


class ClockError(EpistemicSimError, ValueError):
    """A store was addressed at a tick earlier than its clock."""


class EmptyCandidatesError(EpistemicSimError, ValueError):
    """A strategy was asked to choose from an empty candidate batch."""


class ConfigError(EpistemicSimError, ValueError):
    """An experiment configuration failed to parse or validate.

    Parameters
    ----------
    message : str
    field : str, optional
        Name of the offending config field.
    line, column : int, optional
        Position in the source file for JSON syntax errors.
    source : str, optional
        Path or preset name the config came from.
    """

    def __init__(
        self,
        message: str,
        field: Optional[str] = None,
        line: Optional[int] = None,
        column: Optional[int] = None,
        source: Optional[str] = None,
    ):
        self.field = field
        self.line = line
        self.column = column
        self.source = source
        super().__init__(message)

    def __str__(self) -> str:
        message = super().__str__()
        if self.field is not None:
            message = f"field {self.field!r}: {message}"
        location = [
            str(part)
            for part in (self.source, self.line, self.column)
            if part is not None
        ]
        if location:
            message = "{}: {}".format(":".join(location), message)
        return message

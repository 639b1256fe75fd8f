"""Exception hierarchy shared by every module."""

from __future__ import annotations


class AttenuationError(Exception):
    """Base class for all errors raised by the package."""


class InvalidParameter(AttenuationError, ValueError):
    """A density or ladder parameter is outside its admissible range."""


class InadmissibleDensity(AttenuationError):
    """A density fails the symmetry / quasi-concavity preconditions of an operation."""


class QuadratureFailure(AttenuationError):
    """Adaptive integration exhausted its subdivision budget without converging."""

    def __init__(self, message: str, value=None, error=None):
        super().__init__(message)
        self.value = value
        self.error = error


class DegenerateSignal(AttenuationError):
    """The marginal likelihood of a signal underflows; the posterior is undefined numerically."""

    def __init__(self, s: float, log_z: float):
        super().__init__(f"marginal likelihood at s={s!r} underflows (log Z = {log_z:.1f})")
        self.s = s
        self.log_z = log_z


class PreconditionFailed(AttenuationError):
    """The inputs to a verification do not satisfy the ordering it presupposes."""


class SearchExhausted(AttenuationError):
    """The counterexample constructor found nothing to certify."""


class ParseError(AttenuationError):
    """A config or density string could not be parsed.

    ``problems`` holds every diagnostic found, not just the first.
    """

    def __init__(self, problems: list[str] | str):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class UnresolvedName(ParseError):
    """A config refers to a density name it never defines."""

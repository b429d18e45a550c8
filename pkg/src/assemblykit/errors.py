"""Exception hierarchy shared across the package."""


class AssemblyKitError(Exception):
    """Base class for all package errors."""


class ValidationError(AssemblyKitError):
    """An election (or other input record) violates its invariants.

    Carries the full list of violations, not just the first one found.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class ParseError(AssemblyKitError):
    """A file could not be parsed; carries location info when available."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f" [{path}" + (f":{line}" if line is not None else "") + "]"
        super().__init__(message + where)


class EmptyVoterSet(AssemblyKitError):
    pass


class TooFewVoters(AssemblyKitError):
    pass


class DegenerateData(AssemblyKitError):
    """Opinion data has rank < 2; no meaningful 2-D projection exists."""


class DuplicateProjectInRanking(AssemblyKitError):
    pass


class EmptySupportSet(AssemblyKitError):
    pass


class NoPairedParticipants(AssemblyKitError):
    pass


class AllZeroDifferences(AssemblyKitError):
    pass


class EmptySample(AssemblyKitError):
    pass


class OutOfScaleScore(AssemblyKitError):
    pass


class WrongState(AssemblyKitError):
    pass


class BudgetOutOfRange(AssemblyKitError):
    pass


class NotInFrozenSet(AssemblyKitError):
    pass


class IncreaseNotAllowed(AssemblyKitError):
    pass


class UnknownSession(AssemblyKitError):
    pass

"""Exception hierarchy shared by every module.

The CLI maps these onto distinct exit codes, so the split between input,
verification and resource failures matters.
"""


class SubtileError(Exception):
    pass


class InputError(SubtileError):
    """Malformed or invalid system definition, or bad arguments."""

    def __init__(self, message, problems=None):
        super().__init__(message)
        self.problems = list(problems or [])

    def __str__(self):
        base = super().__str__()
        if not self.problems:
            return base
        return base + "\n" + "\n".join(f"  - {p}" for p in self.problems)


class VerificationError(SubtileError):
    """A checked identity or inequality turned out false."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ResourceError(SubtileError):
    """A search ran past its configured level or depth bound."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class UndecidableComparison(ResourceError):
    """Interval refinement hit the precision budget before deciding a sign."""

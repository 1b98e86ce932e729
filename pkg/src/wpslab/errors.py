"""Exception hierarchy shared by all modules.

The CLI maps these to exit codes: precondition failures exit 2, budget
overruns exit 3.
"""


class WpsLabError(Exception):
    pass


class PreconditionError(WpsLabError, ValueError):
    """An input violates an operation's stated precondition."""


class BudgetError(WpsLabError):
    """The requested computation exceeds a configured size budget."""


class ConsistencyError(WpsLabError, AssertionError):
    """An internal invariant that should be unreachable was violated."""

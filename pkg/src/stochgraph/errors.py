"""Exception taxonomy shared across the package.

The CLI maps these onto process exit codes: validation problems exit 2,
budget/cap refusals exit 3, internal assertion failures exit 4.
"""


class StochgraphError(Exception):
    """Base class for all package errors."""


class ValidationError(StochgraphError):
    """Malformed input: unknown identifiers, broken invariants, bad files."""


class DomainError(StochgraphError):
    """Structurally valid input outside an operation's contract
    (odd node count for matchings, empty point sets, zero-mass events, ...)."""


class EnumerationCapError(StochgraphError):
    """Exact enumeration refused because it would exceed the configured cap."""

    def __init__(self, required: int, cap: int):
        self.required = required
        self.cap = cap
        super().__init__(
            f"exact enumeration needs {required} realizations, cap is {cap}; "
            f"raise the cap to at least {required} to run this query"
        )


class InternalAssertionError(StochgraphError):
    """A runtime self-check failed; indicates a bug, not a user error."""

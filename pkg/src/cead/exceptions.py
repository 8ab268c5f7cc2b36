"""Error types shared across the package.

Callers can rely on the distinction: bad arguments raise
:class:`InvalidInputError`, broken internal guarantees raise
:class:`ContractError`, and inputs that are well formed but make an
operation meaningless (empty score vectors, single-class label sets)
raise :class:`DegenerateInputError`.
"""


class InvalidInputError(ValueError):
    """An argument fails validation before any work happens."""


class DegenerateInputError(InvalidInputError):
    """Input is well formed but the operation is undefined on it."""


class ContractError(RuntimeError):
    """An internal invariant was violated; indicates a bug, not bad input."""

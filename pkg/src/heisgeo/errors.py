"""Exception types shared across the package.

The CLI maps these onto exit codes: malformed input -> 2, violated
mathematical precondition -> 3. Solver non-convergence is reported through
result flags, not exceptions.
"""


class HeisgeoError(Exception):
    """Base class for all package errors."""


class InputError(HeisgeoError, ValueError):
    """Malformed user input: bad file, bad schema, unparsable value."""


class DimensionMismatchError(HeisgeoError, ValueError):
    """Operands live in Heisenberg groups of different dimension."""


class PreconditionError(HeisgeoError, ValueError):
    """A documented mathematical precondition does not hold."""

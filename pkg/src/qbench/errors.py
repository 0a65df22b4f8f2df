"""Exception types shared across the package."""


class QbenchError(Exception):
    """Base class for all package-specific failures."""


class ValidationError(QbenchError, ValueError):
    """A domain object violates one of its structural invariants."""


class QasmError(QbenchError, ValueError):
    """OpenQASM parse or emit failure, with source position when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, col {column}: {message}" if column is not None else f"line {line}: {message}"
        super().__init__(message)


class UnsupportedConstructError(QbenchError, ValueError):
    """The requested output format cannot express this circuit."""


class NonInvertibleError(QbenchError, ValueError):
    """Circuit contains measurements and cannot be inverted."""


class NonCliffordError(QbenchError, ValueError):
    """A Clifford-only code path received a non-Clifford gate."""


class WidthCapError(QbenchError, ValueError):
    """Statevector width exceeds the configured practicality cap."""


class DegenerateInputError(QbenchError, ValueError):
    """Input is formally valid but the requested quantity is undefined on it."""


class TranspileError(QbenchError, ValueError):
    """Transpilation cannot proceed (non-universal native set, bad config, ...)."""


class EquivalenceProbeError(TranspileError):
    """A peak pass list failed the randomized equivalence probe."""

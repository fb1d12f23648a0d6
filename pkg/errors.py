import json
import logging

APP_LOGGER_NAME = "quantum-multibaker"

LOGGER = logging.getLogger(APP_LOGGER_NAME)


class MultibakerError(Exception):
    """Base class for every error raised by the library."""


class InvalidArgumentError(MultibakerError, ValueError):
    pass


class ConfigError(InvalidArgumentError):
    def __init__(self, field: str, message: str) -> None:
        super().__init__(f"{field}: {message}")
        self.field = field
        self.reason = message


class UnitaryFileError(InvalidArgumentError):
    def __init__(self, path, message: str, line: int | None = None) -> None:  # noqa: ANN001
        where = f"{path}:{line}" if line is not None else f"{path}"
        super().__init__(f"{where}: {message}")
        self.path = path
        self.line = line


class NumericalFailureError(MultibakerError, ArithmeticError):
    def __init__(self, message: str, residual: float | None = None) -> None:
        if residual is not None:
            message = f"{message} (residual {residual:.3e})"
        super().__init__(message)
        self.residual = residual


class UndefinedPlateauError(MultibakerError):
    """Degenerate pairs with non-zero weight make the time average diverge."""


class NoCrossoverError(MultibakerError):
    """Zero ballistic coefficient: the m.s.d. never turns ballistic."""


def classify_run_error(exc: BaseException) -> tuple[str, dict]:
    if isinstance(exc, ConfigError):
        return "config", {"field": exc.field, "reason": exc.reason}
    if isinstance(exc, InvalidArgumentError):
        return "invalid_argument", {"detail": str(exc)}
    if isinstance(exc, NumericalFailureError | UndefinedPlateauError | NoCrossoverError):
        return "numerical", {"detail": str(exc)}
    if isinstance(exc, json.JSONDecodeError):
        return "config", {"field": "config", "reason": f"invalid JSON ({exc.msg})"}
    if isinstance(exc, OSError):
        return "io", {"detail": str(exc)}
    return "unknown", {}

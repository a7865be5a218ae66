"""Exception taxonomy shared across the package."""


class TreatplanError(Exception):
    """Base class for every error this package raises on purpose."""


class InvalidInputError(TreatplanError, ValueError):
    """An argument violated a documented precondition."""


class FitError(TreatplanError):
    """Transition-model estimation could not proceed (no usable data)."""


class ConfigError(TreatplanError):
    """Invalid run configuration or a rejected construct combination."""


class HorizonError(TreatplanError):
    """A decision or plan was requested at or past the horizon."""


class CapacityError(TreatplanError):
    """The requested search tree exceeds the configured node budget."""


class CsvFormatError(TreatplanError):
    """Malformed trajectory CSV; carries the offending line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no

"""Exception types shared across the toolkit."""


class ContractViolationError(ValueError):
    """An operation was called with inputs that break its preconditions."""


class EnsembleLoadError(ValueError):
    """Base class for ensemble-file load failures."""


class MalformedEnsembleError(EnsembleLoadError):
    """File is not valid JSON or is missing required keys."""


class ShapeMismatchError(EnsembleLoadError):
    """Stored parameter shapes do not compose into a valid network."""


class NonFiniteParameterError(EnsembleLoadError):
    """A stored weight or bias is NaN or infinite."""


class EmptyEnsembleError(EnsembleLoadError):
    """The file declares zero members."""


class SingularityError(ArithmeticError):
    """An undamped pseudoinverse was requested at a singular configuration."""


class PriorEvaluationError(RuntimeError):
    """The wrapped deterministic controller failed during MC propagation."""


class ArenaError(ValueError):
    """An arena definition is unusable (bad geometry or unsatisfiable reset)."""


class LogReadError(ValueError):
    """An episode log file is missing or corrupt.

    `path` identifies the offending file.
    """

    def __init__(self, message: str, path):
        super().__init__(f"{message}: {path}")
        self.path = path

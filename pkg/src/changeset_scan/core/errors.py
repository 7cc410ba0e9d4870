"""Exception types shared by the core modules."""


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class ConditionViolation(DomainError):
    """A sub-slice crosses the change-set boundary more than once."""


class ArtifactIOError(RuntimeError):
    """Reading or writing a frame, point-set, table or image file failed."""

    def __init__(self, path: str, action: str, cause: BaseException):
        self.path = path
        self.cause = cause
        super().__init__(f"Error {action} {path}: {str(cause)}")

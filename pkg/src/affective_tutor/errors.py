"""Exception hierarchy shared by every layer of the engine."""


class TutorError(Exception):
    """Base class; `code` is the machine-readable error identifier."""

    code = "error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class ValidationError(TutorError):
    code = "validation_error"


class FrameValidationError(ValidationError):
    """Strict-mode rejection of a single frame; carries the frame index."""

    code = "frame_validation_error"

    def __init__(self, message: str, frame_index: int):
        super().__init__(message)
        self.frame_index = frame_index


class AccessError(TutorError):
    code = "access_denied"


class AuthError(TutorError):
    code = "unauthorized"


class NotFoundError(TutorError):
    code = "not_found"


class NoDataError(TutorError):
    """Raised when an operation needs stored data that does not exist yet."""

    code = "no_data"


class ConfigError(TutorError):
    code = "config_error"

class LocalizationError(Exception):
    """Base class for every error raised by the localization toolkit"""
    exit_code = 1


class ConfigError(LocalizationError):
    exit_code = 2

    def __init__(self, message, fields=None):
        self.fields = list(fields or [])
        if self.fields:
            message = f"{message} (fields: {', '.join(self.fields)})"
        super().__init__(message)


class PropertyViolation(LocalizationError):
    """A mathematical precondition or asserted inequality does not hold"""
    exit_code = 1


class NumericalFailure(LocalizationError):
    """Integration or step-size control failed"""
    exit_code = 3

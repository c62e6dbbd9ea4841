"""Exception types shared across the toolkit."""


class FormatError(ValueError):
    """Malformed image file (bad magic, header field, or truncated payload)."""


class ParameterError(ValueError):
    """Parameter outside its documented domain."""


class CapacityError(ValueError):
    """Watermark payload does not fit in the configured frequency band."""


class ConfigError(ValueError):
    """Invalid run configuration."""


class TrainingError(RuntimeError):
    """Classifier training cannot proceed (e.g. single-class input)."""


class TuningError(RuntimeError):
    """No codec candidate met the robustness/quality targets."""


class AttackError(RuntimeError):
    """Attack precondition violated (e.g. non-adversarial init, no gradient)."""

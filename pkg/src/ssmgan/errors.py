"""Exception hierarchy shared by every module."""


class SsmganError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(SsmganError, ValueError):
    """Malformed bytes: bad magic, wrong length, truncated payload."""


class FieldRangeError(SsmganError, ValueError):
    """A packet field does not fit in its bit width."""

    def __init__(self, field, value, width):
        self.field = field
        self.value = value
        self.width = width
        super().__init__(
            f"field {field!r}={value} out of range for {width}-bit unsigned [0, {2**width - 1}]"
        )


class BuildError(SsmganError, ValueError):
    """A weight store or config does not match the generator graph."""


class StateMismatchError(SsmganError, RuntimeError):
    """A streaming state object was driven with a spec it was not created for."""

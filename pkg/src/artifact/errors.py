"""Exception types shared across the package."""


class InvalidConfigError(ValueError):
    """A scheme or experiment configuration that cannot be realized.

    Raised when derived constants degenerate (empty bursts, empty decision
    regions, guard spacing violated) or when a config file is malformed.
    """

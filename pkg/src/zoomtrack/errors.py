"""Exception types shared across the package."""


class ModelViolationError(Exception):
    """A state or action broke a rule of the local-motion model.

    Examples: duplicate object centers (zero nearest-neighbor distance),
    an evolver displacement exceeding its speed budget, or a point leaving
    the bounding ball.
    """


class ConfigError(Exception):
    """An experiment configuration is malformed or inconsistent."""

"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Bad experiment configuration (unknown key, bad value, missing file)."""


class CapacityError(ValueError):
    """Request exceeds a hard guard, e.g. brute force beyond n=24."""


class InstanceFormatError(ValueError):
    """Problem-instance file failed to parse or violates its invariants."""


class NumericError(FloatingPointError):
    """NaN/Inf appeared where finite values are required."""


class EdaRunError(RuntimeError):
    """A model failure inside an EDA run, annotated with the generation."""

    def __init__(self, message: str, generation: int):
        super().__init__(f"generation {generation}: {message}")
        self.generation = generation

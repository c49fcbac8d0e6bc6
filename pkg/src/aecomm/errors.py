"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Array dimensions do not match what an operation requires."""


class DomainError(ValueError):
    """A value is outside the mathematical domain of an operation."""


class DegenerateInputError(ValueError):
    """Input is degenerate, e.g. an all-zero vector fed to the power normalizer."""


class TrainingDivergedError(RuntimeError):
    """Training produced a non-finite loss value."""

    def __init__(self, epoch: int, loss: float):
        self.epoch = epoch
        self.loss = loss
        super().__init__(f"non-finite loss {loss!r} at epoch {epoch}")


class SingularityError(ValueError):
    """A linearization reference activation is too close to zero."""

    def __init__(self, index: int, value: float, floor: float):
        self.index = index
        self.value = value
        self.floor = floor
        super().__init__(
            f"activation u[{index}]={value:.3e} is below the magnitude floor {floor:.1e}"
        )


class CheckpointError(RuntimeError):
    """Base class for checkpoint load failures."""


class CheckpointVersionError(CheckpointError):
    """Checkpoint format version is not supported."""


class CheckpointTruncatedError(CheckpointError):
    """Checkpoint file ends before a required section is complete."""


class CheckpointDimensionError(CheckpointError):
    """Checkpoint dimensions disagree with the declared architecture or caller expectation."""


class ConfigError(ValueError):
    """A configuration field is missing or invalid; message names the field."""


class UnknownRecipeError(KeyError):
    """Requested figure recipe does not exist; message lists the available ones."""

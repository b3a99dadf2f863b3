class DataError(ValueError):
    """Malformed or inconsistent input data."""


class DivergenceError(FloatingPointError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch: int, step: int, loss: float):
        super().__init__(f"loss became non-finite ({loss}) at epoch {epoch}, step {step}")
        self.epoch = epoch
        self.step = step
        self.loss = loss

"""Exception hierarchy for the CCT engine.

Every error raised by the library derives from EngineError. The CLI turns
an EngineError into a single ``error:<reason>: <message>`` line on stderr
and exits with the class's exit code.
"""

from typing import Any


class EngineError(Exception):
    """Base class for all engine errors.

    Attributes:
        reason: Short machine-parseable tag used as the CLI error prefix
        exit_code: Process exit code used by the CLI
        context: Optional structured details (shapes, paths, offsets)
        cause: Underlying exception, if any
    """

    reason = "engine"
    exit_code = 1

    def __init__(
        self,
        message: str,
        context: dict[str, Any] | None = None,
        cause: Exception | None = None
    ):
        self.context = context or {}
        self.cause = cause
        super().__init__(message)

    def one_line(self) -> str:
        """Format as the single-line CLI diagnostic."""
        text = " ".join(str(self).split())
        return f"error:{self.reason}: {text}"


class DimensionError(EngineError):
    """Shape mismatch between operands."""

    reason = "dimension"

    def __init__(self, message: str, *shapes: tuple[int, ...]):
        details = ", ".join(str(tuple(s)) for s in shapes)
        if details:
            message = f"{message} (shapes: {details})"
        super().__init__(message, context={"shapes": [tuple(s) for s in shapes]})


class ContractError(EngineError):
    """An operation was called outside its contract."""

    reason = "contract"


class ConfigError(EngineError):
    """Invalid model, run or experiment configuration."""

    reason = "config"
    exit_code = 2


class TokenizationError(ConfigError):
    """Image geometry is incompatible with the tokenizer."""

    reason = "tokenization"


class DataIOError(EngineError):
    """Dataset files are missing or unreadable, or an output file cannot be written."""

    reason = "io"
    exit_code = 3


class DataFormatError(EngineError):
    """Dataset file contents do not match the expected binary layout.

    Attributes:
        path: File being decoded
        offset: Byte offset at which decoding failed
    """

    reason = "format"
    exit_code = 4

    def __init__(self, message: str, path: str | None = None, offset: int | None = None):
        self.path = path
        self.offset = offset
        if offset is not None:
            message = f"{message} at byte offset {offset}"
        if path is not None:
            message = f"{path}: {message}"
        super().__init__(message, context={"path": path, "offset": offset})


class CheckpointError(EngineError):
    """Checkpoint file is malformed or incompatible."""

    reason = "checkpoint"
    exit_code = 5


class DivergenceError(EngineError):
    """Training produced a non-finite loss."""

    reason = "diverged"
    exit_code = 6

    def __init__(self, epoch: int, step: int, lr: float, loss: float):
        self.epoch = epoch
        self.step = step
        self.lr = lr
        super().__init__(
            f"non-finite loss {loss} at epoch {epoch}, step {step}, lr {lr:.6g}",
            context={"epoch": epoch, "step": step, "lr": lr}
        )

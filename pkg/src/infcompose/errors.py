"""Exception types shared across the package."""

from __future__ import annotations


class CompositionError(Exception):
    """Base class for every error raised by this package."""


class ParseError(CompositionError):
    """Source text is not a well-formed function definition."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class EvalError(CompositionError):
    """Evaluation left the function's domain or the double range.

    ``reason`` is one of ``"division-by-zero"``, ``"log-of-zero"``,
    ``"non-finite"`` or ``"domain"``.
    """

    def __init__(self, message: str, reason: str = "domain"):
        super().__init__(message)
        self.reason = reason


class CapacityError(CompositionError):
    """A requested series order exceeds the configured jet maximum."""


class PoleError(EvalError):
    """A composition step's convergent was evaluated at one of its poles."""

    def __init__(self, index: int, argument: complex):
        EvalError.__init__(
            self,
            f"step {index} hits a pole of the convergent at argument {argument}",
            reason="pole",
        )
        self.index = index
        self.argument = argument


class DivergenceError(CompositionError):
    """A tail sum showed no sign of settling; the step family looks non-summable."""


class NonFiniteError(CompositionError):
    """A composition step produced a value outside the double range."""

    def __init__(self, step: int, coordinate: complex):
        super().__init__(
            f"non-finite intermediate at step {step} (coordinate {coordinate})"
        )
        self.step = step
        self.coordinate = coordinate


class NoConvergenceError(CompositionError):
    """Adaptive truncation ran out of depth before meeting its tolerance."""

    def __init__(self, depth: int, last_increment: float, tail: float | None):
        tail_text = "n/a" if tail is None else f"{tail:.3e}"
        super().__init__(
            f"no convergence at depth {depth}: "
            f"last increment {last_increment:.3e}, tail {tail_text}"
        )
        self.depth = depth
        self.last_increment = last_increment
        self.tail = tail


class BranchEscapeError(CompositionError):
    """No inverse-branch candidate stayed near the tracked orbit point."""


class NonContractionError(CompositionError):
    """Successive refinement increments grew instead of contracting."""


class DegenerateFitError(CompositionError):
    """Residuals admit no meaningful least-squares slope."""

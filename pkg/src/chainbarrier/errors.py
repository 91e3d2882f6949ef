"""Exception types shared across the simulator."""


class ChainBarrierError(Exception):
    """Base class for all library errors."""


class ParameterError(ChainBarrierError, ValueError):
    """Invalid argument or malformed input data."""


class InsufficientSensorsError(ChainBarrierError):
    """Fewer sensors than the minimum needed to span the belt."""

    def __init__(self, n: int, required: int):
        super().__init__(f"{n} sensors deployed but at least {required} are required to span the belt")
        self.n = n
        self.required = required


class SingleGraphError(ChainBarrierError):
    """A cross-graph operation was requested while only one chain graph exists."""


class NoConvergenceError(ChainBarrierError):
    """A phase exhausted its iteration budget; carries a state snapshot for debugging."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class NumericalFailureError(ChainBarrierError):
    """The solver produced a non-finite position or failed to enforce constraints."""

    def __init__(self, message: str, body_id: int | None = None):
        super().__init__(message)
        self.body_id = body_id

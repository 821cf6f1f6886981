"""Exception types shared across the package."""

from __future__ import annotations


class InputError(ValueError):
    """Malformed model, state, trajectory or configuration data."""


class NumericalError(RuntimeError):
    """A computation produced non-finite values or a factorization failed.

    ``time`` is the simulation time at which the failure was detected, when
    known. ``partial`` holds whatever result was produced up to that point
    (for simulations, the trace recorded before blow-up).
    """

    def __init__(self, message: str, time: float | None = None, partial=None):
        super().__init__(message)
        self.time = time
        self.partial = partial

"""Exception types shared across the package."""

from __future__ import annotations


class DimensionError(ValueError):
    """Operand shapes do not fit the operation."""


class NotUnitaryError(ValueError):
    pass


class NotNormalError(ValueError):
    pass


class StateError(ValueError):
    """Amplitudes or a density matrix violate the state invariants."""


class UnknownGateError(ValueError):
    def __init__(self, name: str):
        super().__init__(f"unknown gate {name!r}")
        self.name = name


class ConvergenceError(RuntimeError):
    """Fixed-point iteration ran out of iterations."""

    def __init__(self, residual: float, iterations: int):
        super().__init__(
            f"no fixed point after {iterations} iterations (residual {residual:.3e})"
        )
        self.residual = residual
        self.iterations = iterations


class ScenarioError(ValueError):
    """A scenario cannot be simulated in the requested mode."""

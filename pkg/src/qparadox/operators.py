"""Gate catalog and single-qbit gate application.

``D`` swaps ``|0>`` and ``|1>``: it is the NOT gate, and it encodes the
agent's instruction to emit the opposite of what it received. ``ID`` is the
consistent, non-switching variant. ``X``, ``Y``, ``Z`` and ``H`` are extra
catalog entries so scenario files can name standard gates.
"""

from __future__ import annotations

import math

import numpy as np

from . import linalg
from .errors import DimensionError, NotUnitaryError, UnknownGateError
from .state import Qbit

USER_UNITARY_TOL = 1e-8


class Gate:
    """A named unitary; immutable."""

    __slots__ = ("_name", "_matrix")

    def __init__(self, name: str, matrix, tol: float = linalg.UNITARY_TOL):
        m = linalg.as_matrix(matrix)
        n = m.shape[0]
        if m.shape[1] != n or n & (n - 1):
            raise DimensionError(f"gate side must be a power of 2, got {m.shape}")
        if not linalg.is_unitary(m, tol):
            raise NotUnitaryError(f"matrix for gate {name!r} is not unitary")
        self._name = str(name)
        self._matrix = m

    @property
    def name(self) -> str:
        return self._name

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def dim(self) -> int:
        return self._matrix.shape[0]

    def __matmul__(self, other: "Gate") -> "Gate":
        return Gate(f"{self.name}*{other.name}", self.matrix @ other.matrix)

    def __eq__(self, other):
        if not isinstance(other, Gate):
            return NotImplemented
        return self._name == other._name and np.array_equal(self._matrix, other._matrix)

    def __hash__(self):
        return hash((self._name, self._matrix.tobytes()))

    def __repr__(self):
        return f"Gate({self._name!r}, {self._matrix.tolist()!r})"


_S = 1 / math.sqrt(2)

CATALOG: dict[str, Gate] = {
    "D": Gate("D", [[0, 1], [1, 0]]),
    "ID": Gate("ID", [[1, 0], [0, 1]]),
    "X": Gate("X", [[0, 1], [1, 0]]),
    "Y": Gate("Y", [[0, -1j], [1j, 0]]),
    "Z": Gate("Z", [[1, 0], [0, -1]]),
    "H": Gate("H", [[_S, _S], [_S, -_S]]),
}


def diagonalization_operator() -> Gate:
    return CATALOG["D"]


def identity_gate() -> Gate:
    return CATALOG["ID"]


def lookup(name: str) -> Gate:
    try:
        return CATALOG[name]
    except KeyError:
        raise UnknownGateError(name) from None


def gate_from_matrix(name: str, m) -> Gate:
    """Wrap a user-supplied matrix, accepting unitarity to within 1e-8."""
    return Gate(name, m, tol=USER_UNITARY_TOL)


def apply_gate(g: Gate, q: Qbit) -> Qbit:
    if g.dim != 2:
        raise DimensionError(f"gate {g.name!r} acts on {g.dim} levels, a qbit has 2")
    a, b = g.matrix @ q.vector
    # user gates pass at 1e-8 unitarity, so absorb their drift as well as rounding
    n = math.sqrt(abs(a) ** 2 + abs(b) ** 2)
    return Qbit(a / n, b / n)

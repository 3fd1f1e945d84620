"""Fixed points of the loop map: classical, pure-state and density-matrix.

A classical agent needs a bit ``x`` with ``f(x) = x``. A quantum agent needs a
state in the eigenvalue-1 eigenspace of the loop unitary. The density-matrix
version ``T(rho) = rho`` always has a solution for a unitary loop, even when
there is no eigenvalue 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from . import linalg
from .errors import ConvergenceError, DimensionError
from .operators import Gate
from .state import DensityMatrix

CONSISTENT = "consistent-classically"
RESOLVED = "paradoxical-classically-resolved-quantumly"
UNRESOLVABLE = "unresolvable"

MAX_BITS = 10


@dataclass(frozen=True)
class ClassicalMap:
    """Total map on n-bit strings, stored as ``table[x] = f(x)`` over integers."""

    n: int
    table: tuple[int, ...]

    def __post_init__(self):
        if not 1 <= self.n <= MAX_BITS:
            raise ValueError(f"classical maps support 1..{MAX_BITS} bits, got {self.n}")
        size = 1 << self.n
        table = tuple(int(y) for y in self.table)
        if len(table) != size or any(not 0 <= y < size for y in table):
            raise ValueError("table must map every n-bit input to an n-bit output")
        object.__setattr__(self, "table", table)

    @classmethod
    def from_function(cls, n: int, f) -> "ClassicalMap":
        return cls(n, tuple(f(x) for x in range(1 << n)))

    def __call__(self, x: int) -> int:
        return self.table[x]

    def then(self, other: "ClassicalMap") -> "ClassicalMap":
        """``other`` applied after ``self``."""
        if other.n != self.n:
            raise DimensionError("cannot compose maps of different widths")
        return ClassicalMap(self.n, tuple(other.table[y] for y in self.table))

    def bitstring(self, x: int) -> str:
        return format(x, f"0{self.n}b")


NOT = ClassicalMap(1, (1, 0))
IDENTITY = ClassicalMap(1, (0, 1))


def classical_fixed_points(m: ClassicalMap) -> list[str]:
    """All ``x`` with ``m(x) == x`` by exhaustive enumeration, ascending."""
    out = []
    for bits in product("01", repeat=m.n):
        s = "".join(bits)
        if m(int(s, 2)) == int(s, 2):
            out.append(s)
    return out


def basis_map(g: Gate, tol: float = linalg.UNITARY_TOL) -> ClassicalMap | None:
    """The cbit map of a gate that sends basis states to basis states (up to phase).

    Returns ``None`` when some column has more than one nonzero entry.
    """
    m = g.matrix
    n = m.shape[0].bit_length() - 1
    if n < 1:
        return None
    table = []
    for col in m.T:
        hits = np.flatnonzero(np.abs(col) > tol)
        if len(hits) != 1 or abs(abs(col[hits[0]]) - 1.0) > tol:
            return None
        table.append(int(hits[0]))
    return ClassicalMap(n, tuple(table))


def pure_fixed_points(g: Gate, tol: float = linalg.NULLSPACE_TOL) -> list[np.ndarray]:
    return linalg.nullspace(g.matrix - np.eye(g.dim), tol)


@dataclass(frozen=True)
class ChannelFixedPoint:
    state: DensityMatrix
    residual: float
    iterations: int


def _transfer_matrix(u: np.ndarray, dims: tuple[int, int], env: np.ndarray) -> np.ndarray:
    """Matrix of ``rho -> Tr_env[U (env (x) rho) U^dag]`` acting on row-major vec(rho)."""
    dl = dims[1]
    cols = []
    for i in range(dl):
        for j in range(dl):
            e = np.zeros((dl, dl), dtype=np.complex128)
            e[i, j] = 1.0
            out = linalg.partial_trace(u @ np.kron(env, e) @ u.conj().T, dims, keep=1)
            cols.append(out.reshape(-1))
    return np.array(cols).T


def channel_fixed_point(
    loop_unitary,
    dims: tuple[int, int],
    environment_state: DensityMatrix | None = None,
    tol: float = 1e-10,
    max_iter: int = 100_000,
    start: DensityMatrix | None = None,
) -> ChannelFixedPoint:
    """Fixed point of the reduced loop channel by averaged iteration.

    ``loop_unitary`` acts on environment (x) loop with ``dims = (d_env, d_loop)``.
    Each step replaces ``rho`` by ``(rho + T(rho)) / 2``; the averaging damps
    the undamped rotation that plain iteration of a unitary conjugation shows.
    The maximally mixed state is the default start. Raises
    :class:`ConvergenceError` if the residual ``max|T(rho) - rho|`` is still
    above ``tol`` after ``max_iter`` channel evaluations.
    """
    u = linalg.as_matrix(loop_unitary)
    de, dl = (int(d) for d in dims)
    if u.shape != (de * dl, de * dl):
        raise DimensionError(f"loop unitary of shape {u.shape} does not match dims {dims}")
    if environment_state is None:
        env = np.eye(de) / de
    else:
        env = environment_state.matrix
        if env.shape != (de, de):
            raise DimensionError("environment state does not match dims[0]")
    rho = (start.matrix if start is not None else np.eye(dl) / dl).reshape(-1)
    s = _transfer_matrix(u, (de, dl), env)

    residual = np.inf
    for k in range(1, max_iter + 1):
        t = s @ rho
        residual = float(np.max(np.abs(t - rho)))
        if residual <= tol:
            if k == 1 and start is not None:
                return ChannelFixedPoint(start, residual, k)
            r = rho.reshape(dl, dl)
            return ChannelFixedPoint(DensityMatrix((r + r.conj().T) / 2), residual, k)
        rho = (rho + t) / 2
    raise ConvergenceError(residual, max_iter)


@dataclass(frozen=True)
class FixedPointReport:
    classical_fixed_points: list[str] | None
    quantum_eigenspace: list[np.ndarray]
    channel_fixed_point: DensityMatrix | None
    classification: str
    residual: float = 0.0
    notes: list[str] = field(default_factory=list)


def classify(classical: list[str] | None, quantum: list) -> str:
    """``None`` for ``classical`` means cbits do not map to cbits: no classical solution."""
    if classical:
        return CONSISTENT
    return RESOLVED if quantum else UNRESOLVABLE


def analyze(g: Gate, tol: float = linalg.NULLSPACE_TOL) -> FixedPointReport:
    cmap = basis_map(g)
    classical = classical_fixed_points(cmap) if cmap is not None else None
    quantum = pure_fixed_points(g, tol)
    notes = []
    if cmap is None:
        notes.append("gate does not permute basis states; classical analysis not applicable")

    if quantum:
        # uniform mixture over the fixed basis: the maximum-entropy choice
        rho = sum(np.outer(v, v.conj()) for v in quantum) / len(quantum)
        fixed = DensityMatrix(rho)
        m = g.matrix
        residual = linalg.max_norm(m @ rho @ m.conj().T - rho)
    else:
        sol = channel_fixed_point(g.matrix, (1, g.dim), DensityMatrix([[1.0]]))
        fixed, residual = sol.state, sol.residual

    return FixedPointReport(
        classical_fixed_points=classical,
        quantum_eigenspace=quantum,
        channel_fixed_point=fixed,
        classification=classify(classical, quantum),
        residual=float(residual),
        notes=notes,
    )

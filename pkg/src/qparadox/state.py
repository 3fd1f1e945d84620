"""Classical bits, qbits, density matrices and seeded measurement sampling.

Basis identification follows the signalling loop: ``|0>`` is the "-" outcome
and ``|1>`` is the "+" outcome.

Randomness comes from :class:`RngStream`, an immutable handle on a
Philox4x64-10 counter-based generator. The 128-bit Philox key is
``(seed, stream_id)``; the draw made at logical ``position`` ``k`` uses the
counter block starting at ``k << 64``, so each call gets its own 2**64-block
region and never overlaps with another. A draw returns the advanced stream
instead of mutating it. Child streams for parallel batches are derived with
:meth:`RngStream.split`, which hashes ``(stream_id, position, index)`` through
splitmix64 into a fresh stream id.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import StateError

NORM_TOL = 1e-10
ACCEPT_WINDOW = 1e-6
BATCH_SIZE = 8192

_MASK64 = (1 << 64) - 1


class Cbit(enum.IntEnum):
    ZERO = 0
    ONE = 1

    @property
    def sign(self) -> str:
        return "+" if self is Cbit.ONE else "-"

    @classmethod
    def from_sign(cls, s: str) -> "Cbit":
        if s == "+":
            return cls.ONE
        if s in ("-", "−"):
            return cls.ZERO
        raise ValueError(f"not an outcome sign: {s!r}")

    def as_qbit(self) -> "Qbit":
        return BASIS[int(self)]


@dataclass(frozen=True)
class Qbit:
    """Pure state ``a|0> + b|1>`` with ``|a|^2 + |b|^2 = 1``."""

    a: complex
    b: complex

    def __post_init__(self):
        a, b = complex(self.a), complex(self.b)
        if not all(math.isfinite(x) for x in (a.real, a.imag, b.real, b.imag)):
            raise StateError("amplitudes must be finite")
        if abs(abs(a) ** 2 + abs(b) ** 2 - 1.0) > NORM_TOL:
            raise StateError(f"amplitudes ({a}, {b}) are not normalized")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def vector(self) -> np.ndarray:
        return linalg.as_vector([self.a, self.b])

    @classmethod
    def from_vector(cls, v) -> "Qbit":
        v = linalg.as_vector(v)
        if v.shape != (2,):
            raise StateError(f"a qbit has two amplitudes, got {v.shape[0]}")
        return qbit_new(v[0], v[1])

    def close_to(self, other: "Qbit", tol: float = 1e-12) -> bool:
        return abs(self.a - other.a) <= tol and abs(self.b - other.b) <= tol


def qbit_new(a: complex, b: complex) -> Qbit:
    """Build a Qbit, renormalizing inputs whose squared norm is within 1e-6 of one."""
    a, b = complex(a), complex(b)
    n2 = abs(a) ** 2 + abs(b) ** 2
    if n2 == 0.0:
        raise StateError("the zero vector is not a state")
    if not math.isfinite(n2) or abs(n2 - 1.0) > ACCEPT_WINDOW:
        raise StateError(f"squared norm {n2!r} is outside the acceptance window")
    n = math.sqrt(n2)
    return Qbit(a / n, b / n)


BASIS = (Qbit(1, 0), Qbit(0, 1))
ZERO, ONE = BASIS
FIXED_POINT = Qbit(1 / math.sqrt(2), 1 / math.sqrt(2))
ANTI_FIXED_POINT = Qbit(1 / math.sqrt(2), -1 / math.sqrt(2))


def born_probabilities(q: Qbit) -> tuple[float, float]:
    p0, p1 = abs(q.a) ** 2, abs(q.b) ** 2
    s = p0 + p1
    return p0 / s, p1 / s


class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite operator on ``2**n`` levels."""

    __slots__ = ("_m",)

    def __init__(self, matrix, tol: float = 1e-10, psd_floor: float = -1e-9):
        m = linalg.as_matrix(matrix)
        n = m.shape[0]
        if m.shape[1] != n or n & (n - 1):
            raise StateError(f"density matrix side must be a power of 2, got {m.shape}")
        if linalg.max_norm(m - m.conj().T) > tol:
            raise StateError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > tol:
            raise StateError(f"density matrix trace {np.trace(m)} != 1")
        if float(np.min(np.linalg.eigvalsh(m))) < psd_floor:
            raise StateError("density matrix has a negative eigenvalue")
        self._m = m

    @property
    def matrix(self) -> np.ndarray:
        return self._m

    @property
    def dim(self) -> int:
        return self._m.shape[0]

    def purity(self) -> float:
        return float(np.real(np.trace(self._m @ self._m)))

    def diagonal_probabilities(self) -> np.ndarray:
        p = np.clip(np.real(np.diag(self._m)), 0.0, None)
        return p / p.sum()

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim) / dim)

    def __eq__(self, other):
        if not isinstance(other, DensityMatrix):
            return NotImplemented
        return np.array_equal(self._m, other._m)

    def __hash__(self):
        return hash(self._m.tobytes())

    def __repr__(self):
        return f"DensityMatrix({self._m.tolist()!r})"


def to_density(q: Qbit) -> DensityMatrix:
    v = q.vector
    return DensityMatrix(np.outer(v, v.conj()))


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


@dataclass(frozen=True)
class RngStream:
    seed: int = 0
    stream_id: int = 0
    position: int = 0

    def __post_init__(self):
        for field in ("seed", "stream_id", "position"):
            v = getattr(self, field)
            if not isinstance(v, (int, np.integer)) or not 0 <= int(v) <= _MASK64:
                raise ValueError(f"{field} must be an unsigned 64-bit integer, got {v!r}")
            object.__setattr__(self, field, int(v))

    def _generator(self) -> np.random.Generator:
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key, counter=self.position << 64))

    def uniforms(self, n: int) -> tuple[np.ndarray, "RngStream"]:
        """Draw ``n`` doubles in [0, 1) and return them with the advanced stream."""
        u = self._generator().random(int(n))
        return u, RngStream(self.seed, self.stream_id, (self.position + 1) & _MASK64)

    def uniform(self) -> tuple[float, "RngStream"]:
        u, nxt = self.uniforms(1)
        return float(u[0]), nxt

    def split(self, index: int) -> "RngStream":
        h = self.stream_id
        for word in (self.position, index):
            h = _splitmix64(h ^ _splitmix64(word & _MASK64))
        return RngStream(self.seed, h, 0)


def sample_measurement(q: Qbit, rng: RngStream) -> tuple[Cbit, Qbit, RngStream]:
    """One computational-basis measurement; returns outcome, collapsed state, next stream."""
    p0, _ = born_probabilities(q)
    u, rng = rng.uniform()
    outcome = Cbit.ZERO if u < p0 else Cbit.ONE
    return outcome, BASIS[outcome], rng


def batched(shots: int, rng: RngStream, draw, workers: int = 1):
    """Run ``draw(size, stream)`` over fixed-size shot batches.

    Batch ``i`` always gets ``rng.split(i)`` regardless of ``workers``, so the
    list of batch results is identical for any worker count.
    """
    shots = int(shots)
    if shots < 0:
        raise ValueError("shots must be non-negative")
    sizes = [BATCH_SIZE] * (shots // BATCH_SIZE)
    if shots % BATCH_SIZE:
        sizes.append(shots % BATCH_SIZE)
    jobs = [(size, rng.split(i)) for i, size in enumerate(sizes)]
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda job: draw(*job), jobs))
    else:
        results = [draw(size, stream) for size, stream in jobs]
    return results, RngStream(rng.seed, rng.stream_id, (rng.position + 1) & _MASK64)


def sample_counts(
    p0: float, shots: int, rng: RngStream, workers: int = 1
) -> tuple[tuple[int, int], RngStream]:
    """Counts of outcomes 0 and 1 over ``shots`` independent basis measurements."""
    if not 0.0 <= p0 <= 1.0:
        raise ValueError(f"probability out of range: {p0!r}")

    def draw(size, stream):
        u, _ = stream.uniforms(size)
        return int(np.count_nonzero(u < p0))

    zeros, rng = batched(shots, rng, draw, workers)
    n0 = sum(zeros)
    return (n0, int(shots) - n0), rng


def sample_qbit_counts(q: Qbit, shots: int, rng: RngStream, workers: int = 1):
    return sample_counts(born_probabilities(q)[0], shots, rng, workers)

"""Contradictory facts stored as coherent superpositions.

Two sources that disagree on a bit are merged into ``(|a> + |b>)/sqrt(2)``.
The record is then processed unitarily without measuring. It collapses to a
cbit only when :func:`resolve` reads it out.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import DimensionError, StateError
from .operators import Gate, apply_gate
from .state import BASIS, Cbit, Qbit, RngStream, sample_measurement

MAX_JOINT_RECORDS = 10

_R = 1 / math.sqrt(2)


def merge(a: Cbit | int, b: Cbit | int, relative_phase: int = +1) -> Cbit | Qbit:
    """Agreeing cbits pass through; disagreeing ones become an equal-weight superposition.

    ``relative_phase=-1`` gives the antisymmetric combination ``(|0> - |1>)/sqrt(2)``
    instead, with the phase attached to ``|1>`` so the result does not depend on
    argument order.
    """
    a, b = Cbit(a), Cbit(b)
    if relative_phase not in (1, -1):
        raise ValueError("relative_phase must be +1 or -1")
    if a == b:
        return a
    return Qbit(_R, relative_phase * _R)


def merge_many(values, *, experimental: bool = False) -> Cbit | Qbit:
    """Coherent sum over k source values, normalized. Experimental generalization."""
    if not experimental:
        raise ValueError("k-way merge is experimental; pass experimental=True")
    values = [Cbit(v) for v in values]
    if not values:
        raise ValueError("nothing to merge")
    n1 = sum(values)
    n0 = len(values) - n1
    if n0 == 0 or n1 == 0:
        return values[0]
    norm = math.hypot(n0, n1)
    return Qbit(n0 / norm, n1 / norm)


@dataclass(frozen=True)
class FactRecord:
    key: str
    state: Cbit | Qbit
    provenance: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "provenance", tuple(self.provenance))
        if isinstance(self.state, Qbit):
            return
        object.__setattr__(self, "state", Cbit(self.state))

    @property
    def qbit(self) -> Qbit:
        return self.state if isinstance(self.state, Qbit) else BASIS[self.state]


def merge_records(key: str, *records: FactRecord, relative_phase: int = +1) -> FactRecord:
    """Merge two cbit records about the same fact; provenance is concatenated."""
    if len(records) != 2:
        raise ValueError("merge_records takes exactly two records")
    r1, r2 = records
    if isinstance(r1.state, Qbit) or isinstance(r2.state, Qbit):
        raise StateError("only cbit records can be merged")
    return FactRecord(key, merge(r1.state, r2.state, relative_phase), r1.provenance + r2.provenance)


def process(pipeline, r: FactRecord) -> FactRecord:
    """Apply gates in order. Cbits are embedded as basis states and stay coherent."""
    pipeline = list(pipeline)
    if not pipeline:
        return r
    q = r.qbit
    for g in pipeline:
        if g.dim != 2:
            raise DimensionError(f"pipeline gate {g.name!r} is not 2x2")
        q = apply_gate(g, q)
    return FactRecord(r.key, q, r.provenance)


def resolve(r: FactRecord, rng: RngStream) -> tuple[Cbit, RngStream]:
    if isinstance(r.state, Cbit):
        return r.state, rng
    outcome, _, rng = sample_measurement(r.state, rng)
    return outcome, rng


class JointRegister:
    """k records processed jointly as one state vector of length 2**k.

    Record ``i`` is tensor factor ``i`` (most significant first).
    """

    def __init__(self, records):
        records = list(records)
        if not 1 <= len(records) <= MAX_JOINT_RECORDS:
            raise ValueError(f"joint registers hold 1..{MAX_JOINT_RECORDS} records")
        self.keys = tuple(r.key for r in records)
        psi = np.ones(1, dtype=np.complex128)
        for r in records:
            psi = np.kron(psi, r.qbit.vector)
        self._psi = linalg.as_vector(psi)

    @property
    def k(self) -> int:
        return len(self.keys)

    @property
    def state(self) -> np.ndarray:
        return self._psi

    def apply(self, g: Gate, index: int) -> "JointRegister":
        if g.dim != 2:
            raise DimensionError("joint-register gates act on one record")
        if not 0 <= index < self.k:
            raise IndexError(index)
        t = self._psi.reshape((2,) * self.k)
        t = np.moveaxis(np.tensordot(g.matrix, t, axes=([1], [index])), 0, index)
        out = JointRegister.__new__(JointRegister)
        out.keys = self.keys
        out._psi = linalg.as_vector(t.reshape(-1))
        return out

    def marginal(self, index: int) -> tuple[float, float]:
        p = (np.abs(self._psi) ** 2).reshape((2,) * self.k)
        axes = tuple(a for a in range(self.k) if a != index)
        m = p.sum(axis=axes) if axes else p
        return float(m[0]), float(m[1])


def record_to_json(r: FactRecord) -> str:
    obj: dict = {"key": r.key}
    if isinstance(r.state, Qbit):
        obj["kind"] = "qbit"
        obj["amplitudes"] = [[r.state.a.real, r.state.a.imag], [r.state.b.real, r.state.b.imag]]
    else:
        obj["kind"] = "cbit"
        obj["value"] = int(r.state)
    obj["provenance"] = list(r.provenance)
    return json.dumps(obj)


def record_from_json(line: str) -> FactRecord:
    obj = json.loads(line)
    kind = obj.get("kind")
    if kind == "cbit":
        state = Cbit(obj["value"])
    elif kind == "qbit":
        (ar, ai), (br, bi) = obj["amplitudes"]
        state = Qbit(complex(ar, ai), complex(br, bi))
    else:
        raise ValueError(f"unknown record kind {kind!r}")
    return FactRecord(str(obj["key"]), state, tuple(obj.get("provenance", ())))


def dump_records(records, fp) -> None:
    for r in records:
        fp.write(record_to_json(r) + "\n")


def load_records(fp) -> list[FactRecord]:
    return [record_from_json(line) for line in fp if line.strip()]

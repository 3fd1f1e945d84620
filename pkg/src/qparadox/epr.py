"""Singlet correlations and the two-telegraph signalling loop.

A telegraph is a singlet pair with an active (preparation) arm and a passive
(measurement) arm. Outcome control on the active arm is the counterfactual
premise of the construction: here it is modelled simply as preparing the
arm's state. At relative angle pi the two arms always agree, so the telegraph
relays a bit unchanged.

Loop wiring, for the state received by the agent at t_A':

    agent policy (t_A) -> telegraph 1-2 -> mirror (t_B) -> telegraph 3-4 -> t_A'

Angles are in-plane measurement angles; outcome +1 is cbit 1 ("+"), -1 is
cbit 0 ("-").
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import DimensionError, ScenarioError
from .fixedpoint import basis_map, channel_fixed_point, pure_fixed_points
from .operators import Gate, identity_gate
from .state import Cbit, DensityMatrix, Qbit, RngStream, batched

PERFECT_TOL = 1e-9
DEFAULT_ORDER = ("tS", "tB", "tA")
# required relative order of the source, mirror and agent events
_CANONICAL_EVENTS = ("tS", "tB", "tA")

_SINGLET = linalg.as_vector(np.array([0, 1, -1, 0]) / math.sqrt(2))


@dataclass(frozen=True)
class SingletPair:
    state: np.ndarray

    def reduced(self, keep: int) -> np.ndarray:
        rho = np.outer(self.state, self.state.conj())
        return linalg.partial_trace(rho, (2, 2), keep)


def singlet() -> SingletPair:
    """(|01> - |10>)/sqrt(2) in the |00>, |01>, |10>, |11> basis."""
    return SingletPair(_SINGLET)


def spin_observable(theta: float) -> np.ndarray:
    """±1-valued spin observable along in-plane angle ``theta``."""
    c, s = math.cos(theta), math.sin(theta)
    return linalg.as_matrix([[c, s], [s, -c]])


def correlation(alpha: float, beta: float) -> float:
    """Expected outcome product for singlet measurements along ``alpha``, ``beta``."""
    return -math.cos(alpha - beta)


def agreement_probability(alpha: float, beta: float) -> float:
    """P(left == right) = (1 - cos(alpha - beta)) / 2."""
    return (1.0 - math.cos(alpha - beta)) / 2.0


def _pair_sampler(p_same: float):
    def draw(size, stream):
        u, _ = stream.uniforms(2 * size)
        left = np.where(u[:size] < 0.5, 1, -1).astype(np.int8)
        right = np.where(u[size:] < p_same, left, -left).astype(np.int8)
        return left, right

    return draw


def sample_pair(alpha: float, beta: float, rng: RngStream) -> tuple[tuple[int, int], RngStream]:
    """One joint outcome drawn from P(s, t) = (1 - s t cos(alpha - beta)) / 4."""
    u, rng = rng.uniforms(2)
    left = 1 if u[0] < 0.5 else -1
    right = left if u[1] < agreement_probability(alpha, beta) else -left
    return (left, right), rng


def sample_pairs(
    alpha: float, beta: float, shots: int, rng: RngStream, workers: int = 1
) -> tuple[np.ndarray, np.ndarray, RngStream]:
    results, rng = batched(shots, rng, _pair_sampler(agreement_probability(alpha, beta)), workers)
    if not results:
        empty = np.zeros(0, dtype=np.int8)
        return empty, empty, rng
    left = np.concatenate([r[0] for r in results])
    right = np.concatenate([r[1] for r in results])
    return left, right, rng


@dataclass(frozen=True)
class TelegraphConfig:
    name: str
    active_angle: float
    passive_angle: float

    @property
    def relative_angle(self) -> float:
        return self.passive_angle - self.active_angle

    @property
    def perfect(self) -> bool:
        """True when the arm angles differ by pi (mod 2 pi)."""
        return abs(abs(math.remainder(self.relative_angle, 2 * math.pi)) - math.pi) <= PERFECT_TOL

    @property
    def agreement(self) -> float:
        return agreement_probability(self.active_angle, self.passive_angle)

    def transfer_unitary(self) -> np.ndarray:
        """Relay unitary R_y(delta - pi): identity at delta = pi, agreement prob. (1 - cos delta)/2."""
        half = (self.relative_angle - math.pi) / 2
        c, s = math.cos(half), math.sin(half)
        return linalg.as_matrix([[c, -s], [s, c]])


@dataclass(frozen=True)
class Mirror:
    name: str = "M"
    gate: Gate = identity_gate()


@dataclass(frozen=True)
class LoopScenario:
    name: str
    telegraphs: tuple[TelegraphConfig, ...]
    agent_policy: Gate
    mirror: Mirror | None = None
    event_order: tuple[str, ...] = DEFAULT_ORDER
    shots: int = 10_000


def check_event_order(order) -> None:
    order = tuple(order)
    if len(set(order)) != len(order):
        raise ScenarioError(f"event order {' < '.join(order)} repeats an event")
    present = [e for e in order if e in _CANONICAL_EVENTS]
    expected = [e for e in _CANONICAL_EVENTS if e in order]
    if present != expected:
        raise ScenarioError(
            f"event order {' < '.join(order)} contradicts {' < '.join(_CANONICAL_EVENTS)}"
        )


@dataclass(frozen=True)
class LoopResult:
    mode: str
    paradox: bool
    consistent_assignments: tuple[Cbit, ...] | None = None
    outcome_histogram: dict[str, int] | None = None
    fixed_point_used: Qbit | None = None
    fixed_point_density: DensityMatrix | None = None
    loop_unitary: np.ndarray | None = None
    shots: int = 0


def _closed_loop_parts(s: LoopScenario):
    if len(s.telegraphs) != 2:
        raise ScenarioError(
            f"scenario {s.name!r} has {len(s.telegraphs)} telegraph(s); a closed loop needs two"
        )
    if s.agent_policy.dim != 2:
        raise DimensionError("the agent policy must be a single-qbit (2x2) gate")
    check_event_order(s.event_order)
    mirror = s.mirror if s.mirror is not None else Mirror()
    if mirror.gate.dim != 2:
        raise DimensionError("the mirror relay must be a single-qbit (2x2) gate")
    return s.telegraphs, mirror.gate


def loop_unitary(s: LoopScenario) -> np.ndarray:
    (t12, t34), relay = _closed_loop_parts(s)
    return linalg.as_matrix(
        t34.transfer_unitary() @ relay.matrix @ t12.transfer_unitary() @ s.agent_policy.matrix
    )


def _classical_relay(t: TelegraphConfig, x: int) -> int | None:
    """Deterministic telegraph relay of a cbit; ``None`` when the outcome is random."""
    p = t.agreement
    if abs(p - 1.0) <= PERFECT_TOL:
        return x
    if abs(p) <= PERFECT_TOL:
        return 1 - x
    return None


def _run_classical(s: LoopScenario) -> LoopResult:
    (t12, t34), relay = _closed_loop_parts(s)
    policy_map, relay_map = basis_map(s.agent_policy), basis_map(relay)
    if policy_map is None or relay_map is None:
        raise ScenarioError("classical mode needs policy and mirror gates that permute cbits")
    consistent = []
    for received in (Cbit.ZERO, Cbit.ONE):
        # A sees `received` at t_A', then stimulates policy(received) at t_A
        sent = policy_map(int(received))
        at_mirror = _classical_relay(t12, sent)
        if at_mirror is None:
            continue
        back = _classical_relay(t34, relay_map(at_mirror))
        if back == int(received):
            consistent.append(received)
    return LoopResult(
        mode="classical",
        paradox=not consistent,
        consistent_assignments=tuple(consistent),
        loop_unitary=loop_unitary(s),
    )


def _run_quantum(s: LoopScenario, rng: RngStream, shots: int, workers: int) -> LoopResult:
    u = loop_unitary(s)
    fixed = pure_fixed_points(Gate("loop", u))
    fixed_qbit = None
    if len(fixed) == 1:
        fixed_qbit = Qbit.from_vector(fixed[0])
        rho = np.outer(fixed[0], fixed[0].conj())
    elif fixed:
        rho = sum(np.outer(v, v.conj()) for v in fixed) / len(fixed)
    else:
        rho = channel_fixed_point(u, (1, 2), DensityMatrix([[1.0]])).state.matrix
    fixed_density = DensityMatrix(rho)

    # the emitted state at t_A is the policy applied to the consistent input
    p = s.agent_policy.matrix
    emitted = p @ rho @ p.conj().T
    p0 = min(max(float(np.real(emitted[0, 0])), 0.0), 1.0)

    def draw(size, stream):
        u01, _ = stream.uniforms(size)
        return int(np.count_nonzero(u01 < p0))

    counts, _ = batched(shots, rng, draw, workers)
    minus = sum(counts)
    return LoopResult(
        mode="quantum",
        paradox=False,
        outcome_histogram={"+": shots - minus, "-": minus},
        fixed_point_used=fixed_qbit,
        fixed_point_density=fixed_density,
        loop_unitary=u,
        shots=shots,
    )


def run_loop(
    s: LoopScenario,
    mode: str,
    rng: RngStream | None = None,
    shots: int | None = None,
    workers: int = 1,
) -> LoopResult:
    """Simulate the closed signalling loop.

    ``classical`` enumerates the two cbit values on the loop wire and keeps the
    self-consistent ones. ``quantum`` finds the fixed point of the loop
    unitary and histograms ``shots`` measurements of the state emitted at t_A.
    """
    if mode == "classical":
        return _run_classical(s)
    if mode == "quantum":
        n = s.shots if shots is None else int(shots)
        if n < 1:
            raise ValueError("shots must be positive")
        return _run_quantum(s, rng if rng is not None else RngStream(), n, workers)
    raise ValueError(f"mode must be 'classical' or 'quantum', got {mode!r}")

from __future__ import annotations
from copy import deepcopy
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple
import logging

import numpy as np

from . import logger, DEFAULT_CAPACITY, BRANCH_TOLERANCE
from .circuit import (
    OpKind, PhysicalOp, PhysicalCircuit, validate, SINGLE_QUBIT_GATES,
    TWO_QUBIT_GATES, MEASUREMENT_OPS)
from .codes import QubitPermutation, conjugate_by_permutation
from .pauli import PauliString, CLIFFORD_RULES, multiply
from .debug import debug_shot

SQRT1_2 = 1 / np.sqrt(2)
OMEGA = np.exp(1j * np.pi / 4)

MATRICES = {
    'H': np.array([[SQRT1_2, SQRT1_2], [SQRT1_2, -SQRT1_2]], dtype=complex),
    'X': np.array([[0, 1], [1, 0]], dtype=complex),
    'Y': np.array([[0, -1j], [1j, 0]], dtype=complex),
    'Z': np.array([[1, 0], [0, -1]], dtype=complex),
    'S': np.diag([1, 1j]).astype(complex),
    'Sdg': np.diag([1, -1j]).astype(complex),
    'T': np.diag([1, OMEGA]).astype(complex),
    'Tdg': np.diag([1, np.conj(OMEGA)]).astype(complex),
}

# Phase picked up by |1> under each diagonal gate
DIAGONAL = {'Z': -1, 'S': 1j, 'Sdg': -1j, 'T': OMEGA, 'Tdg': np.conj(OMEGA)}

TWO_QUBIT_PAULIS = tuple(
    a + b for a in 'IXYZ' for b in 'IXYZ' if a + b != 'II')


class CapacityError(Exception):
    def __init__(self, needed: int, capacity: int):
        message = (f'Simulation needs {needed} active qubits but the '
                   f'capacity is {capacity}')
        super().__init__(message)


class InvalidCircuitError(Exception):
    def __init__(self, violations: list):
        first = '; '.join(str(v) for v in violations[:3])
        message = f'Circuit has {len(violations)} violation' \
                  f'{"s"[:len(violations)^1]}: {first}'
        super().__init__(message)


class FaultLocationError(Exception):
    def __init__(self, location: int, size: int):
        message = f'Fault location {location} is outside 0..{size}'
        super().__init__(message)


@dataclass(frozen=True)
class NoiseModel:
    p1: float = 0.0
    p2: float = 0.0
    p_meas: float = 0.0
    p_prep: float = 0.0

    def __post_init__(self):
        for name in ('p1', 'p2', 'p_meas', 'p_prep'):
            value = float(getattr(self, name))
            if not 0.0 <= value <= 1.0:
                raise ValueError(f'{name}={value} is not a probability')
            super().__setattr__(name, value)

    @classmethod
    def from_string(cls, text: str) -> NoiseModel:
        """Parse 'p1,p2,p_meas,p_prep'; missing trailing rates are 0"""
        parts = [p for p in text.split(',') if p.strip()]
        if len(parts) > 4:
            raise ValueError(f'too many noise rates in {text!r}')
        return cls(*(float(p) for p in parts))

    @property
    def is_noiseless(self) -> bool:
        return not (self.p1 or self.p2 or self.p_meas or self.p_prep)

    def __str__(self) -> str:
        return f'{self.p1},{self.p2},{self.p_meas},{self.p_prep}'


NOISELESS = NoiseModel()


@dataclass(frozen=True)
class FaultEvent:
    location: int
    qubits: Tuple[int, ...]
    pauli: str


@dataclass(frozen=True)
class FaultSite:
    """A single fault: insert pauli on qubits before op index location.
    A measurement flip is modelled as the Pauli that anticommutes with the
    measured observable, inserted just before the measurement."""
    location: int
    qubits: Tuple[int, ...]
    pauli: str


@dataclass
class ShotRecord:
    seed: object
    record: Tuple[int, ...]
    discarded: bool
    accepted_bits: Tuple[int, ...]
    faults: Tuple[FaultEvent, ...] = ()
    state: Optional[SimState] = field(default=None, repr=False,
                                      compare=False)


def _split(amplitudes: np.ndarray, k: int, pos: int) -> np.ndarray:
    return amplitudes.reshape(1 << (k - 1 - pos), 2, 1 << pos)


def _pair(amplitudes: np.ndarray, k: int, pa: int, pb: int):
    lo, hi = sorted((pa, pb))
    view = amplitudes.reshape(
        1 << (k - 1 - hi), 2, 1 << (hi - lo - 1), 2, 1 << lo)
    axes = {hi: 1, lo: 3}
    return view, axes[pa], axes[pb]


def _index(axis_a: int, value_a: int, axis_b: int, value_b: int) -> tuple:
    index = [slice(None)] * 5
    index[axis_a] = value_a
    index[axis_b] = value_b
    return tuple(index)


def _apply_matrix(amplitudes: np.ndarray, k: int, pos: int,
                  matrix: np.ndarray):
    view = _split(amplitudes, k, pos)
    a0 = view[:, 0, :].copy()
    a1 = view[:, 1, :].copy()
    view[:, 0, :] = matrix[0, 0] * a0 + matrix[0, 1] * a1
    view[:, 1, :] = matrix[1, 0] * a0 + matrix[1, 1] * a1


def _apply_letter(amplitudes: np.ndarray, k: int, pos: int, letter: str):
    view = _split(amplitudes, k, pos)
    if letter == 'Z':
        view[:, 1, :] *= -1
    elif letter == 'X':
        view[:] = view[:, ::-1, :].copy()
    elif letter == 'Y':
        a0 = view[:, 0, :].copy()
        view[:, 0, :] = -1j * view[:, 1, :]
        view[:, 1, :] = 1j * a0


class SimState:
    """Dense amplitudes over the currently active physical qubits.

    Qubits are activated in |0> on first touch and released again when
    re-prepared, so the vector only spans the qubits in use. Bit position
    b of the amplitude index belongs to physical qubit self.order[b].
    """

    def __init__(self, n: int, seed=None,
                 capacity: int = DEFAULT_CAPACITY):
        self.n = n
        self.capacity = capacity
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.amplitudes = np.ones(1, dtype=complex)
        self.order: List[int] = []
        self.positions: Dict[int, int] = {}
        self.record: List[int] = []
        self.discarded = False
        self.faults: List[FaultEvent] = []
        self.frame = PauliString.identity(n)

    @classmethod
    def from_vector(cls, vector: np.ndarray, seed=None,
                    capacity: int = DEFAULT_CAPACITY) -> SimState:
        """State whose qubit q is bit q of the index of vector"""
        n = int(np.log2(len(vector)))
        if 1 << n != len(vector):
            raise ValueError('vector length is not a power of two')
        if n > capacity:
            raise CapacityError(n, capacity)
        state = cls(n, seed, capacity)
        state.amplitudes = np.array(vector, dtype=complex)
        state.order = list(range(n))
        state.positions = {q: q for q in range(n)}
        return state

    def copy(self) -> SimState:
        return deepcopy(self)

    @property
    def active(self) -> int:
        return len(self.order)

    def _check(self, q: int):
        if not 0 <= q < self.n:
            raise IndexError(f'qubit {q} outside 0..{self.n - 1}')

    def activate(self, q: int) -> int:
        self._check(q)
        if q in self.positions:
            return self.positions[q]
        if self.active >= self.capacity:
            raise CapacityError(self.active + 1, self.capacity)
        self.amplitudes = np.concatenate(
            [self.amplitudes, np.zeros_like(self.amplitudes)])
        self.positions[q] = self.active
        self.order.append(q)
        return self.positions[q]

    def release(self, q: int):
        """Drop an active qubit whose amplitude on |1> is zero"""
        pos = self.positions.pop(q)
        view = _split(self.amplitudes, self.active, pos)
        self.amplitudes = np.ascontiguousarray(view[:, 0, :]).reshape(-1)
        del self.order[pos]
        for p, qubit in enumerate(self.order[pos:], start=pos):
            self.positions[qubit] = p

    def vector(self) -> np.ndarray:
        """Full 2^n vector with qubit q on bit q, inactive qubits in |0>"""
        k = self.active
        if self.n > self.capacity:
            raise CapacityError(self.n, self.capacity)
        tensor = self.amplitudes.reshape((2,) * k) if k else \
            self.amplitudes.reshape(())
        descending = sorted(self.order, reverse=True)
        tensor = np.transpose(
            tensor, [k - 1 - self.positions[q] for q in descending])
        full = np.zeros((2,) * self.n, dtype=complex)
        index = tuple(slice(None) if q in self.positions else 0
                      for q in reversed(range(self.n)))
        full[index] = tensor
        return full.reshape(-1)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    # unitary kernels

    def gate(self, name: str, q: int):
        pos = self.activate(q)
        if name in DIAGONAL:
            _split(self.amplitudes, self.active, pos)[:, 1, :] *= \
                DIAGONAL[name]
        elif name in ('X', 'Y'):
            _apply_letter(self.amplitudes, self.active, pos, name)
        else:
            _apply_matrix(self.amplitudes, self.active, pos, MATRICES[name])

    def cx(self, control: int, target: int):
        pc, pt = self.activate(control), self.activate(target)
        view, ac, at = _pair(self.amplitudes, self.active, pc, pt)
        i10, i11 = _index(ac, 1, at, 0), _index(ac, 1, at, 1)
        swap = view[i10].copy()
        view[i10] = view[i11]
        view[i11] = swap

    def cz(self, a: int, b: int):
        pa, pb = self.activate(a), self.activate(b)
        view, aa, ab = _pair(self.amplitudes, self.active, pa, pb)
        view[_index(aa, 1, ab, 1)] *= -1

    def pauli(self, qubits: Sequence[int], letters: str):
        for q, letter in zip(qubits, letters):
            if letter != 'I':
                self.gate(letter, q)

    def apply_pauli_string(self, p: PauliString):
        qubits = p.support
        self.pauli(qubits, ''.join(p.letter(q) for q in qubits))
        if p.phase:
            self.amplitudes *= 1j ** p.phase

    def rotate(self, qubits: Sequence[int], letters: str, angle: float):
        """exp(-i angle/2 P) for the Pauli P given by letters"""
        for q in qubits:
            self.activate(q)
        original = self.amplitudes.copy()
        self.pauli(qubits, letters)
        self.amplitudes = np.cos(angle / 2) * original \
            - 1j * np.sin(angle / 2) * self.amplitudes

    def relabel(self, qubits: Sequence[int], mapping: Sequence[int]):
        moved = {}
        for i, q in enumerate(qubits):
            moved[qubits[mapping[i]]] = self.positions.get(q)
        for q in qubits:
            self.positions.pop(q, None)
        for q, pos in moved.items():
            if pos is not None:
                self.positions[q] = pos
                self.order[pos] = q
        full = list(range(self.n))
        for i, q in enumerate(qubits):
            full[q] = qubits[mapping[i]]
        self.frame = conjugate_by_permutation(
            self.frame, QubitPermutation(tuple(full)))

    # projective operations

    def probability_one(self, q: int) -> float:
        if q not in self.positions:
            return 0.0
        view = _split(self.amplitudes, self.active, self.positions[q])
        return float(np.sum(np.abs(view[:, 1, :]) ** 2))

    def project(self, q: int) -> int:
        """Born-rule Z measurement of q without touching the record"""
        p1 = self.probability_one(q)
        draw = self.rng.random()
        if p1 < BRANCH_TOLERANCE:
            outcome = 0
        elif p1 > 1 - BRANCH_TOLERANCE:
            outcome = 1
        else:
            outcome = int(draw < p1)
        if q in self.positions:
            view = _split(self.amplitudes, self.active, self.positions[q])
            view[:, 1 - outcome, :] = 0
            weight = p1 if outcome else 1 - p1
            self.amplitudes /= np.sqrt(weight)
        return outcome

    def prepare(self, q: int, basis: str = 'Z'):
        self._check(q)
        if q in self.positions:
            if self.project(q):
                self.gate('X', q)
            self.release(q)
        self._clear_frame(q)
        if basis == 'X':
            self.gate('H', q)

    # Pauli frame

    def _clear_frame(self, q: int):
        mask = ~(1 << q)
        self.frame = PauliString(self.n, self.frame.x & mask,
                                 self.frame.z & mask)

    def flush_frame(self, qubits: Optional[Iterable[int]] = None):
        """Apply pending frame letters physically"""
        targets = self.frame.support if qubits is None else [
            q for q in qubits if (self.frame.x | self.frame.z) >> q & 1]
        for q in targets:
            self.gate(self.frame.letter(q), q)
            self._clear_frame(q)

    def track(self, qubits: Sequence[int], letters: str):
        update = PauliString.from_letters(self.n, qubits, letters)
        frame = multiply(self.frame, update)
        self.frame = PauliString(self.n, frame.x, frame.z)

    # expectation values

    def expectation(self, p: PauliString) -> complex:
        shifted = self.copy()
        for q in p.support:
            shifted.activate(q)
        shifted.apply_pauli_string(p)
        return complex(np.vdot(self.amplitudes_on(shifted.order),
                               shifted.amplitudes))

    def amplitudes_on(self, order: Sequence[int]) -> np.ndarray:
        """self.amplitudes extended by |0> qubits to match order"""
        copy = self.copy()
        for q in order:
            copy.activate(q)
        if copy.order != list(order):
            raise ValueError('incompatible qubit order')
        return copy.amplitudes

    def projector_weight(self, paulis: Sequence[PauliString]) -> float:
        """<psi| prod_j (I + P_j)/2 |psi> for commuting Hermitian P_j"""
        kept = self.copy()
        for p in paulis:
            for q in p.support:
                kept.activate(q)
        for p in paulis:
            image = kept.copy()
            image.apply_pauli_string(p)
            kept.amplitudes = (kept.amplitudes + image.amplitudes) / 2
        return float(np.vdot(kept.amplitudes, kept.amplitudes).real)


def apply_gate(state: SimState, op: PhysicalOp) -> SimState:
    """Exact unitary action of a gate or Relabel op"""
    name = op.kind.value
    if op.kind in SINGLE_QUBIT_GATES:
        state.gate(name, op.qubits[0])
    elif op.kind is OpKind.CX:
        state.cx(*op.qubits)
    elif op.kind is OpKind.CZ:
        state.cz(*op.qubits)
    elif op.kind is OpKind.RELABEL:
        state.relabel(op.qubits, op.mapping)
    else:
        raise ValueError(f'{name} is not a gate')
    return state


def measure_pauli(state: SimState, basis: str, qubit: int) -> int:
    """Projective X or Z measurement; appends the bit (0 for +1)"""
    if basis == 'X':
        state.gate('H', qubit)
        bit = state.project(qubit)
        state.gate('H', qubit)
    elif basis == 'Z':
        bit = state.project(qubit)
    else:
        raise ValueError(f'cannot measure in basis {basis!r}')
    state.record.append(bit)
    return bit


def apply_noise(state: SimState, op: PhysicalOp, noise: NoiseModel,
                location: int) -> SimState:
    """Trajectory sample of the noise attached to the op at location"""
    if op.kind in SINGLE_QUBIT_GATES:
        rate, choices = noise.p1, 'XYZ'
    elif op.kind in TWO_QUBIT_GATES:
        rate, choices = noise.p2, TWO_QUBIT_PAULIS
    elif op.kind in (OpKind.P0, OpKind.RESET):
        rate, choices = noise.p_prep, 'X'
    elif op.kind is OpKind.PPLUS:
        rate, choices = noise.p_prep, 'Z'
    else:
        return state
    if rate and state.rng.random() < rate:
        letters = choices[state.rng.integers(len(choices))]
        state.pauli(op.qubits, letters)
        state.faults.append(FaultEvent(location, op.qubits, letters))
    return state


def _parity(record: Sequence[int], clause: Sequence[int]) -> int:
    value = 0
    for bit in clause:
        value ^= record[bit]
    return value


def _propagate_frame(state: SimState, op: PhysicalOp):
    frame = state.frame
    if frame.is_identity:
        return
    if op.kind in (OpKind.T, OpKind.TDG):
        if (frame.x >> op.qubits[0]) & 1:
            state.flush_frame(op.qubits)
        return
    rule = CLIFFORD_RULES.get(op.kind.value)
    if rule is not None:
        frame = rule(frame, *op.qubits)
        state.frame = PauliString(state.n, frame.x, frame.z)


def step(state: SimState, op: PhysicalOp, noise: NoiseModel = NOISELESS,
         location: int = 0):
    """Execute one op, including its noise"""
    kind = op.kind
    if kind in SINGLE_QUBIT_GATES or kind in TWO_QUBIT_GATES:
        _propagate_frame(state, op)
        apply_gate(state, op)
        apply_noise(state, op, noise, location)
    elif kind in MEASUREMENT_OPS:
        basis = 'X' if kind is OpKind.MEAS_X else 'Z'
        bit = measure_pauli(state, basis, op.qubits[0])
        q = op.qubits[0]
        flip = (state.frame.z if basis == 'X' else state.frame.x) >> q & 1
        if noise.p_meas and state.rng.random() < noise.p_meas:
            flip ^= 1
            state.faults.append(FaultEvent(location, op.qubits, 'flip'))
        state.record[-1] = bit ^ flip
    elif kind in (OpKind.P0, OpKind.RESET, OpKind.PPLUS):
        state.prepare(op.qubits[0], 'X' if kind is OpKind.PPLUS else 'Z')
        apply_noise(state, op, noise, location)
    elif kind is OpKind.RELABEL:
        apply_gate(state, op)
    elif kind is OpKind.COND_PAULI:
        if _parity(state.record, op.condition):
            if op.frame:
                state.track(op.qubits, op.pauli)
            else:
                state.pauli(op.qubits, op.pauli)
    elif kind is OpKind.DETECT:
        if _parity(state.record, op.condition):
            state.discarded = True
    elif kind is OpKind.INJECT:
        state.flush_frame(op.qubits)
        state.rotate(op.qubits, op.pauli, op.angle)
    elif kind is OpKind.FAULT:
        state.pauli(op.qubits, op.pauli)
        state.faults.append(FaultEvent(location, op.qubits, op.pauli))


def execute(state: SimState, ops: Sequence[PhysicalOp],
            noise: NoiseModel = NOISELESS, start: int = 0,
            checkpoint: Optional[Tuple[int, Callable]] = None,
            stop_on_discard: bool = True) -> SimState:
    for location, op in enumerate(ops, start):
        if checkpoint is not None and location == checkpoint[0]:
            checkpoint[1](state)
        step(state, op, noise, location)
        if state.discarded and stop_on_discard:
            break
    else:
        if checkpoint is not None and checkpoint[0] == start + len(ops):
            checkpoint[1](state)
    return state


def shot_seed(master_seed: int, shot_index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master_seed, spawn_key=(shot_index,))


def run_shot(circuit: PhysicalCircuit, noise: NoiseModel = NOISELESS,
             seed=None, capacity: int = DEFAULT_CAPACITY,
             checkpoint: Optional[Callable[[SimState], None]] = None,
             keep_state: bool = False, check: bool = True) -> ShotRecord:
    if check:
        violations = validate(circuit)
        if violations:
            raise InvalidCircuitError(violations)
    state = SimState(circuit.n_physical, seed, capacity)
    start = circuit.metadata.readout_start
    hook = None
    if checkpoint is not None and start is not None:
        hook = (start, checkpoint)
    execute(state, circuit.ops, noise, checkpoint=hook)
    accepted = ()
    if not state.discarded:
        accepted = tuple(_parity(state.record, clause)
                         for clause in circuit.metadata.outputs)
    if logger.isEnabledFor(logging.DEBUG):
        debug_shot(circuit, state)
    return ShotRecord(
        seed=seed, record=tuple(state.record), discarded=state.discarded,
        accepted_bits=accepted, faults=tuple(state.faults),
        state=state if keep_state else None)


def fault_sites(circuit: PhysicalCircuit, start: int = 0,
                stop: Optional[int] = None) -> List[FaultSite]:
    """Every single fault of the circuit-level noise model for ops in
    [start, stop)"""
    stop = len(circuit.ops) if stop is None else stop
    sites = []
    for index in range(start, stop):
        op = circuit.ops[index]
        if op.kind in SINGLE_QUBIT_GATES:
            sites.extend(FaultSite(index + 1, op.qubits, letter)
                         for letter in 'XYZ')
        elif op.kind in TWO_QUBIT_GATES:
            for letters in TWO_QUBIT_PAULIS:
                qubits = tuple(q for q, c in zip(op.qubits, letters)
                               if c != 'I')
                sites.append(FaultSite(
                    index + 1, qubits, letters.replace('I', '')))
        elif op.kind is OpKind.MEAS_Z:
            sites.append(FaultSite(index, op.qubits, 'X'))
        elif op.kind is OpKind.MEAS_X:
            sites.append(FaultSite(index, op.qubits, 'Z'))
        elif op.kind in (OpKind.P0, OpKind.RESET):
            sites.append(FaultSite(index + 1, op.qubits, 'X'))
        elif op.kind is OpKind.PPLUS:
            sites.append(FaultSite(index + 1, op.qubits, 'Z'))
    return sites


def inject_fault(circuit: PhysicalCircuit, location: int,
                 pauli: PauliString) -> PhysicalCircuit:
    """Insert a deterministic Pauli before op index location"""
    if not 0 <= location <= len(circuit.ops):
        raise FaultLocationError(location, len(circuit.ops))
    if pauli.n != circuit.n_physical:
        raise ValueError(
            f'fault acts on {pauli.n} qubits, circuit has '
            f'{circuit.n_physical}')
    if pauli.is_identity:
        return circuit
    qubits = pauli.support
    op = PhysicalOp(OpKind.FAULT, qubits,
                    pauli=''.join(pauli.letter(q) for q in qubits))
    ops = circuit.ops[:location] + (op,) + circuit.ops[location:]
    return circuit.with_ops(ops)


def site_pauli(circuit: PhysicalCircuit, site: FaultSite) -> PauliString:
    return PauliString.from_letters(circuit.n_physical, site.qubits,
                                    site.pauli)


__all__ = [
    SimState, NoiseModel, NOISELESS, FaultEvent, FaultSite, ShotRecord,
    CapacityError, InvalidCircuitError, FaultLocationError, apply_gate,
    measure_pauli, apply_noise, step, execute, run_shot, shot_seed,
    fault_sites, inject_fault, site_pauli, MATRICES]

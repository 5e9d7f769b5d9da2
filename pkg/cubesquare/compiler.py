from __future__ import annotations
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple
import math

import numpy as np

from . import logger, DEFAULT_CAPACITY, STRATEGIES
from .circuit import (
    CircuitBuilder, GateKind, LogicalCircuit, LogicalGate, OpKind,
    PhysicalCircuit, PREPARATIONS, MEASUREMENTS)
from .codes import get_code
from .gadgets import (
    AncillaPool, BlockHandle, BlockRole, ft_measure, inject_catalyst,
    logical_ccz, logical_cnot_inblock, logical_cz, logical_pauli,
    prepare_logical, prepare_slot, ready_transfer, stabilizer_round,
    targeted_cnot_between_832, teleport_hadamard, teleport_x, teleport_z)


class UnsupportedGateError(Exception):
    def __init__(self, gate: LogicalGate, stage: str):
        message = f'{gate} is not supported by {stage}'
        super().__init__(message)


class SchedulingError(Exception):
    def __init__(self, gate: LogicalGate, reason: str):
        message = f'Cannot schedule {gate}: {reason}'
        super().__init__(message)


class CatalystError(Exception):
    def __init__(self, reason: str):
        message = f'Catalyst unavailable: {reason}'
        super().__init__(message)


# Extra ancilla pairs per block kind and shared pairs, per strategy
ANCILLA_PAIRS = {
    'sequential': {'832': 0, '422': 0, 'shared': 1},
    'mid': {'832': 1, '422': 1, 'shared': 1},
    'fast': {'832': 5, '422': 2, 'shared': 0},
}


@dataclass(frozen=True)
class BlockSpec:
    name: str
    code: str
    role: BlockRole
    qubits: Tuple[int, ...]
    ancillas: Tuple[Tuple[int, int], ...] = ()


@dataclass(frozen=True)
class Layout:
    """Physical qubit assignment: data blocks, one rotation block holding
    the phase reference, one transfer block and the ancilla pairs"""
    n_c: int
    strategy: str
    blocks: Tuple[BlockSpec, ...]
    shared: Tuple[Tuple[int, int], ...]
    n_physical: int

    @property
    def data_blocks(self) -> Tuple[BlockSpec, ...]:
        return tuple(b for b in self.blocks if b.role is BlockRole.DATA)

    def block(self, name: str) -> BlockSpec:
        for spec in self.blocks:
            if spec.name == name:
                return spec
        raise KeyError(f'Layout has no block {name!r}')

    def pool(self) -> AncillaPool:
        return AncillaPool(
            shared=self.shared,
            per_block={b.name: b.ancillas for b in self.blocks if b.ancillas})

    def handles(self) -> Dict[str, BlockHandle]:
        return {b.name: BlockHandle(get_code(b.code), b.qubits, b.role, b.name)
                for b in self.blocks}


def allocate(n_c: int, strategy: str = 'sequential',
             capacity: int = DEFAULT_CAPACITY) -> Layout:
    if n_c < 1:
        raise ValueError(f'need at least one computational qubit, got {n_c}')
    if strategy not in STRATEGIES:
        raise ValueError(
            f'Unknown strategy {strategy!r}, choose from {STRATEGIES}')
    pairs = ANCILLA_PAIRS[strategy]
    cursor = 0

    def take(count: int) -> Tuple[int, ...]:
        nonlocal cursor
        cursor += count
        return tuple(range(cursor - count, cursor))

    def spec(name, code, role, n):
        qubits = take(n)
        ancillas = tuple(take(2) for _ in range(pairs[code]))
        return BlockSpec(name, code, role, qubits, ancillas)

    blocks = [spec(f'data{i}', '832', BlockRole.DATA, 8)
              for i in range(math.ceil(n_c / 3))]
    blocks.append(spec('rotation', '832', BlockRole.ROTATION, 8))
    blocks.append(spec('transfer', '422', BlockRole.TRANSFER, 4))
    shared = tuple(take(2) for _ in range(pairs['shared']))
    layout = Layout(n_c, strategy, tuple(blocks), shared, cursor)
    if layout.n_physical > capacity:
        logger.warning(
            f'{strategy} layout for {n_c} computational qubits needs '
            f'{layout.n_physical} physical qubits, above the simulator '
            f'capacity of {capacity}')
    logger.info(f'Allocated {strategy} layout: {len(blocks) - 2} data '
                f'block{"s"[:len(blocks) - 2 ^ 1]}, {layout.n_physical} '
                f'physical qubits')
    return layout


def place(circuit: LogicalCircuit) -> Dict[int, Tuple[int, int]]:
    """Computational qubit -> (data block index, slot).

    Blocks are filled in qubit order; each block is completed with the
    unplaced qubits interacting most with those already in it.
    """
    qubits = list(circuit.computational)
    members = set(qubits)
    weight: Counter = Counter()
    for gate in circuit.gates:
        ops = sorted(q for q in gate.qubits if q in members)
        for pair in combinations(ops, 2):
            weight[pair] += 1

    def score(q: int, group: List[int]) -> int:
        return sum(weight[tuple(sorted((q, g)))] for g in group)

    placed, remaining, block = {}, list(qubits), 0
    while remaining:
        group = [remaining.pop(0)]
        while len(group) < 3 and remaining:
            best = max(remaining, key=lambda q: (score(q, group), -q))
            remaining.remove(best)
            group.append(best)
        for slot, q in enumerate(group):
            placed[q] = (block, slot)
        block += 1
    return placed


# Gate matrices over little-endian operand order: bit i of the row index
# belongs to the i-th operand.
GATE_MATRICES = {
    GateKind.X: np.array([[0, 1], [1, 0]], dtype=complex),
    GateKind.Z: np.diag([1, -1]).astype(complex),
    GateKind.H: np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    GateKind.S: np.diag([1, 1j]),
    GateKind.T: np.diag([1, np.exp(1j * np.pi / 4)]),
    GateKind.CX: np.eye(4, dtype=complex)[[0, 3, 2, 1]],
    GateKind.CZ: np.diag([1, 1, 1, -1]).astype(complex),
    GateKind.CS: np.diag([1, 1, 1, 1j]),
    GateKind.SWAP: np.eye(4, dtype=complex)[[0, 2, 1, 3]],
    GateKind.CCZ: np.diag([1] * 7 + [-1]).astype(complex),
}


def apply_matrix(tensor: np.ndarray, matrix: np.ndarray,
                 qubits: Sequence[int], n: int) -> np.ndarray:
    """Apply a gate matrix to the leading n qubit axes of a state or
    operator reshaped to (2,)*n + rest, qubit q on axis n-1-q"""
    k = len(qubits)
    gate = matrix.reshape((2,) * (2 * k))
    axes = [n - 1 - qubits[k - 1 - a] for a in range(k)]
    out = np.tensordot(gate, tensor, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(out, list(range(k)), axes)


def logical_unitary(circuit: LogicalCircuit) -> np.ndarray:
    """Exact unitary of a small measurement-free logical circuit"""
    n = circuit.n_qubits
    dim = 1 << n
    tensor = np.eye(dim, dtype=complex).reshape((2,) * n + (dim,))
    for gate in circuit.gates:
        if gate.kind in PREPARATIONS or gate.kind in MEASUREMENTS:
            raise UnsupportedGateError(gate, 'logical_unitary')
        tensor = apply_matrix(tensor, GATE_MATRICES[gate.kind], gate.qubits,
                              n)
    return tensor.reshape(dim, dim)


PAULI_Y = np.array([[0, -1j], [1j, 0]])


@dataclass(frozen=True)
class PhaseRefEncoding:
    """U -> I (x) Re U - iY (x) Im U with the phase qubit as the most
    significant qubit (index n)"""
    n: int

    @property
    def phase_qubit(self) -> int:
        return self.n

    def encode_matrix(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u)
        if u.shape != (1 << self.n, 1 << self.n):
            raise ValueError(f'expected a {1 << self.n}-dimensional matrix, '
                             f'got shape {u.shape}')
        return np.kron(np.eye(2), u.real) - 1j * np.kron(PAULI_Y, u.imag)

    def encode_state(self, psi: np.ndarray) -> np.ndarray:
        psi = np.asarray(psi)
        if psi.shape != (1 << self.n,):
            raise ValueError(f'expected {1 << self.n} amplitudes, '
                             f'got shape {psi.shape}')
        return np.concatenate([psi.real, psi.imag]).astype(complex)


# Gates that carry no imaginary part and pass through the encoding
REAL_GATES = (GateKind.X, GateKind.Z, GateKind.H, GateKind.CX, GateKind.CZ,
              GateKind.CCZ, GateKind.SWAP) + PREPARATIONS + MEASUREMENTS


def encode_phase_ref(circuit: LogicalCircuit) -> LogicalCircuit:
    """Rewrite S and CS in terms of a new phase-reference qubit"""
    if circuit.phase_qubit is not None:
        return circuit
    p = circuit.n_qubits
    gates = []
    for gate in circuit.gates:
        if gate.kind in REAL_GATES:
            gates.append(gate)
        elif gate.kind is GateKind.S:
            q, = gate.qubits
            gates += [LogicalGate(GateKind.CZ, (q, p)),
                      LogicalGate(GateKind.CX, (q, p))]
        elif gate.kind is GateKind.CS:
            ccz = LogicalGate(GateKind.CCZ, (p,) + gate.qubits)
            h = LogicalGate(GateKind.H, (p,))
            gates += [ccz, h, ccz, h]
        else:
            raise UnsupportedGateError(gate, 'encode_phase_ref')
    return LogicalCircuit(p + 1, tuple(gates), phase_qubit=p,
                          catalyst=circuit.catalyst)


def catalytic_t(q: int, catalyst: int) -> List[LogicalGate]:
    """T on q using a catalyst in |H>, which is returned unchanged"""
    return [
        LogicalGate(GateKind.S, (catalyst,)),
        LogicalGate(GateKind.H, (catalyst,)),
        LogicalGate(GateKind.CS, (q, catalyst)),
        LogicalGate(GateKind.H, (catalyst,)),
        LogicalGate(GateKind.S, (catalyst,)),
        LogicalGate(GateKind.X, (q,)),
        LogicalGate(GateKind.CZ, (q, catalyst)),
        LogicalGate(GateKind.X, (q,)),
    ]


def expand_catalytic_T(circuit: LogicalCircuit) -> LogicalCircuit:
    if circuit.phase_qubit is not None:
        raise CatalystError(
            'T gates must be expanded before phase-reference encoding')
    if not circuit.count(GateKind.T):
        return circuit
    n = circuit.n_qubits
    catalyst = circuit.catalyst
    if catalyst is None:
        catalyst, n = n, n + 1
    gates = []
    for gate in circuit.gates:
        if gate.kind is GateKind.T:
            if gate.qubits[0] == catalyst:
                raise CatalystError('T applied to the catalyst itself')
            gates += catalytic_t(gate.qubits[0], catalyst)
        else:
            gates.append(gate)
    return LogicalCircuit(n, tuple(gates), catalyst=catalyst)


@dataclass(frozen=True)
class ScheduleOptions:
    corrections: str = 'apply'
    relocation: str = 'swap'
    rounds: str = 'gadget'
    catalyst_gamma: float = 1.0
    on_odd: str = 'fix'

    def __post_init__(self):
        allowed = {
            'corrections': ('apply', 'frame-track'),
            'relocation': ('swap', 'teleport'),
            'rounds': ('gadget', 'end'),
            'on_odd': ('fix', 'discard')}
        for name, values in allowed.items():
            if getattr(self, name) not in values:
                raise ValueError(
                    f'{name} must be one of {values}, got '
                    f'{getattr(self, name)!r}')
        if not 0.0 <= self.catalyst_gamma <= 1.0:
            raise ValueError(
                f'catalyst_gamma {self.catalyst_gamma} is not in [0, 1]')


def _uses(gates: Sequence[LogicalGate]) -> Tuple[Dict[int, int],
                                                  Dict[int, int]]:
    first, last = {}, {}
    for index, gate in enumerate(gates):
        for q in gate.qubits:
            first.setdefault(q, index)
            last[q] = index
    return first, last


class Scheduler:
    """Lowers an encoded logical circuit onto a layout.

    Gates touching the phase reference or the catalyst run inside the
    rotation block; their other operands are teleported in through the
    transfer block and back out afterwards.
    """

    def __init__(self, logical: LogicalCircuit, layout: Layout,
                 options: ScheduleOptions = ScheduleOptions(),
                 width: Optional[int] = None, depth: Optional[int] = None):
        if logical.phase_qubit is None:
            raise SchedulingError(
                LogicalGate(GateKind.X, (0,)),
                'the circuit has no phase reference, encode it first')
        self.logical = logical
        self.layout = layout
        self.options = options
        self.width = len(logical.computational) if width is None else width
        self.depth = logical.depth() if depth is None else depth
        self.b = CircuitBuilder(
            layout.n_physical, frame=options.corrections == 'frame-track')
        self.blocks = layout.handles()
        self.pool = layout.pool()
        self.rotation = self.blocks['rotation']
        self.transfer = self.blocks['transfer']
        self.special = {logical.phase_qubit, logical.catalyst} - {None}
        self.where: Dict[int, Tuple[BlockHandle, int]] = {}
        self.outputs: Dict[int, Tuple[int, ...]] = {}
        if len(logical.computational) > 3 * len(layout.data_blocks):
            raise SchedulingError(
                LogicalGate(GateKind.X, (0,)),
                f'{len(logical.computational)} computational qubits do not '
                f'fit {len(layout.data_blocks)} data blocks')

    @property
    def capacity(self) -> int:
        return 1 if self.logical.catalyst is not None else 2

    def run(self) -> PhysicalCircuit:
        gates = self.logical.gates
        first, last = _uses(gates)
        initial, skipped = {}, set()
        for q, index in first.items():
            if gates[index].kind in PREPARATIONS:
                initial[q] = '+' if gates[index].kind is GateKind.PREP_X \
                    else '0'
                skipped.add(index)
        finals = {index for q, index in last.items()
                  if gates[index].kind in MEASUREMENTS}
        body = [(i, g) for i, g in enumerate(gates)
                if i not in skipped and i not in finals]

        self._initialize(initial)
        position = 0
        while position < len(body):
            if self._is_phase(body[position][1]):
                position = self._segment(body, position)
            else:
                position = self._step(body, position)
        readout_start = self._readout([(i, gates[i]) for i in sorted(finals)])
        order = sorted(self.outputs)
        n = self.layout.n_physical
        circuit = self.b.build(
            logical_width=self.width, logical_depth=self.depth,
            strategy=self.layout.strategy, readout_start=readout_start,
            outputs=[self.outputs[i] for i in order],
            output_qubits=[gates[i].qubits[0] for i in order],
            logical_x=self._logicals('X', n), logical_z=self._logicals('Z', n),
            stabilizers=[
                str(block.embed(g, n)) for block in self.blocks.values()
                if block.prepared for g in block.code.stabilizers.generators])
        logger.info(
            f'Scheduled {len(gates)} logical gate{"s"[:len(gates) ^ 1]} into '
            f'{len(circuit.ops)} ops, hardness {circuit.metadata.hardness}')
        return circuit

    def _logicals(self, letter: str, n: int) -> List[str]:
        out = []
        for q in range(self.logical.n_qubits):
            block, slot = self.where[q]
            out.append(str(block.embed(block.code.logical(letter, slot), n)))
        return out

    def _initialize(self, initial: Dict[int, str]):
        placement = place(self.logical)
        data = [self.blocks[spec.name] for spec in self.layout.data_blocks]
        for q, (index, slot) in placement.items():
            self.where[q] = (data[index], slot)
        with self.b.tagged('initialize'):
            for block in data:
                states = ['0'] * block.code.k
                held = [(s, q) for q, (bl, s) in self.where.items()
                        if bl is block]
                for slot, q in held:
                    states[slot] = initial.get(q, '0')
                prepare_logical(self.b, block, ''.join(states), self.pool,
                                self.options.on_odd)
                for slot, _ in held:
                    block.slots[slot] = 'data'
            catalyst = self.logical.catalyst is not None
            prepare_logical(self.b, self.rotation, '0+0' if catalyst
                            else '0++', self.pool, self.options.on_odd)
            self.rotation.slots[0] = 'data'
            self.where[self.logical.phase_qubit] = (self.rotation, 0)
            if catalyst:
                inject_catalyst(self.b, self.rotation, 2,
                                self.options.catalyst_gamma)
                self.where[self.logical.catalyst] = (self.rotation, 2)

    def _is_phase(self, gate: LogicalGate) -> bool:
        return any(q in self.special for q in gate.qubits)

    def _operands(self, gate: LogicalGate) -> List[int]:
        return [q for q in gate.qubits if q not in self.special]

    def _segment(self, body, start: int) -> int:
        operands: List[int] = []
        stop = start
        while stop < len(body):
            gate = body[stop][1]
            ops = self._operands(gate)
            unitary = gate.kind not in PREPARATIONS + MEASUREMENTS
            if not self._is_phase(gate) and not (
                    unitary and set(ops) <= set(operands)):
                break
            union = operands + [q for q in ops if q not in operands]
            if len(union) > self.capacity:
                if stop == start:
                    raise SchedulingError(
                        gate, f'{len(union)} operands exceed the rotation '
                        f'block capacity of {self.capacity}')
                break
            operands = union
            stop += 1
        logger.debug(f'Segment of {stop - start} gate'
                     f'{"s"[:stop - start ^ 1]} on {operands}')
        with self.b.tagged('segment'):
            homes = self._move_in(operands)
            position = start
            while position < stop:
                position = self._step(body[:stop], position)
            self._move_out(operands, homes)
        return stop

    def _move_in(self, operands: List[int]) -> Dict[int, Tuple]:
        homes = {q: self.where[q] for q in operands}
        slots = [1, 2][:len(operands)]
        sources = {homes[q][0].name for q in operands}
        if len(operands) == 2 and len(sources) == 1:
            block = homes[operands[0]][0]
            ready_transfer(self.b, self.transfer, '00', self.pool)
            teleport_x(self.b, block, [homes[q][1] for q in operands],
                       self.transfer, self.pool)
            teleport_z(self.b, self.transfer, (0, 1), self.rotation, slots,
                       self.pool)
            for q, slot in zip(operands, slots):
                self.where[q] = (self.rotation, slot)
        else:
            for q, slot in zip(operands, slots):
                self._move(q, self.rotation, slot)
        return homes

    def _move_out(self, operands: List[int], homes: Dict[int, Tuple]):
        sources = {homes[q][0].name for q in operands}
        if len(operands) == 2 and len(sources) == 1:
            block = homes[operands[0]][0]
            ready_transfer(self.b, self.transfer, '00', self.pool)
            teleport_x(self.b, self.rotation,
                       [self.where[q][1] for q in operands], self.transfer,
                       self.pool)
            teleport_z(self.b, self.transfer, (0, 1), block,
                       [homes[q][1] for q in operands], self.pool)
            for q in operands:
                self.where[q] = homes[q]
        else:
            for q in operands:
                self._move(q, *homes[q])

    def _move(self, q: int, dst: BlockHandle, dst_slot: int):
        """X-type teleport into the transfer block, Z-type teleport out"""
        src, slot = self.where[q]
        if dst.slots[dst_slot] != '+':
            if dst.slots[dst_slot] == 'data':
                raise SchedulingError(
                    LogicalGate(GateKind.X, (q,)),
                    f'slot {dst_slot} of {dst.name} is occupied')
            prepare_slot(self.b, dst, dst_slot, 'X', self.pool)
        with self.b.tagged(f'move-{q}'):
            ready_transfer(self.b, self.transfer, '0+', self.pool)
            teleport_x(self.b, src, (slot,), self.transfer, self.pool)
            teleport_z(self.b, self.transfer, (0,), dst, (dst_slot,),
                       self.pool)
        self.where[q] = (dst, dst_slot)

    def _step(self, body, position: int) -> int:
        index, gate = body[position]
        before, first = len(self.b.ops), position
        if gate.kind is GateKind.H:
            position = self._hadamards(body, position)
        else:
            self._dispatch(index, gate)
            position += 1
        touched = {self.where[q][0].name: self.where[q][0]
                   for _, g in body[first:position] for q in g.qubits}
        if self.options.rounds == 'gadget' and any(
                op.kind is not OpKind.RELABEL for op in self.b.ops[before:]):
            for block in touched.values():
                stabilizer_round(self.b, block, self.pool)
        return position

    def _hadamards(self, body, position: int) -> int:
        _, gate = body[position]
        block, slot = self.where[gate.qubits[0]]
        indices = [slot]
        nxt = position + 1
        if nxt < len(body):
            other = body[nxt][1]
            if other.kind is GateKind.H and other.qubits != gate.qubits \
                    and self.where[other.qubits[0]][0] is block:
                indices.append(self.where[other.qubits[0]][1])
                nxt += 1
        teleport_hadamard(self.b, block, indices, self.transfer, self.pool)
        return nxt

    def _dispatch(self, index: int, gate: LogicalGate):
        kind = gate.kind
        located = [self.where[q] for q in gate.qubits]
        block, slot = located[0]
        same = all(b is block for b, _ in located)
        if kind in (GateKind.X, GateKind.Z):
            logical_pauli(self.b, block, kind.value, slot)
        elif kind is GateKind.H:
            teleport_hadamard(self.b, block, (slot,), self.transfer,
                              self.pool)
        elif kind is GateKind.CX:
            if same:
                logical_cnot_inblock(self.b, block, slot, located[1][1])
            else:
                targeted_cnot_between_832(self.b, block, slot, *located[1])
        elif kind is GateKind.CZ:
            if same:
                logical_cz(self.b, block, slot, located[1][1])
            else:
                target, t = located[1]
                teleport_hadamard(self.b, target, (t,), self.transfer,
                                  self.pool)
                targeted_cnot_between_832(self.b, block, slot, target, t)
                teleport_hadamard(self.b, target, (t,), self.transfer,
                                  self.pool)
        elif kind is GateKind.CCZ:
            self._ccz(gate)
        elif kind is GateKind.SWAP:
            a, b = gate.qubits
            self.where[a], self.where[b] = self.where[b], self.where[a]
        elif kind in MEASUREMENTS:
            basis = 'X' if kind is GateKind.MEAS_X else 'Z'
            self.outputs[index] = (
                ft_measure(self.b, block, basis, slot, self.pool),)
        elif kind in PREPARATIONS:
            basis = 'X' if kind is GateKind.PREP_X else 'Z'
            prepare_slot(self.b, block, slot, basis, self.pool)
            block.slots[slot] = 'data'
        else:
            raise UnsupportedGateError(gate, 'the scheduler')

    def _ccz(self, gate: LogicalGate):
        located = [self.where[q] for q in gate.qubits]
        counts = Counter(block.name for block, _ in located)
        if len(counts) == 1:
            logical_ccz(self.b, located[0][0])
            return
        name = max(sorted(counts), key=counts.get)
        target = self.blocks[name]
        occupied = {slot for block, slot in located if block is target}
        free = [s for s in range(target.code.k) if s not in occupied]
        with self.b.tagged(f'relocate-{self.options.relocation}'):
            for q in gate.qubits:
                if self.where[q][0] is not target:
                    self._relocate(q, target, free.pop(0))
        logical_ccz(self.b, target)

    def _relocate(self, q: int, target: BlockHandle, slot: int):
        src, s = self.where[q]
        occupant = next((x for x, loc in self.where.items()
                         if loc == (target, slot)), None)
        if self.options.relocation == 'swap':
            states = src.slots[s], target.slots[slot]
            targeted_cnot_between_832(self.b, src, s, target, slot)
            targeted_cnot_between_832(self.b, target, slot, src, s)
            targeted_cnot_between_832(self.b, src, s, target, slot)
            target.slots[slot], src.slots[s] = states
            self.where[q] = (target, slot)
            if occupant is not None:
                self.where[occupant] = (src, s)
        else:
            self._move(q, self.rotation, 1)
            if occupant is not None:
                self._move(occupant, src, s)
            self._move(q, target, slot)

    def _readout(self, finals) -> int:
        if self.options.rounds == 'end':
            for block in self.blocks.values():
                if block.prepared:
                    stabilizer_round(self.b, block, self.pool)
        start = len(self.b.ops)
        by_block: Dict[str, List] = {}
        for index, gate in finals:
            block, _ = self.where[gate.qubits[0]]
            by_block.setdefault(block.name, []).append((index, gate))
        with self.b.tagged('readout'):
            for name, measured in by_block.items():
                block = self.blocks[name]
                bases = {g.kind for _, g in measured}
                residents = [q for q, (bl, _) in self.where.items()
                             if bl is block]
                if len(bases) == 1 and len(measured) == len(residents):
                    self._destructive(block, bases.pop(), measured)
                else:
                    for index, gate in measured:
                        self._dispatch(index, gate)
        return start

    def _destructive(self, block: BlockHandle, kind: GateKind, measured):
        letter = 'X' if kind is GateKind.MEAS_X else 'Z'
        op = OpKind.MEAS_X if letter == 'X' else OpKind.MEAS_Z
        bits = [self.b.measure(op, q) for q in block.qubits]
        for g in block.code.stabilizers.generators:
            if set(g.letters) <= {letter, 'I'}:
                self.b.detect(*(bits[v] for v in g.support))
        for index, gate in measured:
            _, slot = self.where[gate.qubits[0]]
            support = block.code.logical(letter, slot).support
            self.outputs[index] = tuple(bits[v] for v in support)


def schedule(logical: LogicalCircuit, layout: Layout,
             options: ScheduleOptions = ScheduleOptions(),
             width: Optional[int] = None,
             depth: Optional[int] = None) -> PhysicalCircuit:
    return Scheduler(logical, layout, options, width, depth).run()


def compile_circuit(circuit: LogicalCircuit, strategy: str = 'sequential',
                    options: ScheduleOptions = ScheduleOptions(),
                    capacity: int = DEFAULT_CAPACITY) -> PhysicalCircuit:
    """Catalytic T expansion, phase-reference encoding, layout and
    scheduling"""
    width, depth = len(circuit.computational), circuit.depth()
    encoded = encode_phase_ref(expand_catalytic_T(circuit))
    layout = allocate(len(encoded.computational), strategy, capacity)
    return schedule(encoded, layout, options, width, depth)


def t_count_estimate(epsilon: float) -> float:
    """Leading term 5 log2(1/epsilon) of the T count for approximating an
    SU(4) gate to precision epsilon"""
    if not 0 < epsilon < 1:
        raise ValueError(f'epsilon must lie in (0, 1), got {epsilon}')
    return 5 * math.log2(1 / epsilon)


@dataclass(frozen=True)
class CostReport:
    width: int = 0
    depth: int = 0
    hardness: int = 0
    two_qubit_count: int = 0
    teleport_count: int = 0
    strategy: str = ''
    n_physical: int = 0
    epsilon: Optional[float] = None
    t_estimate: Optional[float] = None
    extra: Dict[str, object] = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {
            'w': self.width, 'd': self.depth, 'eta': self.hardness,
            'two_qubit_count': self.two_qubit_count,
            'teleport_count': self.teleport_count,
            'strategy': self.strategy, 'n_physical': self.n_physical}
        if self.epsilon is not None:
            out['epsilon'] = self.epsilon
            out['t_estimate'] = self.t_estimate
        out.update(self.extra)
        return out


def cost_report(circuit: PhysicalCircuit,
                epsilon: Optional[float] = None) -> CostReport:
    meta = circuit.metadata
    return CostReport(
        width=meta.logical_width, depth=meta.logical_depth,
        hardness=circuit.teleport_count(),
        two_qubit_count=circuit.two_qubit_gate_count(),
        teleport_count=circuit.teleport_count(), strategy=meta.strategy,
        n_physical=circuit.n_physical, epsilon=epsilon,
        t_estimate=None if epsilon is None else t_count_estimate(epsilon))


__all__ = [
    Layout, BlockSpec, PhaseRefEncoding, ScheduleOptions, Scheduler,
    CostReport, UnsupportedGateError, SchedulingError, CatalystError,
    allocate, place, encode_phase_ref, expand_catalytic_T, catalytic_t,
    schedule, compile_circuit, cost_report, t_count_estimate,
    logical_unitary, apply_matrix, GATE_MATRICES]

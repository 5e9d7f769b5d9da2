from __future__ import annotations
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from itertools import permutations
from typing import Callable, Dict, List, Optional, Sequence, Tuple
import logging
import math

from . import logger, DEFAULT_CAPACITY
from .circuit import CircuitBuilder, OpKind, PhysicalCircuit, PhysicalOp
from .codes import (
    CodeSpec, QubitPermutation, LogicalAction, code_832, code_422,
    conjugate_by_permutation, find_permutation_gate)
from .pauli import (
    PauliString, StabilizerGroup, CLIFFORD_RULES, commutes, equivalent,
    popcount, bits)
from .simulator import (
    SimState, FaultSite, execute, fault_sites, step, NOISELESS)
from .debug import debug_gadget


class GadgetError(Exception):
    def __init__(self, gadget: str, reason: str):
        message = f'Cannot emit {gadget}: {reason}'
        super().__init__(message)


class BlockRole(str, Enum):
    DATA = 'data'
    ROTATION = 'rotation'
    TRANSFER = 'transfer'


FLIPPED = {'0': '+', '+': '0'}


@dataclass
class BlockHandle:
    """A code block placed on physical qubits.

    slots records what each logical qubit of the block currently holds:
    '0' or '+' for a known ancilla state, 'data' for computational
    content and '?' before preparation.
    """
    code: CodeSpec
    qubits: Tuple[int, ...]
    role: BlockRole = BlockRole.DATA
    name: str = ''
    frame: QubitPermutation = field(default=None)
    slots: List[str] = field(default=None)
    prepared: bool = False

    def __post_init__(self):
        self.qubits = tuple(self.qubits)
        if len(self.qubits) != self.code.n:
            raise ValueError(
                f'{self.code.name} needs {self.code.n} qubits, got '
                f'{len(self.qubits)}')
        if self.frame is None:
            self.frame = QubitPermutation.identity(self.code.n)
        if self.slots is None:
            self.slots = ['?'] * self.code.k
        if not self.name:
            self.name = f'{self.role.value}{self.qubits[0]}'

    def physical(self, p: PauliString) -> Tuple[Tuple[int, ...], str]:
        return p.restricted(self.qubits)

    def embed(self, p: PauliString, n_physical: int) -> PauliString:
        targets, letters = self.physical(p)
        out = PauliString.from_letters(n_physical, targets, letters)
        return out.with_phase(p.phase)

    def logical(self, letter: str, index: int) -> Tuple[Tuple[int, ...], str]:
        return self.physical(self.code.logical(letter, index))

    def require(self, name: str, *codes: str):
        if self.code.name not in codes:
            raise GadgetError(
                name, f'block {self.name} holds {self.code.name}, expected '
                f'{" or ".join(codes)}')


@dataclass
class AncillaPool:
    """Ancilla and flag pairs available to the measurement gadgets.

    per_block lists pairs owned by one block (indexed by generator);
    shared pairs serve every block and all logical measurements.
    """
    shared: Tuple[Tuple[int, int], ...] = ()
    per_block: Dict[str, Tuple[Tuple[int, int], ...]] = field(
        default_factory=dict)

    def for_generator(self, block: BlockHandle, index: int) -> Tuple[int, int]:
        pairs = self.per_block.get(block.name)
        if pairs:
            return pairs[index % len(pairs)]
        if self.shared:
            return self.shared[0]
        raise GadgetError('stabilizer_round',
                          f'no ancilla pair available for {block.name}')

    def for_measurement(self, block: BlockHandle) -> Tuple[int, int]:
        if self.shared:
            return self.shared[0]
        pairs = self.per_block.get(block.name)
        if pairs:
            return pairs[0]
        raise GadgetError('ft_measure',
                          f'no ancilla pair available for {block.name}')


def _pauli_type(letters: str) -> str:
    kinds = set(letters)
    if len(kinds) != 1 or kinds == {'Y'}:
        raise GadgetError('measurement', f'{letters} is not X-type or Z-type')
    return kinds.pop()


def _measure_check(b: CircuitBuilder, targets: Sequence[int], letters: str,
                   pair: Tuple[int, int], straddle: bool) -> Tuple[int, int]:
    """Flagged non-destructive measurement of a CSS operator.

    straddle puts the flag couplings around all data couplings, otherwise
    after the first and before the last one. Returns (outcome, flag) record
    indices.
    """
    anc, flag = pair
    if _pauli_type(letters) == 'X':
        b.add(OpKind.PPLUS, anc)
        b.add(OpKind.P0, flag)

        def couple(q):
            b.add(OpKind.CX, anc, q)

        def couple_flag():
            b.add(OpKind.CX, anc, flag)
        kinds = (OpKind.MEAS_X, OpKind.MEAS_Z)
    else:
        b.add(OpKind.P0, anc)
        b.add(OpKind.PPLUS, flag)

        def couple(q):
            b.add(OpKind.CX, q, anc)

        def couple_flag():
            b.add(OpKind.CX, flag, anc)
        kinds = (OpKind.MEAS_Z, OpKind.MEAS_X)

    if straddle:
        couple_flag()
        for q in targets:
            couple(q)
        couple_flag()
    else:
        couple(targets[0])
        couple_flag()
        for q in targets[1:-1]:
            couple(q)
        couple_flag()
        couple(targets[-1])
    outcome = b.measure(kinds[0], anc)
    flagged = b.measure(kinds[1], flag)
    return outcome, flagged


def ft_measure(b: CircuitBuilder, block: BlockHandle, basis: str, index: int,
               pool: AncillaPool) -> int:
    """Measure a logical X or Z twice, on a face and on the opposite face.

    Accepts when both flags read 0 and the two outcomes agree. Returns the
    record index of the first outcome.
    """
    basis = basis.upper()
    if basis not in 'XZ' or len(basis) != 1:
        raise GadgetError('ft_measure', f'unsupported basis {basis!r}')
    first = block.code.logical(basis, index)
    second = block.code.reflect(first)
    pair = pool.for_measurement(block)
    start = len(b.ops)
    with b.tagged(f'measure-{basis}{index}@{block.name}'):
        m1, f1 = _measure_check(b, *block.physical(first), pair, True)
        m2, f2 = _measure_check(b, *block.physical(second), pair, True)
        b.detect(f1)
        b.detect(f2)
        b.detect(m1, m2)
    if logger.isEnabledFor(logging.DEBUG):
        debug_gadget(b, start, f'ft_measure {basis}{index}')
    return m1


def stabilizer_round(b: CircuitBuilder, block: BlockHandle,
                     pool: AncillaPool):
    start = len(b.ops)
    with b.tagged(f'round@{block.name}'):
        for index, g in enumerate(block.code.stabilizers.generators):
            pair = pool.for_generator(block, index)
            outcome, flagged = _measure_check(
                b, *block.physical(g), pair, False)
            b.detect(outcome)
            b.detect(flagged)
    if logger.isEnabledFor(logging.DEBUG):
        debug_gadget(b, start, 'stabilizer_round')


@lru_cache(maxsize=None)
def pure_error(code: CodeSpec, target: PauliString,
               others: Tuple[PauliString, ...]) -> PauliString:
    """Lowest-weight CSS operator anticommuting with target and commuting
    with every operator in others"""
    letter = 'Z' if _pauli_type(target.letters.replace('I', '')) == 'X' \
        else 'X'
    for mask in sorted(range(1, 1 << code.n),
                       key=lambda m: (popcount(m), m)):
        candidate = PauliString.from_support(code.n, letter, bits(mask))
        if commutes(candidate, target):
            continue
        if all(commutes(candidate, other) for other in others):
            return candidate
    raise GadgetError('prepare_logical', f'no pure error for {target}')


def prepare_logical(b: CircuitBuilder, block: BlockHandle, states: str,
                    pool: AncillaPool, on_odd: str = 'fix'):
    """Prepare each logical qubit of block in |0> or |+> by projection.

    states has one '0' or '+' per logical qubit. With on_odd='fix' a -1
    projection is repaired by a conditional pure error, with 'discard' the
    shot is dropped. A verification round closes the gadget.
    """
    code = block.code
    if len(states) != code.k or set(states) - set('0+'):
        raise GadgetError('prepare_logical',
                          f'{states!r} does not describe {code.k} slots')
    if on_odd not in ('fix', 'discard'):
        raise GadgetError('prepare_logical', f'unknown on_odd {on_odd!r}')
    all_plus = set(states) == {'+'}
    product_letter = 'X' if all_plus else 'Z'
    targets = tuple(code.logical('Z' if s == '0' else 'X', j)
                    for j, s in enumerate(states))
    generators = code.stabilizers.generators
    fixed_set = tuple(generators) + targets

    start = len(b.ops)
    with b.tagged(f'prepare-{states}@{block.name}'):
        for q in block.qubits:
            b.add(OpKind.PPLUS if all_plus else OpKind.P0, q)
        for index, g in enumerate(generators):
            if _pauli_type(g.letters.replace('I', '')) == product_letter:
                continue
            pair = pool.for_generator(block, index)
            outcome, flagged = _measure_check(
                b, *block.physical(g), pair, False)
            b.detect(flagged)
            if on_odd == 'fix':
                others = tuple(p for p in fixed_set if p != g)
                b.correct(*block.physical(pure_error(code, g, others)),
                          outcome)
            else:
                b.detect(outcome)
        if not all_plus:
            for j, s in enumerate(states):
                if s != '+':
                    continue
                outcome = ft_measure(b, block, 'X', j, pool)
                if on_odd == 'fix':
                    others = tuple(p for p in fixed_set if p != targets[j])
                    b.correct(*block.physical(
                        pure_error(code, targets[j], others)), outcome)
                else:
                    b.detect(outcome)
        stabilizer_round(b, block, pool)
    block.slots = list(states)
    block.prepared = True
    if logger.isEnabledFor(logging.DEBUG):
        debug_gadget(b, start, f'prepare_logical {states}')


def prepare_slot(b: CircuitBuilder, block: BlockHandle, slot: int,
                 basis: str, pool: AncillaPool):
    """Reset one logical qubit to |0> (basis Z) or |+> (basis X)"""
    basis = basis.upper()
    with b.tagged(f'reset-{basis}{slot}@{block.name}'):
        outcome = ft_measure(b, block, basis, slot, pool)
        fix = 'X' if basis == 'Z' else 'Z'
        b.correct(*block.logical(fix, slot), outcome)
    block.slots[slot] = '0' if basis == 'Z' else '+'


def logical_pauli(b: CircuitBuilder, block: BlockHandle, letter: str,
                  index: int):
    targets, letters = block.logical(letter, index)
    with b.tagged(f'pauli-{letter}{index}@{block.name}'):
        for q, c in zip(targets, letters):
            b.add(OpKind(c), q)


def logical_ccz(b: CircuitBuilder, block: BlockHandle):
    """T on even-parity cube vertices and T^dagger on odd ones"""
    block.require('logical_ccz', '832')
    with b.tagged(f'ccz@{block.name}'):
        for vertex, q in enumerate(block.qubits):
            b.add(OpKind.T if popcount(vertex) % 2 == 0 else OpKind.TDG, q)


def cz_face(i: int, j: int, placement: int) -> List[Tuple[int, OpKind]]:
    """(vertex, gate) pairs of the S/S^dagger face pattern for CZ(i, j)"""
    if i == j or not {i, j} <= {0, 1, 2}:
        raise GadgetError('logical_cz', f'invalid pair ({i}, {j})')
    if placement not in range(4):
        raise GadgetError('logical_cz', f'placement {placement} not in 0..3')
    other = 3 - i - j
    axis = 2 - other
    side, orientation = divmod(placement, 2)
    return [
        (v, OpKind.S if (popcount(v) + orientation) % 2 == 0 else OpKind.SDG)
        for v in range(8) if (v >> axis) & 1 == side]


def logical_cz(b: CircuitBuilder, block: BlockHandle, i: int, j: int,
               placement: int = 0):
    block.require('logical_cz', '832')
    with b.tagged(f'cz-{i}{j}@{block.name}'):
        for vertex, kind in cz_face(i, j, placement):
            b.add(kind, block.qubits[vertex])


def _relabel(b: CircuitBuilder, block: BlockHandle, perm: QubitPermutation,
             name: str):
    with b.tagged(f'{name}@{block.name}'):
        b.add(OpKind.RELABEL, *block.qubits, mapping=perm.mapping)
    block.frame = block.frame.then(perm)


def logical_cnot_inblock(b: CircuitBuilder, block: BlockHandle,
                         control: int, target: int):
    if control == target:
        raise GadgetError('logical_cnot_inblock', 'control equals target')
    action = LogicalAction.cnot(block.code.k, control, target)
    _relabel(b, block, find_permutation_gate(block.code, action),
             f'cnot-{control}{target}')
    if block.slots[control] != '0' and block.slots[target] != '+':
        for slot in (control, target):
            block.slots[slot] = 'data'


def logical_swap_inblock(b: CircuitBuilder, block: BlockHandle, i: int,
                         j: int):
    if i == j:
        raise GadgetError('logical_swap_inblock', 'indices must differ')
    action = LogicalAction.swap(block.code.k, i, j)
    _relabel(b, block, find_permutation_gate(block.code, action),
             f'swap-{i}{j}')
    block.slots[i], block.slots[j] = block.slots[j], block.slots[i]


def transversal_h_422(b: CircuitBuilder, block: BlockHandle):
    """Logical (H x H) SWAP on a [[4,2,2]] block"""
    block.require('transversal_h_422', '422')
    with b.tagged(f'h@{block.name}'):
        for q in block.qubits:
            b.add(OpKind.H, q)
    first, second = block.slots
    block.slots = [FLIPPED.get(second, second), FLIPPED.get(first, first)]


def cnot3_between_832(b: CircuitBuilder, src: BlockHandle, dst: BlockHandle):
    src.require('cnot3', '832')
    dst.require('cnot3', '832')
    if src is dst or set(src.qubits) & set(dst.qubits):
        raise GadgetError('cnot3', 'source and destination must differ')
    with b.tagged(f'cnot3@{src.name}>{dst.name}'):
        for a, t in zip(src.qubits, dst.qubits):
            b.add(OpKind.CX, a, t)
    for slot, state in enumerate(src.slots):
        if state == 'data':
            dst.slots[slot] = 'data'


def targeted_cnot_between_832(b: CircuitBuilder, src: BlockHandle, i: int,
                              dst: BlockHandle, j: int):
    """CX from logical i of src onto logical j of dst (16 physical CX)"""
    if src is dst:
        raise GadgetError('targeted_cnot', 'blocks must differ')
    with b.tagged(f'cx-{i}{j}@{src.name}>{dst.name}'):
        if i != j:
            dst_state = list(dst.slots)
            cnot3_between_832(b, src, dst)
            logical_cnot_inblock(b, src, i, j)
            cnot3_between_832(b, src, dst)
            logical_cnot_inblock(b, src, i, j)
            dst.slots = dst_state
            if src.slots[i] == 'data':
                dst.slots[j] = 'data'
        else:
            k = min(a for a in range(src.code.k) if a != i)
            logical_swap_inblock(b, dst, i, k)
            targeted_cnot_between_832(b, src, i, dst, k)
            logical_swap_inblock(b, dst, i, k)


@lru_cache(maxsize=None)
def face_assignment(pair: Tuple[int, int]) -> Tuple[Tuple[int, int], ...]:
    """(cube vertex, square qubit) couplings realising CX(i -> 0) and
    CX(j -> 1) from a [[8,3,2]] block onto a [[4,2,2]] block"""
    i, j = pair
    if i == j or not {i, j} <= {0, 1, 2}:
        raise GadgetError('cnot2', f'invalid pair {pair}')
    cube, square = code_832(), code_422()
    n = cube.n + square.n
    other = 3 - i - j
    face = [v for v in range(8) if not (v >> (2 - other)) & 1]

    def lift(p: PauliString, offset: int) -> PauliString:
        return PauliString(n, p.x << offset, p.z << offset, p.phase)

    group = StabilizerGroup(n, tuple(
        [lift(g, 0) for g in cube.stabilizers.generators] +
        [lift(g, cube.n) for g in square.stabilizers.generators]))
    cx, cz = cube.logical_x, cube.logical_z
    sx, sz = square.logical_x, square.logical_z
    checks = [
        (lift(cx[i], 0), lift(cx[i], 0) * lift(sx[0], cube.n)),
        (lift(cx[j], 0), lift(cx[j], 0) * lift(sx[1], cube.n)),
        (lift(cx[other], 0), lift(cx[other], 0)),
        (lift(sz[0], cube.n), lift(cz[i], 0) * lift(sz[0], cube.n)),
        (lift(sz[1], cube.n), lift(cz[j], 0) * lift(sz[1], cube.n))]
    checks += [(lift(p, 0), lift(p, 0)) for p in cz]
    checks += [(lift(p, cube.n), lift(p, cube.n)) for p in sx]
    checks += [(g, g) for g in group.generators]

    for sigma in permutations(range(square.n)):
        couplings = tuple(zip(face, sigma))
        for source, target in checks:
            image = source
            for v, s in couplings:
                image = CLIFFORD_RULES['CX'](image, v, cube.n + s)
            if not equivalent(group, image, target):
                break
        else:
            logger.debug(f'cnot2 {pair}: {couplings}')
            return couplings
    raise GadgetError('cnot2', f'no face assignment for {pair}')


def cnot2_832_to_422(b: CircuitBuilder, block832: BlockHandle,
                     pair: Tuple[int, int], block422: BlockHandle):
    block832.require('cnot2', '832')
    block422.require('cnot2', '422')
    with b.tagged(f'cnot2-{pair[0]}{pair[1]}@{block832.name}>'
                  f'{block422.name}'):
        for vertex, s in face_assignment(tuple(pair)):
            b.add(OpKind.CX, block832.qubits[vertex], block422.qubits[s])


def _expect(gadget: str, block: BlockHandle, slot: int, state: str):
    if block.slots[slot] != state:
        raise GadgetError(
            gadget, f'slot {slot} of {block.name} holds '
            f'{block.slots[slot]!r}, needs {state!r}')


def _partner(k: int, slot: int) -> int:
    return min(a for a in range(k) if a != slot)


def teleport_x(b: CircuitBuilder, src: BlockHandle, slots: Sequence[int],
               dst: BlockHandle, pool: AncillaPool):
    """Move one or two logical qubits of a [[8,3,2]] block into a
    [[4,2,2]] block, leaving the source slots in |+>"""
    src.require('teleport_x', '832')
    dst.require('teleport_x', '422')
    slots = tuple(slots)
    if len(slots) == 1:
        pair = (slots[0], _partner(src.code.k, slots[0]))
        _expect('teleport_x', dst, 0, '0')
        _expect('teleport_x', dst, 1, '+')
    elif len(slots) == 2 and slots[0] != slots[1]:
        pair = slots
        _expect('teleport_x', dst, 0, '0')
        _expect('teleport_x', dst, 1, '0')
    else:
        raise GadgetError('teleport_x', f'cannot move slots {slots}')
    with b.teleport('x'):
        cnot2_832_to_422(b, src, pair, dst)
        for destination, slot in enumerate(slots):
            outcome = ft_measure(b, src, 'X', slot, pool)
            b.correct(*dst.logical('Z', destination), outcome)
            b.correct(*src.logical('Z', slot), outcome)
            dst.slots[destination] = src.slots[slot]
            src.slots[slot] = '+'


def teleport_z(b: CircuitBuilder, src: BlockHandle, src_slots: Sequence[int],
               dst: BlockHandle, dst_slots: Sequence[int], pool: AncillaPool):
    """Move one or two logical qubits of a [[4,2,2]] block into |+> slots
    of a [[8,3,2]] block, leaving the source slots in |0>"""
    src.require('teleport_z', '422')
    dst.require('teleport_z', '832')
    src_slots, dst_slots = tuple(src_slots), tuple(dst_slots)
    if len(src_slots) != len(dst_slots):
        raise GadgetError('teleport_z', 'slot lists differ in length')
    for slot in dst_slots:
        _expect('teleport_z', dst, slot, '+')
    if len(src_slots) == 1:
        s, d = src_slots[0], dst_slots[0]
        _expect('teleport_z', src, 1 - s, '+')
        partner = _partner(dst.code.k, d)
        pair = (d, partner) if s == 0 else (partner, d)
    elif len(src_slots) == 2 and src_slots == (0, 1) \
            and dst_slots[0] != dst_slots[1]:
        pair = dst_slots
    else:
        raise GadgetError('teleport_z', f'cannot move slots {src_slots}')
    with b.teleport('z'):
        cnot2_832_to_422(b, dst, pair, src)
        for s, d in zip(src_slots, dst_slots):
            outcome = ft_measure(b, src, 'Z', s, pool)
            b.correct(*dst.logical('X', d), outcome)
            b.correct(*src.logical('X', s), outcome)
            dst.slots[d] = src.slots[s]
            src.slots[s] = '0'


def teleport(b: CircuitBuilder, direction: str, *args, **kwargs):
    if direction == 'x':
        return teleport_x(b, *args, **kwargs)
    if direction == 'z':
        return teleport_z(b, *args, **kwargs)
    raise GadgetError('teleport', f'unknown direction {direction!r}')


def ready_transfer(b: CircuitBuilder, transfer: BlockHandle,
                   wanted: Sequence[str], pool: AncillaPool,
                   on_odd: str = 'fix'):
    """Bring a free transfer block into the wanted ancilla states"""
    if 'data' in transfer.slots:
        raise GadgetError('transfer', f'{transfer.name} is busy')
    if not transfer.prepared:
        prepare_logical(b, transfer, ''.join(wanted), pool, on_odd)
        return
    for slot, state in enumerate(wanted):
        if transfer.slots[slot] != state:
            prepare_slot(b, transfer, slot, 'Z' if state == '0' else 'X',
                         pool)


def teleport_hadamard(b: CircuitBuilder, block: BlockHandle,
                      indices: Sequence[int], transfer: BlockHandle,
                      pool: AncillaPool):
    """Logical H on one or two qubits of a [[8,3,2]] block via the
    transversal H of a [[4,2,2]] transfer block"""
    indices = tuple(indices)
    if len(indices) not in (1, 2):
        raise GadgetError('teleport_hadamard', 'one or two qubits only')
    with b.tagged(f'hadamard@{block.name}'):
        if len(indices) == 1:
            ready_transfer(b, transfer, '0+', pool)
            teleport_x(b, block, indices, transfer, pool)
            transversal_h_422(b, transfer)
            logical_swap_inblock(b, transfer, 0, 1)
            prepare_slot(b, transfer, 1, 'X', pool)
            teleport_z(b, transfer, (0,), block, indices, pool)
        else:
            ready_transfer(b, transfer, '00', pool)
            teleport_x(b, block, indices, transfer, pool)
            transversal_h_422(b, transfer)
            logical_swap_inblock(b, transfer, 0, 1)
            teleport_z(b, transfer, (0, 1), block, indices, pool)


def catalyst_angle(gamma: float) -> float:
    """Y rotation angle preparing a state with overlap gamma with |H>"""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f'catalyst overlap {gamma} is not in [0, 1]')
    return math.pi / 4 + 2 * math.acos(math.sqrt(gamma))


def inject_catalyst(b: CircuitBuilder, block: BlockHandle, slot: int,
                    gamma: float = 1.0):
    """Idealized rotation of a |0> logical slot towards |H>"""
    _expect('inject_catalyst', block, slot, '0')
    y = block.code.logical('Y', slot)
    targets, letters = block.physical(y)
    angle = catalyst_angle(gamma)
    if y.phase == 2:
        angle = -angle
    with b.tagged(f'catalyst@{block.name}'):
        b.add(OpKind.INJECT, *targets, pauli=letters, angle=angle)
    block.slots[slot] = 'data'


def heisenberg(ops: Sequence[PhysicalOp], p: PauliString) -> PauliString:
    """U p U^dagger for the Clifford circuit U given by ops"""
    for op in ops:
        if op.kind is OpKind.RELABEL:
            full = list(range(p.n))
            for i, q in enumerate(op.qubits):
                full[q] = op.qubits[op.mapping[i]]
            p = conjugate_by_permutation(p, QubitPermutation(tuple(full)))
        else:
            rule = CLIFFORD_RULES.get(op.kind.value)
            if rule is None:
                raise GadgetError('heisenberg',
                                  f'{op.kind.value} is not a Clifford gate')
            p = rule(p, *op.qubits)
    return p


# Standalone layouts for the gadget library and the fault scenarios: a
# [[8,3,2]] block on qubits 0-7, an optional [[4,2,2]] block after it, and
# one shared ancilla pair at the end.

def scratch(with_square: bool = False, with_second_cube: bool = False):
    blocks = [BlockHandle(code_832(), range(8), name='data0')]
    offset = 8
    if with_second_cube:
        blocks.append(BlockHandle(code_832(), range(8, 16), name='data1'))
        offset = 16
    if with_square:
        blocks.append(BlockHandle(code_422(), range(offset, offset + 4),
                                  BlockRole.TRANSFER, name='transfer'))
        offset += 4
    pool = AncillaPool(shared=((offset, offset + 1),))
    return blocks, pool, offset + 2


def _emit(name: str, build: Callable) -> PhysicalCircuit:
    blocks, pool, n = scratch(True, True)
    cube, second, square = blocks
    cube.slots = ['data'] * 3
    second.slots = ['data'] * 3
    square.slots = ['0', '+']
    square.prepared = True
    b = CircuitBuilder(n)
    build(b, cube, second, square, pool)
    return b.build(strategy='sequential')


GADGETS: Dict[str, Callable] = {
    'logical_ccz': lambda b, c, d, s, p: logical_ccz(b, c),
    'logical_cz': lambda b, c, d, s, p: logical_cz(b, c, 0, 1),
    'logical_cnot_inblock': lambda b, c, d, s, p: logical_cnot_inblock(
        b, c, 0, 1),
    'logical_swap_inblock': lambda b, c, d, s, p: logical_swap_inblock(
        b, c, 0, 1),
    'transversal_h_422': lambda b, c, d, s, p: transversal_h_422(b, s),
    'cnot3_between_832': lambda b, c, d, s, p: cnot3_between_832(b, c, d),
    'targeted_cnot_between_832': lambda b, c, d, s, p:
        targeted_cnot_between_832(b, c, 0, d, 1),
    'cnot2_832_to_422': lambda b, c, d, s, p: cnot2_832_to_422(
        b, c, (0, 1), s),
    'ft_measure_x_832': lambda b, c, d, s, p: ft_measure(b, c, 'X', 0, p),
    'ft_measure_z_832': lambda b, c, d, s, p: ft_measure(b, c, 'Z', 0, p),
    'ft_measure_x_422': lambda b, c, d, s, p: ft_measure(b, s, 'X', 0, p),
    'ft_measure_z_422': lambda b, c, d, s, p: ft_measure(b, s, 'Z', 0, p),
    'stabilizer_round_832': lambda b, c, d, s, p: stabilizer_round(b, c, p),
    'stabilizer_round_422': lambda b, c, d, s, p: stabilizer_round(b, s, p),
    'prepare_832': lambda b, c, d, s, p: prepare_logical(b, c, '000', p),
    'prepare_422': lambda b, c, d, s, p: prepare_logical(b, s, '00', p),
    'teleport_x': lambda b, c, d, s, p: teleport_x(b, c, (0,), s, p),
    'teleport_hadamard': lambda b, c, d, s, p: teleport_hadamard(
        b, c, (0,), s, p),
}


def emit_gadget(name: str) -> PhysicalCircuit:
    try:
        build = GADGETS[name]
    except KeyError:
        raise KeyError(f'Unknown gadget {name!r}, see `gadgets list`')
    return _emit(name, build)


@dataclass(frozen=True)
class FaultScenario:
    """A gadget embedded between noiseless preparation and noiseless
    checking. Faults are enumerated over ops[window[0]:window[1]]; an
    accepted shot is correct when every expected record bit matches and
    the final state is a +1 eigenstate of every check."""
    name: str
    circuit: PhysicalCircuit
    window: Tuple[int, int]
    expected_bits: Tuple[Tuple[int, int], ...] = ()
    checks: Tuple[PauliString, ...] = ()


def _slot_checks(block: BlockHandle, n: int) -> List[PauliString]:
    out = []
    for slot, state in enumerate(block.slots):
        if state in ('0', '+'):
            letter = 'Z' if state == '0' else 'X'
            out.append(block.embed(block.code.logical(letter, slot), n))
    return out


def _scenario(name: str, prepare: Dict[str, str], gadget: Callable,
              with_square: bool = False) -> FaultScenario:
    blocks, pool, n = scratch(with_square)
    named = {block.code.name: block for block in blocks}
    b = CircuitBuilder(n)
    for code, states in prepare.items():
        prepare_logical(b, named[code], states, pool)
    start = len(b.ops)
    expected = gadget(b, named, pool) or ()
    stop = len(b.ops)
    checks = []
    for block in blocks:
        if not block.prepared:
            continue
        stabilizer_round(b, block, pool)
        checks += _slot_checks(block, n)
    return FaultScenario(name, b.build(), (start, stop), tuple(expected),
                         tuple(checks))


def _measure_scenarios(code: str, basis: str, inputs: Sequence[str]):
    def gadget(b, named, pool):
        return [(ft_measure(b, named[code], basis, 0, pool), 0)]
    return [_scenario(f'ft_measure_{basis.lower()}_{code}[{states}]',
                      {code: states}, gadget, code == '422')
            for states in inputs]


def _round_scenarios(code: str, inputs: Sequence[str]):
    def gadget(b, named, pool):
        stabilizer_round(b, named[code], pool)
    return [_scenario(f'stabilizer_round_{code}[{states}]', {code: states},
                      gadget, code == '422') for states in inputs]


def _prepare_scenarios(code: str, inputs: Sequence[str]):
    def make(states):
        def gadget(b, named, pool):
            prepare_logical(b, named[code], states, pool)
        return gadget
    return [_scenario(f'prepare_{code}[{states}]', {}, make(states),
                      code == '422') for states in inputs]


def _teleport_x_scenarios():
    def gadget(b, named, pool):
        teleport_x(b, named['832'], (0,), named['422'], pool)
    return [_scenario(f'teleport_x[{states}]', {'832': states, '422': '0+'},
                      gadget, True) for states in ('000', '+00')]


def _teleport_z_scenarios():
    def gadget(b, named, pool):
        teleport_z(b, named['422'], (0,), named['832'], (0,), pool)
    return [_scenario(f'teleport_z[{states}]', {'832': '+00', '422': states},
                      gadget, True) for states in ('0+', '++')]


SCENARIOS: Dict[str, Callable[[], List[FaultScenario]]] = {
    'ft_measure_x_832': lambda: _measure_scenarios('832', 'X', ('+00', '+++')),
    'ft_measure_z_832': lambda: _measure_scenarios('832', 'Z', ('000', '0++')),
    'ft_measure_x_422': lambda: _measure_scenarios('422', 'X', ('+0', '++')),
    'ft_measure_z_422': lambda: _measure_scenarios('422', 'Z', ('00', '0+')),
    'stabilizer_round_832': lambda: _round_scenarios('832', ('000', '+++')),
    'stabilizer_round_422': lambda: _round_scenarios('422', ('00', '++')),
    'prepare_832': lambda: _prepare_scenarios('832', ('000', '+++', '0+0')),
    'prepare_422': lambda: _prepare_scenarios('422', ('00', '++', '0+')),
    'teleport_x': _teleport_x_scenarios,
    'teleport_z': _teleport_z_scenarios,
}


@dataclass
class FaultReport:
    gadget: str
    sites: int = 0
    runs: int = 0
    discarded: int = 0
    accepted_wrong: int = 0
    failures: List[Tuple[str, FaultSite, int]] = field(default_factory=list)

    @property
    def fault_tolerant(self) -> bool:
        return self.accepted_wrong == 0


def _is_wrong(state: SimState, scenario: FaultScenario) -> bool:
    for bit, value in scenario.expected_bits:
        if state.record[bit] != value:
            return True
    weight = state.projector_weight(scenario.checks)
    return weight < 1 - 1e-6


def run_scenario(scenario: FaultScenario, seeds: Sequence[int] = (0,),
                 capacity: int = DEFAULT_CAPACITY,
                 report: Optional[FaultReport] = None) -> FaultReport:
    report = report or FaultReport(scenario.name)
    ops = scenario.circuit.ops
    start, stop = scenario.window
    sites = fault_sites(scenario.circuit, start, stop)
    report.sites += len(sites)
    for seed in seeds:
        base = SimState(scenario.circuit.n_physical, seed, capacity)
        execute(base, ops[:start])
        if base.discarded:
            raise GadgetError(scenario.name, 'noiseless prefix discarded')
        for site in sites:
            state = base.copy()
            execute(state, ops[start:site.location], start=start)
            if not state.discarded:
                step(state, PhysicalOp(OpKind.FAULT, site.qubits,
                                       pauli=site.pauli), NOISELESS,
                     site.location)
                execute(state, ops[site.location:], start=site.location)
            report.runs += 1
            if state.discarded:
                report.discarded += 1
            elif _is_wrong(state, scenario):
                report.accepted_wrong += 1
                report.failures.append((scenario.name, site, seed))
    return report


def enumerate_faults(gadget: str, seeds: Sequence[int] = (0,),
                     capacity: int = DEFAULT_CAPACITY) -> FaultReport:
    """Exhaustive single-fault injection over every scenario of a gadget"""
    try:
        scenarios = SCENARIOS[gadget]()
    except KeyError:
        raise KeyError(f'No fault scenarios for {gadget!r}, choose from '
                       f'{sorted(SCENARIOS)}')
    report = FaultReport(gadget)
    for scenario in scenarios:
        run_scenario(scenario, seeds, capacity, report)
    logger.info(
        f'{gadget}: {report.sites} fault sites, {report.runs} runs, '
        f'{report.discarded} discarded, {report.accepted_wrong} '
        f'accepted and wrong')
    return report


__all__ = [
    BlockHandle, BlockRole, AncillaPool, GadgetError, FaultScenario,
    FaultReport, ft_measure, stabilizer_round, prepare_logical, prepare_slot,
    logical_pauli, logical_ccz, logical_cz, cz_face, logical_cnot_inblock,
    logical_swap_inblock, transversal_h_422, cnot3_between_832,
    targeted_cnot_between_832, face_assignment, cnot2_832_to_422,
    teleport_x, teleport_z, teleport, ready_transfer, teleport_hadamard,
    catalyst_angle, inject_catalyst, heisenberg, pure_error, scratch,
    emit_gadget, GADGETS, SCENARIOS, run_scenario, enumerate_faults]

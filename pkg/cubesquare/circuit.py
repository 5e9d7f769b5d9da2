from __future__ import annotations
from contextlib import contextmanager
from dataclasses import dataclass, field, asdict
from enum import Enum
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union
import json

from . import logger, SCHEMA_LOGICAL, SCHEMA_PHYSICAL


class MalformedCircuitError(Exception):
    def __init__(self, message: str, line: Optional[int] = None,
                 column: Optional[int] = None):
        self.line = line
        self.column = column
        where = '' if line is None else f' (line {line}, column {column})'
        super().__init__(f'Malformed circuit document{where}: {message}')


class GateKind(str, Enum):
    PREP_Z = 'PrepZ'
    PREP_X = 'PrepX'
    MEAS_Z = 'MeasZ'
    MEAS_X = 'MeasX'
    X = 'X'
    Z = 'Z'
    H = 'H'
    S = 'S'
    T = 'T'
    CX = 'CX'
    CZ = 'CZ'
    CS = 'CS'
    SWAP = 'SWAP'
    CCZ = 'CCZ'


GATE_ARITY = {
    GateKind.CCZ: 3, GateKind.CX: 2, GateKind.CZ: 2, GateKind.CS: 2,
    GateKind.SWAP: 2}

PREPARATIONS = (GateKind.PREP_Z, GateKind.PREP_X)
MEASUREMENTS = (GateKind.MEAS_Z, GateKind.MEAS_X)


@dataclass(frozen=True)
class LogicalGate:
    kind: GateKind
    qubits: Tuple[int, ...]

    def __post_init__(self):
        super().__setattr__('kind', GateKind(self.kind))
        super().__setattr__('qubits', tuple(self.qubits))
        arity = GATE_ARITY.get(self.kind, 1)
        if len(self.qubits) != arity:
            raise ValueError(
                f'{self.kind.value} takes {arity} operands, '
                f'got {len(self.qubits)}')
        if len(set(self.qubits)) != arity:
            raise ValueError(f'{self.kind.value} operands must be distinct')

    def __str__(self) -> str:
        return f'{self.kind.value}{self.qubits}'


@dataclass(frozen=True)
class LogicalCircuit:
    """Circuit over the logical gate set. phase_qubit and catalyst name the
    extra qubits introduced by the encoding passes."""
    n_qubits: int
    gates: Tuple[LogicalGate, ...] = ()
    phase_qubit: Optional[int] = None
    catalyst: Optional[int] = None

    def __post_init__(self):
        super().__setattr__('gates', tuple(self.gates))
        for gate in self.gates:
            for q in gate.qubits:
                if not 0 <= q < self.n_qubits:
                    raise ValueError(
                        f'{gate} references qubit {q} outside '
                        f'0..{self.n_qubits - 1}')
        for name in ('phase_qubit', 'catalyst'):
            q = getattr(self, name)
            if q is not None and not 0 <= q < self.n_qubits:
                raise ValueError(f'{name} {q} out of range')

    @property
    def computational(self) -> Tuple[int, ...]:
        extra = {self.phase_qubit, self.catalyst}
        return tuple(q for q in range(self.n_qubits) if q not in extra)

    def depth(self) -> int:
        """Number of layers of non-preparation, non-measurement gates"""
        level: Dict[int, int] = {}
        depth = 0
        for gate in self.gates:
            if gate.kind in PREPARATIONS or gate.kind in MEASUREMENTS:
                continue
            layer = 1 + max(level.get(q, 0) for q in gate.qubits)
            for q in gate.qubits:
                level[q] = layer
            depth = max(depth, layer)
        return depth

    def count(self, *kinds: GateKind) -> int:
        return sum(1 for gate in self.gates if gate.kind in kinds)


class OpKind(str, Enum):
    P0 = 'P0'
    PPLUS = 'Pplus'
    H = 'H'
    S = 'S'
    SDG = 'Sdg'
    T = 'T'
    TDG = 'Tdg'
    X = 'X'
    Z = 'Z'
    CX = 'CX'
    CZ = 'CZ'
    MEAS_Z = 'MeasZ'
    MEAS_X = 'MeasX'
    RESET = 'Reset'
    RELABEL = 'Relabel'
    COND_PAULI = 'CondPauli'
    DETECT = 'Detect'
    INJECT = 'Inject'
    FAULT = 'Fault'


SINGLE_QUBIT_GATES = (
    OpKind.H, OpKind.S, OpKind.SDG, OpKind.T, OpKind.TDG, OpKind.X, OpKind.Z)
TWO_QUBIT_GATES = (OpKind.CX, OpKind.CZ)
PREPARATION_OPS = (OpKind.P0, OpKind.PPLUS, OpKind.RESET)
MEASUREMENT_OPS = (OpKind.MEAS_Z, OpKind.MEAS_X)
PAULI_OPS = (OpKind.COND_PAULI, OpKind.INJECT, OpKind.FAULT)


@dataclass(frozen=True)
class PhysicalOp:
    """One primitive operation.

    condition is an XOR clause over measurement record indices (CondPauli
    and Detect). pauli holds one letter per target for CondPauli, Inject
    and Fault. mapping sends the content of qubits[i] to
    qubits[mapping[i]] for Relabel. tag names the gadget that emitted the
    op, nested gadgets joined by '/'.
    """
    kind: OpKind
    qubits: Tuple[int, ...] = ()
    condition: Tuple[int, ...] = ()
    pauli: str = ''
    mapping: Tuple[int, ...] = ()
    angle: float = 0.0
    frame: bool = False
    tag: str = ''

    def __post_init__(self):
        super().__setattr__('kind', OpKind(self.kind))
        for name in ('qubits', 'condition', 'mapping'):
            super().__setattr__(name, tuple(getattr(self, name)))

    def __str__(self) -> str:
        text = f'{self.kind.value} {list(self.qubits)}'
        if self.pauli:
            text += f' {self.pauli}'
        if self.condition:
            text += f' if {"^".join(f"m{i}" for i in self.condition)}'
        return text


@dataclass(frozen=True)
class CircuitMetadata:
    logical_width: int = 0
    logical_depth: int = 0
    hardness: int = 0
    two_qubit_gate_count: int = 0
    teleport_count: int = 0
    strategy: str = ''
    readout_start: Optional[int] = None
    outputs: Tuple[Tuple[int, ...], ...] = ()
    output_qubits: Tuple[int, ...] = ()
    logical_x: Tuple[str, ...] = ()
    logical_z: Tuple[str, ...] = ()
    stabilizers: Tuple[str, ...] = ()

    def __post_init__(self):
        super().__setattr__(
            'outputs', tuple(tuple(clause) for clause in self.outputs))
        for name in ('output_qubits', 'logical_x', 'logical_z',
                     'stabilizers'):
            super().__setattr__(name, tuple(getattr(self, name)))


@dataclass(frozen=True)
class PhysicalCircuit:
    n_physical: int
    ops: Tuple[PhysicalOp, ...] = ()
    metadata: CircuitMetadata = field(default_factory=CircuitMetadata)

    def __post_init__(self):
        super().__setattr__('ops', tuple(self.ops))

    @property
    def n_measurements(self) -> int:
        return sum(1 for op in self.ops if op.kind in MEASUREMENT_OPS)

    def two_qubit_gate_count(self) -> int:
        return sum(1 for op in self.ops if op.kind in TWO_QUBIT_GATES)

    def teleport_count(self) -> int:
        return len(teleport_tags(self.ops))

    def with_ops(self, ops: Sequence[PhysicalOp]) -> PhysicalCircuit:
        return PhysicalCircuit(self.n_physical, tuple(ops), self.metadata)


def teleport_tags(ops: Sequence[PhysicalOp]) -> List[str]:
    tags = []
    for op in ops:
        for part in op.tag.split('/'):
            if part.startswith('teleport-') and part not in tags:
                tags.append(part)
    return tags


class CircuitBuilder:
    """Append-only op list with the measurement record bookkeeping the
    gadgets need."""

    def __init__(self, n_physical: int, frame: bool = False):
        self.n_physical = n_physical
        self.frame = frame
        self.ops: List[PhysicalOp] = []
        self.n_measurements = 0
        self.teleports = 0
        self._tags: List[str] = []

    @contextmanager
    def tagged(self, name: str) -> Iterator[str]:
        self._tags.append(name)
        try:
            yield '/'.join(self._tags)
        finally:
            self._tags.pop()

    @contextmanager
    def teleport(self, direction: str) -> Iterator[str]:
        self.teleports += 1
        with self.tagged(f'teleport-{direction}#{self.teleports}') as tag:
            yield tag

    @property
    def tag(self) -> str:
        return '/'.join(self._tags)

    def add(self, kind: OpKind, *qubits: int, **fields) -> PhysicalOp:
        op = PhysicalOp(kind, qubits, tag=self.tag, **fields)
        self.ops.append(op)
        return op

    def measure(self, kind: OpKind, qubit: int) -> int:
        self.add(kind, qubit)
        self.n_measurements += 1
        return self.n_measurements - 1

    def detect(self, *condition: int):
        self.add(OpKind.DETECT, condition=condition)

    def correct(self, targets: Sequence[int], letters: str,
                *condition: int):
        if targets:
            self.add(OpKind.COND_PAULI, *targets, pauli=letters,
                     condition=condition, frame=self.frame)

    def build(self, **metadata) -> PhysicalCircuit:
        ops = tuple(self.ops)
        teleports = len(teleport_tags(ops))
        meta = CircuitMetadata(
            hardness=teleports, teleport_count=teleports,
            two_qubit_gate_count=sum(
                1 for op in ops if op.kind in TWO_QUBIT_GATES),
            **metadata)
        return PhysicalCircuit(self.n_physical, ops, meta)


@dataclass(frozen=True)
class Violation:
    index: Optional[int]
    message: str

    def __str__(self) -> str:
        where = 'metadata' if self.index is None else f'op {self.index}'
        return f'{where}: {self.message}'


def _arity(op: PhysicalOp) -> Optional[str]:
    n = len(op.qubits)
    if op.kind in SINGLE_QUBIT_GATES or op.kind in PREPARATION_OPS \
            or op.kind in MEASUREMENT_OPS:
        if n != 1:
            return f'{op.kind.value} takes one qubit, got {n}'
    elif op.kind in TWO_QUBIT_GATES:
        if n != 2:
            return f'{op.kind.value} takes two qubits, got {n}'
    elif op.kind is OpKind.DETECT:
        if n:
            return 'Detect takes no qubits'
        if not op.condition:
            return 'Detect needs a non-empty condition'
    elif not n:
        return f'{op.kind.value} needs at least one qubit'
    if len(set(op.qubits)) != n:
        return f'{op.kind.value} has aliased operands {list(op.qubits)}'
    if op.kind in PAULI_OPS:
        if len(op.pauli) != n or any(c not in 'XYZ' for c in op.pauli):
            return f'{op.kind.value} needs one of X/Y/Z per qubit'
        if op.kind is OpKind.COND_PAULI and not op.condition:
            return 'CondPauli needs a non-empty condition'
    if op.kind is OpKind.RELABEL and sorted(op.mapping) != list(range(n)):
        return f'Relabel mapping {list(op.mapping)} is not a bijection'
    return None


def validate(c: PhysicalCircuit) -> List[Violation]:
    violations = []
    measured = 0
    for index, op in enumerate(c.ops):
        for q in op.qubits:
            if not 0 <= q < c.n_physical:
                violations.append(Violation(
                    index, f'qubit {q} outside 0..{c.n_physical - 1}'))
        problem = _arity(op)
        if problem:
            violations.append(Violation(index, problem))
        for bit in op.condition:
            if not 0 <= bit < measured:
                violations.append(Violation(
                    index, f'condition references measurement {bit} before '
                    f'it is recorded ({measured} so far)'))
        if op.kind in MEASUREMENT_OPS:
            measured += 1

    meta = c.metadata
    for clause in meta.outputs:
        for bit in clause:
            if not 0 <= bit < measured:
                violations.append(Violation(
                    None, f'output references unknown measurement {bit}'))
    if meta.readout_start is not None \
            and not 0 <= meta.readout_start <= len(c.ops):
        violations.append(Violation(None, 'readout_start out of range'))
    counted = {
        'two_qubit_gate_count': c.two_qubit_gate_count(),
        'teleport_count': c.teleport_count(),
        'hardness': c.teleport_count()}
    for name, value in counted.items():
        if getattr(meta, name) != value:
            violations.append(Violation(
                None, f'{name} is {getattr(meta, name)} but the op list '
                f'gives {value}'))
    return violations


# Serialization: one JSON object per document, one op per line so that
# golden files diff cleanly.

_OP_DEFAULTS = PhysicalOp(OpKind.X)


def _op_to_dict(op: PhysicalOp) -> dict:
    out = {'op': op.kind.value}
    if op.qubits:
        out['q'] = list(op.qubits)
    if op.condition:
        out['cond'] = list(op.condition)
    if op.pauli:
        out['pauli'] = op.pauli
    if op.mapping:
        out['map'] = list(op.mapping)
    if op.angle != _OP_DEFAULTS.angle:
        out['angle'] = op.angle
    if op.frame:
        out['frame'] = True
    if op.tag:
        out['tag'] = op.tag
    return out


def _op_from_dict(item: dict) -> PhysicalOp:
    unknown = set(item) - {
        'op', 'q', 'cond', 'pauli', 'map', 'angle', 'frame', 'tag'}
    if unknown:
        raise KeyError(f'unknown op fields {sorted(unknown)}')
    return PhysicalOp(
        kind=OpKind(item['op']),
        qubits=tuple(int(q) for q in item.get('q', ())),
        condition=tuple(int(b) for b in item.get('cond', ())),
        pauli=str(item.get('pauli', '')),
        mapping=tuple(int(m) for m in item.get('map', ())),
        angle=float(item.get('angle', 0.0)),
        frame=bool(item.get('frame', False)),
        tag=str(item.get('tag', '')))


def _dumps(value) -> str:
    return json.dumps(value, sort_keys=True)


def _document(header: Dict[str, object], key: str,
              items: List[dict]) -> bytes:
    lines = ['{']
    for name, value in header.items():
        lines.append(f'  "{name}": {_dumps(value)},')
    if items:
        lines.append(f'  "{key}": [')
        body = [f'    {json.dumps(item)}' for item in items]
        lines.append(',\n'.join(body))
        lines.append('  ]')
    else:
        lines.append(f'  "{key}": []')
    lines.append('}')
    return ('\n'.join(lines) + '\n').encode('utf-8')


def serialize(c: Union[PhysicalCircuit, LogicalCircuit]) -> bytes:
    if isinstance(c, LogicalCircuit):
        header = {
            'schema': SCHEMA_LOGICAL,
            'n_qubits': c.n_qubits,
            'phase_qubit': c.phase_qubit,
            'catalyst': c.catalyst}
        gates = [{'gate': g.kind.value, 'q': list(g.qubits)}
                 for g in c.gates]
        return _document(header, 'gates', gates)
    metadata = asdict(c.metadata)
    header = {
        'schema': SCHEMA_PHYSICAL,
        'n_physical': c.n_physical,
        'metadata': metadata}
    return _document(header, 'ops', [_op_to_dict(op) for op in c.ops])


def _line_of(text: str, needle: str, nth: int) -> Optional[int]:
    start = -1
    for _ in range(nth + 1):
        start = text.find(needle, start + 1)
        if start < 0:
            return None
    return text.count('\n', 0, start) + 1


def deserialize(data: Union[bytes, str]) -> Union[PhysicalCircuit,
                                                  LogicalCircuit]:
    text = data.decode('utf-8') if isinstance(data, bytes) else data
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedCircuitError(exc.msg, exc.lineno, exc.colno)
    if not isinstance(document, dict):
        raise MalformedCircuitError('top level must be an object', 1, 1)
    schema = document.get('schema')

    if schema == SCHEMA_LOGICAL:
        gates = []
        for index, item in enumerate(document.get('gates', [])):
            try:
                gates.append(LogicalGate(GateKind(item['gate']),
                                         tuple(item['q'])))
            except (KeyError, ValueError, TypeError) as exc:
                raise MalformedCircuitError(
                    f'gates[{index}]: {exc}',
                    _line_of(text, '"gate"', index), 1)
        try:
            return LogicalCircuit(
                int(document['n_qubits']), tuple(gates),
                document.get('phase_qubit'), document.get('catalyst'))
        except (KeyError, ValueError, TypeError) as exc:
            raise MalformedCircuitError(str(exc))

    if schema != SCHEMA_PHYSICAL:
        raise MalformedCircuitError(
            f'unsupported schema {schema!r}', _line_of(text, '"schema"', 0),
            1)
    ops = []
    for index, item in enumerate(document.get('ops', [])):
        try:
            ops.append(_op_from_dict(item))
        except (KeyError, ValueError, TypeError) as exc:
            raise MalformedCircuitError(
                f'ops[{index}]: {exc}', _line_of(text, '"op"', index), 1)
    try:
        meta = CircuitMetadata(**document.get('metadata', {}))
        circuit = PhysicalCircuit(int(document['n_physical']), tuple(ops),
                                  meta)
    except (KeyError, ValueError, TypeError) as exc:
        raise MalformedCircuitError(
            f'header: {exc}', _line_of(text, '"metadata"', 0), 1)
    logger.debug(f'Read circuit with {len(ops)} op{"s"[:len(ops)^1]}')
    return circuit


def read_circuit(path: str) -> Union[PhysicalCircuit, LogicalCircuit]:
    with open(path, 'rb') as f:
        return deserialize(f.read())


def write_circuit(path: str, c: Union[PhysicalCircuit, LogicalCircuit]):
    with open(path, 'wb') as f:
        f.write(serialize(c))


__all__ = [
    GateKind, LogicalGate, LogicalCircuit, OpKind, PhysicalOp,
    CircuitMetadata, PhysicalCircuit, CircuitBuilder, Violation,
    MalformedCircuitError, validate, serialize, deserialize, read_circuit,
    write_circuit, teleport_tags, SINGLE_QUBIT_GATES, TWO_QUBIT_GATES,
    PREPARATION_OPS, MEASUREMENT_OPS]

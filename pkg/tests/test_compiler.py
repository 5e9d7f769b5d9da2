"""Tests for cubesquare/compiler.py"""
import logging

import numpy as np
import pytest

from cubesquare.circuit import (
    GateKind, LogicalCircuit, LogicalGate, OpKind, validate)
from cubesquare.compiler import (
    CatalystError, PhaseRefEncoding, ScheduleOptions, SchedulingError,
    UnsupportedGateError, allocate, catalytic_t, compile_circuit,
    cost_report, encode_phase_ref, expand_catalytic_T, logical_unitary,
    place, schedule, t_count_estimate)
from cubesquare.gadgets import catalyst_angle
from cubesquare.simulator import run_shot


def G(kind, *qubits):
    return LogicalGate(kind, qubits)


H_STATE = np.array([np.cos(np.pi / 8), np.sin(np.pi / 8)], dtype=complex)


@pytest.mark.parametrize('strategy, per_block, extra', [
    ('sequential', 8, 14), ('mid', 10, 18), ('fast', 18, 26)])
def test_allocate_sizes(strategy, per_block, extra):
    for n_c in range(1, 8):
        layout = allocate(n_c, strategy, capacity=200)
        blocks = -(-n_c // 3)
        assert layout.n_physical == per_block * blocks + extra
        assert len(layout.data_blocks) == blocks
        used = [q for b in layout.blocks for q in b.qubits]
        used += [q for b in layout.blocks for pair in b.ancillas for q in pair]
        used += [q for pair in layout.shared for q in pair]
        assert sorted(used) == list(range(layout.n_physical))


def test_layout_lookup():
    layout = allocate(4, 'mid')
    assert [b.name for b in layout.blocks] == [
        'data0', 'data1', 'rotation', 'transfer']
    assert layout.block('transfer').code == '422'
    assert set(layout.pool().per_block) == {
        'data0', 'data1', 'rotation', 'transfer'}
    assert layout.handles()['rotation'].qubits == layout.block(
        'rotation').qubits

    with pytest.raises(KeyError):
        layout.block('data2')


def test_allocate_rejects_bad_input(caplog):
    with pytest.raises(ValueError):
        allocate(0)
    with pytest.raises(ValueError):
        allocate(3, 'eager')

    with caplog.at_level(logging.WARNING, logger='cubesquare'):
        allocate(9, 'fast')
    assert 'above the simulator capacity' in caplog.text


def test_place_groups_interacting_qubits():
    circuit = LogicalCircuit(6, (
        G('CX', 0, 4), G('CX', 0, 5), G('CZ', 1, 2), G('X', 3)))
    assert place(circuit) == {
        0: (0, 0), 4: (0, 1), 5: (0, 2), 1: (1, 0), 2: (1, 1), 3: (1, 2)}


def test_logical_unitary():
    u = logical_unitary(LogicalCircuit(2, (G('X', 0), G('CX', 0, 1))))
    # |00> -> |01> -> |11>
    assert np.allclose(u[:, 0], np.eye(4)[3])

    with pytest.raises(UnsupportedGateError):
        logical_unitary(LogicalCircuit(1, (G('PrepZ', 0),)))


def test_phase_reference_encoding():
    circuit = LogicalCircuit(2, (
        G('H', 0), G('S', 0), G('CS', 0, 1), G('CX', 1, 0), G('S', 1),
        G('CZ', 0, 1)))
    encoded = encode_phase_ref(circuit)
    assert encoded.n_qubits == 3
    assert encoded.phase_qubit == 2
    assert encoded.computational == (0, 1)
    assert not encoded.count(GateKind.S, GateKind.CS)
    assert encode_phase_ref(encoded) is encoded

    encoding = PhaseRefEncoding(2)
    u = logical_unitary(circuit)
    assert np.allclose(logical_unitary(encoded), encoding.encode_matrix(u))

    rng = np.random.default_rng(0)
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    psi /= np.linalg.norm(psi)
    assert np.allclose(logical_unitary(encoded) @ encoding.encode_state(psi),
                       encoding.encode_state(u @ psi))

    with pytest.raises(ValueError):
        encoding.encode_matrix(np.eye(2))
    with pytest.raises(ValueError):
        encoding.encode_state(np.ones(8))
    with pytest.raises(UnsupportedGateError):
        encode_phase_ref(LogicalCircuit(1, (G('T', 0),)))


def test_catalytic_t_returns_the_catalyst():
    u = logical_unitary(LogicalCircuit(2, tuple(catalytic_t(0, 1))))
    t = np.diag([1, np.exp(1j * np.pi / 4)])
    rng = np.random.default_rng(1)
    for _ in range(3):
        psi = rng.normal(size=2) + 1j * rng.normal(size=2)
        psi /= np.linalg.norm(psi)
        # the catalyst is qubit 1, the most significant
        assert np.allclose(u @ np.kron(H_STATE, psi),
                           np.kron(H_STATE, t @ psi))


def test_expand_catalytic_t():
    circuit = LogicalCircuit(2, (G('T', 0), G('CX', 0, 1), G('T', 1)))
    expanded = expand_catalytic_T(circuit)
    assert expanded.n_qubits == 3
    assert expanded.catalyst == 2
    assert expanded.computational == (0, 1)
    assert len(expanded.gates) == 17
    assert not expanded.count(GateKind.T)

    plain = LogicalCircuit(1, (G('H', 0),))
    assert expand_catalytic_T(plain) is plain

    with pytest.raises(CatalystError):
        expand_catalytic_T(LogicalCircuit(2, (G('T', 1),), catalyst=1))
    with pytest.raises(CatalystError):
        expand_catalytic_T(encode_phase_ref(plain))


def test_schedule_options():
    assert ScheduleOptions().corrections == 'apply'
    for bad in [{'corrections': 'ignore'}, {'relocation': 'walk'},
                {'rounds': 'never'}, {'on_odd': 'retry'},
                {'catalyst_gamma': 1.2}]:
        with pytest.raises(ValueError):
            ScheduleOptions(**bad)


def test_scheduling_errors(example_circuit):
    with pytest.raises(SchedulingError):
        schedule(example_circuit, allocate(3))
    wide = encode_phase_ref(LogicalCircuit(4, (G('X', 3),)))
    with pytest.raises(SchedulingError):
        schedule(wide, allocate(3))
    # with a catalyst the rotation block has room for one operand only
    crowded = LogicalCircuit(2, (G('T', 0), G('CS', 0, 1)))
    with pytest.raises(SchedulingError):
        compile_circuit(crowded)


def test_compile_example(example_circuit):
    c = compile_circuit(example_circuit)
    assert c.n_physical == 22
    assert validate(c) == []
    meta = c.metadata
    assert (meta.logical_width, meta.logical_depth) == (3, 3)
    assert meta.hardness == 0
    assert meta.strategy == 'sequential'
    assert meta.output_qubits == (0, 1, 2)
    assert len(meta.logical_z) == 4
    assert c.ops[meta.readout_start].kind is OpKind.MEAS_Z
    assert any(op.tag.endswith('ccz@data0') for op in c.ops)

    for seed in range(3):
        shot = run_shot(c, seed=seed)
        assert not shot.discarded
        assert shot.accepted_bits == (1, 1, 0)


def test_compile_strategies(example_circuit):
    mid = compile_circuit(example_circuit, 'mid')
    fast = compile_circuit(example_circuit, 'fast')
    assert mid.n_physical == 28
    assert fast.n_physical == 44
    assert validate(fast) == []
    ended = compile_circuit(example_circuit,
                            options=ScheduleOptions(rounds='end'))
    assert validate(ended) == []
    assert ended.ops[ended.metadata.readout_start].kind is OpKind.MEAS_Z


def test_hadamards_cost_two_teleports():
    circuit = LogicalCircuit(1, (
        G('PrepZ', 0), G('H', 0), G('S', 0), G('S', 0), G('H', 0),
        G('MeasZ', 0)))
    c = compile_circuit(circuit)
    assert validate(c) == []
    # two H gadgets and one phase segment moving the operand in and out
    assert c.metadata.hardness == 8
    assert c.teleport_count() == 8


def test_cost_report(example_circuit):
    report = cost_report(compile_circuit(example_circuit), 2 ** -10)
    assert report.t_estimate == pytest.approx(50.0)
    values = report.as_dict()
    assert values['w'] == 3
    assert values['eta'] == 0
    assert values['n_physical'] == 22
    assert set(values) == {
        'w', 'd', 'eta', 'two_qubit_count', 'teleport_count', 'strategy',
        'n_physical', 'epsilon', 't_estimate'}
    assert 'epsilon' not in cost_report(
        compile_circuit(example_circuit)).as_dict()


def test_t_count_estimate():
    assert t_count_estimate(2 ** -10) == pytest.approx(50.0)
    assert t_count_estimate(0.5) == pytest.approx(5.0)
    for bad in (0, 1, 2):
        with pytest.raises(ValueError):
            t_count_estimate(bad)


@pytest.mark.slow
@pytest.mark.parametrize('corrections', ['apply', 'frame-track'])
def test_phase_segment_runs(corrections):
    circuit = LogicalCircuit(1, (
        G('PrepZ', 0), G('H', 0), G('S', 0), G('S', 0), G('H', 0),
        G('MeasZ', 0)))
    c = compile_circuit(circuit,
                        options=ScheduleOptions(corrections=corrections))
    for seed in range(2):
        shot = run_shot(c, seed=seed)
        assert not shot.discarded
        assert shot.accepted_bits == (1,)


@pytest.mark.slow
def test_catalytic_t_runs():
    # T^4 = Z, so H T^4 H flips the readout
    gates = (G('PrepZ', 0), G('H', 0)) + (G('T', 0),) * 4 + \
        (G('H', 0), G('MeasZ', 0))
    c = compile_circuit(LogicalCircuit(1, gates))
    shot = run_shot(c, seed=0)
    assert not shot.discarded
    assert shot.accepted_bits == (1,)


def test_phase_reference_s_has_order_four():
    encoding = PhaseRefEncoding(1)
    s = logical_unitary(encode_phase_ref(LogicalCircuit(1, (G('S', 0),))))
    assert np.allclose(s, encoding.encode_matrix(np.diag([1, 1j])))
    assert not np.allclose(s @ s, np.eye(4))
    assert np.allclose(np.linalg.matrix_power(s, 4), np.eye(4))

    four = encode_phase_ref(LogicalCircuit(1, (G('S', 0),) * 4))
    assert np.allclose(logical_unitary(four), np.eye(4))


def test_phase_reference_cs_matrix():
    cs = logical_unitary(encode_phase_ref(
        LogicalCircuit(2, (G('CS', 0, 1),))))
    expected = np.eye(8, dtype=complex)
    expected[3, 3] = expected[7, 7] = 0
    expected[3, 7] = -1
    expected[7, 3] = 1
    assert np.allclose(cs, expected)


@pytest.mark.parametrize('gamma', [1.0, 0.7, 0.3])
def test_catalyst_success_does_not_decay(gamma):
    angle = catalyst_angle(gamma)
    catalyst = np.array([np.cos(angle / 2), np.sin(angle / 2)])
    t = np.diag([1, np.exp(1j * np.pi / 4)])
    rng = np.random.default_rng(2)
    psi = rng.normal(size=2) + 1j * rng.normal(size=2)
    psi /= np.linalg.norm(psi)
    for k in range(1, 5):
        circuit = expand_catalytic_T(LogicalCircuit(1, (G('T', 0),) * k))
        u = logical_unitary(circuit)
        kept = np.kron(H_STATE.conj(), np.eye(2)) @ u @ \
            np.kron(catalyst, psi)
        assert np.vdot(kept, kept).real == pytest.approx(gamma)
        assert np.allclose(kept, np.sqrt(gamma) *
                           np.linalg.matrix_power(t, k) @ psi)

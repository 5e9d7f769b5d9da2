"""Tests for cubesquare/simulator.py"""
import logging

import numpy as np
import pytest

from cubesquare.circuit import (
    CircuitBuilder, CircuitMetadata, OpKind, PhysicalCircuit, PhysicalOp)
from cubesquare.pauli import PauliString
from cubesquare.simulator import (
    MATRICES, NOISELESS, CapacityError, FaultLocationError,
    InvalidCircuitError, NoiseModel, SimState, execute, fault_sites,
    inject_fault, run_shot, shot_seed, site_pauli, step)


def bell_circuit():
    b = CircuitBuilder(3)
    b.add(OpKind.P0, 0)
    b.add(OpKind.P0, 1)
    b.add(OpKind.H, 0)
    b.add(OpKind.CX, 0, 1)
    a = b.measure(OpKind.MEAS_Z, 0)
    c = b.measure(OpKind.MEAS_Z, 1)
    b.detect(a, c)
    return b.build(outputs=((a,), (c,)))


def test_noise_model():
    noise = NoiseModel.from_string('0.1,0.2')
    assert (noise.p1, noise.p2, noise.p_meas, noise.p_prep) == \
        (0.1, 0.2, 0.0, 0.0)
    assert str(noise) == '0.1,0.2,0.0,0.0'
    assert NOISELESS.is_noiseless
    assert not noise.is_noiseless

    with pytest.raises(ValueError):
        NoiseModel(p1=1.5)
    with pytest.raises(ValueError):
        NoiseModel.from_string('0,0,0,0,0')


@pytest.mark.parametrize('name', ['H', 'X', 'Y', 'Z', 'S', 'Sdg', 'T', 'Tdg'])
def test_single_qubit_kernels(name):
    rng = np.random.default_rng(3)
    psi = rng.normal(size=8) + 1j * rng.normal(size=8)
    psi /= np.linalg.norm(psi)
    state = SimState.from_vector(psi)
    state.gate(name, 1)
    expected = np.kron(np.eye(2), np.kron(MATRICES[name], np.eye(2))) @ psi
    assert np.allclose(state.vector(), expected)


def test_two_qubit_kernels():
    psi = np.arange(1, 9, dtype=complex)
    state = SimState.from_vector(psi)
    state.cx(2, 0)
    # control qubit 2 flips qubit 0: swap indices 4<->5 and 6<->7
    assert np.allclose(state.vector(), [1, 2, 3, 4, 6, 5, 8, 7])
    state.cz(0, 1)
    assert np.allclose(state.vector(), [1, 2, 3, -4, 6, 5, 8, -7])


def test_lazy_activation_and_release():
    state = SimState(10)
    assert state.active == 0
    state.gate('H', 7)
    state.gate('X', 2)
    assert state.active == 2
    state.prepare(2)
    assert state.active == 1
    vector = state.vector()
    assert np.isclose(abs(vector[0]), np.sqrt(0.5))
    assert np.isclose(abs(vector[1 << 7]), np.sqrt(0.5))


def test_capacity():
    state = SimState(4, capacity=2)
    state.gate('H', 0)
    state.gate('H', 1)
    with pytest.raises(CapacityError):
        state.gate('H', 2)
    with pytest.raises(CapacityError):
        SimState.from_vector(np.ones(8) / np.sqrt(8), capacity=2)


def test_relabel_moves_content():
    state = SimState(3)
    state.gate('X', 0)
    state.relabel((0, 1, 2), (2, 0, 1))
    assert state.probability_one(2) == pytest.approx(1.0)
    assert state.probability_one(0) == 0.0


def test_rotation():
    state = SimState(1)
    state.rotate((0,), 'X', np.pi)
    assert np.allclose(state.vector(), [0, -1j])


def test_expectation_and_projector_weight():
    state = SimState(2)
    state.gate('H', 0)
    state.cx(0, 1)
    assert state.expectation(PauliString.from_str('ZZ')).real == \
        pytest.approx(1.0)
    assert state.expectation(PauliString.from_str('ZI')).real == \
        pytest.approx(0.0)
    checks = [PauliString.from_str('XX'), PauliString.from_str('ZZ')]
    assert state.projector_weight(checks) == pytest.approx(1.0)
    assert state.projector_weight(
        [PauliString.from_str('-XX')]) == pytest.approx(0.0)

    plus = SimState(2)
    plus.gate('H', 0)
    assert plus.projector_weight(
        [PauliString.from_str('ZZ')]) == pytest.approx(0.5)


def test_bell_shots_agree():
    c = bell_circuit()
    seen = set()
    for i in range(20):
        shot = run_shot(c, seed=shot_seed(11, i))
        assert not shot.discarded
        assert shot.accepted_bits[0] == shot.accepted_bits[1]
        seen.add(shot.accepted_bits)
    assert seen == {(0, 0), (1, 1)}


def test_shots_are_reproducible():
    c = bell_circuit()
    noise = NoiseModel(0.05, 0.05, 0.05, 0.05)
    first = [run_shot(c, noise, shot_seed(5, i)) for i in range(10)]
    again = [run_shot(c, noise, shot_seed(5, i)) for i in range(10)]
    assert [s.record for s in first] == [s.record for s in again]
    assert [s.faults for s in first] == [s.faults for s in again]


def test_detection_discards():
    c = inject_fault(bell_circuit(), 4, PauliString.from_str('XII'))
    shot = run_shot(c, seed=1)
    assert shot.discarded
    assert shot.accepted_bits == ()
    assert shot.faults[0].pauli == 'X'


def test_frame_tracking_matches_applied_corrections():
    def build(frame):
        b = CircuitBuilder(2, frame=frame)
        b.add(OpKind.PPLUS, 0)
        m = b.measure(OpKind.MEAS_Z, 0)
        b.add(OpKind.P0, 1)
        b.correct((1,), 'X', m)
        b.add(OpKind.H, 1)
        b.add(OpKind.H, 1)
        out = b.measure(OpKind.MEAS_Z, 1)
        return b.build(outputs=((m, out),))

    for seed in range(8):
        applied = run_shot(build(False), seed=seed)
        tracked = run_shot(build(True), seed=seed, keep_state=True)
        assert applied.record == tracked.record
        assert tracked.accepted_bits == (0,)
        if tracked.record[0]:
            assert not tracked.state.frame.is_identity


def test_fault_sites():
    b = CircuitBuilder(2)
    b.add(OpKind.P0, 0)
    b.add(OpKind.PPLUS, 1)
    b.add(OpKind.H, 0)
    b.add(OpKind.CX, 1, 0)
    b.measure(OpKind.MEAS_Z, 0)
    b.measure(OpKind.MEAS_X, 1)
    c = b.build()
    sites = fault_sites(c)
    assert len(sites) == 1 + 1 + 3 + 15 + 1 + 1
    assert sites[0].location == 1 and sites[0].pauli == 'X'
    assert sites[1].pauli == 'Z'
    assert sites[-1].location == 5 and sites[-1].pauli == 'Z'
    two = sites[5:20]
    assert all(s.location == 4 for s in two)
    assert len(two) == 15
    assert site_pauli(c, two[0]).letters == 'XI'
    assert len(fault_sites(c, 2, 3)) == 3


def test_inject_fault_bounds():
    c = bell_circuit()
    with pytest.raises(FaultLocationError):
        inject_fault(c, len(c.ops) + 1, PauliString.from_str('XII'))
    with pytest.raises(ValueError):
        inject_fault(c, 0, PauliString.from_str('X'))
    assert inject_fault(c, 0, PauliString.identity(3)) is c


def test_invalid_circuit_is_rejected():
    c = PhysicalCircuit(1, (PhysicalOp(OpKind.CX, (0, 0)),),
                        CircuitMetadata(two_qubit_gate_count=1))
    with pytest.raises(InvalidCircuitError):
        run_shot(c)


def test_measurement_noise_flips_record():
    state = SimState(1, seed=0)
    execute(state, [PhysicalOp(OpKind.P0, (0,))])
    step(state, PhysicalOp(OpKind.MEAS_Z, (0,)), NoiseModel(p_meas=1.0))
    assert state.record == [1]
    assert state.faults[0].pauli == 'flip'


def frequency(circuit, noise, outcome, shots=4000):
    hits = sum(run_shot(circuit, noise, seed).record == outcome
               for seed in range(shots))
    return hits / shots


def test_single_qubit_depolarizing_marginal():
    b = CircuitBuilder(1)
    b.add(OpKind.P0, 0)
    b.add(OpKind.Z, 0)
    b.measure(OpKind.MEAS_Z, 0)
    # X and Y flip the bit, Z does not
    assert frequency(b.build(), NoiseModel(p1=1.0), (1,)) == \
        pytest.approx(2 / 3, abs=0.04)


def test_two_qubit_depolarizing_marginal():
    b = CircuitBuilder(2)
    b.add(OpKind.P0, 0)
    b.add(OpKind.P0, 1)
    b.add(OpKind.CX, 0, 1)
    b.measure(OpKind.MEAS_Z, 0)
    b.measure(OpKind.MEAS_Z, 1)
    # only IZ, ZI and ZZ of the fifteen leave 00
    assert frequency(b.build(), NoiseModel(p2=1.0), (0, 0)) == \
        pytest.approx(3 / 15, abs=0.03)


def test_measuring_plus_in_z():
    b = CircuitBuilder(1)
    b.add(OpKind.PPLUS, 0)
    b.measure(OpKind.MEAS_Z, 0)
    assert frequency(b.build(), NOISELESS, (0,)) == \
        pytest.approx(0.5, abs=0.04)


def test_debug_trace_follows_effective_level(monkeypatch, caplog):
    traced = []
    monkeypatch.setattr('cubesquare.simulator.debug_shot',
                        lambda circuit, state: traced.append(state))
    caplog.set_level(logging.WARNING)
    caplog.set_level(logging.NOTSET, logger='cubesquare')
    run_shot(bell_circuit(), seed=1)
    assert traced == []

    caplog.set_level(logging.DEBUG, logger='cubesquare')
    run_shot(bell_circuit(), seed=1)
    assert len(traced) == 1

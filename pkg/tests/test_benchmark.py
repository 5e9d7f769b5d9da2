"""Tests for cubesquare/benchmark.py"""
from fractions import Fraction
import csv
import itertools
import json

import numpy as np
import pytest

from cubesquare import SCHEMA_RESULT
from cubesquare.benchmark import (
    BenchmarkResult, CircuitResult, MirrorSpec, NotInvertibleError, Twirl,
    UndefinedConfidenceError, a_kw, bootstrap, confidence_from_counts,
    confidence_from_histogram, estimate, invert_gate, invert_layer,
    make_mirror, measure_gates, prepare_gates, random_mirror_spec,
    sample_twirled_weights, twirl_layer, twirled_circuit, write_histogram_csv,
    write_result)
from cubesquare.circuit import (
    MEASUREMENTS, PREPARATIONS, GateKind, LogicalCircuit, LogicalGate)
from cubesquare.compiler import compile_circuit, logical_unitary
from cubesquare.simulator import NoiseModel


def G(kind, *qubits):
    return LogicalGate(kind, qubits)


def z_twirls(w, rng):
    return Twirl(('Z',) * w, tuple(int(b) for b in rng.integers(2, size=w)))


@pytest.fixture
def plain_twirls(monkeypatch):
    """Z-basis twirls only, keeping the phase reference idle"""
    monkeypatch.setattr('cubesquare.benchmark.twirl_layer', z_twirls)


@pytest.fixture
def results():
    return [
        CircuitResult(0, 2, 4, 0, shots=10, accepted=8, counts=[6, 2, 0],
                      error_free=6.0),
        CircuitResult(1, 2, 4, 4, shots=10, accepted=0, counts=[0, 0, 0]),
    ]


def test_a_kw():
    assert a_kw(1, 1) == Fraction(2, 3)
    assert a_kw(2, 3) == Fraction(4, 9)
    assert sum(a_kw(k, 4) for k in range(5)) == 1

    with pytest.raises(ValueError):
        a_kw(3, 2)


def test_confidence_from_histogram():
    assert confidence_from_histogram([0.5, 0.5]) == pytest.approx(0.25)
    assert isinstance(confidence_from_histogram([0.5, 0.5]), float)
    assert confidence_from_histogram([1]) == 1
    # a twirled error of any weight averages to zero
    for weight in range(1, 5):
        assert confidence_from_histogram(
            [a_kw(k, weight) for k in range(weight + 1)]) == 0

    with pytest.raises(ValueError):
        confidence_from_histogram([0.5, 0.2])


def test_confidence_from_counts():
    assert confidence_from_counts([6, 2, 0]) == pytest.approx(0.625)

    with pytest.raises(UndefinedConfidenceError):
        confidence_from_counts([0, 0])


def test_sample_twirled_weights():
    rng = np.random.default_rng(2)
    clean = sample_twirled_weights(2, 0.0, 50, rng)
    assert clean.tolist() == [50, 0, 0]

    counts = sample_twirled_weights(1, 1.0, 3000, rng, width=2)
    assert counts[2] == 0
    assert counts[1] / 3000 == pytest.approx(2 / 3, abs=0.05)

    with pytest.raises(ValueError):
        sample_twirled_weights(3, 0.5, 1, rng, width=2)


@pytest.mark.parametrize('weight, probability', [(3, 1.0), (2, 0.4)])
def test_twirled_weights_follow_a_kw(weight, probability):
    shots = 20000
    counts = sample_twirled_weights(weight, probability, shots,
                                    np.random.default_rng(weight))
    expected = [probability * float(a_kw(k, weight))
                for k in range(weight + 1)]
    expected[0] += 1 - probability
    assert (counts / shots).tolist() == pytest.approx(expected, abs=0.015)
    assert confidence_from_counts(counts.tolist()) == \
        pytest.approx(1 - probability, abs=0.03)


@pytest.mark.parametrize('basis', ['X', 'Y', 'Z'])
@pytest.mark.parametrize('sign', [0, 1])
def test_twirl_preparation_and_readout(basis, sign):
    twirl = Twirl((basis,), (sign,))
    gates = prepare_gates(twirl) + measure_gates(twirl)
    assert gates[0].kind in PREPARATIONS
    assert gates[-1].kind in MEASUREMENTS
    middle = LogicalCircuit(1, tuple(gates[1:-1]))
    start = np.array([1, 0]) if basis == 'Z' else np.array([1, 1]) / np.sqrt(2)
    final = logical_unitary(middle) @ start
    # the ideal readout equals the sign bit
    if basis == 'Z':
        assert abs(final[sign]) == pytest.approx(1.0)
    else:
        expected = np.array([1, -1 if sign else 1]) / np.sqrt(2)
        assert abs(np.vdot(expected, final)) == pytest.approx(1.0)


def test_twirl_validation():
    layer = twirl_layer(5, np.random.default_rng(0))
    assert len(layer.bases) == len(layer.signs) == 5
    assert set(layer.signs) <= {0, 1}

    with pytest.raises(ValueError):
        Twirl(('X', 'W'), (0, 1))
    with pytest.raises(ValueError):
        Twirl(('X',), (0, 1))


def test_inverses():
    for gate in [G('S', 0), G('CS', 0, 1), G('T', 1), G('CCZ', 0, 1, 2),
                 G('H', 2)]:
        forward = LogicalCircuit(3, (gate,))
        backward = LogicalCircuit(3, tuple(invert_gate(gate)))
        assert np.allclose(
            logical_unitary(backward) @ logical_unitary(forward), np.eye(8))

    layer = [G('H', 0), G('S', 0), G('CX', 0, 1)]
    both = LogicalCircuit(2, tuple(layer + invert_layer(layer)))
    assert np.allclose(logical_unitary(both), np.eye(4))

    with pytest.raises(NotInvertibleError):
        invert_gate(G('MeasZ', 0))


def test_mirror_spec():
    spec = MirrorSpec(2, 4, 0, [[G('S', 0), G('CX', 0, 1)], [G('T', 1)]])
    mirror = make_mirror(spec)
    assert len(mirror.gates) == 3 + 3 + 3
    assert np.allclose(logical_unitary(mirror), np.eye(4))

    with pytest.raises(ValueError):
        MirrorSpec(2, 3, 0, [[G('X', 0)]])
    with pytest.raises(ValueError):
        MirrorSpec(2, 4, 0, [[G('X', 0)]])


def test_random_mirror_spec():
    spec = random_mirror_spec(4, 6, 8, seed=3)
    assert spec == random_mirror_spec(4, 6, 8, seed=3)
    assert len(spec.layers) == 3
    assert sum(1 for layer in spec.layers
               if any(g.kind is GateKind.H for g in layer)) == 2
    for layer in spec.layers:
        assert sorted(q for g in layer for q in g.qubits) == [0, 1, 2, 3]
        for g in layer:
            assert len({q // 3 for q in g.qubits}) == 1
    assert np.allclose(logical_unitary(make_mirror(spec)), np.eye(16))

    for bad in [(0, 2, 0), (2, 3, 0), (2, 4, 3), (2, 2, 8)]:
        with pytest.raises(ValueError):
            random_mirror_spec(*bad)


def test_twirled_circuit_hardness():
    spec = random_mirror_spec(2, 2, 4, seed=5)
    twirl = Twirl(('Z', 'Z'), (1, 0))
    circuit = twirled_circuit(spec, twirl)
    assert circuit.count(GateKind.PREP_Z) == 2
    assert circuit.count(GateKind.MEAS_Z) == 2
    assert circuit.count(GateKind.H) == 2
    assert compile_circuit(circuit).metadata.hardness == 4


def test_result_summary(results):
    result = BenchmarkResult(results, seed=9)
    assert result.shots == 20
    assert result.accepted == 8
    assert result.yield_ == pytest.approx(0.4)
    assert result.confidence == pytest.approx(0.625)
    assert not result.undefined_confidence
    assert result.histogram == pytest.approx([0.75, 0.25, 0.0])
    assert result.aggregate() == {(2, 4, 0): pytest.approx(0.625)}
    assert result.oracle_confidence is None

    data = result.as_dict()
    assert data['schema'] == SCHEMA_RESULT
    assert data['N_det'] == 12
    assert data['N0'] is None
    assert data['circuits'][1]['S'] is None

    oracle = BenchmarkResult(results, oracle=True)
    assert oracle.oracle_confidence == pytest.approx(0.75)
    data = oracle.as_dict()
    assert data['p0'] + data['p_det'] + data['p_und'] == pytest.approx(1.0)

    empty = BenchmarkResult([results[1]])
    assert empty.undefined_confidence
    assert empty.as_dict()['confidence'] is None


def test_bootstrap(results):
    interval, direct = bootstrap(results, 200, seed=1)
    low, high = interval
    assert low <= 0.625 <= high
    assert direct is None
    interval, direct = bootstrap(results, 200, seed=1, oracle=True)
    assert direct[0] <= 0.75 <= direct[1]

    assert bootstrap([], 200, 1) == (None, None)
    assert bootstrap(results, 0, 1) == (None, None)


def test_write_result(tmp_path, results):
    result = BenchmarkResult(results)
    path = tmp_path / 'result.json'
    write_result(str(path), result)
    data = json.loads(path.read_text())
    assert data['shots'] == 20
    assert data['aggregate'] == [{'w': 2, 'd': 4, 'eta': 0, 'C': 0.625}]

    path = tmp_path / 'histogram.csv'
    write_histogram_csv(str(path), result)
    rows = list(csv.reader(path.read_text().splitlines()))
    assert rows[0] == ['circuit', 'w', 'd', 'eta', 'shots', 'accepted',
                       'h0', 'h1', 'h2', 'S']
    assert rows[1][:9] == ['0', '2', '4', '0', '10', '8', '6', '2', '0']
    assert rows[2][-1] == ''


def test_noiseless_estimate(plain_twirls):
    specs = [random_mirror_spec(1, 2, seed=s) for s in range(2)]
    result = estimate(specs, 3, seed=4, oracle=True, resamples=20)
    assert result.shots == 6
    assert result.yield_ == 1.0
    assert result.confidence == 1.0
    assert result.oracle_confidence == 1.0
    assert result.confidence_interval == (1.0, 1.0)
    assert all(c.counts == [3, 0] for c in result.circuits)


def test_noisy_estimate_accounts_for_every_shot(plain_twirls):
    noise = NoiseModel(0.01, 0.02, 0.01, 0.01)
    spec = random_mirror_spec(1, 2, seed=1)
    result = estimate([spec], 4, noise, seed=2, oracle=True, resamples=10)
    data = result.as_dict()
    assert data['N0'] + data['N_und'] + data['N_det'] == pytest.approx(4)
    assert 0.0 <= data['yield'] <= 1.0
    again = estimate([spec], 4, noise, seed=2, oracle=True, resamples=10)
    assert again.circuits[0].counts == result.circuits[0].counts


@pytest.mark.slow
def test_estimate_with_full_twirls():
    spec = random_mirror_spec(1, 2, seed=0)
    result = estimate([spec], 2, seed=8, resamples=0)
    assert result.yield_ == 1.0
    assert result.confidence == 1.0
    assert result.confidence_interval is None


@pytest.mark.slow
def test_results_follow_compiled_hardness(monkeypatch):
    bases = itertools.cycle('YZ')
    monkeypatch.setattr(
        'cubesquare.benchmark.twirl_layer',
        lambda w, rng: Twirl((next(bases),) * w, (0,) * w))
    spec = random_mirror_spec(1, 2, seed=0)
    y_eta = compile_circuit(
        twirled_circuit(spec, Twirl(('Y',), (0,)))).metadata.hardness
    assert y_eta > spec.hardness == 0

    result = estimate([spec], 4, seed=3, resamples=0)
    assert [(c.index, c.hardness, c.shots) for c in result.circuits] == \
        [(0, 0, 2), (0, y_eta, 2)]
    assert result.shots == 4
    assert result.aggregate() == {(1, 2, 0): 1.0, (1, 2, y_eta): 1.0}


@pytest.mark.slow
def test_noiseless_cx_cz_mirrors():
    specs = [MirrorSpec(2, 2, 0, [[G('CX', 0, 1)]]),
             MirrorSpec(2, 4, 0, [[G('CZ', 0, 1)], [G('CX', 1, 0)]])]
    result = estimate(specs, 50, seed=12, resamples=0)
    assert result.shots == 100
    assert result.yield_ == 1.0
    assert result.confidence == 1.0
    for circuit in result.circuits:
        assert circuit.counts[1:] == [0, 0]
        assert circuit.counts[0] == circuit.accepted == circuit.shots

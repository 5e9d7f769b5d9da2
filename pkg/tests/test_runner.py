"""Tests for cubesquare/runner.py"""
import json

import pytest

from cubesquare.circuit import (
    CircuitBuilder, CircuitMetadata, OpKind, PhysicalCircuit, PhysicalOp)
from cubesquare.runner import (
    SHOTS_ACCEPTED, ShotRunner, gather_tasks, resolve_workers, write_metrics,
    write_records)
from cubesquare.simulator import InvalidCircuitError, NoiseModel


def coin():
    b = CircuitBuilder(1)
    b.add(OpKind.PPLUS, 0)
    m = b.measure(OpKind.MEAS_Z, 0)
    return b.build(outputs=((m,),))


def square(x):
    return x * x


def test_resolve_workers():
    assert resolve_workers(3) == 3
    assert resolve_workers(0) >= 1


def test_gather_tasks_keeps_order():
    assert gather_tasks(square, [3, 1, 2]) == [9, 1, 4]
    assert gather_tasks(square, [3, 1, 2], workers=2) == [9, 1, 4]


def test_shot_runner():
    before = SHOTS_ACCEPTED._value.get()
    records = ShotRunner(coin(), shots=20, seed=5).run()
    assert len(records) == 20
    assert {r.accepted_bits for r in records} == {(0,), (1,)}
    assert SHOTS_ACCEPTED._value.get() == before + 20
    again = ShotRunner(coin(), shots=20, seed=5).run()
    assert [r.record for r in again] == [r.record for r in records]


def test_shot_runner_rejects_bad_input():
    broken = PhysicalCircuit(1, (PhysicalOp(OpKind.CX, (0, 0)),),
                             CircuitMetadata(two_qubit_gate_count=1))
    with pytest.raises(InvalidCircuitError):
        ShotRunner(broken)
    with pytest.raises(ValueError):
        ShotRunner(coin(), shots=0)


def test_write_records(tmp_path):
    records = ShotRunner(coin(), NoiseModel(p_meas=1.0), shots=3).run()
    path = tmp_path / 'records.jsonl'
    write_records(str(path), records)
    lines = [json.loads(line) for line in path.read_text().splitlines()]
    assert [line['shot'] for line in lines] == [0, 1, 2]
    assert all(line['faults'][0]['pauli'] == 'flip' for line in lines)


def test_write_metrics(tmp_path):
    path = tmp_path / 'metrics.prom'
    write_metrics(str(path))
    text = path.read_text()
    assert 'cubesquare_shots_accepted_total' in text
    assert 'cubesquare_yield' in text
    write_metrics(None)

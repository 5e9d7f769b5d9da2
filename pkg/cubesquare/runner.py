from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, Optional, Sequence, Tuple
import asyncio
import json
import os
import time

from prometheus_client import (
    CollectorRegistry, Counter, Gauge, Summary, write_to_textfile)

from . import logger, DEFAULT_CAPACITY
from .circuit import PhysicalCircuit, validate
from .simulator import (
    InvalidCircuitError, NoiseModel, NOISELESS, ShotRecord, run_shot,
    shot_seed)


# Private registry, written out with --metrics-file
REGISTRY = CollectorRegistry()

SHOT_TIME = Summary(
    'cubesquare_shot_seconds',
    'Time spent simulating one shot', registry=REGISTRY)
SHOTS_ACCEPTED = Counter(
    'cubesquare_shots_accepted',
    'Shots that passed every detection event', registry=REGISTRY)
SHOTS_DISCARDED = Counter(
    'cubesquare_shots_discarded',
    'Shots discarded by a detection event', registry=REGISTRY)
YIELD = Gauge(
    'cubesquare_yield',
    'Fraction of shots accepted in the last run', registry=REGISTRY)
CONFIDENCE = Gauge(
    'cubesquare_confidence',
    'Estimated probability that an accepted shot is error free',
    registry=REGISTRY)
HARDNESS = Gauge(
    'cubesquare_hardness',
    'Teleportations in the last compiled circuit', registry=REGISTRY)


def _timed(fn: Callable, task) -> Tuple[float, object]:
    start = time.perf_counter()
    result = fn(task)
    return time.perf_counter() - start, result


def resolve_workers(workers: int) -> int:
    return workers if workers > 0 else os.cpu_count() or 1


async def _gather(fn: Callable, tasks: Sequence, workers: int) -> List:
    if workers == 1:
        return [_timed(fn, task) for task in tasks]
    loop = asyncio.get_running_loop()
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return await asyncio.gather(
            *[loop.run_in_executor(pool, _timed, fn, task)
              for task in tasks])


def gather_tasks(fn: Callable, tasks: Iterable, workers: int = 1) -> List:
    """Run fn over tasks, in-process or on a process pool, keeping task
    order. fn must be a module-level function."""
    workers = resolve_workers(workers)
    timed = asyncio.run(_gather(fn, list(tasks), workers))
    for seconds, _ in timed:
        SHOT_TIME.observe(seconds)
    return [result for _, result in timed]


def record_outcomes(accepted: int, discarded: int):
    SHOTS_ACCEPTED.inc(accepted)
    SHOTS_DISCARDED.inc(discarded)
    total = accepted + discarded
    if total:
        YIELD.set(accepted / total)


def _shot(task) -> ShotRecord:
    circuit, noise, seed, capacity = task
    return run_shot(circuit, noise, seed, capacity, check=False)


class ShotRunner:
    def __init__(self, circuit: PhysicalCircuit,
                 noise: NoiseModel = NOISELESS, shots: int = 1,
                 seed: int = 0, capacity: int = DEFAULT_CAPACITY,
                 workers: int = 1) -> None:
        violations = validate(circuit)
        if violations:
            raise InvalidCircuitError(violations)
        if shots < 1:
            raise ValueError(f'shots must be positive, got {shots}')
        self.circuit = circuit
        self.noise = noise
        self.shots = shots
        self.seed = seed
        self.capacity = capacity
        self.workers = resolve_workers(workers)

    async def _run(self) -> List:
        tasks = [(self.circuit, self.noise, shot_seed(self.seed, i),
                  self.capacity) for i in range(self.shots)]
        return await _gather(_shot, tasks, self.workers)

    def run(self) -> List[ShotRecord]:
        start = time.time()
        timed = asyncio.run(self._run())
        for seconds, _ in timed:
            SHOT_TIME.observe(seconds)
        records = [record for _, record in timed]
        accepted = sum(1 for r in records if not r.discarded)
        record_outcomes(accepted, len(records) - accepted)
        HARDNESS.set(self.circuit.metadata.hardness)
        logger.info(
            f'Simulated {self.shots} shot{"s"[:self.shots ^ 1]} on '
            f'{self.workers} worker{"s"[:self.workers ^ 1]}: {accepted} '
            f'accepted in {time.time() - start:.2f}s')
        return records


def write_records(path: str, records: Sequence[ShotRecord]):
    """One JSON object per shot"""
    with open(path, 'w') as f:
        for index, record in enumerate(records):
            f.write(json.dumps({
                'shot': index,
                'discarded': record.discarded,
                'record': list(record.record),
                'accepted_bits': list(record.accepted_bits),
                'faults': [
                    {'location': e.location, 'qubits': list(e.qubits),
                     'pauli': e.pauli} for e in record.faults],
            }, sort_keys=True) + '\n')


def write_metrics(path: Optional[str]):
    if path:
        write_to_textfile(path, REGISTRY)
        logger.info(f'Wrote metrics to {path}')


__all__ = [
    ShotRunner, gather_tasks, record_outcomes, write_records, write_metrics,
    resolve_workers, REGISTRY, SHOT_TIME, SHOTS_ACCEPTED, SHOTS_DISCARDED,
    YIELD, CONFIDENCE, HARDNESS]

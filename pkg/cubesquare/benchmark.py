from __future__ import annotations
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple
import csv
import json

import numpy as np

from . import logger, DEFAULT_CAPACITY, SCHEMA_RESULT
from .circuit import GateKind, LogicalCircuit, LogicalGate, PhysicalCircuit
from .compiler import ScheduleOptions, compile_circuit
from .pauli import PauliString
from .runner import CONFIDENCE, gather_tasks, record_outcomes
from .simulator import NoiseModel, NOISELESS, SimState, run_shot


class UndefinedConfidenceError(Exception):
    def __init__(self, what: str):
        message = f'Confidence of {what} is undefined: no accepted shots'
        super().__init__(message)


class NotInvertibleError(Exception):
    def __init__(self, gate: LogicalGate):
        message = f'{gate} has no inverse in the logical gate set'
        super().__init__(message)


BASES = ('X', 'Y', 'Z')


@dataclass(frozen=True)
class Twirl:
    """Per-qubit preparation basis and sign bit"""
    bases: Tuple[str, ...]
    signs: Tuple[int, ...]

    def __post_init__(self):
        super().__setattr__('bases', tuple(self.bases))
        super().__setattr__('signs', tuple(int(b) for b in self.signs))
        if len(self.bases) != len(self.signs):
            raise ValueError('bases and signs differ in length')
        for basis in self.bases:
            if basis not in BASES:
                raise ValueError(f'unknown twirl basis {basis!r}')


def twirl_layer(w: int, rng: np.random.Generator) -> Twirl:
    return Twirl(tuple(BASES[i] for i in rng.integers(3, size=w)),
                 tuple(int(b) for b in rng.integers(2, size=w)))


def prepare_gates(twirl: Twirl) -> List[LogicalGate]:
    gates = []
    for q, (basis, sign) in enumerate(zip(twirl.bases, twirl.signs)):
        if basis == 'Z':
            gates.append(LogicalGate(GateKind.PREP_Z, (q,)))
            if sign:
                gates.append(LogicalGate(GateKind.X, (q,)))
        else:
            gates.append(LogicalGate(GateKind.PREP_X, (q,)))
            if sign:
                gates.append(LogicalGate(GateKind.Z, (q,)))
            if basis == 'Y':
                gates.append(LogicalGate(GateKind.S, (q,)))
    return gates


def measure_gates(twirl: Twirl) -> List[LogicalGate]:
    gates = []
    for q, basis in enumerate(twirl.bases):
        if basis == 'Z':
            gates.append(LogicalGate(GateKind.MEAS_Z, (q,)))
            continue
        if basis == 'Y':
            gates += [LogicalGate(GateKind.Z, (q,)),
                      LogicalGate(GateKind.S, (q,))]
        gates.append(LogicalGate(GateKind.MEAS_X, (q,)))
    return gates


def readout_basis(basis: str) -> str:
    return 'Z' if basis == 'Z' else 'X'


SELF_INVERSE = (GateKind.X, GateKind.Z, GateKind.H, GateKind.CX, GateKind.CZ,
                GateKind.CCZ, GateKind.SWAP)


def invert_gate(gate: LogicalGate) -> List[LogicalGate]:
    if gate.kind in SELF_INVERSE:
        return [gate]
    if gate.kind is GateKind.S:
        return [LogicalGate(GateKind.Z, gate.qubits), gate]
    if gate.kind is GateKind.CS:
        return [LogicalGate(GateKind.CZ, gate.qubits), gate]
    if gate.kind is GateKind.T:
        return [gate, LogicalGate(GateKind.Z, gate.qubits),
                LogicalGate(GateKind.S, gate.qubits)]
    raise NotInvertibleError(gate)


def invert_layer(layer: Sequence[LogicalGate]) -> List[LogicalGate]:
    return [g for gate in reversed(layer) for g in invert_gate(gate)]


@dataclass(frozen=True)
class MirrorSpec:
    width: int
    depth: int
    hardness: int
    layers: Tuple[Tuple[LogicalGate, ...], ...]
    seed: Optional[int] = None

    def __post_init__(self):
        super().__setattr__(
            'layers', tuple(tuple(layer) for layer in self.layers))
        if self.depth % 2:
            raise ValueError(f'mirror depth must be even, got {self.depth}')
        if len(self.layers) != self.depth // 2:
            raise ValueError(f'depth {self.depth} needs {self.depth // 2} '
                             f'layers, got {len(self.layers)}')


def make_mirror(spec: MirrorSpec) -> LogicalCircuit:
    gates = [gate for layer in spec.layers for gate in layer]
    for layer in reversed(spec.layers):
        gates += invert_layer(layer)
    return LogicalCircuit(spec.width, tuple(gates))


def _random_layer(width: int, hadamard: bool,
                  rng: np.random.Generator) -> Tuple[LogicalGate, ...]:
    """Gates covering every qubit once; multi-qubit gates stay inside a
    group of three consecutive qubits. An optional H comes first."""
    gates, rest = [], []
    skip = None
    if hadamard:
        skip = int(rng.integers(width))
        gates.append(LogicalGate(GateKind.H, (skip,)))
    for start in range(0, width, 3):
        group = [q for q in range(start, min(start + 3, width)) if q != skip]
        group = [group[i] for i in rng.permutation(len(group))]
        while group:
            size = int(rng.integers(1, len(group) + 1))
            operands, group = tuple(group[:size]), group[size:]
            if size == 3:
                rest.append(LogicalGate(GateKind.CCZ, operands))
            elif size == 2:
                kind = (GateKind.CX, GateKind.CZ)[rng.integers(2)]
                rest.append(LogicalGate(kind, operands))
            else:
                kind = (GateKind.X, GateKind.Z)[rng.integers(2)]
                rest.append(LogicalGate(kind, operands))
    return tuple(gates + rest)


def random_mirror_spec(width: int, depth: int, hardness: int = 0,
                       seed: Optional[int] = None) -> MirrorSpec:
    """Each H in the forward half costs four teleportations once the
    mirror is compiled, so hardness must be a multiple of four with at
    most one H per layer"""
    if width < 1:
        raise ValueError(f'width must be positive, got {width}')
    if depth % 2:
        raise ValueError(f'mirror depth must be even, got {depth}')
    if hardness % 4 or hardness // 4 > depth // 2:
        raise ValueError(
            f'hardness {hardness} is not reachable at depth {depth}')
    rng = np.random.default_rng(seed)
    n_layers = depth // 2
    with_h = set(rng.choice(n_layers, size=hardness // 4, replace=False)
                 .tolist()) if hardness else set()
    layers = tuple(_random_layer(width, i in with_h, rng)
                   for i in range(n_layers))
    return MirrorSpec(width, depth, hardness, layers, seed)


def twirled_circuit(spec: MirrorSpec, twirl: Twirl) -> LogicalCircuit:
    mirror = make_mirror(spec)
    gates = prepare_gates(twirl) + list(mirror.gates) + measure_gates(twirl)
    return LogicalCircuit(spec.width, tuple(gates))


def a_kw(k: int, weight: int) -> Fraction:
    """Probability that a twirled weight-W Pauli error flips k bits"""
    if weight < 0 or not 0 <= k <= weight:
        raise ValueError(f'need 0 <= k <= W, got k={k}, W={weight}')
    return Fraction(comb(weight, k) * 2 ** k, 3 ** weight)


def confidence_from_histogram(h: Sequence) -> float:
    """S = sum_k (-1/2)^k h_k over a normalized Hamming histogram"""
    total = sum(h)
    if abs(total - 1) > 1e-9:
        raise ValueError(f'histogram sums to {float(total)}, not 1')
    return float(sum(Fraction(-1, 2) ** k * v for k, v in enumerate(h)))


def confidence_from_counts(counts: Sequence[int]) -> float:
    total = sum(counts)
    if not total:
        raise UndefinedConfidenceError('an empty histogram')
    return confidence_from_histogram([c / total for c in counts])


def sample_twirled_weights(weight: int, probability: float, shots: int,
                           rng: np.random.Generator,
                           width: Optional[int] = None) -> np.ndarray:
    """Hamming-distance counts when, with the given probability, a random
    weight-W Pauli error hits qubits measured in random Pauli bases"""
    width = weight if width is None else width
    if weight > width:
        raise ValueError(f'weight {weight} exceeds width {width}')
    counts = np.zeros(width + 1, dtype=int)
    for _ in range(shots):
        flips = 0
        if rng.random() < probability:
            errors = rng.integers(1, 4, size=weight)
            bases = rng.integers(1, 4, size=weight)
            flips = int(np.sum(errors != bases))
        counts[flips] += 1
    return counts


@dataclass
class CircuitResult:
    index: int
    width: int
    depth: int
    hardness: int
    shots: int = 0
    accepted: int = 0
    counts: List[int] = field(default_factory=list)
    error_free: float = 0.0

    @property
    def discarded(self) -> int:
        return self.shots - self.accepted

    @property
    def s_value(self) -> Optional[float]:
        if not self.accepted:
            return None
        return confidence_from_counts(self.counts)

    def as_dict(self) -> dict:
        return {
            'index': self.index, 'w': self.width, 'd': self.depth,
            'eta': self.hardness, 'shots': self.shots,
            'accepted': self.accepted, 'histogram': list(self.counts),
            'S': self.s_value, 'error_free': self.error_free}


@dataclass
class BenchmarkResult:
    circuits: List[CircuitResult]
    noise: NoiseModel = NOISELESS
    seed: int = 0
    oracle: bool = False
    confidence_interval: Optional[Tuple[float, float]] = None
    oracle_interval: Optional[Tuple[float, float]] = None

    @property
    def shots(self) -> int:
        return sum(c.shots for c in self.circuits)

    @property
    def accepted(self) -> int:
        return sum(c.accepted for c in self.circuits)

    @property
    def yield_(self) -> float:
        return self.accepted / self.shots if self.shots else 0.0

    @property
    def confidence(self) -> Optional[float]:
        values = [c.s_value for c in self.circuits if c.accepted]
        return float(np.mean(values)) if values else None

    @property
    def undefined_confidence(self) -> bool:
        return self.confidence is None

    @property
    def histogram(self) -> List[float]:
        """Pooled Hamming histogram over accepted shots"""
        width = max((len(c.counts) for c in self.circuits), default=0)
        totals = np.zeros(width)
        for c in self.circuits:
            totals[:len(c.counts)] += c.counts
        return (totals / totals.sum()).tolist() if totals.sum() else []

    @property
    def n0(self) -> float:
        return sum(c.error_free for c in self.circuits)

    @property
    def n_undetected(self) -> float:
        return self.accepted - self.n0

    @property
    def n_detected(self) -> int:
        return self.shots - self.accepted

    @property
    def oracle_confidence(self) -> Optional[float]:
        if not self.oracle or not self.accepted:
            return None
        return self.n0 / (self.n0 + self.n_undetected)

    def aggregate(self) -> Dict[Tuple[int, int, int], float]:
        """Mean S over circuits sharing (w, d, eta)"""
        groups: Dict[Tuple[int, int, int], List[float]] = {}
        for c in self.circuits:
            if c.accepted:
                key = (c.width, c.depth, c.hardness)
                groups.setdefault(key, []).append(c.s_value)
        return {key: float(np.mean(v)) for key, v in sorted(groups.items())}

    def as_dict(self) -> dict:
        shots = self.shots or 1
        return {
            'schema': SCHEMA_RESULT,
            'created': datetime.now(timezone.utc).isoformat(),
            'noise': str(self.noise),
            'seed': self.seed,
            'oracle_mode': self.oracle,
            'shots': self.shots,
            'N0': self.n0 if self.oracle else None,
            'N_det': self.n_detected,
            'N_und': self.n_undetected if self.oracle else None,
            'p0': self.n0 / shots if self.oracle else None,
            'p_det': self.n_detected / shots,
            'p_und': self.n_undetected / shots if self.oracle else None,
            'yield': self.yield_,
            'confidence': self.confidence,
            'confidence_interval': self.confidence_interval,
            'undefined_confidence': self.undefined_confidence,
            'oracle_confidence': self.oracle_confidence,
            'oracle_interval': self.oracle_interval,
            'histogram': self.histogram,
            'aggregate': [
                {'w': w, 'd': d, 'eta': eta, 'C': value}
                for (w, d, eta), value in self.aggregate().items()],
            'circuits': [c.as_dict() for c in self.circuits],
        }


def oracle_checks(circuit: PhysicalCircuit, twirl: Twirl
                  ) -> Tuple[List[PauliString], List[PauliString]]:
    """Code-space generators and the signed logical operators the ideal
    pre-readout state stabilizes"""
    meta = circuit.metadata
    code = [PauliString.from_str(s) for s in meta.stabilizers]
    logical = []
    for q, (basis, sign) in enumerate(zip(twirl.bases, twirl.signs)):
        table = meta.logical_z if readout_basis(basis) == 'Z' \
            else meta.logical_x
        p = PauliString.from_str(table[q])
        logical.append(-p if sign else p)
    return code, logical


def error_free_weight(state: SimState, code: Sequence[PauliString],
                      logical: Sequence[PauliString]) -> Optional[float]:
    """Weight of the ideal logical state inside the code space, or None
    when the state has left the code space"""
    if not state.faults:
        return 1.0
    if not state.frame.is_identity:
        state = state.copy()
        state.flush_frame()
    in_code = state.projector_weight(code)
    if in_code < 1e-12:
        return None
    return state.projector_weight(list(code) + list(logical)) / in_code


def _bench_shot(task) -> Tuple[bool, int, Optional[float]]:
    circuit, twirl, noise, seed, capacity, oracle = task
    weights = []
    hook = None
    if oracle:
        code, logical = oracle_checks(circuit, twirl)

        def weigh(state):
            weights.append(error_free_weight(state, code, logical))
        hook = weigh
    shot = run_shot(circuit, noise, seed, capacity, checkpoint=hook,
                    check=False)
    if shot.discarded:
        return False, 0, None
    distance = sum(int(a != b) for a, b in zip(shot.accepted_bits,
                                               twirl.signs))
    weight = None
    if oracle:
        weight = weights[0] if weights and weights[0] is not None \
            else float(distance == 0)
    return True, distance, weight


def bootstrap(circuits: Sequence[CircuitResult], resamples: int,
              seed: int, oracle: bool = False
              ) -> Tuple[Optional[Tuple[float, float]],
                         Optional[Tuple[float, float]]]:
    """95% percentile intervals of the mean S and of the direct count,
    resampling circuits and then shots within each circuit"""
    usable = [c for c in circuits if c.shots]
    if not usable or not resamples:
        return None, None
    rng = np.random.default_rng(seed)
    estimates, direct = [], []
    for _ in range(resamples):
        chosen = rng.integers(len(usable), size=len(usable))
        values, n0, accepted = [], 0.0, 0
        for i in chosen:
            c = usable[i]
            weights = np.array([c.discarded] + list(c.counts), dtype=float)
            drawn = rng.multinomial(c.shots, weights / weights.sum())
            if drawn[1:].sum():
                values.append(confidence_from_counts(drawn[1:].tolist()))
            if oracle and c.accepted:
                share = rng.binomial(c.shots, c.accepted / c.shots)
                accepted += share
                n0 += rng.binomial(share, c.error_free / c.accepted) \
                    if share else 0
        if values:
            estimates.append(np.mean(values))
        if oracle and accepted:
            direct.append(n0 / accepted)

    def interval(samples):
        if not samples:
            return None
        low, high = np.percentile(samples, [2.5, 97.5])
        return float(low), float(high)
    return interval(estimates), interval(direct) if oracle else None


def estimate(specs: Sequence[MirrorSpec], shots: int,
             noise: NoiseModel = NOISELESS, seed: int = 0,
             strategy: str = 'sequential',
             options: ScheduleOptions = ScheduleOptions(),
             oracle: bool = False, resamples: int = 1000,
             resample_seed: int = 0, workers: int = 1,
             capacity: int = DEFAULT_CAPACITY) -> BenchmarkResult:
    """Mirror-circuit estimate of yield and confidence.

    Every shot draws a fresh twirl from its own seed, runs with detection
    and records the Hamming distance of the accepted bits to the twirl's
    sign bits. Compiled circuits are cached per twirl.

    Y-basis twirls add rotation-block visits, so one spec may run at
    several hardnesses. Shots are grouped into one CircuitResult per
    compiled hardness.
    """
    results = []
    for index, spec in enumerate(specs):
        compiled: Dict[Twirl, PhysicalCircuit] = {}
        tasks = []
        for shot in range(shots):
            sequence = np.random.SeedSequence(seed, spawn_key=(index, shot))
            twirl_seed, sim_seed = sequence.spawn(2)
            twirl = twirl_layer(spec.width, np.random.default_rng(twirl_seed))
            if twirl not in compiled:
                compiled[twirl] = compile_circuit(
                    twirled_circuit(spec, twirl), strategy, options,
                    capacity)
            tasks.append((compiled[twirl], twirl, noise, sim_seed, capacity,
                          oracle))
        outcomes = gather_tasks(_bench_shot, tasks, workers)
        groups: Dict[int, CircuitResult] = {}
        for task, (accepted, distance, weight) in zip(tasks, outcomes):
            eta = task[0].metadata.hardness
            if eta not in groups:
                groups[eta] = CircuitResult(
                    index, spec.width, spec.depth, eta,
                    counts=[0] * (spec.width + 1))
            result = groups[eta]
            result.shots += 1
            if not accepted:
                continue
            result.accepted += 1
            result.counts[distance] += 1
            if weight is not None:
                result.error_free += weight
        if set(groups) != {spec.hardness}:
            logger.info(f'circuit {index}: declared hardness '
                        f'{spec.hardness}, compiled {sorted(groups)}')
        for eta in sorted(groups):
            result = groups[eta]
            record_outcomes(result.accepted, result.discarded)
            logger.debug(f'circuit {index} at eta {eta}: {result.accepted}/'
                         f'{result.shots} accepted, S={result.s_value}')
            results.append(result)
        logger.debug(f'circuit {index}: {len(compiled)} distinct twirl'
                     f'{"s"[:len(compiled) ^ 1]}')

    benchmark = BenchmarkResult(results, noise, seed, oracle)
    benchmark.confidence_interval, benchmark.oracle_interval = bootstrap(
        results, resamples, resample_seed, oracle)
    if benchmark.undefined_confidence:
        logger.warning('No shot was accepted, confidence is undefined')
    else:
        CONFIDENCE.set(benchmark.confidence)
    logger.info(f'Benchmark of {len(specs)} circuit{"s"[:len(specs) ^ 1]}: '
                f'yield {benchmark.yield_:.4f}, confidence '
                f'{benchmark.confidence}')
    return benchmark


def write_result(path: str, result: BenchmarkResult):
    with open(path, 'w') as f:
        json.dump(result.as_dict(), f, indent=2, sort_keys=True)
        f.write('\n')


def write_histogram_csv(path: str, result: BenchmarkResult):
    """One row per circuit: parameters, counts per Hamming distance and S"""
    width = max((len(c.counts) for c in result.circuits), default=0)
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(['circuit', 'w', 'd', 'eta', 'shots', 'accepted'] +
                        [f'h{k}' for k in range(width)] + ['S'])
        for c in result.circuits:
            counts = list(c.counts) + [0] * (width - len(c.counts))
            writer.writerow([c.index, c.width, c.depth, c.hardness, c.shots,
                             c.accepted] + counts + [c.s_value])


__all__ = [
    Twirl, MirrorSpec, CircuitResult, BenchmarkResult,
    UndefinedConfidenceError, NotInvertibleError, twirl_layer, prepare_gates,
    measure_gates, invert_gate, invert_layer, make_mirror,
    random_mirror_spec, twirled_circuit, a_kw, confidence_from_histogram,
    confidence_from_counts, sample_twirled_weights, oracle_checks,
    error_free_weight, bootstrap, estimate, write_result,
    write_histogram_csv]

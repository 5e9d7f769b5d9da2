from __future__ import annotations
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations, product as cartesian
from typing import Dict, List, Tuple

from . import logger
from .pauli import (
    PauliString, StabilizerGroup, DimensionError, multiply,
    commutes, inverse, popcount, bits)


class PermutationNotFoundError(Exception):
    def __init__(self, code: CodeSpec, action: LogicalAction):
        message = (f'No qubit permutation of {code.name} implements '
                   f'{action.name}')
        super().__init__(message)


class CodeError(Exception):
    def __init__(self, code: str, reason: str):
        message = f'Invalid code {code}: {reason}'
        super().__init__(message)


@dataclass(frozen=True)
class QubitPermutation:
    """Relabeling of physical qubits; the content of qubit i moves to
    mapping[i]."""
    mapping: Tuple[int, ...]

    def __post_init__(self):
        super().__setattr__('mapping', tuple(self.mapping))
        if sorted(self.mapping) != list(range(len(self.mapping))):
            raise ValueError(f'{self.mapping} is not a bijection')

    @property
    def n(self) -> int:
        return len(self.mapping)

    @classmethod
    def identity(cls, n: int) -> QubitPermutation:
        return cls(tuple(range(n)))

    @classmethod
    def transposition(cls, n: int, i: int, j: int) -> QubitPermutation:
        mapping = list(range(n))
        mapping[i], mapping[j] = j, i
        return cls(tuple(mapping))

    @property
    def is_identity(self) -> bool:
        return self.mapping == tuple(range(self.n))

    def then(self, other: QubitPermutation) -> QubitPermutation:
        """Apply self first, then other"""
        if other.n != self.n:
            raise DimensionError(self.n, other.n)
        return QubitPermutation(tuple(other.mapping[m] for m in self.mapping))

    def inverse(self) -> QubitPermutation:
        mapping = [0] * self.n
        for i, m in enumerate(self.mapping):
            mapping[m] = i
        return QubitPermutation(tuple(mapping))


def _move_bits(mask: int, mapping: Tuple[int, ...]) -> int:
    out = 0
    for i in bits(mask):
        out |= 1 << mapping[i]
    return out


def conjugate_by_permutation(p: PauliString,
                             perm: QubitPermutation) -> PauliString:
    if p.n != perm.n:
        raise DimensionError(p.n, perm.n)
    return PauliString(p.n, _move_bits(p.x, perm.mapping),
                       _move_bits(p.z, perm.mapping), p.phase)


@dataclass(frozen=True)
class CodeSpec:
    name: str
    n: int
    k: int
    d: int
    stabilizers: StabilizerGroup
    logical_x: Tuple[PauliString, ...]
    logical_z: Tuple[PauliString, ...]
    geometry: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        if self.stabilizers.n != self.n:
            raise CodeError(self.name, 'stabilizer width differs from n')
        if len(self.stabilizers) != self.n - self.k:
            raise CodeError(
                self.name, f'expected {self.n - self.k} generators')
        if len(self.logical_x) != self.k or len(self.logical_z) != self.k:
            raise CodeError(self.name, f'expected {self.k} logical pairs')
        if len(self.geometry) != self.n or len(set(self.geometry)) != self.n:
            raise CodeError(self.name, 'geometry needs one vertex per qubit')
        logicals = self.logical_x + self.logical_z
        for op in logicals:
            for g in self.stabilizers.generators:
                if not commutes(op, g):
                    raise CodeError(
                        self.name, f'logical {op} anticommutes with {g}')
        for i, xi in enumerate(self.logical_x):
            for j, zj in enumerate(self.logical_z):
                if commutes(xi, zj) == (i == j):
                    raise CodeError(
                        self.name, f'X{i} and Z{j} have the wrong commutation')
            for xj in self.logical_x[i + 1:]:
                if not commutes(xi, xj):
                    raise CodeError(self.name, 'logical X operators clash')
        for i, zi in enumerate(self.logical_z):
            for zj in self.logical_z[i + 1:]:
                if not commutes(zi, zj):
                    raise CodeError(self.name, 'logical Z operators clash')

    def logical(self, letter: str, index: int) -> PauliString:
        if not 0 <= index < self.k:
            raise IndexError(f'{self.name} has no logical qubit {index}')
        letter = letter.upper()
        if letter == 'X':
            return self.logical_x[index]
        if letter == 'Z':
            return self.logical_z[index]
        if letter == 'Y':
            xz = multiply(self.logical_x[index], self.logical_z[index])
            return xz.with_phase(xz.phase + 1)
        raise ValueError(f'unknown logical letter {letter!r}')

    def opposite(self, qubit: int) -> int:
        """Qubit at the point reflection of qubit through the centre"""
        vertex = tuple(1 - c for c in self.geometry[qubit])
        return self.geometry.index(vertex)

    def reflect(self, p: PauliString) -> PauliString:
        mapping = tuple(self.opposite(q) for q in range(self.n))
        return conjugate_by_permutation(p, QubitPermutation(mapping))

    def logical_vector(self, p: PauliString) -> Tuple[int, int]:
        """(x, z) logical masks of an operator commuting with the code"""
        x = z = 0
        for i in range(self.k):
            if not commutes(p, self.logical_z[i]):
                x |= 1 << i
            if not commutes(p, self.logical_x[i]):
                z |= 1 << i
        return x, z

    def __str__(self) -> str:
        return f'[[{self.n},{self.k},{self.d}]]'


def distance(code: CodeSpec) -> int:
    """Minimum weight of a nontrivial logical operator, by brute force"""
    elements = code.stabilizers.elements()
    best = code.n
    for xs, zs in cartesian(range(1 << code.k), repeat=2):
        if xs == 0 and zs == 0:
            continue
        logical = PauliString.identity(code.n)
        for i in bits(xs):
            logical = multiply(logical, code.logical_x[i])
        for i in bits(zs):
            logical = multiply(logical, code.logical_z[i])
        for vector in elements:
            x = logical.x ^ (vector & ((1 << code.n) - 1))
            z = logical.z ^ (vector >> code.n)
            best = min(best, popcount(x | z))
    return best


def _build(name, d, generators, logical_x, logical_z, geometry) -> CodeSpec:
    n = len(generators[0])
    code = CodeSpec(
        name=name, n=n, k=len(logical_x), d=d,
        stabilizers=StabilizerGroup(
            n, tuple(PauliString.from_str(g) for g in generators)),
        logical_x=tuple(PauliString.from_str(p) for p in logical_x),
        logical_z=tuple(PauliString.from_str(p) for p in logical_z),
        geometry=tuple(geometry))
    found = distance(code)
    if found != d:
        raise CodeError(name, f'distance {found} instead of {d}')
    return code


@lru_cache(maxsize=None)
def code_832() -> CodeSpec:
    return _build(
        '832', 2,
        ['ZZZZIIII', 'ZZIIZZII', 'ZIZIZIZI', 'ZZZZZZZZ', 'XXXXXXXX'],
        ['XXXXIIII', 'XXIIXXII', 'XIXIXIXI'],
        ['ZIIIZIII', 'ZIZIIIII', 'ZZIIIIII'],
        [((i >> 2) & 1, (i >> 1) & 1, i & 1) for i in range(8)])


@lru_cache(maxsize=None)
def code_422() -> CodeSpec:
    return _build(
        '422', 2,
        ['XXXX', 'ZZZZ'],
        ['XXII', 'XIIX'],
        ['IZZI', 'IIZZ'],
        [(0, 0), (1, 0), (1, 1), (0, 1)])


CODES = {'832': code_832, '422': code_422}


def get_code(name: str) -> CodeSpec:
    try:
        return CODES[name]()
    except KeyError:
        raise KeyError(f'Unknown code {name!r}, choose from {list(CODES)}')


@dataclass(frozen=True)
class LogicalAction:
    """Required Heisenberg images of each logical X and Z, given as
    (x mask, z mask) over the logical qubits."""
    name: str
    x_images: Tuple[Tuple[int, int], ...]
    z_images: Tuple[Tuple[int, int], ...]

    @classmethod
    def identity(cls, k: int) -> LogicalAction:
        return cls('I', tuple((1 << i, 0) for i in range(k)),
                   tuple((0, 1 << i) for i in range(k)))

    @classmethod
    def cnot(cls, k: int, control: int, target: int) -> LogicalAction:
        if control == target:
            raise ValueError('control and target must differ')
        x_images = [(1 << i, 0) for i in range(k)]
        z_images = [(0, 1 << i) for i in range(k)]
        x_images[control] = ((1 << control) | (1 << target), 0)
        z_images[target] = (0, (1 << control) | (1 << target))
        return cls(f'CNOT({control},{target})', tuple(x_images),
                   tuple(z_images))

    @classmethod
    def swap(cls, k: int, i: int, j: int) -> LogicalAction:
        if i == j:
            raise ValueError('swap needs two distinct logical qubits')
        order = list(range(k))
        order[i], order[j] = j, i
        return cls(f'SWAP({i},{j})',
                   tuple((1 << order[a], 0) for a in range(k)),
                   tuple((0, 1 << order[a]) for a in range(k)))

    def images(self, code: CodeSpec) -> List[PauliString]:
        """Physical representatives of the X images then the Z images"""
        out = []
        for x, z in self.x_images + self.z_images:
            op = PauliString.identity(code.n)
            for i in bits(x):
                op = multiply(op, code.logical_x[i])
            for i in bits(z):
                op = multiply(op, code.logical_z[i])
            out.append(op)
        return out


@lru_cache(maxsize=None)
def stabilizer_automorphisms(code: CodeSpec) -> Tuple[QubitPermutation, ...]:
    """Every permutation mapping the stabilizer group onto itself with
    matching signs, in lexicographic order"""
    elements = code.stabilizers.elements()
    generators = [(bits(g.x), bits(g.z), g.phase)
                  for g in code.stabilizers.generators]
    found = []
    for mapping in permutations(range(code.n)):
        for xs, zs, phase in generators:
            x = sum(1 << mapping[i] for i in xs)
            z = sum(1 << mapping[i] for i in zs)
            if elements.get(x | (z << code.n)) != phase:
                break
        else:
            found.append(QubitPermutation(mapping))
    logger.debug(f'{code.name}: {len(found)} stabilizer automorphisms')
    return tuple(found)


def implements(code: CodeSpec, perm: QubitPermutation,
               action: LogicalAction) -> bool:
    elements = code.stabilizers.elements()
    sources = list(code.logical_x) + list(code.logical_z)
    for source, target in zip(sources, action.images(code)):
        moved = conjugate_by_permutation(source, perm)
        residual = multiply(inverse(target), moved)
        if elements.get(residual.vector) != residual.phase:
            return False
    return True


@lru_cache(maxsize=None)
def find_permutation_gate(code: CodeSpec,
                          action: LogicalAction) -> QubitPermutation:
    """Lexicographically first stabilizer-preserving permutation whose
    conjugation realises action on every logical generator"""
    for perm in stabilizer_automorphisms(code):
        if implements(code, perm, action):
            logger.debug(f'{code.name} {action.name}: {perm.mapping}')
            return perm
    raise PermutationNotFoundError(code, action)


def permutation_table(code: CodeSpec) -> Dict[str, QubitPermutation]:
    """In-block CNOT and SWAP relabels for every ordered logical pair"""
    table = {}
    for i in range(code.k):
        for j in range(code.k):
            if i == j:
                continue
            action = LogicalAction.cnot(code.k, i, j)
            table[action.name] = find_permutation_gate(code, action)
            if i < j:
                action = LogicalAction.swap(code.k, i, j)
                table[action.name] = find_permutation_gate(code, action)
    return table


__all__ = [
    CodeSpec, QubitPermutation, LogicalAction, PermutationNotFoundError,
    CodeError, conjugate_by_permutation, distance, code_832, code_422,
    get_code, stabilizer_automorphisms, implements, find_permutation_gate,
    permutation_table]

from __future__ import annotations
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

LETTERS = 'IXZY'
PREFIXES = {0: '', 1: 'i', 2: '-', 3: '-i'}


class DimensionError(Exception):
    def __init__(self, a: int, b: int):
        message = f'Pauli operators act on {a} and {b} qubits'
        super().__init__(message)


class PauliParseError(ValueError):
    def __init__(self, text: str, reason: str):
        message = f'Cannot parse Pauli string {text!r}: {reason}'
        super().__init__(message)


class Membership(Enum):
    NOT_MEMBER = 0
    PLUS = 1
    MINUS = -1


def popcount(value: int) -> int:
    return bin(value).count('1')


def bits(value: int) -> List[int]:
    """Positions of the set bits of value, lowest first"""
    out = []
    position = 0
    while value:
        if value & 1:
            out.append(position)
        value >>= 1
        position += 1
    return out


@dataclass(frozen=True)
class PauliString:
    """Phased Pauli operator i^phase * P_0 P_1 ... P_{n-1}.

    Letter k acts on qubit k; x and z are bit masks with bit k describing
    letter k: (0,0) I, (1,0) X, (0,1) Z, (1,1) Y. The phase is the
    exponent of i, kept mod 4.
    """
    n: int
    x: int = 0
    z: int = 0
    phase: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f'n must be non-negative, got {self.n}')
        limit = 1 << self.n
        for name in ('x', 'z'):
            mask = getattr(self, name)
            if mask < 0 or mask >= limit:
                raise ValueError(
                    f'{name} mask {mask:#x} does not fit {self.n} qubits')
        super().__setattr__('phase', self.phase % 4)

    @classmethod
    def identity(cls, n: int) -> PauliString:
        return cls(n)

    @classmethod
    def from_str(cls, text: str) -> PauliString:
        body = text.strip()
        phase = 0
        if body.startswith('+'):
            body = body[1:]
        elif body.startswith('-'):
            phase = 2
            body = body[1:]
        if body.startswith('i'):
            phase += 1
            body = body[1:]
        if not body:
            raise PauliParseError(text, 'no letters')
        x = z = 0
        for k, letter in enumerate(body.upper()):
            if letter not in LETTERS:
                raise PauliParseError(text, f'unknown letter {letter!r}')
            code = LETTERS.index(letter)
            x |= (code & 1) << k
            z |= (code >> 1) << k
        return cls(len(body), x, z, phase)

    @classmethod
    def from_letters(cls, n: int, qubits: Sequence[int],
                     letters: str) -> PauliString:
        """Operator with letters[i] on qubits[i] and identity elsewhere"""
        if len(qubits) != len(letters):
            raise ValueError(
                f'{len(qubits)} qubits but {len(letters)} letters')
        x = z = 0
        for qubit, letter in zip(qubits, letters):
            if not 0 <= qubit < n:
                raise ValueError(f'qubit {qubit} out of range for n={n}')
            code = LETTERS.index(letter.upper())
            x |= (code & 1) << qubit
            z |= (code >> 1) << qubit
        return cls(n, x, z)

    @classmethod
    def from_support(cls, n: int, letter: str,
                     qubits: Iterable[int]) -> PauliString:
        qubits = list(qubits)
        return cls.from_letters(n, qubits, letter * len(qubits))

    def letter(self, k: int) -> str:
        return LETTERS[((self.x >> k) & 1) | (((self.z >> k) & 1) << 1)]

    def __str__(self) -> str:
        return PREFIXES[self.phase] + ''.join(
            self.letter(k) for k in range(self.n))

    @property
    def letters(self) -> str:
        return ''.join(self.letter(k) for k in range(self.n))

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(bits(self.x | self.z))

    @property
    def weight(self) -> int:
        return popcount(self.x | self.z)

    @property
    def vector(self) -> int:
        """Symplectic vector (x | z << n) with the phase dropped"""
        return self.x | (self.z << self.n)

    @property
    def is_hermitian(self) -> bool:
        return self.phase % 2 == 0

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def with_phase(self, phase: int) -> PauliString:
        return PauliString(self.n, self.x, self.z, phase)

    def restricted(self, qubits: Sequence[int]) -> Tuple[Tuple[int, ...], str]:
        """Non-identity letters of self on the listed positions"""
        targets, letters = [], []
        for local, qubit in enumerate(qubits):
            letter = self.letter(local)
            if letter != 'I':
                targets.append(qubit)
                letters.append(letter)
        return tuple(targets), ''.join(letters)

    def __mul__(self, other: PauliString) -> PauliString:
        return multiply(self, other)

    def __neg__(self) -> PauliString:
        return self.with_phase(self.phase + 2)


def _check(a: PauliString, b: PauliString):
    if a.n != b.n:
        raise DimensionError(a.n, b.n)


def multiply(a: PauliString, b: PauliString) -> PauliString:
    _check(a, b)
    ax, az, bx, bz = a.x, a.z, b.x, b.z
    a_x, a_y, a_z = ax & ~az, ax & az, az & ~ax
    b_x, b_y, b_z = bx & ~bz, bx & bz, bz & ~bx
    # XY = iZ, YZ = iX, ZX = iY and the reversed products pick up -i
    cyclic = (a_x & b_y) | (a_y & b_z) | (a_z & b_x)
    anticyclic = (a_y & b_x) | (a_z & b_y) | (a_x & b_z)
    phase = a.phase + b.phase + popcount(cyclic) - popcount(anticyclic)
    return PauliString(a.n, ax ^ bx, az ^ bz, phase)


def commutes(a: PauliString, b: PauliString) -> bool:
    _check(a, b)
    return popcount((a.x & b.z) ^ (a.z & b.x)) % 2 == 0


def product(paulis: Iterable[PauliString], n: int) -> PauliString:
    result = PauliString.identity(n)
    for pauli in paulis:
        result = multiply(result, pauli)
    return result


@dataclass(frozen=True)
class StabilizerGroup:
    n: int
    generators: Tuple[PauliString, ...]

    _rows: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        super().__setattr__('generators', tuple(self.generators))
        for g in self.generators:
            if g.n != self.n:
                raise DimensionError(self.n, g.n)
            if not g.is_hermitian:
                raise ValueError(f'generator {g} is not Hermitian')
        for i, a in enumerate(self.generators):
            for b in self.generators[i + 1:]:
                if not commutes(a, b):
                    raise ValueError(f'generators {a} and {b} anticommute')
        super().__setattr__('_rows', self._reduce())

    def _reduce(self) -> tuple:
        # Independent generators guarantee that -I is not in the group
        rows = []
        for index, g in enumerate(self.generators):
            vector, combination = g.vector, 1 << index
            for pivot, row_vector, row_combination in rows:
                if (vector >> pivot) & 1:
                    vector ^= row_vector
                    combination ^= row_combination
            if vector == 0:
                raise ValueError(
                    f'generator {g} depends on the preceding generators')
            rows.append((vector.bit_length() - 1, vector, combination))
        return tuple(rows)

    def decompose(self, p: PauliString) -> Optional[Tuple[int, ...]]:
        """Indices of the generators whose product matches p up to phase"""
        _check(PauliString.identity(self.n), p)
        vector, combination = p.vector, 0
        for pivot, row_vector, row_combination in self._rows:
            if (vector >> pivot) & 1:
                vector ^= row_vector
                combination ^= row_combination
        if vector:
            return None
        return tuple(bits(combination))

    def membership(self, p: PauliString) -> Membership:
        indices = self.decompose(p)
        if indices is None:
            return Membership.NOT_MEMBER
        element = product((self.generators[i] for i in indices), self.n)
        difference = (p.phase - element.phase) % 4
        if difference == 0:
            return Membership.PLUS
        if difference == 2:
            return Membership.MINUS
        return Membership.NOT_MEMBER

    def elements(self) -> Dict[int, int]:
        """Every group element as symplectic vector -> phase"""
        out = {0: 0}
        for g in self.generators:
            grown = dict(out)
            for vector, phase in out.items():
                element = multiply(
                    PauliString(self.n, vector & ((1 << self.n) - 1),
                                vector >> self.n, phase), g)
                grown[element.vector] = element.phase
            out = grown
        return out

    def __len__(self) -> int:
        return len(self.generators)


def in_group(g: StabilizerGroup, p: PauliString) -> bool:
    return g.membership(p) is Membership.PLUS


def equivalent(group: StabilizerGroup, a: PauliString,
               b: PauliString) -> bool:
    """True when a equals b times a (+1) element of the group"""
    return in_group(group, multiply(inverse(b), a))


def inverse(p: PauliString) -> PauliString:
    # letters are involutions, so only the phase needs inverting
    return p.with_phase(-p.phase)


# Heisenberg conjugation U P U^dagger by the Clifford gates of the
# physical vocabulary. A sign flip adds 2 to the phase.

def _flip(p: PauliString, condition: int) -> PauliString:
    return p.with_phase(p.phase + 2) if condition else p


def conjugate_h(p: PauliString, q: int) -> PauliString:
    xq, zq = (p.x >> q) & 1, (p.z >> q) & 1
    mask = 1 << q
    x = (p.x & ~mask) | (zq << q)
    z = (p.z & ~mask) | (xq << q)
    return _flip(PauliString(p.n, x, z, p.phase), xq & zq)


def conjugate_s(p: PauliString, q: int) -> PauliString:
    xq, zq = (p.x >> q) & 1, (p.z >> q) & 1
    return _flip(PauliString(p.n, p.x, p.z ^ (xq << q), p.phase), xq & zq)


def conjugate_sdg(p: PauliString, q: int) -> PauliString:
    xq, zq = (p.x >> q) & 1, (p.z >> q) & 1
    return _flip(PauliString(p.n, p.x, p.z ^ (xq << q), p.phase),
                 xq & (zq ^ xq))


def conjugate_x(p: PauliString, q: int) -> PauliString:
    return _flip(p, (p.z >> q) & 1)


def conjugate_z(p: PauliString, q: int) -> PauliString:
    return _flip(p, (p.x >> q) & 1)


def conjugate_cx(p: PauliString, control: int, target: int) -> PauliString:
    xc, zc = (p.x >> control) & 1, (p.z >> control) & 1
    xt, zt = (p.x >> target) & 1, (p.z >> target) & 1
    sign = xc & zt & (xt ^ zc ^ 1)
    x = p.x ^ (xc << target)
    z = p.z ^ (zt << control)
    return _flip(PauliString(p.n, x, z, p.phase), sign)


def conjugate_cz(p: PauliString, a: int, b: int) -> PauliString:
    return conjugate_h(conjugate_cx(conjugate_h(p, b), a, b), b)


CLIFFORD_RULES = {
    'H': conjugate_h,
    'S': conjugate_s,
    'Sdg': conjugate_sdg,
    'X': conjugate_x,
    'Z': conjugate_z,
    'CX': conjugate_cx,
    'CZ': conjugate_cz,
}


__all__ = [
    PauliString, StabilizerGroup, Membership, DimensionError, PauliParseError,
    multiply, commutes, in_group, equivalent, inverse, product, popcount, bits,
    conjugate_h, conjugate_s, conjugate_sdg, conjugate_x, conjugate_z,
    conjugate_cx, conjugate_cz, CLIFFORD_RULES]

"""Tests for cubesquare/codes.py"""
import pytest

from cubesquare.codes import (
    LogicalAction, PermutationNotFoundError, QubitPermutation,
    conjugate_by_permutation, distance, find_permutation_gate, get_code,
    implements, permutation_table, stabilizer_automorphisms)
from cubesquare.pauli import PauliString, commutes, in_group


def test_parameters(cube, square):
    assert (cube.n, cube.k, distance(cube)) == (8, 3, 2)
    assert (square.n, square.k, distance(square)) == (4, 2, 2)
    assert str(cube) == '[[8,3,2]]'
    assert str(square) == '[[4,2,2]]'
    assert get_code('832') is cube

    with pytest.raises(KeyError):
        get_code('713')


def test_logical_operators(cube, square):
    for code in (cube, square):
        for i in range(code.k):
            for j in range(code.k):
                x, z = code.logical('X', i), code.logical('Z', j)
                assert commutes(x, z) == (i != j)
            y = code.logical('Y', i)
            assert y.is_hermitian
            assert code.logical_vector(y) == (1 << i, 1 << i)

    with pytest.raises(IndexError):
        square.logical('X', 2)
    with pytest.raises(ValueError):
        cube.logical('W', 0)


def test_cube_geometry(cube):
    """Vertex i of the cube is the binary expansion of i"""
    assert cube.geometry[5] == (1, 0, 1)
    assert cube.opposite(0) == 7
    assert cube.opposite(5) == 2
    assert cube.reflect(cube.logical('X', 0)).letters == 'IIIIXXXX'
    assert in_group(cube.stabilizers,
                    cube.reflect(cube.logical('X', 0)) *
                    cube.logical('X', 0))


def test_square_geometry(square):
    assert square.opposite(0) == 2
    assert square.opposite(1) == 3
    assert square.reflect(square.logical('Z', 0)).letters == 'ZIIZ'


def test_permutation_algebra():
    swap = QubitPermutation.transposition(3, 0, 2)
    cycle = QubitPermutation((1, 2, 0))
    assert swap.then(swap).is_identity
    assert cycle.then(cycle.inverse()).is_identity
    assert cycle.then(swap).mapping == (1, 0, 2)

    p = PauliString.from_str('XZI')
    assert conjugate_by_permutation(p, cycle).letters == 'IXZ'

    with pytest.raises(ValueError):
        QubitPermutation((0, 0, 1))


def test_automorphism_counts(cube, square):
    assert len(stabilizer_automorphisms(square)) == 24
    # the affine group of the cube
    assert len(stabilizer_automorphisms(cube)) == 1344


@pytest.mark.parametrize('code_name', ['832', '422'])
def test_permutation_gates(code_name):
    code = get_code(code_name)
    table = permutation_table(code)
    assert len(table) == code.k * (code.k - 1) * 3 // 2
    for i in range(code.k):
        for j in range(code.k):
            if i == j:
                continue
            action = LogicalAction.cnot(code.k, i, j)
            perm = find_permutation_gate(code, action)
            assert implements(code, perm, action)
            assert not implements(code, perm, LogicalAction.identity(code.k))
            for g in code.stabilizers.generators:
                assert in_group(code.stabilizers,
                                conjugate_by_permutation(g, perm))


def test_permutation_not_found(square):
    action = LogicalAction('bogus', ((1, 1), (2, 0)), ((0, 1), (0, 2)))
    with pytest.raises(PermutationNotFoundError):
        find_permutation_gate(square, action)

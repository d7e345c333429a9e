from __future__ import annotations

from hypothesis import given, strategies as st
from sympy import Matrix, ZZ
from sympy.matrices.normalforms import smith_normal_form as sympy_snf

from spaceform.smith import abelian_invariants, matmul, smith_normal_form

matrices = st.integers(1, 4).flatmap(
    lambda r: st.integers(1, 4).flatmap(
        lambda c: st.lists(st.lists(st.integers(-9, 9), min_size=c, max_size=c), min_size=r, max_size=r)))


def _det(M):
    return int(Matrix(M).det())


@given(matrices)
def test_transforms_diagonalize(M):
    snf = smith_normal_form(M)
    assert matmul(matmul(snf.left, M), snf.right) == snf.matrix()
    assert abs(_det(snf.left)) == 1 and abs(_det(snf.right)) == 1


@given(matrices)
def test_divisibility_chain_and_sign(M):
    d = [x for x in smith_normal_form(M).diagonal]
    assert all(x >= 0 for x in d)
    nonzero = [x for x in d if x]
    assert d[:len(nonzero)] == nonzero
    assert all(b % a == 0 for a, b in zip(nonzero, nonzero[1:]))


@given(matrices)
def test_matches_sympy(M):
    ours = [x for x in smith_normal_form(M).diagonal]
    S = sympy_snf(Matrix(M), domain=ZZ)
    theirs = [abs(int(S[i, i])) for i in range(min(S.shape))]
    assert sorted(ours) == sorted(theirs)


def test_known_forms():
    assert smith_normal_form([[2, 4, 4], [-6, 6, 12], [10, -4, -16]]).diagonal == (2, 6, 12)
    assert smith_normal_form([[1, 1, -2], [1, -2, 1]]).diagonal == (1, 3)
    assert smith_normal_form([[0, 0], [0, 0]]).rank == 0


def test_abelian_invariants():
    assert abelian_invariants([[3, 0], [0, 3]], 2) == (3, 3)
    assert abelian_invariants([[2, 0], [0, 3]], 2) == (6,)
    assert abelian_invariants([[4, 0]], 2) == (4, 0)
    assert abelian_invariants([], 2) == (0, 0)

from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from workbench.ratmath import (Matrix, NotFullRowRank, dot, format_rational, null_space_basis,
                               parse_rational, rank, right_inverse, rref, solve_linear)

small = st.fractions(min_value=-5, max_value=5, max_denominator=6)


def matrices(rows=st.integers(1, 4), cols=st.integers(1, 4)):
    return st.tuples(rows, cols).flatmap(
        lambda rc: st.lists(st.lists(small, min_size=rc[1], max_size=rc[1]),
                            min_size=rc[0], max_size=rc[0]).map(lambda r: Matrix(r, ncols=rc[1])))


@pytest.mark.parametrize("tok,val", [("3", F(3)), ("-3/4", F(-3, 4)), ("+6/8", F(3, 4)), ("0/5", F(0))])
def test_parse_rational(tok, val):
    assert parse_rational(tok) == val


@pytest.mark.parametrize("tok", ["", "1.5", "1/0", "a", "1/-2", "1 /2", "--1"])
def test_parse_rational_rejects(tok):
    with pytest.raises(ValueError):
        parse_rational(tok)


@given(st.fractions())
def test_format_parse_round_trip(x):
    assert parse_rational(format_rational(x)) == x


def test_matrix_basics():
    a = Matrix([[1, 2], [3, 4]])
    assert a.shape == (2, 2)
    assert a @ (1, 1) == (3, 7)
    assert (1, 1) @ a == (4, 6)
    assert a @ Matrix.identity(2) == a
    assert a.T == Matrix([[1, 3], [2, 4]])
    assert a - a == Matrix.zeros(2, 2)
    assert Matrix.hstack([a, a]).shape == (2, 4)
    assert Matrix.vstack([a, a]).shape == (4, 2)
    assert a.columns([1]) == Matrix([[2], [4]])
    assert a.is_nonnegative() and not (-a).is_nonnegative()
    assert dot((F(1, 2), 2), (2, F(1, 4))) == F(3, 2)


def test_ragged_rows_rejected():
    with pytest.raises(ValueError):
        Matrix([[1, 2], [3]])


def test_rref_and_rank():
    rows, piv = rref([[2, 4], [1, 2]])
    assert piv == [0]
    assert rows[0] == [1, 2]
    assert rank([[1, 2, 3], [2, 4, 6], [0, 0, 1]]) == 2
    assert rank(Matrix.zeros(3, 3)) == 0


def test_solve_linear():
    a = Matrix([[2, 1], [2, -1]])
    assert solve_linear(a, (F(3, 2), F(1, 2))) == (F(1, 2), F(1, 2))
    assert solve_linear(Matrix([[1, 1], [1, 1]]), (1, 2)) is None


def test_right_inverse_requires_full_row_rank():
    with pytest.raises(NotFullRowRank):
        right_inverse(Matrix([[1, 1], [2, 2]]))


@given(matrices())
def test_rank_of_transpose(a):
    assert rank(a) == rank(a.T)


@given(matrices())
def test_null_space(a):
    z = null_space_basis(a)
    assert z.ncols == a.ncols - rank(a)
    assert (a @ z).is_zero()
    if z.ncols:
        assert rank(z) == z.ncols


@given(matrices())
def test_right_inverse_when_full_rank(a):
    if rank(a) == a.nrows:
        assert a @ right_inverse(a) == Matrix.identity(a.nrows)


@settings(max_examples=60)
@given(matrices(), st.data())
def test_solve_linear_consistent(a, data):
    x = data.draw(st.lists(small, min_size=a.ncols, max_size=a.ncols))
    b = a @ x
    y = solve_linear(a, b)
    assert y is not None and a @ y == b


@settings(max_examples=60)
@given(matrices(), st.randoms(use_true_random=False), st.lists(small.filter(bool), min_size=4, max_size=4))
def test_rank_invariant_under_row_operations(a, rnd, factors):
    rows = list(a.rows)
    rnd.shuffle(rows)
    scaled = [[f * v for v in row] for f, row in zip(factors, rows)]
    assert rank(Matrix(scaled, ncols=a.ncols)) == rank(a)

from fractions import Fraction as F

from hypothesis import given, settings
from hypothesis import strategies as st

from workbench.ratmath import Matrix
from workbench.simplex import LinearProgram, Status, check_solution, optimal_variable_range, solve_lp


def planning_ex1():
    # min tau : R x = lambda, A x - tau <= 0, tau free
    R = Matrix([[2, 1, 0], [2, -1, 0]])
    A = Matrix([[1, 1, -1]])
    return LinearProgram((0, 0, 1), "min", (R, (F(3, 2), F(1, 2))), (A, (0,)), (False, False, True))


def test_small_planning_problem():
    lp = planning_ex1()
    sol = solve_lp(lp)
    assert sol.status is Status.OPTIMAL
    assert sol.objective_value == 1
    assert sol.primal == (F(1, 2), F(1, 2), F(1))
    assert sol.dual_eq == (F(3, 4), F(-1, 4))
    assert sol.dual_ineq == (F(-1),)
    assert check_solution(lp, sol) == []


def test_infeasible():
    lp = LinearProgram((1,), "min", (Matrix([[1]]), (-1,)))
    assert solve_lp(lp).status is Status.INFEASIBLE


def test_unbounded():
    lp = LinearProgram((1, 0), "max", ineq=(Matrix([[-1, 1]]), (1,)))
    assert solve_lp(lp).status is Status.UNBOUNDED


def test_degenerate_cycling_example_terminates():
    # a classic instance on which the textbook largest-coefficient rule cycles
    c = (F(-3, 4), 150, F(-1, 50), 6)
    A = Matrix([[F(1, 4), -60, F(-1, 25), 9], [F(1, 2), -90, F(-1, 50), 3], [0, 0, 1, 0]])
    lp = LinearProgram(c, "min", ineq=(A, (0, 0, 1)))
    sol = solve_lp(lp)
    assert sol.status is Status.OPTIMAL
    assert sol.objective_value == F(-1, 20)
    assert check_solution(lp, sol) == []


def test_variable_range_on_optimal_face():
    # min x1 + x2 over x1 + x2 >= 1: the face is a segment
    lp = LinearProgram((1, 1), "min", ineq=(Matrix([[-1, -1]]), (-1,)))
    assert optimal_variable_range(lp, 0) == (0, 1)
    lo, hi = optimal_variable_range(planning_ex1(), 0)
    assert lo == hi == F(1, 2)


coef = st.integers(-4, 4).map(F)


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 3), st.integers(1, 4), st.data())
def test_certificates_on_random_lps(m, n, data):
    rows = data.draw(st.lists(st.lists(coef, min_size=n, max_size=n), min_size=m, max_size=m))
    rhs = data.draw(st.lists(st.integers(0, 5).map(F), min_size=m, max_size=m))
    cost = data.draw(st.lists(coef, min_size=n, max_size=n))
    sense = data.draw(st.sampled_from(["min", "max"]))
    lp = LinearProgram(tuple(cost), sense, ineq=(Matrix(rows, ncols=n), tuple(rhs)))
    sol = solve_lp(lp)
    # x = 0 is feasible since rhs >= 0
    assert sol.status in (Status.OPTIMAL, Status.UNBOUNDED)
    if sol.optimal:
        assert check_solution(lp, sol) == []


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(1, 4), st.data())
def test_resolving_is_deterministic(m, n, data):
    rows = data.draw(st.lists(st.lists(coef, min_size=n, max_size=n), min_size=m, max_size=m))
    rhs = data.draw(st.lists(coef, min_size=m, max_size=m))
    cost = data.draw(st.lists(coef, min_size=n, max_size=n))
    lp = LinearProgram(tuple(cost), "min", (Matrix(rows, ncols=n), tuple(rhs)))
    assert solve_lp(lp) == solve_lp(lp)

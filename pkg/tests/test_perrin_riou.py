import warnings

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from padictower.iwasawa import LambdaElt, QuotientRing, pr_solve
from padictower.iwasawa.lambda_ring import omega_n
from padictower.iwasawa.perrin_riou import RecurrenceError, VandermondeError, plant


def test_quotient_ring_basics():
    A = QuotientRing([3, 0, 1])  # t^2 = -3
    t = A.reduce([0, 1])
    assert A.mul(t, t) == (-3, 0)
    assert A.mul(A.inverse(t), t) == A.one()
    assert A.power_sums(4) == [2, 0, -6, 0, 18]
    assert A.trace(A.t_power(2)) == -6
    assert A.norm(A.derivative_at_t()) == 12  # N(2t) = 4 * 3


def test_lagrange_basis_is_dual_to_powers():
    A = QuotientRing([3, -1, 1])
    inv = A.inverse(A.derivative_at_t())
    for j, q in enumerate(A.lagrange_q()):
        for k in range(A.d):
            assert A.trace(A.mul(A.mul(q, inv), A.t_power(k))) == (1 if j == k else 0)


@pytest.mark.parametrize("R", [[3, 0, 1], [3, -1, 1]])
def test_planted_round_trip(R):
    F = ((1, 2, 0, 5), (3, -1))
    f_list = plant(R, F, 1, 5, 3)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sol = pr_solve(R, f_list, 1)
    assert sol.n_s == 4
    expected = tuple(tuple(LambdaElt(3, Fk).mod(omega_n(sol.n_s, 3)).c) for Fk in F)
    assert tuple(tuple(int(x) for x in Fk) for Fk in sol.reduced(sol.n_s)) == expected
    for n in range(1, sol.n_s + 1):
        assert LambdaElt(3, [int(x) for x in sol.f_at(n)]) == f_list[n - 1].mod(omega_n(n, 3))


def test_growth_condition_reported():
    with pytest.warns(UserWarning):
        sol = pr_solve([3, -1, 1], plant([3, -1, 1], ((1,), (0, 1)), 0, 3, 3), 0)
    assert not sol.growth_condition_ok
    sol = pr_solve([3, 0, 1], plant([3, 0, 1], ((1,), (0, 1)), 0, 3, 3), 0)
    assert sol.growth_condition_ok
    assert sol.to_json()["slopes"] == [["1/2", 2]]


def test_degree_one_unit_root():
    f = [LambdaElt(3, (4, 1, 7))] * 3
    sol = pr_solve([-1, 1], f, 2)
    assert sol.F == ((4, 1, 7),)


def test_errors():
    f = plant([3, 0, 1], ((1,),), 1, 4, 3)
    bad = list(f)
    bad[2] = bad[2] + 1
    with pytest.raises(RecurrenceError) as exc:
        pr_solve([3, 0, 1], bad, 1)
    assert exc.value.n == 1
    with pytest.raises(VandermondeError):
        pr_solve([0, 0, 1], f, 1)
    with pytest.raises(VandermondeError):
        pr_solve([9, 6, 1], f, 1)  # (T + 3)^2
    with pytest.raises(VandermondeError):
        pr_solve([3, 0, 1], f, 1, K=0)  # discriminant -12 has valuation 1


@given(st.lists(st.lists(st.integers(-9, 9), min_size=1, max_size=4), min_size=2, max_size=2),
       st.sampled_from([[3, 0, 1], [3, -1, 1], [6, 3, 1]]))
@settings(max_examples=30, deadline=None)
def test_symmetric_plants_are_integral_and_recovered(F, R):
    f_list = plant(R, F, 0, 4, 3)  # raises if a value is not integral
    assert all(isinstance(x, int) for f in f_list for x in f.c)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sol = pr_solve(R, f_list, 0)
    for n in range(0, sol.n_s + 1):
        assert LambdaElt(3, [int(x) for x in sol.f_at(n)]) == f_list[n].mod(omega_n(n, 3))

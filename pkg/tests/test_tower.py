from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from padictower.logseries import PSeries, build_l
from padictower.dieudonne import HondaData
from padictower.padic import PadicScalar
from padictower.tower import (
    TowerElement,
    TowerError,
    TowerSpec,
    build_tower,
    elem_arith,
    eval_series,
    trace_down,
)

CYC3 = TowerSpec.cyclotomic(3)
KUM3 = TowerSpec.kummer(3, (-3, 0, 1))


def same(a, b) -> bool:
    return (a - b).is_zero()


@pytest.fixture(scope="module")
def t3():
    return build_tower(CYC3, 4)


@pytest.fixture(scope="module")
def k3():
    return build_tower(KUM3, 2)


def test_level_degrees():
    assert build_tower(CYC3, 2).level_degrees() == [2, 3]
    assert build_tower(TowerSpec.lubin_tate(3, (3, 6)), 3).level_degrees() == [2, 3, 3]


def test_kummer_step_and_total_degree(k3):
    step = k3.step_polynomial(1)
    pi0 = k3.pi(0)
    assert len(step) == 4
    assert same(k3.element(step[0], 0), -pi0)
    assert all(k3.element(c, 0).is_exact_zero() for c in step[1:3])
    assert k3.total_degree[k3.depth(1)] == 6


def test_invalid_specs_rejected():
    with pytest.raises(TowerError):
        build_tower(TowerSpec.lubin_tate(3, (9, 3)), 1)
    with pytest.raises(TowerError):
        build_tower(TowerSpec.lubin_tate(3, (3, 1)), 1)
    with pytest.raises(TowerError):
        build_tower(TowerSpec.kummer(3, (-9, 0, 1)), 1)


def test_pi1_squared(t3):
    pi1 = t3.pi(1)
    assert same(pi1 * pi1, pi1 * -3 - 3)


def test_step_relation_at_level_two(t3):
    pi2 = t3.pi(2)
    assert same(pi2 ** 3 + pi2 ** 2 * 3 + pi2 * 3, t3.pi(1))


def test_add_zero(t3):
    a = t3.pi(2) * 5 + 7
    assert elem_arith("add", a, t3.zero(2)) == a


def test_trace_examples(t3, k3):
    assert same(trace_down(t3.pi(2), 1), t3.scalar(-3, 1))
    c = t3.pi(1) * 2 + 1
    assert same(trace_down(c.lift_to(2), 1), c * 3)
    assert trace_down(k3.pi(1) ** 2, 0).is_exact_zero()


def test_pi_valuations(t3):
    for n in range(1, 5):
        assert t3.pi(n).valuation() == Fraction(1, 2 * 3 ** (n - 1))


def test_eval_series_identity_and_square(t3):
    pi1 = t3.pi(1)
    X = PSeries.polynomial([0, 1], 3)
    assert same(eval_series(X, pi1, 30), pi1)
    sq = PSeries.polynomial([0, 0, Fraction(1, 3)], 3)
    assert same(eval_series(sq, pi1, 30), -pi1 - 1)


def test_eval_l_two_truncations_agree():
    H = HondaData.elliptic(3, 0)
    t = build_tower(CYC3, 2)
    lo = build_l(H, CYC3, 243)
    hi = build_l(H, CYC3, 500)
    a = eval_series(lo, t.pi(2), 10)
    b = eval_series(hi, t.pi(2), 10)
    assert a.precision() >= 10 and b.precision() >= 10
    assert same(a, b)


def test_json_round_trip(t3):
    x = t3.pi(2) * Fraction(2, 3) + t3.pi(1) * 4
    assert TowerElement.from_json(x.to_json(), t3) == x
    assert TowerSpec.from_json(CYC3.to_json()) == CYC3
    assert TowerSpec.from_json({"kind": "kummer", "p": 3, "g": [-3, 0, 1]}) == KUM3


@st.composite
def elements(draw, tower, level):
    n = tower.total_degree[tower.depth(level)]
    cs = draw(st.lists(st.integers(-50, 50), min_size=n, max_size=n))
    return tower.from_flat(cs, level)


_T4 = build_tower(CYC3, 4, K=30)


@given(st.data())
@settings(max_examples=25, deadline=None)
def test_trace_transitive(data):
    n = data.draw(st.integers(1, 3))
    x = data.draw(elements(_T4, n))
    m = data.draw(st.integers(0, n))
    k = data.draw(st.integers(0, m))
    assert same(trace_down(x, k), trace_down(trace_down(x, m), k))


@given(st.data())
@settings(max_examples=25, deadline=None)
def test_trace_base_linear(data):
    n = data.draw(st.integers(2, 3))
    x = data.draw(elements(_T4, n))
    c = data.draw(elements(_T4, n - 1))
    assert same(trace_down(c * x, n - 1), c * trace_down(x, n - 1))


@given(st.data())
@settings(max_examples=25, deadline=None)
def test_trace_of_lower_element(data):
    n = data.draw(st.integers(1, 3))
    c = data.draw(elements(_T4, n - 1))
    assert same(trace_down(c.lift_to(n), n - 1), c * _T4.level_degree(n))


def test_scalar_precision_is_capped():
    t = build_tower(CYC3, 1, K=10)
    x = t.scalar(PadicScalar.from_rational(2, 3, 5), 1)
    assert x.precision() == 5

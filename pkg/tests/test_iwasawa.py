import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from padictower.iwasawa import (
    InexactDivision,
    LambdaElt,
    LambdaMat,
    RecurrenceViolation,
    SharpFlatInput,
    backward_step,
    content_valuation,
    ddr_check,
    exact_divide,
    forward_step,
    omega_n,
    phi_n,
    rank_bound,
    recurrence_check,
    reduce_mod_phi_content,
    sharpflat_limit,
    synth_generate,
    telescoping_check,
)
from padictower.iwasawa.sharpflat import recurrence_residues


def L(*c, p=3):
    return LambdaElt(p, c)


def test_phi_and_omega_examples():
    assert phi_n(1, 3) == L(3, 3, 1)
    assert phi_n(0, 3) == L(0, 1)
    assert omega_n(1, 2) == L(0, 2, 1, p=2)


@pytest.mark.parametrize("p", [2, 3, 5])
def test_omega_factorization(p):
    for n in range(1, 4):
        assert omega_n(n, p) == phi_n(n, p) * omega_n(n - 1, p)


@pytest.mark.parametrize("p", [2, 3, 5])
def test_phi_divisible_by_p_and_x_power(p):
    for n in range(1, 4):
        low = phi_n(n, p).c[: p ** (n - 1)]
        assert all(x % p == 0 for x in low)


def test_exact_divide_examples():
    Phi = phi_n(1, 3)
    assert exact_divide(Phi * L(1, 1), Phi) == L(1, 1)
    assert exact_divide(omega_n(2, 3), phi_n(2, 3)) == omega_n(1, 3)
    with pytest.raises(InexactDivision, match="inexact division"):
        exact_divide(L(0, 1), Phi)


def test_content_valuation_examples():
    assert content_valuation(L(9, 9)) == 2
    assert reduce_mod_phi_content(L(3, 3, 1), 1) == float("inf")


def test_backward_step_scalar_case():
    p = 3
    A = LambdaMat(p, [[0]])
    Ap = LambdaMat.identity(p, 1)
    Z = LambdaMat(p, [[L(2, 1)]])
    W = LambdaMat(p, [[L(1, 0, 5)]])
    c = Z * phi_n(2, p)
    cp, dp = backward_step(A, Ap, c, W, 2)
    assert cp == W and dp == -Z


def _rand_mat(rng, p, e, deg):
    return LambdaMat(p, [[LambdaElt(p, [rng.randint(-4, 4) for _ in range(deg + 1)]) for _ in range(e)]
                         for _ in range(e)])


@given(st.integers(0, 10 ** 6))
@settings(max_examples=20, deadline=None)
def test_block_inverse_round_trip(seed):
    inp, _ = synth_generate(2, 0, 2, "exact", T=1, seed=seed)
    rng = random.Random(seed)
    c, d = _rand_mat(rng, 3, 2, 3), _rand_mat(rng, 3, 2, 3)
    A, Ap = inp.A[2], inp.A_prime[2]
    assert backward_step(A, Ap, *forward_step(A, Ap, c, d, 2), 2) == (c, d)


def test_block_inverse_identity_e2():
    # M = [[pA, -A'Phi], [I, 0]] and N = Phi det(A') M^{-1} = [[0, Phi det I], [-adj A', adj(A') pA]]
    p = 3
    inp, _ = synth_generate(2, 0, 1, "exact", T=1, seed=11)
    A, Ap = inp.A[1], inp.A_prime[1]
    Phi, det, adj = phi_n(1, p), Ap.det(), Ap.adjugate()
    I, Z = LambdaMat.identity(p, 2), LambdaMat.zero(p, 2)
    M = [[A * p, -(Ap * Phi)], [I, Z]]
    N = [[Z, I * (Phi * det)], [-adj, (adj @ A) * p]]
    for i in range(2):
        for j in range(2):
            block = (M[i][0] @ N[0][j]) + (M[i][1] @ N[1][j])
            assert block == (I * (Phi * det) if i == j else Z)


def test_backward_step_modular_determinant():
    p, K = 3, 12
    A = LambdaMat(p, [[L(1, 2)]])
    Ap = LambdaMat(p, [[L(1, 3)]])  # det = 1 + 3X, a unit but not +-1
    c0, d0 = LambdaMat(p, [[L(2, 0, 1)]]), LambdaMat(p, [[L(1, 1)]])
    c, d = forward_step(A, Ap, c0, d0, 1)
    with pytest.raises(InexactDivision):
        backward_step(A, Ap, c, d, 1)
    cb, db = backward_step(A, Ap, c, d, 1, modulus=p ** K)
    assert cb == c0
    assert db.map(lambda x: x.mod_p_power(K)) == d0.map(lambda x: x.mod_p_power(K))


@pytest.mark.parametrize("e", [1, 2])
def test_exact_round_trip(e):
    inp, planted = synth_generate(e, 0, 4, "exact", T=1, seed=5)
    assert all(r["exact"] for r in recurrence_residues(inp))
    res = sharpflat_limit(inp, 1, 4)
    assert res.L_sharp == planted.L_sharp and res.L_flat == planted.L_flat
    assert res.det_sharp == planted.det_sharp and res.det_flat == planted.det_flat
    assert res.converged


def test_noisy_mode():
    inp, _ = synth_generate(2, 0, 4, "noisy", T=2, seed=9)
    rows = recurrence_residues(inp)
    assert all(r["mod_omega"] for r in rows)
    assert not all(r["exact"] for r in rows)
    res = sharpflat_limit(inp, 1, 4)
    assert res.converged
    for entry in res.convergence:
        assert entry["observed"] == "inf" or entry["observed"] >= entry["required"]
    for n in range(1, 5):
        assert telescoping_check(inp, res.L_sharp, res.L_flat, n)


def test_divisibility_tags():
    inp, _ = synth_generate(2, 0, 3, "exact", T=2, seed=1)
    for i in range(1, 4):
        assert inp.A[i].content_valuation() >= 1
        assert (inp.A_prime[i] - LambdaMat.identity(3, 2)).content_valuation() >= 2
        assert inp.A_prime[i].det() == 1


def test_recurrence_violation_reported():
    inp, _ = synth_generate(1, 0, 3, "exact", seed=2)
    R = dict(inp.R)
    R[3] = R[3] + LambdaMat(3, [[1]])
    bad = SharpFlatInput(inp.p, inp.e, inp.N, inp.A, inp.A_prime, R, inp.T)
    assert recurrence_check(bad) == 2
    with pytest.raises(RecurrenceViolation) as exc:
        sharpflat_limit(bad, 1, 3)
    assert exc.value.n == 2


def test_parallel_matches_sequential():
    inp, _ = synth_generate(2, 0, 4, "noisy", seed=4)
    a = sharpflat_limit(inp, 1, 4).to_json()
    b = sharpflat_limit(inp, 1, 4, parallel=True).to_json()
    assert a == b


def test_input_json_round_trip():
    inp, _ = synth_generate(2, 1, 3, "noisy", T=2, seed=3)
    again = SharpFlatInput.from_json(inp.to_json())
    assert again == inp
    with pytest.raises(ValueError):
        SharpFlatInput.from_json(dict(inp.to_json(), schema="other"))


def test_rank_bound_examples():
    assert rank_bound(Fraction(1, 2), 2, 3, 4) == 144
    assert rank_bound(0, 2, 3, 4) == 0
    assert rank_bound(0, 2, 3, 4, C=7) == 7
    assert rank_bound(Fraction(1, 2), 1, 2, 2) == 2


@given(st.fractions(0, Fraction(19, 20), max_denominator=20), st.integers(1, 8), st.integers(0, 5))
def test_rank_bound_monotone(lam, n, C):
    assert rank_bound(lam, 2, 3, n + 1, C) >= rank_bound(lam, 2, 3, n, C)
    assert rank_bound(lam, 2, 3, n, C + 1) >= rank_bound(lam, 2, 3, n, C)


def test_ddr_truth_table():
    assert ddr_check(3, 1, 2, 3) is True
    assert ddr_check(2, 1, 2, 3) is False
    assert ddr_check(Fraction(5, 2), 1, 2, 3) is False


def test_noisy_deeper_certificate():
    inp, _ = synth_generate(1, 0, 6, "noisy", T=1, seed=3)
    res = sharpflat_limit(inp, 1, 6)
    assert any(entry["required"] > 0 for entry in res.convergence)
    assert res.converged

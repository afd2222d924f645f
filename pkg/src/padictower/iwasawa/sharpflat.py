"""
Sharp/flat limits of backward block-matrix products.

The forward matrix at index ``i`` is

    M_i = [[p A_{N+i}, -A'_{N+i} Phi_i],
           [I,          0            ]]

acting on stacked pairs ``(c, d)`` of e x e matrices, and the data satisfy
``R_{N+i+1} = p A_{N+i} R_{N+i} - A'_{N+i} Phi_i R_{N+i-1}`` modulo
``omega_i``.  The inverse of ``M_i`` is

    (c, d) -> (d, Phi_i^{-1} A'^{-1} (-c + p A d)),

and the partial product at depth ``n`` is ``M_1^{-1} ... M_n^{-1}`` applied
to ``(R_{N+n+1}, R_{N+n})``.  Successive partial products agree modulo
``(p^{floor(n/2) - i}, X^{p^{i-1}})``; the limit is ``(L_sharp, L_flat)``.
"""
from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from ..padic import INF
from .lambda_ring import InexactDivision, LambdaElt, LambdaMat, exact_divide, omega_n, phi_n

INPUT_SCHEMA = "padictower/sharpflat-input/v1"
RESULT_SCHEMA = "padictower/sharpflat-result/v1"


class RecurrenceViolation(ValueError):
    """The recurrence congruence fails at some index."""

    def __init__(self, n: int):
        super().__init__(f"recurrence congruence violated at n = {n}")
        self.n = n


@dataclass(frozen=True)
class SharpFlatInput:
    """``A[i] = A_{N+i}``, ``A_prime[i] = A'_{N+i}`` and ``R[k] = R_{N+k}``."""

    p: int
    e: int
    N: int
    A: dict
    A_prime: dict
    R: dict
    T: int | None = None

    def max_depth(self) -> int:
        n = 0
        while (n + 1) in self.A and (n + 1) in self.A_prime and (n + 2) in self.R and (n + 1) in self.R:
            n += 1
        return n

    def to_json(self) -> dict:
        out = {
            "schema": INPUT_SCHEMA,
            "p": self.p,
            "e": self.e,
            "N": self.N,
            "A": {str(k): v.to_json() for k, v in sorted(self.A.items())},
            "A_prime": {str(k): v.to_json() for k, v in sorted(self.A_prime.items())},
            "R": {str(k): v.to_json() for k, v in sorted(self.R.items())},
        }
        if self.T is not None:
            out["T"] = self.T
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "SharpFlatInput":
        if obj.get("schema") != INPUT_SCHEMA:
            raise ValueError(f"expected schema {INPUT_SCHEMA!r}, got {obj.get('schema')!r}")
        p, e = int(obj["p"]), int(obj["e"])

        def mats(block):
            out = {}
            for k, v in block.items():
                m = LambdaMat.from_json(p, v)
                if m.e != e:
                    raise ValueError(f"matrix {k} is {m.e}x{m.e}, expected {e}x{e}")
                out[int(k)] = m
            return out

        return cls(p, e, int(obj["N"]), mats(obj["A"]), mats(obj["A_prime"]), mats(obj["R"]), obj.get("T"))


@dataclass(frozen=True)
class SharpFlatResult:
    L_sharp: LambdaMat
    L_flat: LambdaMat
    det_sharp: LambdaElt
    det_flat: LambdaElt
    depth: int
    convergence: list = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return all(entry["ok"] for entry in self.convergence)

    def to_json(self) -> dict:
        return {
            "schema": RESULT_SCHEMA,
            "depth": self.depth,
            "L_sharp": self.L_sharp.to_json(),
            "L_flat": self.L_flat.to_json(),
            "det_sharp": self.det_sharp.to_json(),
            "det_flat": self.det_flat.to_json(),
            "convergence": self.convergence,
            "converged": self.converged,
        }


def forward_step(A: LambdaMat, Ap: LambdaMat, c: LambdaMat, d: LambdaMat, i: int):
    """``M_i (c, d) = (p A c - A' Phi_i d, c)``."""
    p = A.p
    return (A @ c) * p - (Ap @ d) * phi_n(i, p), c


def _det_inverse_mod(det: LambdaElt, modulus: int, n_terms: int) -> LambdaElt:
    """Inverse of ``det = u + p h`` (``u`` a unit) modulo ``modulus = p^K``.

    Uses ``det^{-1} = u^{-1} sum_k (-p h / u)^k``; the series terminates
    modulo ``p^K`` after ``K`` terms.  Degrees are not truncated here, so the
    result is only meaningful when the caller later reduces by a polynomial.
    """
    p = det.p
    u = det.coeff(0)
    if u % p == 0:
        raise ValueError("determinant is not a unit in Lambda")
    uinv = pow(u, -1, modulus)
    h = (det - u) * uinv
    if any(x % p for x in h.c):
        raise ValueError("determinant is not congruent to a constant modulo p")
    term = LambdaElt(p, (1,))
    total = LambdaElt(p, (1,))
    for _ in range(n_terms):
        term = LambdaElt(p, [x % modulus for x in (term * (-h)).c])
        if term.is_zero():
            break
        total = total + term
    return LambdaElt(p, [x * uinv % modulus for x in total.c])


def backward_step(A: LambdaMat, Ap: LambdaMat, c: LambdaMat, d: LambdaMat, i: int,
                  modulus: int | None = None):
    """``M_i^{-1} (c, d) = (d, Phi_i^{-1} A'^{-1} (-c + p A d))``.

    ``A'^{-1}`` is ``adj(A') / det(A')``.  The division by ``Phi_i`` is exact
    over Z.  When ``det(A') = +-1`` everything stays exact; otherwise
    ``modulus = p^K`` must be given and the determinant is inverted modulo
    ``p^K``.
    """
    p = A.p
    v = (A @ d) * p - c
    w = Ap.adjugate() @ v
    Phi = phi_n(i, p)
    q = w.map(lambda x: exact_divide(x, Phi))
    det = Ap.det()
    if det == 1:
        return d, q
    if det == -1:
        return d, -q
    if modulus is None:
        # try an exact division over Z before giving up
        if det.degree == 0:
            k = det.coeff(0)
            if all(x % k == 0 for r in q.rows for y in r for x in y.c):
                return d, q.map(lambda y: LambdaElt(p, [x // k for x in y.c]))
        raise InexactDivision("det(A') is not +-1; supply a modulus p^K")
    K = 0
    m = modulus
    while m % p == 0:
        m //= p
        K += 1
    inv = _det_inverse_mod(det, modulus, K)
    return d, q.map(lambda y: LambdaElt(p, [x % modulus for x in (y * inv).c]))


def partial_product(inp: SharpFlatInput, n: int, modulus: int | None = None):
    """``M_1^{-1} ... M_n^{-1} (R_{N+n+1}, R_{N+n})``."""
    c, d = inp.R[n + 1], inp.R[n]
    for i in range(n, 0, -1):
        c, d = backward_step(inp.A[i], inp.A_prime[i], c, d, i, modulus)
    return c, d


def recurrence_residues(inp: SharpFlatInput) -> list[dict]:
    """For each available ``n``: is the recurrence exact, and does it hold mod ``omega_n``?"""
    out = []
    n = 1
    p = inp.p
    while n in inp.A and n in inp.A_prime and (n + 1) in inp.R and n in inp.R and (n - 1) in inp.R:
        diff = inp.R[n + 1] - ((inp.A[n] @ inp.R[n]) * p - (inp.A_prime[n] @ inp.R[n - 1]) * phi_n(n, p))
        out.append({"n": n, "exact": diff.is_zero(), "mod_omega": diff.mod(omega_n(n, p)).is_zero()})
        n += 1
    return out


def recurrence_check(inp: SharpFlatInput) -> int | None:
    """First ``n`` at which the congruence fails, or ``None``."""
    for entry in recurrence_residues(inp):
        if not entry["mod_omega"]:
            return entry["n"]
    return None


def _pp_worker(args):
    inp, n, modulus = args
    return partial_product(inp, n, modulus)


def _observed(diff_c: LambdaMat, diff_d: LambdaMat, i: int, p: int):
    n = p ** (i - 1)
    return min(diff_c.low_valuation(n), diff_d.low_valuation(n))


def sharpflat_limit(inp: SharpFlatInput, n_lo: int, n_hi: int, modulus: int | None = None,
                    parallel: bool = False) -> SharpFlatResult:
    """Partial products for ``n_lo..n_hi`` with the convergence certificate.

    For every pair ``n < m`` in range and ``i = 1..floor(n/2)`` the log
    records the exact ``p``-divisibility of the difference of the two partial
    products modulo ``X^{p^{i-1}}``, next to the required ``floor(n/2) - i``.
    """
    if not 1 <= n_lo <= n_hi:
        raise ValueError("need 1 <= n_lo <= n_hi")
    if n_hi > inp.max_depth():
        raise ValueError(f"input supports depth up to {inp.max_depth()}, asked for {n_hi}")
    bad = recurrence_check(inp)
    if bad is not None and bad <= n_hi + 1:
        raise RecurrenceViolation(bad)
    depths = list(range(n_lo, n_hi + 1))
    if parallel and len(depths) > 1:
        with ProcessPoolExecutor() as pool:
            prods = list(pool.map(_pp_worker, [(inp, n, modulus) for n in depths]))
    else:
        prods = [partial_product(inp, n, modulus) for n in depths]
    by_n = dict(zip(depths, prods))
    log = []
    for n in depths:
        for m in depths:
            if m <= n:
                continue
            dc = by_n[m][0] - by_n[n][0]
            dd = by_n[m][1] - by_n[n][1]
            for i in range(1, n // 2 + 1):
                obs = _observed(dc, dd, i, inp.p)
                req = n // 2 - i
                log.append({"n": n, "m": m, "i": i, "required": req,
                            "observed": "inf" if obs == INF else obs, "ok": obs >= req})
    Ls, Lf = by_n[n_hi]
    return SharpFlatResult(Ls, Lf, Ls.det(), Lf.det(), n_hi, log)


def telescoping_check(inp: SharpFlatInput, L_sharp: LambdaMat, L_flat: LambdaMat, n: int) -> bool:
    """Forward matrices ``M_1..M_{n-1}`` take the limit to ``(R_{N+n}, R_{N+n-1})``
    modulo ``(omega_n, omega_{n-1})``."""
    p = inp.p
    c, d = L_sharp, L_flat
    for k in range(1, n):
        c, d = forward_step(inp.A[k], inp.A_prime[k], c, d, k)
    return (c - inp.R[n]).mod(omega_n(n, p)).is_zero() and (d - inp.R[n - 1]).mod(omega_n(n - 1, p)).is_zero()


# -- synthetic data -----------------------------------------------------

def _rand_poly(rng: random.Random, p: int, deg: int, lo: int, hi: int) -> LambdaElt:
    return LambdaElt(p, [rng.randint(lo, hi) for _ in range(deg + 1)])


def _rand_mat(rng, p, e, deg, lo, hi) -> LambdaMat:
    return LambdaMat(p, [[_rand_poly(rng, p, deg, lo, hi) for _ in range(e)] for _ in range(e)])


def _unipotent(rng, p, e, T, deg, upper: bool) -> LambdaMat:
    rows = []
    pT = p ** T
    for i in range(e):
        row = []
        for j in range(e):
            if i == j:
                row.append(LambdaElt(p, (1,)))
            elif (j > i) == upper:
                row.append(_rand_poly(rng, p, deg, -p, p) * pT)
            else:
                row.append(LambdaElt(p))
        rows.append(row)
    return LambdaMat(p, rows)


@dataclass(frozen=True)
class Planted:
    L_sharp: LambdaMat
    L_flat: LambdaMat

    @property
    def det_sharp(self) -> LambdaElt:
        return self.L_sharp.det()

    @property
    def det_flat(self) -> LambdaElt:
        return self.L_flat.det()


def synth_generate(e: int, N: int, depth: int, mode: str = "exact", T: int = 1, seed: int = 0,
                   p: int = 3, deg_L: int = 3, deg_A: int = 2) -> tuple[SharpFlatInput, Planted]:
    """Random input whose limit is a planted pair ``(L_sharp, L_flat)``.

    ``A_{N+i}`` is divisible by ``p^{T-1}``; ``A'_{N+i}`` is a product of an
    upper and a lower unipotent matrix with off-diagonal entries divisible by
    ``p^T``, so ``A' = I mod p^T`` and ``det A' = 1``.  ``R_N = L_flat``,
    ``R_{N+1} = L_sharp`` and the rest follow the forward recurrence.  In
    ``noisy`` mode every ``R_{N+k}`` gets an extra ``omega_k`` multiple.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    if mode not in ("exact", "noisy"):
        raise ValueError("mode must be 'exact' or 'noisy'")
    rng = random.Random(seed)
    pT1 = p ** (T - 1)
    A, Ap = {}, {}
    for i in range(1, depth + 1):
        A[i] = _rand_mat(rng, p, e, deg_A, -p, p) * pT1
        Ap[i] = _unipotent(rng, p, e, T, deg_A, True) @ _unipotent(rng, p, e, T, deg_A, False)
    Ls = _rand_mat(rng, p, e, deg_L, -p * p, p * p)
    Lf = _rand_mat(rng, p, e, deg_L, -p * p, p * p)
    R = {0: Lf, 1: Ls}
    for i in range(1, depth + 1):
        R[i + 1], _ = forward_step(A[i], Ap[i], R[i], R[i - 1], i)
    if mode == "noisy":
        for k in range(0, depth + 2):
            noise = _rand_mat(rng, p, e, 2, -p, p)
            R[k] = R[k] + noise * omega_n(k, p)
    return SharpFlatInput(p, e, N, A, Ap, R, T), Planted(Ls, Lf)

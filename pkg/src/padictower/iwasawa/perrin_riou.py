"""
Solving ``f^{(n)} = sum_alpha f_alpha alpha^{n+1}`` for sequences that obey
a linear recurrence modulo ``omega_n``.

The roots ``alpha`` of ``R`` are never computed.  All of them are handled at
once in the ring ``A = Q[t]/(R(t))``: ``t`` plays the role of a generic root
and ``Tr_{A/Q}`` sums over the roots.  If ``R(T)/(T - t) = sum_j q_j(t) T^j``
then ``Tr(q_j(t) t^k / R'(t)) = delta_{jk}`` for ``0 <= j, k < d`` (Euler),
so

    F = (t^{n_s+1} R'(t))^{-1} sum_j y_j q_j(t)

satisfies ``Tr(F t^{n_s+1+k}) = y_k`` for the last ``d`` data ``y_k``.  The
solution is an element of ``A[X]``; its coordinates in the basis
``1, t, ..., t^{d-1}`` are rational polynomials in ``X``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from fractions import Fraction

from ..dieudonne import newton_slopes
from ..padic import INF, rational_valuation
from .lambda_ring import LambdaElt, omega_n


class RecurrenceError(ValueError):
    def __init__(self, n: int):
        super().__init__(f"recurrence congruence fails at n = {n}")
        self.n = n


class VandermondeError(ValueError):
    pass


class QuotientRing:
    """``Q[t]/(R)`` for a monic integer polynomial ``R`` (constant first)."""

    def __init__(self, R):
        R = [Fraction(c) for c in R]
        if R[-1] != 1:
            raise ValueError("R must be monic")
        self.R = R
        self.d = len(R) - 1
        if self.d < 1:
            raise ValueError("R must have degree >= 1")
        self._psums = None

    def zero(self):
        return (Fraction(0),) * self.d

    def one(self):
        return (Fraction(1),) + (Fraction(0),) * (self.d - 1)

    def t_power(self, k: int):
        out = self.one()
        base = self.reduce([Fraction(0), Fraction(1)])
        while k:
            if k & 1:
                out = self.mul(out, base)
            k >>= 1
            if k:
                base = self.mul(base, base)
        return out

    def reduce(self, poly):
        c = [Fraction(x) for x in poly]
        d = self.d
        for k in range(len(c) - 1, d - 1, -1):
            top = c[k]
            if top:
                for i in range(d):
                    c[k - d + i] -= top * self.R[i]
        c = c[:d] + [Fraction(0)] * max(0, d - len(c))
        return tuple(c)

    def add(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def scale(self, a, k):
        return tuple(x * k for x in a)

    def mul(self, a, b):
        prod = [Fraction(0)] * (2 * self.d - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    prod[i + j] += x * y
        return self.reduce(prod)

    def mult_matrix(self, a):
        """Matrix of multiplication by ``a`` (columns are images of ``t^j``)."""
        cols = [self.mul(a, self.reduce([0] * j + [1])) for j in range(self.d)]
        return [[cols[j][i] for j in range(self.d)] for i in range(self.d)]

    def inverse(self, a):
        """Solve ``a x = 1`` by Gaussian elimination over Q."""
        M = self.mult_matrix(a)
        d = self.d
        aug = [row[:] + [Fraction(1 if i == 0 else 0)] for i, row in enumerate(M)]
        for col in range(d):
            piv = next((r for r in range(col, d) if aug[r][col] != 0), None)
            if piv is None:
                raise ZeroDivisionError("element is not invertible in Q[t]/(R)")
            aug[col], aug[piv] = aug[piv], aug[col]
            pv = aug[col][col]
            aug[col] = [x / pv for x in aug[col]]
            for r in range(d):
                if r != col and aug[r][col] != 0:
                    f = aug[r][col]
                    aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
        return tuple(aug[i][d] for i in range(d))

    def norm(self, a) -> Fraction:
        M = [row[:] for row in self.mult_matrix(a)]
        d = self.d
        det = Fraction(1)
        for col in range(d):
            piv = next((r for r in range(col, d) if M[r][col] != 0), None)
            if piv is None:
                return Fraction(0)
            if piv != col:
                M[col], M[piv] = M[piv], M[col]
                det = -det
            det *= M[col][col]
            for r in range(col + 1, d):
                f = M[r][col] / M[col][col]
                if f:
                    M[r] = [x - f * y for x, y in zip(M[r], M[col])]
        return det

    def power_sums(self, upto: int) -> list[Fraction]:
        """``Tr(t^k)`` for ``k = 0..upto`` by Newton's identities and the recurrence."""
        d = self.d
        c = self.R  # t^d = -(c_{d-1} t^{d-1} + ... + c_0)
        s = [Fraction(d)]
        for k in range(1, upto + 1):
            if k <= d:
                acc = -k * c[d - k]
                for i in range(1, k):
                    acc -= c[d - i] * s[k - i]
            else:
                acc = Fraction(0)
                for i in range(1, d + 1):
                    acc -= c[d - i] * s[k - i]
            s.append(acc)
        return s

    def trace(self, a) -> Fraction:
        s = self.power_sums(self.d - 1)
        return sum(x * y for x, y in zip(a, s))

    def derivative_at_t(self):
        return self.reduce([k * self.R[k] for k in range(1, self.d + 1)])

    def lagrange_q(self):
        """``q_j(t)`` with ``R(T)/(T - t) = sum_j q_j(t) T^j``."""
        d = self.d
        q = [None] * d
        q[d - 1] = self.one()
        t = self.reduce([0, 1])
        for j in range(d - 1, 0, -1):
            q[j - 1] = self.add(self.mul(t, q[j]), self.scale(self.one(), self.R[j]))
        return q


def _poly_mod_omega(coeffs, n: int, p: int):
    """Remainder of a rational polynomial modulo ``omega_n`` (monic, integral)."""
    w = omega_n(n, p).c
    dw = len(w) - 1
    c = [Fraction(x) for x in coeffs]
    for k in range(len(c) - 1, dw - 1, -1):
        top = c[k]
        if top:
            for i in range(dw + 1):
                c[k - dw + i] -= top * w[i]
    c = c[:dw]
    while c and c[-1] == 0:
        c.pop()
    return c


@dataclass(frozen=True)
class PRSolution:
    """``F = sum_k F[k](X) t^k`` in ``A[X]``, known modulo ``omega_{n_s}``."""

    ring: QuotientRing
    p: int
    n0: int
    n_s: int
    F: tuple
    slopes: list
    growth_condition_ok: bool
    inverse_valuation: object
    discriminant_valuation: object
    report: dict = field(default_factory=dict)

    def f_at(self, n: int) -> list[Fraction]:
        """``Tr(F t^{n+1}) mod omega_n`` (valid for ``n <= n_s``)."""
        d = self.ring.d
        s = self.ring.power_sums(n + d + 1)
        width = max((len(f) for f in self.F), default=0)
        out = [Fraction(0)] * width
        for k, Fk in enumerate(self.F):
            sk = s[n + 1 + k] if n + 1 + k < len(s) else self.ring.trace(self.ring.t_power(n + 1 + k))
            for m, x in enumerate(Fk):
                out[m] += x * sk
        return _poly_mod_omega(out, n, self.p)

    def reduced(self, n: int) -> tuple:
        """Coordinates of ``F`` reduced modulo ``omega_n``."""
        return tuple(tuple(_poly_mod_omega(Fk, n, self.p)) for Fk in self.F)

    def to_json(self) -> dict:
        def q(x):
            return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"

        def v(x):
            return "inf" if x == INF else (x if not isinstance(x, Fraction) else q(x))

        return {
            "R": [q(c) for c in self.ring.R],
            "n0": self.n0,
            "common_modulus_index": self.n_s,
            "F": [[q(x) for x in Fk] for Fk in self.F],
            "slopes": [[q(s) if s != INF else "inf", m] for s, m in self.slopes],
            "growth_condition_ok": self.growth_condition_ok,
            "inverse_valuation": v(self.inverse_valuation),
            "discriminant_valuation": v(self.discriminant_valuation),
        }


def check_recurrence(R, f_list, n0: int, p: int) -> int | None:
    """First ``n`` with ``sum_k a_k f^{(n+k)} != 0 mod omega_n``, else ``None``."""
    d = len(R) - 1
    for idx in range(len(f_list) - d):
        n = n0 + idx
        acc = LambdaElt(p)
        for k, a in enumerate(R):
            a = Fraction(a)
            if a.denominator != 1:
                raise ValueError("R must have integer coefficients")
            acc = acc + f_list[idx + k] * int(a)
        if not acc.mod(omega_n(n, p)).is_zero():
            return n
    return None


def pr_solve(R, f_list, n0: int, p: int | None = None, K: int | None = None) -> PRSolution:
    """Recover the ``f_alpha`` from ``f^{(n0)}, ..., f^{(n1)}``.

    ``R`` is a monic integer polynomial (constant term first) with simple,
    nonzero roots.  ``f_list`` holds LambdaElt values for consecutive ``n``.
    The slope condition ``0 <= v(alpha) < 1`` is reported, not enforced.
    With ``K`` given, a discriminant of valuation above ``K`` is rejected.
    """
    if not f_list:
        raise ValueError("f_list is empty")
    p = p if p is not None else f_list[0].p
    ring = QuotientRing(R)
    d = ring.d
    if len(f_list) < d:
        raise ValueError(f"need at least d = {d} values")
    if ring.R[0] == 0:
        raise VandermondeError("R(0) = 0: roots must be nonzero")
    dR = ring.derivative_at_t()
    disc = ring.norm(dR)
    if disc == 0:
        raise VandermondeError("R has a repeated root")
    disc_val = rational_valuation(disc, p)
    if K is not None and disc_val > K:
        raise VandermondeError(f"Vandermonde determinant has valuation {disc_val} > requested precision {K}")
    bad = check_recurrence(R, f_list, n0, p)
    if bad is not None:
        raise RecurrenceError(bad)
    slopes = newton_slopes(list(ring.R), p)
    growth_ok = all(s != INF and 0 <= s < 1 for s, _ in slopes)
    if not growth_ok:
        warnings.warn("some root of R has valuation outside [0, 1)", stacklevel=2)
    n1 = n0 + len(f_list) - 1
    n_s = n1 - d + 1
    ys = [_poly_mod_omega(f_list[n_s - n0 + j].c, n_s, p) for j in range(d)]
    inv = ring.inverse(ring.mul(ring.t_power(n_s + 1), dR))
    qs = ring.lagrange_q()
    # G = sum_j y_j(X) q_j(t), coordinates indexed [t-power][X-degree]
    width = max((len(y) for y in ys), default=0)
    G = [[Fraction(0)] * width for _ in range(d)]
    for y, qj in zip(ys, qs):
        for k in range(d):
            if qj[k]:
                for m, x in enumerate(y):
                    G[k][m] += qj[k] * x
    F = [[Fraction(0)] * width for _ in range(d)]
    for m in range(width):
        col = ring.mul(inv, tuple(G[k][m] for k in range(d)))
        for k in range(d):
            F[k][m] = col[k]
    F = tuple(tuple(_poly_mod_omega(Fk, n_s, p)) for Fk in F)
    inv_val = min((rational_valuation(x, p) for x in inv if x), default=INF)
    return PRSolution(ring, p, n0, n_s, F, slopes, growth_ok, inv_val, disc_val)


def plant(R, F, n0: int, n1: int, p: int) -> list[LambdaElt]:
    """Forward data ``f^{(n)} = Tr(F t^{n+1})`` for ``n = n0..n1``.

    ``F`` lists the ``t``-coordinates as integer polynomials in ``X``, so the
    planted family is Galois-stable and every ``f^{(n)}`` is integral.
    """
    ring = QuotientRing(R)
    d = ring.d
    s = ring.power_sums(n1 + d + 1)
    out = []
    for n in range(n0, n1 + 1):
        width = max((len(Fk) for Fk in F), default=0)
        acc = [Fraction(0)] * width
        for k, Fk in enumerate(F):
            for m, x in enumerate(Fk):
                acc[m] += Fraction(x) * s[n + 1 + k]
        if any(x.denominator != 1 for x in acc):
            raise ValueError("planted data is not integral")
        out.append(LambdaElt(p, [int(x) for x in acc]))
    return out

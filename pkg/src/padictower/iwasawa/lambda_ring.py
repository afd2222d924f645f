"""
Polynomials and matrices over the Iwasawa algebra Lambda = Z_p[[X]].

Elements are integer polynomials with exact coefficients; nothing is
truncated unless asked for, so divisions by the monic polynomials
``Phi_n`` and ``omega_n`` are exact operations that either succeed or
report a nonzero remainder.
"""
from __future__ import annotations

import itertools
import math
from functools import lru_cache

from ..padic import INF, int_valuation


class InexactDivision(ArithmeticError):
    """Division left a nonzero remainder."""

    def __init__(self, msg: str = "inexact division"):
        super().__init__(msg)


def _trim(c) -> tuple:
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


class LambdaElt:
    """Integer polynomial in ``X`` viewed in ``Z_p[[X]]``."""

    __slots__ = ("p", "c")

    def __init__(self, p: int, coeffs=()):
        self.p = p
        self.c = _trim(int(x) for x in coeffs)

    @classmethod
    def const(cls, p: int, a: int) -> "LambdaElt":
        return cls(p, (a,))

    @classmethod
    def X(cls, p: int) -> "LambdaElt":
        return cls(p, (0, 1))

    @property
    def degree(self) -> int:
        return len(self.c) - 1

    def is_zero(self) -> bool:
        return not self.c

    def coeff(self, k: int) -> int:
        return self.c[k] if 0 <= k < len(self.c) else 0

    def _wrap(self, other):
        if isinstance(other, LambdaElt):
            if other.p != self.p:
                raise ValueError("prime mismatch")
            return other
        if isinstance(other, int):
            return LambdaElt(self.p, (other,))
        return NotImplemented

    def __add__(self, other):
        o = self._wrap(other)
        if o is NotImplemented:
            return o
        a, b = self.c, o.c
        if len(a) < len(b):
            a, b = b, a
        return LambdaElt(self.p, [x + y for x, y in zip(a, b)] + list(a[len(b):]))

    __radd__ = __add__

    def __neg__(self):
        return LambdaElt(self.p, [-x for x in self.c])

    def __sub__(self, other):
        o = self._wrap(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return LambdaElt(self.p, [other * x for x in self.c]) if other else LambdaElt(self.p)
        o = self._wrap(other)
        if o is NotImplemented:
            return o
        a, b = self.c, o.c
        if not a or not b:
            return LambdaElt(self.p)
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return LambdaElt(self.p, out)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, int):
            other = LambdaElt(self.p, (other,))
        if not isinstance(other, LambdaElt):
            return NotImplemented
        return self.p == other.p and self.c == other.c

    def __hash__(self):
        return hash((self.p, self.c))

    def __repr__(self):
        return f"LambdaElt(p={self.p}, {list(self.c)})"

    def truncate(self, n: int) -> "LambdaElt":
        """Reduce modulo ``X^n``."""
        return LambdaElt(self.p, self.c[:n])

    def mod_p_power(self, k: int) -> "LambdaElt":
        m = self.p ** k
        return LambdaElt(self.p, [x % m for x in self.c])

    def divmod(self, g: "LambdaElt", modulus: int | None = None):
        """Quotient and remainder by ``g``.

        Over Z the leading coefficient of ``g`` must be +-1.  With
        ``modulus = p^K`` any unit leading coefficient is allowed and all
        coefficients are reduced modulo ``p^K``.
        """
        if g.is_zero():
            raise ZeroDivisionError("division by zero in Lambda")
        lead = g.c[-1]
        if modulus is None:
            if lead not in (1, -1):
                raise ValueError("divisor must be monic up to sign; pass a modulus p^K for other unit leads")
            inv = lead
        else:
            if lead % self.p == 0:
                raise ValueError("leading coefficient of the divisor is not a unit")
            inv = pow(lead, -1, modulus)
        r = list(self.c) if modulus is None else [x % modulus for x in self.c]
        dg = g.degree
        if len(r) - 1 < dg:
            return LambdaElt(self.p), LambdaElt(self.p, r)
        q = [0] * (len(r) - dg)
        gc = g.c
        for k in range(len(r) - 1 - dg, -1, -1):
            t = r[k + dg] * inv
            if modulus is not None:
                t %= modulus
            if t:
                q[k] = t
                for i, y in enumerate(gc):
                    r[k + i] -= t * y
                if modulus is not None:
                    for i in range(dg + 1):
                        r[k + i] %= modulus
        return LambdaElt(self.p, q), LambdaElt(self.p, r[:dg])

    def mod(self, g: "LambdaElt", modulus: int | None = None) -> "LambdaElt":
        return self.divmod(g, modulus)[1]

    def content_valuation(self):
        """Largest ``k`` with ``p^k`` dividing every coefficient (``inf`` for 0)."""
        return min((int_valuation(x, self.p) for x in self.c if x), default=INF)

    def low_valuation(self, n: int):
        """Content valuation of the part of degree < n."""
        return self.truncate(n).content_valuation()

    def to_json(self) -> list:
        return list(self.c)

    @classmethod
    def from_json(cls, p: int, obj) -> "LambdaElt":
        return cls(p, obj)


@lru_cache(maxsize=256)
def omega_n(n: int, p: int) -> LambdaElt:
    """``(1 + X)^{p^n} - 1``."""
    if n < 0:
        raise ValueError("n must be >= 0")
    N = p ** n
    return LambdaElt(p, [0] + [math.comb(N, k) for k in range(1, N + 1)])


@lru_cache(maxsize=256)
def phi_n(n: int, p: int) -> LambdaElt:
    """``Phi_0 = X`` and ``Phi_n = omega_n / omega_{n-1}`` for n >= 1."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return LambdaElt.X(p)
    return exact_divide(omega_n(n, p), omega_n(n - 1, p))


def exact_divide(f: LambdaElt, g: LambdaElt, modulus: int | None = None) -> LambdaElt:
    """Quotient ``f / g``; raises :class:`InexactDivision` on a nonzero remainder."""
    q, r = f.divmod(g, modulus)
    if not r.is_zero():
        raise InexactDivision("inexact division")
    return q


def content_valuation(f) -> int | float:
    """Content valuation of a LambdaElt or LambdaMat."""
    return f.content_valuation()


def reduce_mod_phi_content(f: LambdaElt, n: int) -> int | float:
    """Content valuation of ``f mod Phi_n``.

    Stands in for the valuation of ``f(zeta_{p^n} - 1)``: the residue class
    lives in ``Lambda / Phi_n``, whose elements are read off in the basis
    ``1, X, ..., X^{deg Phi_n - 1}``.
    """
    return f.mod(phi_n(n, f.p)).content_valuation()


class LambdaMat:
    """Square matrix over Lambda, stored as a tuple of rows."""

    __slots__ = ("p", "rows")

    def __init__(self, p: int, rows):
        rows = tuple(tuple(x if isinstance(x, LambdaElt) else LambdaElt(p, x if isinstance(x, (list, tuple)) else (x,))
                           for x in r) for r in rows)
        if any(len(r) != len(rows) for r in rows):
            raise ValueError("LambdaMat must be square")
        self.p = p
        self.rows = rows

    @property
    def e(self) -> int:
        return len(self.rows)

    @classmethod
    def identity(cls, p: int, e: int) -> "LambdaMat":
        return cls(p, [[1 if i == j else 0 for j in range(e)] for i in range(e)])

    @classmethod
    def zero(cls, p: int, e: int) -> "LambdaMat":
        return cls(p, [[0] * e for _ in range(e)])

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def map(self, fn) -> "LambdaMat":
        return LambdaMat(self.p, [[fn(x) for x in r] for r in self.rows])

    def __add__(self, other: "LambdaMat"):
        return LambdaMat(self.p, [[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __sub__(self, other: "LambdaMat"):
        return LambdaMat(self.p, [[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)])

    def __neg__(self):
        return self.map(lambda x: -x)

    def __mul__(self, k):
        """Multiply every entry by an integer or a LambdaElt."""
        return self.map(lambda x: x * k)

    __rmul__ = __mul__

    def __matmul__(self, other: "LambdaMat"):
        e = self.e
        out = []
        for i in range(e):
            row = []
            for j in range(e):
                acc = LambdaElt(self.p)
                for k in range(e):
                    a, b = self.rows[i][k], other.rows[k][j]
                    if a.c and b.c:
                        acc = acc + a * b
                row.append(acc)
            out.append(row)
        return LambdaMat(self.p, out)

    def __eq__(self, other):
        if not isinstance(other, LambdaMat):
            return NotImplemented
        return self.p == other.p and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return f"LambdaMat(p={self.p}, {[[list(x.c) for x in r] for r in self.rows]})"

    def det(self) -> LambdaElt:
        """Leibniz expansion (the matrices here are small)."""
        e = self.e
        total = LambdaElt(self.p)
        for perm in itertools.permutations(range(e)):
            sign = 1
            for i in range(e):
                for j in range(i + 1, e):
                    if perm[i] > perm[j]:
                        sign = -sign
            term = LambdaElt(self.p, (sign,))
            for i in range(e):
                term = term * self.rows[i][perm[i]]
                if term.is_zero():
                    break
            total = total + term
        return total

    def minor(self, i: int, j: int) -> "LambdaMat":
        return LambdaMat(self.p, [[x for c, x in enumerate(r) if c != j] for k, r in enumerate(self.rows) if k != i])

    def adjugate(self) -> "LambdaMat":
        e = self.e
        if e == 1:
            return LambdaMat.identity(self.p, 1)
        return LambdaMat(self.p, [[(1 if (i + j) % 2 == 0 else -1) * self.minor(j, i).det() for j in range(e)]
                                  for i in range(e)])

    def content_valuation(self):
        return min((x.content_valuation() for r in self.rows for x in r), default=INF)

    def low_valuation(self, n: int):
        """Content valuation of all entries modulo ``X^n``."""
        return min((x.low_valuation(n) for r in self.rows for x in r), default=INF)

    def mod(self, g: LambdaElt) -> "LambdaMat":
        return self.map(lambda x: x.mod(g))

    def is_zero(self) -> bool:
        return all(x.is_zero() for r in self.rows for x in r)

    def max_degree(self) -> int:
        return max((x.degree for r in self.rows for x in r), default=-1)

    def to_json(self) -> list:
        return [[x.to_json() for x in r] for r in self.rows]

    @classmethod
    def from_json(cls, p: int, obj) -> "LambdaMat":
        return cls(p, [[LambdaElt(p, x) for x in r] for r in obj])

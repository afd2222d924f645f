"""
Capped relative-precision arithmetic in Q_p.

A nonzero value is stored as ``u * p**v`` where ``u`` is a unit known modulo
``p**K``.  Two kinds of zero are kept apart:

* the exact zero (``v = inf``), produced only from exact inputs;
* a value that is *indistinguishable from zero* at its precision.  It carries
  no significant digits (``u = 0``, ``K = 0``) and ``v`` holds the absolute
  precision, i.e. the value is ``O(p**v)``.

Addition keeps the smaller absolute precision, multiplication and division
keep the smaller relative precision.  Nothing here ever increases ``K``.
"""
from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

from gmpy2 import mpz, remove

INF = math.inf
DEFAULT_PRECISION = 40

_POWERS: dict[tuple[int, int], int] = {}


def ppow(p: int, k: int) -> int:
    """Return ``p**k`` from a small cache (k >= 0)."""
    key = (p, k)
    r = _POWERS.get(key)
    if r is None:
        r = p ** k
        if len(_POWERS) < 200_000:
            _POWERS[key] = r
    return r


def int_valuation(n: int, p: int) -> int | float:
    """Valuation of an integer, ``inf`` for 0."""
    if n == 0:
        return INF
    return int(remove(mpz(n), p)[1])


def rational_valuation(q, p: int) -> int | float:
    q = Fraction(q)
    if q == 0:
        return INF
    return int_valuation(q.numerator, p) - int_valuation(q.denominator, p)


class PrecisionError(ArithmeticError):
    """Raised when a result would need digits that are not known."""


class PrimeMismatch(ValueError):
    pass


def _check_prime(p: int) -> None:
    if p < 2:
        raise ValueError(f"p must be >= 2, got {p}")


class PadicScalar:
    """Element of Q_p with explicit valuation and capped unit precision.

    Instances are immutable; build them with :meth:`from_rational`,
    :meth:`from_int`, :meth:`exact_zero`, :meth:`zero_at` or the raw
    constructor ``PadicScalar(p, v, u, K)``.
    """

    __slots__ = ("p", "v", "u", "K")

    def __init__(self, p: int, v, u: int, K: int):
        _check_prime(p)
        if v == INF:
            if u != 0 or K != 0:
                raise ValueError("exact zero must have u = 0 and K = 0")
        elif K == 0:
            if u != 0:
                raise ValueError("a value without significant digits must have u = 0")
            v = int(v)
        else:
            if K < 0:
                raise ValueError("precision K must be positive")
            u %= ppow(p, K)
            if u % p == 0:
                raise ValueError("unit part must be coprime to p")
            v = int(v)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "u", int(u))
        object.__setattr__(self, "K", K)

    def __setattr__(self, name, value):
        raise AttributeError("PadicScalar is immutable")

    @staticmethod
    def _raw(p: int, v, u: int, K: int) -> "PadicScalar":
        obj = object.__new__(PadicScalar)
        object.__setattr__(obj, "p", p)
        object.__setattr__(obj, "v", v)
        object.__setattr__(obj, "u", u)
        object.__setattr__(obj, "K", K)
        return obj

    # -- constructors -------------------------------------------------
    @classmethod
    def exact_zero(cls, p: int) -> "PadicScalar":
        _check_prime(p)
        return cls._raw(p, INF, 0, 0)

    @classmethod
    def zero_at(cls, p: int, absprec: int) -> "PadicScalar":
        """The class ``O(p**absprec)``: zero known to ``absprec`` digits."""
        _check_prime(p)
        return cls._raw(p, int(absprec), 0, 0)

    @classmethod
    def from_rational(cls, q, p: int, K: int = DEFAULT_PRECISION) -> "PadicScalar":
        """Round a rational number to ``K`` significant digits.

        Zero becomes the exact zero.
        """
        _check_prime(p)
        if K <= 0:
            raise ValueError("precision K must be positive")
        q = Fraction(q)
        if q == 0:
            return cls.exact_zero(p)
        num, vn = remove(mpz(q.numerator), p)
        den, vd = remove(mpz(q.denominator), p)
        mod = ppow(p, K)
        u = int(num * pow(int(den), -1, mod) % mod)
        return cls._raw(p, int(vn - vd), u, K)

    @classmethod
    def from_int(cls, n: int, p: int, K: int = DEFAULT_PRECISION) -> "PadicScalar":
        return cls.from_rational(n, p, K)

    @classmethod
    def coerce(cls, x, p: int, K: int = DEFAULT_PRECISION) -> "PadicScalar":
        if isinstance(x, PadicScalar):
            if x.p != p:
                raise PrimeMismatch(f"prime mismatch: {x.p} vs {p}")
            return x
        if isinstance(x, (int, Rational)):
            return cls.from_rational(x, p, K)
        raise TypeError(f"cannot convert {type(x).__name__} to PadicScalar")

    # -- predicates and accessors --------------------------------------
    @property
    def is_exact_zero(self) -> bool:
        return self.v == INF

    @property
    def is_zero(self) -> bool:
        """True when no significant digit is known (exact or inexact zero)."""
        return self.K == 0

    @property
    def abs_precision(self):
        """Absolute precision ``v + K`` (``inf`` for the exact zero)."""
        return self.v + self.K

    def valuation(self):
        """Valuation; for an inexact zero this is its absolute precision,
        a lower bound for the true valuation."""
        return self.v

    def to_fraction(self) -> Fraction:
        """The rational representative ``u * p**v`` (0 for both zeros)."""
        if self.K == 0:
            return Fraction(0)
        if self.v >= 0:
            return Fraction(self.u * ppow(self.p, self.v))
        return Fraction(self.u, ppow(self.p, -self.v))

    def lift(self, absprec: int) -> int:
        """Integer congruent to self modulo ``p**absprec`` (requires v >= 0)."""
        if self.K == 0:
            return 0
        if self.v < 0:
            raise ValueError("value is not p-integral")
        return self.u * ppow(self.p, self.v) % ppow(self.p, absprec)

    def with_abs_precision(self, absprec) -> "PadicScalar":
        """Drop digits beyond absolute precision ``absprec`` (never adds any)."""
        if absprec >= self.abs_precision:
            return self
        absprec = int(absprec)
        if self.K == 0 or absprec <= self.v:
            return PadicScalar._raw(self.p, min(absprec, self.v), 0, 0)
        K = absprec - self.v
        return PadicScalar._raw(self.p, self.v, self.u % ppow(self.p, K), K)

    def with_precision(self, K: int) -> "PadicScalar":
        """Cap the relative precision at ``K`` digits."""
        if self.K <= K:
            return self
        return PadicScalar._raw(self.p, self.v, self.u % ppow(self.p, K), K)

    # -- arithmetic ---------------------------------------------------
    def _other(self, other) -> "PadicScalar":
        if isinstance(other, PadicScalar):
            if other.p != self.p:
                raise PrimeMismatch(f"prime mismatch: {self.p} vs {other.p}")
            return other
        if isinstance(other, (int, Rational)):
            q = Fraction(other)
            if q == 0:
                return PadicScalar.exact_zero(self.p)
            vq = rational_valuation(q, self.p)
            # enough digits that the constant never limits the precision
            target = self.abs_precision if self.abs_precision != INF else vq + DEFAULT_PRECISION
            K = max(1, self.K, int(target - vq))
            return PadicScalar.from_rational(q, self.p, K)
        return NotImplemented

    def __add__(self, other):
        b = self._other(other)
        if b is NotImplemented:
            return NotImplemented
        return _add(self, b)

    __radd__ = __add__

    def __sub__(self, other):
        b = self._other(other)
        if b is NotImplemented:
            return NotImplemented
        return _add(self, -b)

    def __rsub__(self, other):
        b = self._other(other)
        if b is NotImplemented:
            return NotImplemented
        return _add(b, -self)

    def __neg__(self):
        if self.K == 0:
            return self
        mod = ppow(self.p, self.K)
        return PadicScalar._raw(self.p, self.v, (-self.u) % mod, self.K)

    def __mul__(self, other):
        b = self._other(other)
        if b is NotImplemented:
            return NotImplemented
        return _mul(self, b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        b = self._other(other)
        if b is NotImplemented:
            return NotImplemented
        return _div(self, b)

    def __rtruediv__(self, other):
        b = self._other(other)
        if b is NotImplemented:
            return NotImplemented
        return _div(b, self)

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return PadicScalar.from_rational(1, self.p, max(self.K, 1)) / (self ** (-n))
        if n == 0:
            return PadicScalar.from_rational(1, self.p, self.K if self.K else DEFAULT_PRECISION)
        if self.K == 0:
            if self.is_exact_zero:
                return self
            return PadicScalar._raw(self.p, self.v * n, 0, 0)
        mod = ppow(self.p, self.K)
        return PadicScalar._raw(self.p, self.v * n, pow(self.u, n, mod), self.K)

    # -- comparison ---------------------------------------------------
    def __eq__(self, other):
        if isinstance(other, PadicScalar):
            return (self.p, self.v, self.u, self.K) == (other.p, other.v, other.u, other.K)
        return NotImplemented

    def __hash__(self):
        return hash((self.p, self.v, self.u, self.K))

    def equals_at_precision(self, other) -> bool:
        """True when ``self - other`` has no significant digit."""
        return (self - other).K == 0

    def __repr__(self):
        if self.is_exact_zero:
            return f"PadicScalar(p={self.p}, 0)"
        if self.K == 0:
            return f"PadicScalar(p={self.p}, O({self.p}^{self.v}))"
        return f"PadicScalar(p={self.p}, v={self.v}, u={self.u}, K={self.K})"

    # -- serialization ------------------------------------------------
    def to_json(self) -> dict:
        """``{p, v, u, K}`` with ``u`` as little-endian base-p digits.

        The exact zero has ``v = "inf"`` and an empty digit string.  Digits
        above 9 are written as letters (base 36), so primes up to 36 are
        supported by this rendering.
        """
        if self.p > 36:
            raise ValueError("digit-string rendering supports p <= 36")
        digits = []
        u = self.u
        for _ in range(self.K):
            u, r = divmod(u, self.p)
            digits.append("0123456789abcdefghijklmnopqrstuvwxyz"[r])
        v = "inf" if self.is_exact_zero else self.v
        return {"p": self.p, "v": v, "u": "".join(digits), "K": self.K}

    @classmethod
    def from_json(cls, obj: dict) -> "PadicScalar":
        p = int(obj["p"])
        K = int(obj["K"])
        digits = obj["u"]
        if len(digits) != K:
            raise ValueError(f"digit string has length {len(digits)}, expected K={K}")
        u = 0
        for ch in reversed(digits):
            d = int(ch, 36)
            if d >= p:
                raise ValueError(f"digit {ch!r} out of range for p={p}")
            u = u * p + d
        v = INF if obj["v"] == "inf" else int(obj["v"])
        return cls(p, v, u, K)


def _add(a: PadicScalar, b: PadicScalar) -> PadicScalar:
    if a.v == INF:
        return b
    if b.v == INF:
        return a
    p = a.p
    absprec = min(a.v + a.K, b.v + b.K)
    if a.K == 0 and b.K == 0:
        return PadicScalar._raw(p, absprec, 0, 0)
    m = min(a.v, b.v)
    rel = absprec - m
    if rel <= 0:
        return PadicScalar._raw(p, absprec, 0, 0)
    s = a.u * ppow(p, a.v - m) + b.u * ppow(p, b.v - m)
    mod = ppow(p, rel)
    s %= mod
    if s == 0:
        return PadicScalar._raw(p, absprec, 0, 0)
    if s % p:
        return PadicScalar._raw(p, m, s, rel)
    s, k = remove(mpz(s), p)
    k = int(k)
    return PadicScalar._raw(p, m + k, int(s), rel - k)


def _mul(a: PadicScalar, b: PadicScalar) -> PadicScalar:
    p = a.p
    if a.v == INF or b.v == INF:
        return PadicScalar._raw(p, INF, 0, 0)
    if a.K == 0 or b.K == 0:
        # O(p^A) * x = O(p^(A + v(x)))
        return PadicScalar._raw(p, a.v + b.v, 0, 0)
    K = min(a.K, b.K)
    return PadicScalar._raw(p, a.v + b.v, a.u * b.u % ppow(p, K), K)


def _div(a: PadicScalar, b: PadicScalar) -> PadicScalar:
    p = a.p
    if b.v == INF:
        raise ZeroDivisionError("division by exact zero")
    if b.K == 0:
        raise PrecisionError("division by a value indistinguishable from zero")
    if a.v == INF:
        return a
    if a.K == 0:
        return PadicScalar._raw(p, a.v - b.v, 0, 0)
    K = min(a.K, b.K)
    mod = ppow(p, K)
    return PadicScalar._raw(p, a.v - b.v, a.u * pow(b.u, -1, mod) % mod, K)


_OPS = {
    "add": _add,
    "sub": lambda a, b: _add(a, -b),
    "mul": _mul,
    "div": _div,
}


def arith(op: str, a: PadicScalar, b: PadicScalar) -> PadicScalar:
    """Apply ``op`` in {add, sub, mul, div} to two scalars over the same prime."""
    if a.p != b.p:
        raise PrimeMismatch(f"prime mismatch: {a.p} vs {b.p}")
    try:
        fn = _OPS[op]
    except KeyError:
        raise ValueError(f"unknown operation {op!r}") from None
    return fn(a, b)


def valuation(a: PadicScalar):
    """Valuation of ``a``; ``inf`` for the exact zero."""
    return a.valuation()


def padic(x, p: int, K: int = DEFAULT_PRECISION) -> PadicScalar:
    """Shorthand for :meth:`PadicScalar.coerce`."""
    return PadicScalar.coerce(x, p, K)

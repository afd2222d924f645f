"""
Characteristic polynomials of Frobenius and what is read off them.

``H(X) = X^d + a_{d-1} X^{d-1} + ... + a_0`` with ``v(a_0) >= 1``.  The
Verschiebung polynomial is ``H^vee(X) = X^d H(p/X) / a_0``; its Newton slopes
decide the reduction type.  Also here: ``b_i = a_i / a_0`` (``b_d = 1/a_0``),
the shift ``epsilon`` and the logarithm coefficients ``(alpha_1, alpha_2)``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction

from .padic import DEFAULT_PRECISION, INF, PadicScalar, rational_valuation
from .tower import KUMMER, TowerSpec

ORDINARY = "Ordinary"
SUPERSINGULAR = "Supersingular"
IN_BETWEEN = "InBetween"


class InvalidHondaData(ValueError):
    pass


def _q(x) -> Fraction:
    return Fraction(x) if not isinstance(x, str) else Fraction(x)


def _qjson(q: Fraction):
    return q.numerator if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class HondaData:
    """``H`` given by its non-leading coefficients ``a_0 .. a_{d-1}``.

    Coefficients are exact p-integral rationals.  The constructor enforces
    ``v(a_0) >= 1``; the stronger condition needed for the series ``l`` is
    :meth:`supports_log`.
    """

    p: int
    a: tuple

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(_q(x) for x in self.a))
        if not self.a:
            raise InvalidHondaData("H must have degree >= 1")
        for i, c in enumerate(self.a):
            if rational_valuation(c, self.p) < 0:
                raise InvalidHondaData(f"a_{i} = {c} is not p-integral")
        if rational_valuation(self.a[0], self.p) < 1:
            raise InvalidHondaData("a_0 must be divisible by p (the roots of H are non-units)")

    @classmethod
    def elliptic(cls, p: int, a_p) -> "HondaData":
        """``H = X^2 - a_p X + p``."""
        return cls(p, (p, -_q(a_p)))

    @property
    def d(self) -> int:
        return len(self.a)

    @property
    def coeffs(self) -> tuple:
        """All coefficients of ``H``, constant first, including the leading 1."""
        return self.a + (Fraction(1),)

    def b(self, i: int) -> Fraction:
        """``b_i = a_i / a_0`` for ``1 <= i < d`` and ``b_d = 1/a_0``."""
        if not 1 <= i <= self.d:
            raise IndexError(i)
        return self.coeffs[i] / self.a[0]

    @property
    def bs(self) -> tuple:
        return tuple(self.b(i) for i in range(1, self.d + 1))

    def supports_log(self) -> bool:
        """True when ``p^i b_i`` lies in ``p Z_p`` for every ``i``."""
        return all(rational_valuation(self.p ** i * b, self.p) >= 1 for i, b in enumerate(self.bs, start=1))

    def check_log(self) -> None:
        if not self.supports_log():
            raise InvalidHondaData("p^i b_i must lie in pZ_p for every i (l(X) would not converge)")

    def evaluate(self, x):
        acc = Fraction(0) if not isinstance(x, PadicScalar) else PadicScalar.exact_zero(self.p)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def to_json(self) -> dict:
        return {"d": self.d, "a": [_qjson(c) for c in self.a]}

    @classmethod
    def from_json(cls, obj: dict, p: int) -> "HondaData":
        a = tuple(obj["a"])
        if "d" in obj and int(obj["d"]) != len(a):
            raise InvalidHondaData(f"d = {obj['d']} but {len(a)} coefficients a_0..a_(d-1) given")
        return cls(p, a)


@dataclass(frozen=True)
class LogCoeffs:
    """``(alpha_1, alpha_2)`` with ``alpha_1`` nonzero."""

    alpha1: PadicScalar
    alpha2: PadicScalar

    def __post_init__(self):
        if self.alpha1.is_zero:
            raise ValueError("alpha_1 must be nonzero")
        if self.alpha1.p != self.alpha2.p:
            raise ValueError("alpha_1 and alpha_2 live over different primes")

    @classmethod
    def from_rationals(cls, alpha1, alpha2, p: int, K: int = DEFAULT_PRECISION) -> "LogCoeffs":
        return cls(PadicScalar.from_rational(alpha1, p, K), PadicScalar.from_rational(alpha2, p, K))

    def to_json(self) -> dict:
        return {"alpha1": self.alpha1.to_json(), "alpha2": self.alpha2.to_json()}


def honda_to_json(H: HondaData, c: LogCoeffs | None = None) -> dict:
    """The ``{d, a, alpha1, alpha2}`` record used in configs and reports."""
    out = H.to_json()
    if c is not None:
        out["alpha1"] = _qjson(c.alpha1.to_fraction())
        out["alpha2"] = _qjson(c.alpha2.to_fraction())
    return out


def dual_char_poly(H: HondaData) -> list[Fraction]:
    """Coefficients (constant first) of ``H^vee(X) = X^d H(p/X) / a_0``.

    The coefficient of ``X^(d-i)`` is ``p^i a_i / a_0`` with ``a_d = 1``.
    """
    d, p, c = H.d, H.p, H.coeffs
    out = [Fraction(0)] * (d + 1)
    for i in range(d + 1):
        out[d - i] = Fraction(p) ** i * c[i] / H.a[0]
    return out


def newton_slopes(f, p: int | None = None) -> list[tuple[Fraction, int]]:
    """Root valuations of ``f`` with multiplicities, from the lower Newton polygon.

    ``f`` is a coefficient list, constant first.  Entries may be rationals
    (then ``p`` is required) or :class:`PadicScalar`.  A coefficient whose
    digits all cancelled has no known valuation and is rejected.  A zero
    constant term contributes roots of infinite valuation.
    """
    pts = []
    for i, c in enumerate(f):
        if isinstance(c, PadicScalar):
            if c.is_exact_zero:
                continue
            if c.K == 0:
                raise ValueError(f"coefficient {i} has no known digits; its valuation is unknown")
            pts.append((i, Fraction(c.v)))
        else:
            if p is None:
                raise ValueError("p is required for rational coefficients")
            v = rational_valuation(c, p)
            if v != INF:
                pts.append((i, Fraction(v)))
    if not pts:
        raise ValueError("zero polynomial has no slopes")
    deg = pts[-1][0]
    if deg == 0:
        return []
    out = []
    if pts[0][0] > 0:
        out.append((INF, pts[0][0]))
    # lower convex hull from the first point
    i = 0
    while pts[i][0] < deg:
        x0, y0 = pts[i]
        best_j, best_s = None, None
        for j in range(i + 1, len(pts)):
            x1, y1 = pts[j]
            s = (y1 - y0) / (x1 - x0)
            if best_s is None or s <= best_s:
                best_j, best_s = j, s
        out.append((-best_s, pts[best_j][0] - x0))
        i = best_j
    # merge equal slopes and list in increasing root valuation
    merged: dict = {}
    for s, m in out:
        merged[s] = merged.get(s, 0) + m
    return sorted(merged.items(), key=lambda t: t[0])


def classify_slopes(slopes) -> str:
    if all(s == 0 for s, _ in slopes):
        return ORDINARY
    if all(s > 0 for s, _ in slopes):
        return SUPERSINGULAR
    return IN_BETWEEN


def classify_reduction(H: HondaData) -> str:
    """Ordinary / Supersingular / InBetween from the slopes of ``H^vee``."""
    return classify_slopes(newton_slopes(dual_char_poly(H), H.p))


def epsilon(H: HondaData, spec: TowerSpec, K: int = DEFAULT_PRECISION) -> PadicScalar:
    """``a_0 alpha_{p-1} / (p (a_0 + ... + a_{d-1} + 1))``."""
    if spec.kind == KUMMER:
        raise ValueError("epsilon is defined for Lubin-Tate towers")
    if spec.p != H.p:
        raise ValueError("prime mismatch between H and the tower")
    s = sum(H.a) + 1
    if rational_valuation(s, H.p) != 0:
        raise InvalidHondaData(
            f"a_0 + ... + a_(d-1) + 1 = {s} is not a unit, so the denominator of epsilon is not p times a unit"
        )
    return PadicScalar.from_rational(H.a[0] * spec.alphas[-1] / (H.p * s), H.p, K)


def assumption_k_check(c: LogCoeffs) -> bool:
    """True iff ``p`` divides ``alpha_2 / alpha_1``."""
    if c.alpha1.is_zero:
        raise ValueError("alpha_1 must be nonzero")
    return c.alpha2.valuation() - c.alpha1.valuation() >= 1


def check_log_coeffs(c: LogCoeffs) -> bool:
    """Like :func:`assumption_k_check` but warns instead of returning False."""
    ok = assumption_k_check(c)
    if not ok:
        warnings.warn("alpha_2/alpha_1 is not divisible by p; continuing anyway", stacklevel=2)
    return ok

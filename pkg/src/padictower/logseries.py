"""
The series ``l(X) = [1 - J(phi) + J(phi)^2 - ...] o X`` and its trace relations.

Notation: ``H(X) = X^d + a_{d-1} X^{d-1} + ... + a_0``, ``b_i = a_i/a_0``
(``b_d = 1/a_0``) and ``J(T) = b_1 T + ... + b_d T^d``, where ``T`` acts on
series by ``T^j o f = f(phi^{(j)}(X))`` with ``phi^{(j)}`` the ``j``-fold
iterate of ``phi``.

Regrouping by powers of ``T``
-----------------------------
Every power ``(-J(T))^k`` is an honest polynomial in ``T``, so the partial
sum ``sum_{k<=K} (-J)^k o X`` equals ``sum_j G_j phi^{(j)}(X)`` where ``G_j``
are the coefficients of ``sum_{k<=K} (-J(T))^k``.  For ``j <= K`` these
coincide with the coefficients ``g_j`` of ``1/(1 + J(T))``, which obey
``g_0 = 1`` and ``g_j = -(b_1 g_{j-1} + ... + b_d g_{j-d})``.

Valuation floor (used for every certificate in this module)
-----------------------------------------------------------
(a) Put ``mu = max_i(-v(b_i)/i, 0)``.  Because ``p^i b_i`` lies in ``pZ_p``
    we have ``v(b_i) >= 1 - i`` and so ``mu <= (d-1)/d < 1``.  Every
    coefficient of ``T^j`` in ``J(T)^k`` is a sum of products
    ``b_{i_1} ... b_{i_k}`` with ``i_1 + ... + i_k = j`` and therefore has
    valuation ``>= -mu*j``.  The same holds for ``g_j``.
(b) ``phi^{(j)}(X)`` lies in the ideal generated by ``p^{j-i} X^{p^i}``,
    ``0 <= i <= j``.  For ``j = 0`` this is ``(X)``.  If it holds for ``j``,
    then ``phi^{(j+1)} = phi(phi^{(j)})`` is a sum of terms
    ``alpha_r (phi^{(j)})^r`` (with ``p | alpha_r`` for ``r < p``) and
    ``(phi^{(j)})^p``; both land in the ideal for ``j + 1`` because
    ``p * p^{j-i} X^{p^i}`` and ``(p^{j-i} X^{p^i})^p`` do.  Consequently the
    coefficient of ``X^m`` in ``phi^{(j)}`` has valuation
    ``>= max(0, j - floor(log_p m))``.
(c) If ``v(h_j) >= B(j)`` for every ``j`` then the ``X^m`` coefficient of
    ``sum_j h_j phi^{(j)}`` has valuation ``>= min_j B(j) + max(0, j - L)``
    with ``L = floor(log_p m)``.  Once ``B`` decreases at most linearly with
    slope ``mu < 1`` the minimum is attained at finitely many ``j`` and grows
    to infinity with the truncation cutoff, which is what certifies both the
    operator cutoff and the tails beyond the truncation degree.
(d) Beyond ``j = J0`` the recursion for ``g_j`` keeps the linear bound: if
    ``v(g_t) >= m0 - mu (t - J0)`` on the window ``J0-d < t <= J0``, then by
    induction it holds for all ``t > J0`` too.

Kummer towers use ``phi(X) = X^p``, where ``phi^{(j)}(X) = X^{p^j}`` and the
same statements hold trivially.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from . import _polyarith
from .dieudonne import HondaData, LogCoeffs, check_log_coeffs, epsilon
from .padic import DEFAULT_PRECISION, INF, PadicScalar, ppow
from .tower import (
    KUMMER,
    LUBIN_TATE,
    PrecisionUnreachable,
    Tower,
    TowerElement,
    TowerError,
    TowerSpec,
    build_tower,
    eval_series,
    phi_of,
    trace_down,
)

DEFAULT_FLOOR = 22


class ConvergenceError(ArithmeticError):
    pass


def floor_log(m: int, p: int) -> int:
    """``floor(log_p m)`` for ``m >= 1``."""
    L = 0
    q = p
    while q <= m:
        q *= p
        L += 1
    return L


# -- valuation bounds on operator coefficients --------------------------

@dataclass(frozen=True)
class OperatorBound:
    """Lower bound ``B(j)`` for the valuations of operator coefficients ``h_j``.

    ``head[j]`` is used for ``j < len(head)``; from ``anchor = len(head)`` on
    the bound is ``base - mu*(j - anchor)``.
    """

    p: int
    head: tuple
    base: Fraction
    mu: Fraction

    @property
    def anchor(self) -> int:
        return len(self.head)

    def at(self, j: int):
        if j < len(self.head):
            return self.head[j]
        return self.base - self.mu * (j - self.anchor)

    def shift(self, s: int) -> "OperatorBound":
        """Bound for ``T^s`` times the operator."""
        return OperatorBound(self.p, (INF,) * s + self.head, self.base, self.mu)

    def scale(self, v) -> "OperatorBound":
        """Bound after multiplying every coefficient by a scalar of valuation ``v``."""
        if v == INF:
            return OperatorBound(self.p, (), INF, Fraction(0))
        return OperatorBound(self.p, tuple(h + v for h in self.head), self.base + v, self.mu)

    def combine(self, other: "OperatorBound") -> "OperatorBound":
        """Bound for the sum of two operators."""
        A = max(self.anchor, other.anchor)
        head = tuple(min(self.at(j), other.at(j)) for j in range(A))
        return OperatorBound(self.p, head, min(self.at(A), other.at(A)), max(self.mu, other.mu))

    def _low(self, L: int, j_start: int):
        best = INF
        for j in range(j_start, self.anchor):
            h = self.head[j]
            if h != INF:
                best = min(best, h + max(0, j - L))
        if self.base != INF:
            for j in {max(self.anchor, j_start), max(self.anchor, j_start, L)}:
                best = min(best, self.at(j) + max(0, j - L))
        return best

    def coefficient_bound(self, m: int):
        """Lower bound for the ``X^m`` coefficient of ``sum_j h_j phi^{(j)}(X)``, m >= 1."""
        return self._low(floor_log(m, self.p), 0 if m == 1 else 1)

    def level_bound(self, L: int):
        """Same bound for every ``m >= 2`` with ``floor(log_p m) = L``."""
        return self._low(L, 1)

    def const_floor(self):
        """``c0`` with ``level_bound(L) >= c0 - mu*L`` for all ``L``."""
        finite = [h for h in self.head if h != INF]
        c0 = min(finite) if finite else INF
        if self.base != INF:
            c0 = min(c0, self.base + self.mu * self.anchor)
        return c0

    def tail_min(self, w, start: int):
        """Lower bound for ``v(c_m) + m*w`` over all ``m >= start``."""
        if self.mu >= 1:
            raise ConvergenceError("operator coefficients decay too slowly to bound a tail")
        p = self.p
        start = max(start, 2)
        L = floor_log(start, p)
        c0 = self.const_floor()
        if c0 == INF:
            return INF
        best = INF
        while True:
            m = max(start, p ** L)
            best = min(best, self.level_bound(L) + m * w)
            L += 1
            nxt = p ** L
            if nxt * w * (p - 1) >= self.mu and c0 - self.mu * L + nxt * w > best:
                return best


# -- the phi-iterate table ----------------------------------------------

class PhiTable:
    """``phi^{(j)}(X)`` modulo ``(X^{D+1}, p^M)`` for ``j = 0, 1, ...``.

    Iterates are produced until one vanishes modulo ``p^M``; every later one
    then vanishes too.
    """

    def __init__(self, spec: TowerSpec, D: int, M: int):
        self.spec = spec
        self.D = D
        self.M = M
        self.p = spec.p
        self.modulus = ppow(self.p, M)
        self.kummer = spec.kind == KUMMER
        self.rows: list[list[int]] = []
        if not self.kummer:
            self._build()

    def _build(self):
        p, D, mod = self.p, self.D, self.modulus
        n = D + 1
        width = _polyarith.slot_bytes(mod, n)
        alphas = [int(Fraction(a).numerator * pow(Fraction(a).denominator, -1, mod)) % mod for a in self.spec.alphas]
        cur = [0] * n
        if D >= 1:
            cur[1] = 1
        self.rows.append(cur)
        while any(cur):
            # phi(Y) = Y * (Y^{p-1} + alpha_{p-1} Y^{p-2} + ... + alpha_1), Y = cur
            acc = list(cur)
            acc[0] = (acc[0] + alphas[-1]) % mod
            for a in reversed(alphas[:-1]):
                acc = _polyarith.mul_trunc(acc, cur, n, mod, width)
                acc[0] = (acc[0] + a) % mod
            cur = _polyarith.mul_trunc(acc, cur, n, mod, width)
            self.rows.append(cur)
        self.rows.pop()  # the vanishing iterate

    def count(self) -> int | None:
        """Number of non-vanishing iterates (``None``: unbounded, Kummer)."""
        return None if self.kummer else len(self.rows)


@lru_cache(maxsize=16)
def phi_table(spec: TowerSpec, D: int, M: int) -> PhiTable:
    return PhiTable(spec, D, M)


# -- operator series ----------------------------------------------------

@dataclass(frozen=True)
class OpSeries:
    """``const + sum_j H[j] phi^{(j)}(X)`` together with valuation bounds.

    ``err`` bounds the coefficients of (true operator) - H, ``true`` bounds
    the coefficients of the true operator itself.
    """

    spec: TowerSpec
    const: PadicScalar
    H: tuple
    err: OperatorBound
    true: OperatorBound

    @property
    def p(self) -> int:
        return self.spec.p

    def shift(self, s: int) -> "OpSeries":
        """``f(phi^{(s)}(X))``."""
        z = PadicScalar.exact_zero(self.p)
        return OpSeries(self.spec, self.const, (z,) * s + self.H, self.err.shift(s), self.true.shift(s))

    def scale(self, beta: PadicScalar) -> "OpSeries":
        v = beta.valuation()
        return OpSeries(self.spec, self.const * beta, tuple(h * beta for h in self.H),
                        self.err.scale(v), self.true.scale(v))

    def plus(self, other: "OpSeries") -> "OpSeries":
        n = max(len(self.H), len(other.H))
        z = PadicScalar.exact_zero(self.p)
        a = self.H + (z,) * (n - len(self.H))
        b = other.H + (z,) * (n - len(other.H))
        return OpSeries(self.spec, self.const + other.const, tuple(x + y for x, y in zip(a, b)),
                        self.err.combine(other.err), self.true.combine(other.true))

    def plus_const(self, c: PadicScalar) -> "OpSeries":
        return OpSeries(self.spec, self.const + c, self.H, self.err, self.true)

    def materialize(self, D: int, target: int, K: int = DEFAULT_PRECISION, name: str = "") -> "PSeries":
        """Coefficients up to degree ``D`` with absolute precision about ``target``."""
        p = self.p
        zero = PadicScalar.exact_zero(p)
        coeffs = [zero] * (D + 1)
        coeffs[0] = self.const
        H = self.H
        if self.spec.kind == KUMMER:
            j = 0
            while j < len(H) and p ** j <= D:
                m = p ** j
                cap = self.err.coefficient_bound(m)
                coeffs[m] = H[j].with_abs_precision(cap) if cap != INF else H[j]
                j += 1
            return PSeries(p, coeffs, self.true, self, name)
        live = [(j, h) for j, h in enumerate(H) if not h.is_exact_zero]
        S = max([0] + [-h.v for _, h in live if h.v < 0])
        M = S + target + 2
        table = phi_table(self.spec, D, M)
        mod = table.modulus
        Lmax = floor_log(D, p) if D >= 1 else 0
        # precision of the X^m coefficient from the known digits of H
        prec_L = []
        for L in range(Lmax + 1):
            best = M - S
            for j, h in live:
                if j < len(table.rows):
                    best = min(best, h.abs_precision + max(0, j - L))
            prec_L.append(best)
        acc = [0] * (D + 1)
        for j, h in live:
            if j >= len(table.rows):
                break
            if h.K == 0:
                continue
            W = h.u * ppow(p, h.v + S) % mod
            row = table.rows[j]
            acc = [(a + W * r) for a, r in zip(acc, row)]
        pS = ppow(p, S)
        for m in range(1, D + 1):
            L = floor_log(m, p)
            prec = min(prec_L[L], self.err.coefficient_bound(m))
            if prec == INF:
                prec = M - S
            prec = int(math.floor(prec))
            c = acc[m] % mod
            val = PadicScalar.from_rational(Fraction(c, pS), p, max(1, prec + S + 1)) if c else zero
            if c == 0:
                val = PadicScalar.zero_at(p, prec)
            coeffs[m] = val.with_abs_precision(prec).with_precision(K)
        return PSeries(p, coeffs, self.true, self, name)


@dataclass(frozen=True)
class PSeries:
    """Truncated power series with a certified tail.

    ``coeffs[m]`` is the ``X^m`` coefficient (degrees ``0..D``).  ``tail``
    bounds every coefficient beyond ``D`` (``None`` means the series is a
    polynomial).  ``op`` keeps the operator form the series came from.
    """

    p: int
    coeffs: list
    tail: OperatorBound | None = None
    op: OpSeries | None = field(default=None, compare=False)
    name: str = ""

    @property
    def D(self) -> int:
        return len(self.coeffs) - 1

    def tail_min(self, w, start: int):
        if self.tail is None:
            return INF
        return self.tail.tail_min(w, start)

    def coefficient(self, m: int) -> PadicScalar:
        return self.coeffs[m]

    @classmethod
    def polynomial(cls, coeffs, p: int, K: int = DEFAULT_PRECISION, name: str = "") -> "PSeries":
        cs = []
        for c in coeffs:
            if isinstance(c, PadicScalar):
                cs.append(c)
            elif Fraction(c) == 0:
                cs.append(PadicScalar.exact_zero(p))
            else:
                cs.append(PadicScalar.from_rational(c, p, K))
        return cls(p, cs, None, None, name)


def _poly_scaled(coeffs, p: int):
    """Common ``p^S`` scaling of a PadicScalar list (for integer arithmetic)."""
    live = [c for c in coeffs if not c.is_exact_zero]
    S = max([0] + [-c.v for c in live if c.v < 0])
    return S


def phi_substitute(f: PSeries, spec: TowerSpec, D: int, target: int | None = None) -> PSeries:
    """``f(phi(X))`` truncated at degree ``D``.

    Series in operator form are shifted (``T o``) and re-materialized; plain
    polynomials are composed directly.  For Kummer towers ``phi = X^p``.
    """
    p = spec.p
    if f.op is not None:
        tgt = target if target is not None else DEFAULT_PRECISION
        return f.op.shift(1).materialize(D, tgt, name=(f.name + " o phi") if f.name else "")
    if f.tail is not None:
        raise ValueError("phi_substitute needs a polynomial or a series in operator form")
    zero = PadicScalar.exact_zero(p)
    out = [zero] * (D + 1)
    if spec.kind == KUMMER:
        for k, c in enumerate(f.coeffs):
            if k * p <= D:
                out[k * p] = c
        return PSeries(p, out, None, None, f.name)
    coeffs = f.coeffs
    S = _poly_scaled(coeffs, p)
    known = [c.abs_precision for c in coeffs if not c.is_exact_zero]
    M = S + (int(min(known)) if known else 1) + 2
    if target is not None:
        M = max(M, S + target + 2)
    mod = ppow(p, M)
    n = D + 1
    width = _polyarith.slot_bytes(mod, n)
    phi_row = [0] * n
    for i, a in enumerate(spec.phi_coeffs):
        if i <= D:
            phi_row[i] = int(Fraction(a).numerator * pow(Fraction(a).denominator, -1, mod)) % mod
    acc = [0] * n
    for k in range(len(coeffs) - 1, -1, -1):
        acc = _polyarith.mul_trunc(acc, phi_row, n, mod, width) if any(acc) else acc
        c = coeffs[k]
        if c.K:
            acc[0] = (acc[0] + c.u * ppow(p, c.v + S)) % mod
    # the X^m coefficient only sees c_k with k <= m (phi has no constant term)
    prefix = INF
    pS = ppow(p, S)
    for m in range(n):
        if m < len(coeffs) and not coeffs[m].is_exact_zero:
            prefix = min(prefix, coeffs[m].abs_precision)
        if prefix == INF:
            out[m] = zero if acc[m] == 0 else PadicScalar.from_rational(Fraction(acc[m], pS), p)
            continue
        prec = min(int(prefix), M - S)
        if acc[m] == 0:
            out[m] = PadicScalar.zero_at(p, prec)
        else:
            out[m] = PadicScalar.from_rational(Fraction(acc[m], pS), p, max(1, prec + S + 1)).with_abs_precision(prec)
    return PSeries(p, out, None, None, f.name)


# -- building l ---------------------------------------------------------

def _b_scalars(H: HondaData, K: int) -> list:
    return [PadicScalar.from_rational(b, H.p, K) for b in H.bs]


def log_mu(H: HondaData) -> Fraction:
    """``mu = max_i(-v(b_i)/i, 0)``."""
    from .padic import rational_valuation

    mu = Fraction(0)
    for i, b in enumerate(H.bs, start=1):
        v = rational_valuation(b, H.p)
        if v != INF:
            mu = max(mu, Fraction(-v, i))
    return mu


def g_coefficients(H: HondaData, count: int, K: int = DEFAULT_PRECISION) -> list:
    """``g_0 .. g_{count-1}`` of ``1/(1 + J(T))`` by the linear recursion."""
    b = _b_scalars(H, K)
    g = [PadicScalar.from_int(1, H.p, K)]
    for j in range(1, count):
        acc = PadicScalar.exact_zero(H.p)
        for i in range(1, min(j, H.d) + 1):
            acc = acc + b[i - 1] * g[j - i]
        g.append(-acc)
    return g


def operator_cutoff(mu: Fraction, L: int, target) -> int:
    """Smallest ``K`` with ``(1 - mu)(K + 1) - L >= target`` (see (a)-(c))."""
    return max(1, math.ceil((target + L) / (1 - mu)) - 1)


def log_operator(H: HondaData, spec: TowerSpec, D: int, K: int = DEFAULT_PRECISION,
                 target: int | None = None, cutoff: int | None = None) -> OpSeries:
    """Operator form of ``l`` from the partial sums of ``(-J(T))^k``."""
    if spec.p != H.p:
        raise ValueError("prime mismatch between H and the tower")
    H.check_log()
    p = H.p
    target = K if target is None else target
    mu = log_mu(H)
    L = floor_log(max(D, 1), p)
    Kc = operator_cutoff(mu, L, target) if cutoff is None else cutoff
    zero = PadicScalar.exact_zero(p)
    one = PadicScalar.from_int(1, p, K)
    minus_J = [zero] + [-b for b in _b_scalars(H, K)]
    # partial sums of (-J(T))^k, k = 0..Kc, as polynomials in T
    total = [one]
    term = [one]
    for _ in range(Kc):
        nxt = [zero] * (len(term) + H.d)
        for i, t in enumerate(term):
            if t.is_exact_zero:
                continue
            for r in range(1, H.d + 1):
                c = minus_J[r]
                if not c.is_exact_zero:
                    nxt[i + r] = nxt[i + r] + t * c
        term = nxt
        total = total + [zero] * (len(term) - len(total))
        total = [a + b for a, b in zip(total, term)]
    G = tuple(total)
    # bound for the true coefficients g_j: exact on 0..Kc, then (d)
    head = tuple(Fraction(G[j].valuation()) if G[j].valuation() != INF else INF for j in range(Kc + 1))
    window = [head[t] - mu * (Kc - t) for t in range(max(0, Kc - H.d + 1), Kc + 1)]
    m0 = min(window)
    true_bound = OperatorBound(p, head, m0 - mu, mu)
    # omitted k > Kc only touch T^j with j > Kc, bounded by (a)
    err_bound = OperatorBound(p, (INF,) * (Kc + 1), -mu * (Kc + 1), mu)
    return OpSeries(spec, zero, G, err_bound, true_bound)


def build_l(H: HondaData, spec: TowerSpec, D: int, K: int = DEFAULT_PRECISION,
            target: int | None = None, cutoff: int | None = None) -> PSeries:
    """``l(X)`` truncated at degree ``D`` with a certified tail."""
    if D < 1:
        raise ValueError("D must be >= 1")
    op = log_operator(H, spec, D, K, target, cutoff)
    s = op.materialize(D, K if target is None else target, K, name="l")
    if not s.coeffs[0].is_exact_zero:
        raise AssertionError("constant term of l must vanish")
    return s


def y_combination(H: HondaData, c: LogCoeffs, spec: TowerSpec, D: int, K: int = DEFAULT_PRECISION,
                  beta1=None) -> PSeries:
    """``beta_1 (epsilon + l(X)) + beta_2 l(phi(X))`` with ``beta_2/beta_1 = alpha_2/alpha_1``.

    By default ``beta_1 = alpha_1`` and ``beta_2 = alpha_2``.
    """
    if H.d != 2:
        raise ValueError("y_combination is defined for d = 2")
    check_log_coeffs(c)
    if beta1 is None:
        b1, b2 = c.alpha1, c.alpha2
    else:
        b1 = beta1 if isinstance(beta1, PadicScalar) else PadicScalar.from_rational(beta1, H.p, K)
        b2 = b1 * c.alpha2 / c.alpha1
    op = log_operator(H, spec, D, K)
    eps = epsilon(H, spec, K)
    comb = op.plus_const(eps).scale(b1)
    if not b2.is_exact_zero:
        comb = comb.plus(op.shift(1).scale(b2))
    return comb.materialize(D, K, K, name="y")


# -- residual reports ---------------------------------------------------

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


def _num(x):
    if x == INF:
        return "inf"
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class ResidualReport:
    """Outcome of one identity ``LHS = RHS`` evaluated in a tower.

    ``certified_floor`` is the valuation up to which the residual is known;
    ``residual_valuation`` is the valuation of its known digits (equal to the
    floor when none survive).  ``status`` is ``pass`` when no digit survives
    and the floor reaches ``required_floor``, ``inconclusive`` when only the
    floor is too low, and ``fail`` when a known digit survives.
    """

    relation: str
    params: dict
    residual_valuation: object
    certified_floor: object
    required_floor: int
    status: str
    exact_zero: bool = False

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_json(self) -> dict:
        return {
            "relation": self.relation,
            "params": self.params,
            "residual_valuation": _num(self.residual_valuation),
            "certified_floor": _num(self.certified_floor),
            "required_floor": self.required_floor,
            "status": self.status,
            "exact_zero": self.exact_zero,
            "pass": self.passed,
        }


def residual_report(relation: str, params: dict, residual: TowerElement, required_floor: int) -> ResidualReport:
    floor = residual.precision()
    sig = residual.significant_valuation()
    exact = residual.is_exact_zero()
    if sig != INF and sig < floor:
        status = FAIL
    elif floor < required_floor:
        status = INCONCLUSIVE
    else:
        status = PASS
    return ResidualReport(relation, params, min(sig, floor), floor, required_floor, status, exact)


# -- evaluation context -------------------------------------------------

class LogContext:
    """Everything needed to evaluate ``l`` and its ``phi``-shifts on a tower.

    The truncation degree is the smallest ``D >= p^{n_max+1}`` whose tail
    certificate reaches ``floor`` at the least valuation any evaluation point
    will have; ``D`` can also be given explicitly.
    """

    def __init__(self, H: HondaData, spec: TowerSpec, n_max: int, K: int = DEFAULT_PRECISION,
                 floor: int = DEFAULT_FLOOR, D: int | None = None, shifts: int | None = None):
        if H.p != spec.p:
            raise ValueError("prime mismatch between H and the tower")
        self.H = H
        self.spec = spec
        self.p = spec.p
        self.K = K
        self.floor = floor
        self.tower = build_tower(spec, n_max, K)
        self.n_max = n_max
        self.shifts = H.d if shifts is None else shifts
        E_top = self.tower.total_degree[self.tower.max_depth]
        self.w_min = Fraction(1, E_top)
        # operator cutoff sized for the largest degree that can be needed
        self.D = D if D is not None else self._choose_D()
        self.op = log_operator(H, spec, self.D, K, target=K)
        self._series: dict[int, PSeries] = {}
        self._evals: dict = {}
        self.epsilon = epsilon(H, spec, K) if spec.kind == LUBIN_TATE else PadicScalar.exact_zero(self.p)

    def _choose_D(self) -> int:
        p = self.p
        probe = log_operator(self.H, self.spec, p ** (self.n_max + 1), self.K, target=self.K)
        lo = p ** (self.n_max + 1)
        bound = probe.true
        if bound.tail_min(self.w_min, lo + 1) >= self.floor:
            return lo
        hi = lo
        while bound.tail_min(self.w_min, hi + 1) < self.floor:
            hi *= 2
            if hi > 10 ** 6:
                raise PrecisionUnreachable("precision unreachable: truncation degree would exceed 10^6")
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if bound.tail_min(self.w_min, mid + 1) >= self.floor:
                hi = mid
            else:
                lo = mid
        return hi

    def series(self, shift: int = 0) -> PSeries:
        """``l o phi^{(shift)}`` materialized at the context degree."""
        s = self._series.get(shift)
        if s is None:
            op = self.op.shift(shift) if shift else self.op
            s = op.materialize(self.D, self.K, self.K, name=f"l o phi^{shift}" if shift else "l")
            self._series[shift] = s
        return s

    def value(self, level: int, shift: int = 0, power: int = 1) -> TowerElement:
        """``(l o phi^{(shift)})(pi_level^power)``; zero when ``pi_level`` is 0."""
        key = (level, shift, power)
        r = self._evals.get(key)
        if r is None:
            t = self.tower
            if t.depth(level) == 0:
                r = t.zero(level)
            else:
                x = t.pi(level) if power == 1 else t.pi(level) ** power
                r = eval_series(self.series(shift), x, self.floor, power_of_generator=power)
            self._evals[key] = r
        return r

    def b(self, i: int) -> PadicScalar:
        return PadicScalar.from_rational(self.H.b(i), self.p, self.K)

    def pb(self, i: int) -> PadicScalar:
        """``p^i b_i``."""
        return PadicScalar.from_rational(self.p ** i * self.H.b(i), self.p, self.K)


def _require(cond: bool, msg: str):
    if not cond:
        raise TowerError(msg)


def verify_one_step_relation(H: HondaData, spec: TowerSpec, n: int, ctx: LogContext | None = None) -> list[ResidualReport]:
    """``Tr_{n/n-1} l(pi_n) = -alpha_{p-1} - p (b_1 l(pi_{n-1}) + ... + b_d l(pi_{n-d}))``.

    Needs ``n >= max(2, d)`` so that every ``pi_{n-i}`` exists (``pi_0 = 0``).
    """
    _require(spec.kind == LUBIN_TATE, "norm relations need a Lubin-Tate tower")
    d = H.d
    _require(n >= max(2, d), f"the one-step relation needs n >= max(2, d) = {max(2, d)}")
    ctx = ctx or LogContext(H, spec, n)
    t = ctx.tower
    p = ctx.p
    params = {"p": p, "d": d, "n": n, "H": H.to_json(), "K": ctx.K, "D": ctx.D}
    lhs = trace_down(ctx.value(n), n - 1)
    rhs = t.scalar(-spec.alphas[-1], n - 1)
    for i in range(1, d + 1):
        if n - i >= 1:
            rhs = rhs - ctx.b(i) * p * ctx.value(n - i).lift_to(n - 1)
    return [residual_report("one-step", params, lhs - rhs, ctx.floor)]


def verify_norm_relation(H: HondaData, spec: TowerSpec, n: int, ctx: LogContext | None = None) -> list[ResidualReport]:
    """d-step and one-step trace relations for ``l`` on a Lubin-Tate tower.

    Checks, at level ``n``,

    * one-step: ``Tr_{n/n-1} l(pi_n) = -alpha_{p-1} - p (b_1 l(pi_{n-1}) + ... + b_d l(pi_{n-d}))``
    * d-step:   ``Tr_{n/n-d}(eps + f(pi_n)) = -sum_i p^i b_i Tr_{n-i/n-d}(eps + f(pi_{n-i}))``
      for ``f = l`` and ``f = l o phi^{(i)}``, ``0 < i < d``.
    """
    _require(spec.kind == LUBIN_TATE, "norm relations need a Lubin-Tate tower")
    d = H.d
    _require(n >= d + 1, f"the d-step relation needs n >= d + 1 = {d + 1}")
    ctx = ctx or LogContext(H, spec, n)
    t = ctx.tower
    params = {"p": ctx.p, "d": d, "n": n, "H": H.to_json(), "K": ctx.K, "D": ctx.D}
    reports = verify_one_step_relation(H, spec, n, ctx)

    eps = ctx.epsilon
    for shift in range(0, d):
        def shifted(level):
            return t.scalar(eps, level) + ctx.value(level, shift)

        lhs = trace_down(shifted(n), n - d)
        rhs = t.zero(n - d)
        for i in range(1, d + 1):
            rhs = rhs - ctx.pb(i) * trace_down(shifted(n - i), n - d)
        name = "d-step" if shift == 0 else f"d-step phi^{shift} o l"
        reports.append(residual_report(name, dict(params, shift=shift), lhs - rhs, ctx.floor))
    return reports


def kummer_trace_precheck(tower: Tower, n: int, i: int) -> ResidualReport:
    """``Tr_{n/n-1} pi_n^i`` must be an exact zero for ``1 <= i < p``."""
    r = trace_down(tower.pi(n) ** i, n - 1)
    status = PASS if r.is_exact_zero() else FAIL
    return ResidualReport("trace-pi-power", {"n": n, "i": i}, INF if r.is_exact_zero() else r.valuation(),
                          INF if r.is_exact_zero() else r.precision(), 0, status, r.is_exact_zero())


def verify_kummer_relation(H: HondaData, spec: TowerSpec, n: int, i: int, ctx: LogContext | None = None) -> list[ResidualReport]:
    """Trace relations for ``l(pi_n^i)`` on a Kummer tower.

    ``Tr_{n/n-d} f(pi_n^i) = -sum_k p^k b_k Tr_{n-k/n-d} f(pi_{n-k}^i)`` for
    ``f = l o phi^{(j)}``, ``0 <= j < d`` (that is ``l((pi^i)^{p^j})``),
    the one-step form ``Tr_{n/n-1} l(pi_n^i) = -p sum_k b_k l(pi_{n-k}^i)``
    and the exact vanishing of ``Tr_{n/n-1} pi_n^i``.
    """
    _require(spec.kind == KUMMER, "Kummer relations need a Kummer tower")
    d = H.d
    e = spec.e
    _require(1 <= i <= e, f"i must lie in 1..e = 1..{e}")
    _require(n > d, f"the relation needs n > d = {d}")
    ctx = ctx or LogContext(H, spec, n)
    t = ctx.tower
    p = ctx.p
    params = {"p": p, "d": d, "e": e, "n": n, "i": i, "H": H.to_json(), "K": ctx.K, "D": ctx.D}
    reports = [kummer_trace_precheck(t, n, i)]

    lhs = trace_down(ctx.value(n, 0, i), n - 1)
    rhs = t.zero(n - 1)
    for k in range(1, d + 1):
        rhs = rhs - ctx.b(k) * p * ctx.value(n - k, 0, i).lift_to(n - 1)
    reports.append(residual_report("one-step", dict(params), lhs - rhs, ctx.floor))

    for j in range(0, d):
        lhs = trace_down(ctx.value(n, j, i), n - d)
        rhs = t.zero(n - d)
        for k in range(1, d + 1):
            rhs = rhs - ctx.pb(k) * trace_down(ctx.value(n - k, j, i), n - d)
        name = "d-step" if j == 0 else f"d-step l(x^(p^{j}))"
        reports.append(residual_report(name, dict(params, j=j), lhs - rhs, ctx.floor))
    return reports


def verify_refined_relation(H: HondaData, spec: TowerSpec, n: int, ctx: LogContext | None = None) -> list[ResidualReport]:
    """The two d = 2 identities in their general form.

    ``Tr_{n/n-1}(eps + l(pi_n)) + p b_1 (eps + l(pi_{n-1})) + p b_2 (eps + l(pi_{n-2})) = 0``

    ``Tr_{n/n-1} l(phi(pi_n)) = p pi_{n-1} - p b_1 l(phi(pi_{n-1})) - p b_2 l(phi(pi_{n-2}))``

    For ``H = X^2 - a_p X + p`` this is ``p b_1 = -a_p`` and ``p b_2 = 1``.
    A separate report checks ``Tr_{n/n-1} phi(pi_n) = p pi_{n-1}`` directly.
    """
    _require(spec.kind == LUBIN_TATE, "refined relations need a Lubin-Tate tower")
    _require(H.d == 2, "refined relations are stated for d = 2")
    _require(n >= 2, "refined relations need n >= 2")
    ctx = ctx or LogContext(H, spec, n)
    t = ctx.tower
    p = ctx.p
    params = {"p": p, "n": n, "H": H.to_json(), "K": ctx.K, "D": ctx.D}
    eps = ctx.epsilon
    pb1, pb2 = ctx.b(1) * p, ctx.b(2) * p

    def shifted(level):
        return t.scalar(eps, level) + ctx.value(level)

    lhs = trace_down(shifted(n), n - 1)
    res = lhs + pb1 * shifted(n - 1) + (pb2 * shifted(n - 2)).lift_to(n - 1)
    reports = [residual_report("refined-trace", dict(params), res, ctx.floor)]

    lhs = trace_down(ctx.value(n, 1), n - 1)
    rhs = t.pi(n - 1) * p - pb1 * ctx.value(n - 1, 1) - (pb2 * ctx.value(n - 2, 1)).lift_to(n - 1)
    reports.append(residual_report("refined-phi", dict(params), lhs - rhs, ctx.floor))

    direct = trace_down(phi_of(t.pi(n)), n - 1) - t.pi(n - 1) * p
    reports.append(residual_report("trace-phi-pi", dict(params), direct, ctx.K))
    return reports


def all_passed(reports) -> bool:
    return all(r.passed for r in reports)

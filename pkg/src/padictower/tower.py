"""
Towers of totally ramified extensions of Q_p.

Two families are supported.

Lubin-Tate
    ``phi(X) = X^p + a_{p-1} X^{p-1} + ... + a_1 X`` with ``p | a_i`` and
    ``v(a_1) = 1``.  Level ``n`` is generated by ``pi_n`` with
    ``phi(pi_n) = pi_{n-1}`` and ``pi_0 = 0``, so level 1 is cut out by
    ``phi(X)/X`` and every later level by ``phi(X) - pi_{n-1}``.

Kummer
    A base field ``K'`` of degree ``e < p`` generated by a root ``pi_0`` of an
    Eisenstein polynomial ``g``, and ``pi_{n}^p = pi_{n-1}`` above it.

Elements are nested tuples.  A value of *depth* ``k`` is a tuple of
``deg_k`` values of depth ``k - 1``; depth 0 values are :class:`PadicScalar`.
For Lubin-Tate towers the depth equals the level.  For Kummer towers level
``n`` has depth ``n + 1`` because level 0 is ``K'`` itself.

All steps are Eisenstein, so the monomial ``pi_k^i`` has valuation
``i / E_k`` where ``E_k`` is the degree of depth ``k`` over Q_p, and the
valuation of an element is the minimum over its coordinates of
``v(coefficient) + valuation(monomial)``: these quantities are pairwise
distinct modulo Z.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .padic import DEFAULT_PRECISION, INF, PadicScalar, PrecisionError, rational_valuation

LUBIN_TATE = "LubinTate"
KUMMER = "Kummer"
_KIND_ALIASES = {"lubintate": LUBIN_TATE, "kummer": KUMMER}


class TowerError(ValueError):
    pass


class PrecisionUnreachable(PrecisionError):
    """No truncation of a series certifies the requested precision."""


def _frac(x) -> Fraction:
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x)


def _frac_json(q: Fraction):
    return q.numerator if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class TowerSpec:
    """Description of a tower.

    ``alphas`` holds ``a_1 .. a_{p-1}`` of ``phi`` (Lubin-Tate); ``g`` holds
    the coefficients of the Eisenstein polynomial, constant term first
    (Kummer).  Coefficients are p-integral rationals.
    """

    kind: str
    p: int
    alphas: tuple = ()
    g: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(_frac(a) for a in self.alphas))
        object.__setattr__(self, "g", tuple(_frac(c) for c in self.g))
        self.validate()

    @classmethod
    def cyclotomic(cls, p: int) -> "TowerSpec":
        """``phi(X) = (1 + X)^p - 1``."""
        return cls(LUBIN_TATE, p, alphas=tuple(math.comb(p, i) for i in range(1, p)))

    @classmethod
    def lubin_tate(cls, p: int, alphas) -> "TowerSpec":
        return cls(LUBIN_TATE, p, alphas=tuple(alphas))

    @classmethod
    def kummer(cls, p: int, g) -> "TowerSpec":
        return cls(KUMMER, p, g=tuple(g))

    @property
    def e(self) -> int:
        return len(self.g) - 1 if self.kind == KUMMER else 1

    @property
    def phi_coeffs(self) -> tuple:
        """Coefficients of phi, constant term first (``X^p`` for Kummer)."""
        if self.kind == KUMMER:
            return (Fraction(0),) * self.p + (Fraction(1),)
        return (Fraction(0),) + self.alphas + (Fraction(1),)

    def validate(self) -> None:
        p = self.p
        if p < 2 or any(p % q == 0 for q in range(2, int(p ** 0.5) + 1)):
            raise TowerError(f"p = {p} is not prime")
        if self.kind == LUBIN_TATE:
            if len(self.alphas) != p - 1:
                raise TowerError(f"need {p - 1} coefficients alpha_1..alpha_{p - 1}, got {len(self.alphas)}")
            for i, a in enumerate(self.alphas, start=1):
                if rational_valuation(a, p) < 1:
                    raise TowerError(f"alpha_{i} = {a} is not divisible by p")
            if rational_valuation(self.alphas[0], p) != 1:
                raise TowerError("alpha_1 must have valuation exactly 1 (non-Eisenstein step)")
        elif self.kind == KUMMER:
            e = len(self.g) - 1
            if e < 1:
                raise TowerError("Eisenstein polynomial must have degree >= 1")
            if e >= p:
                raise TowerError(f"Kummer towers need e < p (e = {e}, p = {p})")
            lead = self.g[-1]
            if rational_valuation(lead, p) != 0:
                raise TowerError("leading coefficient of g must be a unit")
            for i, c in enumerate(self.g[:-1]):
                if rational_valuation(c, p) < 1:
                    raise TowerError(f"coefficient of Y^{i} in g is not divisible by p")
            if rational_valuation(self.g[0], p) != 1:
                raise TowerError("constant term of g must have valuation exactly 1")
        else:
            raise TowerError(f"unknown tower kind {self.kind!r}")

    def to_json(self) -> dict:
        if self.kind == LUBIN_TATE:
            return {"kind": self.kind, "p": self.p, "alphas": [_frac_json(a) for a in self.alphas]}
        return {"kind": self.kind, "p": self.p, "g": [_frac_json(c) for c in self.g]}

    @classmethod
    def from_json(cls, obj: dict) -> "TowerSpec":
        kind = _KIND_ALIASES.get(str(obj.get("kind", "")).lower().replace("_", "").replace("-", ""), obj.get("kind"))
        p = int(obj["p"])
        if kind == LUBIN_TATE:
            if obj.get("cyclotomic"):
                return cls.cyclotomic(p)
            return cls(kind, p, alphas=tuple(obj["alphas"]))
        if kind == KUMMER:
            return cls(kind, p, g=tuple(obj["g"]))
        raise TowerError(f"unknown tower kind {kind!r}")


# Coefficient tags of a step polynomial.  A step is stored as the list of
# its non-leading coefficients; each is a tagged pair so that the reduction
# loop can use the cheapest product available.
_ZERO, _SCALAR, _NEG_GEN, _ELEM = 0, 1, 2, 3


@dataclass
class _Step:
    degree: int
    coeffs: list          # tagged coefficients c_0 .. c_{deg-1}
    psums: list = field(default_factory=list)  # tagged power sums s_0 .. s_{deg-1}


class Tower:
    """Tower context built up to level ``n_max`` at working precision ``K``."""

    def __init__(self, spec: TowerSpec, n_max: int, K: int = DEFAULT_PRECISION):
        if n_max < 0:
            raise TowerError("n_max must be >= 0")
        self.spec = spec
        self.p = spec.p
        self.K = K
        self.n_max = n_max
        self.offset = 1 if spec.kind == KUMMER else 0
        self.max_depth = n_max + self.offset
        self._zero0 = PadicScalar.exact_zero(self.p)
        self.steps: list[_Step | None] = [None]
        self.total_degree = [1]
        self._zeros = [self._zero0]
        for k in range(1, self.max_depth + 1):
            step = self._make_step(k)
            self.steps.append(step)
            self.total_degree.append(self.total_degree[-1] * step.degree)
            self._zeros.append(tuple([self._zeros[-1]] * step.degree))
            step.psums = self._power_sums(k)

    # -- construction --------------------------------------------------
    def _scalar(self, q) -> PadicScalar:
        q = Fraction(q)
        if q == 0:
            return self._zero0
        return PadicScalar.from_rational(q, self.p, self.K)

    def _tag_scalar(self, q):
        s = self._scalar(q)
        return (_ZERO, None) if s.is_exact_zero else (_SCALAR, s)

    def _make_step(self, k: int) -> _Step:
        spec = self.spec
        p = self.p
        if spec.kind == LUBIN_TATE:
            if k == 1:
                return _Step(p - 1, [self._tag_scalar(a) for a in spec.alphas])
            return _Step(p, [(_NEG_GEN, None)] + [self._tag_scalar(a) for a in spec.alphas])
        if k == 1:
            lead = spec.g[-1]
            return _Step(spec.e, [self._tag_scalar(c / lead) for c in spec.g[:-1]])
        return _Step(p, [(_NEG_GEN, None)] + [(_ZERO, None)] * (p - 1))

    def _tag_to_data(self, tag, depth: int):
        kind, val = tag
        if kind == _ZERO:
            return self._zeros[depth]
        if kind == _SCALAR:
            return self.embed(val, 0, depth)
        if kind == _NEG_GEN:
            return self.neg(self.generator_data(depth), depth)
        return val

    def _data_to_tag(self, x, depth: int):
        if self.is_exact_zero(x, depth):
            return (_ZERO, None)
        c = x
        d = depth
        while d > 0:
            if any(not self.is_exact_zero(y, d - 1) for y in c[1:]):
                return (_ELEM, x)
            c = c[0]
            d -= 1
        return (_SCALAR, c)

    def _power_sums(self, k: int) -> list:
        """Power sums of the roots of step ``k`` via Newton's identities."""
        step = self.steps[k]
        n = step.degree
        d = k - 1
        c = [self._tag_to_data(t, d) for t in step.coeffs]
        s = [self.embed(self._scalar(n), 0, d)]
        for j in range(1, n):
            acc = self.smul(self._scalar(-j), c[n - j], d)
            for i in range(1, j):
                acc = self.sub(acc, self.mul(c[n - i], s[j - i], d), d)
            s.append(acc)
        return [self._data_to_tag(x, d) for x in s]

    # -- basic structure ----------------------------------------------
    def depth(self, level: int) -> int:
        if level < 0 or level > self.n_max:
            raise TowerError(f"level {level} outside 0..{self.n_max}")
        return level + self.offset

    def level_degree(self, level: int) -> int:
        """Degree of level ``level`` over level ``level - 1`` (over Q_p at level 0)."""
        d = self.depth(level)
        return self.steps[d].degree if d > 0 else 1

    def level_degrees(self) -> list[int]:
        """Degrees of levels 1..n_max over their predecessors."""
        return [self.level_degree(n) for n in range(1, self.n_max + 1)]

    def step_polynomial(self, level: int) -> list:
        """Coefficients (constant first, monic) of the minimal polynomial of
        the level generator over the previous level, as data one depth below."""
        d = self.depth(level)
        if d == 0:
            raise TowerError("level 0 of a Lubin-Tate tower is Q_p itself")
        step = self.steps[d]
        return [self._tag_to_data(t, d - 1) for t in step.coeffs] + [self.embed(self._scalar(1), 0, d - 1)]

    def zero_data(self, depth: int):
        return self._zeros[depth]

    def embed(self, x, from_depth: int, to_depth: int):
        for d in range(from_depth + 1, to_depth + 1):
            x = (x,) + tuple([self._zeros[d - 1]] * (self.steps[d].degree - 1))
        return x

    def generator_data(self, depth: int):
        if depth == 0:
            raise TowerError("no generator at depth 0")
        one = self.embed(self._scalar(1), 0, depth - 1)
        z = self._zeros[depth - 1]
        deg = self.steps[depth].degree
        if deg == 1:
            # degree-one step: the generator is minus the constant coefficient
            return (self.neg(self._tag_to_data(self.steps[depth].coeffs[0], depth - 1), depth - 1),)
        return (z, one) + (z,) * (deg - 2)

    def is_exact_zero(self, x, depth: int) -> bool:
        if depth == 0:
            return x.v == INF
        return all(self.is_exact_zero(y, depth - 1) for y in x)

    # -- ring operations on raw data ----------------------------------
    def add(self, x, y, depth: int):
        if depth == 0:
            return x + y
        return tuple(self.add(a, b, depth - 1) for a, b in zip(x, y))

    def sub(self, x, y, depth: int):
        if depth == 0:
            return x - y
        return tuple(self.sub(a, b, depth - 1) for a, b in zip(x, y))

    def neg(self, x, depth: int):
        if depth == 0:
            return -x
        return tuple(self.neg(a, depth - 1) for a in x)

    def smul(self, c: PadicScalar, x, depth: int):
        if depth == 0:
            return c * x
        return tuple(self.smul(c, a, depth - 1) for a in x)

    def add_scalar(self, x, c: PadicScalar, depth: int):
        if depth == 0:
            return x + c
        return (self.add_scalar(x[0], c, depth - 1),) + tuple(x[1:])

    def _times_tag(self, x, tag, depth: int):
        kind, val = tag
        if kind == _SCALAR:
            return self.smul(val, x, depth)
        if kind == _NEG_GEN:
            return self.neg(self.mul_gen(x, depth), depth)
        if kind == _ELEM:
            return self.mul(x, val, depth)
        raise AssertionError("zero tag has no product")

    def _reduce(self, poly: list, depth: int):
        step = self.steps[depth]
        n = step.degree
        d = depth - 1
        for t in range(len(poly) - 1, n - 1, -1):
            top = poly[t]
            if self.is_exact_zero(top, d):
                continue
            for i, tag in enumerate(step.coeffs):
                if tag[0] != _ZERO:
                    j = t - n + i
                    poly[j] = self.sub(poly[j], self._times_tag(top, tag, d), d)
        return tuple(poly[:n])

    def mul(self, x, y, depth: int):
        if depth == 0:
            return x * y
        d = depth - 1
        n = len(x)
        z = self._zeros[d]
        prod = [z] * (2 * n - 1)
        ynz = [(j, b) for j, b in enumerate(y) if not self.is_exact_zero(b, d)]
        for i, a in enumerate(x):
            if self.is_exact_zero(a, d):
                continue
            for j, b in ynz:
                prod[i + j] = self.add(prod[i + j], self.mul(a, b, d), d)
        return self._reduce(prod, depth)

    def mul_gen(self, x, depth: int):
        """Multiply by the generator ``pi`` of depth ``depth``."""
        step = self.steps[depth]
        n = step.degree
        d = depth - 1
        top = x[-1]
        shifted = [self._zeros[d]] + list(x[:-1])
        if n == 1:
            shifted = [self._zeros[d]]
        if not self.is_exact_zero(top, d):
            for i, tag in enumerate(step.coeffs):
                if tag[0] != _ZERO:
                    shifted[i] = self.sub(shifted[i], self._times_tag(top, tag, d), d)
        return tuple(shifted)

    def trace_step(self, x, depth: int):
        """One-step trace from depth ``depth`` to ``depth - 1``."""
        step = self.steps[depth]
        d = depth - 1
        acc = self._zeros[d]
        for xi, tag in zip(x, step.psums):
            if tag[0] == _ZERO or self.is_exact_zero(xi, d):
                continue
            acc = self.add(acc, self._times_tag(xi, tag, d), d)
        return acc

    # -- valuations and precision -------------------------------------
    def _walk(self, x, depth: int, offset: Fraction, fn):
        if depth == 0:
            fn(x, offset)
            return
        E = self.total_degree[depth]
        for i, xi in enumerate(x):
            self._walk(xi, depth - 1, offset + Fraction(i, E), fn)

    def valuation_data(self, x, depth: int):
        """Lower bound for the valuation (exact when some digit is known)."""
        best = [INF]

        def visit(s, off):
            if s.v != INF:
                best[0] = min(best[0], s.v + off)

        self._walk(x, depth, Fraction(0), visit)
        return best[0]

    def significant_valuation_data(self, x, depth: int):
        """Valuation of the known digits only; ``inf`` when there are none."""
        best = [INF]

        def visit(s, off):
            if s.K > 0:
                best[0] = min(best[0], s.v + off)

        self._walk(x, depth, Fraction(0), visit)
        return best[0]

    def precision_data(self, x, depth: int):
        """Valuation up to which the element is known."""
        best = [INF]

        def visit(s, off):
            if s.v != INF:
                best[0] = min(best[0], s.abs_precision + off)

        self._walk(x, depth, Fraction(0), visit)
        return best[0]

    def cap_data(self, x, depth: int, floor, offset=Fraction(0)):
        """Forget every digit whose contribution lies at valuation >= ``floor``."""
        if floor == INF:
            return x
        if depth == 0:
            if x.v == INF:
                return PadicScalar.zero_at(self.p, math.ceil(floor - offset))
            return x.with_abs_precision(math.ceil(floor - offset))
        E = self.total_degree[depth]
        return tuple(self.cap_data(xi, depth - 1, floor, offset + Fraction(i, E)) for i, xi in enumerate(x))

    def flat(self, x, depth: int) -> list:
        if depth == 0:
            return [x]
        out = []
        for xi in x:
            out.extend(self.flat(xi, depth - 1))
        return out

    # -- element level API --------------------------------------------
    def element(self, data, level: int) -> "TowerElement":
        return TowerElement(self, level, data)

    def pi(self, level: int) -> "TowerElement":
        """The generator ``pi_level`` (for Lubin-Tate, ``pi_0 = 0``)."""
        d = self.depth(level)
        if d == 0:
            return TowerElement(self, 0, self._zero0)
        return TowerElement(self, level, self.generator_data(d))

    def scalar(self, q, level: int = 0) -> "TowerElement":
        s = q if isinstance(q, PadicScalar) else self._scalar(q)
        d = self.depth(level)
        return TowerElement(self, level, self.embed(s, 0, d))

    def zero(self, level: int = 0) -> "TowerElement":
        return TowerElement(self, level, self._zeros[self.depth(level)])

    def from_flat(self, coeffs, level: int) -> "TowerElement":
        """Element from a flat coefficient list (outermost generator slowest)."""
        d = self.depth(level)
        coeffs = [c if isinstance(c, PadicScalar) else self._scalar(c) for c in coeffs]
        if len(coeffs) != self.total_degree[d]:
            raise TowerError(f"expected {self.total_degree[d]} coefficients, got {len(coeffs)}")

        def build(cs, depth):
            if depth == 0:
                return cs[0]
            size = self.total_degree[depth - 1]
            return tuple(build(cs[i * size:(i + 1) * size], depth - 1) for i in range(self.steps[depth].degree))

        return TowerElement(self, level, build(coeffs, d))


def build_tower(spec: TowerSpec, n_max: int, K: int = DEFAULT_PRECISION) -> Tower:
    """Build the tower context for levels ``0..n_max``."""
    spec.validate()
    return Tower(spec, n_max, K)


class TowerElement:
    """Value at a given level of a :class:`Tower`."""

    __slots__ = ("tower", "level", "data")

    def __init__(self, tower: Tower, level: int, data):
        self.tower = tower
        self.level = level
        self.data = data

    @property
    def depth(self) -> int:
        return self.tower.depth(self.level)

    def lift_to(self, level: int) -> "TowerElement":
        if level < self.level:
            raise TowerError("cannot lower the level by inclusion; use trace_down")
        t = self.tower
        return TowerElement(t, level, t.embed(self.data, self.depth, t.depth(level)))

    def _coerce(self, other):
        if isinstance(other, TowerElement):
            if other.tower.spec != self.tower.spec:
                raise TowerError("tower spec mismatch")
            return other
        if isinstance(other, (int, Fraction, PadicScalar)):
            return self.tower.scalar(other, 0)
        return NotImplemented

    def _pair(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return None
        lvl = max(self.level, o.level)
        return self.lift_to(lvl), o.lift_to(lvl), lvl

    def __add__(self, other):
        pr = self._pair(other)
        if pr is None:
            return NotImplemented
        a, b, lvl = pr
        return TowerElement(self.tower, lvl, self.tower.add(a.data, b.data, a.depth))

    __radd__ = __add__

    def __sub__(self, other):
        pr = self._pair(other)
        if pr is None:
            return NotImplemented
        a, b, lvl = pr
        return TowerElement(self.tower, lvl, self.tower.sub(a.data, b.data, a.depth))

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return TowerElement(self.tower, self.level, self.tower.neg(self.data, self.depth))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, PadicScalar)):
            c = other if isinstance(other, PadicScalar) else self.tower._scalar(other)
            if c.is_exact_zero:
                return self.tower.zero(self.level)
            return TowerElement(self.tower, self.level, self.tower.smul(c, self.data, self.depth))
        pr = self._pair(other)
        if pr is None:
            return NotImplemented
        a, b, lvl = pr
        return TowerElement(self.tower, lvl, self.tower.mul(a.data, b.data, a.depth))

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        result = self.tower.scalar(1, self.level)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if not isinstance(other, TowerElement):
            return NotImplemented
        return self.tower.spec == other.tower.spec and self.level == other.level and self.data == other.data

    def __hash__(self):
        return hash((self.level, self.data))

    def valuation(self):
        return self.tower.valuation_data(self.data, self.depth)

    def significant_valuation(self):
        return self.tower.significant_valuation_data(self.data, self.depth)

    def precision(self):
        return self.tower.precision_data(self.data, self.depth)

    def is_zero(self) -> bool:
        """True when no coordinate carries a known digit."""
        return all(c.K == 0 for c in self.coefficients())

    def is_exact_zero(self) -> bool:
        return self.tower.is_exact_zero(self.data, self.depth)

    def cap(self, floor) -> "TowerElement":
        return TowerElement(self.tower, self.level, self.tower.cap_data(self.data, self.depth, floor))

    def coefficients(self) -> list:
        return self.tower.flat(self.data, self.depth)

    def trace_down(self, m: int) -> "TowerElement":
        return trace_down(self, m)

    def to_json(self) -> dict:
        def enc(x, depth):
            if depth == 0:
                return x.to_json()
            return [enc(y, depth - 1) for y in x]

        return {"spec": self.tower.spec.to_json(), "level": self.level, "coeffs": enc(self.data, self.depth)}

    @classmethod
    def from_json(cls, obj: dict, tower: Tower) -> "TowerElement":
        if TowerSpec.from_json(obj["spec"]) != tower.spec:
            raise TowerError("element belongs to a different tower spec")
        level = int(obj["level"])
        depth = tower.depth(level)

        def dec(x, d):
            if d == 0:
                return PadicScalar.from_json(x)
            if len(x) != tower.steps[d].degree:
                raise TowerError(f"depth {d} expects {tower.steps[d].degree} coefficients")
            return tuple(dec(y, d - 1) for y in x)

        return cls(tower, level, dec(obj["coeffs"], depth))

    def __repr__(self):
        return f"TowerElement(level={self.level}, coeffs={self.coefficients()})"


def elem_arith(op: str, a: TowerElement, b: TowerElement) -> TowerElement:
    """Ring operation ``op`` in {add, sub, mul}; operands meet at the higher level."""
    if a.tower.spec != b.tower.spec:
        raise TowerError("tower spec mismatch")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown operation {op!r}")


def trace_down(x: TowerElement, m: int) -> TowerElement:
    """``Tr_{n/m}`` as a composite of one-step traces."""
    if m > x.level:
        raise TowerError(f"cannot trace from level {x.level} up to level {m}")
    t = x.tower
    data = x.data
    depth = x.depth
    target = t.depth(m)
    while depth > target:
        data = t.trace_step(data, depth)
        depth -= 1
    return TowerElement(t, m, data)


def phi_of(x: TowerElement) -> TowerElement:
    """Apply the polynomial ``phi`` of the tower spec to an element."""
    t = x.tower
    acc = t.zero(x.level)
    for c in reversed(t.spec.phi_coeffs):
        acc = acc * x
        if c != 0:
            acc = acc + t.scalar(c, x.level)
    return acc


# -- series evaluation --------------------------------------------------

def certified_truncation(f, w, target, D_cap=None):
    """Smallest truncation degree whose discarded part has valuation >= target.

    ``f`` provides ``coeffs`` (list of PadicScalar, degrees 0..D) and
    ``tail_min(w, start)``, a lower bound for ``v(c_m) + m*w`` over all
    ``m >= start``.  Returns ``(D', floor)`` where ``floor`` is the certified
    valuation of everything beyond degree ``D'``.
    """
    coeffs = f.coeffs
    D = len(coeffs) - 1 if D_cap is None else min(D_cap, len(coeffs) - 1)
    beyond = f.tail_min(w, D + 1)
    suffix = [INF] * (D + 2)
    suffix[D + 1] = beyond
    for m in range(D, -1, -1):
        c = coeffs[m]
        val = INF if c.v == INF else c.v + m * w
        suffix[m] = min(suffix[m + 1], val)
    for Dp in range(0, D + 1):
        if suffix[Dp + 1] >= target:
            return Dp, suffix[Dp + 1]
    raise PrecisionUnreachable(
        f"precision unreachable: truncation at degree {D} certifies only {beyond} < {target}"
    )


def eval_series(f, x: TowerElement, target_abs_precision, power_of_generator: int | None = None) -> TowerElement:
    """Evaluate a power series at ``x`` with a certified tail.

    The result is capped at the certified floor: every digit it reports is
    guaranteed by the truncation bound and the tracked coefficient precision.
    ``power_of_generator=i`` declares ``x = pi_level^i`` and switches Horner's
    rule to repeated multiplication by the generator.
    """
    t = x.tower
    depth = x.depth
    if power_of_generator is not None:
        w = Fraction(power_of_generator, t.total_degree[depth])
    else:
        w = x.valuation()
    if w == INF:
        # f(0) = c_0 exactly as far as c_0 is known
        return t.scalar(f.coeffs[0], x.level)
    if w <= 0:
        raise TowerError("series evaluation needs a point of positive valuation")
    Dp, floor = certified_truncation(f, w, target_abs_precision)
    coeffs = f.coeffs
    acc = t.embed(coeffs[Dp], 0, depth)
    if power_of_generator is not None:
        for m in range(Dp - 1, -1, -1):
            for _ in range(power_of_generator):
                acc = t.mul_gen(acc, depth)
            c = coeffs[m]
            if not c.is_exact_zero:
                acc = t.add_scalar(acc, c, depth)
    else:
        xd = x.data
        for m in range(Dp - 1, -1, -1):
            acc = t.mul(acc, xd, depth)
            c = coeffs[m]
            if not c.is_exact_zero:
                acc = t.add_scalar(acc, c, depth)
    return TowerElement(t, x.level, t.cap_data(acc, depth, floor))

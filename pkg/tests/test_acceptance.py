"""
Acceptance suite: one test per criterion, each recording a PASS/FAIL line.

The lines are printed at the end of the pytest run by ``conftest.py`` (and
immediately when the test itself runs with ``-s``).  Tolerances are pinned
below and never loosened to make a check pass.
"""
import itertools
import random
import time
import warnings
from fractions import Fraction

from padictower.dieudonne import (
    IN_BETWEEN,
    ORDINARY,
    SUPERSINGULAR,
    HondaData,
    classify_reduction,
    newton_slopes,
)
from padictower.iwasawa import ddr_check, pr_solve, rank_bound, sharpflat_limit, synth_generate, telescoping_check
from padictower.iwasawa.lambda_ring import LambdaElt, omega_n
from padictower.iwasawa.perrin_riou import plant
from padictower.logseries import (
    LogContext,
    build_l,
    log_operator,
    verify_kummer_relation,
    verify_norm_relation,
    verify_one_step_relation,
    verify_refined_relation,
)
from padictower.padic import PadicScalar, rational_valuation
from padictower.tower import TowerSpec, build_tower, trace_down

# pinned tolerances
K_WORK = 40
MIN_DIGITS = 20              # residual valuation floor required at K = 40
CRIT1_SECONDS = 60.0
CRIT6_SECONDS = 120.0
N_PADIC_TRIPLES = 10_000
N_TOWER_ELEMENTS = 1_000

RESULTS: list[str] = []


def record(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def _floor_ok(reports) -> tuple[bool, object]:
    worst = min((r.residual_valuation for r in reports), default=None)
    ok = all(r.passed and r.residual_valuation >= MIN_DIGITS for r in reports)
    return ok, worst


# -- criterion 1 and 4 share contexts -----------------------------------

CONFIGS = [(3, 0, range(2, 5)), (3, 3, range(2, 5)), (5, 0, range(2, 4)), (5, 5, range(2, 4))]
_CTX: dict = {}


def _context(p, ap, n_max):
    key = (p, ap)
    if key not in _CTX:
        _CTX[key] = LogContext(HondaData.elliptic(p, ap), TowerSpec.cyclotomic(p), n_max, K_WORK)
    return _CTX[key]


def test_criterion_01_norm_relations():
    t0 = time.perf_counter()
    reports = []
    for p, ap, levels in CONFIGS:
        ctx = _context(p, ap, max(levels))
        for n in levels:
            if n >= ctx.H.d + 1:
                reports += verify_norm_relation(ctx.H, ctx.spec, n, ctx)
            else:
                reports += verify_one_step_relation(ctx.H, ctx.spec, n, ctx)
    elapsed = time.perf_counter() - t0
    ok, worst = _floor_ok(reports)
    record(1, ok and elapsed < CRIT1_SECONDS,
           f"{len(reports)} residuals, min valuation {worst} (need >= {MIN_DIGITS}), {elapsed:.1f}s (< {CRIT1_SECONDS:.0f}s); "
           "at n = 2 only the one-step relation applies (the d-step one needs n >= 3)")


def test_criterion_02_cubic_norm_relation():
    H = HondaData(3, (3, 3, 3))
    reports = verify_norm_relation(H, TowerSpec.cyclotomic(3), 4)
    ok, worst = _floor_ok(reports)
    record(2, ok, f"H = X^3+3X^2+3X+3, n = 4: {len(reports)} residuals, min valuation {worst}")


def test_criterion_03_kummer_relations():
    H = HondaData(3, (3, 0))
    spec = TowerSpec.kummer(3, (-3, 0, 1))
    ctx = LogContext(H, spec, 3, K_WORK)
    reports = []
    for i in (1, 2):
        reports += verify_kummer_relation(H, spec, 3, i, ctx)
    exact = [r for r in reports if r.relation == "trace-pi-power"]
    rel = [r for r in reports if r.relation != "trace-pi-power"]
    ok, worst = _floor_ok(rel)
    ok = ok and all(r.exact_zero for r in exact)
    record(3, ok, f"i in {{1, 2}}: min valuation {worst}; Tr pi_n^i exact zero for {len(exact)} cases")


def test_criterion_04_refined_relations():
    reports, direct = [], []
    for p, ap, levels in CONFIGS:
        ctx = _context(p, ap, max(levels))
        for n in levels:
            rs = verify_refined_relation(ctx.H, ctx.spec, n, ctx)
            reports += [r for r in rs if r.relation != "trace-phi-pi"]
            direct += [r for r in rs if r.relation == "trace-phi-pi"]
    ok, worst = _floor_ok(reports)
    direct_ok = all(r.passed and r.residual_valuation >= K_WORK for r in direct)
    record(4, ok and direct_ok,
           f"{len(reports)} residuals, min valuation {worst}; Tr phi(pi_n) = p pi_(n-1) with no digit below "
           f"{K_WORK} in {len(direct)} cases")


def test_criterion_05_log_series_identities():
    rng = random.Random(20261016)
    cyc = TowerSpec.cyclotomic(3)
    D = 81
    cases = []
    while len(cases) < 10:
        d = rng.randint(2, 3)
        a = [3 * rng.choice([1, 2, 4, 5, 7])] + [rng.randint(-12, 12) for _ in range(d - 1)]
        H = HondaData(3, a)
        if H.supports_log():
            cases.append(H)
    bad = []
    for H in cases:
        op = log_operator(H, cyc, D, K_WORK, target=K_WORK)
        parts = [op.materialize(D, K_WORK)] + [op.shift(j).materialize(D, K_WORK) for j in range(1, H.d + 1)]
        for m in range(D + 1):
            acc = parts[0].coeffs[m]
            for i in range(1, H.d + 1):
                acc = acc + PadicScalar.from_rational(H.b(i), 3, K_WORK) * parts[i].coeffs[m]
            if m == 1:
                acc = acc - 1
            if not acc.is_zero:
                bad.append((H.a, "identity", m))
                break
        l1 = build_l(H, cyc, D, K_WORK).coeffs[1]
        expected = PadicScalar.from_rational(H.a[0] / H.evaluate(cyc.alphas[0]), 3, K_WORK)
        diff = l1 - expected
        if not (diff.is_zero and diff.abs_precision >= min(l1.abs_precision, K_WORK)):
            bad.append((H.a, "derivative", diff))
    record(5, not bad, f"10 random H at p = 3, D = {D}: l + J(phi) o l = X and l'(0) = a0/H(alpha1); failures {bad}")


def test_criterion_06_sharp_flat():
    t0 = time.perf_counter()
    exact_ok = True
    for e in (1, 2):
        inp, planted = synth_generate(e, 0, 4, "exact", T=1, seed=100 + e)
        res = sharpflat_limit(inp, 1, 4)
        exact_ok &= (res.L_sharp == planted.L_sharp and res.L_flat == planted.L_flat
                     and res.det_sharp == planted.det_sharp and res.det_flat == planted.det_flat)
    cert_ok, tele_ok, checked = True, True, 0
    for e in (1, 2):
        inp, _ = synth_generate(e, 0, 4, "noisy", T=1, seed=200 + e)
        res = sharpflat_limit(inp, 1, 4)
        for entry in res.convergence:
            checked += 1
            cert_ok &= entry["observed"] == "inf" or entry["observed"] >= entry["required"]
        for n in range(1, 5):
            tele_ok &= telescoping_check(inp, res.L_sharp, res.L_flat, n)
    elapsed = time.perf_counter() - t0
    record(6, exact_ok and cert_ok and tele_ok and elapsed < CRIT6_SECONDS,
           f"exact round trip {exact_ok}, certificate {cert_ok} over {checked} (n, m, i), telescoping {tele_ok}, "
           f"{elapsed:.1f}s (< {CRIT6_SECONDS:.0f}s)")


def test_criterion_07_perrin_riou():
    ok = True
    details = []
    for R in ([3, 0, 1], [3, -1, 1]):
        F = ((2, -1, 4), (1, 0, 0, 3))
        f_list = plant(R, F, 1, 5, 3)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # T^2 - T + 3 has a root of valuation 1
            sol = pr_solve(R, f_list, 1)
        mod = omega_n(sol.n_s, 3)
        want = tuple(tuple(LambdaElt(3, Fk).mod(mod).c) for Fk in F)
        got = tuple(tuple(int(x) for x in Fk) for Fk in sol.reduced(sol.n_s))
        ok &= got == want
        details.append(f"R={R}: recovered mod omega_{sol.n_s} {got == want}")
    rng = random.Random(7)
    integral = 0
    for _ in range(50):
        R = rng.choice(([3, 0, 1], [3, -1, 1]))
        F = tuple(tuple(rng.randint(-9, 9) for _ in range(3)) for _ in range(2))
        values = plant(R, F, 0, 4, 3)
        integral += all(isinstance(x, int) for v in values for x in v.c)
    ok &= integral == 50
    record(7, ok, "; ".join(details) + f"; {integral}/50 symmetric plants integral")


# -- criterion 8: residual-polynomial oracle ----------------------------


def _root_valuations_by_substitution(coeffs, p):
    """Root valuations of a monic polynomial with nonzero constant term.

    For every candidate ``a/b`` (``b <= deg``) substitute ``X = pi^a Y`` over
    ``Q_p(pi)``, ``pi^b = p``; after dividing by the minimal ``pi``-power the
    reduction modulo ``pi`` is a polynomial over ``F_p`` whose nonzero roots
    (in an algebraic closure) are the reductions of ``alpha / pi^a`` for the
    roots ``alpha`` of valuation exactly ``a/b``.  Their number is the gap
    between its top and bottom surviving exponents.
    """
    d = len(coeffs) - 1
    vals = [rational_valuation(c, p) for c in coeffs]
    top = max(v for v in vals if v != float("inf"))
    found = {}
    for b in range(1, d + 1):
        for a in range(0, b * int(top) + 1):
            lam = Fraction(a, b)
            if lam in found:
                continue
            weights = {i: vals[i] + lam * i for i in range(d + 1) if vals[i] != float("inf")}
            m = min(weights.values())
            surviving = [i for i, w in weights.items() if w == m]
            count = max(surviving) - min(surviving)
            if count:
                found[lam] = count
    assert sum(found.values()) == d, (coeffs, found)
    return found


def _oracle_reduction(H: HondaData) -> str:
    # roots of H^vee are p / alpha for the roots alpha of H
    vals = _root_valuations_by_substitution(list(H.coeffs), H.p)
    dual = {1 - v for v in vals}
    if all(v == 0 for v in dual):
        return ORDINARY
    if all(v > 0 for v in dual):
        return SUPERSINGULAR
    return IN_BETWEEN


def _coefficient_choices(lo):
    out = [0] if lo == 0 else []
    for k in range(lo, 4):
        for u in (1, 2, -1, 4):
            out.append(u * 3 ** k)
    return out


def test_criterion_08_classifier():
    total, mismatches = 0, []
    for d in (1, 2, 3):
        for a0 in _coefficient_choices(1):
            for rest in itertools.product(_coefficient_choices(0), repeat=d - 1):
                H = HondaData(3, (a0, *rest))
                total += 1
                got = classify_reduction(H)
                want = _oracle_reduction(H)
                slopes = dict(newton_slopes(list(H.coeffs), 3))
                if got != want or slopes != _root_valuations_by_substitution(list(H.coeffs), 3):
                    mismatches.append(H.a)
    record(8, not mismatches, f"{total} polynomials of degree <= 3, coefficient valuations <= 3; mismatches {mismatches[:5]}")


def test_criterion_09_calculators():
    rb = rank_bound(Fraction(1, 2), 2, 3, 4, 0, 0)
    t1, t2 = ddr_check(3, 1, 2, 3), ddr_check(2, 1, 2, 3)
    record(9, rb == 144 and t1 is True and t2 is False, f"rank_bound = {rb}; ddr (3,1) -> {t1}, (2,1) -> {t2}")


def test_criterion_10_precision_laws():
    rng = random.Random(10)
    p = 3
    bad = 0
    for _ in range(N_PADIC_TRIPLES):
        xs = []
        for _ in range(3):
            num = rng.randint(1, 10 ** 8) * rng.choice((-1, 1))
            den = rng.randint(1, 10 ** 4)
            xs.append(PadicScalar.from_rational(Fraction(num, den) * Fraction(3) ** rng.randint(-4, 4), p,
                                                rng.randint(1, 40)))
        a, b, c = xs
        ab = a * b
        s = a + b
        checks = [
            ab.v == a.v + b.v and ab.K == min(a.K, b.K),
            s.valuation() >= min(a.v, b.v),
            a.v == b.v or s.valuation() == min(a.v, b.v),
            s.abs_precision == min(a.abs_precision, b.abs_precision),
            (ab / b).equals_at_precision(a),
            (a + b).equals_at_precision(b + a),
            ((a + b) + c).equals_at_precision(a + (b + c)),
        ]
        bad += not all(checks)
    tower = build_tower(TowerSpec.cyclotomic(3), 4, K=30)
    tbad = 0
    for _ in range(N_TOWER_ELEMENTS):
        n = rng.randint(1, 4)
        x = tower.from_flat([rng.randint(-20, 20) for _ in range(tower.total_degree[n])], n)
        m = rng.randint(0, n)
        k = rng.randint(0, m)
        tbad += not (trace_down(x, k) - trace_down(trace_down(x, m), k)).is_zero()
    record(10, bad == 0 and tbad == 0,
           f"{N_PADIC_TRIPLES} scalar triples ({bad} violations); {N_TOWER_ELEMENTS} tower elements up to level 4 "
           f"({tbad} transitivity violations)")

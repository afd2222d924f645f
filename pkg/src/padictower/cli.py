"""
Batch front end.

    padictower <command> --config run.json [--out report.json] [--seed N]
               [--parallel] [--timing] [--csv residuals.csv]

Exit status: 0 when every check passes (or the command only computes),
1 when a check fails, 2 for usage or config errors, 3 when the requested
precision could not be certified.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from .dieudonne import (
    HondaData,
    InvalidHondaData,
    LogCoeffs,
    classify_slopes,
    dual_char_poly,
    newton_slopes,
)
from .iwasawa import (
    InexactDivision,
    LambdaElt,
    RecurrenceViolation,
    SharpFlatInput,
    ddr_check,
    pr_solve,
    rank_bound,
    sharpflat_limit,
    synth_generate,
    telescoping_check,
)
from .iwasawa.perrin_riou import RecurrenceError, VandermondeError
from .logseries import (
    DEFAULT_FLOOR,
    FAIL,
    INCONCLUSIVE,
    ConvergenceError,
    LogContext,
    build_l,
    verify_kummer_relation,
    verify_norm_relation,
    verify_refined_relation,
    y_combination,
)
from .padic import DEFAULT_PRECISION, INF, PrecisionError
from .tower import KUMMER, TowerError, TowerSpec

CONFIG_SCHEMA = "padictower/config/v1"
REPORT_SCHEMA = "padictower/report/v1"

COMMANDS = ("classify", "logser", "verify-norm", "verify-kummer", "verify-refined",
            "sharpflat", "pr-solve", "rank-bound", "ddr-check")

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_PRECISION = 0, 1, 2, 3


class ConfigError(ValueError):
    """Malformed config; the message names the offending line or field."""


def _q(x) -> str | int:
    x = Fraction(x)
    return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _v(x):
    return "inf" if x == INF else _q(x)


# -- config access ------------------------------------------------------

def load_config(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    schema = cfg.get("schema", CONFIG_SCHEMA)
    if schema != CONFIG_SCHEMA:
        raise ConfigError(f"field 'schema': expected {CONFIG_SCHEMA!r}, got {schema!r}")
    cfg["_path"] = str(path)
    return cfg


_MISSING = object()


def field(cfg: dict, dotted: str, default=_MISSING, kind=None):
    """Fetch ``a.b.c`` from nested dicts with a diagnostic naming the field."""
    cur = cfg
    for part in dotted.split("."):
        if not isinstance(cur, dict) or part not in cur:
            if default is not _MISSING:
                return default
            raise ConfigError(f"field '{dotted}': missing")
        cur = cur[part]
    if kind is not None:
        try:
            if kind is int and (isinstance(cur, bool) or int(cur) != Fraction(cur)):
                raise ValueError
            cur = kind(cur)
        except (TypeError, ValueError, ZeroDivisionError):
            raise ConfigError(f"field '{dotted}': expected {kind.__name__}, got {cur!r}") from None
    return cur


def _prime(cfg) -> int:
    return field(cfg, "p", kind=int)


def _honda(cfg) -> HondaData:
    p = _prime(cfg)
    block = field(cfg, "honda")
    try:
        return HondaData.from_json(block, p)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InvalidHondaData):
            raise
        raise ConfigError(f"field 'honda': {exc}") from None


def _tower_spec(cfg) -> TowerSpec:
    block = dict(field(cfg, "tower"))
    block.setdefault("p", _prime(cfg))
    try:
        spec = TowerSpec.from_json(block)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, TowerError):
            raise
        raise ConfigError(f"field 'tower': {exc}") from None
    if spec.p != _prime(cfg):
        raise ConfigError(f"field 'tower.p': {spec.p} differs from p = {_prime(cfg)}")
    spec.validate()
    return spec


def _log_context(cfg, H, spec, n_max) -> LogContext:
    K = field(cfg, "K", DEFAULT_PRECISION, int)
    floor = field(cfg, "floor", DEFAULT_FLOOR, int)
    D = field(cfg, "D", None)
    return LogContext(H, spec, n_max, K, floor, None if D is None else int(D))


def _levels(cfg, key="n") -> list[int]:
    raw = field(cfg, key)
    vals = raw if isinstance(raw, list) else [raw]
    try:
        return [int(x) for x in vals]
    except (TypeError, ValueError):
        raise ConfigError(f"field '{key}': expected an integer or a list of integers") from None


# -- commands -----------------------------------------------------------

def cmd_classify(cfg, args) -> tuple[dict, list]:
    H = _honda(cfg)
    dual = dual_char_poly(H)
    slopes = newton_slopes(dual, H.p)
    return {
        "reduction": classify_slopes(slopes),
        "dual_char_poly": [_q(c) for c in dual],
        "slopes": [[_v(s), m] for s, m in slopes],
        "supports_log": H.supports_log(),
    }, []


def cmd_logser(cfg, args):
    H = _honda(cfg)
    spec = _tower_spec(cfg)
    K = field(cfg, "K", DEFAULT_PRECISION, int)
    D = field(cfg, "D", None)
    D = int(D) if D is not None else spec.p ** (field(cfg, "n_max", 2, int) + 1)
    l = build_l(H, spec, D, K)
    out = {"D": D, "l": [c.to_json() for c in l.coeffs],
           "l_rational": [_q(c.to_fraction()) for c in l.coeffs]}
    honda = field(cfg, "honda")
    if "alpha1" in honda and "alpha2" in honda and H.d == 2:
        c = LogCoeffs.from_rationals(Fraction(honda["alpha1"]), Fraction(honda["alpha2"]), H.p, K)
        y = y_combination(H, c, spec, D, K)
        out["y"] = [x.to_json() for x in y.coeffs]
    return out, []


def _run_reports(fn, jobs, parallel):
    if parallel and len(jobs) > 1:
        with ProcessPoolExecutor() as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


def _norm_job(job):
    H, spec, n, cfg = job
    return verify_norm_relation(H, spec, n, _log_context(cfg, H, spec, n))


def _kummer_job(job):
    H, spec, n, i, cfg = job
    return verify_kummer_relation(H, spec, n, i, _log_context(cfg, H, spec, n))


def _refined_job(job):
    H, spec, n, cfg = job
    return verify_refined_relation(H, spec, n, _log_context(cfg, H, spec, n))


def _shared_levels(fn_single, H, spec, ns, cfg, parallel, job_fn, extra=()):
    if parallel:
        groups = _run_reports(job_fn, [(H, spec, n, *extra, cfg) for n in ns], True)
    else:
        ctx = _log_context(cfg, H, spec, max(ns))
        groups = [fn_single(n, ctx) for n in ns]
    return [r for g in groups for r in g]


def cmd_verify_norm(cfg, args):
    H, spec, ns = _honda(cfg), _tower_spec(cfg), _levels(cfg)
    reports = _shared_levels(lambda n, ctx: verify_norm_relation(H, spec, n, ctx), H, spec, ns, cfg,
                             args.parallel, _norm_job)
    return {}, reports


def cmd_verify_kummer(cfg, args):
    H, spec, ns = _honda(cfg), _tower_spec(cfg), _levels(cfg)
    if spec.kind != KUMMER:
        raise ConfigError("field 'tower.kind': verify-kummer needs a kummer tower")
    i_vals = field(cfg, "i", list(range(1, spec.e + 1)))
    i_vals = i_vals if isinstance(i_vals, list) else [i_vals]
    reports = []
    for i in i_vals:
        reports += _shared_levels(lambda n, ctx, i=int(i): verify_kummer_relation(H, spec, n, i, ctx), H, spec,
                                  ns, cfg, args.parallel, _kummer_job, (int(i),))
    return {}, reports


def cmd_verify_refined(cfg, args):
    H, spec, ns = _honda(cfg), _tower_spec(cfg), _levels(cfg)
    reports = _shared_levels(lambda n, ctx: verify_refined_relation(H, spec, n, ctx), H, spec, ns, cfg,
                             args.parallel, _refined_job)
    return {}, reports


def _sharpflat_input(cfg, seed):
    block = field(cfg, "sharpflat")
    if "input" in block:
        path = Path(block["input"])
        if not path.is_absolute():
            path = Path(cfg["_path"]).parent / path
        try:
            obj = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigError(f"field 'sharpflat.input': cannot read {path} ({exc.strerror})") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
        try:
            return SharpFlatInput.from_json(obj), None
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"field 'sharpflat.input': malformed input file ({exc})") from None
    if "synth" in block:
        s = block["synth"]
        inp, planted = synth_generate(
            e=field(cfg, "sharpflat.synth.e", kind=int),
            N=field(cfg, "sharpflat.synth.N", 0, int),
            depth=field(cfg, "sharpflat.synth.depth", kind=int),
            mode=s.get("mode", "exact"),
            T=field(cfg, "sharpflat.synth.T", 1, int),
            seed=seed,
            p=field(cfg, "p", 3, int),
        )
        return inp, planted
    raise ConfigError("field 'sharpflat': need either 'input' or 'synth'")


def cmd_sharpflat(cfg, args):
    inp, planted = _sharpflat_input(cfg, args.seed)
    n_lo = field(cfg, "sharpflat.n_lo", 1, int)
    n_hi = field(cfg, "sharpflat.n_hi", inp.max_depth(), int)
    res = sharpflat_limit(inp, n_lo, n_hi, parallel=args.parallel)
    tele = {str(n): telescoping_check(inp, res.L_sharp, res.L_flat, n) for n in range(1, n_hi + 1)}
    out = {"result": res.to_json(), "telescoping": tele, "input_schema": inp.to_json()["schema"]}
    checks = [res.converged] + list(tele.values())
    if planted is not None and cfg["sharpflat"]["synth"].get("mode", "exact") == "exact":
        match = res.L_sharp == planted.L_sharp and res.L_flat == planted.L_flat
        out["planted_recovered"] = match
        checks.append(match)
    return out, [], all(checks)


def _lambda_list(cfg, key, p):
    raw = field(cfg, key)
    try:
        return [LambdaElt(p, x) for x in raw]
    except (TypeError, ValueError):
        raise ConfigError(f"field '{key}': expected a list of integer coefficient lists") from None


def cmd_pr_solve(cfg, args):
    p = _prime(cfg)
    R = field(cfg, "pr_solve.R")
    f_list = _lambda_list(cfg, "pr_solve.f", p)
    n0 = field(cfg, "pr_solve.n0", kind=int)
    K = field(cfg, "pr_solve.K", None)
    sol = pr_solve(R, f_list, n0, p, None if K is None else int(K))
    return {"solution": sol.to_json()}, []


def cmd_rank_bound(cfg, args):
    b = rank_bound(
        field(cfg, "rank_bound.lambda", kind=Fraction),
        field(cfg, "rank_bound.e", kind=int),
        field(cfg, "rank_bound.p", _prime(cfg) if "p" in cfg else _MISSING, int),
        field(cfg, "rank_bound.n", kind=int),
        field(cfg, "rank_bound.C", 0, Fraction),
        field(cfg, "rank_bound.C_prime", 0, Fraction),
    )
    return {"bound": _q(b)}, []


def cmd_ddr_check(cfg, args):
    ok = ddr_check(
        field(cfg, "ddr.T", kind=Fraction),
        field(cfg, "ddr.S", kind=Fraction),
        field(cfg, "ddr.e", kind=int),
        field(cfg, "ddr.p", _prime(cfg) if "p" in cfg else _MISSING, int),
    )
    return {"finite_rank_condition": ok}, []


HANDLERS = {
    "classify": cmd_classify,
    "logser": cmd_logser,
    "verify-norm": cmd_verify_norm,
    "verify-kummer": cmd_verify_kummer,
    "verify-refined": cmd_verify_refined,
    "sharpflat": cmd_sharpflat,
    "pr-solve": cmd_pr_solve,
    "rank-bound": cmd_rank_bound,
    "ddr-check": cmd_ddr_check,
}

_MODULE_TAG = {
    "PrecisionError": "padic", "PrimeMismatch": "padic", "PrecisionUnreachable": "tower",
    "TowerError": "tower", "InvalidHondaData": "dieudonne", "ConvergenceError": "logseries",
    "InexactDivision": "iwasawa", "RecurrenceViolation": "iwasawa", "RecurrenceError": "iwasawa",
    "VandermondeError": "iwasawa",
}


def run(command: str, cfg: dict, args) -> tuple[dict, int]:
    """Execute one command and return ``(report, exit_status)``."""
    echo = {k: v for k, v in cfg.items() if not k.startswith("_")}
    report = {"schema": REPORT_SCHEMA, "command": command, "inputs": echo, "seed": args.seed}
    t0 = time.perf_counter()
    out = HANDLERS[command](cfg, args)
    results, residuals = out[0], out[1]
    status = EXIT_OK
    if len(out) > 2 and not out[2]:
        status = EXIT_CHECK
    if residuals:
        statuses = [r.status for r in residuals]
        if FAIL in statuses:
            status = EXIT_CHECK
        elif INCONCLUSIVE in statuses and status == EXIT_OK:
            status = EXIT_PRECISION
        results["residuals"] = [r.to_json() for r in residuals]
    report["results"] = results
    if command == "classify":
        report["reduction"] = results["reduction"]
    if command == "rank-bound":
        report["bound"] = results["bound"]
    report["pass"] = status == EXIT_OK
    if args.timing:
        report["timing"] = {"seconds": round(time.perf_counter() - t0, 3)}
    return report, status


def write_csv(path: str, residuals: list[dict]) -> None:
    cols = ["relation", "n", "i", "residual_valuation", "certified_floor", "required_floor", "status"]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols)
        w.writeheader()
        for r in residuals:
            w.writerow({"relation": r["relation"], "n": r["params"].get("n"), "i": r["params"].get("i", ""),
                        "residual_valuation": r["residual_valuation"], "certified_floor": r["certified_floor"],
                        "required_floor": r["required_floor"], "status": r["status"]})


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="padictower", description="Trace relations and Iwasawa-theoretic calculators.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--out", help="write the JSON report here instead of stdout")
    ap.add_argument("--seed", type=int, default=0, help="seed for synthetic data (recorded in the report)")
    ap.add_argument("--parallel", action="store_true", help="run independent verifications in worker processes")
    ap.add_argument("--timing", action="store_true", help="add wall-clock timing to the report")
    ap.add_argument("--csv", help="also write the residual table as CSV")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if not 0 <= args.seed < 2 ** 64:
        print("error: --seed must fit in an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = load_config(args.config)
        report, status = run(args.command, cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PrecisionError, ConvergenceError) as exc:
        print(f"[{_MODULE_TAG.get(type(exc).__name__, 'padic')}] {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except (InvalidHondaData, TowerError, RecurrenceViolation, RecurrenceError, VandermondeError,
            InexactDivision) as exc:
        print(f"[{_MODULE_TAG.get(type(exc).__name__, 'error')}] {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CHECK if isinstance(exc, (RecurrenceViolation, RecurrenceError, InexactDivision)) else EXIT_USAGE
    text = dumps(report)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.csv and "residuals" in report["results"]:
        write_csv(args.csv, report["results"]["residuals"])
    return status


if __name__ == "__main__":
    sys.exit(main())

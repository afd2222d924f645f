import json
from fractions import Fraction

import pytest

from padictower.cli import main


def run(tmp_path, command, cfg, *extra):
    path = tmp_path / "cfg.json"
    path.write_text(cfg if isinstance(cfg, str) else json.dumps(cfg))
    out = tmp_path / "out.json"
    code = main([command, "--config", str(path), "--out", str(out), *extra])
    report = json.loads(out.read_text()) if out.exists() else None
    return code, report


CYC = {"kind": "lubin_tate", "cyclotomic": True}


def test_classify(tmp_path):
    code, rep = run(tmp_path, "classify", {"p": 3, "honda": {"d": 2, "a": [3, 0]}})
    assert code == 0
    assert rep["reduction"] == "Supersingular"
    assert rep["inputs"]["honda"]["a"] == [3, 0]
    assert rep["seed"] == 0


def test_verify_refined(tmp_path):
    cfg = {"p": 3, "K": 40, "tower": CYC, "honda": {"d": 2, "a": [3, 0]}, "n": 3}
    code, rep = run(tmp_path, "verify-refined", cfg)
    assert code == 0 and rep["pass"] is True
    for r in rep["results"]["residuals"]:
        v = r["residual_valuation"]
        assert v == "inf" or Fraction(v) >= r["required_floor"]
        assert r["pass"]


def test_verify_norm_and_csv(tmp_path):
    cfg = {"p": 3, "tower": CYC, "honda": {"d": 2, "a": [3, -3]}, "n": [3]}
    csv_path = tmp_path / "res.csv"
    code, rep = run(tmp_path, "verify-norm", cfg, "--csv", str(csv_path))
    assert code == 0
    assert csv_path.read_text().splitlines()[0].startswith("relation,n,i")


def test_verify_kummer(tmp_path):
    cfg = {"p": 3, "tower": {"kind": "kummer", "g": [-3, 0, 1]}, "honda": {"d": 2, "a": [3, 0]}, "n": 3, "i": [1]}
    code, rep = run(tmp_path, "verify-kummer", cfg)
    assert code == 0
    assert rep["results"]["residuals"][0]["relation"] == "trace-pi-power"


def test_inconclusive_precision_exit_code(tmp_path):
    cfg = {"p": 3, "K": 10, "floor": 30, "D": 27, "tower": CYC, "honda": {"d": 2, "a": [3, 0]}, "n": 2}
    code, _ = run(tmp_path, "verify-refined", cfg)
    assert code == 3


def test_rank_bound_and_ddr(tmp_path):
    code, rep = run(tmp_path, "rank-bound", {"p": 3, "rank_bound": {"lambda": "1/2", "e": 2, "n": 4}})
    assert code == 0 and rep["bound"] == 144
    code, rep = run(tmp_path, "ddr-check", {"p": 3, "ddr": {"T": 2, "S": 1, "e": 2}})
    assert code == 0 and rep["results"]["finite_rank_condition"] is False


def test_sharpflat_deterministic(tmp_path):
    cfg = {"p": 3, "sharpflat": {"synth": {"e": 2, "depth": 3, "mode": "noisy", "T": 2}}}
    code, first = run(tmp_path, "sharpflat", cfg, "--seed", "17")
    text1 = (tmp_path / "out.json").read_text()
    code2, _ = run(tmp_path, "sharpflat", cfg, "--seed", "17")
    assert code == code2 == 0
    assert (tmp_path / "out.json").read_text() == text1
    assert first["seed"] == 17


def test_sharpflat_from_file(tmp_path):
    from padictower.iwasawa import synth_generate

    inp, _ = synth_generate(1, 0, 3, "exact", seed=2)
    (tmp_path / "sf.json").write_text(json.dumps(inp.to_json()))
    code, rep = run(tmp_path, "sharpflat", {"p": 3, "sharpflat": {"input": "sf.json"}})
    assert code == 0
    assert rep["results"]["result"]["schema"] == "padictower/sharpflat-result/v1"


def test_pr_solve(tmp_path):
    from padictower.iwasawa.perrin_riou import plant

    f = plant([3, 0, 1], ((1, 2), (0, 1)), 1, 4, 3)
    cfg = {"p": 3, "pr_solve": {"R": [3, 0, 1], "f": [list(x.c) for x in f], "n0": 1}}
    code, rep = run(tmp_path, "pr-solve", cfg)
    assert code == 0
    assert rep["results"]["solution"]["F"] == [[1, 2], [0, 1]]


def test_pr_solve_recurrence_failure(tmp_path):
    cfg = {"p": 3, "pr_solve": {"R": [3, 0, 1], "f": [[1], [2], [3], [4]], "n0": 1}}
    code, rep = run(tmp_path, "pr-solve", cfg)
    assert code == 1 and rep is None


def test_config_errors(tmp_path, capsys):
    code, _ = run(tmp_path, "classify", '{"p": 3,\n "honda": }')
    assert code == 2
    assert "cfg.json:2:" in capsys.readouterr().err
    code, _ = run(tmp_path, "classify", {"p": 3})
    assert code == 2
    assert "field 'honda'" in capsys.readouterr().err
    code, _ = run(tmp_path, "rank-bound", {"p": 3, "rank_bound": {"lambda": "x", "e": 2, "n": 4}})
    assert code == 2
    assert "rank_bound.lambda" in capsys.readouterr().err


def test_usage_error():
    assert main(["no-such-command", "--config", "x.json"]) == 2


def test_timing_only_on_request(tmp_path):
    _, rep = run(tmp_path, "classify", {"p": 3, "honda": {"d": 2, "a": [3, 0]}})
    assert "timing" not in rep
    _, rep = run(tmp_path, "classify", {"p": 3, "honda": {"d": 2, "a": [3, 0]}}, "--timing")
    assert "seconds" in rep["timing"]

import json

import numpy as np
import pytest

from adaptive_mt import RngStream
from adaptive_mt.cli import main, parse_methods, parse_pvalues, read_report, read_tsv
from adaptive_mt.errors import DomainError


@pytest.fixture
def uniform_file(tmp_path):
    path = tmp_path / "p.txt"
    vals = RngStream(2024).uniform(3000)
    path.write_text("# null P values\n" + "\n".join(repr(float(v)) for v in vals) + "\n")
    return path, vals


def test_parse_comments_and_header():
    assert list(parse_pvalues("pvalue\n0.1\n# note\n0.5  # trailing\n\n1\n")) == [0.1, 0.5, 1.0]


@pytest.mark.parametrize("text, line", [("0.1\nabc\n", 2), ("0.1\n0.2\n1.5\n", 3), ("p\n0.2\n-0.1\n", 3)])
def test_parse_errors_name_line(text, line):
    with pytest.raises(DomainError, match=f":{line}:"):
        parse_pvalues(text)


def test_analyze_null_file(uniform_file, tmp_path, capsys):
    path, vals = uniform_file
    out = tmp_path / "out"
    assert main(["analyze", "--input", str(path), "--out-dir", str(out)]) == 0
    rep = read_report(out / "analysis.kv")
    assert rep["backbone.guard"] is True
    assert rep["api.alpha"] == pytest.approx(0.22 / 3000, rel=1e-14)
    for key, val in rep.items():
        if key.endswith(".rejections"):
            assert val == int(np.sum(vals <= rep[key.replace("rejections", "alpha")]))
    assert "api.alpha" in capsys.readouterr().out


def test_analyze_round_trip(tmp_path):
    rng = RngStream(5)
    vals = np.concatenate([rng.uniform(900), rng.beta(0.2, 4.0, 100)])
    inp = tmp_path / "p.csv"
    inp.write_text("pval\n" + "\n".join(repr(float(v)) for v in vals))
    out = tmp_path / "o"
    assert main(["analyze", "--input", str(inp), "--q-levels", "0.05,0.1", "--out-dir", str(out)]) == 0
    rep = read_report(out / "analysis.kv")
    lines = (out / "analysis.kv").read_text().splitlines()
    assert len(rep) == len(lines)
    for line in lines:
        k, v = line.split("\t")
        assert str(rep[k]).lower() == v.lower() or repr(rep[k]) == v
    assert rep["bh.0.05.rejections"] == int(np.sum(vals <= rep["bh.0.05.alpha"]))
    qv = read_tsv(out / "qvalues.tsv")
    assert [row["pvalue"] for row in qv] == list(vals)


def test_target_alpha1(uniform_file, tmp_path):
    path, _ = uniform_file
    out = tmp_path / "t"
    assert main(["analyze", "--input", str(path), "--target-alpha1", "0.05", "--out-dir", str(out)]) == 0
    rep = read_report(out / "analysis.kv")
    assert float(f"{rep['alpha0']:.4g}") == 0.05129
    assert list(rep)[:3] == ["m", "target_alpha1", "alpha0"]


def test_empty_file_is_usage_error(tmp_path):
    empty = tmp_path / "e.txt"
    empty.write_text("# nothing\n")
    with pytest.raises(SystemExit) as exc:
        main(["analyze", "--input", str(empty)])
    assert exc.value.code != 0


def test_bad_value_exit_code(tmp_path, capsys):
    bad = tmp_path / "b.txt"
    bad.write_text("0.2\n2.0\n")
    assert main(["analyze", "--input", str(bad)]) == 1
    assert ":2:" in capsys.readouterr().err


def test_simulate_deterministic(tmp_path):
    outs = []
    for d in ("a", "b"):
        out = tmp_path / d
        assert (
            main(
                [
                    "simulate",
                    "--model",
                    "7",
                    "--reps",
                    "50",
                    "--seed",
                    "1",
                    "--methods",
                    "bh:0.05",
                    "--out-dir",
                    str(out),
                ]
            )
            == 0
        )
        outs.append((out / "curves.tsv").read_bytes())
    assert outs[0] == outs[1]


def test_simulate_level_grid(tmp_path):
    out = tmp_path / "g"
    args = ["simulate", "--model", "7", "--m", "400", "--reps", "3", "--seed", "2", "--methods", "api,bh:0.01..0.7"]
    assert main(args + ["--out-dir", str(out)]) == 0
    rows = read_tsv(out / "curves.tsv")
    assert [r["method"] for r in rows].count("api") == 1
    assert [r["level"] for r in rows if r["method"] == "bh"] == [0.01, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.6, 0.7]
    rep = read_report(out / "mc_bh_0.05.kv")
    per_rep = [tuple(map(int, x.split(","))) for x in rep["per_rep"].split(";")]
    assert len(per_rep) == 3 and rep["reps"] == 3
    row = next(r for r in rows if r["method"] == "bh" and r["level"] == 0.05)
    assert row["fdr_hat"] == rep["fdr_hat"]


def test_methods_parser():
    m = parse_methods("api,bh:0.01..0.7,abh:0.05,qvalue:0.1,ht:0.001,all,none")
    assert len(m) == 1 + 9 + 1 + 1 + 1 + 2


@pytest.mark.parametrize("args", [["--reps", "0"], ["--model", "11"], ["--methods", "foo"]])
def test_simulate_usage_errors(args):
    base = {"--model": "7", "--reps": "2", "--methods": "bh:0.05"}
    for i in range(0, len(args), 2):
        base[args[i]] = args[i + 1]
    argv = ["simulate"] + [x for kv in base.items() for x in kv]
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_simulate_json_config(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"base_model": 2, "m": 600, "m1": 100}))
    out = tmp_path / "j"
    assert main(["simulate", "--config", str(cfg), "--reps", "2", "--methods", "bh:0.1", "--out-dir", str(out)]) == 0
    rep = read_report(out / "mc_bh_0.1.kv")
    assert (rep["m"], rep["m1"], rep["sigma"]) == (600, 100, 1.0)


def test_compare_pi0_table(tmp_path):
    outs = []
    for d in ("a", "b"):
        out = tmp_path / d
        assert (
            main(["compare-pi0", "--model", "2", "--m", "600", "--reps", "3", "--seed", "9", "--out-dir", str(out)])
            == 0
        )
        outs.append(read_tsv(out / "pi0_compare.tsv"))
    assert outs[0] == outs[1]
    assert {r["estimator"] for r in outs[0]} == {"backbone", "storey", "storey_bootstrap", "bh_slope"}
    assert all(r["true_pi0"] == 1 - 100 / 600 for r in outs[0])

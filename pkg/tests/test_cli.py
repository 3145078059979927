import hashlib
import json

import pytest

from hypcross.cli import main


def run(capsys, *argv):
    # argparse-level usage errors exit via SystemExit; the rest return a code
    try:
        code = main(list(argv))
    except SystemExit as exc:
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


def test_cross_example(capsys):
    code, out, _ = run(capsys, "cross", "--d", "2", "--n", "4", "--weights", "1,1")
    assert code == 0
    assert "blocks 3" in out and "cardinality 20" in out


def test_cross_empty(capsys):
    code, out, _ = run(capsys, "cross", "--d", "2", "--n", "1")
    assert code == 0 and "cardinality 0" in out


@pytest.mark.parametrize("w", ["1,x", "1", "1,0.5", "1,nan"])
def test_cross_bad_weights(capsys, w):
    code, _, err = run(capsys, "cross", "--d", "2", "--n", "4", "--weights", w)
    assert code == 2 and "--weights" in err


def _sweep(tmp_path, capsys, name, *extra):
    out = tmp_path / name
    code, _, err = run(capsys, "sweep", "--gen", "g1(p=2,r1=1)", "--n", "6..14", "--out", str(out), *extra)
    assert code == 0, err
    return out


def test_sweep_rows_and_determinism(tmp_path, capsys):
    a = _sweep(tmp_path, capsys, "a.csv", "--space", "bq1:4")
    b = _sweep(tmp_path, capsys, "b.csv", "--space", "bq1:4")
    lines = a.read_text().splitlines()
    assert len(lines) == 10
    assert hashlib.sha256(a.read_bytes()).digest() == hashlib.sha256(b.read_bytes()).digest()


def test_sweep_lq_below_bq1(tmp_path, capsys):
    a = _sweep(tmp_path, capsys, "b.csv", "--space", "bq1:4").read_text().splitlines()[1:]
    b = _sweep(tmp_path, capsys, "l.csv", "--space", "lq:4").read_text().splitlines()[1:]
    for ra, rb in zip(a, b):
        assert float(rb.split(",")[2]) <= float(ra.split(",")[2])


def test_sweep_config_file(tmp_path, capsys):
    cfg = tmp_path / "exp.cfg"
    out = tmp_path / "c.csv"
    cfg.write_text(f"# g1 sweep\ngen = g1(p=2, r1=1)\nn = 6..8\nspace = bq1:4\nout = {out}\n")
    code, _, err = run(capsys, "sweep", "--config", str(cfg), "seed=3")
    assert code == 0, err
    rows = out.read_text().splitlines()
    assert len(rows) == 4 and rows[1].endswith(",3")


def test_sweep_stdout_and_usage_errors(tmp_path, capsys):
    code, out, _ = run(capsys, "sweep", "--gen", "dn(n=6)", "--n", "3..4", "--space", "lq:2")
    assert code == 0 and out.startswith("n,cardinality")
    assert run(capsys, "sweep", "--n", "3..4")[0] == 2
    assert run(capsys, "sweep", "--gen", "zz()", "--n", "3..4")[0] == 2
    assert run(capsys, "sweep", "--gen", "dn(n=6)", "--n", "a..b")[0] == 2
    assert run(capsys, "sweep", "--gen", "dn(n=6)", "--n", "3..4", "--space", "bq1:1")[0] == 2
    assert run(capsys, "sweep", "--gen", "dn(n=6)", "--n", "3..4", "bogus=1")[0] == 2
    assert run(capsys, "sweep", "--config", str(tmp_path / "missing.cfg"))[0] == 2


def test_sweep_runtime_failure(capsys):
    # g1 needs n >= d; level 1 fails inside the computation
    code, _, err = run(capsys, "sweep", "--gen", "g1(p=2,r1=1,c5=\"level\")", "--n", "1..2", "--space", "bq1:4")
    assert code == 1 and "failed" in err


def test_fit_with_theorem(tmp_path, capsys):
    path = _sweep(tmp_path, capsys, "g.csv", "--space", "bq1:4")
    code, out, _ = run(capsys, "fit", str(path), "--theorem", "T3", "--p", "2")
    assert code == 0
    res = json.loads(out)
    assert res["predicted"] == {"a": 0.75, "b": 0.5}
    assert set(res["deviation"]) == {"a", "b"}
    assert res["window"] == [8.0, 14.0]


def test_fit_synthetic_and_errors(tmp_path, capsys):
    p = tmp_path / "s.csv"
    p.write_text("n,value_EE\n" + "".join(f"{n},{2.0 ** -n!r}\n" for n in range(4, 14)))
    code, out, _ = run(capsys, "fit", str(p), "--skip", "0")
    res = json.loads(out)
    assert code == 0 and abs(res["a"] - 1) < 1e-10 and abs(res["b"]) < 1e-9
    assert run(capsys, "fit", str(p), "--column", "nope")[0] == 2
    short = tmp_path / "short.csv"
    short.write_text("n,value_EE\n4,0.1\n5,0.05\n6,0.02\n")
    assert run(capsys, "fit", str(short), "--skip", "0")[0] == 1
    assert run(capsys, "fit", str(tmp_path / "missing.csv"))[0] == 2
    assert run(capsys, "fit", str(p), "--theorem", "T3", "--p", "1", "--q", "4")[0] == 2


def test_check_suite(capsys):
    code, out, err = run(capsys, "check", "lemma_a")
    assert code == 0
    data = json.loads(out)
    assert all(d["pass"] for d in data)
    assert "passed" in err


def test_check_nikolskii_seed(capsys):
    code, out, _ = run(capsys, "check", "nikolskii", "--seed", "7")
    data = json.loads(out)
    assert code == 0 and len(data) == 400 and sum(d["pass"] for d in data) == 400


def test_check_failure_exit_code(capsys, monkeypatch):
    from hypcross import analysis

    def failing(seed=0):
        return [analysis.CheckRecord("x", {}, 2.0, 1.0, 2.0, False)]

    monkeypatch.setitem(analysis.SUITES, "lemma_a", failing)
    code, _, _ = run(capsys, "check", "lemma_a")
    assert code == 1


def test_check_unknown_suite(capsys):
    assert run(capsys, "check", "bogus")[0] == 2


def test_norm(capsys):
    code, out, _ = run(capsys, "norm", "--gen", "dn(n=5)", "--space", "lq:2")
    assert code == 0 and out.strip() == format(128**0.5, ".12g")
    assert run(capsys, "norm", "--gen", "dn(n=5)", "--space", "xx:2")[0] == 2

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from copu import cli
from copu.errors import SpecError
from copu.formats import csv_text, fmt, kraus_doc, parse_spec, read_series, svg_plot
from copu.families import amplitude_damping


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def write_spec(tmp_path, doc, name="spec.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


# ---------------------------------------------------------------- formats


def test_parse_spec_kinds():
    kind, ops = parse_spec(kraus_doc(amplitude_damping(0.5)[0]))
    assert kind == "kraus" and len(ops) == 2
    kind, ch = parse_spec({"affine": {"lambda": [1, 1, 1]}})
    assert kind == "affine" and ch.is_unital
    kind, spec = parse_spec({"family": {"name": "ad", "params": {"eta": 0.2}}})
    assert kind == "family" and spec.params == {"eta": 0.2}


@pytest.mark.parametrize("doc", [
    [],
    {},
    {"affine": {"lambda": [1, 1]}},
    {"affine": {"lambda": [1, 1, True]}},
    {"affine": {"lambda": [1, 1, 1]}, "family": {"name": "ad"}},
    {"kraus": [[[1, 0], [0, 1]]]},
    {"family": {"name": 3}},
    {"family": {"name": "ad", "params": {"eta": "x"}}},
    {"family": {"name": "ad", "params": {"eta": float("inf")}}},
])
def test_parse_spec_rejects(doc):
    with pytest.raises(SpecError):
        parse_spec(doc)


def test_number_format():
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt(1.0) == "1"
    assert csv_text(["a", "b"], [[1.5, "x"]]) == "a,b\n1.5,x\n"


def test_svg_plot_structure():
    pts = np.array([[0.5, 0.2], [1.0, 1.3]])
    svg = svg_plot([("a<b", "points", pts)], title="t & u")
    assert svg.startswith('<svg xmlns="http://www.w3.org/2000/svg" width="800" height="600"')
    assert "a&lt;b" in svg and "t &amp; u" in svg
    assert svg.count("<circle") == 2


# ---------------------------------------------------------------- analyze


def test_analyze_amplitude_damping(tmp_path, capsys):
    spec = write_spec(tmp_path, {"family": {"name": "amplitude_damping", "params": {"eta": 0.25}}})
    code, out, _ = run(capsys, "analyze", spec, "--json")
    assert code == 0
    rep = json.loads(out)
    assert rep["coherence"]["c_l1"] == pytest.approx(0.5, abs=1e-12)
    assert rep["coherence"]["purity"] == pytest.approx((1 + 0.0625) / 2, abs=1e-12)
    assert rep["prediction"]["delta_c_l1"] == pytest.approx(0.0, abs=1e-12)
    assert rep["tolerance"]["eps_psd"] == 1e-10


def test_analyze_identity(tmp_path, capsys):
    spec = write_spec(tmp_path, {"affine": {"lambda": [1, 1, 1], "tau": [0, 0, 0]}})
    code, out, _ = run(capsys, "analyze", spec, "--json")
    rep = json.loads(out)
    assert code == 0
    assert rep["coherence"]["c_l1"] == pytest.approx(1.0) and rep["coherence"]["purity"] == pytest.approx(1.0)
    assert rep["classification"]["unital"] is True


def test_analyze_coherence_breaking(tmp_path, capsys):
    spec = write_spec(tmp_path, {"affine": {"lambda": [0, 0, 0.5], "tau": [0, 0, 0.2]}})
    code, out, _ = run(capsys, "analyze", spec)
    assert code == 0
    assert "classification.coherence_breaking: true" in out
    assert "coherence.c_l1: 0\n" in out


def test_analyze_kraus_general(tmp_path, capsys):
    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    doc = {"kraus": [[[[float(x), 0.0] for x in row] for row in h]]}
    code, out, _ = run(capsys, "analyze", write_spec(tmp_path, doc), "--json")
    rep = json.loads(out)
    assert code == 0 and rep["affine"] is None and "general_affine" in rep
    assert rep["classification"]["incoherent"] is False


def test_analyze_not_cp(tmp_path, capsys):
    spec = write_spec(tmp_path, {"affine": {"lambda": [1, 1, 1], "tau": [0, 0, 0.5]}})
    code, out, _ = run(capsys, "analyze", spec)
    assert code == 3 and "classification.cp: false" in out
    spec = write_spec(tmp_path, {"family": {"name": "homogenization", "params": {"t": 1, "T1": 1, "T2": 5}}})
    code, out, _ = run(capsys, "analyze", spec)
    assert code == 3 and "prediction.c_l1" in out


def test_analyze_input_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert run(capsys, "analyze", bad)[0] == 2
    assert run(capsys, "analyze", tmp_path / "missing.json")[0] == 2
    not_tp = write_spec(tmp_path, {"kraus": [[[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]]]})
    code, _, err = run(capsys, "analyze", not_tp)
    assert code == 2 and "deviates" in err
    spec = write_spec(tmp_path, {"family": {"name": "amplitude_damping", "params": {"eta": 2}}})
    assert run(capsys, "analyze", spec)[0] == 2


# ---------------------------------------------------------------- sample / boundary / plot


def test_sample_decoherence(tmp_path, capsys):
    out = tmp_path / "d.csv"
    assert run(capsys, "sample", "decoherence", "--n", 100, "--out", out)[0] == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "family,purity,c_l1,c_rel,t_over_T" and len(lines) == 101
    kind, data = read_series(out)
    assert kind == "points"
    assert np.allclose(2 * data[:, 0] - data[:, 1] ** 2, 1.0, atol=1e-12)


def test_sample_reproducible(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(capsys, "sample", "unital", "--n", 10_000, "--seed", 7, "--out", a)
    run(capsys, "sample", "unital", "--n", 10_000, "--seed", 7, "--out", b)
    assert a.read_bytes() == b.read_bytes()


def test_sample_cmc_range(tmp_path, capsys):
    out = tmp_path / "c.csv"
    run(capsys, "sample", "cmc", "--n", 1000, "--out", out)
    _, data = read_series(out)
    assert data[:, 1].min() >= 1 - 1e-9 and data[:, 1].max() <= 3 + 1e-9


def test_config_precedence(tmp_path, capsys, monkeypatch):
    a, b, c = (tmp_path / f"{k}.csv" for k in "abc")
    monkeypatch.setenv("COPU_SEED", "5")
    run(capsys, "sample", "depolarizing", "--n", 20, "--out", a)
    run(capsys, "sample", "depolarizing", "--n", 20, "--seed", 5, "--out", b)
    run(capsys, "sample", "depolarizing", "--n", 20, "--seed", 6, "--out", c)
    assert a.read_bytes() == b.read_bytes() != c.read_bytes()
    monkeypatch.setenv("COPU_JOBS", "zero")
    assert run(capsys, "sample", "depolarizing", "--n", 20, "--out", a)[0] == 2
    monkeypatch.delenv("COPU_JOBS")
    monkeypatch.setenv("COPU_TOL", "-1")
    assert run(capsys, "analyze", tmp_path / "x.json")[0] == 2


def test_sample_errors(tmp_path, capsys):
    assert run(capsys, "sample", "nope", "--n", 5, "--out", tmp_path / "x.csv")[0] == 2
    assert run(capsys, "sample", "ad", "--n", 5, "--param", "eta", "--out", tmp_path / "x.csv")[0] == 2
    assert run(capsys, "sample", "ad", "--n", 5, "--out", tmp_path / "no" / "x.csv")[0] == 2


def test_boundary_commands(tmp_path, capsys):
    d, u = tmp_path / "d.csv", tmp_path / "u.csv"
    assert run(capsys, "boundary", "decoherence", "--out", d)[0] == 0
    kind, data = read_series(d)
    assert kind == "curve" and np.allclose(data[:, 1], np.sqrt(2 * data[:, 0] - 1))
    assert run(capsys, "boundary", "depolarizing", "--bins", 20, "--out", d)[0] == 0
    _, data = read_series(d)
    assert np.allclose(data[:, 2], np.sqrt((4 * data[:, 0] - 1) / 3))
    assert run(capsys, "boundary", "unital", "--out", u)[0] == 0
    _, data = read_series(u)
    assert data[-1, 2] == pytest.approx(1.0, abs=1e-9)


def test_plot_round_trip(tmp_path, capsys):
    s, b, svg = tmp_path / "unital.csv", tmp_path / "edge.csv", tmp_path / "fig.svg"
    run(capsys, "sample", "nonunital", "--n", 500, "--out", s)
    run(capsys, "boundary", "unital", "--bins", 16, "--out", b)
    assert run(capsys, "plot", s, b, "--out", svg, "--title", "CoPu")[0] == 0
    text = svg.read_text()
    assert "<polyline" in text and "unital" in text and "edge" in text
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y\n1,2\n")
    assert run(capsys, "plot", bad, "--out", svg)[0] == 2


def test_verify_command(capsys):
    code, out, _ = run(capsys, "verify", "prop1", "table1", "obs6", "--scale", 0.1)
    assert code == 0 and out.count("PASS") == 3
    assert run(capsys, "verify", "nosuch")[0] == 2


def test_verify_failure_exit(capsys, monkeypatch):
    from copu import verify

    def failing(seed=0, scale=1.0):
        r = verify.SuiteResult("broken")
        r.check("always", False, "forced")
        return r

    monkeypatch.setitem(verify.SUITES, "broken", failing)
    code, out, _ = run(capsys, "verify", "broken")
    assert code == 4 and "FAIL" in out


def test_console_script_entry():
    out = subprocess.run([sys.executable, "-m", "copu.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "analyze" in out.stdout

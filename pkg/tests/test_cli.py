import csv
import io
import json
import math
import subprocess
import sys

import pytest

from measure_schroed.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def write(path, doc):
    path.write_text(json.dumps(doc))
    return path


@pytest.fixture
def comb(tmp_path, capsys):
    path = tmp_path / "comb.json"
    assert run(capsys, "generate", "comb", "--period", 1, "--offset", 0.5, "--weight", 1, "--out", path)[0] == 0
    return path


def test_solve_comb(comb, capsys, tmp_path):
    traj = tmp_path / "traj.csv"
    code, out, _ = run(capsys, "solve", comb, "-E", 0, "--x", 1, "--u0", 1, "--du0", 0, "--trajectory", traj)
    assert code == 0
    state = json.loads(out)
    assert (state["u"], state["du"]) == (1.5, 1.0)
    rows = list(csv.DictReader(traj.open()))
    assert [float(r["x"]) for r in rows] == [0.0, 0.5, 1.0]


def test_solve_zero_measure(tmp_path, capsys):
    spec = write(tmp_path / "zero.json", {})
    code, out, _ = run(capsys, "solve", spec, "-E", 1, "--x", math.pi)
    assert code == 0
    assert json.loads(out)["u"] == pytest.approx(-1.0, abs=1e-12)


def test_missing_file_exit_2(tmp_path, capsys):
    missing = tmp_path / "nope.json"
    code, _, err = run(capsys, "solve", missing, "-E", 0, "--x", 1)
    assert code == 2
    assert str(missing) in err


def test_malformed_spec_names_field(tmp_path, capsys):
    spec = write(tmp_path / "bad.json", {"atoms": [{"pos": 1.0, "weight": 1.0}, {"pos": 0.0, "weight": 1.0}]})
    code, _, err = run(capsys, "solve", spec, "-E", 0, "--x", 1)
    assert code == 2 and "atoms[1].pos" in err


def test_guard_exit_1(comb, capsys):
    code, _, err = run(capsys, "solve", comb, "-E", 0, "--x", 1e6)
    assert code == 1 and "max span" in err


def test_discriminant_zero_and_comb(tmp_path, comb, capsys):
    zero_spec = write(tmp_path / "zero.json", {})
    code, out, _ = run(capsys, "discriminant", zero_spec, "--e-min", 1, "--e-max", 4, "--n-points", 4,
                       "--period", 1)
    assert code == 0
    for row in csv.DictReader(io.StringIO(out)):
        k = math.sqrt(float(row["E"]))
        assert float(row["trace"]) == pytest.approx(2 * math.cos(k), abs=1e-12)

    code, out, _ = run(capsys, "discriminant", comb, "--e-min", 0.5, "--e-max", 30, "--n-points", 7)
    for row in csv.DictReader(io.StringIO(out)):
        k = math.sqrt(float(row["E"]))
        assert float(row["trace"]) == pytest.approx(2 * math.cos(k) + math.sin(k) / k, abs=1e-9)

    code, out, _ = run(capsys, "discriminant", comb, "--e-min", 2, "--e-max", 3, "--n-points", 1)
    assert code == 0 and len(out.strip().splitlines()) == 2


def test_discriminant_aperiodic_rejected(tmp_path, capsys):
    spec = write(tmp_path / "atom.json", {"atoms": [{"pos": 0.0, "weight": 1.0}]})
    assert run(capsys, "discriminant", spec, "--e-min", 0, "--e-max", 1, "--n-points", 2)[0] == 2


def test_cf_tables(capsys):
    code, out, _ = run(capsys, "cf", "golden", "--n", 5, "--B", 1)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0
    assert [(int(r["p_m"]), int(r["q_m"])) for r in rows] == [(1, 1), (1, 2), (2, 3), (3, 5), (5, 8)]
    code, out, _ = run(capsys, "cf", "sqrt2-1", "--n", 3)
    assert [int(r["a_m"]) for r in csv.DictReader(io.StringIO(out))] == [2, 2, 2]


def test_cf_default_B_is_least(capsys):
    code, out, err = run(capsys, "cf", "golden", "--n", 4)
    assert code == 0 and "least constant" in err
    assert all(r["satisfied"] == "true" for r in csv.DictReader(io.StringIO(out)))


def test_cf_out_of_range(capsys):
    assert run(capsys, "cf", "1.5")[0] == 2
    assert run(capsys, "cf", "abc")[0] == 2


def test_gordon_self_family(comb, tmp_path, capsys):
    fam = write(tmp_path / "fam.json", {
        "target": json.loads(comb.read_text()),
        "approximants": [{"period": float(p)} for p in range(1, 6)],
    })
    out = tmp_path / "report.json"
    rows = tmp_path / "rows.csv"
    code, _, _ = run(capsys, "gordon", fam, "--C", 1, "--out", out, "--csv", rows, "--n-energies", 5)
    assert code == 0
    report = json.loads(out.read_text())
    assert report["decay_metric"] == [0.0] * 5
    assert all(e["probe"]["non_decay"] for e in report["energies"])
    assert report["all_pass"]
    header = rows.read_text().splitlines()[0]
    assert header == "m,p_m,x,deviation,tv,bound,pass"


def test_gordon_rejects_decreasing_periods(comb, tmp_path, capsys):
    fam = write(tmp_path / "fam.json", {
        "target": json.loads(comb.read_text()),
        "approximants": [{"period": 2.0}, {"period": 1.0}],
    })
    code, _, err = run(capsys, "gordon", fam)
    assert code == 2 and "periods must increase" in err


def test_quasiperiodic_pipeline(tmp_path, capsys):
    nu = write(tmp_path / "nu.json", {"period": 1.0, "density": [
        {"from": 0.0, "to": 0.25, "value": 0.125}, {"from": 0.25, "to": 0.5, "value": 0.25},
        {"from": 0.5, "to": 0.75, "value": 0.125}]})
    tilde = write(tmp_path / "tilde.json", {"period": 1.0, "atoms": [{"pos": 0.5, "weight": 1.0}]})
    fam = tmp_path / "qp.json"
    code, _, _ = run(capsys, "generate", "quasiperiodic", "--nu", nu, "--nu-tilde", tilde,
                     "--liouville", 4, "--m-max", 4, "--out", fam)
    assert code == 0
    doc = json.loads(fam.read_text())
    assert [c["q"] for c in doc["convergents"]] == [1, 2, 3, 11]
    out = tmp_path / "report.json"
    assert run(capsys, "gordon", fam, "--out", out)[0] == 0
    report = json.loads(out.read_text())
    assert report["all_pass"]
    assert len(report["energies"]) == 20

    recipe = write(tmp_path / "recipe.json", {"target": {
        "recipe": "quasiperiodic", "alpha": {"liouville_m_max": 4}, "m_max": 4,
        "nu": json.loads(nu.read_text()), "nu_tilde": json.loads(tilde.read_text())}})
    out2 = tmp_path / "report2.json"
    assert run(capsys, "gordon", recipe, "--out", out2)[0] == 0
    assert json.loads(out2.read_text())["decay_metric"] == report["decay_metric"]


def test_outputs_are_deterministic(comb, tmp_path, capsys):
    fam = write(tmp_path / "fam.json", {
        "target": json.loads(comb.read_text()),
        "approximants": [{"period": 1.0}, {"period": 2.0}],
    })
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(capsys, "gordon", fam, "--out", a)
    run(capsys, "gordon", fam, "--out", b)
    assert a.read_bytes() == b.read_bytes()
    first = run(capsys, "cf", "pi-3", "--n", 12)[1]
    assert run(capsys, "cf", "pi-3", "--n", 12)[1] == first


def test_module_entry_point(comb):
    proc = subprocess.run([sys.executable, "-m", "measure_schroed", "solve", str(comb), "-E", "0", "--x", "1"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["u"] == 1.5


def test_gordon_rejects_unnormalized_init(comb, tmp_path, capsys):
    fam = write(tmp_path / "fam.json", {"target": json.loads(comb.read_text()), "approximants": [{"period": 1.0}]})
    code, _, err = run(capsys, "gordon", fam, "--u0", 1, "--du0", 1)
    assert code == 2 and "init" in err
    assert run(capsys, "gordon", fam, "--u0", 0.6, "--du0", 0.8, "--n-energies", 2)[0] == 0

import json
import subprocess
import sys

import pytest

from conftest import DATA
from cubeid import cli
from cubeid import scenario as sc


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("name", ["empty", "unit_idtype", "broken_pullback", "two_points"])
def test_golden_reports(capsys, name):
    code, out, _ = run(capsys, "run", name, "--json")
    assert json.loads(out) == json.loads((DATA / f"{name}.json").read_text())
    assert code == (1 if name == "broken_pullback" else 0)


def test_report_schema(capsys):
    _, out, _ = run(capsys, "run", "unit_idtype", "--json", "--timing")
    rep = json.loads(out)
    for key in ("scenario", "construction_route", "checks", "sizes", "timing"):
        assert key in rep
    assert rep["schema"] == cli.SCHEMA_VERSION
    assert all(set(c) == {"name", "quantified_over", "result"} for c in rep["checks"])
    # one wall-clock entry per task
    assert len(rep["timing"]) == 4 and all(v >= 0 for v in rep["timing"].values())


def test_reruns_are_identical(capsys):
    a = run(capsys, "run", "two_points", "--json")
    b = run(capsys, "run", "two_points", "--json")
    assert a == b


def test_seed_only_reorders(capsys):
    _, plain, _ = run(capsys, "run", "two_points", "--json")
    _, seeded, _ = run(capsys, "run", "two_points", "--json", "--seed", "7")
    key = lambda c: c["name"]
    p, s = json.loads(plain), json.loads(seeded)
    assert sorted(p["checks"], key=key) == sorted(s["checks"], key=key)
    assert p["sizes"] == s["sizes"]


def test_text_report(capsys):
    code, out, _ = run(capsys, "run", "broken_pullback")
    assert code == 1
    assert "FAIL" in out and "first failing stage eq29" in out


def test_single_task_command(capsys):
    code, out, _ = run(capsys, "idtype", "unit_idtype", "--json")
    names = [c["name"] for c in json.loads(out)["checks"]]
    assert code == 0 and names and all(n.startswith("idtype") for n in names)


def test_connections_route_override(capsys):
    code, out, _ = run(capsys, "jcheck", "unit_idtype", "--mode", "connections", "--dim", "2", "--route",
                       "connections", "--json")
    rep = json.loads(out)
    assert code == 0
    assert rep["mode"] == "connections" and rep["construction_route"] == "connections"


def test_list_and_print(capsys):
    code, out, _ = run(capsys, "list")
    assert code == 0 and out.split() == sc.bundled_names()
    code, out, _ = run(capsys, "print", "pulled_back")
    assert code == 0 and sc.parse(out).to_dict() == sc.load(sc.bundled_path("pulled_back")).to_dict()


@pytest.mark.parametrize("text", ["name: x\nobjects: [oops\n", "maps:\n  f: {id: ghost}\n"])
def test_input_errors_exit_2(capsys, tmp_path, text):
    path = tmp_path / "bad.yaml"
    path.write_text(text)
    code, out, err = run(capsys, "run", str(path))
    assert code == 2 and out == ""
    assert "line" in err


def test_missing_scenario_exits_2(capsys):
    code, _, err = run(capsys, "run", "no_such_scenario")
    assert code == 2 and err


def test_negative_dim_exits_2(capsys):
    assert run(capsys, "run", "empty", "--dim", "-1")[0] == 2


def test_size_cap_is_an_input_error(capsys):
    code, _, err = run(capsys, "factor", "two_points", "--max-cells", "3")
    assert code == 2 and "cap" in err.lower()


def test_console_script_exit_codes():
    ok = subprocess.run([sys.executable, "-m", "cubeid.cli", "run", "empty"], capture_output=True)
    bad = subprocess.run([sys.executable, "-m", "cubeid.cli", "run", "broken_pullback"], capture_output=True)
    assert (ok.returncode, bad.returncode) == (0, 1)

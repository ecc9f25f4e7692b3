import pytest

from cubeid import scenario as sc
from cubeid.scenario import ScenarioError

GOOD = """\
name: tiny
mode: affine
dim: 2
objects:
  one: terminal
  two: {discrete: 2}
maps:
  f: {terminal_map: two}
fibrations:
  F: {search: f}
tasks:
  - idtype: {map: f, fib: F}
"""


@pytest.mark.parametrize("name", sc.bundled_names())
def test_bundled_round_trip(name):
    s = sc.load(sc.bundled_path(name))
    again = sc.parse(sc.dump(s))
    assert again.to_dict() == s.to_dict()
    assert sc.dump(again) == sc.dump(s)


def test_bundled_names():
    names = sc.bundled_names()
    assert {"empty", "unit_idtype", "broken_pullback", "pulled_back", "interval_point"} <= set(names)
    assert sc.resolve_path("empty") == sc.bundled_path("empty")


def test_parse_fields():
    s = sc.parse(GOOD)
    assert (s.name, s.mode, s.dim, s.budget) == ("tiny", "affine", 2, 2)
    assert set(s.objects) == {"one", "two"}
    assert s.tasks == [{"kind": "idtype", "map": "f", "fib": "F"}]


def test_overrides_cap_the_budget():
    s = sc.parse(GOOD.replace("dim: 2", "dim: 3"))
    t = s.with_overrides("connections", 2)
    assert (t.mode, t.dim, t.budget) == ("connections", 2, 2)
    assert s.mode == "affine" and s.dim == 3


def error_of(text):
    with pytest.raises(ScenarioError) as info:
        sc.parse(text)
    return info.value


def test_malformed_yaml_has_a_position():
    e = error_of("name: x\nobjects: [unclosed\n")
    assert e.line is not None and e.column is not None


def test_undefined_name_is_located():
    e = error_of(GOOD.replace("{terminal_map: two}", "{terminal_map: three}"))
    assert "three" in str(e)
    assert e.line == 8


def test_duplicate_key_is_located():
    e = error_of(GOOD.replace("  two: {discrete: 2}\n", "  two: {discrete: 2}\n  two: terminal\n"))
    assert "two" in str(e) and e.line == 7


@pytest.mark.parametrize("bad,fragment", [
    ("mode: affine", "mode: sideways"),
    ("dim: 2", "dim: -1"),
    ("  two: {discrete: 2}", "  two: {blob: 2}"),
    ("  - idtype: {map: f, fib: F}", "  - dance: {map: f}"),
    ("  F: {search: f}", "  F: {search: nothing}"),
])
def test_invalid_fields(bad, fragment):
    e = error_of(GOOD.replace(bad, fragment))
    assert e.line is not None


def test_defaults():
    s = sc.parse("mode: connections\n")
    assert (s.name, s.dim, s.budget) == ("scenario", 2, 2)


def test_unknown_top_level_key():
    e = error_of(GOOD + "extra: 1\n")
    assert e.line == 13


def test_load_missing_file(tmp_path):
    with pytest.raises(ScenarioError):
        sc.load(tmp_path / "nope.yaml")

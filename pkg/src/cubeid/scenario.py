"""Scenario documents: YAML in, validated records out, and back.

A scenario names objects, maps and fibration structures in one namespace
and lists tasks to run on them.  Objects built as products, pullbacks or
tensors also define their projections as ``NAME.pr0`` and ``NAME.pr1``; a
boundary object defines its inclusion as ``NAME.incl``.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import yaml

MODES = ("affine", "cartesian", "connections")
TASKS = ("factor", "idtype", "jcheck", "axioms", "stability", "pointwise")

# constructor -> fields that name other entries
OBJECT_KINDS = {
    "terminal": (), "interval": (), "yoneda": (), "discrete": (), "boundary": (),
    "product": ("args",), "tensor": ("args",), "pullback": ("args",),
}
# maps defined alongside an object, as NAME.part
PARTS = {"product": ("pr0", "pr1"), "tensor": ("pr0", "pr1"), "pullback": ("pr0", "pr1"), "boundary": ("incl",)}
MAP_KINDS = {
    "id": ("args",), "terminal_map": ("args",), "endpoint": (), "boundary_inclusion": (),
    "compose": ("args",), "constant": ("args",),
}
FIB_KINDS = {
    "search": ("args",), "identity": ("args",), "pullback": ("args", "top", "left", "bottom"),
    "compose": ("args",),
}
TASK_REFS = {
    "factor": ("map",), "idtype": ("map", "fib"), "jcheck": ("map", "fib"),
    "axioms": ("fibs", "cofs"), "stability": ("top", "left", "right", "bottom", "fib", "fib2"),
    "pointwise": ("top", "left", "right", "bottom"),
}


class ScenarioError(ValueError):
    """A malformed or inconsistent scenario; carries a source position when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.message, self.line, self.column = message, line, column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)


@dataclass
class Scenario:
    name: str
    mode: str
    dim: int
    budget: int
    objects: dict = field(default_factory=dict)
    maps: dict = field(default_factory=dict)
    fibrations: dict = field(default_factory=dict)
    tasks: list = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {"name": self.name, "mode": self.mode, "dim": self.dim, "budget": self.budget}
        for key in ("objects", "maps", "fibrations", "tasks"):
            val = getattr(self, key)
            if val:
                out[key] = copy.deepcopy(val)
        return out

    def with_overrides(self, mode: str | None = None, dim: int | None = None) -> "Scenario":
        s = copy.deepcopy(self)
        if mode is not None:
            s.mode = mode
        if dim is not None:
            s.dim = dim
            s.budget = min(s.budget, dim)
        return s


# ------------------------------------------------------------------ parsing

def _plain(node: yaml.Node, marks: dict, path: tuple):
    """Convert a composed YAML node to plain data, recording each node's position."""
    marks[path] = (node.start_mark.line + 1, node.start_mark.column + 1)
    if isinstance(node, yaml.MappingNode):
        out = {}
        for k, v in node.value:
            key = _plain(k, marks, path + ("<key>",))
            if not isinstance(key, (str, int)):
                raise ScenarioError("mapping keys must be scalars", *marks[path + ("<key>",)])
            if key in out:
                raise ScenarioError(f"duplicate key {key!r}", k.start_mark.line + 1, k.start_mark.column + 1)
            out[key] = _plain(v, marks, path + (key,))
        return out
    if isinstance(node, yaml.SequenceNode):
        return [_plain(v, marks, path + (i,)) for i, v in enumerate(node.value)]
    return yaml.safe_load(yaml.serialize(node))


class _Doc:
    def __init__(self, data, marks):
        self.data, self.marks = data, marks

    def err(self, msg: str, path: tuple) -> ScenarioError:
        while path and path not in self.marks:
            path = path[:-1]
        return ScenarioError(msg, *self.marks.get(path, (None, None)))


def _normalize_spec(raw, path, doc: _Doc, kinds: dict) -> dict:
    """``kind`` or ``{kind: args}`` or ``{kind: args, extra: ...}`` into ``{"kind": ..., ...}``."""
    if isinstance(raw, str):
        raw = {raw: None}
    if not isinstance(raw, dict) or not raw:
        raise doc.err("expected a constructor name or a one-key mapping", path)
    kind = next(iter(raw))
    if kind not in kinds:
        raise doc.err(f"unknown constructor {kind!r} (expected one of {', '.join(kinds)})", path)
    out = {"kind": kind}
    if raw[kind] is not None:
        out["args"] = raw[kind]
    for k, v in raw.items():
        if k != kind:
            out[k] = v
    return out


def _denormalize(spec: dict):
    spec = dict(spec)
    kind = spec.pop("kind")
    args = spec.pop("args", None)
    if args is None and not spec:
        return kind
    return {kind: args, **spec}


def _refs(value) -> list[str]:
    if isinstance(value, str):
        return [value]
    if isinstance(value, list):
        return [v for v in value if isinstance(v, str)]
    return []


def from_data(data, marks: dict | None = None) -> Scenario:
    doc = _Doc(data, marks or {})
    if not isinstance(data, dict):
        raise doc.err("a scenario is a mapping", ())
    known = {"name", "mode", "dim", "budget", "objects", "maps", "fibrations", "tasks"}
    for k in data:
        if k not in known:
            raise doc.err(f"unknown top-level key {k!r}", (k,))
    mode = data.get("mode", "affine")
    if mode not in MODES:
        raise doc.err(f"mode must be one of {', '.join(MODES)}", ("mode",))
    dim = data.get("dim", 3 if mode == "affine" else 2)
    budget = data.get("budget", dim)
    for key, v in (("dim", dim), ("budget", budget)):
        if not isinstance(v, int) or isinstance(v, bool) or v < 0:
            raise doc.err(f"{key} must be a non-negative integer", (key,))
    if budget > dim:
        raise doc.err(f"budget {budget} exceeds dimension {dim}", ("budget",))
    name = str(data.get("name", "scenario"))

    sections = {}
    defined: dict[str, str] = {}
    for sec, kinds in (("objects", OBJECT_KINDS), ("maps", MAP_KINDS), ("fibrations", FIB_KINDS)):
        raw = data.get(sec) or {}
        if not isinstance(raw, dict):
            raise doc.err(f"{sec} must be a mapping of names", (sec,))
        out = {}
        for nm, spec in raw.items():
            nm = str(nm)
            if "." in nm:
                raise doc.err(f"name {nm!r} may not contain '.'", (sec, nm))
            if nm in defined:
                raise doc.err(f"name {nm!r} already defined in {defined[nm]}", (sec, nm))
            defined[nm] = sec
            out[nm] = _normalize_spec(spec, (sec, nm), doc, kinds)
            if sec == "objects":
                for suffix in PARTS.get(out[nm]["kind"], ()):
                    defined[f"{nm}.{suffix}"] = "maps"
        sections[sec] = out

    def check_ref(r, path, want):
        if r not in defined:
            raise doc.err(f"undefined name {r!r}", path)
        if want and defined[r] not in want:
            raise doc.err(f"{r!r} is in {defined[r]}, expected {' or '.join(want)}", path)

    wants = {"objects": {"product": ("objects",), "tensor": ("objects",), "pullback": ("maps",)},
             "maps": {"id": ("objects",), "terminal_map": ("objects",), "compose": ("maps",),
                      "constant": ("objects",)},
             "fibrations": {"search": ("maps",), "identity": ("objects",), "compose": ("fibrations",)}}
    for sec, kinds in (("objects", OBJECT_KINDS), ("maps", MAP_KINDS), ("fibrations", FIB_KINDS)):
        for nm, spec in sections[sec].items():
            for fld in kinds[spec["kind"]]:
                if fld not in spec:
                    raise doc.err(f"{spec['kind']} needs '{fld}'", (sec, nm))
                want = wants[sec].get(spec["kind"])
                if sec == "fibrations" and spec["kind"] == "pullback":
                    want = ("fibrations",) if fld == "args" else ("maps",)
                for r in _refs(spec[fld]):
                    check_ref(r, (sec, nm), want)

    tasks = []
    raw_tasks = data.get("tasks") or []
    if not isinstance(raw_tasks, list):
        raise doc.err("tasks must be a list", ("tasks",))
    for i, t in enumerate(raw_tasks):
        spec = _normalize_spec(t, ("tasks", i), doc, {k: None for k in TASKS})
        body = spec.pop("args", None)
        if body is not None:
            if not isinstance(body, dict):
                raise doc.err(f"task {spec['kind']} takes a mapping of options", ("tasks", i))
            spec.update(body)
        for fld in TASK_REFS[spec["kind"]]:
            if fld in spec:
                want = ("fibrations",) if fld in ("fib", "fib2", "fibs") else ("maps",)
                for r in _refs(spec[fld]):
                    check_ref(r, ("tasks", i), want)
        tasks.append(spec)
    return Scenario(name, mode, dim, budget, sections["objects"], sections["maps"], sections["fibrations"], tasks)


def parse(text: str) -> Scenario:
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.MarkedYAMLError as e:
        m = e.problem_mark or e.context_mark
        raise ScenarioError(e.problem or str(e), m.line + 1 if m else None, m.column + 1 if m else None) from None
    if node is None:
        return from_data({})
    marks: dict = {}
    return from_data(_plain(node, marks, ()), marks)


def _task_out(spec: dict):
    spec = dict(spec)
    kind = spec.pop("kind")
    return {kind: spec} if spec else kind


def dump(s: Scenario) -> str:
    d = s.to_dict()
    for sec in ("objects", "maps", "fibrations"):
        if sec in d:
            d[sec] = {k: _denormalize(v) for k, v in d[sec].items()}
    if "tasks" in d:
        d["tasks"] = [_task_out(t) for t in d["tasks"]]
    return yaml.safe_dump(d, sort_keys=False, default_flow_style=None)


def load(path) -> Scenario:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as e:
        raise ScenarioError(f"cannot read {p}: {e.strerror}") from None
    return parse(text)


# --------------------------------------------------------------- bundled

def bundled_names() -> list[str]:
    root = resources.files("cubeid") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("cubeid") / "scenarios" / f"{name}.yaml"))


def resolve_path(arg: str) -> Path:
    """A file path, or the name of a bundled scenario."""
    p = Path(arg)
    if p.exists():
        return p
    if arg in bundled_names():
        return bundled_path(arg)
    raise ScenarioError(f"no scenario file or bundled scenario named {arg!r}")


def as_data(s: Scenario) -> Any:
    return yaml.safe_load(dump(s))

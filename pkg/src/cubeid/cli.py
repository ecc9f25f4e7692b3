"""Command-line driver: build a scenario, run its tasks, report every check."""
from __future__ import annotations

import argparse
import json
import random
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import ams
from . import axioms as ax
from . import leibniz as lz
from . import lifting as lf
from . import pathobj as po
from . import presheaf as ps
from . import scenario as sc
from . import stepone as so
from .presheaf import PresheafError
from .site import AFFINE, CARTESIAN, CONNECTIONS, SiteError, get_site

SCHEMA_VERSION = 1
MODES = {"affine": AFFINE, "cartesian": CARTESIAN, "connections": CONNECTIONS}
EXIT_OK, EXIT_VIOLATION, EXIT_INPUT = 0, 1, 2


def _levels(X) -> str:
    s = X.sizes()
    return f"levels 0..{len(s) - 1} of {X.label or 'object'} ({'+'.join(map(str, s))} cells)"


# ------------------------------------------------------------------ builder

class Builder:
    """Resolves scenario names to objects, maps and fibration structures, on demand."""

    def __init__(self, s: sc.Scenario, max_cells: int = so.DEFAULT_MAX_CELLS):
        self.scenario = s
        self.site = get_site(MODES[s.mode], s.dim)
        self.d = s.budget
        self.max_cells = max_cells
        self.I = lz.interval(self.site, self.d)
        self.one = self.I.point
        self.one.label = "1"
        self._yoneda = {1: self.I.carrier}
        self._done: dict[str, object] = {}
        self._busy: set[str] = set()
        self._steps: dict = {}
        self._ids: dict = {}

    def yoneda(self, n: int):
        if n not in self._yoneda:
            if n > self.site.dim:
                raise sc.ScenarioError(f"yoneda {n} exceeds dimension {self.site.dim}")
            self._yoneda[n] = ps.yoneda(self.site, n, self.d)
            self._yoneda[n].label = f"y{n}"
        return self._yoneda[n]

    def get(self, name: str):
        if name in self._done:
            return self._done[name]
        base, _, part = name.partition(".")
        if part:
            self.get(base)
            if name not in self._done:
                raise sc.ScenarioError(f"undefined name {name!r}")
            return self._done[name]
        if name in self._busy:
            raise sc.ScenarioError(f"definition of {name!r} refers to itself")
        s = self.scenario
        self._busy.add(name)
        try:
            if name in s.objects:
                val = self._object(name, s.objects[name])
            elif name in s.maps:
                val = self._map(name, s.maps[name])
            elif name in s.fibrations:
                val = self._fib(name, s.fibrations[name])
            else:
                raise sc.ScenarioError(f"undefined name {name!r}")
        finally:
            self._busy.discard(name)
        if hasattr(val, "label") and not getattr(val, "label", None):
            val.label = name
        self._done[name] = val
        return val

    def _object(self, name, spec):
        kind, args = spec["kind"], spec.get("args")
        if kind == "terminal":
            return self.one
        if kind == "interval":
            return self.I.carrier
        if kind == "yoneda":
            return self.yoneda(int(args))
        if kind == "discrete":
            return ps.discrete(self.site, self.d, int(args), label=name)
        if kind == "boundary":
            sub = ps.boundary(self.site, int(args), self.d)
            X, incl = ps.Subpresheaf(self.yoneda(int(args)), sub.member, check=False).to_object(label=name)
            self._done[f"{name}.incl"] = incl
            return X
        a, b = (self.get(r) for r in args)
        if kind == "product":
            P, p0, p1 = ps.product(a, b, label=name)
        elif kind == "tensor":
            tw = lz.tensor(a, b, label=name)
            P, p0, p1 = tw.product, tw.pr0, tw.pr1
        else:
            P, p0, p1 = ps.pullback(a, b, label=name)
        p0.label, p1.label = f"{name}.pr0", f"{name}.pr1"
        self._done[f"{name}.pr0"], self._done[f"{name}.pr1"] = p0, p1
        return P

    def _map(self, name, spec):
        kind, args = spec["kind"], spec.get("args")
        if kind == "id":
            return ps.identity(self.get(args))
        if kind == "terminal_map":
            return ps.terminal_map(self.get(args), self.one)
        if kind == "endpoint":
            if args not in (0, 1):
                raise sc.ScenarioError(f"endpoint of {name!r} must be 0 or 1")
            return self.I.endpoint(args)
        if kind == "boundary_inclusion":
            sub = ps.boundary(self.site, int(args), self.d)
            _, incl = ps.Subpresheaf(self.yoneda(int(args)), sub.member, check=False).to_object()
            return incl
        if kind == "compose":
            maps = [self.get(r) for r in args]
            out = maps[0]
            for m in maps[1:]:
                out = out.then(m)
            return out
        X, Y, cell = self.get(args[0]), self.get(args[1]), int(args[2])
        if not 0 <= cell < Y.size(0):
            raise sc.ScenarioError(f"{name!r}: {Y.label} has no point {cell}")
        pts = [Y.restrict(self.site.lookup(n, ()), cell) for n in range(self.d + 1)]
        return ps.map_from_function(X, Y, lambda n, x: pts[n], label=name)

    def _fib(self, name, spec):
        kind, args = spec["kind"], spec.get("args")
        if kind == "search":
            return lf.search_fib(self.get(args), label=name)
        if kind == "identity":
            return lf.fib_identity(self.get(args))
        if kind == "compose":
            out = self.get(args[0])
            for r in args[1:]:
                out = lf.fib_compose(out, self.get(r))
            return out
        return lf.fib_pullback(self.get(args), self.get(spec["top"]), self.get(spec["left"]), self.get(spec["bottom"]))

    def step_one(self, f):
        hit = self._steps.get(id(f))
        if hit is None or hit[0] is not f:
            hit = (f, so.step_one(f, max_cells=self.max_cells))
            self._steps[id(f)] = hit
        return hit[1]

    def id_type(self, fname: str, fibname: str | None, route: str):
        key = (fname, fibname, route)
        if key not in self._ids:
            f = self.get(fname)
            fib = self.get(fibname) if fibname else None
            self._ids[key] = po.id_type(f, fib, route=route, max_cells=self.max_cells)
        return self._ids[key]


# -------------------------------------------------------------------- tasks

@dataclass
class Report:
    scenario: str
    route: str
    mode: str
    dim: int
    budget: int
    checks: list = field(default_factory=list)
    sizes: dict = field(default_factory=dict)
    timing: dict | None = None

    def add(self, name: str, quantified_over: str, result: bool):
        self.checks.append({"name": name, "quantified_over": quantified_over, "result": bool(result)})

    @property
    def ok(self) -> bool:
        return all(c["result"] for c in self.checks)

    def to_json(self) -> dict:
        return {"schema": SCHEMA_VERSION, "scenario": self.scenario, "construction_route": self.route,
                "mode": self.mode, "dim": self.dim, "budget": self.budget,
                "checks": self.checks, "sizes": self.sizes, "timing": self.timing}

    def render_json(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=False) + "\n"

    def render_text(self) -> str:
        lines = [f"scenario {self.scenario} ({self.mode}, D={self.dim}, budget {self.budget}, route {self.route})"]
        for c in self.checks:
            lines.append(f"{'PASS' if c['result'] else 'FAIL'}  {c['name']}  [{c['quantified_over']}]")
        for k, v in self.sizes.items():
            lines.append(f"size  {k} = {tuple(v)}")
        if self.timing is not None:
            for k, v in self.timing.items():
                lines.append(f"time  {k} = {v:.3f}s")
        n_bad = sum(not c["result"] for c in self.checks)
        lines.append(f"{len(self.checks) - n_bad}/{len(self.checks)} checks passed")
        return "\n".join(lines) + "\n"


def _task_factor(b: Builder, t: dict, rep: Report, route: str):
    name = t["map"]
    f = b.get(name)
    f = f.truncate(min(int(t.get("level", 2)), f.trunc))
    s = b.step_one(f)
    rep.sizes[f"E({name})"] = list(s.E.sizes())
    rep.add(f"factor[{name}]: F1t.C1 = f", _levels(f.dom), ps.commutes((s.c1, s.f1t), (f,)))
    rep.add(f"factor[{name}]: C1 mono", _levels(f.dom), s.c1.is_mono())
    rep.add(f"factor[{name}]: E restrictions functorial", f"{s.E.composable_pairs()} composable pairs",
            s.E.functoriality_violations() == 0)
    if t.get("laws", True):
        for check in so.factorization_laws(f, b.max_cells):
            rep.add(f"factor[{name}]: {check[0]}", check[1], check[2])
    if t.get("uniformity", False):
        u = lf.tfib_uniformity(so.tfib_of_f1t(s), limit=t.get("limit"))
        rep.add(f"factor[{name}]: F1t extensions uniform", u.quantified_over, u.ok)


def _task_idtype(b: Builder, t: dict, rep: Report, route: str):
    name, fibname = t["map"], t.get("fib")
    route = t.get("route", route)
    idt = b.id_type(name, fibname, route)
    tag = f"idtype[{name},{route}]"
    rep.sizes[f"Id({name})"] = list(idt.carrier.sizes())
    mp = idt.path_space
    XYX = mp.diagonal_obj
    diag = ps.map_from_function(idt.refl.dom, XYX,
                                lambda n, x: XYX.index(n, (x, x)), label="diagonal", check=False)
    rep.add(f"{tag}: p.refl = diagonal", _levels(idt.refl.dom), ps.commutes((idt.refl, idt.p), (diag,)))
    rep.add(f"{tag}: refl mono", _levels(idt.refl.dom), idt.refl.is_mono())
    for eq, ok in idt.sdr.equations().items():
        rep.add(f"{tag}: sdr {eq}", _levels(idt.sdr.tensor.product), ok)
    if route == "connections":
        inner = po.conn_sdr(mp)
        for eq, ok in inner.equations().items():
            rep.add(f"{tag}: path sdr {eq}", _levels(inner.tensor.product), ok)
    if t.get("compare_ams", False):
        for chk in ams_agreement(idt, b.get(fibname)):
            rep.add(f"{tag}: {chk[0]}", chk[1], chk[2])


def ams_agreement(idt: po.IdType, fib: lf.FibStructure, qs: list | None = None) -> list[tuple[str, str, bool]]:
    """strfromwk on the cubical instance against the direct identity type."""
    pre, swe = ams.cubical_instance()
    vg = ams.strfromwk(pre, swe, ams.cubical_paths(), idt.of, fib)
    dom = _levels(idt.carrier)
    out = [
        ("ams carrier = Id", dom, vg.carrier.sizes() == idt.carrier.sizes() and vg.carrier.keys == idt.carrier.keys
         and all(np.array_equal(a, c) for a, c in zip(vg.carrier.R, idt.carrier.R))),
        ("ams refl = refl", _levels(idt.refl.dom), vg.refl.equals(idt.refl)),
        ("ams p = p", dom, vg.p.equals(idt.p)),
    ]
    for q, d in (qs or [(lf.fib_identity(idt.carrier), idt.refl)]):
        J = po.j_eliminator(idt, q, d)
        J2 = lf.solve_lift(vg.refl_tcof, q, d, ps.identity(vg.carrier))
        out.append((f"ams J = J against {q.label or 'q'}", _levels(J.dom), J.equals(J2)))
    return out


def _motive(b: Builder, idt: po.IdType, motive):
    """``(q, d)``: the identity fibration, or the projection from ``Id x k`` with ``d`` at point 0."""
    if motive in (None, "identity"):
        return lf.fib_identity(idt.carrier), idt.refl, "identity"
    if isinstance(motive, dict) and "discrete" in motive:
        k = int(motive["discrete"])
        e = idt.trunc
        T, p0, p1 = ps.product(idt.carrier, ps.discrete(b.site, e, k), label=f"Id x {k}")
        q = lf.search_fib(p0, label=f"Id x {k} -> Id")
        pick = ps.map_from_function(idt.refl.dom, p1.cod, lambda n, x: 0, check=False)
        d = ps.pairing(T, idt.refl, pick)
        return q, d, f"discrete {k}"
    raise sc.ScenarioError(f"unknown motive {motive!r}")


def _task_jcheck(b: Builder, t: dict, rep: Report, route: str):
    name, fibname = t["map"], t.get("fib")
    route = t.get("route", route)
    idt = b.id_type(name, fibname, route)
    q, d, mname = _motive(b, idt, t.get("motive"))
    J = po.j_eliminator(idt, q, d)
    tag = f"jcheck[{name},{route},{mname}]"
    rep.sizes[f"Id({name})"] = list(idt.carrier.sizes())
    for eq, ok in po.strict_beta(idt, q, d, J).items():
        dom = _levels(J.dom) if eq.startswith("q") else _levels(idt.refl.dom.truncate(J.trunc))
        rep.add(f"{tag}: {eq}", dom, ok)
    if t.get("uniformity", False):
        u = lf.fib_uniformity(q, limit=t.get("limit"))
        rep.add(f"{tag}: motive uniform", u.quantified_over, u.ok)


def _task_axioms(b: Builder, t: dict, rep: Report, route: str):
    fibs = [b.get(n) for n in sc._refs(t.get("fibs", []))]
    cofs = [lf.cof(b.get(n)) for n in sc._refs(t.get("cofs", []))]
    if not fibs and not cofs:
        fibs = [lf.fib_identity(b.one)]
        cofs = [lf.cof(b.I.bdry)]
    r = ax.check_axioms(cofs, fibs, I=b.I, limit=t.get("limit", 2000))
    for e in r.entries:
        rep.add(e["name"], f"{e['quantified_over']} ({e['count']})", e["result"])


def _task_stability(b: Builder, t: dict, rep: Report, route: str):
    top, left, right, bottom = (b.get(t[k]) for k in ("top", "left", "right", "bottom"))
    fib = b.get(t["fib"]) if "fib" in t else None
    fib2 = b.get(t["fib2"]) if "fib2" in t else None
    r = po.stability_check(top, left, right, bottom, fib, fib2, route=t.get("route", route))
    tag = f"stability[{t['left']}->{t['right']}]"
    for stage, ok in r.stages.items():
        rep.add(f"{tag}: {stage}", f"{r.cones.get(stage, 0)} cones", ok)
    if r.first_failure:
        rep.add(f"{tag}: first failing stage {r.first_failure}", "stage order " + ",".join(po.STAGES), False)


def _task_pointwise(b: Builder, t: dict, rep: Report, route: str):
    top, left, right, bottom = (b.get(t[k]) for k in ("top", "left", "right", "bottom"))
    idx = ams.walking_arrow()
    D = ams.Diagram(idx, {"0": left.dom, "1": right.dom}, {"u": top})
    E = ams.Diagram(idx, {"0": left.cod, "1": right.cod}, {"u": bottom})
    pre, _ = ams.cubical_instance()
    pf = ams.pointwise_lift(pre.cof, idx)(ams.DiagramMap(D, E, {"0": left, "1": right}))
    tag = f"pointwise[{t['left']}->{t['right']}]"
    for arrow, ok in pf.naturality.items():
        rep.add(f"{tag}: natural at {arrow}", _levels(pf.middle.objects[idx.all_arrows()[arrow][0]]), ok)
    for a, m in (("0", left), ("1", right)):
        s = b.step_one(m)
        rep.add(f"{tag}: component {a} is the factorization of the evaluated map", _levels(m.dom),
                pf.left.components[a].equals(s.c1) and pf.right.components[a].equals(s.f1t))


TASK_RUNNERS = {"factor": _task_factor, "idtype": _task_idtype, "jcheck": _task_jcheck,
                "axioms": _task_axioms, "stability": _task_stability, "pointwise": _task_pointwise}


def run_scenario(s: sc.Scenario, route: str = "sdr", max_cells: int = so.DEFAULT_MAX_CELLS,
                 only: str | None = None, seed: int | None = None, timing: bool = False) -> Report:
    """Run the tasks of ``s``; a seed only permutes execution order, never the report."""
    b = Builder(s, max_cells)
    rep = Report(s.name, route, s.mode, s.dim, s.budget, timing={} if timing else None)
    todo = [(i, t) for i, t in enumerate(s.tasks) if only is None or t["kind"] == only]
    order = list(todo)
    if seed is not None:
        random.Random(seed).shuffle(order)
    parts = {}
    for i, t in order:
        part = Report(s.name, route, s.mode, s.dim, s.budget)
        t0 = time.perf_counter()
        TASK_RUNNERS[t["kind"]](b, t, part, route)
        parts[i] = (part, time.perf_counter() - t0)
    for i, t in todo:
        part, dt = parts[i]
        rep.checks.extend(part.checks)
        rep.sizes.update(part.sizes)
        if timing:
            rep.timing[f"{i}:{t['kind']}"] = dt
    return rep


# ---------------------------------------------------------------------- cli

def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cubeid", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("run",) + sc.TASKS:
        q = sub.add_parser(name, help="run all tasks" if name == "run" else f"run only the {name} tasks")
        q.add_argument("scenario", help="scenario file or bundled scenario name")
        q.add_argument("--mode", choices=sorted(MODES))
        q.add_argument("--dim", type=int)
        q.add_argument("--route", choices=po.ROUTES, default="sdr")
        q.add_argument("--json", action="store_true", help="print the report as JSON")
        q.add_argument("--max-cells", type=int, default=so.DEFAULT_MAX_CELLS)
        q.add_argument("--seed", type=int, help="shuffle task execution order (report order is fixed)")
        q.add_argument("--timing", action="store_true", help="include wall-clock per task")
    sub.add_parser("list", help="list bundled scenarios")
    q = sub.add_parser("print", help="parse a scenario and print it normalized")
    q.add_argument("scenario")
    return p


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "list":
        print("\n".join(sc.bundled_names()))
        return EXIT_OK
    try:
        s = sc.load(sc.resolve_path(args.scenario))
        if args.command == "print":
            sys.stdout.write(sc.dump(s))
            return EXIT_OK
        if args.dim is not None and args.dim < 0:
            raise sc.ScenarioError("--dim must be non-negative")
        s = s.with_overrides(args.mode, args.dim)
        only = None if args.command == "run" else args.command
        rep = run_scenario(s, args.route, args.max_cells, only, args.seed, args.timing)
    except (sc.ScenarioError, PresheafError, SiteError) as e:
        print(f"cubeid: error: {e}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(rep.render_json() if args.json else rep.render_text())
    return EXIT_OK if rep.ok else EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())

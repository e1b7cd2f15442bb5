"""Canonical JSON form of automata.

Rationals are written as ``[numerator, denominator]`` pairs so that the
output is exact and byte-stable.  ``to_json(a)`` always serializes
``a.canonical()``; ``from_json`` inverts it.
"""
from __future__ import annotations

import json
from fractions import Fraction

from .automata import HAwK, Edge, Init, Location, Template, Trigger
from .expr import Atom, Expr, FlowExpr, FlowTerm, Predicate
from .kernels import KINDS, Distribution


def _q(x: Fraction) -> list:
    x = Fraction(x)
    return [x.numerator, x.denominator]


def _unq(p) -> Fraction:
    return Fraction(int(p[0]), int(p[1]))


def expr_to_obj(e: Expr) -> list:
    return [[list(m), _q(c)] for m, c in e.terms]


def expr_from_obj(obj) -> Expr:
    out = Expr()
    for mono, c in obj:
        t = Expr.const(_unq(c))
        for v in mono:
            t = t * Expr.var(v)
        out = out + t
    return out


def pred_to_obj(p: Predicate) -> list:
    return [{"expr": expr_to_obj(a.expr), "op": a.op} for a in p.atoms]


def pred_from_obj(obj) -> Predicate:
    return Predicate(tuple(Atom(expr_from_obj(a["expr"]), a["op"]) for a in obj))


def dist_to_obj(d: Distribution) -> dict:
    return {"kind": d.kind, "params": [expr_to_obj(p) for p in d.params()]}


def dist_from_obj(obj) -> Distribution:
    return KINDS[obj["kind"]](*(expr_from_obj(p) for p in obj["params"]))


def flow_to_obj(f: FlowExpr) -> dict:
    return {"const": _q(f.const),
            "terms": [{"kind": t.kind, "var": t.var, "coef": _q(t.coef), "scale": t.scale}
                      for t in f.terms]}


def flow_from_obj(obj) -> FlowExpr:
    return FlowExpr(_unq(obj["const"]),
                    tuple(FlowTerm(t["kind"], t["var"], _unq(t["coef"]), t["scale"]) for t in obj["terms"]))


def hawk_to_obj(a: HAwK) -> dict:
    a = a.canonical()
    obj = {
        "name": a.name,
        "variables": list(a.variables),
        # receive-only template labels carry no delay kernel
        "labels": [{"name": l, "delay": dist_to_obj(a.delay_kernels[l]) if l in a.delay_kernels else None}
                   for l in a.labels],
        "locations": [{"name": l.name, "urgent": l.urgent, "invariant": pred_to_obj(l.invariant.canonical()),
                       "flow": {v: flow_to_obj(f) for v, f in sorted(l.flow.items()) if not f.is_zero()}}
                      for l in a.locations],
        "edges": [{"source": e.source, "label": e.label, "target": e.target,
                   "trigger": e.trigger.value, "guard": pred_to_obj(e.guard.canonical()),
                   "reset": {v: expr_to_obj(x) for v, x in sorted(e.reset.items())},
                   "kernels": {v: dist_to_obj(d) for v, d in sorted(e.kernels.items())},
                   "send": sorted(e.send), "recv": sorted(e.recv)} for e in a.edges],
        "init": {"location": a.init.location,
                 "values": {v: expr_to_obj(x) for v, x in sorted(a.init.values.items())},
                 "condition": pred_to_obj(a.init.condition.canonical())},
    }
    if isinstance(a, Template):
        obj["inputs"], obj["outputs"] = sorted(a.inputs), sorted(a.outputs)
    return obj


def hawk_from_obj(obj) -> HAwK:
    locs = tuple(Location(l["name"], bool(l["urgent"]),
                          {v: flow_from_obj(f) for v, f in l["flow"].items()},
                          pred_from_obj(l["invariant"])) for l in obj["locations"])
    edges = tuple(Edge(e["source"], e["label"], e["target"], pred_from_obj(e["guard"]),
                       {v: expr_from_obj(x) for v, x in e["reset"].items()},
                       {v: dist_from_obj(d) for v, d in e["kernels"].items()},
                       Trigger(e["trigger"]), frozenset(e["send"]), frozenset(e["recv"]))
                  for e in obj["edges"])
    i = obj["init"]
    init = Init(i["location"], {v: expr_from_obj(x) for v, x in i["values"].items()},
                pred_from_obj(i["condition"]))
    kw = dict(name=obj["name"], variables=tuple(obj["variables"]), locations=locs, edges=edges,
              init=init, delay_kernels={l["name"]: dist_from_obj(l["delay"]) for l in obj["labels"]
                             if l["delay"] is not None},
              labels=tuple(l["name"] for l in obj["labels"]))
    if "inputs" in obj:
        return Template(inputs=tuple(obj["inputs"]), outputs=tuple(obj["outputs"]), **kw)
    return HAwK(**kw)


def to_json(a: HAwK, indent: int | None = 2) -> str:
    return json.dumps(hawk_to_obj(a), indent=indent, sort_keys=True)


def from_json(text: str) -> HAwK:
    return hawk_from_obj(json.loads(text))

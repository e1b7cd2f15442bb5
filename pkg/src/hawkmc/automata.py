"""Hybrid automata with delay and reset kernels, and their templates."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping

import numpy as np
from scipy.optimize import linprog

from .expr import TRUE, Expr, FlowExpr, Predicate, format_expr
from .kernels import Dirac, Distribution, Normal, dirac

DEFAULT_TOL = 1e-9


class Trigger(enum.Enum):
    STOCHASTIC = "stochastic"
    CROSSING = "crossing"
    IMMEDIATE = "immediate"


class ModelError(ValueError):
    """Structurally invalid automaton or template."""


@dataclass(frozen=True)
class Location:
    name: str
    urgent: bool = False
    flow: Mapping[str, FlowExpr] = field(default_factory=dict)
    invariant: Predicate = TRUE

    def flow_of(self, var: str) -> FlowExpr:
        return self.flow.get(var, _ZERO_FLOW)


_ZERO_FLOW = FlowExpr()


@dataclass(frozen=True)
class Edge:
    source: str
    label: str
    target: str
    guard: Predicate = TRUE
    reset: Mapping[str, Expr] = field(default_factory=dict)
    kernels: Mapping[str, Distribution] = field(default_factory=dict)
    trigger: Trigger = Trigger.STOCHASTIC
    send: frozenset = frozenset()
    recv: frozenset = frozenset()

    def new_value(self, var: str) -> Expr:
        """Deterministic post-value of ``var`` in terms of pre-values."""
        return self.reset.get(var, Expr.var(var))

    def reset_kernel(self, var: str) -> Distribution:
        return self.kernels.get(var) or Dirac(Expr.var(var))

    def sync_free(self) -> bool:
        return not self.send and not self.recv


@dataclass(frozen=True)
class Init:
    location: str
    values: Mapping[str, Expr] = field(default_factory=dict)
    condition: Predicate = TRUE


@dataclass(frozen=True)
class HAwK:
    """Hybrid automaton with per-label delay kernels and per-edge reset kernels.

    Reset kernels live on the edges (``Edge.kernels``); a variable with no
    entry is kept by the reset step.  Variables without an ``Init`` value start
    at zero.
    """

    name: str
    variables: tuple
    locations: tuple
    edges: tuple
    init: Init
    delay_kernels: Mapping[str, Distribution] = field(default_factory=dict)
    labels: tuple = ()

    def __post_init__(self):
        if not self.labels:
            labs = sorted({e.label for e in self.edges} | set(self.delay_kernels))
            object.__setattr__(self, "labels", tuple(labs))
        if not self.locations:
            raise ModelError(f"automaton {self.name!r} has no locations")

    # lookup -----------------------------------------------------------
    def location(self, name: str) -> Location:
        for loc in self.locations:
            if loc.name == name:
                return loc
        raise KeyError(name)

    def location_names(self) -> tuple:
        return tuple(loc.name for loc in self.locations)

    def out_edges(self, name: str) -> list:
        return [e for e in self.edges if e.source == name]

    def delay_kernel(self, label: str) -> Distribution:
        return self.delay_kernels[label]

    def reset_kernels(self) -> dict:
        """``(edge index, variable) -> Distribution`` for every pair, Dirac fill-in included."""
        return {(i, v): e.reset_kernel(v) for i, e in enumerate(self.edges) for v in self.variables}

    def initial_valuation(self) -> dict:
        return evaluate_init(self.init.values, self.variables)

    # transformations --------------------------------------------------
    def rename(self, variables: Mapping[str, str] | None = None,
               labels: Mapping[str, str] | None = None,
               locations: Mapping[str, str] | None = None) -> "HAwK":
        vm, lm, om = dict(variables or {}), dict(labels or {}), dict(locations or {})

        def loc_name(n):
            return om.get(n, n)

        locs = tuple(Location(loc_name(l.name), l.urgent,
                              {vm.get(v, v): f.rename(vm) for v, f in l.flow.items()},
                              l.invariant.rename(vm)) for l in self.locations)
        edges = tuple(_rename_edge(e, vm, lm, om) for e in self.edges)
        init = Init(loc_name(self.init.location),
                    {vm.get(v, v): x.rename(vm) for v, x in self.init.values.items()},
                    self.init.condition.rename(vm))
        dk = {lm.get(l, l): d.rename(vm) for l, d in self.delay_kernels.items()}
        return replace(self, variables=tuple(vm.get(v, v) for v in self.variables),
                       locations=locs, edges=edges, init=init, delay_kernels=dk,
                       labels=tuple(lm.get(l, l) for l in self.labels))

    def canonical(self) -> "HAwK":
        """Same automaton with names, locations and edges in sorted order."""
        locs = tuple(sorted(self.locations, key=lambda l: l.name))
        edges = tuple(sorted(self.edges, key=edge_sort_key))
        return replace(self, variables=tuple(sorted(self.variables)), locations=locs,
                       edges=edges, labels=tuple(sorted(self.labels)),
                       delay_kernels=dict(sorted(self.delay_kernels.items())))


@dataclass(frozen=True)
class Template(HAwK):
    """Composable fragment: input/output split plus send/receive sets on edges."""

    inputs: tuple = ()
    outputs: tuple = ()


def _rename_edge(e: Edge, vm, lm, om) -> Edge:
    return Edge(om.get(e.source, e.source), lm.get(e.label, e.label), om.get(e.target, e.target),
                e.guard.rename(vm),
                {vm.get(v, v): x.rename(vm) for v, x in e.reset.items()},
                {vm.get(v, v): d.rename(vm) for v, d in e.kernels.items()},
                e.trigger,
                frozenset(vm.get(v, v) for v in e.send),
                frozenset(vm.get(v, v) for v in e.recv))


def edge_sort_key(e: Edge) -> tuple:
    return (e.source, e.label, e.target, str(e.guard.canonical()),
            tuple((v, format_expr(x)) for v, x in sorted(e.reset.items())),
            tuple((v, str(d)) for v, d in sorted(e.kernels.items())),
            e.trigger.value, tuple(sorted(e.send)), tuple(sorted(e.recv)))


def evaluate_init(values: Mapping[str, Expr], variables) -> dict:
    """Evaluate possibly inter-referencing init expressions in dependency order."""
    out = {v: 0.0 for v in variables}
    exact = {v: Fraction(0) for v in variables}
    pending = dict(values)
    while pending:
        ready = [v for v, x in pending.items() if not (x.variables() & pending.keys())]
        if not ready:
            raise ModelError(f"cyclic initial values among {sorted(pending)}")
        for v in sorted(ready):
            exact[v] = pending.pop(v).evaluate_exact(exact)
            out[v] = float(exact[v])
    return out


# state queries ------------------------------------------------------------

def _loc(s):
    return s.location if hasattr(s, "location") else s[0]


def _val(s):
    return s.valuation if hasattr(s, "valuation") else s[1]


def edge_enabled(a: HAwK, e: Edge, valuation: Mapping[str, float], tol: float = DEFAULT_TOL) -> bool:
    if not e.guard.holds(valuation, tol):
        return False
    inv = a.location(e.target).invariant
    if inv.is_true():
        return True
    post = dict(valuation)
    post.update({v: x.evaluate(valuation) for v, x in e.reset.items()})
    return inv.holds(post, tol)


def enabled_edges(a: HAwK, s, tol: float = DEFAULT_TOL) -> list:
    """Edges leaving ``s``'s location whose guard and target invariant admit a step.

    ``s`` is any object with ``location`` and ``valuation`` attributes, or a
    ``(location, valuation)`` pair.
    """
    loc, val = _loc(s), _val(s)
    return [e for e in a.edges if e.source == loc and edge_enabled(a, e, val, tol)]


def random_clock_rates(a: HAwK, s, tol: float = DEFAULT_TOL) -> dict:
    live = {e.label for e in enabled_edges(a, s, tol)}
    return {lab: int(lab in live) for lab in a.labels}


# validation ---------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    kind: str
    message: str

    def __str__(self):
        return f"{self.kind}: {self.message}"


def predicates_overlap(p: Predicate, q: Predicate) -> bool:
    """Whether ``p & q`` is satisfiable over the reals (strict atoms respected)."""
    atoms = (p & q).atoms
    names = sorted({v for a in atoms for v in a.expr.variables()})
    if not names:
        return all(a.holds({}) for a in atoms)
    idx = {v: i for i, v in enumerate(names)}
    n = len(names)
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    has_strict = False
    for a in atoms:
        row = np.zeros(n + 1)
        for v in a.expr.variables():
            row[idx[v]] = float(a.expr.coeff(v))
        c = float(a.expr.constant())
        if a.op == "==":
            A_eq.append(row)
            b_eq.append(-c)
            continue
        sign = 1.0 if a.op in ("<", "<=") else -1.0
        r = sign * row
        if a.op in ("<", ">"):
            r[n] = 1.0
            has_strict = True
        A_ub.append(r)
        b_ub.append(-sign * c)
    obj = np.zeros(n + 1)
    obj[n] = -1.0
    bounds = [(None, None)] * n + [(0.0, 1.0)]
    res = linprog(obj, A_ub=np.array(A_ub) if A_ub else None, b_ub=b_ub or None,
                  A_eq=np.array(A_eq) if A_eq else None, b_eq=b_eq or None,
                  bounds=bounds, method="highs")
    if res.status != 0:
        return False
    return not has_strict or -res.fun > 1e-9


def rate_is_zero(loc: Location, v: str, stack=()) -> bool:
    """Whether ``v`` has rate 0 in ``loc`` for every valuation."""
    f = loc.flow.get(v)
    if f is None:
        return True
    if f.const != 0 or any(t.kind == "value" for t in f.terms):
        return False
    return all(t.var not in stack and rate_is_zero(loc, t.var, stack + (v,)) for t in f.terms)


def piecewise_constant_vars(a: HAwK) -> frozenset:
    """Variables whose rate is identically zero in every location."""
    return frozenset(v for v in a.variables if all(rate_is_zero(l, v) for l in a.locations))


def flow_violations(a: HAwK) -> list:
    out = []
    moving = set(a.variables) - piecewise_constant_vars(a)
    for loc in a.locations:
        for v, f in loc.flow.items():
            for w in sorted(f.value_vars() & moving):
                out.append(Violation("flow-rule",
                                     f"flow of {v} in {loc.name} uses the value of {w}, "
                                     f"which is not piecewise-constant"))
        # rate chains must bottom out
        deps = {v: f.rate_vars() for v, f in loc.flow.items()}
        state: dict = {}

        def visit(v, stack=()):
            if state.get(v) == 2:
                return
            if v in stack:
                out.append(Violation("flow-rule", f"cyclic rate references through {v} in {loc.name}"))
                return
            for w in deps.get(v, ()):
                visit(w, stack + (v,))
            state[v] = 2

        for v in sorted(deps):
            visit(v)
    return out


def validate_hawk(a: HAwK, tol: float = DEFAULT_TOL) -> list:
    """All structural findings for ``a``; an empty list means valid."""
    found: list = []
    names = set(a.location_names())
    varset = set(a.variables)
    if len(names) != len(a.locations):
        found.append(Violation("duplicate-location", "location names are not unique"))
    for lab in a.labels:
        if lab not in a.delay_kernels:
            found.append(Violation("missing-delay-kernel", f"label {lab} has no delay kernel"))
    is_template = isinstance(a, Template)
    for i, e in enumerate(a.edges):
        where = f"edge {i} ({e.source} -{e.label}-> {e.target})"
        if e.source not in names or e.target not in names:
            found.append(Violation("unknown-location", where))
        if not e.guard.is_affine():
            found.append(Violation("nonlinear-guard", f"{where}: guard {e.guard}"))
        if e.trigger is Trigger.CROSSING and e.guard.is_true():
            found.append(Violation("trivial-crossing-guard", f"{where} is guard-crossing with guard true"))
        if e.trigger is Trigger.STOCHASTIC and isinstance(a.delay_kernels.get(e.label), Normal):
            found.append(Violation("negative-delay-support",
                                   f"{where}: delay kernel {a.delay_kernels[e.label]} has negative support"))
        if (e.send or e.recv) and not is_template:
            found.append(Violation("residual-sync",
                                   f"{where} still sends {sorted(e.send)} / receives {sorted(e.recv)}"))
        used = e.guard.variables() | set(e.reset) | set(e.kernels)
        for x in e.reset.values():
            used |= x.variables()
        for d in e.kernels.values():
            used |= d.variables()
        missing = used - varset
        if missing:
            found.append(Violation("undeclared-variable", f"{where} uses {sorted(missing)}"))
    for lab, d in a.delay_kernels.items():
        if d.nonnegative_support() is False and not isinstance(d, Normal):
            found.append(Violation("negative-delay-support", f"label {lab}: {d}"))
    # pairwise disjoint guards per (location, label)
    groups: dict = {}
    for i, e in enumerate(a.edges):
        groups.setdefault((e.source, e.label), []).append(i)
    for (src, lab), idx in sorted(groups.items()):
        for p in range(len(idx)):
            for q in range(p + 1, len(idx)):
                gp, gq = a.edges[idx[p]].guard, a.edges[idx[q]].guard
                if gp.is_affine() and gq.is_affine() and predicates_overlap(gp, gq):
                    found.append(Violation("guard-overlap",
                                           f"edges {idx[p]} and {idx[q]} on ({src}, {lab}) have overlapping guards "
                                           f"{gp} / {gq}"))
    for loc in a.locations:
        if loc.urgent and not a.out_edges(loc.name):
            found.append(Violation("urgent-deadend", f"urgent location {loc.name} has no outgoing edge"))
        if not loc.invariant.is_affine():
            found.append(Violation("nonlinear-invariant", f"{loc.name}: {loc.invariant}"))
    if not is_template:
        found.extend(flow_violations(a))
        if a.init.location not in names:
            found.append(Violation("unknown-location", f"initial location {a.init.location}"))
        else:
            try:
                v0 = a.initial_valuation()
            except (ModelError, KeyError) as exc:
                found.append(Violation("init", str(exc)))
            else:
                if not a.location(a.init.location).invariant.holds(v0, tol):
                    found.append(Violation("init-invariant",
                                           f"initial valuation violates the invariant of {a.init.location}"))
                if not a.init.condition.holds(v0, tol):
                    found.append(Violation("init-invariant", "initial valuation violates the initial condition"))
    return found


def immediate_kernel() -> Dirac:
    return dirac(0)

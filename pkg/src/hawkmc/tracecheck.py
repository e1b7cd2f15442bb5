"""Independent path validator.

Works directly on the :class:`~hawkmc.automata.HAwK` (no compiled form) and
re-derives every condition a path must satisfy: flow consistency, clock
gating, expiration and reset supports, frame conditions and the final
segment bound.  Clock gating is judged at the midpoint of each time step,
where enabledness is constant; a guard within tolerance of its boundary at
the midpoint accepts either outcome.
"""
from __future__ import annotations

from dataclasses import dataclass

from .automata import HAwK
from .kernels import support_contains
from .simulator import DiscreteStep, ResetStep, TimeStep, Trace

CHECK_TOL = 1e-6


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    reason: str = ""
    step: int = -1

    def __bool__(self):
        return self.ok


def flow_rates(a: HAwK, location: str, valuation) -> dict:
    loc = a.location(location)
    memo: dict = {}

    def rate(v, stack=()):
        if v in memo:
            return memo[v]
        if v in stack:
            raise ValueError(f"cyclic flow through {v}")
        f = loc.flow.get(v)
        if f is None:
            memo[v] = 0.0
            return 0.0
        r = float(f.const)
        for t in f.terms:
            if t.kind == "value":
                r += float(t.coef) * valuation[t.var]
            else:
                k = float(t.coef) * rate(t.var, stack + (v,))
                r += k * (valuation[t.scale] if t.scale else 1.0)
        memo[v] = r
        return r

    return {v: rate(v) for v in a.variables}


def _close(x, y, tol):
    return abs(x - y) <= tol * max(1.0, abs(x), abs(y))


def _atom_status(atom, val, tol):
    g = atom.expr.evaluate(val)
    if abs(g) <= tol:
        return None
    op = atom.op
    if op in ("<", "<="):
        return g < 0
    if op in (">", ">="):
        return g > 0
    return False


def _edge_status(a: HAwK, e, val, tol):
    """True / False / None (undecidable at tolerance)."""
    out = True
    for atom in e.guard.atoms:
        s = _atom_status(atom, val, tol)
        if s is False:
            return False
        if s is None:
            out = None
    inv = a.location(e.target).invariant
    if inv.atoms:
        post = dict(val)
        post.update({v: x.evaluate(val) for v, x in e.reset.items()})
        for atom in inv.atoms:
            s = _atom_status(atom, post, tol)
            if s is False:
                return False
            if s is None:
                out = None
    return out


def _label_status(a, loc, label, val, tol):
    st = [_edge_status(a, e, val, tol) for e in a.edges if e.source == loc and e.label == label]
    if any(s is True for s in st):
        return True
    if all(s is False for s in st):
        return False
    return None


def check_trace(a: HAwK, tr: Trace, tol: float = CHECK_TOL) -> CheckResult:
    """Verdict on whether ``tr`` is a path of ``a`` up to ``tr.horizon``."""
    s0 = tr.initial
    if s0.location != a.init.location:
        return CheckResult(False, f"initial location {s0.location} is not {a.init.location}")
    v0 = a.initial_valuation()
    for v in a.variables:
        if not _close(s0.valuation[v], v0[v], tol):
            return CheckResult(False, f"initial value of {v} is {s0.valuation[v]}, expected {v0[v]}")
    for lab in a.labels:
        if s0.clocks[lab] != 0.0:
            return CheckResult(False, f"clock {lab} does not start at 0")
        if not support_contains(a.delay_kernels[lab], s0.expirations[lab], s0.valuation, tol):
            return CheckResult(False, f"initial expiration of {lab} outside its delay kernel support")
    if not a.location(s0.location).invariant.holds(s0.valuation, tol):
        return CheckResult(False, "initial state violates the invariant")
    if len(tr.steps) != len(tr.states):
        return CheckResult(False, "steps and post-states differ in length")

    prev, prev_kind, fired = s0, None, None
    total = 0.0
    for i, (st, post) in enumerate(zip(tr.steps, tr.states)):
        def bad(msg):
            return CheckResult(False, msg, i)

        if isinstance(st, TimeStep):
            if prev_kind == "discrete":
                return bad("time step between a discrete step and its reset step")
            dt = st.dt
            if dt < 0:
                return bad(f"negative time step {dt}")
            loc = a.location(prev.location)
            if dt > tol and loc.urgent:
                return bad(f"time passes in urgent location {loc.name}")
            if post.location != prev.location:
                return bad("location changes during a time step")
            if not _close(post.time, prev.time + dt, tol):
                return bad("global time does not advance by dt")
            rates = flow_rates(a, prev.location, prev.valuation)
            for v in a.variables:
                if not _close(post.valuation[v], prev.valuation[v] + rates[v] * dt, tol):
                    return bad(f"{v} does not follow its flow: {prev.valuation[v]} + {rates[v]}*{dt} "
                               f"!= {post.valuation[v]}")
            mid = {v: prev.valuation[v] + rates[v] * dt / 2 for v in a.variables}
            for lab in a.labels:
                if post.expirations[lab] != prev.expirations[lab]:
                    return bad(f"expiration of {lab} changes during a time step")
                delta = post.clocks[lab] - prev.clocks[lab]
                status = _label_status(a, prev.location, lab, mid, tol) if dt > tol else False
                runs = _close(delta, dt, tol)
                stays = _close(delta, 0.0, tol)
                if status is True and not runs:
                    return bad(f"clock {lab} is enabled but advanced {delta} over {dt}")
                if status is False and not stays:
                    return bad(f"clock {lab} is disabled but advanced {delta}")
                if status is None and not (runs or stays):
                    return bad(f"clock {lab} advanced {delta}, neither 0 nor {dt}")
                if post.clocks[lab] > post.expirations[lab] + tol * max(1.0, post.expirations[lab]):
                    return bad(f"clock {lab} passed its expiration")
            if not loc.invariant.holds(post.valuation, tol):
                return bad(f"invariant of {loc.name} violated")
            total += dt
            prev_kind = "time"
        elif isinstance(st, DiscreteStep):
            if prev_kind != "time":
                return bad("discrete step not preceded by a time step")
            if not 0 <= st.edge < len(a.edges):
                return bad(f"unknown edge {st.edge}")
            e = a.edges[st.edge]
            if e.label != st.label:
                return bad(f"edge {st.edge} has label {e.label}, step says {st.label}")
            if e.source != prev.location:
                return bad(f"edge {st.edge} leaves {e.source}, not {prev.location}")
            if not e.guard.holds(prev.valuation, tol):
                return bad(f"guard {e.guard} of edge {st.edge} is false")
            if not _close(prev.clocks[e.label], prev.expirations[e.label], tol):
                return bad(f"edge {st.edge} fires before its clock expired")
            if post.location != e.target:
                return bad("discrete step does not reach the edge target")
            if post.time != prev.time:
                return bad("time changes in a discrete step")
            for v in a.variables:
                want = e.reset[v].evaluate(prev.valuation) if v in e.reset else prev.valuation[v]
                if not _close(post.valuation[v], want, tol):
                    return bad(f"reset of {v} gives {post.valuation[v]}, expected {want}")
            if post.clocks != prev.clocks or post.expirations != prev.expirations:
                return bad("clocks or expirations change in a discrete step")
            fired = e
            prev_kind = "discrete"
        elif isinstance(st, ResetStep):
            if prev_kind != "discrete":
                return bad("reset step without a preceding discrete step")
            e = fired
            assigned = dict(st.assignments)
            if set(assigned) != set(e.kernels):
                return bad(f"reset step assigns {sorted(assigned)}, kernels cover {sorted(e.kernels)}")
            for v in a.variables:
                if v in e.kernels:
                    x = post.valuation[v]
                    if x != assigned[v]:
                        return bad(f"reset step records {assigned[v]} for {v} but state has {x}")
                    if not support_contains(e.kernels[v], x, prev.valuation, tol):
                        return bad(f"{v}={x} outside the support of {e.kernels[v]}")
                elif post.valuation[v] != prev.valuation[v]:
                    return bad(f"{v} changes in the reset step without a kernel")
            if post.location != prev.location or post.time != prev.time:
                return bad("reset step moves location or time")
            for lab in a.labels:
                if lab == e.label:
                    if post.clocks[lab] != 0.0:
                        return bad(f"clock {lab} not restarted after firing")
                    if not support_contains(a.delay_kernels[lab], post.expirations[lab], post.valuation, tol):
                        return bad(f"new expiration of {lab} outside its delay kernel support")
                elif post.clocks[lab] != prev.clocks[lab] or post.expirations[lab] != prev.expirations[lab]:
                    return bad(f"clock or expiration of unfired label {lab} changed")
            if not a.location(post.location).invariant.holds(post.valuation, tol):
                return bad(f"state after reset violates the invariant of {post.location}")
            prev_kind = "reset"
        else:
            return bad(f"unknown step {st!r}")
        prev = post
    if tr.steps and not isinstance(tr.steps[-1], TimeStep):
        return CheckResult(False, "path does not end with a time step")
    if not _close(total, tr.horizon, tol):
        return CheckResult(False, f"time steps sum to {total}, horizon is {tr.horizon}")
    return CheckResult(True)

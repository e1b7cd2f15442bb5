"""Parallel composition of templates along synchronization mappings.

Composition works on a :class:`Network`: a set of component templates plus
*groups*, each group being a set of component edges that fire together.
Resolving a mapping ``(name, snd, rcv)`` fuses every group that still sends
``name`` from ``snd`` with receiving groups covering every member of ``rcv``.
Groups that still wait on a resolved name are dropped.  :func:`lower` then
builds the explicit product automaton.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Mapping

from .automata import HAwK, Edge, Init, Location, ModelError, Template, rate_is_zero
from .expr import TRUE, Expr, FlowExpr, Predicate
from .kernels import Dirac

LOC_SEP = "|"


class CompositionError(ModelError):
    pass


@dataclass(frozen=True)
class SyncMapping:
    name: str
    snd: str
    rcv: frozenset = frozenset()


@dataclass
class CompositionPlan:
    templates: dict
    mappings: list = field(default_factory=list)

    def check(self):
        names = list(self.templates)
        outputs: dict = {}
        for t in self.templates.values():
            for v in t.outputs:
                if v in outputs:
                    raise CompositionError(f"output {v} is produced by both {outputs[v]} and {t.name}")
                outputs[v] = t.name
        covered: dict = {}
        for m in self.mappings:
            if m.snd not in self.templates:
                raise CompositionError(f"mapping {m.name}: unknown sender {m.snd}")
            if m.name not in self.templates[m.snd].outputs:
                raise CompositionError(f"mapping {m.name}: {m.snd} has no output {m.name}")
            if m.snd in m.rcv:
                raise CompositionError(f"mapping {m.name}: {m.snd} cannot receive its own output")
            for r in m.rcv:
                if r not in self.templates:
                    raise CompositionError(f"mapping {m.name}: unknown receiver {r}")
                if m.name not in self.templates[r].inputs:
                    raise CompositionError(f"mapping {m.name}: {r} has no input {m.name}")
                if (r, m.name) in covered:
                    raise CompositionError(f"input {m.name} of {r} is driven twice")
                covered[(r, m.name)] = m.snd
        for n in names:
            for v in self.templates[n].inputs:
                if (n, v) not in covered:
                    raise CompositionError(f"input {v} of {n} is not driven by any signal")


@dataclass(frozen=True)
class Group:
    """Edges firing together; ``links`` records ``(receiver, name, sender)``."""

    members: tuple  # ((component, edge index), ...) sorted by component
    sends: frozenset  # pending (component, name)
    recvs: frozenset  # pending (component, name)
    links: tuple = ()

    def components(self) -> frozenset:
        return frozenset(c for c, _ in self.members)


@dataclass(frozen=True)
class Network:
    components: Mapping[str, Template]
    groups: tuple

    @staticmethod
    def of(t: Template) -> "Network":
        return Network({t.name: t}, tuple(_singletons(t)))


def _singletons(t: Template) -> list:
    return [Group(((t.name, i),), frozenset((t.name, v) for v in e.send),
                  frozenset((t.name, v) for v in e.recv))
            for i, e in enumerate(t.edges)]


def _as_network(x) -> Network:
    if isinstance(x, Network):
        return x
    if isinstance(x, Template):
        return Network.of(x)
    raise TypeError(f"cannot compose {type(x).__name__}")


def compose_step(intermediate, new_templates: Iterable[Template], m: SyncMapping) -> Network:
    """Resolve one mapping, adding ``new_templates`` to ``intermediate``."""
    net = _as_network(intermediate)
    comps = dict(net.components)
    groups = list(net.groups)
    for t in sorted(new_templates, key=lambda t: t.name):
        if t.name in comps:
            if comps[t.name] is not t and comps[t.name] != t:
                raise CompositionError(f"component name {t.name} used twice")
            continue
        clash = set(t.outputs) & {v for c in comps.values() for v in c.outputs}
        if clash:
            raise CompositionError(f"output names {sorted(clash)} of {t.name} collide")
        comps[t.name] = t
        groups.extend(_singletons(t))
    if m.snd not in comps or not m.rcv <= comps.keys():
        missing = ({m.snd} | set(m.rcv)) - comps.keys()
        raise CompositionError(f"mapping {m.name}: components {sorted(missing)} are not part of the network")

    for r in sorted(m.rcv):
        rt = comps[r]
        lacking = [l.name for l in rt.locations
                   if not any(e.source == l.name and m.name in e.recv for e in rt.edges)]
        if lacking:
            st = comps[m.snd]
            src = next((e.source for e in st.edges if m.name in e.send), st.init.location)
            raise CompositionError(f"mapping {m.name}: receiver {r} cannot receive in location "
                                   f"{lacking[0]} while sender {m.snd} sends from {src}")

    roles = frozenset((r, m.name) for r in m.rcv)
    send_role = (m.snd, m.name)
    senders = [g for g in groups if send_role in g.sends]
    receivers = [g for g in groups if g.recvs & roles and send_role not in g.sends]
    kept = [g for g in groups if send_role not in g.sends and not (g.recvs & roles)]
    for s in senders:
        need = roles - s.recvs
        covers = list(_covers(need, receivers, s.components()))
        if not covers:
            src = comps[m.snd].edges[dict(s.members)[m.snd]].source
            raise CompositionError(f"mapping {m.name}: no receiving edges match the send from {src}")
        for cover in covers:
            kept.append(_fuse(s, cover, m, roles))
    return Network(comps, tuple(kept))


def _covers(need: frozenset, pool: list, used: frozenset):
    if not need:
        yield ()
        return
    role = min(need)
    for g in pool:
        hit = g.recvs & need
        if role in hit and not (g.components() & used) and g.recvs & {role} and hit <= need:
            for rest in _covers(need - hit, pool, used | g.components()):
                yield (g,) + rest


def _fuse(s: Group, cover: tuple, m: SyncMapping, roles: frozenset) -> Group:
    members = list(s.members)
    sends, recvs, links = set(s.sends), set(s.recvs), list(s.links)
    for g in cover:
        members.extend(g.members)
        sends |= g.sends
        recvs |= g.recvs
        links.extend(g.links)
    sends.discard((m.snd, m.name))
    recvs -= roles
    links.extend((r, m.name, m.snd) for r in sorted(m.rcv))
    return Group(tuple(sorted(members)), frozenset(sends), frozenset(recvs), tuple(sorted(links)))


# lowering ----------------------------------------------------------------------

def _edge(net: Network, comp: str, idx: int) -> Edge:
    return net.components[comp].edges[idx]


def fused_parts(net: Network, g: Group):
    """Guard, reset, kernels and originator of a group, with received values substituted."""
    by_comp = dict(g.members)
    inbound: dict = {}
    for r, name, snd in g.links:
        inbound.setdefault(r, {})[name] = snd
    cache: dict = {}

    def new_value(comp, var, stack=()):
        key = (comp, var)
        if key in cache:
            return cache[key]
        if key in stack:
            raise CompositionError(f"cyclic synchronization through {var}")
        e = _edge(net, comp, by_comp[comp])
        x = e.new_value(var)
        x = x.substitute(received(comp, stack + (key,)))
        cache[key] = x
        return x

    def received(comp, stack=()):
        return {name: new_value(snd, name, stack) for name, snd in inbound.get(comp, {}).items()}

    guard, reset, kernels = TRUE, {}, {}
    originators = []
    for comp, idx in g.members:
        e = _edge(net, comp, idx)
        sub = received(comp)
        guard = guard & e.guard.substitute(sub)
        for v in e.reset:
            reset[v] = new_value(comp, v)
        kernels.update(e.kernels)
        if comp not in inbound:
            originators.append((comp, e))
    if len(originators) != 1:
        raise CompositionError(f"group {g.members} has {len(originators)} originating edges")
    return guard, reset, kernels, originators[0]


def lower(net: Network, name: str = "composed") -> HAwK:
    """Explicit product automaton of a fully resolved network."""
    residual = sorted({v for g in net.groups for _, v in g.recvs})
    if residual:
        raise CompositionError(f"residual receive labels {residual}: some inputs are never driven")
    order = sorted(net.components)
    comps = [net.components[c] for c in order]
    pos = {c: i for i, c in enumerate(order)}
    variables = sorted({v for t in comps for v in t.variables})

    locs = []
    for combo in itertools.product(*(t.locations for t in comps)):
        flow: dict = {}
        inv = TRUE
        for loc in combo:
            for v, f in loc.flow.items():
                if v in flow:
                    raise CompositionError(f"two components define the flow of {v}")
                flow[v] = f
            inv = inv & loc.invariant
        locs.append(Location(LOC_SEP.join(l.name for l in combo), any(l.urgent for l in combo),
                             dict(sorted(flow.items())), inv))

    edges, delay = [], {}
    for g in net.groups:
        guard, reset, kernels, (ocomp, oedge) = fused_parts(net, g)
        label = oedge.label
        dk = net.components[ocomp].delay_kernels.get(label)
        if dk is None:
            raise CompositionError(f"label {label} of {ocomp} has no delay kernel")
        if label in delay and delay[label] != dk:
            raise CompositionError(f"label {label} carries two delay kernels")
        delay[label] = dk
        fixed = {pos[c]: _edge(net, c, i) for c, i in g.members}
        free = [k for k in range(len(comps)) if k not in fixed]
        for combo in itertools.product(*(comps[k].locations for k in free)):
            src = [None] * len(comps)
            dst = [None] * len(comps)
            for k, loc in zip(free, combo):
                src[k] = dst[k] = loc.name
            for k, e in fixed.items():
                src[k], dst[k] = e.source, e.target
            edges.append(Edge(LOC_SEP.join(src), label, LOC_SEP.join(dst), guard.canonical(),
                              dict(sorted(reset.items())), dict(sorted(kernels.items())),
                              oedge.trigger))

    init_loc = LOC_SEP.join(t.init.location for t in comps)
    values: dict = {}
    cond = TRUE
    for t in comps:
        values.update(t.init.values)
        cond = cond & t.init.condition
    values = substitute_init(values)
    return HAwK(name=name, variables=tuple(variables), locations=tuple(locs), edges=tuple(edges),
                init=Init(init_loc, values, cond.substitute(values)), delay_kernels=delay).canonical()


def substitute_init(values: Mapping[str, Expr]) -> dict:
    """Inline inter-referencing initial values in dependency order."""
    done: dict = {}
    pending = dict(values)
    while pending:
        ready = sorted(v for v, x in pending.items() if not (x.variables() & pending.keys()))
        if not ready:
            raise CompositionError(f"cyclic initial values among {sorted(pending)}")
        for v in ready:
            done[v] = pending.pop(v).substitute(done)
    return dict(sorted(done.items()))


def resolve_all(plan: CompositionPlan, prune: bool = True, name: str = "composed") -> HAwK:
    """Resolve every mapping in order and lower to a monolithic automaton."""
    plan.check()
    templates = plan.templates
    if not templates:
        raise CompositionError("empty composition plan")
    mappings = list(plan.mappings)
    wired = {(m.snd, m.name) for m in mappings}
    for t in sorted(templates.values(), key=lambda t: t.name):
        for v in t.outputs:
            if (t.name, v) not in wired and any(v in e.send for e in t.edges):
                mappings.append(SyncMapping(v, t.name, frozenset()))
    first = sorted(templates)[0]
    net = Network.of(templates[first])
    for m in mappings:
        involved = [templates[n] for n in sorted({m.snd} | set(m.rcv))]
        net = compose_step(net, involved, m)
    rest = [templates[n] for n in sorted(templates) if n not in net.components]
    if rest:
        net = _add_components(net, rest)
    a = simplify_flows(lower(net, name))
    return prune_unreachable(a) if prune else a


def simplify_flows(a: HAwK) -> HAwK:
    """Drop rate terms that are identically zero in their location.

    Port chains such as ``power' = p1' + p2'`` over constant sources vanish,
    leaving the flows a hand-written automaton would state.
    """
    locs = []
    for l in a.locations:
        flow = {}
        for v, f in l.flow.items():
            terms = tuple(t for t in f.terms if t.kind == "value" or not rate_is_zero(l, t.var))
            g = FlowExpr(f.const, terms)
            if not g.is_zero():
                flow[v] = g
        locs.append(replace(l, flow=flow))
    return replace(a, locations=tuple(locs))


def _add_components(net: Network, ts) -> Network:
    comps = dict(net.components)
    groups = list(net.groups)
    for t in ts:
        comps[t.name] = t
        groups.extend(_singletons(t))
    return Network(comps, tuple(groups))


# pruning -----------------------------------------------------------------------

_PRUNE_CAP = 20000
_PRUNE_TOL = Fraction(1, 10**6)


def _maybe(pred: Predicate, vals: Mapping[str, Fraction]) -> bool:
    """False only if some atom is decided false by the known values."""
    for atom in pred.atoms:
        if not atom.expr.variables() <= vals.keys():
            continue
        x = atom.expr.evaluate_exact(vals)
        op = atom.op
        if op in ("<", "<=") and x > _PRUNE_TOL:
            return False
        if op in (">", ">=") and x < -_PRUNE_TOL:
            return False
        if op == "==" and abs(x) > _PRUNE_TOL:
            return False
    return True


def _exact_init(a: HAwK) -> dict | None:
    vals = {v: Fraction(0) for v in a.variables}
    pending = dict(a.init.values)
    while pending:
        ready = [v for v, x in pending.items() if not (x.variables() & pending.keys())]
        if not ready:
            return None
        for v in ready:
            vals[v] = pending.pop(v).evaluate_exact(vals)
    return vals


def reachable_edges(a: HAwK):
    """Reachable locations and edge indices, over-approximated.

    Explores (location, known values) pairs.  Every variable is known at the
    start; letting time pass in a location forgets the variables that move
    there, sampled variables are forgotten, and deterministic resets keep a
    value known when all their inputs are.
    """
    start = _exact_init(a)
    out_by_loc: dict = {}
    for i, e in enumerate(a.edges):
        out_by_loc.setdefault(e.source, []).append(i)
    locs = {l.name: l for l in a.locations}
    moving = {l.name: frozenset(v for v in a.variables if not rate_is_zero(l, v)) for l in a.locations}
    if start is not None:
        key = lambda loc, vals: (loc, tuple(sorted(vals.items())))
        seen = {key(a.init.location, start)}
        queue = deque([(a.init.location, start)])
        live_locs, live_edges = {a.init.location}, set()
        while queue and len(seen) <= _PRUNE_CAP:
            loc, vals = queue.popleft()
            if not locs[loc].urgent:
                vals = {v: x for v, x in vals.items() if v not in moving[loc]}
            for i in out_by_loc.get(loc, ()):
                e = a.edges[i]
                if not _maybe(e.guard, vals):
                    continue
                nxt = {v: x for v, x in vals.items() if v not in e.kernels and v not in e.reset}
                for v, x in e.reset.items():
                    if v not in e.kernels and x.variables() <= vals.keys():
                        nxt[v] = x.evaluate_exact(vals)
                if not _maybe(locs[e.target].invariant, nxt):
                    continue
                live_edges.add(i)
                live_locs.add(e.target)
                k = key(e.target, nxt)
                if k not in seen:
                    seen.add(k)
                    queue.append((e.target, nxt))
        if len(seen) <= _PRUNE_CAP:
            return live_locs, live_edges
    # structural fallback
    live_locs, live_edges = {a.init.location}, set()
    queue = deque([a.init.location])
    while queue:
        loc = queue.popleft()
        for i in out_by_loc.get(loc, ()):
            live_edges.add(i)
            t = a.edges[i].target
            if t not in live_locs:
                live_locs.add(t)
                queue.append(t)
    return live_locs, live_edges


def prune_unreachable(a: HAwK) -> HAwK:
    """Drop locations and edges that no run can reach.

    Labels whose delay kernel is not a Dirac are kept even when no edge uses
    them any more, so initial expiration sampling consumes the same draws.
    """
    locs, live = reachable_edges(a)
    edges = tuple(e for i, e in enumerate(a.edges) if i in live)
    used = {e.label for e in edges}
    delay = {l: d for l, d in a.delay_kernels.items() if l in used or not isinstance(d, Dirac)}
    return replace(a, locations=tuple(l for l in a.locations if l.name in locs), edges=edges,
                   delay_kernels=delay, labels=tuple(sorted(delay)))

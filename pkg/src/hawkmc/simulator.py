"""Event-driven simulation of the path semantics.

Between events all flows are constant in the current location (value terms
reference piecewise-constant variables only), so each segment is an affine
motion and every guard, invariant and property atom is affine in the elapsed
time.  Segments end at the earliest random-clock expiration, guard or
invariant boundary, or the horizon.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Mapping

from .automata import DEFAULT_TOL, HAwK, ModelError, validate_hawk
from .expr import eval_compiled
from .kernels import CompiledDist, RngStream

DEFAULT_EVENT_CAP = 10**6
INF = math.inf


class SimulationError(RuntimeError):
    """Raised on deadlock, invariant violation or a runaway event count."""


class DeadlockError(SimulationError):
    pass


class InvariantViolation(SimulationError):
    pass


class EventCapExceeded(SimulationError):
    pass


# trace records -----------------------------------------------------------------

@dataclass(frozen=True)
class ExecState:
    location: str
    valuation: Mapping[str, float]
    clocks: Mapping[str, float]
    expirations: Mapping[str, float]
    time: float


@dataclass(frozen=True)
class TimeStep:
    dt: float


@dataclass(frozen=True)
class DiscreteStep:
    label: str
    edge: int


@dataclass(frozen=True)
class ResetStep:
    assignments: tuple  # ((variable, value), ...)


@dataclass
class Trace:
    initial: ExecState
    steps: list = field(default_factory=list)
    states: list = field(default_factory=list)  # post-state of each step
    horizon: float = 0.0

    def events(self):
        """``(time, label)`` of each discrete step."""
        return [(post.time, st.label) for st, post in zip(self.steps, self.states)
                if isinstance(st, DiscreteStep)]

    def final(self) -> ExecState:
        return self.states[-1] if self.states else self.initial

    def to_csv(self, variables=None) -> str:
        """One row for the initial state and one per step.

        Header: ``time,location,<variables...>,event``; ``event`` is the label
        for discrete rows, ``reset`` for reset rows and empty for time rows.
        """
        names = list(variables or self.initial.valuation)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["time", "location", *names, "event"])

        def row(s: ExecState, ev: str):
            w.writerow([repr(s.time), s.location, *(repr(s.valuation[v]) for v in names), ev])

        row(self.initial, "")
        for st, s in zip(self.steps, self.states):
            if isinstance(st, DiscreteStep):
                row(s, st.label)
            elif isinstance(st, ResetStep):
                row(s, "reset")
            else:
                row(s, "")
        return buf.getvalue()


class Scheduler:
    """Resolves ties among simultaneously firable edges.

    ``asap`` fires the lowest edge index; ``uniform`` draws uniformly from the
    run's stream (no draw is consumed when there is a single candidate).
    """

    KINDS = ("uniform", "asap")

    def __init__(self, kind: str = "uniform"):
        if kind not in self.KINDS:
            raise ValueError(f"unknown scheduler {kind!r}; expected one of {self.KINDS}")
        self.kind = kind

    def choose(self, candidates: list, rng: RngStream) -> int:
        if len(candidates) == 1 or self.kind == "asap":
            return candidates[0]
        return candidates[rng.choice(len(candidates))]

    def __repr__(self):
        return f"Scheduler({self.kind!r})"


ASAP = Scheduler("asap")
UNIFORM = Scheduler("uniform")


def as_scheduler(s) -> Scheduler:
    return s if isinstance(s, Scheduler) else Scheduler(str(s))


# compilation -------------------------------------------------------------------

def _atoms(pred, index) -> tuple:
    out = []
    for a in pred.atoms:
        lin = tuple((index[v], float(a.expr.coeff(v))) for v in sorted(a.expr.variables()))
        out.append((a.op, float(a.expr.constant()), lin))
    return tuple(out)


def _atom_value(atom, vals) -> float:
    g = atom[1]
    for i, c in atom[2]:
        g += c * vals[i]
    return g


def _atom_slope(atom, rates) -> float:
    s = 0.0
    for i, c in atom[2]:
        s += c * rates[i]
    return s


def _holds(op, g, tol) -> bool:
    if op == "<=" or op == "<":
        return g <= tol
    if op == ">=" or op == ">":
        return g >= -tol
    return -tol <= g <= tol


def _right_holds(op, g, s, tol) -> bool:
    """Atom truth on a short open interval to the right."""
    if g > tol or g < -tol:
        return g < 0 if op in ("<", "<=") else (g > 0 if op in (">", ">=") else False)
    if s == 0.0:
        return op in ("<=", ">=", "==")
    if op in ("<", "<="):
        return s < 0
    if op in (">", ">="):
        return s > 0
    return False


class _Loc:
    __slots__ = ("name", "urgent", "inv", "const_rates", "flow_prog", "out")


class _Edge:
    __slots__ = ("index", "src", "dst", "label", "guard", "resets", "kernels", "tinv")


class CompiledHAwK:
    """Index-based form of a :class:`HAwK` used by the simulator."""

    def __init__(self, a: HAwK):
        self.hawk = a
        self.var_names = list(a.variables)
        self.index = {v: i for i, v in enumerate(self.var_names)}
        self.labels = list(a.labels)
        self.label_index = {l: i for i, l in enumerate(self.labels)}
        self.delay = [CompiledDist(a.delay_kernels[l], self.index) for l in self.labels]
        self.loc_names = [l.name for l in a.locations]
        self.loc_index = {n: i for i, n in enumerate(self.loc_names)}
        n = len(self.var_names)
        self.locs = []
        for l in a.locations:
            c = _Loc()
            c.name, c.urgent = l.name, l.urgent
            c.inv = _atoms(l.invariant, self.index)
            c.out = []
            c.const_rates, c.flow_prog = self._flow(l, n)
            self.locs.append(c)
        self.edges = []
        for k, e in enumerate(a.edges):
            ce = _Edge()
            ce.index = k
            ce.src, ce.dst = self.loc_index[e.source], self.loc_index[e.target]
            ce.label = self.label_index[e.label]
            ce.guard = _atoms(e.guard, self.index)
            ce.resets = tuple((self.index[v], x.compile(self.index)) for v, x in sorted(e.reset.items()))
            ce.kernels = tuple((self.index[v], CompiledDist(d, self.index))
                               for v, d in sorted(e.kernels.items()))
            ce.tinv = self.locs[ce.dst].inv
            self.edges.append(ce)
            self.locs[ce.src].out.append(ce)
        self.init_loc = self.loc_index[a.init.location]
        self.init_vals = [a.initial_valuation()[v] for v in self.var_names]

    def _flow(self, loc, n):
        order, seen = [], set()
        deps = {v: f.rate_vars() for v, f in loc.flow.items()}

        def visit(v):
            if v in seen:
                return
            seen.add(v)
            for w in sorted(deps.get(v, ())):
                visit(w)
            if v in loc.flow:
                order.append(v)

        for v in sorted(loc.flow):
            visit(v)
        prog = []
        dynamic = False
        for v in order:
            f = loc.flow[v]
            vt = tuple((self.index[t.var], float(t.coef)) for t in f.terms if t.kind == "value")
            rt = tuple((self.index[t.var], float(t.coef), -1 if t.scale is None else self.index[t.scale])
                       for t in f.terms if t.kind == "rate")
            dynamic = dynamic or bool(vt) or any(s >= 0 for _, _, s in rt)
            prog.append((self.index[v], float(f.const), vt, rt))
        if dynamic:
            return None, tuple(prog)
        rates = [0.0] * n
        for i, c, _, rt in prog:
            r = c
            for w, k, _ in rt:
                r += k * rates[w]
            rates[i] = r
        return rates, tuple(prog)

    def rates(self, loc: _Loc, vals) -> list:
        if loc.const_rates is not None:
            return loc.const_rates
        rates = [0.0] * len(vals)
        for i, c, vt, rt in loc.flow_prog:
            r = c
            for w, k in vt:
                r += k * vals[w]
            for w, k, s in rt:
                r += k * rates[w] * (vals[s] if s >= 0 else 1.0)
            rates[i] = r
        return rates


# the engine --------------------------------------------------------------------

class _Run:
    """Mutable cursor over one simulation."""

    __slots__ = ("loc", "vals", "clocks", "exp", "time", "events")


class Simulator:
    def __init__(self, a: HAwK, tol: float = DEFAULT_TOL, event_cap: int = DEFAULT_EVENT_CAP,
                 validate: bool = True):
        if validate:
            problems = validate_hawk(a, tol)
            if problems:
                raise ModelError("invalid automaton: " + "; ".join(map(str, problems)))
        self.a = a
        self.m = CompiledHAwK(a)
        self.tol = tol
        self.event_cap = event_cap

    # state conversion ---------------------------------------------------
    def snapshot(self, r: _Run) -> ExecState:
        m = self.m
        return ExecState(m.loc_names[r.loc], dict(zip(m.var_names, r.vals)),
                         dict(zip(m.labels, r.clocks)), dict(zip(m.labels, r.exp)), r.time)

    def _from_state(self, s: ExecState) -> _Run:
        m = self.m
        r = _Run()
        r.loc = m.loc_index[s.location]
        r.vals = [float(s.valuation[v]) for v in m.var_names]
        r.clocks = [float(s.clocks[l]) for l in m.labels]
        r.exp = [float(s.expirations[l]) for l in m.labels]
        r.time = float(s.time)
        r.events = 0
        return r

    # semantics ------------------------------------------------------------
    def _start(self, rng: RngStream) -> _Run:
        m = self.m
        r = _Run()
        r.loc = m.init_loc
        r.vals = list(m.init_vals)
        loc = m.locs[r.loc]
        for atom in loc.inv:
            if not _holds(atom[0], _atom_value(atom, r.vals), self.tol):
                raise InvariantViolation(f"initial valuation violates the invariant of {loc.name}")
        r.clocks = [0.0] * len(m.labels)
        r.exp = [d.sample(r.vals, rng) for d in m.delay]
        r.time = 0.0
        r.events = 0
        return r

    def init_state(self, rng: RngStream) -> ExecState:
        return self.snapshot(self._start(rng))

    def _enabled_now(self, e: _Edge, vals) -> bool:
        tol = self.tol
        for atom in e.guard:
            if not _holds(atom[0], _atom_value(atom, vals), tol):
                return False
        if e.tinv:
            post = self._post_discrete(e, vals)
            for atom in e.tinv:
                if not _holds(atom[0], _atom_value(atom, post), tol):
                    return False
        return True

    def _right_enabled(self, e: _Edge, vals, rates) -> bool:
        tol = self.tol
        for atom in e.guard:
            if not _right_holds(atom[0], _atom_value(atom, vals), _atom_slope(atom, rates), tol):
                return False
        return True

    def candidates(self, r: _Run) -> list:
        """Indices of edges that may fire at the current instant."""
        tol = self.tol
        out = []
        for e in self.m.locs[r.loc].out:
            if r.clocks[e.label] >= r.exp[e.label] - tol and self._enabled_now(e, r.vals):
                out.append(e.index)
        return out

    def _segment(self, r: _Run, limit: float):
        """Length of the next time step and the labels whose clocks run."""
        m, tol = self.m, self.tol
        loc = m.locs[r.loc]
        rates = m.rates(loc, r.vals)
        vals = r.vals
        dt = limit - r.time
        expiring = -1
        running = set()
        for e in loc.out:
            if e.label not in running and self._right_enabled(e, vals, rates):
                running.add(e.label)
            for atom in e.guard:
                s = _atom_slope(atom, rates)
                if s != 0.0:
                    d = -_atom_value(atom, vals) / s
                    if tol < d < dt:
                        dt = d
                        expiring = -1
        for atom in loc.inv:
            s = _atom_slope(atom, rates)
            if s != 0.0:
                d = -_atom_value(atom, vals) / s
                if tol < d < dt:
                    dt = d
                    expiring = -1
        for j in running:
            d = r.exp[j] - r.clocks[j]
            if d < dt or (d == dt and expiring >= 0 and j < expiring):
                dt = d
                expiring = j
        if dt < 0.0:
            dt = 0.0
        return dt, rates, running, expiring

    def _advance(self, r: _Run, dt, rates, running, expiring):
        if dt > 0.0:
            vals = r.vals
            for i, v in enumerate(rates):
                if v != 0.0:
                    vals[i] += v * dt
            for j in running:
                r.clocks[j] += dt
        if expiring >= 0:
            r.clocks[expiring] = r.exp[expiring]
        r.time += dt

    def _post_discrete(self, e: _Edge, vals) -> list:
        if not e.resets:
            return vals
        post = list(vals)
        for i, prog in e.resets:
            post[i] = eval_compiled(prog, vals)
        return post

    def _fire(self, r: _Run, k: int, rng: RngStream):
        """Discrete step then reset step; returns the sampled assignments."""
        m = self.m
        e = m.edges[k]
        r.vals = self._post_discrete(e, r.vals)
        r.loc = e.dst
        yield "discrete"
        assigned = []
        if e.kernels:
            vals = r.vals
            drawn = [(i, d.sample(vals, rng)) for i, d in e.kernels]
            vals = list(vals)
            for i, x in drawn:
                vals[i] = x
                assigned.append((m.var_names[i], x))
            r.vals = vals
        r.clocks[e.label] = 0.0
        r.exp[e.label] = m.delay[e.label].sample(r.vals, rng)
        tol = self.tol
        for atom in m.locs[r.loc].inv:
            if not _holds(atom[0], _atom_value(atom, r.vals), tol):
                raise InvariantViolation(f"t={r.time}: edge {k} ({e.label}) leaves the state outside "
                                         f"the invariant of {m.loc_names[r.loc]}")
        yield tuple(assigned)

    # public stepping -----------------------------------------------------
    def next_event(self, s: ExecState, horizon: float = INF):
        """``(dt, candidates)`` for the state ``s``.

        ``dt`` is zero when an edge can fire immediately.  Candidates are the
        edges firable once ``dt`` has elapsed; the list is empty when the
        horizon or a boundary without firable edges comes first.
        """
        r = self._from_state(s)
        now = self.candidates(r)
        if now:
            return 0.0, now
        if self.m.locs[r.loc].urgent:
            raise DeadlockError(f"urgent location {s.location} has no enabled edge")
        dt, rates, running, expiring = self._segment(r, horizon)
        if dt == INF:
            return INF, []
        self._advance(r, dt, rates, running, expiring)
        return dt, self.candidates(r)

    def step(self, s: ExecState, sched: Scheduler, rng: RngStream, horizon: float = INF):
        """Advance to and fire the next event; returns ``(state, steps)``."""
        r = self._from_state(s)
        steps = []
        for _ in range(2):
            cands = self.candidates(r)
            if cands:
                break
            if self.m.locs[r.loc].urgent:
                raise DeadlockError(f"t={r.time}: urgent location {self.m.loc_names[r.loc]} has no enabled edge")
            dt, rates, running, expiring = self._segment(r, horizon)
            if dt == INF:
                raise DeadlockError(f"t={r.time}: no event can ever happen in {self.m.loc_names[r.loc]}")
            self._advance(r, dt, rates, running, expiring)
            steps.append((TimeStep(dt), self.snapshot(r)))
            if r.time >= horizon:
                return self.snapshot(r), steps
        else:
            raise DeadlockError(f"t={r.time}: boundary reached with no firable edge")
        if not steps:
            steps.append((TimeStep(0.0), self.snapshot(r)))
        k = as_scheduler(sched).choose(cands, rng)
        fire = self._fire(r, k, rng)
        next(fire)
        steps.append((DiscreteStep(self.a.edges[k].label, k), self.snapshot(r)))
        steps.append((ResetStep(next(fire)), self.snapshot(r)))
        return self.snapshot(r), steps

    def simulate(self, horizon: float, sched: Scheduler | str = "uniform", rng: RngStream | None = None,
                 record: bool = True, monitor=None) -> Trace | None:
        """Run until ``horizon``.

        With ``record=False`` no trace is built; ``monitor(run, dt, rates)`` is
        then called for the initial instant (``dt=0``), for each time segment
        and after each reset step, and may return True to stop early.
        """
        if not horizon > 0:
            raise ValueError("horizon must be positive")
        horizon = float(horizon)
        sched = as_scheduler(sched)
        rng = rng if rng is not None else RngStream(0, 0)
        m, tol, cap = self.m, self.tol, self.event_cap
        r = self._start(rng)
        trace = Trace(self.snapshot(r), horizon=horizon) if record else None
        if monitor is not None and monitor(r, 0.0, None):
            return trace
        pending_time = True  # a time step must precede the next discrete step
        while True:
            cands = self.candidates(r)
            if cands:
                if record and pending_time:
                    trace.steps.append(TimeStep(0.0))
                    trace.states.append(self.snapshot(r))
                r.events += 1
                if r.events > cap:
                    raise EventCapExceeded(f"more than {cap} events before t={r.time}")
                k = sched.choose(cands, rng) if len(cands) > 1 else cands[0]
                fire = self._fire(r, k, rng)
                next(fire)
                if record:
                    trace.steps.append(DiscreteStep(m.labels[m.edges[k].label], k))
                    trace.states.append(self.snapshot(r))
                assigned = next(fire)
                if record:
                    trace.steps.append(ResetStep(assigned))
                    trace.states.append(self.snapshot(r))
                pending_time = True
                if monitor is not None and monitor(r, 0.0, None):
                    return trace
                continue
            if r.time >= horizon:
                break
            if m.locs[r.loc].urgent:
                raise DeadlockError(f"t={r.time}: urgent location {m.loc_names[r.loc]} has no enabled edge")
            dt, rates, running, expiring = self._segment(r, horizon)
            stop = monitor is not None and monitor(r, dt, rates)
            if dt == 0.0 and not pending_time:
                raise DeadlockError(f"t={r.time}: no firable edge in {m.loc_names[r.loc]} at a boundary")
            self._advance(r, dt, rates, running, expiring)
            if horizon - r.time <= tol * max(1.0, horizon) and expiring < 0:
                r.time = horizon
            if record:
                trace.steps.append(TimeStep(dt))
                trace.states.append(self.snapshot(r))
            pending_time = False
            if stop:
                return trace
            self._check_invariant(r)
        if record and pending_time:
            trace.steps.append(TimeStep(0.0))
            trace.states.append(self.snapshot(r))
        return trace

    def _check_invariant(self, r: _Run):
        for atom in self.m.locs[r.loc].inv:
            if not _holds(atom[0], _atom_value(atom, r.vals), self.tol):
                raise InvariantViolation(f"t={r.time}: invariant of {self.m.loc_names[r.loc]} violated")


# module-level conveniences -------------------------------------------------------

def init_state(a: HAwK, rng: RngStream) -> ExecState:
    return Simulator(a).init_state(rng)


def next_event(a: HAwK, s: ExecState, horizon: float = INF):
    return Simulator(a).next_event(s, horizon)


def step(a: HAwK, s: ExecState, sched, rng: RngStream):
    return Simulator(a).step(s, as_scheduler(sched), rng)


def simulate(a: HAwK, horizon: float, sched="uniform", rng: RngStream | None = None,
             event_cap: int = DEFAULT_EVENT_CAP, tol: float = DEFAULT_TOL) -> Trace:
    return Simulator(a, tol=tol, event_cap=event_cap).simulate(horizon, sched, rng)

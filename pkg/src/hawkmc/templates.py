"""Template constructors for the stochastic blocks and a few deterministic base blocks.

Each constructor takes a parameter record and an instance name.  Internal
variables, labels and locations are qualified as ``<instance>.<local>``; port
variables carry the signal names given in the parameters.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .automata import (HAwK, Init, Location, ModelError, Template, Trigger, Violation, Edge,
                       immediate_kernel, validate_hawk)
from .expr import TRUE, Atom, Expr, FlowExpr, Predicate, frac
from .kernels import Dirac, Distribution, FoldedNormal, Normal, Uniform, dirac, normal


class TemplateError(ModelError):
    pass


# parameter records ----------------------------------------------------------

@dataclass(frozen=True)
class TimerParams:
    dist: Distribution
    out: str = "out"


@dataclass(frozen=True)
class SwitchParams:
    dist1: Distribution
    dist2: Distribution
    in1: str = "in1"
    in2: str = "in2"
    out: str = "out"


@dataclass(frozen=True)
class SamplingParams:
    dist: Distribution
    inp: str = "in"
    out: str = "out"


@dataclass(frozen=True)
class ConstantFactor:
    factor: Fraction


@dataclass(frozen=True)
class InputMultiplier:
    pass


@dataclass(frozen=True)
class NoiseParams:
    mean: Fraction
    variance: Fraction
    rate: Fraction
    factor_mode: ConstantFactor | InputMultiplier = ConstantFactor(Fraction(1))
    inp: str = "in"
    out: str = "out"


@dataclass(frozen=True)
class PercentOfInput:
    rate_r: Fraction


@dataclass(frozen=True)
class ExplicitSignal:
    in2: str = "in2"


@dataclass(frozen=True)
class DiscreteAgingParams:
    dist_fail: Distribution
    dist_repair: Distribution
    max_steps: int
    repair_mode: PercentOfInput | ExplicitSignal = PercentOfInput(Fraction(0))
    step: Fraction | None = None
    inp: str = "in"
    out: str = "out"


@dataclass(frozen=True)
class ContinuousAgingParams:
    dist_pause: Distribution | None
    dist_resume: Distribution
    dist_repair: Distribution
    rate_a: Fraction
    bound: Fraction
    repair_mode: PercentOfInput | ExplicitSignal = PercentOfInput(Fraction(0))
    inp: str = "in"
    out: str = "out"


# helpers -----------------------------------------------------------------------

V = Expr.var
C = Expr.const


def _le(x, c):
    return Predicate.of(Atom.compare(x, "<=", c))


def _ge(x, c):
    return Predicate.of(Atom.compare(x, ">=", c))


def _check_delay(d: Distribution, what: str):
    if isinstance(d, Normal):
        raise TemplateError(f"{what}: plain normal delays can be negative; use foldednormal")
    if d.nonnegative_support() is False:
        raise TemplateError(f"{what}: distribution {d} has negative support")
    if not isinstance(d, (Uniform, FoldedNormal, Dirac)):
        raise TemplateError(f"{what}: unsupported distribution {d}")


def _rate(var, coef=1, scale=None):
    return (var, coef, scale) if scale else (var, coef)


def _recv(src, label, inp, reset=None, send=(), guard=TRUE, target=None):
    return Edge(src, label, target or src, guard, dict(reset or {}), {}, Trigger.IMMEDIATE,
                frozenset(send), frozenset({inp}))


def _build(name, inputs, outputs, locations, edges, init, delay) -> Template:
    return Template(name=name,
                    variables=tuple(inputs) + tuple(outputs),
                    locations=tuple(locations), edges=tuple(edges), init=init,
                    delay_kernels=dict(delay), inputs=tuple(inputs), outputs=tuple(outputs))


# stochastic blocks -------------------------------------------------------------

def mk_stochastic_timer(p: TimerParams, name: str = "timer") -> Template:
    """Output counts down at rate -1 and is redrawn from ``p.dist`` on reaching zero."""
    _check_delay(p.dist, "timer distribution")
    out = p.out
    l_init, l0 = f"{name}.l_init", f"{name}.l0"
    e_init, e_loop = f"{name}.init", f"{name}.loop"
    locs = [Location(l_init, urgent=True),
            Location(l0, flow={out: FlowExpr.constant(-1)})]
    edges = [Edge(l_init, e_init, l0, TRUE, {}, {out: p.dist}, Trigger.IMMEDIATE, frozenset({out})),
             Edge(l0, e_loop, l0, _le(V(out), 0), {}, {out: p.dist}, Trigger.CROSSING, frozenset({out}))]
    return _build(name, (), (out,), locs, edges, Init(l_init, {out: C(0)}),
                  {e_init: immediate_kernel(), e_loop: immediate_kernel()})


def mk_stochastic_switch(p: SwitchParams, name: str = "switch") -> Template:
    """Output follows ``in1`` or ``in2``; the choice flips on two random clocks."""
    _check_delay(p.dist1, "switch dist1")
    _check_delay(p.dist2, "switch dist2")
    in1, in2, out = p.in1, p.in2, p.out
    l0, l1 = f"{name}.l0", f"{name}.l1"
    s1, s2 = f"{name}.switch1", f"{name}.switch2"
    r1, r2 = f"{name}.recv_{in1}", f"{name}.recv_{in2}"
    locs = [Location(l0, flow={out: FlowExpr.build(rate=[(in1, 1)])}),
            Location(l1, flow={out: FlowExpr.build(rate=[(in2, 1)])})]
    edges = [Edge(l0, s1, l1, TRUE, {out: V(in2)}, {}, Trigger.STOCHASTIC, frozenset({out})),
             Edge(l1, s2, l0, TRUE, {out: V(in1)}, {}, Trigger.STOCHASTIC, frozenset({out})),
             _recv(l0, r1, in1, {out: V(in1)}, {out}),
             _recv(l0, r2, in2),
             _recv(l1, r1, in1),
             _recv(l1, r2, in2, {out: V(in2)}, {out})]
    return _build(name, (in1, in2), (out,), locs, edges, Init(l0, {out: V(in1)}),
                  {s1: p.dist1, s2: p.dist2})


def mk_stochastic_sampling(p: SamplingParams, name: str = "sampling") -> Template:
    """Holds the latest sample of ``in``; sample instants follow ``p.dist``."""
    _check_delay(p.dist, "sampling distribution")
    inp, out = p.inp, p.out
    l_init, l0 = f"{name}.l_init", f"{name}.l0"
    e_init, e_sample, e_recv = f"{name}.init", f"{name}.sample", f"{name}.recv_{inp}"
    locs = [Location(l_init, urgent=True), Location(l0)]
    edges = [Edge(l_init, e_init, l0, TRUE, {out: V(inp)}, {}, Trigger.IMMEDIATE, frozenset({out})),
             Edge(l0, e_sample, l0, TRUE, {out: V(inp)}, {}, Trigger.STOCHASTIC, frozenset({out})),
             _recv(l_init, e_recv, inp),
             _recv(l0, e_recv, inp)]
    return _build(name, (inp,), (out,), locs, edges, Init(l_init, {out: V(inp)}),
                  {e_init: immediate_kernel(), e_sample: p.dist})


def mk_stochastic_noise(p: NoiseParams, name: str = "noise") -> Template:
    """Adds periodically redrawn normal noise to the input signal."""
    rate = frac(p.rate)
    if rate <= 0:
        raise TemplateError(f"noise sample period must be positive, got {rate}")
    if frac(p.variance) < 0:
        raise TemplateError("noise variance must be non-negative")
    inp, out = p.inp, p.out
    noise, timer = f"{name}.noise", f"{name}.timer"
    l_init, l1, l0 = f"{name}.l_init", f"{name}.l1", f"{name}.l0"
    dist = dirac(p.mean) if frac(p.variance) == 0 else normal(p.mean, p.variance)
    if isinstance(p.factor_mode, InputMultiplier):
        noisy = V(inp) + V(inp) * V(noise)
        out_flow = FlowExpr.build(rate=[(inp, 1), (inp, 1, noise)])
    else:
        f = frac(p.factor_mode.factor)
        noisy = V(inp) + f * V(noise)
        out_flow = FlowExpr.build(rate=[(inp, 1)])
    e0, e1, e3 = f"{name}.draw_init", f"{name}.add", f"{name}.tick"
    er = f"{name}.recv_{inp}"
    locs = [Location(l_init, urgent=True), Location(l1, urgent=True),
            Location(l0, flow={out: out_flow, timer: FlowExpr.constant(1)})]
    edges = [Edge(l_init, e0, l1, TRUE, {}, {noise: dist}, Trigger.IMMEDIATE),
             Edge(l1, e1, l0, TRUE, {out: noisy}, {}, Trigger.IMMEDIATE, frozenset({out})),
             _recv(l0, er, inp, {out: noisy}, {out}),
             Edge(l0, e3, l1, _ge(V(timer), rate), {timer: C(0)}, {noise: dist}, Trigger.CROSSING),
             _recv(l_init, er, inp),
             _recv(l1, er, inp)]
    return _build(name, (inp,), (out, noise, timer), locs, edges,
                  Init(l_init, {out: C(0), timer: C(0), noise: C(0)}),
                  {e0: immediate_kernel(), e1: immediate_kernel(), e3: immediate_kernel()})


def _repair_value(mode, inp):
    if isinstance(mode, ExplicitSignal):
        return V(mode.in2)
    return frac(mode.rate_r) * V(inp)


def _repair_flow(mode, inp):
    if isinstance(mode, ExplicitSignal):
        return FlowExpr.build(rate=[(mode.in2, 1)])
    return FlowExpr.build(rate=[(inp, frac(mode.rate_r))])


def _repair_inputs(mode):
    return (mode.in2,) if isinstance(mode, ExplicitSignal) else ()


def mk_discrete_aging(p: DiscreteAgingParams, name: str = "aging") -> Template:
    """Stepwise multiplicative degradation, then a repair phase.

    Each ``fail`` expiration raises ``age`` by one and sets
    ``out = in * (1 - age * step)``; the expiration after ``max_steps``
    degradations starts the repair.
    """
    if int(p.max_steps) != p.max_steps or p.max_steps <= 0:
        raise TemplateError(f"max_steps must be a positive integer, got {p.max_steps}")
    _check_delay(p.dist_fail, "aging dist_fail")
    _check_delay(p.dist_repair, "aging dist_repair")
    n = int(p.max_steps)
    step = frac(p.step) if p.step is not None else Fraction(1, n)
    inp, out = p.inp, p.out
    age, clock = f"{name}.age", f"{name}.clock"
    aging, repairing = f"{name}.aging", f"{name}.repairing"
    fail, repair = f"{name}.fail", f"{name}.repair"
    extra = _repair_inputs(p.repair_mode)
    degraded = V(inp) * (1 - step * V(age))
    locs = [Location(aging, flow={out: FlowExpr.build(rate=[(inp, 1), (inp, -step, age)]),
                                  clock: FlowExpr.constant(1)}),
            Location(repairing, flow={out: _repair_flow(p.repair_mode, inp),
                                      clock: FlowExpr.constant(1)})]
    edges = [Edge(aging, fail, aging, _le(V(age), n - 1),
                  {age: V(age) + 1, out: V(inp) * (1 - step * (V(age) + 1))}, {},
                  Trigger.STOCHASTIC, frozenset({out})),
             Edge(aging, fail, repairing, _ge(V(age), n),
                  {out: _repair_value(p.repair_mode, inp), clock: C(0)}, {},
                  Trigger.STOCHASTIC, frozenset({out})),
             Edge(repairing, repair, aging, TRUE, {out: V(inp), age: C(0), clock: C(0)}, {},
                  Trigger.STOCHASTIC, frozenset({out}))]
    r_in = f"{name}.recv_{inp}"
    edges.append(_recv(aging, r_in, inp, {out: degraded}, {out}))
    if extra:
        edges.append(_recv(repairing, r_in, inp))
        r2 = f"{name}.recv_{extra[0]}"
        edges.append(_recv(aging, r2, extra[0]))
        edges.append(_recv(repairing, r2, extra[0], {out: V(extra[0])}, {out}))
    else:
        edges.append(_recv(repairing, r_in, inp, {out: _repair_value(p.repair_mode, inp)}, {out}))
    return _build(name, (inp,) + extra, (out, age, clock), locs, edges,
                  Init(aging, {out: V(inp), age: C(0), clock: C(0)}),
                  {fail: p.dist_fail, repair: p.dist_repair})


def mk_continuous_aging(p: ContinuousAgingParams, name: str = "aging") -> Template:
    """Linear degradation ``out = in * age`` with pause/resume and repair.

    ``age`` falls at ``rate_a`` while aging and is frozen while paused.  When
    it reaches ``bound`` the block enters repair; the repair edge restores
    ``age = 1``.  ``dist_pause=None`` removes the pause edge.  Because ``out``
    tracks ``in * age`` through its flow, ``in`` must be piecewise-constant.
    """
    rate_a, bound = frac(p.rate_a), frac(p.bound)
    if rate_a <= 0:
        raise TemplateError(f"aging rate must be positive, got {rate_a}")
    if not 0 <= bound < 1:
        raise TemplateError(f"lower bound must lie in [0, 1), got {bound}")
    if p.dist_pause is not None:
        _check_delay(p.dist_pause, "aging dist_pause")
    _check_delay(p.dist_resume, "aging dist_resume")
    _check_delay(p.dist_repair, "aging dist_repair")
    inp, out = p.inp, p.out
    age, clock = f"{name}.age", f"{name}.clock"
    aging, paused, repairing = f"{name}.aging", f"{name}.paused", f"{name}.repairing"
    l_pause, l_resume = f"{name}.pause", f"{name}.resume"
    l_wear, l_repair = f"{name}.wear_out", f"{name}.repair"
    extra = _repair_inputs(p.repair_mode)
    scaled = V(inp) * V(age)
    locs = [Location(aging, flow={age: FlowExpr.constant(-rate_a),
                                  out: FlowExpr.build(value={inp: -rate_a}),
                                  clock: FlowExpr.constant(1)}),
            Location(paused, flow={clock: FlowExpr.constant(1)}),
            Location(repairing, flow={out: _repair_flow(p.repair_mode, inp),
                                      clock: FlowExpr.constant(1)})]
    edges = []
    delay = {l_resume: p.dist_resume, l_wear: immediate_kernel(), l_repair: p.dist_repair}
    if p.dist_pause is not None:
        edges.append(Edge(aging, l_pause, paused, TRUE, {}, {}, Trigger.STOCHASTIC))
        delay[l_pause] = p.dist_pause
    edges += [Edge(paused, l_resume, aging, TRUE, {}, {}, Trigger.STOCHASTIC),
              Edge(aging, l_wear, repairing, _le(V(age), bound),
                   {out: _repair_value(p.repair_mode, inp)}, {}, Trigger.CROSSING, frozenset({out})),
              Edge(repairing, l_repair, aging, TRUE, {age: C(1), out: V(inp), clock: C(0)}, {},
                   Trigger.STOCHASTIC, frozenset({out}))]
    r_in = f"{name}.recv_{inp}"
    edges.append(_recv(aging, r_in, inp, {out: scaled}, {out}))
    edges.append(_recv(paused, r_in, inp, {out: scaled}, {out}))
    if extra:
        edges.append(_recv(repairing, r_in, inp))
        r2 = f"{name}.recv_{extra[0]}"
        for loc in (aging, paused):
            edges.append(_recv(loc, r2, extra[0]))
        edges.append(_recv(repairing, r2, extra[0], {out: V(extra[0])}, {out}))
    else:
        edges.append(_recv(repairing, r_in, inp, {out: _repair_value(p.repair_mode, inp)}, {out}))
    return _build(name, (inp,) + extra, (out, age, clock), locs, edges,
                  Init(aging, {out: V(inp) * V(age), age: C(1), clock: C(0)}), delay)


# base blocks -------------------------------------------------------------------

def mk_constant(value, out: str = "out", name: str = "const") -> Template:
    loc = Location(f"{name}.l0")
    return _build(name, (), (out,), [loc], [], Init(loc.name, {out: C(value)}), {})


def mk_gain(k, inp: str = "in", out: str = "out", name: str = "gain") -> Template:
    k = frac(k)
    loc = f"{name}.l0"
    return _build(name, (inp,), (out,),
                  [Location(loc, flow={out: FlowExpr.build(rate=[(inp, k)])})],
                  [_recv(loc, f"{name}.recv_{inp}", inp, {out: k * V(inp)}, {out})],
                  Init(loc, {out: k * V(inp)}), {})


def mk_sum(weights: Mapping[str, object], out: str = "out", name: str = "sum") -> Template:
    if not weights:
        raise TemplateError("sum block needs at least one input")
    w = {v: frac(c) for v, c in weights.items()}
    total = sum((c * V(v) for v, c in w.items()), Expr())
    loc = f"{name}.l0"
    edges = [_recv(loc, f"{name}.recv_{v}", v, {out: total}, {out}) for v in w]
    return _build(name, tuple(w), (out,),
                  [Location(loc, flow={out: FlowExpr.build(rate=[(v, c) for v, c in w.items()])})],
                  edges, Init(loc, {out: total}), {})


def mk_integrator(init=0, inp: str = "in", out: str = "out", name: str = "integrator") -> Template:
    """``out' = in``; the input must be piecewise-constant."""
    loc = f"{name}.l0"
    return _build(name, (inp,), (out,),
                  [Location(loc, flow={out: FlowExpr.build(value={inp: 1})})],
                  [_recv(loc, f"{name}.recv_{inp}", inp)],
                  Init(loc, {out: C(init)}), {})


def mk_relay(on_threshold, off_threshold, on_value, off_value, initial: str = "off",
             inp: str = "in", out: str = "out", name: str = "relay") -> Template:
    """Two-mode hysteresis: switch on at ``in >= on_threshold``, off at ``in <= off_threshold``.

    Continuous crossings fire guard-crossing edges.  Discrete input jumps are
    handled by receive edges whose guards see the received value.
    """
    on_t, off_t = frac(on_threshold), frac(off_threshold)
    if off_t > on_t:
        raise TemplateError(f"relay off threshold {off_t} exceeds on threshold {on_t}")
    if initial not in ("on", "off"):
        raise TemplateError(f"relay initial state must be 'on' or 'off', got {initial!r}")
    on_v, off_v = C(on_value), C(off_value)
    l_on, l_off = f"{name}.on", f"{name}.off"
    up, down, rcv = f"{name}.switch_on", f"{name}.switch_off", f"{name}.recv_{inp}"
    x = V(inp)
    locs = [Location(l_off), Location(l_on)]
    edges = [Edge(l_off, up, l_on, _ge(x, on_t), {out: on_v}, {}, Trigger.CROSSING, frozenset({out})),
             Edge(l_on, down, l_off, _le(x, off_t), {out: off_v}, {}, Trigger.CROSSING, frozenset({out})),
             _recv(l_off, rcv, inp, {out: on_v}, {out}, _ge(x, on_t), l_on),
             _recv(l_off, rcv, inp, guard=Predicate.of(Atom.compare(x, "<", on_t))),
             _recv(l_on, rcv, inp, {out: off_v}, {out}, _le(x, off_t), l_off),
             _recv(l_on, rcv, inp, guard=Predicate.of(Atom.compare(x, ">", off_t)))]
    start = l_on if initial == "on" else l_off
    return _build(name, (inp,), (out,), locs, edges,
                  Init(start, {out: on_v if initial == "on" else off_v}),
                  {up: immediate_kernel(), down: immediate_kernel()})


BASE_BLOCKS = {"constant": mk_constant, "gain": mk_gain, "sum": mk_sum,
               "integrator": mk_integrator, "relay": mk_relay}


def mk_base_block(kind: str, name: str, **params) -> Template:
    try:
        ctor = BASE_BLOCKS[kind.lower()]
    except KeyError:
        raise TemplateError(f"unknown base block {kind!r}") from None
    try:
        return ctor(name=name, **params)
    except TypeError as exc:
        raise TemplateError(f"bad parameters for {kind} block {name!r}: {exc}") from None


# template-level checks ------------------------------------------------------

def validate_template(t: Template) -> list:
    found = [v for v in validate_hawk(t)
             if not (v.kind == "missing-delay-kernel" and _recv_only_label(t, v))]
    ins, outs = set(t.inputs), set(t.outputs)
    if ins & outs:
        found.append(Violation("port-overlap", f"{sorted(ins & outs)} are both input and output"))
    for i, e in enumerate(t.edges):
        where = f"edge {i} ({e.source} -{e.label}-> {e.target})"
        if not e.send <= outs:
            found.append(Violation("bad-send", f"{where} sends non-outputs {sorted(e.send - outs)}"))
        if not e.recv <= ins:
            found.append(Violation("bad-receive", f"{where} receives non-inputs {sorted(e.recv - ins)}"))
        if not set(e.kernels) <= outs or not set(e.reset) <= outs:
            found.append(Violation("input-write", f"{where} assigns an input variable"))
        if e.recv and e.label in t.delay_kernels:
            found.append(Violation("receive-delay", f"{where} receives but its label has a delay kernel"))
    for loc in t.locations:
        if not set(loc.flow) <= outs:
            found.append(Violation("input-flow", f"location {loc.name} defines flows for inputs"))
    if not set(t.init.values) <= outs:
        found.append(Violation("input-init", "initial values given for input variables"))
    return found


def _recv_only_label(t: Template, v: Violation) -> bool:
    lab = v.message.split()[1]
    return all(e.recv for e in t.edges if e.label == lab)

import itertools
import json
import random

import pytest

from hawkmc import Expr, CompositionError, CompositionPlan, RngStream, SyncMapping, fixtures, resolve_all, to_json
from hawkmc.automata import Template, Trigger, predicates_overlap, validate_hawk
from hawkmc.expr import TRUE, Atom, Predicate
from hawkmc.composer import compose_step, lower, prune_unreachable
from hawkmc.dsl import parse_automaton, parse_model
from hawkmc.kernels import Dirac, dirac, uniform
from hawkmc.simulator import Simulator
from hawkmc.templates import (ContinuousAgingParams, SamplingParams, SwitchParams, TimerParams,
                              mk_constant, mk_continuous_aging, mk_gain, mk_stochastic_sampling,
                              mk_stochastic_switch, mk_stochastic_timer)
from models import build


def plan_of(*templates, mappings=()):
    return CompositionPlan({t.name: t for t in templates}, list(mappings))


def test_single_template_without_mappings_is_unchanged():
    t = mk_constant(3, "k", "src")
    a = resolve_all(plan_of(t), name="src")
    assert a.location_names() == t.location_names()
    assert a.edges == () and a.initial_valuation() == {"k": 3}


def test_unconnected_timer_keeps_its_own_structure():
    t = mk_stochastic_timer(TimerParams(uniform(1, 2), "x"), "clk")
    a = resolve_all(plan_of(t), prune=False)
    assert sorted(a.location_names()) == sorted(t.location_names())
    assert sorted((e.source, e.label, e.target) for e in a.edges) == \
        sorted((e.source, e.label, e.target) for e in t.edges)
    assert all(e.sync_free() for e in a.edges)


def test_product_is_bounded_by_the_cartesian_product():
    sw = mk_stochastic_switch(SwitchParams(uniform(1, 2), uniform(1, 2), "a", "b", "x"), "sw")
    ag = mk_continuous_aging(ContinuousAgingParams(uniform(1, 2), uniform(1, 2), uniform(1, 2),
                                                   0.1, 0.5, inp="x", out="y"), "ag")
    src_a, src_b = mk_constant(1, "a", "ka"), mk_constant(2, "b", "kb")
    plan = plan_of(sw, ag, src_a, src_b, mappings=[
        SyncMapping("a", "ka", frozenset({"sw"})), SyncMapping("b", "kb", frozenset({"sw"})),
        SyncMapping("x", "sw", frozenset({"ag"}))])
    raw = resolve_all(plan, prune=False)
    assert len(raw.locations) <= len(sw.locations) * len(ag.locations) == 6
    pruned = resolve_all(plan)
    assert len(pruned.locations) <= len(raw.locations)
    assert validate_hawk(pruned) == []


def test_synchronized_edge_takes_sender_delay_and_substituted_receiver_reset():
    # sampler (sends y := x) feeding a gain (receives y, sets z := 3 * y)
    a = build("""model m
block constant k(value=2)
block sampling s(dist=uniform(2, 4))
block gain g(k=3)
wire x: k.out -> s.in
wire y: s.out -> g.in
wire z: g.out
""")
    (sample,) = [e for e in a.edges if e.label == "s.sample"]
    assert a.delay_kernels["s.sample"] == uniform(2, 4)
    assert {v: str(x) for v, x in sample.reset.items()} == {"y": "x", "z": "3*x"}
    assert sample.trigger is Trigger.STOCHASTIC
    assert all(e.sync_free() for e in a.edges)
    assert a.initial_valuation() == {"x": 2, "y": 2, "z": 6}


def test_timer_into_sampler_fuses_the_timer_kernel():
    a = build("""model m
block timer clk(dist=uniform(1, 3))
block sampling s(dist=uniform(2, 4))
wire x: clk.out -> s.in
wire y: s.out
""")
    loops = [e for e in a.edges if e.label == "clk.loop"]
    assert loops and all(e.kernels == {"x": uniform(1, 3)} for e in loops)
    assert all(e.reset_kernel("y") == Dirac(Expr.var("y")) for e in loops)


def test_dirac_fill_in_for_untouched_variables():
    a = fixtures.load("energy")
    for (i, v), d in a.reset_kernels().items():
        if v not in a.edges[i].kernels:
            assert isinstance(d, Dirac) and d.point.variables() == {v}


def test_temperature_sampling_kernels():
    a = fixtures.load("temperature")
    assert a.delay_kernels["sensor.sample"] == uniform(10, 20)
    assert {e.label for e in a.edges if e.trigger is Trigger.STOCHASTIC} == {"sensor.sample"}


def test_energy_has_four_reachable_locations():
    a = fixtures.load("energy")
    assert len(a.locations) == 4
    assert "add.l0|detect.on|high1.l0|high2.l0|low1.l0|low2.l0|meter.l0|timer.l0|unit1.l1|unit2.l1" \
        in a.location_names()


@pytest.mark.parametrize("name", ["temperature", "energy"])
def test_unpruned_product_is_at_least_as_large(name):
    pruned, raw = fixtures.load(name), fixtures.load(name, prune=False)
    assert len(raw.locations) >= len(pruned.locations)
    assert len(raw.edges) >= len(pruned.edges)


def test_island_location_is_pruned():
    a = parse_automaton("""automaton t
var x
label a delay uniform(1, 2)
loc l0
loc island
edge island -> l0 label a
edge l0 -> l0 label a
init l0
""")
    p = prune_unreachable(a)
    assert p.location_names() == ("l0",)
    assert len(p.edges) == 1


@pytest.mark.parametrize("name", ["temperature", "energy"])
def test_pruning_preserves_traces(name):
    pruned, raw = fixtures.load(name), fixtures.load(name, prune=False)
    sched = fixtures.fixture(name).scheduler
    sp, sr = Simulator(pruned), Simulator(raw)
    for seed in range(100):
        tp = sp.simulate(100, sched, RngStream(seed, 0))
        tr = sr.simulate(100, sched, RngStream(seed, 0))
        assert tp.events() == tr.events()
        fp, fr = tp.final(), tr.final()
        assert (fp.location, fp.valuation, fp.time) == (fr.location, fr.valuation, fr.time)
        # pruning may drop labels that never occur; shared clocks agree
        assert all(fr.clocks[lab] == c for lab, c in fp.clocks.items())


def canonical_json(a):
    obj = json.loads(to_json(a))
    obj.pop("name")
    return obj


@pytest.mark.parametrize("name", ["temperature", "energy"])
def test_resolution_order_independence(name):
    m = parse_model(fixtures.read_text(fixtures.fixture(name).model))
    plan = m.plan()
    ref = canonical_json(resolve_all(plan))
    orders = list(itertools.permutations(plan.mappings))
    for order in random.Random(0).sample(orders, min(12, len(orders))):
        got = resolve_all(CompositionPlan(plan.templates, list(order)))
        assert canonical_json(got) == ref


_NEGATE = {"<": [">="], "<=": [">"], ">": ["<="], ">=": ["<"], "==": ["<", ">"]}


def entails(p, q) -> bool:
    """``p`` implies ``q``: no atom of ``q`` can fail where ``p`` holds."""
    for atom in q.atoms:
        for op in _NEGATE[atom.op]:
            if predicates_overlap(p, Predicate.of(Atom(atom.expr, op))):
                return False
    return True


def test_guard_conjunction_entails_participant_guards():
    m = parse_model(fixtures.read_text("temperature.blk"))
    relay = m.plan().templates["ctrl"]
    temp = Expr.var("temp")
    # the sampler sends sensed := temp, so the relay sees temp in its receive guards
    relay_guards = [e.guard.substitute({"sensed": temp}) for e in relay.edges if e.recv]
    a = fixtures.load("temperature", prune=False)
    fused = [e for e in a.edges if e.label in ("sensor.sample", "sensor.init")]
    assert fused
    for e in fused:
        assert any(entails(e.guard, g) for g in relay_guards)
    assert entails(Predicate.of(Atom.compare(temp, ">=", 22)), Predicate.of(Atom.compare(temp, ">", 21.5)))
    assert not entails(TRUE, Predicate.of(Atom.compare(temp, ">", 21.5)))


def test_kernel_conservation():
    m = parse_model(fixtures.read_text("energy.blk"))
    plan = m.plan()
    a = m.compose()
    sources = {}
    for t in plan.templates.values():
        for lab, d in t.delay_kernels.items():
            sources.setdefault(lab, []).append(d)
    for lab, d in a.delay_kernels.items():
        assert sources[lab] == [d]


def test_missing_receiving_edge_is_reported():
    recv = parse_automaton("""automaton r
input x
output y
loc a
loc b
label go delay uniform(1, 2)
edge a -> b label go
edge a -> a label rx recv x
init a
""", validate=False)
    src = mk_constant(1, "x", "src")
    clk = mk_stochastic_timer(TimerParams(uniform(1, 2), "x"), "clk")
    with pytest.raises(CompositionError, match="cannot receive in location b"):
        resolve_all(plan_of(clk, recv, mappings=[SyncMapping("x", "clk", frozenset({"r"}))]))
    assert isinstance(recv, Template) and src.outputs == ("x",)


def test_plan_check_errors():
    k = mk_constant(1, "x", "k")
    g = mk_gain(2, "x", "y", "g")
    with pytest.raises(CompositionError, match="not driven"):
        plan_of(k, g).check()
    with pytest.raises(CompositionError, match="unknown sender"):
        plan_of(k, g, mappings=[SyncMapping("x", "nobody", frozenset({"g"}))]).check()
    with pytest.raises(CompositionError, match="own output"):
        plan_of(k, g, mappings=[SyncMapping("y", "g", frozenset({"g"}))]).check()
    with pytest.raises(CompositionError, match="driven twice"):
        plan_of(k, g, mappings=[SyncMapping("x", "k", frozenset({"g"})),
                                SyncMapping("x", "k", frozenset({"g"}))]).check()
    k2 = mk_constant(5, "x", "k2")
    with pytest.raises(CompositionError, match="produced by both"):
        plan_of(k, k2).check()


def test_compose_step_rejects_unknown_components():
    k = mk_constant(1, "x", "k")
    with pytest.raises(CompositionError, match="not part of the network"):
        compose_step(k, [], SyncMapping("x", "k", frozenset({"g"})))


def test_compose_step_then_lower_matches_resolve_all():
    s = mk_stochastic_sampling(SamplingParams(dirac(1), "x", "y"), "s")
    k = mk_constant(2, "x", "k")
    net = compose_step(k, [s], SyncMapping("x", "k", frozenset({"s"})))
    net = compose_step(net, [], SyncMapping("y", "s"))
    direct = resolve_all(plan_of(k, s, mappings=[SyncMapping("x", "k", frozenset({"s"}))]), prune=False)
    assert canonical_json(lower(net)) == canonical_json(direct)

from fractions import Fraction

import pytest

from hawkmc import RngStream, simulate, to_json
from hawkmc.automata import Trigger
from hawkmc.kernels import dirac, folded_normal, normal, uniform
from hawkmc.simulator import DiscreteStep
from hawkmc.templates import (ConstantFactor, ContinuousAgingParams, DiscreteAgingParams, ExplicitSignal,
                              InputMultiplier, NoiseParams, PercentOfInput, SamplingParams, SwitchParams,
                              TemplateError, TimerParams, mk_base_block, mk_constant, mk_continuous_aging,
                              mk_discrete_aging, mk_gain, mk_integrator, mk_relay, mk_stochastic_noise,
                              mk_stochastic_sampling, mk_stochastic_switch, mk_stochastic_timer, mk_sum,
                              validate_template)
from models import build


def all_templates():
    half = Fraction(1, 2)
    return {
        "timer": mk_stochastic_timer(TimerParams(uniform(10, 20))),
        "timer_fn": mk_stochastic_timer(TimerParams(folded_normal(2))),
        "switch": mk_stochastic_switch(SwitchParams(uniform(1, 2), dirac(3))),
        "sampling": mk_stochastic_sampling(SamplingParams(uniform(10, 20))),
        "noise": mk_stochastic_noise(NoiseParams(Fraction(0), Fraction(1), Fraction(2))),
        "noise_mul": mk_stochastic_noise(NoiseParams(Fraction(0), Fraction(1), Fraction(2), InputMultiplier())),
        "daging": mk_discrete_aging(DiscreteAgingParams(uniform(1, 2), uniform(1, 2), 3)),
        "daging_sig": mk_discrete_aging(DiscreteAgingParams(uniform(1, 2), uniform(1, 2), 3, ExplicitSignal())),
        "caging": mk_continuous_aging(ContinuousAgingParams(uniform(1, 2), uniform(1, 2), uniform(1, 2),
                                                            Fraction(1, 10), half)),
        "caging_sig": mk_continuous_aging(ContinuousAgingParams(None, uniform(1, 2), uniform(1, 2),
                                                                Fraction(1, 10), half, ExplicitSignal())),
        "constant": mk_constant(3),
        "gain": mk_gain(2),
        "sum": mk_sum({"a": 1, "b": -1}),
        "integrator": mk_integrator(0),
        "relay": mk_relay(22, 20, 1, 0),
    }


@pytest.mark.parametrize("name", sorted(all_templates()))
def test_every_template_validates(name):
    assert validate_template(all_templates()[name]) == []


@pytest.mark.parametrize("name", sorted(all_templates()))
def test_structure_is_deterministic_in_parameters(name):
    assert to_json(all_templates()[name]) == to_json(all_templates()[name])


def test_timer_structure():
    t = mk_stochastic_timer(TimerParams(uniform(10, 20)), "clk")
    assert len(t.locations) == 2 and len(t.edges) == 2
    assert t.outputs == ("out",) and t.inputs == ()
    assert t.location("clk.l_init").urgent
    assert t.init.location == "clk.l_init"


def test_switch_structure_and_initial_output():
    t = mk_stochastic_switch(SwitchParams(uniform(1, 2), uniform(1, 2)), "sw")
    stochastic = [e for e in t.edges if e.trigger is Trigger.STOCHASTIC]
    loops = [e for e in t.edges if e.recv and e.source == e.target]
    assert len(t.locations) == 2 and len(stochastic) == 2 and len(loops) == 4
    assert str(t.init.values["out"]) == "in1"


def test_sampling_structure():
    t = mk_stochastic_sampling(SamplingParams(uniform(10, 20)), "s")
    assert [l.urgent for l in t.locations] == [True, False]
    assert [e.label for e in t.edges if e.trigger is Trigger.STOCHASTIC] == ["s.sample"]
    assert t.delay_kernels["s.sample"] == uniform(10, 20)


@pytest.mark.parametrize("bad", [normal(1, 1), uniform(-1, 2)], ids=str)
def test_timer_rejects_possibly_negative_delays(bad):
    with pytest.raises(TemplateError):
        mk_stochastic_timer(TimerParams(bad))


def test_parameter_errors():
    with pytest.raises(TemplateError):
        mk_discrete_aging(DiscreteAgingParams(dirac(1), dirac(1), 0))
    with pytest.raises(TemplateError):
        mk_continuous_aging(ContinuousAgingParams(None, dirac(1), dirac(1), Fraction(0), Fraction(1, 2)))
    with pytest.raises(TemplateError):
        mk_stochastic_noise(NoiseParams(Fraction(0), Fraction(1), Fraction(0)))
    with pytest.raises(TemplateError):
        mk_relay(20, 22, 1, 0)
    with pytest.raises(TemplateError):
        mk_base_block("lookup", "x")
    with pytest.raises(TemplateError):
        mk_base_block("gain", "g", bogus=1)


def test_base_block_dispatch():
    assert to_json(mk_base_block("Gain", "g", k=2)) == to_json(mk_gain(2, name="g"))


# deterministic behaviour, read off simulated traces --------------------------------

def values_at_events(tr, var):
    return [(round(s.time, 9), st.label, s.valuation[var])
            for st, s in zip(tr.steps, tr.states) if isinstance(st, DiscreteStep)]


def value_at(tr, var, t):
    """Value of ``var`` just before time ``t`` on the recorded path."""
    prev = tr.initial
    for s in tr.states:
        if s.time >= t:
            if s.time == prev.time:
                return prev.valuation[var]
            frac_ = (t - prev.time) / (s.time - prev.time)
            return prev.valuation[var] + frac_ * (s.valuation[var] - prev.valuation[var])
        prev = s
    return prev.valuation[var]


def test_dirac_timer_is_a_sawtooth():
    a = build("model m\nblock timer clk(dist=dirac(5))\nwire t: clk.out\n")
    tr = simulate(a, 12, "asap", RngStream(0))
    loops = [t for t, lab in tr.events() if lab == "clk.loop"]
    assert loops == [5.0, 10.0]
    assert tr.final().time == 12.0
    assert value_at(tr, "t", 2.5) == pytest.approx(2.5)
    assert tr.final().valuation["t"] == pytest.approx(3)


def test_dirac_switch_alternates():
    a = build("""model m
block constant zero(value=0)
block constant one(value=1)
block switch sw(dist1=dirac(2), dist2=dirac(3))
wire a: zero.out -> sw.in1
wire b: one.out -> sw.in2
wire y: sw.out
""")
    tr = simulate(a, 10, "asap", RngStream(0))
    ev = values_at_events(tr, "y")
    assert [(t, y) for t, _, y in ev] == [(2, 1), (5, 0), (7, 1), (10, 0)]
    assert tr.initial.valuation["y"] == 0


def test_dirac_sampling_of_a_ramp_is_a_staircase():
    a = build("""model m
block constant unit(value=1)
block integrator ramp(init=0)
block sampling hold(dist=dirac(1))
wire c: unit.out -> ramp.in
wire x: ramp.out -> hold.in
wire y: hold.out
""")
    tr = simulate(a, 5.5, "asap", RngStream(0))
    samples = [(t, y) for t, lab, y in values_at_events(tr, "y") if lab == "hold.sample"]
    assert samples == [(k, pytest.approx(k)) for k in range(1, 6)]
    assert value_at(tr, "y", 5.4) == pytest.approx(5)


def test_noise_with_dirac_noise_adds_a_constant_offset():
    a = build("""model m
block constant unit(value=1)
block integrator ramp(init=0)
block noise n(mean=0.5, variance=0, rate=2, factor=3)
wire c: unit.out -> ramp.in
wire x: ramp.out -> n.in
wire y: n.out
""")
    tr = simulate(a, 9, "asap", RngStream(0))
    working = [s for s in tr.states if s.location.startswith("n.l0")]
    assert working[0].time == 0
    for s in working:
        assert s.valuation["y"] == pytest.approx(s.valuation["x"] + 1.5)
    ticks = [t for t, lab in tr.events() if lab == "n.tick"]
    assert ticks == pytest.approx([2, 4, 6, 8])


def test_discrete_aging_dirac_schedule():
    a = build("""model m
block constant src(value=100)
block discrete_aging wear(fail=dirac(1), repair=dirac(2), max_steps=2)
wire x: src.out -> wear.in
wire y: wear.out
""")
    tr = simulate(a, 5.5, "asap", RngStream(0))
    assert values_at_events(tr, "y") == [(1, "wear.fail", 50), (2, "wear.fail", 0),
                                         (3, "wear.fail", 0), (5, "wear.repair", 100)]


def test_discrete_aging_explicit_signal_while_repairing():
    a = build("""model m
block constant src(value=100)
block constant backup(value=7)
block discrete_aging wear(fail=dirac(1), repair=dirac(2), max_steps=2, repair_mode=signal)
wire x: src.out -> wear.in
wire b: backup.out -> wear.in2
wire y: wear.out
""")
    tr = simulate(a, 4, "asap", RngStream(0))
    repairing = [s for s in tr.states if s.location.endswith("wear.repairing")]
    assert repairing and all(s.valuation["y"] == 7 for s in repairing)


def test_continuous_aging_without_pause_repairs_at_t5():
    a = build("""model m
block constant src(value=1)
block continuous_aging wear(resume=dirac(1), repair=dirac(2), rate=0.1, bound=0.5)
wire x: src.out -> wear.in
wire y: wear.out
""")
    tr = simulate(a, 8, "asap", RngStream(0))
    assert tr.events() == [(pytest.approx(5), "wear.wear_out"), (pytest.approx(7), "wear.repair")]
    assert value_at(tr, "y", 4.999999) == pytest.approx(0.5, abs=1e-6)


def test_constant_and_integrator():
    a = build("""model m
block constant three(value=3)
block integrator clock(init=0)
block constant unit(value=1)
wire k: three.out
wire c: unit.out -> clock.in
wire t: clock.out
""")
    tr = simulate(a, 7, "asap", RngStream(0))
    assert all(s.valuation["k"] == 3 for s in tr.states)
    assert tr.final().valuation["t"] == pytest.approx(7)


def test_relay_hysteresis_on_a_triangle_wave():
    a = build("""model m
block integrator plant(init=21)
block relay r(on=22, off=20, on_value=-1, off_value=1)
wire x: plant.out -> r.in
wire u: r.out -> plant.in
""")
    tr = simulate(a, 10, "asap", RngStream(0))
    ev = values_at_events(tr, "x")
    assert [lab for _, lab, _ in ev] == ["r.switch_on", "r.switch_off"] * 2 + ["r.switch_on"]
    for _, lab, x in ev:
        assert x == pytest.approx(22 if lab == "r.switch_on" else 20)

import pytest
from hypothesis import given, strategies as st

from hawkmc import RngStream, fixtures, simulate, to_json
from hawkmc.automata import Trigger
from hawkmc.dsl import (DoubleDriveError, ParseError, ResolveError, ValidationError, parse_automaton, parse_model,
                        parse_props, print_canonical)
from hawkmc.kernels import dirac, folded_normal, uniform
from hawkmc.tracecheck import check_trace

MODEL_FILES = ["temperature.blk", "energy.blk", "timer.blk"]
HAWK_FILES = ["temperature.hawk", "energy.hawk", "race.hawk"]
PROP_FILES = ["temperature.props", "energy.props", "race.props", "timer.props"]


def parse_any(name, text):
    if name.endswith(".blk"):
        return parse_model(text, name)
    if name.endswith(".hawk"):
        return parse_automaton(text, name)
    return parse_props(text, name)


def same(x, y):
    if hasattr(x, "locations"):
        return to_json(x) == to_json(y)
    return x == y


@pytest.mark.parametrize("name", MODEL_FILES + HAWK_FILES + PROP_FILES)
def test_canonical_round_trip_on_fixtures(name):
    ast = parse_any(name, fixtures.read_text(name))
    text = print_canonical(ast)
    again = parse_any(name, text)
    assert same(ast, again)
    assert print_canonical(again) == text


@pytest.mark.parametrize("name", MODEL_FILES + HAWK_FILES)
def test_printing_is_stable_and_line_oriented(name):
    ast = parse_any(name, fixtures.read_text(name))
    assert print_canonical(ast) == print_canonical(parse_any(name, fixtures.read_text(name)))
    assert all(line.split()[0] in {"model", "setting", "block", "wire", "prop", "automaton", "var", "input",
                                   "output", "label", "loc", "edge", "init"}
               for line in print_canonical(ast).splitlines() if line)


TWO_BLOCKS = """model pair
block timer clk(dist=uniform(1, 3))
block sampling hold(dist=dirac(2))
wire x: clk.out -> hold.in
"""


def test_two_block_model():
    m = parse_model(TWO_BLOCKS)
    assert len(m.blocks) == 2 and len(m.wires) == 1
    plan = m.plan()
    assert len(plan.mappings) == 1
    (mp,) = plan.mappings
    assert (mp.name, mp.snd, set(mp.rcv)) == ("x", "clk", {"hold"})


def test_temperature_model_gives_uniform_sampling_kernel():
    a = parse_model(fixtures.read_text("temperature.blk")).compose()
    assert a.delay_kernels["sensor.sample"] == uniform(10, 20)


def test_settings_and_inline_properties():
    m = parse_model("""model m
setting scheduler asap
setting seed 42
block timer clk(dist=dirac(1))
wire t: clk.out
prop late: <> t >= 0.5 within 3
""")
    assert m.setting("scheduler") == "asap" and m.setting("seed") == 42
    (p,) = m.properties()
    assert p.name == "late" and p.horizon == 3


TEMPERATURE_UNIT = """
# heating/cooling unit with an evaluation step after a random delay
automaton control_unit
var temp, t, clock
label eval delay foldednormal(100)
loc l_eval urgent
loc l_heat flow temp' = t, clock' = 1
loc l_cool flow temp' = t, clock' = 1
edge l_eval -> l_heat label e0 trigger immediate guard temp <= 21 kernel t ~ uniform(0.1, 0.3)
edge l_heat -> l_eval label eval
edge l_eval -> l_cool label e2 trigger immediate guard temp > 21 kernel t ~ uniform(-0.3, -0.1)
edge l_cool -> l_eval label eval
edge l_heat -> l_cool label e4 trigger crossing guard temp >= 22 kernel t ~ uniform(-0.3, -0.1)
edge l_cool -> l_heat label e5 trigger crossing guard temp <= 20 kernel t ~ uniform(0.1, 0.3)
init l_eval with temp = 21
"""


def test_worked_example_transcription():
    a = parse_automaton(TEMPERATURE_UNIT, "unit.hawk")
    assert sorted(a.location_names()) == ["l_cool", "l_eval", "l_heat"]
    assert set(a.labels) == {"e0", "e2", "e4", "e5", "eval"}
    assert a.delay_kernels["eval"] == folded_normal(100)
    for lab in ("e0", "e2", "e4", "e5"):
        assert a.delay_kernels[lab] == dirac(0)
    by_label = {}
    for e in a.edges:
        by_label.setdefault(e.label, []).append(e)
    for lab in ("e0", "e5"):
        assert by_label[lab][0].kernels == {"t": uniform(0.1, 0.3)}
    for lab in ("e2", "e4"):
        assert by_label[lab][0].kernels == {"t": uniform(-0.3, -0.1)}
    assert all(e.kernels == {} for e in by_label["eval"])
    assert {e.trigger for e in by_label["e4"] + by_label["e5"]} == {Trigger.CROSSING}


def test_worked_example_simulates_within_its_bounds():
    a = parse_automaton(TEMPERATURE_UNIT, "unit.hawk")
    for seed in range(30):
        tr = simulate(a, 100, "uniform", RngStream(seed))
        assert check_trace(a, tr)
        for s in tr.states:
            assert 20 - 1e-9 <= s.valuation["temp"] <= 22 + 1e-9
            if s.location != "l_eval" and s.time > 0:
                assert 0.1 <= abs(s.valuation["t"]) <= 0.3


def test_file_without_locations_is_a_syntax_error():
    with pytest.raises(ParseError, match="no locations"):
        parse_automaton("automaton empty\nvar x\n", "empty.hawk")


@pytest.mark.parametrize("text, line, col", [
    ("automaton a\nvar x\nloc l0 flow x = 1\ninit l0\n", 3, 13),
    ("automaton a\nvar x\nloc l0\nedge l0 -> l0 label k guard x <=\ninit l0\n", 4, 33),
    ("automaton a\nvar x\nloc l0 inv x * x <= 1\ninit l0\n", 3, 12),
    ("automaton a\nvar x\nloc l0\nedge l0 -> l0 label k trigger sometimes\ninit l0\n", 4, 31),
])
def test_syntax_errors_carry_line_and_column(text, line, col):
    with pytest.raises(ParseError) as info:
        parse_automaton(text, "bad.hawk")
    assert (info.value.line, info.value.column) == (line, col)
    assert str(info.value).startswith(f"bad.hawk:{line}:{col}:")


def test_unresolved_names():
    with pytest.raises(ResolveError, match="undeclared location l9"):
        parse_automaton("automaton a\nloc l0\nedge l0 -> l9 label k trigger immediate\ninit l0\n")
    with pytest.raises(ResolveError, match="unknown block b"):
        parse_model("model m\nblock timer a(dist=dirac(1))\nwire x: b.out\n")
    with pytest.raises(ResolveError, match="unknown parameter"):
        parse_model("model m\nblock timer a(dist=dirac(1), zz=1)\n")
    with pytest.raises(ResolveError, match="not wired"):
        parse_model("model m\nblock gain g(k=1)\n")
    with pytest.raises(ResolveError, match="unknown block kind"):
        parse_model("model m\nblock lookup_table a()\n")


def test_double_drive_errors():
    with pytest.raises(DoubleDriveError, match="more than one source"):
        parse_model("model m\nblock timer a(dist=dirac(1))\nwire x: a.out\nwire x: a.out\n")
    with pytest.raises(DoubleDriveError, match="wired twice"):
        parse_model("model m\nblock timer a(dist=dirac(1))\nblock timer b(dist=dirac(1))\n"
                    "block gain g(k=1)\nwire x: a.out -> g.in\nwire y: b.out -> g.in\n")


def test_semantic_problems_come_back_as_a_validation_report():
    with pytest.raises(ValidationError) as info:
        parse_automaton("automaton a\nvar x\nlabel k delay normal(8, 1)\nloc l0\nedge l0 -> l0 label k\ninit l0\n")
    assert any(v.kind == "negative-delay-support" for v in info.value.violations)


def test_reserved_words_are_rejected_as_variables():
    with pytest.raises(ParseError):
        parse_automaton("automaton a\nvar guard\nloc l0\ninit l0\n")


# random round trips -------------------------------------------------------------

nums = st.integers(-20, 20)
pos = st.integers(1, 9)


@st.composite
def affine_text(draw, names=("x", "y")):
    parts = [f"{draw(nums)}*{v}" for v in names if draw(st.booleans())]
    parts.append(str(draw(nums)))
    return " + ".join(parts)


@st.composite
def automaton_text(draw):
    nloc = draw(st.integers(1, 3))
    locs = [f"l{i}" for i in range(nloc)]
    lines = ["automaton rnd", "var x, y"]
    labels = draw(st.lists(st.sampled_from(["a", "b", "c"]), min_size=1, max_size=3, unique=True))
    for lab in labels:
        lo = draw(pos)
        lines.append(f"label {lab} delay uniform({lo}, {lo + draw(pos)})")
    for l in locs:
        flow = f" flow x' = {draw(nums)}" if draw(st.booleans()) else ""
        lines.append(f"loc {l}{flow}")
    for _ in range(draw(st.integers(0, 4))):
        src, dst = draw(st.sampled_from(locs)), draw(st.sampled_from(locs))
        lab = draw(st.sampled_from(labels))
        op = draw(st.sampled_from(["<", "<=", ">=", ">", "=="]))
        edge = f"edge {src} -> {dst} label {lab} guard {draw(affine_text())} {op} {draw(nums)}"
        if draw(st.booleans()):
            edge += f" reset y := {draw(affine_text())}"
        if draw(st.booleans()):
            edge += f" kernel x ~ uniform({draw(nums)}, {draw(nums) + 25})"
        lines.append(edge)
    lines.append(f"init {locs[0]} with x = {draw(nums)}")
    return "\n".join(lines) + "\n"


@given(automaton_text())
def test_random_automata_round_trip(text):
    a = parse_automaton(text, validate=False)
    printed = print_canonical(a)
    b = parse_automaton(printed, validate=False)
    assert to_json(a) == to_json(b)
    assert print_canonical(b) == printed


@st.composite
def model_text(draw):
    n = draw(st.integers(1, 4))
    lines = ["model rnd", f"setting seed {draw(st.integers(0, 99))}"]
    lines.append(f"block constant src(value={draw(nums)})")
    prev = "src"
    for i in range(n):
        kind = draw(st.sampled_from(["gain", "integrator", "sampling"]))
        if kind == "gain":
            params = f"k={draw(nums)}"
        elif kind == "integrator":
            params = f"init={draw(nums)}"
        else:
            lo = draw(pos)
            params = f"dist=uniform({lo}, {lo + draw(pos)})"
        lines.append(f"block {kind} b{i}({params})")
        lines.append(f"wire s{i}: {prev}.out -> b{i}.in")
        prev = f"b{i}"
    lines.append(f"wire out: {prev}.out")
    lines.append(f"prop p: <> out >= {draw(nums)} within {draw(pos)}")
    body = draw(st.permutations(lines[1:]))
    return "\n".join([lines[0], *body]) + "\n"


@given(model_text())
def test_random_models_round_trip(text):
    m = parse_model(text)
    printed = print_canonical(m)
    assert parse_model(printed) == m
    assert print_canonical(parse_model(printed)) == printed

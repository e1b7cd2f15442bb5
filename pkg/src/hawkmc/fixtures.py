"""Bundled case-study models and analytic micro-models."""
from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .automata import HAwK


@dataclass(frozen=True)
class Fixture:
    name: str
    description: str
    model: str
    props: str
    scheduler: str = "uniform"
    monolith: str | None = None
    # hand-written names -> composed names, per namespace
    renaming: dict = field(default_factory=dict)
    # property name -> exact probability, where one is known
    truth: dict = field(default_factory=dict)

    def files(self) -> tuple:
        return tuple(f for f in (self.model, self.props, self.monolith) if f)


_TEMP = "ctrl.{}|plant.l0|sensor.{}"
_ENERGY = "add.l0|detect.{}|high1.l0|high2.l0|low1.l0|low2.l0|meter.l0|timer.l0|unit1.{}|unit2.{}"

FIXTURES = {f.name: f for f in [
    Fixture("temperature", "room temperature, hysteresis controller, sensor sampled at U(10, 20) intervals",
            "temperature.blk", "temperature.props", "uniform", "temperature.hawk",
            {"locations": {"l_init": _TEMP.format("on", "l_init"), "l_cool": _TEMP.format("on", "l0"),
                           "l_heat": _TEMP.format("off", "l0")},
             "labels": {"init": "sensor.init", "sample": "sensor.sample",
                        "to_heat": "ctrl.switch_off", "to_cool": "ctrl.switch_on"}}),
    Fixture("energy", "two consumers switching between low and high load, metered",
            "energy.blk", "energy.props", "asap", "energy.hawk",
            {"locations": {"low_low": _ENERGY.format("off", "l0", "l0"),
                           "high_low": _ENERGY.format("off", "l1", "l0"),
                           "low_high": _ENERGY.format("off", "l0", "l1"),
                           "high_high": _ENERGY.format("on", "l1", "l1")},
             "labels": {"up1": "unit1.switch1", "down1": "unit1.switch2",
                        "up2": "unit2.switch1", "down2": "unit2.switch2"}}),
    Fixture("race", "two uniform clocks racing; T1 ~ U(0, 10) against T2 ~ U(5, 15)",
            "race.hawk", "race.props", "asap", truth={"t1_first": 0.875, "t2_first": 0.125}),
    Fixture("timer", "a single stochastic timer with U(1, 3) periods",
            "timer.blk", "timer.props", "asap", truth={"first_long": 0.25}),
]}


def fixture(name: str) -> Fixture:
    try:
        return FIXTURES[name]
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; available: {', '.join(sorted(FIXTURES))}") from None


def read_text(filename: str) -> str:
    return resources.files("hawkmc").joinpath("data", filename).read_text(encoding="utf-8")


def load(name: str, prune: bool = True) -> HAwK:
    """The fixture's model as a monolithic automaton."""
    from .dsl import parse_automaton, parse_model
    f = fixture(name)
    text = read_text(f.model)
    if f.model.endswith(".hawk"):
        return parse_automaton(text, f.model)
    return parse_model(text, f.model).compose(prune=prune)


def load_properties(name: str) -> list:
    from .dsl import parse_props
    f = fixture(name)
    return parse_props(read_text(f.props), f.props).properties()


def load_monolith(name: str, renamed: bool = True) -> HAwK:
    """The hand-written automaton, optionally renamed into the composed names."""
    from .dsl import parse_automaton
    f = fixture(name)
    if not f.monolith:
        raise ValueError(f"fixture {name} has no hand-written automaton")
    a = parse_automaton(read_text(f.monolith), f.monolith)
    if renamed:
        a = a.rename(variables=f.renaming.get("variables"), labels=f.renaming.get("labels"),
                     locations=f.renaming.get("locations"))
    return a


def export(directory, names=None) -> list:
    """Write fixture files into ``directory``; returns the written paths."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for n in names or sorted(FIXTURES):
        for fn in fixture(n).files():
            p = out / fn
            p.write_text(read_text(fn), encoding="utf-8")
            written.append(p)
    return written


# parameterized variants for calibration -------------------------------------------

def temperature_text(heat=0.03, cool=-0.03, on=21.5, off=20.5, sample=(10, 20), init=21) -> str:
    """Temperature model text with its image-only parameters exposed."""
    return (f"model temperature\nsetting scheduler uniform\nsetting seed 0\n"
            f"block integrator plant(init={init})\n"
            f"block sampling sensor(dist=uniform({sample[0]}, {sample[1]}))\n"
            f"block relay ctrl(on={on}, off={off}, on_value={cool}, off_value={heat}, initial=on)\n"
            "wire temp: plant.out -> sensor.in\nwire sensed: sensor.out -> ctrl.in\n"
            "wire rate: ctrl.out -> plant.in\n")


def energy_text(low1=2, high1=160, low2=2, high2=160, max_value=0.8) -> str:
    """Energy model text with its image-only parameters exposed.

    The detector threshold sits halfway between the largest mixed load and
    the both-high load, so it is never met with equality.
    """
    mixed = max(high1 + low2, low1 + high2)
    th = (mixed + high1 + high2) / 2
    th = int(th) if th == int(th) else th
    return (f"model energy\nsetting scheduler asap\nsetting seed 0\n"
            f"block constant low1(value={low1})\nblock constant high1(value={high1})\n"
            f"block constant low2(value={low2})\nblock constant high2(value={high2})\n"
            "block switch unit1(dist1=uniform(10, 20), dist2=uniform(5, 10))\n"
            "block switch unit2(dist1=uniform(5, 10), dist2=uniform(5, 15))\n"
            "block sum add(weights=[1, 1])\nblock integrator meter(init=0)\n"
            f"block relay detect(on={th}, off={th}, on_value={max_value}, off_value=0, initial=off)\n"
            "block integrator timer(init=0)\n"
            "wire l1: low1.out -> unit1.in1\nwire h1: high1.out -> unit1.in2\n"
            "wire l2: low2.out -> unit2.in1\nwire h2: high2.out -> unit2.in2\n"
            "wire p1: unit1.out -> add.in1\nwire p2: unit2.out -> add.in2\n"
            "wire power: add.out -> meter.in, detect.in\nwire total: meter.out\n"
            "wire max: detect.out -> timer.in\nwire load: timer.out\n")

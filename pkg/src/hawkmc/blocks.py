"""Block kinds available in model files and how their parameters map to templates."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping

from .automata import ModelError, Template
from .kernels import KINDS, MAKERS, Distribution
from . import templates as T


@dataclass(frozen=True)
class Ident:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple

    def __str__(self):
        return f"{self.name}({', '.join(format_value(a) for a in self.args)})"


def format_value(v) -> str:
    from .expr import fmt_num
    if isinstance(v, Fraction):
        return fmt_num(v)
    if isinstance(v, tuple):
        return "[" + ", ".join(format_value(x) for x in v) + "]"
    return str(v)


class BlockError(ModelError):
    """Bad block kind, parameter or port."""


@dataclass(frozen=True)
class BlockKind:
    name: str
    required: tuple
    optional: Mapping[str, object]
    inputs: Callable[[dict], tuple]
    outputs: tuple
    build: Callable[[str, dict, dict], Template]


# parameter coercion -------------------------------------------------------------

def _num(kind, key, v) -> Fraction:
    if not isinstance(v, Fraction):
        raise BlockError(f"{kind}: parameter {key} must be a number, got {format_value(v)}")
    return v


def _int(kind, key, v) -> int:
    q = _num(kind, key, v)
    if q.denominator != 1:
        raise BlockError(f"{kind}: parameter {key} must be an integer, got {format_value(v)}")
    return int(q)


def _word(kind, key, v, choices) -> str:
    if not isinstance(v, Ident) or v.name not in choices:
        raise BlockError(f"{kind}: parameter {key} must be one of {', '.join(choices)}")
    return v.name


def _dist(kind, key, v, allow_none=False) -> Distribution | None:
    if allow_none and isinstance(v, Ident) and v.name == "none":
        return None
    if not isinstance(v, Call) or v.name not in KINDS:
        raise BlockError(f"{kind}: parameter {key} must be a distribution "
                         f"({', '.join(KINDS)}), got {format_value(v)}")
    args = [_num(kind, f"{key} argument", a) for a in v.args]
    try:
        return MAKERS[v.name](*args)
    except TypeError:
        raise BlockError(f"{kind}: wrong number of arguments for {v.name} in {key}") from None


def _repair(kind, v):
    if isinstance(v, Ident) and v.name == "signal":
        return T.ExplicitSignal("in2")
    if isinstance(v, Call) and v.name == "percent" and len(v.args) == 1:
        return T.PercentOfInput(_num(kind, "repair_mode", v.args[0]))
    raise BlockError(f"{kind}: repair_mode must be percent(r) or signal, got {format_value(v)}")


def _factor(kind, v):
    if isinstance(v, Ident) and v.name == "input":
        return T.InputMultiplier()
    return T.ConstantFactor(_num(kind, "factor", v))


# builders: (instance name, params, port -> variable) -> Template ----------------

def _b_timer(n, p, s):
    return T.mk_stochastic_timer(T.TimerParams(_dist("timer", "dist", p["dist"]), s["out"]), n)


def _b_switch(n, p, s):
    return T.mk_stochastic_switch(T.SwitchParams(_dist("switch", "dist1", p["dist1"]),
                                                 _dist("switch", "dist2", p["dist2"]),
                                                 s["in1"], s["in2"], s["out"]), n)


def _b_sampling(n, p, s):
    return T.mk_stochastic_sampling(T.SamplingParams(_dist("sampling", "dist", p["dist"]),
                                                     s["in"], s["out"]), n)


def _b_noise(n, p, s):
    k = "noise"
    return T.mk_stochastic_noise(T.NoiseParams(_num(k, "mean", p["mean"]), _num(k, "variance", p["variance"]),
                                               _num(k, "rate", p["rate"]), _factor(k, p["factor"]),
                                               s["in"], s["out"]), n)


def _signal_mode(mode, s):
    return T.ExplicitSignal(s["in2"]) if isinstance(mode, T.ExplicitSignal) else mode


def _b_daging(n, p, s):
    k = "discrete_aging"
    step = None if p["step"] == Ident("default") else _num(k, "step", p["step"])
    return T.mk_discrete_aging(T.DiscreteAgingParams(
        _dist(k, "fail", p["fail"]), _dist(k, "repair", p["repair"]), _int(k, "max_steps", p["max_steps"]),
        _signal_mode(_repair(k, p["repair_mode"]), s), step, s["in"], s["out"]), n)


def _b_caging(n, p, s):
    k = "continuous_aging"
    return T.mk_continuous_aging(T.ContinuousAgingParams(
        _dist(k, "pause", p["pause"], allow_none=True), _dist(k, "resume", p["resume"]),
        _dist(k, "repair", p["repair"]), _num(k, "rate", p["rate"]), _num(k, "bound", p["bound"]),
        _signal_mode(_repair(k, p["repair_mode"]), s), s["in"], s["out"]), n)


def _b_constant(n, p, s):
    return T.mk_constant(_num("constant", "value", p["value"]), s["out"], n)


def _b_gain(n, p, s):
    return T.mk_gain(_num("gain", "k", p["k"]), s["in"], s["out"], n)


def _sum_weights(p):
    w = p["weights"]
    if not isinstance(w, tuple) or not w:
        raise BlockError("sum: weights must be a non-empty list of numbers")
    return [_num("sum", "weights", x) for x in w]


def _b_sum(n, p, s):
    ws = _sum_weights(p)
    ins = [s[f"in{i + 1}"] for i in range(len(ws))]
    if len(set(ins)) != len(ins):
        raise BlockError(f"sum {n}: the same signal is wired to two inputs")
    return T.mk_sum(dict(zip(ins, ws)), s["out"], n)


def _b_integrator(n, p, s):
    return T.mk_integrator(_num("integrator", "init", p["init"]), s["in"], s["out"], n)


def _b_relay(n, p, s):
    k = "relay"
    return T.mk_relay(_num(k, "on", p["on"]), _num(k, "off", p["off"]), _num(k, "on_value", p["on_value"]),
                      _num(k, "off_value", p["off_value"]), _word(k, "initial", p["initial"], ("on", "off")),
                      s["in"], s["out"], n)


def _aging_inputs(p):
    mode = p.get("repair_mode")
    return ("in", "in2") if mode == Ident("signal") else ("in",)


_ONE_IN = lambda p: ("in",)  # noqa: E731
_NO_IN = lambda p: ()  # noqa: E731
_ZERO = Fraction(0)

BLOCK_KINDS = {b.name: b for b in [
    BlockKind("timer", ("dist",), {}, _NO_IN, ("out",), _b_timer),
    BlockKind("switch", ("dist1", "dist2"), {}, lambda p: ("in1", "in2"), ("out",), _b_switch),
    BlockKind("sampling", ("dist",), {}, _ONE_IN, ("out",), _b_sampling),
    BlockKind("noise", ("mean", "variance", "rate"), {"factor": Fraction(1)}, _ONE_IN, ("out",), _b_noise),
    BlockKind("discrete_aging", ("fail", "repair", "max_steps"),
              {"step": Ident("default"), "repair_mode": Call("percent", (_ZERO,))},
              _aging_inputs, ("out",), _b_daging),
    BlockKind("continuous_aging", ("resume", "repair", "rate", "bound"),
              {"pause": Ident("none"), "repair_mode": Call("percent", (_ZERO,))},
              _aging_inputs, ("out",), _b_caging),
    BlockKind("constant", ("value",), {}, _NO_IN, ("out",), _b_constant),
    BlockKind("gain", ("k",), {}, _ONE_IN, ("out",), _b_gain),
    BlockKind("sum", ("weights",), {}, lambda p: tuple(f"in{i + 1}" for i in range(len(_sum_weights(p)))),
              ("out",), _b_sum),
    BlockKind("integrator", (), {"init": _ZERO}, _ONE_IN, ("out",), _b_integrator),
    BlockKind("relay", ("on", "off", "on_value", "off_value"), {"initial": Ident("off")},
              _ONE_IN, ("out",), _b_relay),
]}


def block_kind(kind: str) -> BlockKind:
    try:
        return BLOCK_KINDS[kind]
    except KeyError:
        raise BlockError(f"unknown block kind {kind!r}; known kinds: {', '.join(sorted(BLOCK_KINDS))}") from None


def full_params(kind: str, params: Mapping[str, object]) -> dict:
    b = block_kind(kind)
    unknown = set(params) - set(b.required) - set(b.optional)
    if unknown:
        raise BlockError(f"{kind}: unknown parameter(s) {', '.join(sorted(unknown))}")
    missing = [k for k in b.required if k not in params]
    if missing:
        raise BlockError(f"{kind}: missing parameter(s) {', '.join(missing)}")
    out = dict(b.optional)
    out.update(params)
    return out


def ports(kind: str, params: Mapping[str, object]) -> tuple:
    """``(input ports, output ports)`` of a block with the given parameters."""
    b = block_kind(kind)
    return b.inputs(full_params(kind, params)), b.outputs


def instantiate(kind: str, name: str, params: Mapping[str, object], signals: Mapping[str, str]) -> Template:
    """Build the template; ``signals`` maps port names to variable names."""
    b = block_kind(kind)
    p = full_params(kind, params)
    ins, outs = b.inputs(p), b.outputs
    s = {port: signals.get(port, f"{name}.{port}") for port in ins + outs}
    try:
        return b.build(name, p, s)
    except (T.TemplateError, ValueError) as exc:
        if isinstance(exc, BlockError):
            raise
        raise BlockError(f"block {name} ({kind}): {exc}") from exc

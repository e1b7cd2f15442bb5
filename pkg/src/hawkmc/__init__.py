"""Hybrid automata with random clocks.

Build automata directly or compose them from block templates, simulate
their paths, check paths independently, and estimate time-bounded
reachability probabilities with Wilson score intervals.
"""
from .automata import (DEFAULT_TOL, HAwK, Edge, Init, Location, ModelError, Template, Trigger,
                       Violation, enabled_edges, validate_hawk)
from .composer import CompositionError, CompositionPlan, SyncMapping, compose_step, resolve_all
from .dsl import (DslError, ModelFile, ParseError, ValidationError, parse_automaton, parse_model,
                  parse_props, print_canonical)
from .expr import TRUE, Atom, Expr, FlowExpr, Predicate
from .kernels import (Dirac, Distribution, FoldedNormal, Normal, ParameterError, RngStream, Uniform,
                      dirac, folded_normal, normal, sample, uniform)
from .serialize import from_json, to_json
from .simulator import (ASAP, UNIFORM, DeadlockError, EventCapExceeded, ExecState, Scheduler,
                        SimulationError, Simulator, Trace, init_state, next_event, simulate, step)
from .smc import CiResult, Property, estimate, estimate_many, eval_property, okamoto_runs, wilson_interval
from .tracecheck import CheckResult, check_trace

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_TOL", "HAwK", "Edge", "Init", "Location", "ModelError", "Template", "Trigger", "Violation",
    "enabled_edges", "validate_hawk",
    "CompositionError", "CompositionPlan", "SyncMapping", "compose_step", "resolve_all",
    "DslError", "ModelFile", "ParseError", "ValidationError", "parse_automaton", "parse_model",
    "parse_props", "print_canonical",
    "TRUE", "Atom", "Expr", "FlowExpr", "Predicate",
    "Dirac", "Distribution", "FoldedNormal", "Normal", "ParameterError", "RngStream", "Uniform",
    "dirac", "folded_normal", "normal", "sample", "uniform",
    "from_json", "to_json",
    "ASAP", "UNIFORM", "DeadlockError", "EventCapExceeded", "ExecState", "Scheduler", "SimulationError",
    "Simulator", "Trace", "init_state", "next_event", "simulate", "step",
    "CiResult", "Property", "estimate", "estimate_many", "eval_property", "okamoto_runs", "wilson_interval",
    "CheckResult", "check_trace",
]

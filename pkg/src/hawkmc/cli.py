"""Command-line interface: ``hawkmc check | simulate | compose | fixtures``.

Exit codes: 0 ok, 2 parse error, 3 validation or composition error,
4 runtime or simulation error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from . import fixtures
from .automata import DEFAULT_TOL, HAwK, ModelError
from .dsl import DslError, ModelFile, parse_automaton, parse_model, parse_props, print_canonical
from .kernels import ParameterError, RngStream
from .serialize import to_json
from .simulator import DEFAULT_EVENT_CAP, SimulationError, Simulator
from .smc import SmcRunError, estimate_many, format_table
from .tracecheck import check_trace

EXIT_OK, EXIT_PARSE, EXIT_INVALID, EXIT_RUNTIME = 0, 2, 3, 4
FIXTURE_PREFIX = "fixture:"


@dataclass(frozen=True)
class RunConfig:
    runs: int = 1000
    confidence: float = 0.95
    horizon: float | None = None
    seed: int | None = None
    scheduler: str | None = None
    event_cap: int = DEFAULT_EVENT_CAP
    tolerance: float = DEFAULT_TOL
    workers: int = 1

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError(f"--runs must be at least 1, got {self.runs}")
        if not 0 < self.confidence < 1:
            raise ValueError(f"--confidence must lie in (0, 1), got {self.confidence}")
        if self.horizon is not None and not self.horizon > 0:
            raise ValueError(f"--horizon must be positive, got {self.horizon}")
        if self.workers < 1:
            raise ValueError(f"--workers must be at least 1, got {self.workers}")
        if self.event_cap < 1:
            raise ValueError(f"--event-cap must be at least 1, got {self.event_cap}")
        if not self.tolerance >= 0:
            raise ValueError(f"--tolerance must be non-negative, got {self.tolerance}")


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# loading -----------------------------------------------------------------------

def _read(path: str, part: str = "model") -> tuple:
    """``(text, display name, file name)``; ``fixture:NAME`` reads a bundled file."""
    if path.startswith(FIXTURE_PREFIX):
        name = path[len(FIXTURE_PREFIX):]
        try:
            f = fixtures.fixture(name)
        except KeyError as exc:
            raise CliError(EXIT_PARSE, f"cli: {exc.args[0]}") from None
        fname = getattr(f, part)
        return fixtures.read_text(fname), path, fname
    p = Path(path)
    try:
        return p.read_text(encoding="utf-8"), path, p.name
    except OSError as exc:
        raise CliError(EXIT_PARSE, f"cli: cannot read {path}: {exc.strerror}") from None


def load_model(path: str, prune: bool = True) -> tuple:
    """``(automaton, model file or None)`` from a ``.blk`` or ``.hawk`` file."""
    text, shown, fname = _read(path)
    if fname.endswith(".hawk"):
        return parse_automaton(text, shown), None
    m = parse_model(text, shown)
    return m.compose(prune=prune), m


def load_properties(model_path: str, props_path: str | None, model: ModelFile | None) -> list:
    if props_path:
        text, shown, _ = _read(props_path, "props")
        return parse_props(text, shown).properties()
    if model is not None and model.props:
        return model.properties()
    if model_path.startswith(FIXTURE_PREFIX):
        text, shown, _ = _read(model_path, "props")
        return parse_props(text, shown).properties()
    raise CliError(EXIT_PARSE, "cli: no properties given (pass a .props file or add prop lines to the model)")


def _settings(model: ModelFile | None, model_path: str, cfg: RunConfig) -> tuple:
    sched, seed = cfg.scheduler, cfg.seed
    if model is not None:
        sched = sched or model.setting("scheduler")
        seed = model.setting("seed") if seed is None else seed
    elif model_path.startswith(FIXTURE_PREFIX):
        f = fixtures.fixture(model_path[len(FIXTURE_PREFIX):])
        sched = sched or f.scheduler
    return sched or "uniform", 0 if seed is None else seed


def _check_variables(a: HAwK, props):
    known = set(a.variables)
    for p in props:
        missing = p.predicate.variables() - known
        if missing:
            raise CliError(EXIT_INVALID, f"smc: property {p.label()} uses unknown variable(s) "
                                         f"{', '.join(sorted(missing))}")


# commands ----------------------------------------------------------------------

def cmd_check(model_path: str, props_path: str | None, cfg: RunConfig, prune: bool = True,
              json_path: str | None = None, out=None) -> int:
    out = out or sys.stdout
    a, m = load_model(model_path, prune)
    props = load_properties(model_path, props_path, m)
    if cfg.horizon is not None:
        props = [replace(p, horizon=cfg.horizon) for p in props]
    _check_variables(a, props)
    sched, seed = _settings(m, model_path, cfg)
    results = estimate_many(a, props, cfg.runs, cfg.confidence, sched, seed, cfg.workers,
                            cfg.tolerance, cfg.event_cap)
    print(format_table(results), file=out)
    if json_path:
        doc = {"model": a.name, "runs": cfg.runs, "confidence": cfg.confidence, "seed": seed,
               "scheduler": sched,
               "results": [{k: v for k, v in r.as_dict().items() if k != "wall_time"} for r in results]}
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
        if json_path == "-":
            out.write(text)
        else:
            Path(json_path).write_text(text, encoding="utf-8")
    return EXIT_OK


def cmd_simulate(model_path: str, cfg: RunConfig, prune: bool = True, csv_path: str | None = None,
                 run: int = 0, out=None) -> int:
    out = out or sys.stdout
    a, m = load_model(model_path, prune)
    sched, seed = _settings(m, model_path, cfg)
    horizon = cfg.horizon if cfg.horizon is not None else 100.0
    sim = Simulator(a, tol=cfg.tolerance, event_cap=cfg.event_cap)
    tr = sim.simulate(horizon, sched, RngStream(seed, run))
    verdict = check_trace(a, tr)
    if not verdict:
        raise CliError(EXIT_RUNTIME, f"tracecheck: simulated path rejected at step {verdict.step}: {verdict.reason}")
    text = tr.to_csv(sorted(a.variables))
    if csv_path and csv_path != "-":
        Path(csv_path).write_text(text, encoding="utf-8")
    else:
        out.write(text)
    return EXIT_OK


def cmd_compose(model_path: str, prune: bool = True, emit: str = "json", json_path: str | None = None,
                out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    a, _ = load_model(model_path, prune)
    text = to_json(a) + "\n" if emit == "json" else print_canonical(a)
    if json_path and json_path != "-":
        Path(json_path).write_text(text, encoding="utf-8")
    else:
        out.write(text)
    print(f"{a.name}: {len(a.locations)} locations, {len(a.edges)} edges, {len(a.variables)} variables",
          file=err)
    return EXIT_OK


def cmd_fixtures(action: str, directory: str | None = None, names=None, out=None) -> int:
    out = out or sys.stdout
    if action == "list":
        for n in sorted(fixtures.FIXTURES):
            f = fixtures.FIXTURES[n]
            truth = "".join(f"  [{k} = {v}]" for k, v in sorted(f.truth.items()))
            print(f"{n:12s} {', '.join(f.files())}  {f.description}{truth}", file=out)
        return EXIT_OK
    for n in names or ():
        if n not in fixtures.FIXTURES:
            raise CliError(EXIT_PARSE, f"cli: unknown fixture {n!r}")
    for p in fixtures.export(directory, names or None):
        print(p, file=out)
    return EXIT_OK


# argument parsing --------------------------------------------------------------

def _common(p: argparse.ArgumentParser, smc: bool):
    p.add_argument("--horizon", type=float, help="time horizon (overrides property horizons)")
    p.add_argument("--seed", type=int, help="base seed (default: model setting, else 0)")
    p.add_argument("--scheduler", choices=("uniform", "asap"), help="default: model setting, else uniform")
    p.add_argument("--event-cap", type=int, default=DEFAULT_EVENT_CAP, help="maximum discrete events per run")
    p.add_argument("--tolerance", type=float, default=DEFAULT_TOL, help="guard comparison tolerance")
    p.add_argument("--no-prune", action="store_true", help="keep unreachable product locations")
    if smc:
        p.add_argument("--runs", type=int, default=1000, help="number of simulation runs (default 1000)")
        p.add_argument("--confidence", type=float, default=0.95, help="confidence level in (0, 1)")
        p.add_argument("--workers", type=int, default=1, help="worker processes")
        p.add_argument("--json", metavar="PATH", help="write results as JSON ('-' for stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hawkmc", description="Statistical model checking of hybrid automata "
                                 "with random clocks. MODEL is a .blk or .hawk file, or fixture:NAME.")
    sub = ap.add_subparsers(dest="command", required=True)
    c = sub.add_parser("check", help="estimate property probabilities")
    c.add_argument("model")
    c.add_argument("props", nargs="?", help=".props file (default: props in the model)")
    _common(c, smc=True)
    s = sub.add_parser("simulate", help="export one path as CSV")
    s.add_argument("model")
    s.add_argument("--run", type=int, default=0, help="run index within the seed (default 0)")
    s.add_argument("--csv", metavar="PATH", help="output file (default stdout)")
    _common(s, smc=False)
    k = sub.add_parser("compose", help="emit the composed automaton")
    k.add_argument("model")
    k.add_argument("--no-prune", action="store_true", help="keep the raw product")
    k.add_argument("--emit", choices=("json", "hawk"), default="json", help="output format")
    k.add_argument("--json", metavar="PATH", help="output file (default stdout)")
    f = sub.add_parser("fixtures", help="list or export bundled models")
    fs = f.add_subparsers(dest="action", required=True)
    fs.add_parser("list")
    fe = fs.add_parser("export")
    fe.add_argument("directory")
    fe.add_argument("names", nargs="*")
    return ap


def _config(ns) -> RunConfig:
    kw = dict(horizon=ns.horizon, seed=ns.seed, scheduler=ns.scheduler, event_cap=ns.event_cap,
              tolerance=ns.tolerance)
    if hasattr(ns, "runs"):
        kw.update(runs=ns.runs, confidence=ns.confidence, workers=ns.workers)
    return RunConfig(**kw)


def _module(exc: BaseException) -> str:
    return type(exc).__module__.rsplit(".", 1)[-1]


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        if ns.command == "fixtures":
            return cmd_fixtures(ns.action, getattr(ns, "directory", None), getattr(ns, "names", None))
        if ns.command == "compose":
            return cmd_compose(ns.model, not ns.no_prune, ns.emit, ns.json)
        try:
            cfg = _config(ns)
        except ValueError as exc:
            raise CliError(EXIT_PARSE, f"cli: {exc}") from None
        if ns.command == "check":
            return cmd_check(ns.model, ns.props, cfg, not ns.no_prune, ns.json)
        return cmd_simulate(ns.model, cfg, not ns.no_prune, ns.csv, ns.run)
    except CliError as exc:
        print(f"hawkmc: {exc}", file=sys.stderr)
        return exc.code
    except DslError as exc:
        print(f"hawkmc: {_module(exc)}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (SimulationError, SmcRunError, ParameterError) as exc:
        print(f"hawkmc: {_module(exc)}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except ModelError as exc:
        print(f"hawkmc: {_module(exc)}: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

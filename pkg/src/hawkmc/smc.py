"""Statistical model checking of time-bounded reachability."""
from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from statistics import NormalDist
from typing import Sequence

from .automata import DEFAULT_TOL, HAwK
from .expr import Predicate
from .kernels import RngStream
from .simulator import DEFAULT_EVENT_CAP, SimulationError, Simulator, TimeStep, Trace, as_scheduler


@dataclass(frozen=True)
class Property:
    """``eventually predicate within horizon`` (closed horizon)."""

    predicate: Predicate
    horizon: float
    name: str = ""
    kind: str = "eventually"

    def __post_init__(self):
        if not self.horizon > 0:
            raise ValueError(f"property horizon must be positive, got {self.horizon}")
        if not self.predicate.is_affine():
            raise ValueError(f"property predicate {self.predicate} is not affine")
        if self.kind != "eventually":
            raise ValueError(f"unsupported property kind {self.kind!r}")

    def label(self) -> str:
        return self.name or f"<> {self.predicate} within {self.horizon:g}"


@dataclass(frozen=True)
class CiResult:
    n: int
    k: int
    confidence: float
    lo: float
    hi: float
    name: str = ""
    wall_time: float = 0.0

    @property
    def midpoint(self) -> float:
        return (self.lo + self.hi) / 2

    @property
    def point(self) -> float:
        return self.k / self.n

    def contains(self, p: float) -> bool:
        return self.lo <= p <= self.hi

    def as_dict(self) -> dict:
        return {"property": self.name, "n": self.n, "k": self.k, "confidence": self.confidence,
                "lo": self.lo, "hi": self.hi, "midpoint": self.midpoint, "wall_time": self.wall_time}


class SmcRunError(RuntimeError):
    def __init__(self, run: int, seed: int, cause: Exception):
        super().__init__(f"run {run} (seed {seed}, stream {run}) failed: {cause}")
        self.run, self.seed, self.cause = run, seed, cause


# intervals ---------------------------------------------------------------------

def z_value(confidence: float) -> float:
    if not 0 < confidence < 1:
        raise ValueError(f"confidence must lie in (0, 1), got {confidence}")
    return NormalDist().inv_cdf(1 - (1 - confidence) / 2)


def wilson_interval(k: int, n: int, confidence: float = 0.95) -> tuple:
    """Wilson score interval without continuity correction, clamped to [0, 1]."""
    if n < 1:
        raise ValueError(f"need at least one run, got n={n}")
    if not 0 <= k <= n:
        raise ValueError(f"successes k={k} outside [0, {n}]")
    z = z_value(confidence)
    p = k / n
    z2n = z * z / n
    denom = 1 + z2n
    center = (p + z2n / 2) / denom
    half = z * math.sqrt(p * (1 - p) / n + z2n / (4 * n)) / denom
    lo = 0.0 if k == 0 else max(0.0, center - half)
    hi = 1.0 if k == n else min(1.0, center + half)
    return lo, hi


def okamoto_runs(epsilon: float, delta: float) -> int:
    """Runs needed so that ``P(|p_hat - p| > epsilon) <= delta``."""
    if not (epsilon > 0 and 0 < delta < 1):
        raise ValueError("need epsilon > 0 and 0 < delta < 1")
    return math.ceil(math.log(2 / delta) / (2 * epsilon * epsilon))


# property evaluation -----------------------------------------------------------

def satisfiable_within(terms, length: float, tol: float) -> bool:
    """Whether every ``(op, g, s)`` atom ``g + s*d op 0`` holds for a common ``d`` in [0, length].

    Strict comparisons are read as their closure (tolerance ``tol``).
    """
    lo, hi = 0.0, length
    for op, g, s in terms:
        if op == "<=" or op == "<":
            pairs = ((g - tol, s),)
        elif op == ">=" or op == ">":
            pairs = ((-g - tol, -s),)
        else:
            pairs = ((g - tol, s), (-g - tol, -s))
        for c, k in pairs:
            # c + k*d <= 0
            if k == 0.0:
                if c > 0:
                    return False
            elif k > 0:
                hi = min(hi, -c / k)
            else:
                lo = max(lo, -c / k)
            if lo > hi:
                return False
    return True


def eval_property(tr: Trace, p: Property, tol: float = DEFAULT_TOL) -> bool:
    """Whether the predicate holds at some time in ``[0, p.horizon]`` along ``tr``.

    Inside a time step the motion is affine, so each segment is checked in
    closed form between its recorded endpoints.
    """
    atoms = [(a.op, a.expr, a.expr.linear_part()) for a in p.predicate.atoms]
    H = p.horizon

    def at(val, slope, span):
        return satisfiable_within(((op, e.evaluate(val), lin.evaluate(slope) if slope else 0.0)
                                   for op, e, lin in atoms), span, tol)

    prev = tr.initial
    if at(prev.valuation, None, 0.0):
        return True
    for st, post in zip(tr.steps, tr.states):
        if prev.time > H + tol:
            break
        if isinstance(st, TimeStep) and st.dt > 0:
            slope = {v: (post.valuation[v] - prev.valuation[v]) / st.dt for v in prev.valuation}
            if at(prev.valuation, slope, min(st.dt, H - prev.time)):
                return True
        elif post.time <= H + tol and at(post.valuation, None, 0.0):
            return True
        prev = post
    return False


class _Monitor:
    """Tracks several properties along one run on the compiled state."""

    def __init__(self, sim: Simulator, props: Sequence[Property], tol: float):
        idx = sim.m.index
        self.tol = tol
        self.props = []
        for p in props:
            atoms = tuple((a.op, float(a.expr.constant()),
                           tuple((idx[v], float(a.expr.coeff(v))) for v in sorted(a.expr.variables())))
                          for a in p.predicate.atoms)
            self.props.append((atoms, float(p.horizon)))
        self.reset()

    def reset(self):
        self.hit = [False] * len(self.props)
        self.left = len(self.props)

    def __call__(self, run, dt, rates):
        t, vals, tol = run.time, run.vals, self.tol
        for i, (atoms, H) in enumerate(self.props):
            if self.hit[i] or t > H + tol:
                continue
            terms = []
            for op, c0, lin in atoms:
                g = c0 + sum(c * vals[j] for j, c in lin)
                s = 0.0 if rates is None else sum(c * rates[j] for j, c in lin)
                terms.append((op, g, s))
            span = 0.0 if rates is None else max(0.0, min(dt, H - t))
            if satisfiable_within(terms, span, tol):
                self.hit[i] = True
                self.left -= 1
        return self.left == 0


def _run_chunk(args):
    a, props, runs, seed, sched, tol, cap = args
    sim = Simulator(a, tol=tol, event_cap=cap, validate=False)
    mon = _Monitor(sim, props, tol)
    horizon = max(p.horizon for p in props)
    sched = as_scheduler(sched)
    out = []
    for run in runs:
        mon.reset()
        try:
            sim.simulate(horizon, sched, RngStream(seed, run), record=False, monitor=mon)
        except SimulationError as exc:
            raise SmcRunError(run, seed, exc) from exc
        out.append((run, tuple(mon.hit)))
    return out


def estimate_many(a: HAwK, props: Sequence[Property], n: int, confidence: float = 0.95,
                  sched="uniform", seed: int = 0, workers: int = 1, tol: float = DEFAULT_TOL,
                  event_cap: int = DEFAULT_EVENT_CAP) -> list:
    """One :class:`CiResult` per property, all evaluated on the same ``n`` runs.

    Run ``i`` always uses stream ``(seed, i)``; results are merged by run
    index, so the outcome does not depend on ``workers``.
    """
    if n < 1:
        raise ValueError(f"need at least one run, got n={n}")
    if not props:
        raise ValueError("no properties to check")
    z_value(confidence)
    Simulator(a, tol=tol, event_cap=event_cap)  # validates once up front
    sched = as_scheduler(sched).kind
    t0 = time.perf_counter()
    workers = max(1, min(int(workers), n))
    chunks = [range(i * n // workers, (i + 1) * n // workers) for i in range(workers)]
    jobs = [(a, tuple(props), c, seed, sched, tol, event_cap) for c in chunks]
    if workers == 1:
        parts = [_run_chunk(jobs[0])]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, jobs))
    hits = [None] * n
    for part in parts:
        for run, h in part:
            hits[run] = h
    wall = time.perf_counter() - t0
    out = []
    for i, p in enumerate(props):
        k = sum(1 for h in hits if h[i])
        lo, hi = wilson_interval(k, n, confidence)
        out.append(CiResult(n, k, confidence, lo, hi, p.label(), wall))
    return out


def estimate(a: HAwK, p: Property, n: int, confidence: float = 0.95, sched="uniform",
             seed: int = 0, workers: int = 1, **kw) -> CiResult:
    return estimate_many(a, [p], n, confidence, sched, seed, workers, **kw)[0]


def format_table(results: Sequence[CiResult]) -> str:
    rows = [("property", "n", "k", "midpoint", "interval", "wall time")]
    for r in results:
        rows.append((r.name, str(r.n), str(r.k), f"{r.midpoint:.4f}",
                     f"[{r.lo:.4f}, {r.hi:.4f}]", f"{r.wall_time:.2f}s"))
    widths = [max(len(row[c]) for row in rows) for c in range(len(rows[0]))]
    return "\n".join("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows)

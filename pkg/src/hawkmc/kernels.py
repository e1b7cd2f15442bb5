"""Probability distributions used as delay and reset kernels.

Every distribution parameter is an :class:`~hawkmc.expr.Expr`, evaluated at
the valuation current at the sampling instant.  Sampling is inverse-CDF from
a single unit draw, so a replay with the same stream is bit-exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist
from typing import Mapping

import numpy as np

from .expr import Expr, eval_compiled, format_expr

_STD_NORMAL = NormalDist()


class ParameterError(ValueError):
    """A distribution parameter is outside its domain at the sampling valuation."""


class RngStream:
    """Reproducible uniform stream identified by ``(seed, index)``.

    Streams are PCG64 generators spawned from a :class:`numpy.random.SeedSequence`
    keyed on the stream index, so distinct indices are independent for
    practical purposes and a fixed pair always replays the same draws.
    """

    _BLOCK = 64

    def __init__(self, seed: int, index: int = 0):
        self.seed = int(seed)
        self.index = int(index)
        ss = np.random.SeedSequence(entropy=self.seed & ((1 << 64) - 1), spawn_key=(self.index,))
        self._gen = np.random.Generator(np.random.PCG64(ss))
        self._buf: list = []
        self._pos = 0
        self.draws = 0

    def random(self) -> float:
        """Next draw in [0, 1)."""
        if self._pos >= len(self._buf):
            self._buf = self._gen.random(self._BLOCK).tolist()
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        self.draws += 1
        return u

    def open_unit(self) -> float:
        """Next draw in the open interval (0, 1)."""
        u = self.random()
        while u == 0.0:
            u = self.random()
        return u

    def choice(self, n: int) -> int:
        return min(int(self.random() * n), n - 1)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, index={self.index})"


# distributions -----------------------------------------------------------

class Distribution:
    """Base class; concrete variants are frozen dataclasses below."""

    kind = ""

    def params(self) -> tuple:
        raise NotImplementedError

    def variables(self) -> frozenset:
        out: frozenset = frozenset()
        for p in self.params():
            out |= p.variables()
        return out

    def rename(self, mapping) -> "Distribution":
        return type(self)(*(p.rename(mapping) for p in self.params()))

    def substitute(self, mapping) -> "Distribution":
        return type(self)(*(p.substitute(mapping) for p in self.params()))

    def is_dirac(self) -> bool:
        return False

    def nonnegative_support(self) -> bool | None:
        """True/False when decidable from constant parameters, else None."""
        return None

    def __str__(self):
        return f"{self.kind}({', '.join(format_expr(p) for p in self.params())})"


@dataclass(frozen=True)
class Dirac(Distribution):
    point: Expr
    kind = "dirac"

    def params(self):
        return (self.point,)

    def is_dirac(self):
        return True

    def nonnegative_support(self):
        if self.point.is_constant():
            return self.point.constant() >= 0
        return None


@dataclass(frozen=True)
class Uniform(Distribution):
    lo: Expr
    hi: Expr
    kind = "uniform"

    def params(self):
        return (self.lo, self.hi)

    def nonnegative_support(self):
        if self.lo.is_constant():
            return self.lo.constant() >= 0
        return None


@dataclass(frozen=True)
class Normal(Distribution):
    mean: Expr
    variance: Expr
    kind = "normal"

    def params(self):
        return (self.mean, self.variance)

    def nonnegative_support(self):
        return False


@dataclass(frozen=True)
class FoldedNormal(Distribution):
    """``|X|`` for ``X ~ N(0, variance)``."""

    variance: Expr
    kind = "foldednormal"

    def params(self):
        return (self.variance,)

    def nonnegative_support(self):
        return True


def dirac(x) -> Dirac:
    return Dirac(Expr.lift(x))


def uniform(lo, hi) -> Uniform:
    return Uniform(Expr.lift(lo), Expr.lift(hi))


def normal(mean, variance) -> Normal:
    return Normal(Expr.lift(mean), Expr.lift(variance))


def folded_normal(variance) -> FoldedNormal:
    return FoldedNormal(Expr.lift(variance))


KINDS = {"dirac": Dirac, "uniform": Uniform, "normal": Normal, "foldednormal": FoldedNormal}
# same keys, but accepting numbers as well as expressions
MAKERS = {"dirac": dirac, "uniform": uniform, "normal": normal, "foldednormal": folded_normal}


# evaluation at a valuation -------------------------------------------------

def _params_at(d: Distribution, v: Mapping[str, float]) -> tuple:
    vals = tuple(p.evaluate(v) for p in d.params())
    _check_params(d.kind, vals)
    return vals


def _check_params(kind: str, vals: tuple):
    if kind == "uniform" and vals[0] > vals[1]:
        raise ParameterError(f"uniform lower bound {vals[0]} exceeds upper bound {vals[1]}")
    if kind == "normal" and not vals[1] > 0:
        raise ParameterError(f"normal variance must be positive, got {vals[1]}")
    if kind == "foldednormal" and not vals[0] > 0:
        raise ParameterError(f"folded-normal variance must be positive, got {vals[0]}")


def _draw(kind: str, vals: tuple, rng: RngStream) -> float:
    if kind == "dirac":
        return vals[0]
    if kind == "uniform":
        lo, hi = vals
        if lo == hi:
            return lo
        return lo + (hi - lo) * rng.random()
    z = _STD_NORMAL.inv_cdf(rng.open_unit())
    if kind == "normal":
        return vals[0] + math.sqrt(vals[1]) * z
    return abs(math.sqrt(vals[0]) * z)


def sample(d: Distribution, v: Mapping[str, float], rng: RngStream) -> float:
    """Draw one value of ``d`` with parameters evaluated at ``v``.

    Dirac draws consume nothing from ``rng``; the others consume one unit draw.
    """
    return _draw(d.kind, _params_at(d, v), rng)


def support_contains(d: Distribution, x: float, v: Mapping[str, float], tol: float = 0.0) -> bool:
    vals = tuple(p.evaluate(v) for p in d.params())
    if d.kind == "dirac":
        return abs(x - vals[0]) <= tol
    if d.kind == "uniform":
        return vals[0] - tol <= x <= vals[1] + tol
    if d.kind == "normal":
        return math.isfinite(x)
    return x >= -tol


def cdf(d: Distribution, x: float, v: Mapping[str, float]) -> float:
    vals = _params_at(d, v)
    if d.kind == "dirac":
        return 1.0 if x >= vals[0] else 0.0
    if d.kind == "uniform":
        lo, hi = vals
        if x < lo:
            return 0.0
        if x >= hi:
            return 1.0
        return (x - lo) / (hi - lo)
    if d.kind == "normal":
        mean, var = vals
        return 0.5 * math.erfc(-(x - mean) / math.sqrt(2.0 * var))
    if x < 0:
        return 0.0
    return math.erf(x / math.sqrt(2.0 * vals[0]))


class CompiledDist:
    """A distribution with parameters lowered against a variable index."""

    __slots__ = ("kind", "progs", "const_vals", "dist")

    def __init__(self, d: Distribution, index: Mapping[str, int]):
        self.dist = d
        self.kind = d.kind
        self.progs = tuple(p.compile(index) for p in d.params())
        if all(p.is_constant() for p in d.params()):
            self.const_vals = tuple(float(p.constant()) for p in d.params())
            _check_params(self.kind, self.const_vals)
        else:
            self.const_vals = None

    def sample(self, vals, rng: RngStream) -> float:
        pv = self.const_vals
        if pv is None:
            pv = tuple(eval_compiled(p, vals) for p in self.progs)
            _check_params(self.kind, pv)
        return _draw(self.kind, pv, rng)

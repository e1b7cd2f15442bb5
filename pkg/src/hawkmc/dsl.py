"""Line-oriented text formats.

``.hawk`` files describe one automaton directly, ``.blk`` files describe a
block diagram (blocks, wires, properties, settings) and ``.props`` files
hold properties only.  Each statement is a single line; ``#`` starts a
comment.  The full grammar is in ``docs/grammar.md``.

Parsers keep statement order (edge order matters to the ASAP scheduler);
printers emit the canonical order, so ``print_canonical(parse(text))`` is a
fixed point after one pass.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .automata import HAwK, Edge, Init, Location, ModelError, Template, Trigger, immediate_kernel, validate_hawk
from .blocks import BlockError, Call, Ident, format_value, full_params, instantiate, ports
from .composer import CompositionPlan, SyncMapping, resolve_all
from .expr import TRUE, Atom, Expr, OPS, Predicate, flow_from_expr, fmt_num, format_expr
from .kernels import KINDS, Distribution
from .smc import Property


class DslError(ModelError):
    """Problem in a text file, with its position."""

    def __init__(self, message: str, line: int = 0, column: int = 0, source: str = ""):
        self.message, self.line, self.column, self.source = message, line, column, source
        where = f"{source}:" if source else ""
        pos = f"{where}{line}:{column}: " if line else where + (" " if where else "")
        super().__init__(f"{pos}{message}")


class ParseError(DslError):
    """Syntax error."""


class ResolveError(DslError):
    """Reference to an undeclared block, port, location or label."""


class DoubleDriveError(ResolveError):
    """Two sources for one signal, or one input port wired twice."""


class ValidationError(ModelError):
    """The parsed automaton fails structural validation."""

    def __init__(self, violations, source: str = ""):
        self.violations = list(violations)
        head = f"{source}: " if source else ""
        body = "; ".join(f"{v.kind}: {v.message}" for v in self.violations)
        super().__init__(f"{head}invalid automaton: {body}")


# lexer -------------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<num>\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_.|]*'?)
  | (?P<sym>:=|->|<>|<=|>=|==|[<>=()\[\],:~+\-*/&])
""", re.VERBOSE)


@dataclass(frozen=True)
class Tok:
    kind: str
    text: str
    col: int


def _tokenize(line: str, lineno: int, source: str) -> list:
    out, pos = [], 0
    text = line.split("#", 1)[0]
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", lineno, pos + 1, source)
        if m.lastgroup != "ws":
            out.append(Tok(m.lastgroup, m.group(), pos + 1))
        pos = m.end()
    return out


# words that end an expression, so they cannot name variables
_RESERVED = frozenset({"urgent", "inv", "flow", "trigger", "guard", "reset", "kernel", "send", "recv",
                       "with", "when", "within", "true"})


class _Line:
    def __init__(self, toks, lineno, source, width):
        self.toks, self.i, self.lineno, self.source, self.width = toks, 0, lineno, source, width

    def error(self, msg, tok=None, cls=ParseError):
        tok = tok or self.peek()
        col = tok.col if tok else self.width + 1
        return cls(msg, self.lineno, col, self.source)

    def peek(self, k=0):
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def at_end(self):
        return self.i >= len(self.toks)

    def next(self):
        t = self.peek()
        if t is None:
            raise self.error("unexpected end of line")
        self.i += 1
        return t

    def is_sym(self, s):
        t = self.peek()
        return t is not None and t.kind == "sym" and t.text == s

    def is_word(self, w):
        t = self.peek()
        return t is not None and t.kind == "name" and t.text == w

    def accept_sym(self, s):
        if self.is_sym(s):
            self.i += 1
            return True
        return False

    def accept_word(self, w):
        if self.is_word(w):
            self.i += 1
            return True
        return False

    def expect_sym(self, s):
        if not self.accept_sym(s):
            t = self.peek()
            raise self.error(f"expected {s!r}, found {t.text if t else 'end of line'!r}")

    def expect_word(self, w):
        if not self.accept_word(w):
            t = self.peek()
            raise self.error(f"expected {w!r}, found {t.text if t else 'end of line'!r}")

    def name(self, what="name"):
        t = self.peek()
        if t is None or t.kind != "name" or t.text.endswith("'"):
            raise self.error(f"expected {what}, found {t.text if t else 'end of line'!r}")
        if what == "variable" and t.text in _RESERVED:
            raise self.error(f"{t.text!r} is a keyword and cannot be used as a variable")
        self.i += 1
        return t.text

    def names(self, what="name"):
        out = [self.name(what)]
        while self.accept_sym(","):
            out.append(self.name(what))
        return out

    def done(self):
        if not self.at_end():
            raise self.error(f"unexpected {self.peek().text!r}")

    # numbers and expressions ------------------------------------------------
    def number(self) -> Fraction:
        neg = self.accept_sym("-")
        t = self.next()
        if t.kind != "num":
            raise self.error(f"expected a number, found {t.text!r}", t)
        q = Fraction(t.text)
        if self.accept_sym("/"):
            d = self.next()
            if d.kind != "num" or Fraction(d.text) == 0:
                raise self.error("expected a nonzero denominator", d)
            q /= Fraction(d.text)
        return -q if neg else q

    def expr(self, primes=False) -> Expr:
        e = self._term(primes)
        while True:
            if self.accept_sym("+"):
                e = e + self._term(primes)
            elif self.accept_sym("-"):
                e = e - self._term(primes)
            else:
                return e

    def _term(self, primes):
        e = self._unary(primes)
        while True:
            if self.accept_sym("*"):
                e = e * self._unary(primes)
            elif self.is_sym("/"):
                tok = self.next()
                d = self._unary(primes)
                if not d.is_constant() or d.constant() == 0:
                    raise self.error("division is only allowed by a nonzero constant", tok)
                e = e / d.constant()
            else:
                return e

    def _unary(self, primes):
        if self.accept_sym("-"):
            return -self._unary(primes)
        if self.accept_sym("+"):
            return self._unary(primes)
        t = self.peek()
        if t is None:
            raise self.error("expected an expression")
        if self.accept_sym("("):
            e = self.expr(primes)
            self.expect_sym(")")
            return e
        if t.kind == "num":
            self.i += 1
            return Expr.const(Fraction(t.text))
        if t.kind == "name":
            if t.text.endswith("'") and not primes:
                raise self.error("derivatives are only allowed on the right of a flow", t)
            if t.text in _RESERVED:
                raise self.error(f"keyword {t.text!r} where an expression was expected", t)
            self.i += 1
            return Expr.var(t.text)
        raise self.error(f"expected an expression, found {t.text!r}", t)

    def atom(self) -> Atom:
        start = self.peek()
        lhs = self.expr()
        t = self.peek()
        if t is None or t.kind != "sym" or t.text not in OPS:
            raise self.error("expected a comparison (<, <=, ==, >=, >)")
        self.i += 1
        rhs = self.expr()
        a = Atom.compare(lhs, t.text, rhs)
        if not a.expr.is_affine():
            raise self.error("comparisons must be affine", start)
        return a

    def predicate(self) -> Predicate:
        if self.accept_word("true"):
            return TRUE
        atoms = [self.atom()]
        while self.accept_sym("&"):
            atoms.append(self.atom())
        return Predicate(tuple(atoms))

    def dist(self) -> Distribution:
        t = self.peek()
        kind = t.text if t is not None and t.kind == "name" else None
        if kind not in KINDS:
            raise self.error(f"expected a distribution ({', '.join(KINDS)})")
        self.i += 1
        self.expect_sym("(")
        args = [self.expr()]
        while self.accept_sym(","):
            args.append(self.expr())
        self.expect_sym(")")
        try:
            return KINDS[kind](*args)
        except TypeError:
            raise self.error(f"wrong number of arguments for {kind}", t) from None

    def value(self):
        """Block parameter value: number, word, call or list."""
        if self.accept_sym("["):
            items = []
            if not self.is_sym("]"):
                items.append(self.value())
                while self.accept_sym(","):
                    items.append(self.value())
            self.expect_sym("]")
            return tuple(items)
        t = self.peek()
        if t is not None and (t.kind == "num" or (t.kind == "sym" and t.text == "-")):
            return self.number()
        w = self.name("value")
        if self.accept_sym("("):
            args = []
            if not self.is_sym(")"):
                args.append(self.value())
                while self.accept_sym(","):
                    args.append(self.value())
            self.expect_sym(")")
            return Call(w, tuple(args))
        return Ident(w)


def _lines(text: str, source: str):
    for n, raw in enumerate(text.splitlines(), 1):
        toks = _tokenize(raw, n, source)
        if toks:
            yield _Line(toks, n, source, len(raw.split("#", 1)[0].rstrip()))


# automaton files ---------------------------------------------------------------

_TRIGGERS = {t.value: t for t in Trigger}


def parse_automaton(text: str, source: str = "", validate: bool = True) -> HAwK:
    """Parse a ``.hawk`` file.  Raises :class:`ValidationError` if the result is invalid."""
    name = None
    variables, inputs, outputs = [], None, None
    delays: dict = {}
    locs, edges, init = [], [], None
    edge_lines = []
    for ln in _lines(text, source):
        kw = ln.next()
        word = kw.text if kw.kind == "name" else None
        if word == "automaton":
            if name is not None:
                raise ln.error("automaton name given twice", kw)
            name = ln.name("automaton name")
        elif word == "var":
            variables += ln.names("variable")
        elif word in ("input", "output"):
            got = ln.names("variable")
            if word == "input":
                inputs = (inputs or []) + got
            else:
                outputs = (outputs or []) + got
        elif word == "label":
            lab = ln.name("label")
            ln.expect_word("delay")
            if lab in delays:
                raise ln.error(f"delay of label {lab} given twice", kw)
            delays[lab] = ln.dist()
        elif word == "loc":
            locs.append(_parse_loc(ln))
        elif word == "edge":
            edges.append(_parse_edge(ln))
            edge_lines.append(ln.lineno)
        elif word == "init":
            if init is not None:
                raise ln.error("init given twice", kw)
            init = _parse_init(ln)
        else:
            raise ln.error(f"unknown statement {kw.text!r}", kw)
        ln.done()
    if name is None:
        raise ParseError("missing 'automaton NAME' statement", 1, 1, source)
    if not locs:
        raise ParseError("automaton has no locations", 1, 1, source)
    if init is None:
        raise ParseError("missing 'init' statement", 1, 1, source)
    declared = {l.name for l in locs}
    for e, n in zip(edges, edge_lines):
        for end in (e.source, e.target):
            if end not in declared:
                raise ResolveError(f"edge refers to undeclared location {end}", n, 1, source)
        if e.label not in delays and e.trigger is not Trigger.STOCHASTIC:
            delays[e.label] = immediate_kernel()
    if init.location not in declared:
        raise ResolveError(f"init refers to undeclared location {init.location}", 1, 1, source)
    kw = dict(name=name, variables=tuple(variables), locations=tuple(locs), edges=tuple(edges),
              init=init, delay_kernels=delays)
    if inputs is not None or outputs is not None:
        a = Template(inputs=tuple(inputs or ()), outputs=tuple(outputs or ()), **kw)
    else:
        a = HAwK(**kw)
    if validate:
        found = validate_hawk(a)
        if isinstance(a, Template):
            from .templates import validate_template
            found = validate_template(a)
        if found:
            raise ValidationError(found, source)
    return a


def _parse_loc(ln: _Line) -> Location:
    name = ln.name("location")
    urgent, inv, flow = False, TRUE, {}
    seen = set()
    while not ln.at_end():
        t = ln.peek()
        if t.text in seen:
            raise ln.error(f"clause {t.text!r} given twice")
        if ln.accept_word("urgent"):
            urgent = True
        elif ln.accept_word("inv"):
            inv = ln.predicate()
        elif ln.accept_word("flow"):
            while True:
                tok = ln.next()
                if tok.kind != "name" or not tok.text.endswith("'"):
                    raise ln.error(f"expected x' on the left of a flow, found {tok.text!r}", tok)
                v = tok.text[:-1]
                if v in flow:
                    raise ln.error(f"flow of {v} given twice", tok)
                ln.expect_sym("=")
                try:
                    flow[v] = flow_from_expr(ln.expr(primes=True))
                except ValueError as exc:
                    raise ln.error(str(exc), tok) from None
                if not ln.accept_sym(","):
                    break
        else:
            raise ln.error(f"unexpected {t.text!r} in location statement")
        seen.add(t.text)
    return Location(name, urgent, flow, inv)


def _parse_edge(ln: _Line) -> Edge:
    src = ln.name("location")
    ln.expect_sym("->")
    tgt = ln.name("location")
    ln.expect_word("label")
    lab = ln.name("label")
    guard, reset, kernels, trig = TRUE, {}, {}, Trigger.STOCHASTIC
    send, recv = frozenset(), frozenset()
    seen = set()
    while not ln.at_end():
        t = ln.peek()
        if t.text in seen:
            raise ln.error(f"clause {t.text!r} given twice")
        if ln.accept_word("trigger"):
            w = ln.next()
            if w.text not in _TRIGGERS:
                raise ln.error(f"trigger must be one of {', '.join(_TRIGGERS)}", w)
            trig = _TRIGGERS[w.text]
        elif ln.accept_word("guard"):
            guard = ln.predicate()
        elif ln.accept_word("reset"):
            while True:
                v = ln.name("variable")
                ln.expect_sym(":=")
                if v in reset:
                    raise ln.error(f"{v} reset twice")
                reset[v] = ln.expr()
                if not ln.accept_sym(","):
                    break
        elif ln.accept_word("kernel"):
            while True:
                v = ln.name("variable")
                ln.expect_sym("~")
                kernels[v] = ln.dist()
                if not ln.accept_sym(","):
                    break
        elif ln.accept_word("send"):
            send = frozenset(ln.names("variable"))
        elif ln.accept_word("recv"):
            recv = frozenset(ln.names("variable"))
        else:
            raise ln.error(f"unexpected {t.text!r} in edge statement")
        seen.add(t.text)
    return Edge(src, lab, tgt, guard, reset, kernels, trig, send, recv)


def _parse_init(ln: _Line) -> Init:
    loc = ln.name("location")
    values, cond = {}, TRUE
    if ln.accept_word("with"):
        while True:
            v = ln.name("variable")
            ln.expect_sym("=")
            values[v] = ln.expr()
            if not ln.accept_sym(","):
                break
    if ln.accept_word("when"):
        cond = ln.predicate()
    return Init(loc, values, cond)


def _print_hawk(a: HAwK) -> str:
    a = a.canonical()
    out = [f"automaton {a.name}"]
    if a.variables:
        out.append("var " + ", ".join(a.variables))
    if isinstance(a, Template):
        if a.inputs:
            out.append("input " + ", ".join(sorted(a.inputs)))
        if a.outputs:
            out.append("output " + ", ".join(sorted(a.outputs)))
    for lab in a.labels:
        out.append(f"label {lab} delay {a.delay_kernels[lab]}")
    for l in a.locations:
        s = f"loc {l.name}"
        if l.urgent:
            s += " urgent"
        if not l.invariant.is_true():
            s += f" inv {l.invariant}"
        flows = [(v, f) for v, f in sorted(l.flow.items()) if not f.is_zero()]
        if flows:
            s += " flow " + ", ".join(f"{v}' = {f}" for v, f in flows)
        out.append(s)
    for e in a.edges:
        s = f"edge {e.source} -> {e.target} label {e.label}"
        if e.trigger is not Trigger.STOCHASTIC:
            s += f" trigger {e.trigger.value}"
        if not e.guard.is_true():
            s += f" guard {e.guard}"
        if e.reset:
            s += " reset " + ", ".join(f"{v} := {format_expr(x)}" for v, x in sorted(e.reset.items()))
        if e.kernels:
            s += " kernel " + ", ".join(f"{v} ~ {d}" for v, d in sorted(e.kernels.items()))
        if e.send:
            s += " send " + ", ".join(sorted(e.send))
        if e.recv:
            s += " recv " + ", ".join(sorted(e.recv))
        out.append(s)
    s = f"init {a.init.location}"
    if a.init.values:
        s += " with " + ", ".join(f"{v} = {format_expr(x)}" for v, x in sorted(a.init.values.items()))
    if not a.init.condition.is_true():
        s += f" when {a.init.condition}"
    out.append(s)
    return "\n".join(out) + "\n"


# model and property files ------------------------------------------------------

@dataclass(frozen=True)
class BlockDecl:
    kind: str
    name: str
    params: tuple = ()  # sorted (key, value) pairs
    line: int = field(default=0, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(sorted(self.params)))

    def param_dict(self) -> dict:
        return dict(self.params)


@dataclass(frozen=True)
class WireDecl:
    signal: str
    source: tuple  # (block, port)
    sinks: tuple = ()  # sorted (block, port) pairs
    line: int = field(default=0, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "sinks", tuple(sorted(self.sinks)))


@dataclass(frozen=True)
class PropDecl:
    name: str
    predicate: Predicate
    horizon: Fraction
    line: int = field(default=0, compare=False)

    def to_property(self) -> Property:
        return Property(self.predicate, float(self.horizon), self.name)


_SETTINGS = {"scheduler": ("uniform", "asap"), "seed": None}


@dataclass(frozen=True)
class PropertyFile:
    props: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "props", tuple(sorted(self.props, key=lambda p: p.name)))

    def properties(self) -> list:
        return [p.to_property() for p in self.props]


@dataclass(frozen=True)
class ModelFile:
    name: str
    blocks: tuple = ()
    wires: tuple = ()
    props: tuple = ()
    settings: tuple = ()  # sorted (key, value) pairs

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(sorted(self.blocks, key=lambda b: b.name)))
        object.__setattr__(self, "wires", tuple(sorted(self.wires, key=lambda w: w.signal)))
        object.__setattr__(self, "props", tuple(sorted(self.props, key=lambda p: p.name)))
        object.__setattr__(self, "settings", tuple(sorted(self.settings)))

    def setting(self, key: str, default=None):
        return dict(self.settings).get(key, default)

    def properties(self) -> list:
        return [p.to_property() for p in self.props]

    def plan(self) -> CompositionPlan:
        signals: dict = {b.name: {} for b in self.blocks}
        for w in self.wires:
            signals[w.source[0]][w.source[1]] = w.signal
            for blk, port in w.sinks:
                signals[blk][port] = w.signal
        templates = {b.name: instantiate(b.kind, b.name, b.param_dict(), signals[b.name]) for b in self.blocks}
        mappings = [SyncMapping(w.signal, w.source[0], frozenset(b for b, _ in w.sinks)) for w in self.wires]
        return CompositionPlan(templates, mappings)

    def compose(self, prune: bool = True) -> HAwK:
        return resolve_all(self.plan(), prune=prune, name=self.name)


def _parse_prop(ln: _Line) -> PropDecl:
    name = ln.name("property name")
    ln.expect_sym(":")
    ln.expect_sym("<>")
    pred = ln.predicate()
    ln.expect_word("within")
    tok = ln.peek()
    h = ln.number()
    if h <= 0:
        raise ln.error("property horizon must be positive", tok)
    return PropDecl(name, pred, h, ln.lineno)


def _port_ref(ln: _Line):
    tok = ln.peek()
    ref = ln.name("block.port")
    blk, dot, port = ref.rpartition(".")
    if not dot or not blk:
        raise ln.error(f"expected block.port, found {ref!r}", tok)
    return blk, port, tok


def parse_props(text: str, source: str = "") -> PropertyFile:
    props = []
    for ln in _lines(text, source):
        kw = ln.next()
        if kw.text != "prop":
            raise ln.error(f"expected 'prop', found {kw.text!r}", kw)
        props.append(_parse_prop(ln))
        ln.done()
    _unique([p.name for p in props], "property", [p.line for p in props], source)
    return PropertyFile(tuple(props))


def _unique(names, what, lines, source):
    seen = set()
    for n, line in zip(names, lines):
        if n in seen:
            raise ParseError(f"{what} {n} declared twice", line, 1, source)
        seen.add(n)


def parse_model(text: str, source: str = "") -> ModelFile:
    """Parse a ``.blk`` file and resolve every block, port and wire."""
    name = None
    blocks, wires, props, settings = [], [], [], {}
    refs = []  # (wire index, block, port, token, line, is_source)
    for ln in _lines(text, source):
        kw = ln.next()
        word = kw.text if kw.kind == "name" else None
        if word == "model":
            if name is not None:
                raise ln.error("model name given twice", kw)
            name = ln.name("model name")
        elif word == "setting":
            tok = ln.peek()
            key = ln.name("setting")
            if key not in _SETTINGS:
                raise ln.error(f"unknown setting {key!r}; known: {', '.join(_SETTINGS)}", tok)
            if key == "seed":
                v = ln.number()
                if v.denominator != 1 or v < 0:
                    raise ln.error("seed must be a non-negative integer", tok)
                settings[key] = int(v)
            else:
                w = ln.name(key)
                if w not in _SETTINGS[key]:
                    raise ln.error(f"{key} must be one of {', '.join(_SETTINGS[key])}", tok)
                settings[key] = w
        elif word == "block":
            kind = ln.name("block kind")
            bname = ln.name("block name")
            params = {}
            if ln.accept_sym("("):
                if not ln.is_sym(")"):
                    while True:
                        tok = ln.peek()
                        k = ln.name("parameter")
                        ln.expect_sym("=")
                        if k in params:
                            raise ln.error(f"parameter {k} given twice", tok)
                        params[k] = ln.value()
                        if not ln.accept_sym(","):
                            break
                ln.expect_sym(")")
            try:
                full_params(kind, params)
            except BlockError as exc:
                raise ResolveError(str(exc), ln.lineno, kw.col, source) from None
            blocks.append(BlockDecl(kind, bname, tuple(params.items()), ln.lineno))
        elif word == "wire":
            sig = ln.name("signal")
            ln.expect_sym(":")
            sb, sp, stok = _port_ref(ln)
            refs.append((sb, sp, stok, ln.lineno, True))
            sinks = []
            while ln.accept_sym("->") or (sinks and ln.accept_sym(",")):
                b, p, tok = _port_ref(ln)
                refs.append((b, p, tok, ln.lineno, False))
                sinks.append((b, p))
            if len(set(sinks)) != len(sinks):
                raise ln.error(f"signal {sig} lists the same sink twice")
            if any(w.signal == sig for w in wires):
                raise DoubleDriveError(f"signal {sig} has more than one source", ln.lineno, kw.col, source)
            wires.append(WireDecl(sig, (sb, sp), tuple(sinks), ln.lineno))
        elif word == "prop":
            props.append(_parse_prop(ln))
        else:
            raise ln.error(f"unknown statement {kw.text!r}", kw)
        ln.done()
    if name is None:
        raise ParseError("missing 'model NAME' statement", 1, 1, source)
    _unique([b.name for b in blocks], "block", [b.line for b in blocks], source)
    _unique([p.name for p in props], "property", [p.line for p in props], source)
    kinds = {b.name: b for b in blocks}
    driven: dict = {}
    for b, p, tok, line, is_src in refs:
        if b not in kinds:
            raise ResolveError(f"unknown block {b}", line, tok.col, source)
        ins, outs = ports(kinds[b].kind, kinds[b].param_dict())
        if is_src and p not in outs:
            raise ResolveError(f"{b} ({kinds[b].kind}) has no output port {p}; outputs: {', '.join(outs)}",
                               line, tok.col, source)
        if not is_src:
            if p not in ins:
                raise ResolveError(f"{b} ({kinds[b].kind}) has no input port {p}; inputs: "
                                   f"{', '.join(ins) or 'none'}", line, tok.col, source)
            if (b, p) in driven:
                raise DoubleDriveError(f"input {b}.{p} is wired twice", line, tok.col, source)
            driven[(b, p)] = True
    for w in wires:
        readers = [b for b, _ in w.sinks]
        dup = {b for b in readers if readers.count(b) > 1}
        if dup:
            raise ResolveError(f"block {sorted(dup)[0]} reads signal {w.signal} on two ports", w.line, 1, source)
    for blk in blocks:
        ins, _ = ports(blk.kind, blk.param_dict())
        for p in ins:
            if (blk.name, p) not in driven:
                raise ResolveError(f"input {blk.name}.{p} is not wired", blk.line, 1, source)
    return ModelFile(name, tuple(blocks), tuple(wires), tuple(props), tuple(settings.items()))


def _print_prop(p: PropDecl) -> str:
    return f"prop {p.name}: <> {p.predicate} within {fmt_num(p.horizon)}"


def _print_model(m: ModelFile) -> str:
    out = [f"model {m.name}"]
    out += [f"setting {k} {v}" for k, v in m.settings]
    for b in m.blocks:
        s = f"block {b.kind} {b.name}"
        if b.params:
            s += "(" + ", ".join(f"{k}={format_value(v)}" for k, v in b.params) + ")"
        out.append(s)
    for w in m.wires:
        s = f"wire {w.signal}: {w.source[0]}.{w.source[1]}"
        if w.sinks:
            s += " -> " + ", ".join(f"{b}.{p}" for b, p in w.sinks)
        out.append(s)
    out += [_print_prop(p) for p in m.props]
    return "\n".join(out) + "\n"


def print_canonical(x) -> str:
    """Canonical text of a model, property file or automaton."""
    if isinstance(x, ModelFile):
        return _print_model(x)
    if isinstance(x, PropertyFile):
        return "".join(_print_prop(p) + "\n" for p in x.props)
    if isinstance(x, HAwK):
        return _print_hawk(x)
    raise TypeError(f"cannot print {type(x).__name__}")

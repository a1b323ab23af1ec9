"""Streaming string register transducers with origin semantics.

A machine reads ``(letter, value)`` pairs.  Registers hold single values and
are only compared for equality with the value being read; variables hold
origin words and are updated by copyless concatenation templates.  Every
output triple written while reading position ``i`` carries origin ``i``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, NamedTuple, Sequence, Union

from .core_words import DataWord, OriginWord

CURR = None  # source of an ``Out`` element reading the current value


# -- guards -------------------------------------------------------------------


@dataclass(frozen=True)
class Eq:
    reg: str


@dataclass(frozen=True)
class Neq:
    reg: str


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Not:
    arg: "Guard"


@dataclass(frozen=True)
class And:
    args: tuple["Guard", ...]


@dataclass(frozen=True)
class Or:
    args: tuple["Guard", ...]


Guard = Union[Eq, Neq, Const, Not, And, Or]
TRUE = Const(True)
FALSE = Const(False)


def conj(args: Iterable[Guard]) -> Guard:
    args = tuple(args)
    if not args:
        return TRUE
    return args[0] if len(args) == 1 else And(args)


def _holds(g: Guard, equal: frozenset[str] | set[str]) -> bool:
    """Evaluate ``g`` given the registers whose content equals the current value."""
    if isinstance(g, Eq):
        return g.reg in equal
    if isinstance(g, Neq):
        return g.reg not in equal
    if isinstance(g, Const):
        return g.value
    if isinstance(g, Not):
        return not _holds(g.arg, equal)
    if isinstance(g, And):
        return all(_holds(a, equal) for a in g.args)
    return any(_holds(a, equal) for a in g.args)


def guard_registers(g: Guard) -> set[str]:
    if isinstance(g, (Eq, Neq)):
        return {g.reg}
    if isinstance(g, Const):
        return set()
    if isinstance(g, Not):
        return guard_registers(g.arg)
    return set().union(*(guard_registers(a) for a in g.args))


def format_guard(g: Guard) -> str:
    if isinstance(g, Eq):
        return f"{g.reg}="
    if isinstance(g, Neq):
        return f"{g.reg}!="
    if isinstance(g, Const):
        return "true" if g.value else "false"
    if isinstance(g, Not):
        inner = format_guard(g.arg)
        return f"!{inner}" if isinstance(g.arg, (Eq, Neq, Const, Not)) else f"!({inner})"
    op = " & " if isinstance(g, And) else " | "
    parts = []
    for a in g.args:
        s = format_guard(a)
        parts.append(f"({s})" if isinstance(a, (And, Or)) else s)
    return op.join(parts)


# -- updates and configurations -------------------------------------------------


class Var(NamedTuple):
    name: str


class Out(NamedTuple):
    letter: str
    source: str | None  # register name, or CURR


Element = Union[Var, Out]
Rhs = tuple[Element, ...]


@dataclass(frozen=True)
class Transition:
    source: str
    letter: str
    guard: Guard
    target: str
    store: frozenset[str] = frozenset()
    update: Mapping[str, Rhs] = field(default_factory=dict)
    line: int | None = field(default=None, compare=False)

    def rhs(self, x: str) -> Rhs:
        """Right-hand side for ``x``; unlisted variables keep their value."""
        return self.update.get(x, (Var(x),))


@dataclass(frozen=True)
class Ssrt:
    input_alphabet: tuple[str, ...]
    output_alphabet: tuple[str, ...]
    states: tuple[str, ...]
    initial: str
    registers: tuple[str, ...]
    variables: tuple[str, ...]
    output: Mapping[str, Rhs]
    transitions: tuple[Transition, ...]
    comments: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        index: dict[tuple[str, str], list[Transition]] = {}
        for t in self.transitions:
            index.setdefault((t.source, t.letter), []).append(t)
        object.__setattr__(self, "_index", index)

    def outgoing(self, state: str, letter: str) -> list[Transition]:
        return self._index.get((state, letter), [])  # type: ignore[attr-defined]


@dataclass(frozen=True)
class Configuration:
    state: str
    regs: Mapping[str, int]
    vars: Mapping[str, OriginWord]
    count: int = 0

    def var(self, x: str) -> OriginWord:
        return self.vars.get(x, ())


class UndefinedRegisterError(RuntimeError):
    """An update or output read a register that was never written."""


class NondeterminismError(RuntimeError):
    pass


def initial_configuration(m: Ssrt) -> Configuration:
    return Configuration(m.initial, {}, {x: () for x in m.variables}, 0)


def guard_eval(g: Guard, regs: Mapping[str, int], d: int) -> bool:
    """``Eq(r)`` holds iff ``r`` is defined and equal to ``d``; ``Neq(r)`` otherwise."""
    return _holds(g, {r for r, v in regs.items() if v == d})


def _read(regs: Mapping[str, int], r: str) -> int:
    try:
        return regs[r]
    except KeyError:
        raise UndefinedRegisterError(f"register {r} read before being written") from None


def _instantiate(rhs: Rhs, vars: Mapping[str, OriginWord], regs: Mapping[str, int], d, origin: int) -> OriginWord:
    out: list = []
    for e in rhs:
        if isinstance(e, Var):
            out.extend(vars.get(e.name, ()))
        elif e.source is CURR:
            if d is None:
                raise UndefinedRegisterError("curr read on the empty word")
            out.append((e.letter, d, origin))
        else:
            out.append((e.letter, _read(regs, e.source), origin))
    return tuple(out)


def enabled(m: Ssrt, c: Configuration, letter: str, d: int) -> list[Transition]:
    equal = {r for r, v in c.regs.items() if v == d}
    return [t for t in m.outgoing(c.state, letter) if _holds(t.guard, equal)]


def step(m: Ssrt, c: Configuration, sym: tuple[str, int]) -> Configuration | None:
    """Successor configuration, or ``None`` when no transition is enabled."""
    letter, d = sym
    ts = enabled(m, c, letter, d)
    if not ts:
        return None
    if len(ts) > 1:
        raise NondeterminismError(f"{len(ts)} transitions enabled in {c.state} on {letter}")
    t = ts[0]
    n = c.count + 1
    new_vars = {x: _instantiate(t.rhs(x), c.vars, c.regs, d, n) for x in m.variables}
    regs = dict(c.regs)
    for r in t.store:
        regs[r] = d
    return Configuration(t.target, regs, new_vars, n)


def run(m: Ssrt, w: DataWord) -> Configuration | None:
    c: Configuration | None = initial_configuration(m)
    for sym in w:
        c = step(m, c, sym)
        if c is None:
            return None
    return c


def output_of(m: Ssrt, c: Configuration, last: int | None) -> OriginWord | None:
    if c.state not in m.output:
        return None
    return _instantiate(m.output[c.state], c.vars, c.regs, last, c.count)


def transduce(m: Ssrt, w: DataWord) -> OriginWord | None:
    """Output of ``m`` on ``w``; ``None`` if the run is stuck or the output undefined."""
    c = run(m, w)
    if c is None:
        return None
    return output_of(m, c, w[-1][1] if w else None)


def run_trace(m: Ssrt, w: DataWord) -> list[Configuration]:
    """Configurations after each prefix of ``w``; stops early if stuck."""
    c = initial_configuration(m)
    trace = [c]
    for sym in w:
        nxt = step(m, c, sym)
        if nxt is None:
            break
        trace.append(nxt)
        c = nxt
    return trace


# -- validation -----------------------------------------------------------------


def _where(t: Transition) -> str:
    loc = f"line {t.line}: " if t.line is not None else ""
    return f"{loc}transition {t.source} --{t.letter}--> {t.target}"


def copy_violations(t: Transition, variables: Sequence[str]) -> list[str]:
    counts: dict[str, int] = {}
    for x in variables:
        for e in t.rhs(x):
            if isinstance(e, Var):
                counts[e.name] = counts.get(e.name, 0) + 1
    return [f"{_where(t)}: variable {x} copied {k} times" for x, k in counts.items() if k > 1]


def _rhs_references(rhs: Rhs, m: Ssrt, where: str) -> list[str]:
    errs = []
    for e in rhs:
        if isinstance(e, Var) and e.name not in m.variables:
            errs.append(f"{where}: undeclared variable {e.name}")
        if isinstance(e, Out):
            if e.letter not in m.output_alphabet:
                errs.append(f"{where}: undeclared output letter {e.letter}")
            if e.source is not CURR and e.source not in m.registers:
                errs.append(f"{where}: undeclared register {e.source}")
    return errs


def validate(m: Ssrt) -> list[str]:
    """All violations of the machine's well-formedness conditions, in a stable order."""
    errs: list[str] = []
    if m.initial not in m.states:
        errs.append(f"initial state {m.initial} not declared")
    for q, rhs in m.output.items():
        where = f"output of {q}"
        if q not in m.states:
            errs.append(f"{where}: undeclared state {q}")
        errs.extend(_rhs_references(rhs, m, where))
        names = [e.name for e in rhs if isinstance(e, Var)]
        for x in sorted(set(names)):
            if names.count(x) > 1:
                errs.append(f"{where}: variable {x} occurs {names.count(x)} times")
    for t in m.transitions:
        where = _where(t)
        for q in (t.source, t.target):
            if q not in m.states:
                errs.append(f"{where}: undeclared state {q}")
        if t.letter not in m.input_alphabet:
            errs.append(f"{where}: undeclared input letter {t.letter}")
        for r in sorted(guard_registers(t.guard) | set(t.store)):
            if r not in m.registers:
                errs.append(f"{where}: undeclared register {r}")
        for x, rhs in t.update.items():
            if x not in m.variables:
                errs.append(f"{where}: update of undeclared variable {x}")
            errs.extend(_rhs_references(rhs, m, where))
        errs.extend(copy_violations(t, m.variables))
    errs.extend(determinism_violations(m))
    return errs


def determinism_violations(m: Ssrt) -> list[str]:
    """Pairs of transitions with a common source and letter whose guards can both hold.

    Every assignment of truth values to the atoms ``Eq(r)`` is realizable, so
    enumerating them decides co-satisfiability exactly.
    """
    errs = []
    groups: dict[tuple[str, str], list[Transition]] = {}
    for t in m.transitions:
        groups.setdefault((t.source, t.letter), []).append(t)
    for ts in groups.values():
        regs = sorted(set().union(*(guard_registers(t.guard) for t in ts)))
        for t1, t2 in itertools.combinations(ts, 2):
            for bits in itertools.product((False, True), repeat=len(regs)):
                equal = {r for r, b in zip(regs, bits) if b}
                if _holds(t1.guard, equal) and _holds(t2.guard, equal):
                    shown = ", ".join(f"{r}={'eq' if b else 'neq'}" for r, b in zip(regs, bits)) or "always"
                    errs.append(f"{_where(t1)} and {_where(t2)} both enabled when {shown}")
                    break
    return errs


def static_blowup_bound(m: Ssrt) -> int:
    """Upper bound on output triples sharing one origin."""
    def outs(rhs: Rhs) -> int:
        return sum(isinstance(e, Out) for e in rhs)

    per_step = max((sum(outs(t.rhs(x)) for x in m.variables) for t in m.transitions), default=0)
    at_end = max((outs(rhs) for rhs in m.output.values()), default=0)
    return per_step + at_end


# -- text format ------------------------------------------------------------------


class MachineFormatError(ValueError):
    def __init__(self, line: int | None, msg: str) -> None:
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


_IDENT = r"[A-Za-z_][A-Za-z0-9_.#\[\]'-]*"
_SECTIONS = ("alphabets", "states", "registers", "vars", "output", "transitions")


def format_rhs(rhs: Rhs) -> str:
    if not rhs:
        return "EPS"
    return " ".join(
        "{" + e.name + "}" if isinstance(e, Var) else f"{e.letter}:{{{'curr' if e.source is CURR else e.source}}}"
        for e in rhs
    )


def parse_rhs(text: str, line: int | None = None) -> Rhs:
    text = text.strip()
    if text in ("", "EPS"):
        return ()
    out: list[Element] = []
    for tok in text.split():
        m = re.fullmatch(r"\{([^{}\s]+)\}", tok)
        if m:
            out.append(Var(m.group(1)))
            continue
        m = re.fullmatch(r"([^\s:{}]+):\{([^{}\s]+)\}", tok)
        if m:
            src = m.group(2)
            out.append(Out(m.group(1), CURR if src == "curr" else src))
            continue
        raise MachineFormatError(line, f"bad template token {tok!r}")
    return tuple(out)


def parse_guard(text: str, line: int | None = None) -> Guard:
    tokens = re.findall(r"!=|[()&|!=]|[^\s()&|!=]+", text)
    pos = 0

    def peek() -> str | None:
        return tokens[pos] if pos < len(tokens) else None

    def take() -> str:
        nonlocal pos
        if pos >= len(tokens):
            raise MachineFormatError(line, f"unexpected end of guard {text!r}")
        pos += 1
        return tokens[pos - 1]

    def expr() -> Guard:
        parts = [term()]
        while peek() == "|":
            take()
            parts.append(term())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def term() -> Guard:
        parts = [factor()]
        while peek() == "&":
            take()
            parts.append(factor())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def factor() -> Guard:
        tok = take()
        if tok == "!":
            return Not(factor())
        if tok == "(":
            g = expr()
            if take() != ")":
                raise MachineFormatError(line, f"unbalanced parentheses in {text!r}")
            return g
        if tok in ("true", "false"):
            return Const(tok == "true")
        if re.fullmatch(_IDENT, tok):
            op = take()
            if op == "=":
                return Eq(tok)
            if op == "!=":
                return Neq(tok)
        raise MachineFormatError(line, f"bad guard {text!r}")

    g = expr()
    if pos != len(tokens):
        raise MachineFormatError(line, f"trailing tokens in guard {text!r}")
    return g


def parse_machine(text: str) -> Ssrt:
    """Parse the sectioned text format; errors carry the offending line number."""
    section = None
    seen: dict[str, int] = {}
    alph: dict[str, tuple[str, ...]] = {}
    states: list[str] = []
    initial: str | None = None
    registers: list[str] = []
    variables: list[str] = []
    output: dict[str, Rhs] = {}
    output_lines: dict[str, int] = {}
    transitions: list[Transition] = []
    comments: list[str] = []

    def names(body: str, n: int) -> list[str]:
        items = body.split()
        for it in items:
            if not re.fullmatch(_IDENT, it) or it == "curr":
                raise MachineFormatError(n, f"bad name {it!r}")
        return items

    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("#"):
            comments.append(line[1:].strip())
            continue
        if not line:
            continue
        header = re.fullmatch(r"\[(\w+)\]", line)
        if header:
            section = header.group(1)
            if section not in _SECTIONS:
                raise MachineFormatError(n, f"unknown section {section!r}")
            if section in seen:
                raise MachineFormatError(n, f"section {section!r} repeated")
            seen[section] = n
            continue
        if section is None:
            raise MachineFormatError(n, "content before the first section")
        if section == "alphabets":
            key, sep, body = line.partition(":")
            if not sep or key.strip() not in ("input", "output"):
                raise MachineFormatError(n, "expected 'input: ...' or 'output: ...'")
            alph[key.strip()] = tuple(body.split())
        elif section == "states":
            for tok in line.split():
                if tok.startswith(">"):
                    if initial is not None:
                        raise MachineFormatError(n, "more than one initial state")
                    tok = tok[1:]
                    initial = tok
                states.extend(names(tok, n))
        elif section == "registers":
            registers.extend(names(line, n))
        elif section == "vars":
            variables.extend(names(line, n))
        elif section == "output":
            q, sep, body = line.partition("=")
            q = q.strip()
            if not sep:
                raise MachineFormatError(n, "expected 'state = template'")
            if q in output:
                raise MachineFormatError(n, f"output of {q} given twice")
            rhs = parse_rhs(body, n)
            vs = [e.name for e in rhs if isinstance(e, Var)]
            for x in vs:
                if vs.count(x) > 1:
                    raise MachineFormatError(n, f"variable {x} occurs more than once in the output of {q}")
            output[q] = rhs
            output_lines[q] = n
        else:
            transitions.append(_parse_transition(line, n))

    for sec in _SECTIONS:
        if sec not in seen and sec not in ("registers", "vars"):
            raise MachineFormatError(None, f"missing section [{sec}]")
    if "input" not in alph or "output" not in alph:
        raise MachineFormatError(seen["alphabets"], "both input and output alphabets are required")
    if initial is None:
        raise MachineFormatError(seen["states"], "no initial state marked with '>'")
    for group, what in ((states, "state"), (registers, "register"), (variables, "variable")):
        dup = [x for x in set(group) if group.count(x) > 1]
        if dup:
            raise MachineFormatError(None, f"{what} {sorted(dup)[0]} declared twice")

    m = Ssrt(alph["input"], alph["output"], tuple(states), initial, tuple(registers),
             tuple(variables), output, tuple(transitions), tuple(comments))
    for q, n in output_lines.items():
        for err in _rhs_references(output[q], m, f"output of {q}"):
            raise MachineFormatError(n, err)
        if q not in m.states:
            raise MachineFormatError(n, f"undeclared state {q}")
    for t in m.transitions:
        for err in copy_violations(replace(t, line=None), m.variables):
            raise MachineFormatError(t.line, err)
        refs = [f"undeclared state {q}" for q in (t.source, t.target) if q not in m.states]
        refs += [f"undeclared input letter {t.letter}"] if t.letter not in m.input_alphabet else []
        refs += [f"undeclared register {r}" for r in sorted(guard_registers(t.guard) | t.store) if r not in m.registers]
        refs += [f"update of undeclared variable {x}" for x in t.update if x not in m.variables]
        for rhs in t.update.values():
            refs += _rhs_references(rhs, m, "update")
        if refs:
            raise MachineFormatError(t.line, refs[0])
    return m


def _parse_transition(line: str, n: int) -> Transition:
    lhs, arrow, rhs = line.partition("->")
    if not arrow:
        raise MachineFormatError(n, "transition needs '->'")
    head = lhs.split(None, 2)
    if len(head) < 3:
        raise MachineFormatError(n, "expected 'source letter guard -> target ...'")
    source, letter, guard_text = head
    target_part, colon, updates_text = rhs.partition(":=")
    # the first ':=' belongs to an update; split target/store from the update list
    if colon:
        target_part, _, first_var = target_part.rpartition(":")
        updates_text = first_var + ":=" + updates_text
    bits = target_part.split()
    if not bits:
        raise MachineFormatError(n, "missing target state")
    target, rest = bits[0], bits[1:]
    store: list[str] = []
    if rest:
        if rest[0] != "store":
            raise MachineFormatError(n, f"unexpected {rest[0]!r} after target")
        store = rest[1:]
    update: dict[str, Rhs] = {}
    if colon:
        for part in updates_text.split(";"):
            part = part.strip()
            if not part:
                continue
            x, sep, body = part.partition(":=")
            x = x.strip()
            if not sep or not re.fullmatch(_IDENT, x):
                raise MachineFormatError(n, f"bad update {part!r}")
            if x in update:
                raise MachineFormatError(n, f"variable {x} updated twice")
            update[x] = parse_rhs(body, n)
    return Transition(source, letter, parse_guard(guard_text, n), target, frozenset(store), update, line=n)


def format_machine(m: Ssrt, header: Sequence[str] = ()) -> str:
    lines = [f"# {h}" for h in header]
    lines += ["[alphabets]", "input: " + " ".join(m.input_alphabet), "output: " + " ".join(m.output_alphabet)]
    lines += ["[states]", " ".join((">" + q) if q == m.initial else q for q in m.states)]
    lines += ["[registers]"] + ([" ".join(m.registers)] if m.registers else [])
    lines += ["[vars]"] + ([" ".join(m.variables)] if m.variables else [])
    lines += ["[output]"] + [f"{q} = {format_rhs(m.output[q])}" for q in m.states if q in m.output]
    lines.append("[transitions]")
    for t in m.transitions:
        s = f"{t.source} {t.letter} {format_guard(t.guard)} -> {t.target}"
        if t.store:
            s += " store " + " ".join(sorted(t.store))
        if t.update:
            s += " : " + "; ".join(f"{x} := {format_rhs(r)}" for x, r in t.update.items())
        lines.append(s)
    return "\n".join(lines) + "\n"

"""Synthesis of register transducers from oracles, over bounded quotients.

States are explored breadth-first from the initial state.  The influence
tracker keeps, for each influencing value of the word read, a pointer to the
register holding it.  The full transducer additionally carries a dependency
tree whose variables are the machine's variables.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .analysis import (
    DELTA0,
    DELTA_BASE,
    BoundExhausted,
    Bounds,
    Quotient,
    Transduction,
    canonical_words,
    quotient,
)
from .core_words import DataWord, OriginWord, format_origin_word, format_word
from .deptree import (
    DependencyTree,
    VarRef,
    bottom_tree,
    extend_structure,
    shorten_fully,
    trim,
    unroll,
    var_name,
)
from .machine import (
    CURR,
    Eq,
    Neq,
    Out,
    Ssrt,
    Transition,
    Var,
    conj,
    run,
    run_trace,
    transduce,
)


@dataclass(frozen=True)
class SynthState:
    prefix_class: int
    ptr: tuple[int, ...]  # register index (1-based) of the j-th influencing value
    tree: DependencyTree | None = None


@dataclass
class SynthResult:
    machine: Ssrt
    states: dict[str, SynthState]
    quotient: Quotient
    closed: bool
    var_refs: dict[str, VarRef] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    def header(self) -> list[str]:
        q = self.quotient
        lines = [
            f"synthesized from oracle {q.f.name}",
            f"bounds: {q.b}",
            f"I={q.I} B={q.B} prefix_classes={len(q.reps)} suffix_classes={q.n_suffix_classes}",
            f"states={len(self.states)} closed={'yes' if self.closed else 'no'}",
        ]
        return lines + self.notes


def _register(k: int) -> str:
    return f"r{k}"


def _guard(ptr: tuple[int, ...], i: int):
    atoms = [Eq(_register(ptr[i - 1]))] if i else []
    atoms += [Neq(_register(r)) for j, r in enumerate(ptr, 1) if j != i]
    return conj(atoms)


def _next_pointers(q: Quotient, ptr: tuple[int, ...], w: DataWord, i: int) -> tuple[tuple[int, ...], frozenset[str]]:
    """Pointers after reading the last symbol of ``w`` (which carries ``delta_i``) and the store set."""
    ifl = q.ifl(w)
    kept = {ptr[d - DELTA_BASE - 1] for d in ifl if d != DELTA0}
    free = [r for r in range(1, q.I + 1) if r not in kept]
    new: list[int] = []
    store: frozenset[str] = frozenset()
    for d in ifl:
        if d == DELTA0:
            if not free:
                raise BoundExhausted("no free register for a new influencing value")
            new.append(free[0])
            store = frozenset([_register(free[0])])
        else:
            new.append(ptr[d - DELTA_BASE - 1])
    if store and i != 0:
        raise BoundExhausted("delta_0 influencing although it was not read")
    return tuple(new), store


DEFAULT_MAX_STATES = 2000


def _explore(f: Transduction, b: Bounds, with_tree: bool, max_states: int) -> SynthResult:
    q = quotient(f, b)
    start = SynthState(0, (), bottom_tree(q.B, q.n_suffix_classes) if with_tree else None)

    def key(s: SynthState):
        return (s.prefix_class, s.ptr, s.tree.key() if s.tree is not None else None)

    names: dict = {key(start): "q0"}
    states: dict[str, SynthState] = {"q0": start}
    transitions: list[Transition] = []
    outputs: dict = {}
    var_refs: dict[str, VarRef] = {}
    notes: list[str] = []
    frontier = deque([start])
    closed = True
    while frontier:
        s = frontier.popleft()
        name = names[key(s)]
        outputs[name] = _output(q, s) if with_tree else ()
        if len(names) >= max_states:
            closed = False
            continue
        rep = q.rep(s.prefix_class)
        for letter, i, w in q.successors(s.prefix_class):
            ptr, store = _next_pointers(q, s.ptr, w, i)
            target_class = q.prefix_class(w)
            update: dict = {}
            tree = None
            if with_tree:
                tree, update = _tree_step(q, s, rep, letter, i, var_refs)
            t = SynthState(target_class, ptr, tree)
            k = key(t)
            if k not in names:
                names[k] = f"q{len(names)}"
                states[names[k]] = t
                frontier.append(t)
            transitions.append(Transition(name, letter, _guard(s.ptr, i), names[k], store, update))
    if not closed:
        notes.append(f"exploration stopped at {max_states} states; some states have no transitions")
    if with_tree:
        # variables that never occur in a tree are only ever reset; drop them
        live = {var_name(r) for st in states.values() for r in _refs(st.tree)}
        var_refs = {x: r for x, r in var_refs.items() if x in live}
        transitions = [
            Transition(t.source, t.letter, t.guard, t.target, t.store, {x: e for x, e in t.update.items() if x in live})
            for t in transitions
        ]
    variables = tuple(var_refs)
    m = Ssrt(
        tuple(sorted(f.alphabet)),
        tuple(sorted(f.output_alphabet)),
        tuple(states),
        "q0",
        tuple(_register(k) for k in range(1, q.I + 1)),
        variables,
        {n: outputs[n] for n in states if n in outputs},
        tuple(transitions),
    )
    return SynthResult(m, states, q, closed, var_refs, notes)


def _template(block: OriginWord, ptr: tuple[int, ...]) -> tuple:
    out = []
    for letter, value, _ in block:
        if value == DELTA0:
            out.append(Out(letter, CURR))
        elif DELTA_BASE < value <= DELTA_BASE + len(ptr):
            out.append(Out(letter, _register(ptr[value - DELTA_BASE - 1])))
        else:
            raise BoundExhausted(f"middle block mentions value {value}, which is neither current nor stored")
    return tuple(out)


def _tree_step(q: Quotient, s: SynthState, rep: DataWord, letter: str, i: int, var_refs: dict):
    """Next tree and the variable update that keeps it complete."""
    old = s.tree
    ext = extend_structure(old, q, rep, letter, i)
    shortened = shorten_fully(ext.tree)
    symbolic: dict[VarRef, tuple] = {}
    for r in _refs(shortened):
        symbolic[r] = _template(ext.middles[r], s.ptr) if r in ext.middles else (Var(var_name(r)),)
    trimmed, new_val = trim(shortened, symbolic)
    # variables that drop out of the tree are reset so absent means empty
    update: dict[str, tuple] = {var_name(r): () for r in _refs(old)}
    for r, rhs in new_val.items():
        update[var_name(r)] = rhs
        var_refs.setdefault(var_name(r), r)
    update = {x: rhs for x, rhs in update.items() if rhs != (Var(x),)}
    return trimmed, update


def _refs(t: DependencyTree) -> list[VarRef]:
    return [r for n in sorted(t.nodes) for block in t.bl[n] for r in block if isinstance(r, VarRef)]


def _output(q: Quotient, s: SynthState) -> tuple:
    t = s.tree
    if t is None or t.bottom:
        return ()
    leaf = t.leaf_for(q.eps_class)
    refs = []
    for desc in t.bl[leaf]:
        refs.extend(unroll(t, leaf, desc))
    return tuple(Var(var_name(r)) for r in refs)


def synth_ifl_tracker(f: Transduction, b: Bounds, max_states: int = DEFAULT_MAX_STATES) -> SynthResult:
    """Registers that hold the influencing values of the word read so far."""
    return _explore(f, b, False, max_states)


def synth_transducer(f: Transduction, b: Bounds, max_states: int = DEFAULT_MAX_STATES) -> SynthResult:
    """A copyless register transducer agreeing with ``f`` on the bounded universe."""
    return _explore(f, b, True, max_states)


def tracked_values(res: SynthResult, w: DataWord) -> tuple[int, ...] | None:
    """Register contents in pointer order after reading ``w``."""
    c = run(res.machine, w)
    if c is None:
        return None
    s = res.states[c.state]
    return tuple(c.regs.get(_register(r)) for r in s.ptr)


def tree_valuations(res: SynthResult, w: DataWord):
    """``(prefix, tree, valuation)`` for every prefix of ``w`` the machine reads."""
    out = []
    for k, c in enumerate(run_trace(res.machine, w)):
        tree = res.states[c.state].tree
        val = {res.var_refs[x]: c.vars[x] for x in res.machine.variables if c.vars.get(x)}
        out.append((w[:k], tree, val))
    return out


# -- verification -------------------------------------------------------------------


@dataclass
class VerifyReport:
    checked: int = 0
    mismatches: int = 0
    first: tuple | None = None  # (word, expected, got)
    trace: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.mismatches == 0

    def lines(self) -> list[str]:
        out = [f"CHECKED {self.checked}", f"MISMATCHES {self.mismatches}"]
        if self.first is not None:
            w, want, got = self.first
            out.append(f"FIRST word=[{format_word(w)}]")
            out.append(f"  expected {format_origin_word(want)}")
            out.append(f"  got      {'UNDEFINED' if got is None else format_origin_word(got)}")
            out += ["  " + t for t in self.trace]
        out.append("AGREE bounded" if self.ok else "DISAGREE proven")
        return out


def verify_against_oracle(m: Ssrt, f: Transduction, b: Bounds) -> VerifyReport:
    """Compare machine and oracle on every word up to isomorphism of bounded length."""
    rep = VerifyReport()
    for w in canonical_words(m.input_alphabet, b.max_word_len):
        rep.checked += 1
        want = f(w)
        try:
            got = transduce(m, w)
        except RuntimeError:
            got = None
        if got != want:
            rep.mismatches += 1
            if rep.first is None:
                rep.first = (w, want, got)
                rep.trace = [
                    f"after {k} symbols: state {c.state} regs {dict(sorted(c.regs.items()))}"
                    for k, c in enumerate(run_trace(m, w))
                ]
    return rep

"""Transduction oracles and bounded analyses of how prefixes and suffixes interact.

All searches enumerate candidate words up to isomorphism relative to the
values already present, drawing extra values from a reserved fresh band.
A reported influence always carries a witness that replays through the
oracle; absence of a witness only means none exists within the bounds.
"""

from __future__ import annotations

import itertools
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .core_words import (
    DataWord,
    OriginWord,
    Permutation,
    apply_permutation,
    concat,
    data,
    enumerate_words,
    format_word,
    isomorphic,
    substitute,
)
from .factored import Region, factor_items
from .machine import Ssrt, run, transduce

# Reserved value bands.  delta_i = DELTA_BASE + i for i >= 1; delta_0 is the
# first value of the fresh band.
DELTA_BASE = 1_000_000
NONIFL_BASE = 2_000_000
FRESH_BASE = 3_000_000
DELTA0 = FRESH_BASE


def delta(i: int) -> int:
    return DELTA0 if i == 0 else DELTA_BASE + i


def is_reserved(value: int) -> bool:
    return value >= DELTA_BASE


class ReservedValueError(ValueError):
    pass


def check_user_word(w: DataWord) -> DataWord:
    bad = [v for _, v in w if is_reserved(v)]
    if bad:
        raise ReservedValueError(f"value {bad[0]} lies in a reserved band (>= {DELTA_BASE})")
    return w


def fresh_values(avoid: Iterable[int], k: int) -> list[int]:
    """The first ``k`` fresh-band values not in ``avoid`` (``delta_0`` excluded)."""
    avoid = set(avoid)
    out, v = [], FRESH_BASE + 1
    while len(out) < k:
        if v not in avoid:
            out.append(v)
        v += 1
    return out


@dataclass(frozen=True)
class Bounds:
    max_word_len: int = 4
    fresh_values: int = 3
    max_ext_len: int = 2

    def __post_init__(self) -> None:
        if self.max_word_len < 1 or self.max_ext_len < 1:
            raise ValueError("bounds must be positive")
        if self.fresh_values < 2:
            raise ValueError("fresh_values must be at least 2")

    def __str__(self) -> str:
        return f"max_word_len={self.max_word_len} fresh_values={self.fresh_values} max_ext_len={self.max_ext_len}"


class Transduction:
    """A pure function from data words to origin words, with memoized results."""

    def __init__(
        self,
        name: str,
        fn: Callable[[DataWord], OriginWord],
        alphabet: Sequence[str] = ("a", "b"),
        output_alphabet: Sequence[str] | None = None,
        provenance: str = "builtin",
    ) -> None:
        self.name = name
        self.fn = fn
        self.alphabet = tuple(alphabet)
        self.output_alphabet = tuple(output_alphabet if output_alphabet is not None else alphabet)
        self.provenance = provenance
        self._cache: dict[DataWord, OriginWord] = {}
        self.memo: dict = {}

    def __call__(self, w: DataWord) -> OriginWord:
        w = tuple(w)
        out = self._cache.get(w)
        if out is None:
            out = tuple(self.fn(w))
            if len(self._cache) > 200_000:
                self._cache.clear()
            self._cache[w] = out
        return out

    evaluate = __call__

    def __repr__(self) -> str:
        return f"Transduction({self.name!r}, {self.provenance})"


# -- builtin oracles ---------------------------------------------------------------


def _identity(w: DataWord) -> OriginWord:
    return tuple((a, d, i) for i, (a, d) in enumerate(w, 1))


def _reverse(w: DataWord) -> OriginWord:
    return _identity(w)[::-1]


def _identity_or_reverse(w: DataWord) -> OriginWord:
    if w and w[0][1] != w[-1][1]:
        return _reverse(w)
    return _identity(w)


def _gate(w: DataWord, i: int) -> OriginWord:
    if len(w) >= i and w[i - 1][1] != w[-1][1]:
        return _reverse(w)
    return _identity(w)


def _double_gate(w: DataWord) -> OriginWord:
    return _gate(w, 1) + _gate(w, 2)


def _third_or_fourth(w: DataWord) -> OriginWord:
    if len(w) < 5:
        return ()
    pos = 3 if w[0][1] == w[4][1] else 4
    a, d = w[pos - 1]
    return ((a, d, pos),)


NAME_LETTERS = ("title", "firstName", "lastName")


def _name_reversal(w: DataWord) -> OriginWord:
    rename = {"firstName": "givenName", "lastName": "surName"}
    return tuple((rename[a], d, i) for i, (a, d) in reversed(list(enumerate(w, 1))) if a in rename)


BUILTINS: dict[str, tuple[Callable[[DataWord], OriginWord], tuple[str, ...], tuple[str, ...] | None]] = {
    "identity": (_identity, ("a", "b"), None),
    "reverse": (_reverse, ("a", "b"), None),
    "identity_or_reverse": (_identity_or_reverse, ("a", "b"), None),
    "double_gate": (_double_gate, ("a", "b"), None),
    "third_or_fourth": (_third_or_fourth, ("a", "b"), None),
    "name_reversal": (_name_reversal, NAME_LETTERS, ("givenName", "surName")),
}
PAPER_BUILTINS = ("identity", "reverse", "identity_or_reverse", "double_gate", "third_or_fourth")

_builtin_cache: dict[tuple[str, tuple[str, ...] | None], Transduction] = {}


def builtin(name: str, alphabet: Sequence[str] | None = None) -> Transduction:
    """One shared oracle instance per name (and alphabet), so memoized results are reused."""
    if name not in BUILTINS:
        raise KeyError(f"unknown builtin {name!r}; known: {', '.join(BUILTINS)}")
    key = (name, tuple(alphabet) if alphabet else None)
    if key not in _builtin_cache:
        fn, alph, out_alph = BUILTINS[name]
        alph = tuple(alphabet) if alphabet else alph
        _builtin_cache[key] = Transduction(name, fn, alph, out_alph or alph)
    return _builtin_cache[key]


def machine_oracle(m: Ssrt, name: str = "machine") -> Transduction:
    def fn(w: DataWord) -> OriginWord:
        out = transduce(m, w)
        if out is None:
            raise ValueError(f"machine output undefined on {format_word(w)}")
        return out

    return Transduction(name, fn, m.input_alphabet, m.output_alphabet, provenance="machine-backed")


# -- memorable and vulnerable values -----------------------------------------------


@dataclass(frozen=True)
class MemorableWitness:
    value: int
    v: DataWord
    replacement: int


@dataclass(frozen=True)
class VulnerableWitness:
    value: int
    extension: DataWord
    v: DataWord
    replacement: int


@dataclass(frozen=True)
class TypedInfluence:
    value: int
    kind: str  # "vm", "m" or "v"


def _prefix_abstract(f: Transduction, u: DataWord, v: DataWord):
    return factor_items(f(u + v), (len(u),), (True, False))[0]


def _suffix_abstract(f: Transduction, u: DataWord, v: DataWord):
    return factor_items(f(u + v), (len(u),), (False, True))[0]


def _memo(f: Transduction, key, compute):
    if key not in f.memo:
        f.memo[key] = compute()
    return f.memo[key]


def memorable_witnesses(f: Transduction, u: DataWord, b: Bounds) -> dict[int, MemorableWitness]:
    """Values ``d`` of ``u`` with ``f(u[d/d']̲|v) != f(u̲|v)`` for some bounded ``v`` and safe ``d'``."""
    u = tuple(u)
    return _memo(f, ("mem", u, b), lambda: _search_memorable(f, u, b))


def _search_memorable(f: Transduction, u: DataWord, b: Bounds) -> dict[int, MemorableWitness]:
    vals = data(u)
    found: dict[int, MemorableWitness] = {}
    if not vals:
        return found
    valset = set(vals)
    fresh = fresh_values(valset, b.fresh_values)
    subs = {d: None for d in vals}
    for v in enumerate_words(f.alphabet, b.max_word_len, vals, fresh):
        base = _prefix_abstract(f, u, v)
        in_v = [x for x in data(v) if x not in valset]
        candidates = in_v + fresh_values(valset | set(in_v), 1)
        for d in vals:
            if d in found:
                continue
            for d2 in candidates:
                if _prefix_abstract(f, substitute(u, d, d2), v) != base:
                    found[d] = MemorableWitness(d, v, d2)
                    break
        if len(found) == len(vals):
            break
    return {d: found[d] for d in vals if d in found}


def vulnerable_witnesses(f: Transduction, u: DataWord, b: Bounds) -> dict[int, VulnerableWitness]:
    """Values ``d`` of ``u`` with ``f(u·u'|v[d/d']̲) != f(u·u'|v̲)`` for bounded ``u'`` and ``v``."""
    u = tuple(u)
    return _memo(f, ("vul", u, b), lambda: _search_vulnerable(f, u, b))


def _search_vulnerable(f: Transduction, u: DataWord, b: Bounds) -> dict[int, VulnerableWitness]:
    vals = data(u)
    found: dict[int, VulnerableWitness] = {}
    if not vals:
        return found
    fresh = fresh_values(vals, b.fresh_values)
    for ext in enumerate_words(f.alphabet, b.max_ext_len, vals, fresh):
        ext_vals = set(data(ext))
        todo = [d for d in vals if d not in found and d not in ext_vals]
        if not todo:
            continue
        uu = u + ext
        base_vals = data(uu)
        vfresh = fresh_values(base_vals, b.fresh_values)
        for v in enumerate_words(f.alphabet, b.max_word_len, base_vals, vfresh, min_len=1):
            in_v = set(data(v))
            hit = [d for d in todo if d in in_v]
            if not hit:
                continue
            base = _suffix_abstract(f, uu, v)
            d2 = fresh_values(set(base_vals) | in_v, 1)[0]
            for d in hit:
                if _suffix_abstract(f, uu, substitute(v, d, d2)) != base:
                    found[d] = VulnerableWitness(d, ext, v, d2)
                    todo.remove(d)
            if not todo:
                break
        if len(found) == len(vals):
            break
    return {d: found[d] for d in vals if d in found}


def memorable_values(f: Transduction, u: DataWord, b: Bounds) -> set[tuple[int, DataWord, int]]:
    return {(w.value, w.v, w.replacement) for w in memorable_witnesses(f, u, b).values()}


def vulnerable_values(f: Transduction, u: DataWord, b: Bounds) -> set[tuple[int, DataWord, DataWord, int]]:
    return {(w.value, w.extension, w.v, w.replacement) for w in vulnerable_witnesses(f, u, b).values()}


def replay_memorable(f: Transduction, u: DataWord, w: MemorableWitness) -> bool:
    """True iff the witness really shows an inequality (and ``d'`` is safe)."""
    if w.replacement in data(u) and w.replacement != w.value:
        return False
    return _prefix_abstract(f, substitute(u, w.value, w.replacement), w.v) != _prefix_abstract(f, u, w.v)


def replay_vulnerable(f: Transduction, u: DataWord, w: VulnerableWitness) -> bool:
    uu = tuple(u) + w.extension
    if w.value in data(w.extension) or w.replacement in data(uu + w.v):
        return False
    return _suffix_abstract(f, uu, substitute(w.v, w.value, w.replacement)) != _suffix_abstract(f, uu, w.v)


def last_occurrence(u: DataWord) -> dict[int, int]:
    return {d: i for i, (_, d) in enumerate(u)}


def aifl(f: Transduction, u: DataWord, b: Bounds) -> tuple[TypedInfluence, ...]:
    """Influencing values of ``u``, freshest (latest last occurrence) first."""
    u = tuple(u)

    def compute() -> tuple[TypedInfluence, ...]:
        mem = memorable_witnesses(f, u, b)
        vul = vulnerable_witnesses(f, u, b)
        last = last_occurrence(u)
        vals = sorted(set(mem) | set(vul), key=lambda d: -last[d])
        kinds = {d: ("v" if d in vul else "") + ("m" if d in mem else "") for d in vals}
        return tuple(TypedInfluence(d, kinds[d]) for d in vals)

    return _memo(f, ("aifl", u, b), compute)


def ifl_values(f: Transduction, u: DataWord, b: Bounds) -> tuple[int, ...]:
    return tuple(t.value for t in aifl(f, u, b))


# -- equalizing scheme ---------------------------------------------------------------


def equalize(f: Transduction, u: DataWord, b: Bounds) -> Permutation:
    """The i-th influencing value goes to ``delta_i``; the rest to the non-influencing band."""
    u = tuple(u)

    def compute() -> Permutation:
        ifl = ifl_values(f, u, b)
        partial = {d: delta(i) for i, d in enumerate(ifl, 1)}
        k = 0
        for d in data(u):
            if d not in partial:
                k += 1
                partial[d] = NONIFL_BASE + k
        return Permutation.complete(partial)

    return _memo(f, ("eq", u, b), compute)


def equalized(f: Transduction, u: DataWord, b: Bounds) -> DataWord:
    return apply_permutation(equalize(f, u, b), u)


# -- equivalence of prefixes ------------------------------------------------------------


@dataclass(frozen=True)
class EquivWitness:
    equivalent: bool
    permutation: Permutation | None = None
    condition: int | None = None
    counterexample: tuple = ()
    outputs: tuple = ()

    @property
    def verdict(self) -> str:
        return "equivalent" if self.equivalent else "distinguished"

    def __bool__(self) -> bool:
        return self.equivalent


def _shift(items, z: int):
    return tuple(it if isinstance(it, Region) else (it[0], it[1], it[2] + z) for it in items)


def _value_pool(*words: DataWord, extra: int) -> tuple[tuple[int, ...], list[int]]:
    base = data(concat(*words))
    return base, fresh_values(base, extra)


def _check_condition1(f, u1, u2p, b, base, fresh):
    z = len(u1) - len(u2p)
    for v in enumerate_words(f.alphabet, b.max_word_len, base, fresh):
        o1 = _prefix_abstract(f, u1, v)
        o2 = _shift(_prefix_abstract(f, u2p, v), z)
        if o1 != o2:
            return (v,), (o1, o2)
    return None


def _partition(f, prefix, vs):
    seen: dict = {}
    return tuple(seen.setdefault(_suffix_abstract(f, prefix, v), len(seen)) for v in vs)


def _check_condition3(f, u1, u2p, b, base, fresh):
    for ext in enumerate_words(f.alphabet, b.max_ext_len, base, fresh):
        ebase = tuple(dict.fromkeys(base + data(ext)))
        efresh = fresh_values(ebase, b.fresh_values)
        vs = list(enumerate_words(f.alphabet, b.max_word_len, ebase, efresh))
        p1 = _partition(f, u1 + ext, vs)
        p2 = _partition(f, u2p + ext, vs)
        if p1 != p2:
            for i, j in itertools.combinations(range(len(vs)), 2):
                if (p1[i] == p1[j]) != (p2[i] == p2[j]):
                    return (ext, vs[i], vs[j]), (p1[i] == p1[j], p2[i] == p2[j])
    return None


def _candidate_perms(ifl1, ifl2, u1: DataWord, u2: DataWord, k: int) -> Iterable[Permutation]:
    forced = dict(zip(ifl2, ifl1))
    rest2 = [d for d in data(u2) if d not in forced]
    taken = set(forced.values())
    pool = [d for d in data(u1) if d not in taken]
    pool += fresh_values(set(data(u1)) | set(data(u2)), max(k, len(rest2)))
    seen = set()
    for image in itertools.permutations(pool, len(rest2)):
        partial = dict(forced)
        partial.update(zip(rest2, image))
        try:
            p = Permutation.complete(partial)
        except ValueError:
            continue
        if p not in seen:
            seen.add(p)
            yield p


def f_equiv(f: Transduction, u1: DataWord, u2: DataWord, b: Bounds, max_candidates: int | None = None) -> EquivWitness:
    """Bounded check of the three conditions defining prefix equivalence.

    Candidate permutations map the influencing values of ``u2`` onto those of
    ``u1`` in order and the remaining values injectively elsewhere.
    """
    u1, u2 = tuple(u1), tuple(u2)
    a1, a2 = aifl(f, u1, b), aifl(f, u2, b)
    if [t.kind for t in a1] != [t.kind for t in a2]:
        return EquivWitness(False, condition=2, counterexample=(u1, u2), outputs=(a1, a2))
    ifl1 = [t.value for t in a1]
    ifl2 = [t.value for t in a2]
    first: EquivWitness | None = None
    for n, p in enumerate(_candidate_perms(ifl1, ifl2, u1, u2, b.fresh_values)):
        if max_candidates is not None and n >= max_candidates:
            break
        # for an invariant oracle aifl(p(u2)) is the image of aifl(u2), which
        # agrees with aifl(u1) by the choice of candidates
        u2p = apply_permutation(p, u2)
        base, fresh = _value_pool(u1, u2p, extra=b.fresh_values)
        bad = _check_condition1(f, u1, u2p, b, base, fresh)
        if bad:
            if first is None:
                first = EquivWitness(False, p, 1, (u1, u2p) + bad[0], bad[1])
            continue
        bad = _check_condition3(f, u1, u2p, b, base, fresh)
        if bad:
            if first is None:
                first = EquivWitness(False, p, 3, (u1, u2p) + bad[0], bad[1])
            continue
        return EquivWitness(True, p)
    return first if first is not None else EquivWitness(False, condition=2, counterexample=(u1, u2))


# -- suffix equivalence ------------------------------------------------------------------


def suffix_equiv(
    f: Transduction, v1: DataWord, v2: DataWord, prefixes: Iterable[DataWord], b: Bounds
) -> EquivWitness:
    """``v1`` and ``v2`` act alike after every equalized prefix in ``prefixes``."""
    for u in prefixes:
        uq = equalized(f, u, b)
        o1 = _suffix_abstract(f, uq, tuple(v1))
        o2 = _suffix_abstract(f, uq, tuple(v2))
        if o1 != o2:
            return EquivWitness(False, counterexample=(uq, tuple(v1), tuple(v2)), outputs=(o1, o2))
    return EquivWitness(True)


# -- bounded quotients used by trees and synthesis ------------------------------------


class BoundExhausted(RuntimeError):
    """A word fell outside the classes discovered within the bounds."""


class Quotient:
    """Bounded prefix classes, suffix classes and the block bound ``B`` of an oracle.

    Prefix classes are identified by a signature of the equalized word: the
    typed influence sequence, the offset-normalized table of ``f(u̲|v)`` and,
    for every bounded extension, the partition of suffixes by ``f(u·x|v̲)``.
    Classes are discovered breadth-first from ε by one-symbol extensions of
    their representatives.  Suffix classes partition all bounded suffixes by
    ``f(r|v̲)`` over the prefix representatives ``r``.
    """

    def __init__(self, f: Transduction, b: Bounds, depth: int | None = None) -> None:
        self.f = f
        self.b = b
        self._sig_to_class: dict = {}
        self.reps: list[DataWord] = []
        self.closed = self._explore(depth if depth is not None else b.max_word_len)
        self.I = max((len(aifl(f, r, b)) for r in self.reps), default=0)
        self._build_suffix_classes()

    # prefix side

    def _signature(self, uq: DataWord):
        f, b = self.f, self.b
        a = aifl(f, uq, b)
        deltas = tuple(delta(i) for i in range(1, len(a) + 1))
        fresh = fresh_values(deltas, b.fresh_values)
        n = len(uq)
        table = tuple(
            _shift(_prefix_abstract(f, uq, v), -n) for v in enumerate_words(f.alphabet, b.max_word_len, deltas, fresh)
        )
        parts = []
        for ext in enumerate_words(f.alphabet, b.max_ext_len, deltas, fresh):
            ebase = tuple(dict.fromkeys(deltas + tuple(d for _, d in ext)))
            vs = enumerate_words(f.alphabet, b.max_word_len, ebase, fresh_values(ebase, b.fresh_values))
            parts.append(_partition(f, uq + ext, vs))
        return (tuple(t.kind for t in a), table, tuple(parts))

    def prefix_class(self, u: DataWord) -> int:
        """Class index of ``u``; registers a new class if its signature is unseen."""
        uq = equalized(self.f, tuple(u), self.b)
        return self._classify_equalized(uq)

    def _classify_equalized(self, uq: DataWord) -> int:
        key = ("sig", uq, self.b)
        sig = self.f.memo.get(key)
        if sig is None:
            sig = self.f.memo[key] = self._signature(uq)
        c = self._sig_to_class.get(sig)
        if c is None:
            c = self._sig_to_class[sig] = len(self.reps)
            self.reps.append(uq)
        return c

    def rep(self, c: int) -> DataWord:
        return self.reps[c]

    def ifl(self, u: DataWord) -> tuple[int, ...]:
        return ifl_values(self.f, tuple(u), self.b)

    def successors(self, c: int) -> list[tuple[str, int, DataWord]]:
        """``(letter, i, rep·(letter, delta_i))`` for i in 0..m."""
        r = self.reps[c]
        m = len(self.ifl(r))
        return [(s, i, r + ((s, delta(i)),)) for s in sorted(self.f.alphabet) for i in range(m + 1)]

    def _explore(self, depth: int) -> bool:
        self._classify_equalized(())
        frontier = deque([(0, 0)])
        done = set()
        while frontier:
            c, d = frontier.popleft()
            if c in done:
                continue
            if d >= depth:
                return False
            done.add(c)
            for _, _, w in self.successors(c):
                nc = self.prefix_class(w)
                if nc not in done:
                    frontier.append((nc, d + 1))
        return True

    # suffix side

    def _suffix_signature(self, v: DataWord):
        return tuple(_suffix_abstract(self.f, r, v) for r in self.reps[: self._n_reps])

    def _build_suffix_classes(self) -> None:
        f, b = self.f, self.b
        self._n_reps = len(self.reps)
        deltas = tuple(delta(i) for i in range(1, self.I + 1))
        fresh = fresh_values(deltas, b.fresh_values)
        self.suffix_reps: list[DataWord] = []
        self._suffix_sig: dict = {}
        for v in enumerate_words(f.alphabet, b.max_word_len, deltas, fresh):
            sig = self._suffix_signature(v)
            if sig not in self._suffix_sig:
                self._suffix_sig[sig] = len(self.suffix_reps)
                self.suffix_reps.append(v)
        self.eps_class = self._suffix_sig[self._suffix_signature(())]
        self.B = max(1, self._block_bound(deltas, fresh))

    def _block_bound(self, deltas, fresh) -> int:
        f, b = self.f, self.b
        best = 0
        vs = list(enumerate_words(f.alphabet, b.max_word_len, deltas, fresh))
        for r in self.reps[: self._n_reps]:
            m = len(self.ifl(r))
            for v in vs:
                items, regions = factor_items(f(r + v), (len(r),), (False, True))
                best = max(best, _count_runs(regions, Region.LEFT))
                for s in sorted(f.alphabet):
                    for i in range(m + 1):
                        w = r + ((s, delta(i)),) + v
                        _, regions = factor_items(f(w), (len(r), len(r) + 1), (True, False, True))
                        best = max(best, _count_runs(regions, Region.MIDDLE), _count_runs(regions, Region.LEFT))
        return best

    def suffix_class(self, v: DataWord) -> int:
        c = self._suffix_sig.get(self._suffix_signature(tuple(v)))
        if c is None:
            raise BoundExhausted(f"suffix {format_word(tuple(v))} matches no bounded suffix class")
        return c

    @property
    def n_suffix_classes(self) -> int:
        return len(self.suffix_reps)


def _count_runs(regions: Sequence[Region], which: Region) -> int:
    n, prev = 0, None
    for r in regions:
        if r is which and prev is not which:
            n += 1
        prev = r
    return n


_quotients: dict[tuple[int, Bounds], Quotient] = {}


def quotient(f: Transduction, b: Bounds) -> Quotient:
    """Shared :class:`Quotient` per oracle and bounds."""
    key = (id(f), b)
    q = _quotients.get(key)
    if q is None or q.f is not f:
        q = _quotients[key] = Quotient(f, b)
    return q


# -- machine-level equivalence -------------------------------------------------------------


class NotComparable(ValueError):
    pass


def _arrangements(variables: Sequence[str]):
    for k in range(len(variables) + 1):
        for subset in itertools.combinations(variables, k):
            yield from itertools.permutations(subset)


def machine_equiv(m: Ssrt, u1: DataWord, u2: DataWord, b: Bounds, oracle: Transduction | None = None) -> bool:
    """Whether the configurations reached on ``u1`` and ``u2`` are indistinguishable.

    Influence positions are compared separately for the values found
    vulnerable (suffix influence) and memorable (prefix influence).
    """
    c1, c2 = run(m, u1), run(m, u2)
    if c1 is None or c2 is None:
        raise NotComparable("a run is stuck")
    if c1.state != c2.state:
        return False
    regs = m.registers

    def eq_pattern(c):
        return tuple(
            (r1 in c.regs and r2 in c.regs and c.regs[r1] == c.regs[r2], r1 in c.regs)
            for r1 in regs
            for r2 in regs
        )

    if eq_pattern(c1) != eq_pattern(c2):
        return False
    f = oracle or machine_oracle(m)

    def positions(u, c, table):
        last = last_occurrence(u)
        ordered = sorted(table, key=lambda d: -last[d])
        rank = {d: i for i, d in enumerate(ordered, 1)}
        return tuple(rank.get(c.regs.get(r)) if r in c.regs else None for r in regs)

    for finder in (vulnerable_witnesses, memorable_witnesses):
        if positions(u1, c1, finder(f, tuple(u1), b)) != positions(u2, c2, finder(f, tuple(u2), b)):
            return False
    if [not c1.var(x) for x in m.variables] != [not c2.var(x) for x in m.variables]:
        return False

    def val(c, chi):
        return tuple(itertools.chain.from_iterable(c.var(x) for x in chi))

    arr = list(_arrangements(m.variables))
    vals1 = [val(c1, chi) for chi in arr]
    vals2 = [val(c2, chi) for chi in arr]
    for i, j in itertools.combinations(range(len(arr)), 2):
        if (vals1[i] == vals1[j]) != (vals2[i] == vals2[j]):
            return False
    return True


# -- property checks ------------------------------------------------------------------------


@dataclass
class PropertyReport:
    perm_invariant: bool = True
    no_data_peeking: bool = True
    blowup_constant: int = 0
    equiv_index_estimate: int = 0
    counterexamples: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.perm_invariant and self.no_data_peeking


def canonical_words(alphabet: Sequence[str], max_len: int) -> Iterable[DataWord]:
    """All words up to isomorphism, with values 0, 1, 2, ..."""
    return enumerate_words(alphabet, max_len, (), list(range(max_len)))


def peeking_violation(w: DataWord, out: OriginWord):
    for t in out:
        o = t[2]
        if not 1 <= o <= len(w) or all(d != t[1] for _, d in w[:o]):
            return t
    return None


def max_per_origin(out: OriginWord) -> int:
    counts: dict[int, int] = {}
    for t in out:
        counts[t[2]] = counts.get(t[2], 0) + 1
    return max(counts.values(), default=0)


def check_theorem_properties(
    f: Transduction, b: Bounds, trials: int = 3, seed: int = 0, index_len: int | None = None
) -> PropertyReport:
    rng = random.Random(seed)
    rep = PropertyReport()
    words = list(canonical_words(f.alphabet, b.max_word_len))
    for w in words:
        out = f(w)
        bad = peeking_violation(w, out)
        if bad is not None and rep.no_data_peeking:
            rep.no_data_peeking = False
            rep.counterexamples.append(("peeking", w, bad))
        rep.blowup_constant = max(rep.blowup_constant, max_per_origin(out))
        for _ in range(trials):
            vals = data(w)
            image = rng.sample(range(100, 100 + 4 * len(vals) + 4), len(vals))
            p = Permutation.complete(dict(zip(vals, image)))
            if f(apply_permutation(p, w)) != apply_permutation(p, out):
                if rep.perm_invariant:
                    rep.counterexamples.append(("permutation", w, p))
                rep.perm_invariant = False
    reps: list[DataWord] = []
    for w in canonical_words(f.alphabet, index_len if index_len is not None else b.max_word_len):
        if not any(f_equiv(f, r, w, b) for r in reps):
            reps.append(w)
    rep.equiv_index_estimate = len(reps)
    return rep


# -- report lines ---------------------------------------------------------------------------


def bracket(w: DataWord, names=None) -> str:
    return "[" + format_word(w, names) + "]"


def _value(v: int, names=None) -> str:
    return names.name(v) if names else str(v)


def influence_report(f: Transduction, u: DataWord, b: Bounds, names=None) -> list[str]:
    lines = []
    for w in memorable_witnesses(f, u, b).values():
        lines.append(f"MEMORABLE {_value(w.value, names)} WITNESS v={bracket(w.v, names)} d'={_value(w.replacement, names)} proven")
    for w in vulnerable_witnesses(f, u, b).values():
        lines.append(
            f"VULNERABLE {_value(w.value, names)} WITNESS u'={bracket(w.extension, names)} "
            f"v={bracket(w.v, names)} d'={_value(w.replacement, names)} proven"
        )
    influencing = aifl(f, u, b)
    for i, t in enumerate(influencing, 1):
        lines.append(f"AIFL {i} {_value(t.value, names)} {t.kind}")
    others = [d for d in data(u) if d not in {t.value for t in influencing}]
    for d in others:
        lines.append(f"NONINFLUENCING {_value(d, names)} bounded")
    return lines


def equiv_report(u1: DataWord, u2: DataWord, w: EquivWitness, names=None) -> str:
    if w.equivalent:
        return f"EQUIV {bracket(u1, names)} {bracket(u2, names)} PI={w.permutation} bounded"
    cex = ",".join(bracket(x, names) for x in w.counterexample)
    return f"DISTINGUISHED {bracket(u1, names)} {bracket(u2, names)} CEX=cond{w.condition}:({cex}) proven"

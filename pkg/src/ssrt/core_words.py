"""Data words, origin words and permutations of data values.

A data word is a tuple of ``(letter, value)`` pairs and an origin word is a
tuple of ``(letter, value, origin)`` triples with 1-based origins.  Values are
plain integers; only equality between them is ever consulted.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence, Union

Symbol = tuple[str, int]
DataWord = tuple[Symbol, ...]
Triple = tuple[str, int, int]
OriginWord = tuple[Triple, ...]

EPS = "EPS"


class WordFormatError(ValueError):
    """Raised when a textual word cannot be parsed."""


@dataclass(frozen=True)
class Permutation:
    """A bijection on data values with finite support.

    Values outside ``mapping`` are fixed.  Identity pairs are dropped so that
    two permutations compare equal iff they act identically.
    """

    mapping: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        cleaned = {k: v for k, v in dict(self.mapping).items() if k != v}
        if len(set(cleaned.values())) != len(cleaned) or set(cleaned) != set(cleaned.values()):
            raise ValueError(f"not a finite-support bijection: {cleaned}")
        object.__setattr__(self, "mapping", cleaned)

    def __call__(self, value: int) -> int:
        return self.mapping.get(value, value)

    def __hash__(self) -> int:
        return hash(frozenset(self.mapping.items()))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Permutation) and self.mapping == other.mapping

    @property
    def support(self) -> frozenset[int]:
        return frozenset(self.mapping)

    def inverse(self) -> "Permutation":
        return Permutation({v: k for k, v in self.mapping.items()})

    def compose(self, other: "Permutation") -> "Permutation":
        """Return ``self ∘ other`` (apply ``other`` first)."""
        keys = set(self.mapping) | set(other.mapping)
        return Permutation({k: self(other(k)) for k in keys})

    @classmethod
    def swap(cls, a: int, b: int) -> "Permutation":
        return cls({a: b, b: a})

    @classmethod
    def complete(cls, partial: Mapping[int, int]) -> "Permutation":
        """Extend an injective partial map to a bijection of minimal support.

        The support of the result is contained in the domain and image of
        ``partial``; leftover values are paired in increasing order.
        """
        partial = dict(partial)
        if len(set(partial.values())) != len(partial):
            raise ValueError(f"partial map is not injective: {partial}")
        mapping = dict(partial)
        sources = sorted(set(partial.values()) - set(partial))
        targets = sorted(set(partial) - set(partial.values()))
        mapping.update(zip(sources, targets))
        return cls(mapping)

    def __str__(self) -> str:
        if not self.mapping:
            return "{}"
        return "{" + ",".join(f"{k}->{v}" for k, v in sorted(self.mapping.items())) + "}"


def apply_permutation(p: Permutation, w: Union[DataWord, OriginWord]):
    """Rename every value of ``w`` by ``p``; letters and origins are kept.

    Items that are not tuples (factored-output markers) pass through.
    """
    m = p.mapping
    if not m:
        return tuple(w)
    return tuple((s[0], m.get(s[1], s[1])) + tuple(s[2:]) if isinstance(s, tuple) else s for s in w)


def data(w: Iterable[Sequence]) -> tuple[int, ...]:
    """Distinct values of ``w`` in order of first occurrence."""
    return tuple(dict.fromkeys(s[1] for s in w))


def value_pattern(w: Iterable[Sequence]) -> tuple[int, ...]:
    seen: dict[int, int] = {}
    return tuple(seen.setdefault(s[1], len(seen)) for s in w)


def isomorphic(w1: DataWord, w2: DataWord) -> bool:
    if len(w1) != len(w2):
        return False
    if any(a[0] != b[0] for a, b in zip(w1, w2)):
        return False
    return value_pattern(w1) == value_pattern(w2)


def substitute(w: DataWord, d: int, d2: int) -> DataWord:
    """``w[d/d2]``: replace every occurrence of ``d`` by ``d2``."""
    return tuple((s, d2 if v == d else v) for s, v in w)


def is_safe_replacement(w: DataWord, d: int, d2: int) -> bool:
    return isomorphic(substitute(w, d, d2), w)


def canonical_form(w: DataWord) -> DataWord:
    """Rename values to 0, 1, 2, ... in order of first occurrence."""
    return tuple((s[0], i) for s, i in zip(w, value_pattern(w)))


def concat(*words: Sequence) -> tuple:
    return tuple(itertools.chain.from_iterable(words))


def value_patterns(length: int, base: Sequence[int], fresh: Sequence[int]) -> list[tuple[int, ...]]:
    """All value tuples of ``length`` over ``base`` plus canonically introduced ``fresh`` values.

    Fresh values are introduced in the order they are listed, so two tuples
    in the result are never isomorphic relative to ``base``.
    """
    out: list[tuple[int, ...]] = []

    def go(prefix: list[int], used: int) -> None:
        if len(prefix) == length:
            out.append(tuple(prefix))
            return
        for v in base:
            prefix.append(v)
            go(prefix, used)
            prefix.pop()
        for i in range(min(used + 1, len(fresh))):
            prefix.append(fresh[i])
            go(prefix, max(used, i + 1))
            prefix.pop()

    go([], 0)
    return out


def enumerate_words(
    alphabet: Sequence[str],
    max_len: int,
    base: Sequence[int] = (),
    fresh: Sequence[int] = (),
    min_len: int = 0,
) -> Iterator[DataWord]:
    """Words up to isomorphism relative to ``base``.

    Ordered by length, then letter sequence, then value pattern.
    """
    letters = sorted(alphabet)
    for n in range(min_len, max_len + 1):
        patterns = value_patterns(n, base, fresh)
        for seq in itertools.product(letters, repeat=n):
            for vals in patterns:
                yield tuple(zip(seq, vals))


class ValueNames:
    """Bidirectional table between textual value tokens and integers.

    Decimal tokens stand for themselves; any other token is interned to an
    unused integer so that names like ``d4`` or ``Tom`` survive a round trip.
    """

    NAME_BASE = 500_000

    def __init__(self) -> None:
        self._to_int: dict[str, int] = {}
        self._to_name: dict[int, str] = {}
        self._next = self.NAME_BASE

    def value(self, token: str) -> int:
        if token.isdigit():
            v = int(token)
            if v in self._to_name:
                raise WordFormatError(f"value {v} collides with named value {self._to_name[v]!r}")
            return v
        if token not in self._to_int:
            if not re.fullmatch(r"[^\s:@]+", token):
                raise WordFormatError(f"bad value token {token!r}")
            self._to_int[token] = self._next
            self._to_name[self._next] = token
            self._next += 1
        return self._to_int[token]

    def name(self, value: int) -> str:
        return self._to_name.get(value, str(value))


_LETTER = re.compile(r"[^\s:@*]+")


def _split_tokens(text: str) -> list[str]:
    tokens = text.split()
    if tokens == [EPS]:
        return []
    if not tokens:
        raise WordFormatError("empty text; use EPS for the empty word")
    return tokens


def parse_word(text: str, names: ValueNames | None = None) -> DataWord:
    """Parse ``letter:value`` tokens separated by spaces (``EPS`` for ε)."""
    names = names or ValueNames()
    out = []
    for tok in _split_tokens(text):
        letter, sep, value = tok.partition(":")
        if not sep or not _LETTER.fullmatch(letter) or not value:
            raise WordFormatError(f"bad symbol token {tok!r}")
        out.append((letter, names.value(value)))
    return tuple(out)


def format_word(w: DataWord, names: ValueNames | None = None) -> str:
    if not w:
        return EPS
    name = names.name if names else str
    return " ".join(f"{a}:{name(v)}" for a, v in w)


def parse_triple(tok: str, names: ValueNames | None = None) -> Triple:
    m = re.fullmatch(r"([^\s:@*]+):([^\s:@]+)@([0-9]+)", tok)
    if not m or int(m.group(3)) < 1:
        raise WordFormatError(f"bad triple token {tok!r}")
    names = names or ValueNames()
    return (m.group(1), names.value(m.group(2)), int(m.group(3)))


def format_triple(t: Triple, names: ValueNames | None = None) -> str:
    name = names.name if names else str
    return f"{t[0]}:{name(t[1])}@{t[2]}"


def parse_origin_word(text: str, names: ValueNames | None = None) -> OriginWord:
    names = names or ValueNames()
    return tuple(parse_triple(tok, names) for tok in _split_tokens(text))


def format_origin_word(w: OriginWord, names: ValueNames | None = None) -> str:
    if not w:
        return EPS
    return " ".join(format_triple(t, names) for t in w)

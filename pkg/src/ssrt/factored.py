"""Factored outputs: origin words with some input parts collapsed to markers.

The input is cut into two parts ``u|v`` or three parts ``u|v|w``.  Every
output triple whose origin falls in an underlined part is replaced by the
marker of that part, and runs of equal markers are merged.  An offset ``z``
shifts the origins of the triples that stay concrete.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

from .core_words import (
    EPS,
    DataWord,
    OriginWord,
    Triple,
    ValueNames,
    WordFormatError,
    _split_tokens,
    concat,
    format_triple,
    parse_triple,
)

Oracle = Callable[[DataWord], OriginWord]


class Region(enum.Enum):
    LEFT = "L"
    MIDDLE = "M"
    RIGHT = "R"

    def __repr__(self) -> str:
        return f"*{self.value}"


class BlockKind(enum.Enum):
    LEFT = "left"
    MIDDLE = "middle"
    NONRIGHT = "nonright"


Item = Union[Triple, Region]

_TWO = (Region.LEFT, Region.RIGHT)
_THREE = (Region.LEFT, Region.MIDDLE, Region.RIGHT)


class FactoringError(ValueError):
    pass


@dataclass(frozen=True)
class FactoredOutput:
    """Normalized items plus the provenance they were produced with.

    Equality looks at ``items`` only; ``regions`` records which input part
    each item came from.
    """

    items: tuple[Item, ...]
    regions: tuple[Region, ...] | None = field(default=None, compare=False)
    cuts: tuple[int, ...] | None = field(default=None, compare=False)
    mask: tuple[bool, ...] | None = field(default=None, compare=False)
    z: int = field(default=0, compare=False)

    def __str__(self) -> str:
        return format_factored(self)

    def __len__(self) -> int:
        return len(self.items)

    @property
    def parts(self) -> int:
        return len(self.mask) if self.mask is not None else 0


@dataclass(frozen=True)
class Block:
    kind: BlockKind
    items: tuple[Item, ...]

    def word(self) -> OriginWord:
        """The block as an origin word; fails if it holds markers."""
        if any(isinstance(it, Region) for it in self.items):
            raise FactoringError("block contains abstract markers")
        return self.items  # type: ignore[return-value]


def factor_items(
    out: OriginWord, cuts: Sequence[int], mask: Sequence[bool], z: int = 0
) -> tuple[tuple[Item, ...], tuple[Region, ...]]:
    """Core loop of :func:`factor` on plain tuples."""
    regions_of = _THREE if len(cuts) == 2 else _TWO
    c1 = cuts[0]
    c2 = cuts[1] if len(cuts) == 2 else None
    items: list[Item] = []
    regions: list[Region] = []
    for t in out:
        o = t[2]
        part = 0 if o <= c1 else (1 if c2 is None or o <= c2 else 2)
        region = regions_of[part]
        if mask[part]:
            if not items or items[-1] is not region:
                items.append(region)
                regions.append(region)
        else:
            items.append((t[0], t[1], o + z) if z else t)
            regions.append(region)
    return tuple(items), tuple(regions)


def factor(
    out: OriginWord,
    cuts: Sequence[int],
    mask: Sequence[bool],
    z: int = 0,
    input_len: int | None = None,
) -> FactoredOutput:
    """Factor ``out`` along ``cuts``.

    ``cuts`` holds one position (``u|v``) or two (``u|v|w``); the part ending
    at a cut includes the cut position.  ``mask`` has one flag per part.
    """
    cuts = tuple(cuts)
    mask = tuple(bool(m) for m in mask)
    if len(cuts) not in (1, 2) or len(mask) != len(cuts) + 1:
        raise FactoringError("need one or two cuts and one mask flag per part")
    top = input_len if input_len is not None else max((t[2] for t in out), default=cuts[-1])
    if any(c < 0 or c > top for c in cuts) or list(cuts) != sorted(cuts):
        raise FactoringError(f"invalid cuts {cuts} for input length {top}")
    items, regions = factor_items(out, cuts, mask, z)
    return FactoredOutput(items, regions, cuts, mask, z)


def factor_word(f: Oracle, parts: Sequence[DataWord], mask: Sequence[bool], z: int = 0) -> FactoredOutput:
    """Evaluate ``f`` on the concatenation of ``parts`` and factor it."""
    if len(parts) not in (2, 3):
        raise FactoringError("need two or three parts")
    cuts, acc = [], 0
    for p in parts[:-1]:
        acc += len(p)
        cuts.append(acc)
    word = concat(*parts)
    return factor(f(word), cuts, mask, z, input_len=len(word))


def _runs(items: Sequence[Item], regions: Sequence[Region], keep) -> list[tuple[Item, ...]]:
    runs: list[tuple[Item, ...]] = []
    cur: list[Item] = []
    for it, r in zip(items, regions):
        if keep(r):
            cur.append(it)
        elif cur:
            runs.append(tuple(cur))
            cur = []
    if cur:
        runs.append(tuple(cur))
    return runs


def blocks(fo: FactoredOutput, kind: BlockKind) -> list[Block]:
    """Maximal runs of items from the left part, middle part, or not from the right part."""
    if fo.regions is None:
        raise FactoringError("factored output carries no provenance")
    if kind is BlockKind.MIDDLE and fo.parts != 3:
        raise FactoringError("middle blocks need a three-part factoring")
    keep = {
        BlockKind.LEFT: lambda r: r is Region.LEFT,
        BlockKind.MIDDLE: lambda r: r is Region.MIDDLE,
        BlockKind.NONRIGHT: lambda r: r is not Region.RIGHT,
    }[kind]
    return [Block(kind, run) for run in _runs(fo.items, fo.regions, keep)]


def left_blocks(fo: FactoredOutput) -> list[tuple[Item, ...]]:
    return [b.items for b in blocks(fo, BlockKind.LEFT)]


def middle_blocks(fo: FactoredOutput) -> list[tuple[Item, ...]]:
    return [b.items for b in blocks(fo, BlockKind.MIDDLE)]


def concretize_nonright(f: Oracle, u: DataWord, mid: DataWord, w: DataWord, i: int) -> Block:
    """Concrete contents of the ``i``-th non-right block of ``f(u̲|mid̲|w̲)``.

    Its j-th left marker is filled from the j-th left block of ``f(u|mid·w̲)``
    and its k-th middle marker from the k-th middle block of ``f(u̲|mid|w̲)``.
    """
    abstract = factor_word(f, (u, mid, w), (True, True, True))
    nonright = blocks(abstract, BlockKind.NONRIGHT)
    if not 1 <= i <= len(nonright):
        raise IndexError(f"no non-right block {i}; there are {len(nonright)}")
    lefts = left_blocks(factor_word(f, (u, concat(mid, w)), (False, True)))
    middles = middle_blocks(factor_word(f, (u, mid, w), (True, False, True)))
    # left and middle markers before block i shift the indices
    n_left = n_mid = 0
    for block in nonright[: i - 1]:
        n_left += block.items.count(Region.LEFT)
        n_mid += block.items.count(Region.MIDDLE)
    out: list[Item] = []
    for marker in nonright[i - 1].items:
        if marker is Region.LEFT:
            out.extend(lefts[n_left])
            n_left += 1
        else:
            out.extend(middles[n_mid])
            n_mid += 1
    return Block(BlockKind.NONRIGHT, tuple(out))


def format_item(it: Item, names: ValueNames | None = None) -> str:
    if isinstance(it, Region):
        return "*" + it.value
    return format_triple(it, names)


def format_factored(fo: FactoredOutput | Sequence[Item], names: ValueNames | None = None) -> str:
    items = fo.items if isinstance(fo, FactoredOutput) else fo
    if not items:
        return EPS
    return " ".join(format_item(it, names) for it in items)


def parse_factored(text: str, names: ValueNames | None = None) -> FactoredOutput:
    """Parse the token form; provenance is not recoverable from text."""
    names = names or ValueNames()
    items: list[Item] = []
    for tok in _split_tokens(text):
        if tok.startswith("*"):
            try:
                items.append(Region(tok[1:]))
            except ValueError:
                raise WordFormatError(f"bad marker {tok!r}") from None
        else:
            items.append(parse_triple(tok, names))
    return FactoredOutput(tuple(items))

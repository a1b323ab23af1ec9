"""Dependency trees: how pending left blocks are assembled from variables.

Nodes are sequences of suffix-class indices with the root as the empty
sequence.  Each node carries ``B`` block descriptions, sequences of parent
references ``P#j`` (the j-th block description of the parent node) and
variable references ``<θ#k>``.  For every suffix class there is one leaf
ending in it, and unrolling that leaf's block descriptions yields the left
blocks the prefix read so far contributes when followed by a suffix of the
class.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence, Union

from .analysis import (
    BoundExhausted,
    Bounds,
    Quotient,
    Transduction,
    delta,
    equalize,
    quotient,
)
from .core_words import DataWord, Permutation, apply_permutation
from .factored import Region, factor_items

Node = tuple[int, ...]
ROOT: Node = ()


class Parent(NamedTuple):
    index: int


class VarRef(NamedTuple):
    node: Node
    index: int


BlockSymbol = Union[Parent, VarRef]
Description = tuple[BlockSymbol, ...]
Valuation = Mapping[VarRef, tuple]


class TreeError(ValueError):
    pass


@dataclass(frozen=True)
class DependencyTree:
    nodes: frozenset[Node]
    pref: Mapping[Node, int | None]
    bl: Mapping[Node, tuple[Description, ...]]
    B: int
    n_classes: int
    bottom: bool = False
    _children: dict = field(default=None, compare=False, repr=False)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        children: dict[Node, list[Node]] = {n: [] for n in self.nodes}
        for n in self.nodes:
            if n:
                if n[:-1] not in children:
                    raise TreeError(f"node set not prefix closed at {node_name(n)}")
                children[n[:-1]].append(n)
        for v in children.values():
            v.sort()
        object.__setattr__(self, "_children", children)

    def children(self, n: Node) -> list[Node]:
        return self._children[n]

    def is_leaf(self, n: Node) -> bool:
        return not self._children[n]

    def leaves(self) -> list[Node]:
        return sorted(n for n in self.nodes if self.is_leaf(n))

    def key(self):
        """Hashable identity of the tree, independent of dict ordering."""
        return (
            self.bottom,
            tuple(sorted((n, self.pref.get(n), self.bl[n]) for n in self.nodes)),
        )

    def __hash__(self) -> int:
        return hash(self.key())

    def __eq__(self, other: object) -> bool:
        return isinstance(other, DependencyTree) and self.key() == other.key()

    def leaf_for(self, c: int) -> Node:
        found = [n for n in self.leaves() if n and n[-1] == c]
        if len(found) != 1:
            raise TreeError(f"{len(found)} leaves end in suffix class S{c}")
        return found[0]


def bottom_tree(B: int, n_classes: int) -> DependencyTree:
    return DependencyTree(frozenset([ROOT]), {ROOT: None}, {ROOT: ((),) * B}, B, n_classes, bottom=True)


def node_name(n: Node) -> str:
    return ".".join(f"S{c}" for c in n) if n else "ε"


def symbol_name(s: BlockSymbol) -> str:
    if isinstance(s, Parent):
        return f"P#{s.index}"
    return f"<{node_name(s.node)}#{s.index}>"


def var_name(r: VarRef) -> str:
    return f"{node_name(r.node)}#{r.index}"


def dump(t: DependencyTree) -> str:
    """One indented line per node, parents before children."""
    lines = []
    for n in sorted(t.nodes):
        pref = t.pref.get(n)
        fields = [f"pref={'-' if pref is None else f'C{pref}'}"]
        for i, desc in enumerate(t.bl[n], 1):
            fields.append(f"bl[{i}]=" + (" ".join(symbol_name(s) for s in desc) or "ε"))
        lines.append("  " * len(n) + f"{node_name(n)}: " + " ".join(fields))
    return "\n".join(lines)


def unroll(t: DependencyTree, node: Node, mu: Sequence[BlockSymbol]) -> tuple[VarRef, ...]:
    """Replace parent references recursively; at the root they vanish."""
    out: list[VarRef] = []
    for s in mu:
        if isinstance(s, VarRef):
            out.append(s)
        elif node:
            parent = node[:-1]
            if not 1 <= s.index <= t.B:
                raise TreeError(f"parent reference {symbol_name(s)} out of range")
            out.extend(unroll(t, parent, t.bl[parent][s.index - 1]))
    return tuple(out)


def evaluate(val: Valuation, refs: Iterable[VarRef]) -> tuple:
    out: list = []
    for r in refs:
        out.extend(val.get(r, ()))
    return tuple(out)


# -- completeness ----------------------------------------------------------------


@dataclass(frozen=True)
class CompletenessReport:
    ok: bool
    leaf: Node | None = None
    index: int | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def is_complete(t: DependencyTree, val: Valuation, u: DataWord, f: Transduction, b: Bounds) -> CompletenessReport:
    """Check that every leaf unrolls to the left blocks it stands for."""
    u = tuple(u)
    if not u:
        return CompletenessReport(t.bottom, reason="" if t.bottom else "ε requires the bottom tree")
    if t.bottom:
        return CompletenessReport(False, reason="bottom tree for a nonempty word")
    q = quotient(f, b)
    cls = q.prefix_class(u)
    inv = equalize(f, u, b).inverse()
    for c, v in enumerate(q.suffix_reps):
        try:
            leaf = t.leaf_for(c)
        except TreeError as e:
            return CompletenessReport(False, reason=str(e))
        if t.pref.get(leaf) != cls:
            return CompletenessReport(False, leaf, reason=f"pref C{t.pref.get(leaf)} but the word is in C{cls}")
        w = apply_permutation(inv, v)
        items, regions = factor_items(f(u + w), (len(u),), (False, True))
        lefts = _runs(items, regions, Region.LEFT)
        if len(lefts) > t.B:
            return CompletenessReport(False, leaf, t.B + 1, reason="more left blocks than B")
        for i in range(1, t.B + 1):
            want = lefts[i - 1] if i <= len(lefts) else ()
            got = evaluate(val, unroll(t, leaf, t.bl[leaf][i - 1]))
            if got != want:
                return CompletenessReport(False, leaf, i, reason="left block differs")
    return CompletenessReport(True)


def _runs(items, regions, which: Region) -> list[tuple]:
    runs: list[tuple] = []
    cur: list = []
    for it, r in zip(items, regions):
        if r is which:
            cur.append(it)
        elif cur:
            runs.append(tuple(cur))
            cur = []
    if cur:
        runs.append(tuple(cur))
    return runs


# -- extension ----------------------------------------------------------------------


@dataclass(frozen=True)
class Extension:
    """Result of extending the tree structure of a class representative by one symbol."""

    tree: DependencyTree
    eta: int
    tracker: Permutation
    middles: dict  # VarRef -> middle block computed on the representative
    prefix_class: int


def extend_structure(t: DependencyTree, q: Quotient, rep: DataWord, letter: str, i: int) -> Extension:
    """Tree part of the extension by ``(letter, delta_i)`` after the representative ``rep``."""
    f = q.f
    eta = delta(i)
    w = tuple(rep) + ((letter, eta),)
    tracker = Permutation.complete({delta(j): d for j, d in enumerate(q.ifl(w), 1)})
    new_pref = q.prefix_class(w)
    cuts = (len(rep), len(w))
    nodes = {ROOT}
    bl: dict[Node, tuple[Description, ...]] = {}
    pref: dict[Node, int | None] = {}
    middles: dict[VarRef, tuple] = {}
    for c, v in enumerate(q.suffix_reps):
        pv = apply_permutation(tracker, v)
        parent = ROOT if t.bottom else t.leaf_for(q.suffix_class(((letter, eta),) + pv))
        theta = parent + (c,)
        out = f(w + pv)
        items, regions = factor_items(out, cuts, (True, True, True))
        descs: list[Description] = []
        cur: list[BlockSymbol] = []
        n_left = n_mid = 0
        for it in items:
            if it is Region.RIGHT:
                if cur:
                    descs.append(tuple(cur))
                    cur = []
            elif it is Region.LEFT:
                n_left += 1
                cur.append(Parent(n_left))
            else:
                n_mid += 1
                cur.append(VarRef(theta, n_mid))
        if cur:
            descs.append(tuple(cur))
        if len(descs) > t.B or n_left > t.B:
            raise BoundExhausted(f"{len(descs)} non-right blocks exceed B={t.B}")
        bl[theta] = tuple(descs) + ((),) * (t.B - len(descs))
        pref[theta] = new_pref
        citems, cregions = factor_items(out, cuts, (True, False, True))
        for k, block in enumerate(_runs(citems, cregions, Region.MIDDLE), 1):
            middles[VarRef(theta, k)] = block
        # keep the path to the new leaf
        for j in range(len(theta) + 1):
            nodes.add(theta[:j])
    for n in nodes:
        if n not in bl:
            bl[n] = t.bl[n]
            pref[n] = t.pref.get(n)
    tree = DependencyTree(frozenset(nodes), pref, bl, t.B, t.n_classes)
    return Extension(tree, eta, tracker, middles, new_pref)


def extend(
    t: DependencyTree, val: Valuation, f: Transduction, u: DataWord, sym: tuple[str, int], b: Bounds
) -> tuple[DependencyTree, dict]:
    """Extend ``(t, val)``, complete for ``u``, to ``u·sym``."""
    q = quotient(f, b)
    u = tuple(u)
    letter, d = sym
    if not u:
        if not t.bottom:
            raise TreeError("the empty word needs the bottom tree")
        rep = ()
        ifl: tuple[int, ...] = ()
    else:
        if t.bottom:
            raise TreeError("bottom tree given for a nonempty word")
        rep = q.rep(q.prefix_class(u))
        ifl = q.ifl(u)
    i = ifl.index(d) + 1 if d in ifl else 0
    ext = extend_structure(t, q, rep, letter, i)
    uu = u + ((letter, d),)
    inv = equalize(f, uu, b).inverse()
    new_val = dict(val)
    cuts = (len(u), len(uu))
    for leaf in ext.tree.leaves():
        if len(leaf) == 0:
            continue
        v = apply_permutation(inv, q.suffix_reps[leaf[-1]])
        items, regions = factor_items(f(uu + v), cuts, (True, False, True))
        for k, block in enumerate(_runs(items, regions, Region.MIDDLE), 1):
            new_val[VarRef(leaf, k)] = block
    return ext.tree, new_val


# -- shortening and trimming -----------------------------------------------------------


def unary_internal_nodes(t: DependencyTree) -> list[Node]:
    return [n for n in sorted(t.nodes) if n and len(t.children(n)) == 1]


def _rekey_collides(t: DependencyTree, node: Node) -> bool:
    """Whether bypassing ``node`` would give a descendant the key of another node."""
    k = len(node)
    moved = {n for n in t.nodes if n[:k] == node}
    return any(node[:-1] + n[k:] in t.nodes - moved for n in moved if n != node)


def shorten(t: DependencyTree, node: Node | None = None) -> DependencyTree:
    """Bypass one internal node that has a single child.

    Without an explicit ``node`` the first candidate (in key order) whose
    re-keyed descendants do not clash with existing nodes is chosen.
    """
    candidates = unary_internal_nodes(t)
    if node is None:
        free = [n for n in candidates if not _rekey_collides(t, n)]
        if not free:
            raise TreeError("no internal node with a single child can be bypassed")
        node = free[0]
    elif node not in candidates:
        raise TreeError(f"{node_name(node)} is not an internal node with a single child")
    elif _rekey_collides(t, node):
        raise TreeError(f"bypassing {node_name(node)} would clash with an existing node")
    (child,) = t.children(node)
    up = node[:-1]
    k = len(node)

    def rekey(n: Node) -> Node:
        return up + n[k:] if n[:k] == node else n

    nodes, pref, bl = set(), {}, {}
    for n in t.nodes:
        if n == node:
            continue
        m = rekey(n)
        nodes.add(m)
        pref[m] = t.pref.get(n)
        if n == child:
            desc = []
            for block in t.bl[n]:
                new: list[BlockSymbol] = []
                for s in block:
                    new.extend(t.bl[node][s.index - 1] if isinstance(s, Parent) else (s,))
                desc.append(tuple(new))
            bl[m] = tuple(desc)
        else:
            bl[m] = t.bl[n]
    return DependencyTree(frozenset(nodes), pref, bl, t.B, t.n_classes)


def shorten_fully(t: DependencyTree) -> DependencyTree:
    while any(not _rekey_collides(t, n) for n in unary_internal_nodes(t)):
        t = shorten(t)
    return t


def trim(t: DependencyTree, val: Valuation) -> tuple[DependencyTree, dict]:
    """Give each maximal parent-free infix its own variable of the node.

    Infixes are numbered in document order over the node's block
    descriptions.  Their new contents are computed simultaneously from
    ``val``; variables consumed by an infix and not reused become empty.
    """
    bl: dict[Node, tuple[Description, ...]] = {}
    targets: dict[VarRef, tuple] = {}
    consumed: set[VarRef] = set()
    for n in sorted(t.nodes):
        j = 0
        descs = []
        for block in t.bl[n]:
            new: list[BlockSymbol] = []
            run: list[VarRef] = []
            for s in tuple(block) + (None,):
                if isinstance(s, VarRef):
                    run.append(s)
                    continue
                if run:
                    j += 1
                    ref = VarRef(n, j)
                    targets[ref] = evaluate(val, run)
                    consumed.update(run)
                    new.append(ref)
                    run = []
                if s is not None:
                    new.append(s)
            descs.append(tuple(new))
        bl[n] = tuple(descs)
    new_val = dict(val)
    for r in consumed:
        new_val[r] = ()
    new_val.update(targets)
    return DependencyTree(t.nodes, dict(t.pref), bl, t.B, t.n_classes, t.bottom), new_val


# -- reducedness --------------------------------------------------------------------------


@dataclass(frozen=True)
class ReducedReport:
    ok: bool
    violations: tuple[str, ...] = ()
    bottom: bool = False

    def __bool__(self) -> bool:
        return self.ok


def is_reduced(t: DependencyTree, b: Bounds | None = None) -> ReducedReport:
    """Check the size and occurrence invariants of reduced trees.

    The bottom tree is below every bound and is reported as such.
    """
    if t.bottom:
        return ReducedReport(True, (), bottom=True)
    errs: list[str] = []
    B = t.B
    for n in sorted(t.nodes):
        if len(n) > t.n_classes + 1:
            errs.append(f"{node_name(n)}: path length {len(n)} exceeds {t.n_classes + 1}")
    leaves = [n for n in t.leaves() if n]
    labels = {t.pref.get(n) for n in leaves}
    if len(labels) > 1:
        errs.append(f"leaves carry several prefix classes: {sorted(map(str, labels))}")
    for c in range(t.n_classes):
        k = sum(1 for n in leaves if n[-1] == c)
        if k != 1:
            errs.append(f"{k} leaves end in S{c}")
    for n in sorted(t.nodes):
        seen: set = set()
        for i, block in enumerate(t.bl[n], 1):
            if len(block) > 2 * B + 1:
                errs.append(f"{node_name(n)}: bl[{i}] has length {len(block)} > {2 * B + 1}")
            for s in block:
                if isinstance(s, VarRef):
                    if s.node != n:
                        errs.append(f"{node_name(n)}: bl[{i}] uses {symbol_name(s)} owned by another node")
                    if not 1 <= s.index <= B * B + B:
                        errs.append(f"{node_name(n)}: {symbol_name(s)} index out of range")
                elif not 1 <= s.index <= B:
                    errs.append(f"{node_name(n)}: {symbol_name(s)} index out of range")
                if s in seen:
                    errs.append(f"{node_name(n)}: {symbol_name(s)} occurs twice")
                seen.add(s)
    return ReducedReport(not errs, tuple(errs))


def pipeline(
    t: DependencyTree, val: Valuation, f: Transduction, u: DataWord, sym: tuple[str, int], b: Bounds
) -> tuple[DependencyTree, dict]:
    """Extend, shorten fully, then trim."""
    t1, val1 = extend(t, val, f, u, sym, b)
    return trim(shorten_fully(t1), val1)


def initial(f: Transduction, b: Bounds) -> tuple[DependencyTree, dict]:
    q = quotient(f, b)
    return bottom_tree(q.B, q.n_suffix_classes), {}

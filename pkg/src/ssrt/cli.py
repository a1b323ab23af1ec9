"""Command-line front end.

Exit status: 0 on success, 1 on a semantic failure (invalid machine, stuck
run, mismatch), 2 on malformed input.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import fixtures
from .analysis import (
    BUILTINS,
    BoundExhausted,
    Bounds,
    ReservedValueError,
    Transduction,
    builtin,
    check_user_word,
    influence_report,
    machine_oracle,
    quotient,
)
from .core_words import ValueNames, WordFormatError, format_origin_word, parse_word
from .deptree import TreeError, VarRef, bottom_tree, dump, extend, shorten_fully, trim, var_name
from .factored import FactoringError, factor, format_factored
from .machine import (
    MachineFormatError,
    NondeterminismError,
    Ssrt,
    UndefinedRegisterError,
    format_machine,
    output_of,
    parse_machine,
    run,
    validate,
)
from .synth import synth_ifl_tracker, synth_transducer, verify_against_oracle


class UsageError(Exception):
    """Malformed input; reported with exit status 2."""


def _load_machine(spec: str) -> Ssrt:
    p = Path(spec)
    if p.is_file():
        try:
            return parse_machine(p.read_text())
        except MachineFormatError as e:
            raise UsageError(f"{spec}: {e}") from None
    if spec in fixtures.names():
        return fixtures.load_fixture(spec).machine
    raise UsageError(f"no machine file or fixture named {spec!r}")


def _load_oracle(spec: str) -> Transduction:
    if spec in fixtures.names():
        return fixtures.load_fixture(spec).oracle
    if spec in BUILTINS:
        return builtin(spec)
    if Path(spec).is_file():
        return machine_oracle(_load_machine(spec), Path(spec).stem)
    raise UsageError(f"no oracle, fixture or machine file named {spec!r}")


def _word(text: str, names: ValueNames, user: bool = False):
    try:
        w = parse_word(text, names)
        return check_user_word(w) if user else w
    except (WordFormatError, ReservedValueError) as e:
        raise UsageError(f"bad word {text!r}: {e}") from None


def _bounds(args) -> Bounds:
    try:
        return Bounds(args.max_word_len, args.fresh_values, args.max_ext_len)
    except ValueError as e:
        raise UsageError(str(e)) from None


# -- verbs ---------------------------------------------------------------------------


def cmd_validate(args) -> int:
    m = _load_machine(args.machine)
    errs = validate(m)
    for e in errs:
        print(f"VIOLATION {e}")
    print("VALID" if not errs else f"INVALID {len(errs)}")
    return 0 if not errs else 1


def cmd_run(args) -> int:
    m = _load_machine(args.machine)
    names = ValueNames()
    w = _word(args.word, names)
    try:
        c = run(m, w)
        out = None if c is None else output_of(m, c, w[-1][1] if w else None)
    except UndefinedRegisterError as e:
        print(f"UNDEFINED {e}")
        return 1
    except NondeterminismError as e:
        print(f"NONDETERMINISTIC {e}")
        return 1
    if c is None:
        print("STUCK")
        return 1
    if out is None:
        print("UNDEFINED")
        return 1
    print(format_origin_word(out, names))
    return 0


def _mask(text: str, parts: int) -> tuple[bool, ...]:
    if len(text) != parts or set(text) - {"0", "1"}:
        raise UsageError(f"mask {text!r} needs one 0/1 flag per part ({parts})")
    return tuple(ch == "1" for ch in text)


def cmd_factor(args) -> int:
    names = ValueNames()
    w = _word(args.word, names)
    f = _load_oracle(args.source)
    try:
        cuts = tuple(int(c) for c in args.cuts.split(","))
    except ValueError:
        raise UsageError(f"bad cuts {args.cuts!r}") from None
    mask = _mask(args.mask, len(cuts) + 1)
    try:
        out = f(w)
    except ValueError as e:
        print(f"UNDEFINED {e}")
        return 1
    try:
        fo = factor(out, cuts, mask, args.z, input_len=len(w))
    except FactoringError as e:
        raise UsageError(str(e)) from None
    print(format_factored(fo, names))
    return 0


def cmd_analyze(args) -> int:
    f = _load_oracle(args.oracle)
    names = ValueNames()
    u = _word(args.word, names, user=True)
    b = _bounds(args)
    for line in influence_report(f, u, b, names):
        print(line)
    return 0


def cmd_tree(args) -> int:
    f = _load_oracle(args.oracle)
    names = ValueNames()
    w = _word(args.word, names, user=True)
    b = _bounds(args)
    try:
        q = quotient(f, b)
        t, val = bottom_tree(q.B, q.n_suffix_classes), {}
        print(f"B={q.B} suffix_classes={q.n_suffix_classes}")
        print("INITIAL")
        print(dump(t))
        for k, sym in enumerate(w):
            print(f"READ {k + 1} {sym[0]}:{names.name(sym[1])}")
            t1, val1 = extend(t, val, f, w[:k], sym, b)
            print("EXTENDED")
            print(dump(t1))
            t2 = shorten_fully(t1)
            print("SHORTENED")
            print(dump(t2))
            t, val = trim(t2, val1)
            print("TRIMMED")
            print(dump(t))
            used = {x for n in t.nodes for block in t.bl[n] for x in block if isinstance(x, VarRef)}
            for r in sorted(used):
                print(f"  {var_name(r)} = {format_origin_word(val.get(r, ()), names)}")
    except (BoundExhausted, TreeError) as e:
        print(f"BOUND EXHAUSTED {e}")
        return 1
    return 0


def cmd_synth(args) -> int:
    f = _load_oracle(args.oracle)
    b = _bounds(args)
    try:
        res = (synth_ifl_tracker if args.tracker else synth_transducer)(f, b)
    except BoundExhausted as e:
        print(f"BOUND EXHAUSTED {e}")
        return 1
    text = format_machine(res.machine, res.header())
    if args.output:
        Path(args.output).write_text(text)
        for h in res.header():
            print(h)
    else:
        sys.stdout.write(text)
    return 0 if res.closed else 1


def cmd_verify(args) -> int:
    m = _load_machine(args.machine)
    f = _load_oracle(args.oracle)
    rep = verify_against_oracle(m, f, _bounds(args))
    for line in rep.lines():
        print(line)
    return 0 if rep.ok else 1


def cmd_fixtures(args) -> int:
    for n in fixtures.names():
        fx = fixtures.load_fixture(n)
        print(f"{n} {fx.kind} {fx.note}")
    return 0


# -- parser ------------------------------------------------------------------------------


def _add_bounds(p: argparse.ArgumentParser) -> None:
    d = Bounds()
    p.add_argument("--max-word-len", type=int, default=d.max_word_len)
    p.add_argument("--fresh-values", type=int, default=d.fresh_values)
    p.add_argument("--max-ext-len", type=int, default=d.max_ext_len)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ssrt", description="Streaming string register transducers with origin semantics.")
    sub = p.add_subparsers(dest="verb", required=True)

    s = sub.add_parser("validate", help="check a machine for well-formedness, copylessness and determinism")
    s.add_argument("machine")
    s.set_defaults(fn=cmd_validate)

    s = sub.add_parser("run", help="run a machine on a data word")
    s.add_argument("machine")
    s.add_argument("word", help="space-separated letter:value tokens, or EPS")
    s.set_defaults(fn=cmd_run)

    s = sub.add_parser("factor", help="factored output of a machine or oracle")
    s.add_argument("source")
    s.add_argument("word")
    s.add_argument("cuts", help="one or two comma-separated cut positions")
    s.add_argument("mask", help="one 0/1 flag per part; 1 collapses the part to a marker")
    s.add_argument("z", nargs="?", type=int, default=0, help="origin offset for concrete triples")
    s.set_defaults(fn=cmd_factor)

    s = sub.add_parser("analyze", help="memorable, vulnerable and influencing values of a word")
    s.add_argument("oracle")
    s.add_argument("word")
    _add_bounds(s)
    s.set_defaults(fn=cmd_analyze)

    s = sub.add_parser("tree", help="dependency tree operations")
    tsub = s.add_subparsers(dest="tree_verb", required=True)
    d = tsub.add_parser("demo", help="print the extend, shorten and trim stages along a word")
    d.add_argument("oracle")
    d.add_argument("word")
    _add_bounds(d)
    d.set_defaults(fn=cmd_tree)

    s = sub.add_parser("synth", help="synthesize a machine from an oracle")
    s.add_argument("oracle")
    s.add_argument("--tracker", action="store_true", help="only the influencing-value tracker")
    s.add_argument("-o", "--output", help="write the machine here instead of standard output")
    _add_bounds(s)
    s.set_defaults(fn=cmd_synth)

    s = sub.add_parser("verify", help="compare a machine with an oracle on all bounded words")
    s.add_argument("machine")
    s.add_argument("oracle")
    _add_bounds(s)
    s.set_defaults(fn=cmd_verify)

    s = sub.add_parser("fixtures", help="list builtin fixtures")
    s.set_defaults(fn=cmd_fixtures)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

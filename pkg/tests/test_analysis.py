import itertools

import pytest
from hypothesis import given, settings, strategies as st

from ssrt.analysis import (
    DELTA0,
    DELTA_BASE,
    NONIFL_BASE,
    PAPER_BUILTINS,
    Bounds,
    MemorableWitness,
    NotComparable,
    ReservedValueError,
    Transduction,
    VulnerableWitness,
    aifl,
    builtin,
    canonical_words,
    check_theorem_properties,
    check_user_word,
    delta,
    equalize,
    equalized,
    equiv_report,
    f_equiv,
    fresh_values,
    ifl_values,
    influence_report,
    machine_equiv,
    memorable_witnesses,
    replay_memorable,
    replay_vulnerable,
    suffix_equiv,
    vulnerable_witnesses,
)
from ssrt.core_words import Permutation, apply_permutation, data, isomorphic

from conftest import D1, D2, D3, D4, D5, MEDIUM, SMALL, plain, word


class TestBands:
    def test_delta(self):
        assert delta(0) == DELTA0
        assert delta(3) == DELTA_BASE + 3

    def test_reserved_values_rejected(self):
        with pytest.raises(ReservedValueError):
            check_user_word(plain(D1, DELTA_BASE + 1))
        assert check_user_word(plain(D1, 999_999)) == plain(D1, 999_999)

    def test_fresh_values(self):
        fresh = fresh_values([DELTA0 + 1], 2)
        assert fresh == [DELTA0 + 2, DELTA0 + 3]

    @pytest.mark.parametrize("args", [(0, 2, 1), (2, 1, 1), (2, 2, 0)])
    def test_bounds_rejected(self, args):
        with pytest.raises(ValueError):
            Bounds(*args)


class TestBuiltins:
    def test_third_or_fourth(self):
        f = builtin("third_or_fourth")
        assert f(plain(D1, D2, D3, D4)) == ()
        assert f(plain(D1, D2, D3, D4, D1)) == (("a", D3, 3),)
        assert f(plain(D1, D2, D3, D4, D5)) == (("a", D4, 4),)

    def test_double_gate(self):
        f = builtin("double_gate")
        out = f(plain(D1, D2, D1))
        assert out == (("a", D1, 1), ("a", D2, 2), ("a", D1, 3)) + (("a", D1, 3), ("a", D2, 2), ("a", D1, 1))

    def test_unknown(self):
        with pytest.raises(KeyError):
            builtin("nope")

    def test_shared_instances(self):
        assert builtin("identity") is builtin("identity")


class TestInfluence:
    def test_memorable_in_three_values(self, ior):
        found = memorable_witnesses(ior, plain(D1, D2, D3), Bounds())
        assert set(found) == {D1}
        assert replay_memorable(ior, plain(D1, D2, D3), found[D1])

    def test_memorable_witness_by_hand(self, ior):
        # replacing the first value flips the last comparison of d1 d2 d3 | d1
        w = MemorableWitness(D1, plain(D1), D4)
        assert replay_memorable(ior, plain(D1, D2, D3), w)
        assert not replay_memorable(ior, plain(D1, D2, D3), MemorableWitness(D2, plain(D1), D4))

    def test_unsafe_replacement_rejected(self, ior):
        assert not replay_memorable(ior, plain(D1, D2, D3), MemorableWitness(D1, plain(D1), D2))

    def test_not_memorable_after_four_values(self):
        f = builtin("third_or_fourth")
        assert memorable_witnesses(f, plain(D1, D2, D3, D4), Bounds(4, 3, 2)) == {}

    def test_vulnerable_via_two_extra_values(self):
        f = builtin("third_or_fourth")
        u = plain(D1, D2)
        w = VulnerableWitness(D1, plain(D3, D4), plain(D1), D5)
        assert replay_vulnerable(f, u, w)
        found = vulnerable_witnesses(f, u, Bounds(4, 3, 2))
        assert set(found) == {D1}
        assert replay_vulnerable(f, u, found[D1])

    def test_vulnerable_replay_rejects_value_in_extension(self):
        f = builtin("third_or_fourth")
        assert not replay_vulnerable(f, plain(D1, D2), VulnerableWitness(D1, plain(D1, D4), plain(D1), D5))

    def test_third_or_fourth_prefix_still_memorable(self):
        # d1 d2 | d1 d1 d1 vs d1' d2 | d1 d1 d1: the output moves from origin 3 to 4
        f = builtin("third_or_fourth")
        w = MemorableWitness(D1, plain(D1, D1, D1), D5)
        assert replay_memorable(f, plain(D1, D2), w)

    def test_aifl_types_and_order(self):
        f = builtin("double_gate")
        assert [(t.value, t.kind) for t in aifl(f, plain(D1, D2, D3), SMALL)] == [(D2, "vm"), (D1, "vm")]
        assert ifl_values(f, plain(D1, D2, D3), SMALL) == (D2, D1)

    def test_identity_has_no_influencing_values(self):
        assert aifl(builtin("identity"), plain(D1, D2, D1), MEDIUM) == ()

    def test_empty_word(self, ior):
        assert memorable_witnesses(ior, (), SMALL) == {}
        assert vulnerable_witnesses(ior, (), SMALL) == {}

    def test_report(self, ior):
        lines = influence_report(ior, plain(D1, D2, D3), SMALL)
        assert lines[0].startswith("MEMORABLE 1 WITNESS v=[")
        assert lines[0].endswith("proven")
        assert any(line.startswith("VULNERABLE 1 WITNESS u'=[") for line in lines)
        assert "AIFL 1 1 vm" in lines
        assert "NONINFLUENCING 2 bounded" in lines and "NONINFLUENCING 3 bounded" in lines

    @pytest.mark.parametrize("name", PAPER_BUILTINS)
    def test_invariance_of_influence(self, name):
        f = builtin(name)
        p = Permutation({D1: 40, 40: D1, D2: 41, 41: D2, D3: 42, 42: D3})
        for u in canonical_words(f.alphabet, 3):
            u = apply_permutation(Permutation({0: D1, D1: 0, 2: D3, D3: 2}), u)
            got = {p(d) for d in ifl_values(f, u, SMALL)}
            assert got == set(ifl_values(f, apply_permutation(p, u), SMALL))


class TestMonotonicity:
    """A witness for ``u (s,e)`` lifts to a witness for ``u`` by moving ``(s,e)`` into the suffix."""

    @pytest.mark.parametrize("name", PAPER_BUILTINS)
    def test_lifted_witnesses_replay(self, name):
        f = builtin(name)
        for u in canonical_words(f.alphabet, 3):
            vals = data(u)
            for a in f.alphabet:
                for e in list(vals) + [len(vals)]:
                    s = ((a, e),)
                    for d, w in memorable_witnesses(f, u + s, SMALL).items():
                        if d != e:
                            assert replay_memorable(f, u, MemorableWitness(d, s + w.v, w.replacement))
                            assert d in memorable_witnesses(f, u, Bounds(3, 3, 2))
                    for d, w in vulnerable_witnesses(f, u + s, SMALL).items():
                        if d != e:
                            assert replay_vulnerable(f, u, VulnerableWitness(d, s + w.extension, w.v, w.replacement))
                            assert d in vulnerable_witnesses(f, u, Bounds(3, 3, 2))

    @pytest.mark.parametrize("name", PAPER_BUILTINS)
    def test_bigger_bounds_find_more(self, name):
        f = builtin(name)
        for u in canonical_words(f.alphabet, 3):
            assert set(memorable_witnesses(f, u, SMALL)) <= set(memorable_witnesses(f, u, MEDIUM))
            assert set(vulnerable_witnesses(f, u, SMALL)) <= set(vulnerable_witnesses(f, u, MEDIUM))


class TestEqualizing:
    def test_influencing_values_go_to_deltas(self, ior):
        assert equalized(ior, plain(D1, D2, D3), SMALL) == plain(delta(1), NONIFL_BASE + 1, NONIFL_BASE + 2)

    def test_two_influencing_values(self):
        f = builtin("double_gate")
        assert equalized(f, plain(D1, D2, D3), SMALL) == plain(delta(2), delta(1), NONIFL_BASE + 1)

    @given(st.lists(st.integers(0, 5), max_size=4))
    @settings(max_examples=40, deadline=None)
    def test_equalizing_is_a_safe_renaming(self, values):
        f = builtin("double_gate")
        u = plain(*values)
        p = equalize(f, u, SMALL)
        assert isomorphic(u, apply_permutation(p, u))
        assert equalized(f, u, SMALL) == equalized(f, apply_permutation(Permutation({0: 9, 9: 0}), u), SMALL)


class TestPrefixEquivalence:
    def test_renamed_words_are_equivalent(self, ior):
        r = f_equiv(ior, plain(D1, D2), plain(D5, D4), SMALL)
        assert r.equivalent
        assert apply_permutation(r.permutation, plain(D5, D4)) == plain(D1, D2)

    def test_empty_word_stands_alone(self, ior):
        r = f_equiv(ior, (), plain(D1), SMALL)
        assert not r.equivalent

    def test_double_gate_distinguishes_middle_swap(self):
        f = builtin("double_gate")
        r = f_equiv(f, plain(D1, D2, D3, D1, D2, D3), plain(D1, D2, D3, D2, D1, D3), SMALL)
        assert not r.equivalent and r.verdict == "distinguished"
        line = equiv_report(plain(D1, D2, D3, D1, D2, D3), plain(D1, D2, D3, D2, D1, D3), r)
        assert line.startswith("DISTINGUISHED [") and line.endswith("proven")

    def test_condition_one_counterexample(self):
        # a title contributes nothing to the output, a first name does
        f = builtin("name_reversal")
        r = f_equiv(f, word("title", D1), word("firstName", D1), SMALL)
        assert not r.equivalent and r.condition == 1
        assert r.outputs[0] != r.outputs[1]

    @pytest.mark.parametrize("name", ["identity", "identity_or_reverse", "double_gate"])
    def test_equivalence_laws(self, name):
        f = builtin(name)
        words = list(canonical_words(f.alphabet, 2))
        eq = {(i, j): f_equiv(f, u, v, SMALL).equivalent for (i, u), (j, v) in itertools.product(enumerate(words), repeat=2)}
        n = len(words)
        for i in range(n):
            assert eq[i, i]
            for j in range(n):
                assert eq[i, j] == eq[j, i]
                for k in range(n):
                    if eq[i, j] and eq[j, k]:
                        assert eq[i, k]

    def test_report_line(self, ior):
        r = f_equiv(ior, plain(D1), plain(D2), SMALL)
        assert equiv_report(plain(D1), plain(D2), r) == "EQUIV [a:1] [a:2] PI={1->2,2->1} bounded"


class TestSuffixEquivalence:
    def test_identity_or_reverse(self, ior):
        # prefixes are equalized, so suffixes speak about delta values
        prefixes = [plain(D1), plain(D1, D2)]
        assert suffix_equiv(ior, plain(D4), plain(D5), prefixes, SMALL)
        r = suffix_equiv(ior, plain(delta(1)), plain(D4), prefixes, SMALL)
        assert not r.equivalent
        assert r.counterexample[0] == plain(delta(1))

    def test_same_suffix(self, ior):
        assert suffix_equiv(ior, plain(D3), plain(D3), [plain(D1, D2)], SMALL)


class TestMachineEquivalence:
    def test_same_state_and_pattern(self, example1):
        assert machine_equiv(example1, plain(D1, D2), plain(D4, D5), SMALL)

    def test_different_states(self, example1):
        assert not machine_equiv(example1, plain(D1, D1), plain(D1, D2), SMALL)

    def test_stuck_run(self, example1):
        with pytest.raises(NotComparable):
            machine_equiv(example1, word("z", D1), plain(D1), SMALL)


class TestTheoremProperties:
    def test_builtin(self, ior):
        rep = check_theorem_properties(ior, MEDIUM)
        assert rep.ok and rep.blowup_constant == 1 and rep.equiv_index_estimate == 2

    def test_double_gate_blowup(self):
        rep = check_theorem_properties(builtin("double_gate"), SMALL, index_len=1)
        assert rep.ok and rep.blowup_constant == 2

    def test_peeking_oracle(self):
        def peek(w):
            return tuple((a, w[-1][1], i) for i, (a, _) in enumerate(w, 1))

        rep = check_theorem_properties(Transduction("peek", peek), SMALL, index_len=0)
        assert not rep.no_data_peeking and not rep.ok
        kind, w, item = rep.counterexamples[0]
        assert kind == "peeking" and item[1] not in data(w[: item[2]])

    def test_non_invariant_oracle(self):
        def tagged(w):
            return tuple(("a", d, i) for i, (_, d) in enumerate(w, 1) if d == 0)

        rep = check_theorem_properties(Transduction("zero", tagged), SMALL, index_len=0)
        assert not rep.perm_invariant and rep.counterexamples[0][0] == "permutation"

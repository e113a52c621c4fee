import random

import pytest
from hypothesis import given, strategies as st

from goalrec import (
    AltConditions,
    EMPTY_KB,
    Literal,
    conflict_set,
    entails,
    kb_consistent,
    kb_reduce,
    lit,
    negate_set,
    parse_kb,
    rec,
    state_update,
)
from goalrec.conditions import KbParseError, covers, literal_options, missing_for


def S(*texts):
    return frozenset(lit(t) for t in texts)


def literals(draw_atoms=("a", "b", "c", "d", "e", "f")):
    return st.builds(Literal, st.sampled_from(draw_atoms), st.booleans())


condition_sets = st.frozensets(literals(), max_size=6)


class TestNegateSet:
    def test_worked_example(self):
        assert negate_set(S("a", "b", "c")) == S("!a", "!b", "!c")

    def test_empty(self):
        assert negate_set(frozenset()) == frozenset()

    def test_mixed_polarities(self):
        assert negate_set(S("!p", "q")) == S("p", "!q")

    @given(condition_sets)
    def test_involution_and_cardinality(self, s):
        assert negate_set(negate_set(s)) == s
        assert len(negate_set(s)) == len(s)


class TestRec:
    def test_worked_example(self):
        assert rec(S("a", "b", "c"), S("!b", "c", "d", "e")) == S("c", "d", "e")

    def test_empty_parent(self):
        assert rec(frozenset(), S("x", "y")) == S("x", "y")

    def test_matches_two_component_form(self):
        # oracle: {IE n CE} u {CE \ negate(IE)} computed literally
        rng = random.Random(7)
        atoms = ["a", "b", "c", "d", "e", "f"]
        for _ in range(500):
            ie = frozenset(
                Literal(a, rng.random() < 0.5) for a in rng.sample(atoms, rng.randint(0, 6))
            )
            ce = frozenset(
                Literal(a, rng.random() < 0.5) for a in rng.sample(atoms, rng.randint(0, 6))
            )
            expected = (ie & ce) | (ce - negate_set(ie))
            assert rec(ie, ce) == expected

    def test_exhaustive_small_scale(self):
        # every (ie, ce) pair over two atoms, each atom absent/positive/negative
        def all_sets(atoms):
            out = [frozenset()]
            for a in atoms:
                out = [
                    s | extra
                    for s in out
                    for extra in (frozenset(), {Literal(a, True)}, {Literal(a, False)})
                ]
            return out

        universe = all_sets(["a", "b"])
        for ie in universe:
            for ce in universe:
                assert rec(ie, ce) == (ie & ce) | (ce - negate_set(ie))

    @given(condition_sets, condition_sets)
    def test_monotone_shrink(self, ie, ce):
        assert rec(ie, ce) <= ce

    @given(condition_sets, condition_sets)
    def test_no_conflict_means_identity(self, ie, ce):
        if not conflict_set(ie, ce):
            assert rec(ie, ce) == ce


class TestEntails:
    def test_case1_subset(self):
        assert entails(S("p", "!q", "s", "t"), S("p", "!q"))

    def test_case1_not_subset(self):
        assert not entails(S("p", "!q", "s"), S("p", "!q", "w"))

    def test_reflexive(self):
        x = S("p", "!q")
        assert entails(x, x)


class TestConflictSet:
    def test_case2(self):
        assert conflict_set(S("p", "!q", "w"), S("p", "!q", "!w")) == S("!w")

    def test_agreement(self):
        assert conflict_set(S("p"), S("p")) == frozenset()

    def test_total_disagreement(self):
        assert conflict_set(S("a", "!b"), S("!a", "b")) == S("!a", "b")


class TestStateUpdate:
    def test_overwrite(self):
        assert state_update(S("p"), S("!p", "q")) == S("!p", "q")

    def test_empty_state(self):
        assert state_update(frozenset(), S("x")) == S("x")

    def test_empty_event(self):
        assert state_update(S("a"), frozenset()) == S("a")


HEALTH_KB = """
rule Emergency_Treatment_Provided -> Received_Text | Received_Voice;
rule Normal_Treatment_Provided -> (Received_Text | Received_Voice) & PreExisting_Disease_Searched & Test_Result_Known;
"""


class TestKnowledgeBase:
    def test_parse_rules_to_dnf(self):
        kb = parse_kb(HEALTH_KB)
        assert kb.rules[0].head == "Emergency_Treatment_Provided"
        assert set(kb.rules[0].disjuncts) == {
            frozenset({"Received_Text"}),
            frozenset({"Received_Voice"}),
        }
        assert set(kb.rules[1].disjuncts) == {
            frozenset({"Received_Text", "PreExisting_Disease_Searched", "Test_Result_Known"}),
            frozenset({"Received_Voice", "PreExisting_Disease_Searched", "Test_Result_Known"}),
        }

    def test_parse_mutex_and_comments(self):
        kb = parse_kb("# note\nmutex Insufficient Payment_done;\n")
        assert kb.mutexes == frozenset({frozenset({"Insufficient", "Payment_done"})})

    def test_parse_error_has_line(self):
        with pytest.raises(KbParseError) as err:
            parse_kb("rule Broken ->;\n")
        assert err.value.line == 1

    def test_reduce_drops_redundant_head(self):
        kb = parse_kb(HEALTH_KB)
        before = AltConditions.of(
            [S("Emergency_Treatment_Provided", "Received_Text"),
             S("Emergency_Treatment_Provided", "Received_Voice")]
        )
        after = kb_reduce(before, kb)
        assert after.alternatives == (S("Received_Text"), S("Received_Voice"))

    def test_reduce_without_heads_is_identity(self):
        kb = parse_kb(HEALTH_KB)
        alts = AltConditions.of([S("x", "y")])
        assert kb_reduce(alts, kb) == alts

    def test_reduce_full_g3_listing(self):
        kb = parse_kb(HEALTH_KB)
        base = [
            "PreExisting_Disease_Searched",
            "Allergies_Checked",
            "Test_Result_Known",
            "Normal_Treatment_Provided",
        ]
        before = AltConditions.of(
            S(*base, msg, sample)
            for msg in ("Received_Text", "Received_Voice")
            for sample in ("Sample_Taken", "Performed_Procedure")
        )
        after = kb_reduce(before, kb)
        assert after.alternatives == tuple(
            S(*base[:3], msg, sample)
            for msg in ("Received_Text", "Received_Voice")
            for sample in ("Sample_Taken", "Performed_Procedure")
        )

    def test_reduce_idempotent_and_shrinking(self):
        kb = parse_kb(HEALTH_KB)
        rng = random.Random(11)
        atoms = list(kb.atoms())
        for _ in range(100):
            alts = AltConditions.of(
                [frozenset(Literal(a) for a in rng.sample(atoms, rng.randint(0, 4)))]
            )
            once = kb_reduce(alts, kb)
            assert kb_reduce(once, kb) == once
            assert all(
                any(o <= i for i in alts.alternatives) or True for o in once.alternatives
            )
            for reduced, original in zip(once.alternatives, alts.alternatives):
                assert reduced <= original

    def test_kb_consistent(self):
        mutex_kb = parse_kb("mutex Insufficient Payment_done;")
        assert not kb_consistent(S("Insufficient", "Payment_done"), mutex_kb)
        assert not kb_consistent(S("p", "!p"), EMPTY_KB)
        assert kb_consistent(S("p", "q"), EMPTY_KB)


class TestCoverage:
    def test_head_covered_by_body(self):
        kb = parse_kb(HEALTH_KB)
        assert covers(S("Emergency_Treatment_Provided"), S("Received_Text"), kb)
        assert not covers(S("Emergency_Treatment_Provided"), S("Other"), kb)

    def test_options_include_literal_itself(self):
        kb = parse_kb(HEALTH_KB)
        opts = literal_options(lit("Emergency_Treatment_Provided"), kb)
        assert frozenset({lit("Emergency_Treatment_Provided")}) in opts

    def test_missing_prefers_nearly_satisfied_body(self):
        kb = parse_kb(
            "rule Normal_Treatment_Provided -> (Received_Text | Received_Voice)"
            " & PreExisting_Disease_Searched & Test_Result_Known & Consult_Specialist;"
        )
        ce = S(
            "Received_Text",
            "PreExisting_Disease_Searched",
            "Test_Result_Known",
            "Allergies_Checked",
        )
        assert missing_for(S("Normal_Treatment_Provided"), ce, kb) == S("Consult_Specialist")

    def test_missing_without_kb_is_set_difference(self):
        assert missing_for(S("p", "w"), S("p")) == S("w")

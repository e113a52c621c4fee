import random

import pytest

from goalrec import (
    AltConditions,
    StalePlanError,
    apply_plan,
    availability,
    cra_resolve_hierarchic,
    cra_resolve_sibling,
    deficiency,
    era_resolve,
    lit,
    model_revision,
    parse_model,
    resolve_finding,
    run_sra,
    serialize_model,
)
from goalrec.resolve import (
    AddAndLink,
    AddParent,
    AddTempGoal,
    RefactoringPlan,
    StripLiterals,
    iterate_to_fixpoint,
    plan_from_doc,
    plan_to_doc,
)
from conftest import load_model
from modelgen import random_annotated_tree


def S(*texts):
    return frozenset(lit(t) for t in texts)


def alts(*sets):
    return AltConditions.of(sets)


class TestDeficiency:
    def test_or_example(self):
        d = deficiency(S("p", "!q", "w"), alts(S("p", "!q", "s")))
        assert d.entries == ((0, S("w")),)

    def test_subset_yields_empty(self):
        d = deficiency(S("p"), alts(S("p", "q")))
        assert d.entries == ((0, frozenset()),)

    def test_and_single_alternative(self):
        d = deficiency(S("p", "!q", "w"), alts(S("p", "!q", "s")))
        assert d.entries[0][1] == S("w")


class TestAvailability:
    def test_unavailable_everywhere(self):
        d = deficiency(S("p", "!q", "w"), alts(S("p", "!q", "s"), S("p", "!q", "t")))
        assert availability(d, alts(S("p", "!q", "s"), S("p", "!q", "t"))) == [(0,), (0,)]

    def test_and_case_all_zero(self):
        ce = alts(S("p", "!q", "s"))
        d = deficiency(S("p", "!q", "w", "x"), ce)
        assert availability(d, ce) == [(0, 0)]

    def test_donor_alternative_index(self):
        ce = alts(S("p"), S("p", "w"))
        d = deficiency(S("p", "w"), ce)
        assert availability(d, ce) == [(2,), ()]


class TestEraOrCase:
    def test_figure11_plan_shape(self):
        model = load_model("figure10.gm")
        ann, report = run_sra(model, "G")
        plan = era_resolve(model, ann, report.findings[0])
        temp = [e for e in plan.edits if isinstance(e, AddTempGoal)]
        assert [t.id for t in temp] == ["GT_1", "CT_1", "GT_2"]
        ct = next(t for t in temp if t.id == "CT_1")
        assert ct.ie == alts(S("w"))
        wraps = [e for e in plan.edits if isinstance(e, AddParent)]
        assert [(w.wrapper, w.child, w.under) for w in wraps] == [
            ("GT_1", "G1", "G"),
            ("GT_2", "G2", "G"),
        ]
        shared = [e for e in plan.edits if isinstance(e, AddAndLink) and e.child == "CT_1"]
        assert {(e.parent) for e in shared} == {"GT_1", "GT_2"}

    def test_apply_clears_finding(self):
        model = load_model("figure10.gm")
        ann, report = run_sra(model, "G")
        plan = era_resolve(model, ann, report.findings[0])
        after = apply_plan(model, plan)
        _, report2 = run_sra(after, "G")
        assert report2.is_clean()

    def test_donor_link_when_available_elsewhere(self):
        # each branch misses a condition the other branch's task supplies
        model = parse_model(
            'actor A "X" { goal G "g" ie { p, w, z }; goal G1 "a" ie { p };\n'
            'goal G2 "b" ie { p }; task T1 "t" ie { p, w }; task T2 "t" ie { p, z };\n'
            "or G -> G1, G2;\nand G1 -> T1;\nand G2 -> T2;\n}"
        )
        ann, report = run_sra(model, "G")
        plan = era_resolve(model, ann, report.findings[0])
        donors = [e for e in plan.edits if isinstance(e, AddAndLink)]
        assert {(e.parent, e.child) for e in donors} == {("GT_1", "T2"), ("GT_2", "T1")}
        assert not any(isinstance(e, AddTempGoal) and e.id.startswith("CT") for e in plan.edits)
        after = apply_plan(model, plan)
        _, report2 = run_sra(after, "G")
        assert report2.is_clean()


class TestEraAndCase:
    def test_figure13_plan_shape(self):
        model = load_model("figure12.gm")
        ann, report = run_sra(model, "G")
        plan = era_resolve(model, ann, report.findings[0])
        temp = [e for e in plan.edits if isinstance(e, AddTempGoal)]
        assert len(temp) == 1
        assert temp[0].ie == alts(S("w", "x"))
        assert plan.edits[-1] == AddAndLink("G", temp[0].id)
        after = apply_plan(model, plan)
        _, report2 = run_sra(after, "G")
        assert report2.is_clean()

    def test_sibling_donor_no_temp_goal(self, healthcare_changed):
        model, kb = healthcare_changed
        ann, report = run_sra(model, "G1", kb)
        finding = next(f for f in report.findings if f.at == "T1")
        plan = era_resolve(model, ann, finding)
        assert plan.edits == (AddAndLink("T1", "R1"),)

    def test_nothing_to_resolve(self):
        model = load_model("figure12.gm")
        ann, report = run_sra(model, "G")
        finding = report.findings[0]
        empty = finding.__class__(
            id=finding.id, kind=finding.kind, at=finding.at,
            missing=((0, frozenset()),),
        )
        with pytest.raises(ValueError, match="nothing to resolve"):
            era_resolve(model, ann, empty)


class TestCraHierarchic:
    def test_figure15_strip_then_carry(self):
        model = load_model("figure14.gm")
        _, report = run_sra(model, "G")
        finding = next(f for f in report.findings if f.kind == "hierarchic")
        plan = cra_resolve_hierarchic(model, finding)
        strips = [e for e in plan.edits if isinstance(e, StripLiterals)]
        assert strips == [StripLiterals("G1", S("!q"))]
        carriers = [e for e in plan.edits if isinstance(e, AddTempGoal)]
        assert len(carriers) == 1 and carriers[0].ie == alts(S("q"))
        after = apply_plan(model, plan)
        _, report2 = run_sra(after, "G")
        assert report2.is_clean()

    def test_child_stripped_to_empty(self):
        model = parse_model(
            'actor A "X" { goal G "g" ie { q }; goal G1 "a" ie { !q }; goal G2 "b" ie { q };\n'
            "and G -> G1, G2;\n}"
        )
        _, report = run_sra(model, "G")
        finding = next(f for f in report.findings if f.kind == "hierarchic")
        plan = cra_resolve_hierarchic(model, finding)
        after = apply_plan(model, plan)
        assert after.artefact("G1").ie.alternatives == (frozenset(),)
        _, report2 = run_sra(after, "G")
        assert report2.is_clean()

    def test_wrong_kind_rejected(self):
        model = load_model("figure12.gm")
        _, report = run_sra(model, "G")
        with pytest.raises(ValueError, match="not hierarchic"):
            cra_resolve_hierarchic(model, report.findings[0])


class TestCraSibling:
    def test_two_solutions(self):
        model = load_model("figure16.gm")
        _, report = run_sra(model, "G")
        finding = next(f for f in report.findings if f.kind == "sibling")
        one, two = cra_resolve_sibling(model, finding)
        assert one.label == "Solution 1" and two.label == "Solution 2"
        assert one.edits == (StripLiterals("G1", S("r")),)
        assert two.edits == (StripLiterals("G2", S("!r")),)

    def test_plans_touch_disjoint_artefacts(self):
        model = load_model("figure16.gm")
        _, report = run_sra(model, "G")
        finding = next(f for f in report.findings if f.kind == "sibling")
        one, two = cra_resolve_sibling(model, finding)
        touched = lambda p: {e.artefact for e in p.edits if isinstance(e, StripLiterals)}
        assert touched(one) & touched(two) == set()
        assert all(len(e.literals) == 1 for p in (one, two) for e in p.edits)

    def test_either_solution_clears_conflict(self):
        model = load_model("figure16.gm")
        _, report = run_sra(model, "G")
        finding = next(f for f in report.findings if f.kind == "sibling")
        for plan in cra_resolve_sibling(model, finding):
            after = apply_plan(model, plan)
            _, report2 = run_sra(after, "G")
            assert not report2.of_kind("sibling")

    def test_deep_origin_is_stripped(self):
        model = parse_model(
            'actor A "X" { goal G "g" ie { p }; goal A1 "a" ie { p }; goal B1 "b" ie { !r };\n'
            'task A1a "x" ie { r };\n'
            "and G -> A1, B1;\nand A1 -> A1a;\n}"
        )
        _, report = run_sra(model, "G")
        finding = next(f for f in report.findings if f.kind == "sibling")
        one, _ = cra_resolve_sibling(model, finding)
        after = apply_plan(model, one)
        _, report2 = run_sra(after, "G")
        assert not report2.of_kind("sibling")


class TestApplyPlan:
    def test_empty_plan_is_identity(self):
        model = load_model("case3.gm")
        plan = RefactoringPlan(model_revision(model), "none", "", ())
        assert serialize_model(apply_plan(model, plan)) == serialize_model(model)

    def test_stale_revision_rejected(self):
        model = load_model("figure12.gm")
        ann, report = run_sra(model, "G")
        plan = era_resolve(model, ann, report.findings[0])
        moved = apply_plan(model, plan)
        with pytest.raises(StalePlanError):
            apply_plan(moved, plan)

    def test_original_untouched(self):
        model = load_model("figure12.gm")
        before = serialize_model(model)
        ann, report = run_sra(model, "G")
        apply_plan(model, era_resolve(model, ann, report.findings[0]))
        assert serialize_model(model) == before

    def test_never_deletes_user_artefacts(self):
        rng = random.Random(13)
        for _ in range(20):
            model, root = random_annotated_tree(rng)
            ann, report = run_sra(model, root)
            if report.is_clean():
                continue
            for plan in resolve_finding(model, ann, report.findings[0]):
                after = apply_plan(model, plan)
                assert set(model.artefacts) <= set(after.artefacts)

    def test_plan_doc_round_trip_and_digest(self):
        model = load_model("figure10.gm")
        ann, report = run_sra(model, "G")
        plan = era_resolve(model, ann, report.findings[0])
        again = plan_from_doc(plan_to_doc(plan))
        assert again == plan
        assert again.digest == plan.digest


class TestFixpoint:
    def test_progress_on_each_fixture(self):
        for name, root in (
            ("figure10.gm", "G"),
            ("figure12.gm", "G"),
            ("figure14.gm", "G"),
            ("figure16.gm", "G"),
            ("case4.gm", "G"),
        ):
            model = load_model(name)
            final, rounds, report = iterate_to_fixpoint(model, root)
            assert report.is_clean()
            assert rounds <= 5

    def test_donor_links_point_at_suppliers(self):
        from conftest import load_kb

        model = load_model("healthcare_changed.gm")
        kb = load_kb("healthcare_changed.kb")
        ann, report = run_sra(model, "G1", kb)
        finding = next(f for f in report.findings if f.at == "T1")
        plan = era_resolve(model, ann, finding)
        for e in plan.edits:
            if isinstance(e, AddAndLink):
                donor_ce = ann.ce[e.child]
                assert all(lit("Allergies_Checked") in alt for alt in donor_ce)

    def test_or_donor_links_point_at_suppliers(self):
        # every donor added along another strategy path actually delivers
        rng = random.Random(31)
        checked = 0
        for _ in range(200):
            model, root = random_annotated_tree(rng)
            ann, report = run_sra(model, root)
            for finding in report.findings:
                if finding.kind != "entailment":
                    continue
                link = model.link_of(finding.at)
                if link is None or link.kind != "or":
                    continue
                plan = era_resolve(model, ann, finding)
                temp_ids = {e.id for e in plan.edits if isinstance(e, AddTempGoal)}
                for e in plan.edits:
                    if isinstance(e, AddAndLink) and e.child not in temp_ids:
                        donor_ce = ann.ce[e.child]
                        missing_union = set()
                        for _, m in finding.missing:
                            missing_union |= m
                        assert any(
                            all(l in alt for alt in donor_ce) for l in missing_union
                        )
                        checked += 1
        assert checked > 0

    def test_hierarchic_filtering_property(self):
        # every literal rec strips at a node shows up in a conflict finding there
        from goalrec import conflict_set

        rng = random.Random(57)
        for _ in range(150):
            model, root = random_annotated_tree(rng)
            ann, report = run_sra(model, root)
            for aid in model.subtree_ids(root):
                link = model.link_of(aid)
                if link is None:
                    continue
                ie = model.artefact(aid).ie.alternatives[0]
                removed = set()
                for child in link.children:
                    for alt in ann.ce[child]:
                        removed |= conflict_set(ie, alt)
                flagged = set()
                for f in report.findings:
                    if f.kind == "hierarchic" and f.at == aid:
                        flagged |= f.conflicting
                assert removed <= flagged

"""Analysis-record, bound-inference, and optimization tests."""

import math
from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from cofola.errors import UnsupportedError
from cofola.frontend import load
from cofola.oracle import oracle_count
from cofola.preprocess import (
    UNSAT, Unsat, entity_analysis, max_size_inference, optimize,
    preprocess, sanity_check,
)
from cofola.problem import FalseC, Init, Kind
from cofola.semantics import denote

FIXTURES = Path(__file__).parent / "fixtures"


def problem_of(text):
    return denote(load(text))


def fixture(name):
    return problem_of((FIXTURES / f"{name}.cofola").read_text())


# ---------------------------------------------------------------------------
# entity analysis

def test_init_records_are_exact():
    p = problem_of("s = set(a, b, c)\nm = bag(x: 2, y: 1)\n")
    rec = entity_analysis(p)
    assert rec.pent["s"] == frozenset("abc")
    assert rec.size["s"] == rec.max_size["s"] == 3
    assert rec.mult["s"] == {"a": 1, "b": 1, "c": 1}
    assert rec.size["m"] == rec.max_size["m"] == 3
    assert rec.mult["m"] == {"x": 2, "y": 1}


def test_mathcounts_analysis_record():
    # the known record for the magnet problem: chosen ranges over all
    # nine letters, at most four of them, with T available twice
    rec = entity_analysis(fixture("mathcounts"))
    assert rec.pent["chosen"] == frozenset("AOUMTHCNS")
    assert rec.max_size["chosen"] == 4
    assert rec.size["chosen"] == 4
    assert rec.mult["chosen"]["T"] == 2
    assert rec.mult["chosen"]["A"] == 1


def test_add_union_sums_multiplicities():
    p = problem_of("m1 = bag(a: 1)\nm2 = bag(a: 2)\nu = m1 ++ m2\n")
    rec = entity_analysis(p)
    assert rec.mult["u"] == {"a": 3}
    assert rec.max_size["u"] == 3
    assert rec.size["u"] == 3


def test_op_rules():
    p = problem_of(
        "s = set(a, b)\nt = set(b, c)\n"
        "u = s + t\ni = s & t\nd = s - t\n")
    rec = entity_analysis(p)
    assert rec.pent["u"] == frozenset("abc")
    assert rec.pent["i"] == frozenset("b")
    assert rec.pent["d"] == frozenset("ab")  # b may survive: t is exact
    assert rec.max_size["i"] == 1
    assert rec.max_size["d"] == 2


def test_choose_caps_size():
    p = problem_of("s = set(a, b, c)\nt = choose(s, 2)\nu = choose(s)\n"
                   "r = choose_replace(s, 4)\n")
    rec = entity_analysis(p)
    assert rec.size["t"] == 2 and rec.max_size["t"] == 2
    assert rec.size["u"] is None and rec.max_size["u"] == 3
    assert rec.size["r"] == 4 and rec.mult["r"] == {e: 4 for e in "abc"}


def test_ordered_objects_inherit_source_records():
    p = problem_of("s = set(a, b, c)\nt = choose(s)\nq = sequence(t)\n")
    rec = entity_analysis(p)
    assert rec.pent["q"] == frozenset("abc")
    assert rec.max_size["q"] == 3
    assert rec.size["q"] is None


def test_record_invariants_on_fixtures():
    for path in sorted(FIXTURES.glob("*.cofola")):
        p = problem_of(path.read_text())
        rec = entity_analysis(p)
        for name, objdef in p.objects.items():
            assert rec.pent[name] <= frozenset(p.domain)
            if rec.size[name] is not None:
                assert rec.size[name] <= rec.max_size[name]
            assert rec.max_size[name] <= sum(rec.mult[name].values())
            if objdef.kind is Kind.SET:
                assert all(m == 1 for e, m in rec.mult[name].items()
                           if e in rec.pent[name])


def test_over_approximation_is_sound():
    """Every oracle value stays inside its object's record."""
    from cofola.semantics import apply_action
    for name in ("mathcounts", "plants", "four_letter"):
        p = fixture(name)
        rec = entity_analysis(p)
        env = {}
        for obj in p.order():
            value = next(apply_action(p.objects[obj], env))
            env[obj] = value
            entities, counts = _contents(value)
            assert entities <= rec.pent[obj]
            if rec.size[obj] is not None:
                assert sum(counts.values()) == rec.size[obj]
            assert sum(counts.values()) <= rec.max_size[obj]
            for e, m in counts.items():
                assert m <= rec.mult[obj][e]


def _contents(value):
    from cofola.universe import Bag, Circle, Composition, Partition
    if isinstance(value, frozenset):
        return value, {e: 1 for e in value}
    if isinstance(value, Bag):
        return value.support(), value.to_counts()
    if isinstance(value, (Partition, Composition)):
        merged = {}
        for part in value.parts:
            _, counts = _contents(part)
            for e, m in counts.items():
                merged[e] = merged.get(e, 0) + m
        return frozenset(merged), merged
    items = value.items if isinstance(value, Circle) else value
    counts = {}
    for e in items:
        counts[e] = counts.get(e, 0) + 1
    return frozenset(counts), counts


# ---------------------------------------------------------------------------
# size-bound inference

def test_lp_tightens_against_shared_budget():
    p = problem_of("s = set(e0...9)\nv1 = choose(s)\nv2 = choose(s)\n"
                   "|v1| + |v2| <= 5\n|v1| >= 3\n")
    rec = max_size_inference(p, entity_analysis(p))
    assert not isinstance(rec, Unsat)
    assert rec.max_size["v2"] == 2
    assert rec.max_size["v1"] == 5


def test_lp_no_size_constraints_is_identity():
    p = fixture("girls_boys")
    rec = entity_analysis(p)
    assert max_size_inference(p, rec) is rec


def test_lp_detects_conflicts():
    p = problem_of("s = set(a, b, c)\nv = choose(s)\n|v| == 3\n|v| == 4\n")
    assert max_size_inference(p, entity_analysis(p)) is UNSAT


def test_lp_fixes_forced_sizes():
    p = problem_of("s = set(e0...9)\nv = choose(s)\n"
                   "|v| >= 4\n|v| < 5\n")
    rec = max_size_inference(p, entity_analysis(p))
    assert rec.size["v"] == 4


def test_lp_handles_fractional_coefficients():
    p = problem_of("s = set(e0...9)\nv = choose(s)\n0.5 |v| <= 2.4\n")
    rec = max_size_inference(p, entity_analysis(p))
    assert rec.max_size["v"] == 4


def test_lp_detects_integer_gaps():
    p = problem_of("s = set(e0...9)\nv = choose(s)\n"
                   "2 |v| >= 5\n2 |v| <= 5\n")
    assert max_size_inference(p, entity_analysis(p)) is UNSAT


@settings(deadline=None, max_examples=40)
@given(st.lists(st.tuples(st.integers(-3, 3), st.integers(-3, 3),
                          st.sampled_from(["<=", ">=", "==", "<", ">"]),
                          st.integers(-6, 6)),
                min_size=1, max_size=3))
def test_lp_agrees_with_integer_box_enumeration(rows):
    lines = ["s = set(e0...5)", "v1 = choose(s)", "v2 = choose(s)"]
    for a, b, cmp, bound in rows:
        terms = []
        if a:
            terms.append(f"{a} |v1|")
        if b:
            terms.append(f"{b} |v2|")
        if not terms:
            continue
        lines.append(" + ".join(terms).replace("+ -", "- ") +
                     f" {cmp} {bound}")
    p = problem_of("\n".join(lines) + "\n")
    rec0 = entity_analysis(p)
    rec = max_size_inference(p, rec0)

    feasible = []
    from cofola.problem import SizeCmp, compare
    atoms = [c for c in p.constraints if isinstance(c, SizeCmp)]
    for x1 in range(0, 6):
        for x2 in range(0, 6):
            vals = {"v1": x1, "v2": x2}
            ok = all(
                compare(sum(coef * vals[t.obj] for coef, t in c.terms),
                        c.cmp, c.bound)
                for c in atoms)
            if ok:
                feasible.append(vals)
    if not feasible:
        assert rec is UNSAT or \
            any(rec.max_size[v] < 0 for v in ("v1", "v2"))
        return
    assert not isinstance(rec, Unsat)
    for v in ("v1", "v2"):
        true_max = max(f[v] for f in feasible)
        # the relaxation may be looser than the integer truth, never tighter
        assert rec.max_size[v] >= true_max


# ---------------------------------------------------------------------------
# optimization

def test_constant_folding_collapses_literal_algebra():
    p = problem_of("v = bag(A: 1, O: 1)\nc = bag(T: 2)\nm = v ++ c\n"
                   "ch = choose(m, 2)\n")
    q, rec = optimize(p, entity_analysis(p))
    folded = q.objects["m"].action
    assert isinstance(folded, Init)
    assert folded.value.to_counts() == {"A": 1, "O": 1, "T": 2}


def test_duplicate_deterministic_objects_merge():
    p = problem_of("m = bag(a: 2, b: 1)\ns1 = supp(m)\ns2 = supp(m)\n"
                   "t = choose(s2, 1)\n")
    q, rec = optimize(p, entity_analysis(p))
    assert "s2" not in q.objects
    assert q.objects["t"].action.src == "s1"


def test_duplicate_choices_do_not_merge():
    p = fixture("girls_boys")
    q, _ = optimize(p, entity_analysis(p))
    assert len(q.objects) == len(p.objects)
    p2 = problem_of("s = set(a, b, c)\nt1 = choose(s, 1)\nt2 = choose(s, 1)\n")
    q2, _ = optimize(p2, entity_analysis(p2))
    assert "t1" in q2.objects and "t2" in q2.objects


def test_known_sizes_fold_out_of_constraints():
    p = problem_of("s = set(e0...9)\nt = choose(s, 7)\ng = choose(t, 1)\n"
                   "|t| + |g| == 8\n")
    q, _ = optimize(p, entity_analysis(p))
    assert q.constraints == ()


def test_unused_deterministic_objects_drop():
    p = problem_of("s = set(a, b)\nm = bag(c: 2)\nu = s ++ m\n")
    q, rec = optimize(p, entity_analysis(p))
    # u is never consumed and is determined: the whole chain collapses
    assert set(q.objects) == {"u"} or len(q.objects) < 3


def test_choices_never_drop():
    p = fixture("water_polo")
    q, _ = optimize(p, entity_analysis(p))
    assert set(q.objects) == {"players", "starting_team", "goalie"}


def test_optimize_is_idempotent():
    p = fixture("officers")
    q1, rec1 = optimize(p, entity_analysis(p))
    q2, rec2 = optimize(q1, rec1)
    assert q1 == q2


def test_impossible_member_folds_false():
    p = problem_of("s = set(a, b)\nz = set(c)\nt = choose(s)\n"
                   "(c in t) or (a in t)\n")
    q, _ = optimize(p, entity_analysis(p))
    (con,) = q.constraints
    from cofola.problem import Member
    assert con == Member("a", "t")


# ---------------------------------------------------------------------------
# sanity checks

def test_sanity_size_above_max_is_unsat():
    p = problem_of("s = set(a, b)\nt = choose(s, 3)\n")
    rec = entity_analysis(p)
    assert sanity_check(p, rec) is UNSAT


def test_sanity_two_sequences_unsupported():
    p = problem_of("s = set(a, b)\nq1 = sequence(s)\nq2 = sequence(s)\n")
    with pytest.raises(UnsupportedError):
        sanity_check(p, entity_analysis(p))


def test_sanity_sequence_plus_circle_unsupported():
    p = problem_of("s = set(a, b)\nq1 = sequence(s)\nq2 = circle(s)\n")
    with pytest.raises(UnsupportedError):
        sanity_check(p, entity_analysis(p))


def test_sequence_plus_tuple_is_fine():
    p = problem_of("s = set(a, b)\nq1 = sequence(s)\nq2 = tuple(s)\n")
    assert sanity_check(p, entity_analysis(p)) is None


def test_out_of_range_tuple_index():
    base = "s = set(a, b, c, d, e)\nt4 = choose(s, 4)\narr = tuple(t4)\n"
    assert preprocess(problem_of(base + "arr[6] == a\n")) is UNSAT
    # a negated out-of-range index holds vacuously and is dropped
    out = preprocess(problem_of(base + "not (arr[6] == a)\n"))
    assert out is not UNSAT
    q, _ = out
    assert q.constraints == ()


# ---------------------------------------------------------------------------
# the composed pass

def test_preprocess_preserves_counts_on_fixtures():
    for path in sorted(FIXTURES.glob("*.cofola")):
        p = problem_of(path.read_text())
        before = oracle_count(p)
        out = preprocess(p)
        if out is UNSAT:
            assert before == 0, path.stem
            continue
        q, _ = out
        assert oracle_count(q) == before, path.stem


def test_preprocess_unsat_on_conflicting_sizes():
    p = problem_of("s = set(a, b, c)\nv = choose(s)\n|v| == 3\n|v| == 4\n")
    assert preprocess(p) is UNSAT

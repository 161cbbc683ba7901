"""Denotation and concrete-evaluation tests."""

import pytest
from fractions import Fraction

from hypothesis import given, strategies as st

from cofola.errors import CofolaTypeError, UnsupportedError
from cofola.frontend import load
from cofola.problem import (
    Card, CountTerm, EntArg, FalseC, Init, Kind, LessPat, Member,
    MsetChoose, NextToPat, NotC, ObjArg, PatternC, PredPat, SetChoose,
    SizeCmp, Together, TrueC,
)
from cofola.semantics import (
    apply_action, check_constraint, denote, eval_size_term,
)
from cofola.universe import Bag, Circle, ncr


def problem_of(text):
    return denote(load(text))


# ---------------------------------------------------------------------------
# kind and name checking

BAD_PROGRAMS = [
    # (source, error fragment)
    ("s = set(a, b)\ns = set(c)\n", "declared twice"),
    ("s = set(a, b)\na = set(c)\n", "names an entity"),
    ("s = set(a, b)\nt = set(s)\n", "clashes with an object"),
    ("s = set(a, a)\n", "duplicate"),
    ("b = bag(a: 0)\n", "positive"),
    ("s = set(a, b)\nt = s\n", "aliases"),
    ("s = set(a, b)\nt = tuple(s)\nu = choose(t, 1)\n", "expected set/bag"),
    ("s = set(a, b)\nt = supp(s)\n", "expected bag"),
    ("s = set(a, b)\nt = choose_replace(s)\n", "explicit size"),
    ("b = bag(a: 2)\nt = choose_replace(b, 1)\n", "expected set"),
    ("s = set(a, b)\np = partition(s, 2)\nq = p[0]\n", "cannot be indexed"),
    ("s = set(a, b)\np = compose(s, 2)\nq = p[5]\n", "outside"),
    ("s = set(a, b)\nq = s[0]\n", "only compositions"),
    ("s = set(a, b)\nb2 = bag(c: 2)\ns == b2\n", "comparing a set"),
    ("s = set(a, b)\np = partition(s, 2)\n|p| == 2\n", "undefined"),
    ("s = set(a, b)\np = partition(s, 2)\np.count(a) > 0\n",
     "does not apply to groupings"),
    ("s = set(a, b)\nt = tuple(s)\ntogether(a) in t\n",
     "sequences and circles"),
    ("s = set(a, b)\nt = sequence(s)\nt[1] == a\n", "not a tuple"),
    ("s = set(a, b)\nt = tuple(s)\nt[0] == a\n", "1-based"),
    ("s = set(a, b)\nc in s\n", "not a known entity"),
    ("s = set(a, b)\nt = sequence(s)\n(s, a) in t\n", "not a known entity"),
]


@pytest.mark.parametrize("source,fragment", BAD_PROGRAMS)
def test_denote_rejects(source, fragment):
    with pytest.raises(CofolaTypeError) as exc:
        problem_of(source)
    assert fragment in str(exc.value)


def test_reusing_an_entity_in_another_literal_is_allowed():
    # a count argument like set(B) refers to the existing entity
    p = problem_of("s = set(a, b)\ng = set(a)\n")
    assert p.domain == ("a", "b")
    assert p.multiplicity["a"] == 2  # universe holds both declared copies


def test_denote_rejects_order_on_circle():
    src = "s = set(a, b, c)\nt = circle(s)\na < b in t\n"
    with pytest.raises(UnsupportedError):
        problem_of(src)


def test_denote_rejects_together_count():
    src = "s = set(a, b, c)\nt = sequence(s)\nt.count(together(a)) > 0\n"
    with pytest.raises(UnsupportedError):
        problem_of(src)


def test_denote_rejects_self_adjacency_on_bag():
    src = "b = bag(a: 2, c: 1)\nt = sequence(b)\nnext_to(a, a) in t\n"
    with pytest.raises(UnsupportedError):
        problem_of(src)


def test_nested_for_rejected():
    src = ("s = set(a, b, c, d)\np = partition(s, 2)\n"
           "(|part| == 2 for part in p) for part in p\n")
    with pytest.raises(CofolaTypeError):
        problem_of(src)


# ---------------------------------------------------------------------------
# kinds and promotions

def test_kind_promotion_table():
    p = problem_of(
        "s = set(a, b)\n"
        "m = bag(c: 2)\n"
        "u1 = s + s\n"
        "u2 = s + m\n"
        "u3 = s ++ s\n"
        "i1 = s & m\n"
        "d1 = m - s\n"
        "ch = choose(m, 2)\n"
        "cr = choose_replace(s, 3)\n"
        "sp = supp(m)\n")
    kinds = {name: d.kind for name, d in p.objects.items()}
    assert kinds["u1"] is Kind.SET
    assert kinds["u2"] is Kind.BAG
    assert kinds["u3"] is Kind.BAG
    assert kinds["i1"] is Kind.BAG
    assert kinds["d1"] is Kind.BAG
    assert kinds["ch"] is Kind.BAG
    assert kinds["cr"] is Kind.BAG
    assert kinds["sp"] is Kind.SET
    assert isinstance(p.objects["ch"].action, MsetChoose)


def test_composition_part_kind_follows_source():
    p = problem_of("b = bag(a: 2, c: 1)\nco = compose(b, 2)\nw = co[0]\n")
    assert p.kind("w") is Kind.BAG
    p = problem_of("s = set(a, c)\nco = compose(s, 2)\nw = co[1]\n")
    assert p.kind("w") is Kind.SET


def test_multiplicity_accumulates_across_literals():
    p = problem_of("s = set(a, b)\nm = bag(a: 2, c: 1)\nu = s ++ m\n")
    assert p.multiplicity == {"a": 3, "b": 1, "c": 1}
    assert p.domain == ("a", "b", "c")


# ---------------------------------------------------------------------------
# structural folds

def test_membership_folds_to_content_source():
    p = problem_of("s = set(a, b, c)\nt = choose(s, 2)\nq = sequence(t)\n"
                   "a in q\n")
    assert p.constraints == (Member("a", "t"),)


def test_count_on_sequence_folds_to_source():
    p = problem_of("b = bag(a: 2, c: 1)\nt = choose(b, 2)\nq = sequence(t)\n"
                   "q.count(a) == 2\n")
    (con,) = p.constraints
    assert isinstance(con, SizeCmp)
    assert con.terms[0][1] == CountTerm("t", EntArg("a"))


def test_count_on_tuple_stays_on_tuple():
    p = problem_of("s = set(a, b, c)\nt = tuple(s)\nt.count(a) == 1\n")
    (con,) = p.constraints
    assert con.terms[0][1] == CountTerm("t", EntArg("a"))


def test_literal_sizes_fold_to_constants():
    p = problem_of("s = set(a, b, c)\nq = sequence(s)\n|q| == 3\n")
    assert p.constraints == (TrueC(),)
    p = problem_of("s = set(a, b, c)\n|s| == 4\n")
    assert p.constraints == (FalseC(),)
    p = problem_of("b = bag(a: 2, c: 1)\nq = sequence(b)\nq.count(a) < 2\n")
    assert p.constraints == (FalseC(),)


def test_mixed_literal_and_variable_terms_shift_bound():
    p = problem_of("s = set(a, b, c)\nt = choose(s)\n|t| + |s| <= 5\n")
    (con,) = p.constraints
    assert con.terms == ((Fraction(1), Card("t")),)
    assert con.bound == Fraction(2)


def test_self_order_pattern_folds_to_absence():
    p = problem_of("s = set(a, b, c)\nt = choose(s)\nq = sequence(t)\n"
                   "a < a in q\n")
    assert p.constraints == (NotC(Member("a", "t")),)


def test_self_adjacency_on_set_folds_to_absence():
    p = problem_of("s = set(a, b, c)\nt = choose(s)\nq = sequence(t)\n"
                   "next_to(a, a) in q\n")
    assert p.constraints == (NotC(Member("a", "t")),)


def test_tuple_positions_become_zero_based():
    p = problem_of("s = set(a, b, c)\nt = tuple(s)\nt[2] == a\n")
    (con,) = p.constraints
    assert con.index == 1


# ---------------------------------------------------------------------------
# apply_action candidate generation

def test_choose_candidates():
    p = problem_of("s = set(a, b, c)\nt = choose(s)\n")
    env = {"s": frozenset("abc")}
    assert len(list(apply_action(p.objects["t"], env))) == 8
    p = problem_of("s = set(a, b, c)\nt = choose(s, 2)\n")
    assert len(list(apply_action(p.objects["t"], env))) == 3


def test_bag_choose_candidates():
    p = problem_of("b = bag(a: 2, c: 1)\nt = choose(b, 2)\n")
    env = {"b": Bag.from_counts({"a": 2, "c": 1})}
    vals = {v for v in apply_action(p.objects["t"], env)}
    assert vals == {Bag.from_counts({"a": 2}),
                    Bag.from_counts({"a": 1, "c": 1})}


def test_choose_replace_candidates():
    p = problem_of("s = set(a, b)\nt = choose_replace(s, 2)\n")
    env = {"s": frozenset("ab")}
    vals = list(apply_action(p.objects["t"], env))
    assert len(vals) == 3  # aa, ab, bb


def test_ops_are_deterministic():
    p = problem_of("s = set(a, b)\nm = bag(a: 2, c: 1)\nu = s + m\n")
    env = {"s": frozenset("ab"), "m": Bag.from_counts({"a": 2, "c": 1})}
    (val,) = apply_action(p.objects["u"], env)
    assert val.to_counts() == {"a": 2, "b": 1, "c": 1}


def test_arrangement_candidates():
    p = problem_of("s = set(a, b, c)\nt = tuple(s)\nq = circle(s)\n")
    env = {"s": frozenset("abc")}
    assert len(list(apply_action(p.objects["t"], env))) == 6
    assert len(list(apply_action(p.objects["q"], env))) == 2


def test_part_index_is_deterministic():
    p = problem_of("s = set(a, b)\nco = compose(s, 2)\nw = co[1]\n")
    env = {"s": frozenset("ab")}
    comps = list(apply_action(p.objects["co"], env))
    assert len(comps) == 4
    env["co"] = comps[0]
    (val,) = apply_action(p.objects["w"], env)
    assert val == comps[0].parts[1]


# ---------------------------------------------------------------------------
# three-valued checking

def test_unbound_objects_give_none():
    p = problem_of("s = set(a, b)\nt = choose(s)\na in t\n")
    (con,) = p.constraints
    assert check_constraint(con, {}) is None
    assert check_constraint(con, {"t": frozenset("a")}) is True
    assert check_constraint(con, {"t": frozenset("b")}) is False


def test_and_short_circuits_through_unknowns():
    p = problem_of("s = set(a, b)\nt = choose(s)\nu = choose(s)\n"
                   "(a in t) and (a in u)\n")
    (con,) = p.constraints
    assert check_constraint(con, {"t": frozenset()}) is False
    assert check_constraint(con, {"t": frozenset("a")}) is None


def test_or_short_circuits_through_unknowns():
    p = problem_of("s = set(a, b)\nt = choose(s)\nu = choose(s)\n"
                   "(a in t) or (a in u)\n")
    (con,) = p.constraints
    assert check_constraint(con, {"t": frozenset("a")}) is True
    assert check_constraint(con, {"t": frozenset()}) is None


def test_for_parts_checks_every_part():
    p = problem_of("s = set(a, b, c, d)\ng = partition(s, 2)\n"
                   "|part| == 2 for part in g\n")
    (con,) = p.constraints
    from cofola.universe import Partition
    good = Partition.make([frozenset("ab"), frozenset("cd")])
    bad = Partition.make([frozenset("abc"), frozenset("d")])
    assert check_constraint(con, {"g": good}) is True
    assert check_constraint(con, {"g": bad}) is False
    assert check_constraint(con, {}) is None


# ---------------------------------------------------------------------------
# pattern semantics on concrete arrangements

def circle(*items):
    return Circle.make(items, reflection=False)


def test_together_on_sequences():
    con = PatternC("q", Together(EntArg("a")))
    assert check_constraint(con, {"q": ("a", "b", "a")}) is False
    con = PatternC("q", Together(ObjArg("s")))
    env = {"q": ("x", "a", "b", "y"), "s": frozenset("ab")}
    assert check_constraint(con, env) is True
    env["q"] = ("a", "x", "b", "y")
    assert check_constraint(con, env) is False


def test_together_wraps_on_circles():
    con = PatternC("q", Together(ObjArg("s")))
    env = {"q": circle("a", "x", "y", "b"), "s": frozenset("ab")}
    assert check_constraint(con, env) is True  # b wraps round to a
    env["q"] = circle("a", "x", "b", "y")
    assert check_constraint(con, env) is False


def test_less_pattern():
    con = PatternC("q", LessPat(EntArg("a"), EntArg("b")))
    assert check_constraint(con, {"q": ("a", "x", "b")}) is True
    assert check_constraint(con, {"q": ("b", "x", "a")}) is False
    # vacuously true when either side is absent
    assert check_constraint(con, {"q": ("x", "a")}) is True


def test_pred_pattern_direction_and_wrap():
    con = PatternC("q", PredPat("a", "b"))
    assert check_constraint(con, {"q": ("a", "b", "x")}) is True
    assert check_constraint(con, {"q": ("b", "a", "x")}) is False
    assert check_constraint(con, {"q": ("x", "y", "a")}) is False
    assert check_constraint(con, {"q": circle("b", "x", "a")}) is True


def test_next_to_pattern():
    con = PatternC("q", NextToPat("a", "b"))
    assert check_constraint(con, {"q": ("b", "a", "x")}) is True
    assert check_constraint(con, {"q": ("a", "x", "b")}) is False
    assert check_constraint(con, {"q": circle("a", "x", "y", "b")}) is True


def test_pattern_counts():
    from cofola.problem import PatCountTerm
    env = {"q": ("a", "b", "a", "b", "a")}
    assert eval_size_term(
        PatCountTerm("q", PredPat("a", "b")), env) == 2
    assert eval_size_term(
        PatCountTerm("q", NextToPat("a", "b")), env) == 4
    assert eval_size_term(
        PatCountTerm("q", LessPat(EntArg("a"), EntArg("b"))), env) == 3
    ring = {"q": circle("a", "b", "a", "b")}
    assert eval_size_term(
        PatCountTerm("q", PredPat("a", "b")), ring) == 2
    assert eval_size_term(
        PatCountTerm("q", NextToPat("a", "b")), ring) == 4


def test_size_terms_on_values():
    env = {
        "s": frozenset("abc"),
        "b": Bag.from_counts({"a": 2, "c": 1}),
        "t": ("a", "a", "c"),
        "g": frozenset("a"),
    }
    assert eval_size_term(Card("s"), env) == 3
    assert eval_size_term(Card("b"), env) == 3
    assert eval_size_term(Card("t"), env) == 3
    assert eval_size_term(CountTerm("b", EntArg("a")), env) == 2
    assert eval_size_term(CountTerm("t", ObjArg("g")), env) == 2
    from cofola.problem import DedupTerm
    assert eval_size_term(DedupTerm("t", ObjArg("g")), env) == 1


# ---------------------------------------------------------------------------
# property: choose candidates match binomials

@given(st.integers(0, 7), st.integers(0, 7))
def test_choose_candidate_counts_match_binomial(n, k):
    names = ", ".join(f"e{i}" for i in range(n)) or "e0"
    p = problem_of(f"s = set({names})\nt = choose(s, {k})\n")
    env = {"s": frozenset(f"e{i}" for i in range(max(n, 1)))}
    count = sum(1 for _ in apply_action(p.objects["t"], env))
    assert count == ncr(max(n, 1), k)

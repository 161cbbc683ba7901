"""Weighted model counting: the search kernel against the referee.

naive_wfomc enumerates interpretations and checks the sentence
semantically; wfomc must agree with it exactly, polynomial for
polynomial, on everything small enough for both.
"""

import itertools

import pytest
from hypothesis import given, settings, strategies as st

from cofola.backend import naive_wfomc, wfomc
from cofola.backend.kernel import IMPLEMENTATION, count_clauses
from cofola.errors import ResourceExceeded
from cofola.fol import (
    AndF, Atom, CardinalityAtom, CircleAx, Exists, ForAll, Func, FuncBij,
    FuncInj, FuncSurj, Iff, Implies, Linear, NotF, OrF, Sentence, X, Y,
    closed_world_evidence,
)
from cofola.instance import EncodedInstance
from cofola.poly import CoeffSystem, LinearCmp, Poly

DOM2 = ("a", "b")
DOM3 = ("a", "b", "c")


def inst(conjuncts, predicates, domain, weights=None, **kw):
    return EncodedInstance(
        sentence=Sentence(conjuncts, predicates),
        domain=tuple(domain),
        weights=weights or {},
        **kw)


def both(instance):
    fast, slow = wfomc(instance), naive_wfomc(instance)
    assert fast == slow, f"wfomc {fast!r} != naive {slow!r}"
    return fast


# ---------------------------------------------------------------------------
# unweighted model counting

def test_exactly_one_color_counts_eight():
    body = AndF((
        OrF((Atom("Red", (X,)), Atom("Black", (X,)))),
        NotF(AndF((Atom("Red", (X,)), Atom("Black", (X,))))),
    ))
    instance = inst([ForAll(X, body)], {"Red": 1, "Black": 1}, DOM3)
    assert both(instance) == Poly.const(8)


def test_cardinality_atom_caps_the_red_count():
    body = AndF((
        OrF((Atom("Red", (X,)), Atom("Black", (X,)))),
        NotF(AndF((Atom("Red", (X,)), Atom("Black", (X,))))),
    ))
    instance = inst(
        [ForAll(X, body), CardinalityAtom(((1, "Red"),), "<=", 2)],
        {"Red": 1, "Black": 1}, DOM3)
    assert both(instance) == Poly.const(7)


def test_empty_sentence_counts_interpretations():
    instance = inst([], {"P": 1}, DOM2)
    assert both(instance) == Poly.const(4)


def test_nullary_predicates_shannon_expand():
    instance = inst(
        [OrF((Atom("P0"), ForAll(X, Atom("R", (X,)))))],
        {"P0": 0, "R": 1}, DOM2)
    assert both(instance) == Poly.const(5)


def test_tseitin_auxiliaries_preserve_counts():
    f = OrF((AndF((Atom("A"), Atom("B"))), AndF((Atom("C"), Atom("D")))))
    instance = inst([f], {"A": 0, "B": 0, "C": 0, "D": 0}, DOM2)
    assert both(instance) == Poly.const(7)


def test_conflicting_evidence_counts_zero():
    evidence = (closed_world_evidence("P", DOM2, {"a"})
                + closed_world_evidence("P", DOM2, {"b"}))
    instance = inst(evidence, {"P": 1}, DOM2)
    assert wfomc(instance) == Poly()
    assert naive_wfomc(instance) == Poly()


# ---------------------------------------------------------------------------
# weights

def test_free_weighted_atoms_multiply_out():
    instance = inst([], {"P": 1}, DOM2,
                    weights={"P": (Poly.var("x"), Poly.const(1))})
    assert both(instance) == (Poly.var("x") + Poly.const(1)) ** 2


def test_indistinguishable_balls_slice():
    w = Poly.power_range("u_R", 1, 3)
    v = Poly.power_range("u_B", 1, 3)
    instance = inst(
        [ForAll(X, OrF((Atom("Red", (X,)), Atom("Black", (X,)))))],
        {"Red": 1, "Black": 1}, ("ball",),
        weights={"Red": (w, Poly.const(1)), "Black": (v, Poly.const(1))})
    poly = both(instance)
    system = CoeffSystem((LinearCmp(((1, "u_R"), (1, "u_B")), "==", 3),))
    assert system.extract(poly) == 4


def test_subset_choice_tracks_binomials():
    # S names a subset of a 4-element domain; the weight variable's
    # exponent carries |S| into the polynomial
    instance = inst([], {"S": 1}, ("a", "b", "c", "d"),
                    weights={"S": (Poly.var("s"), Poly.const(1))})
    poly = both(instance)
    assert poly == sum(
        (Poly.var("s", k).scale(_ncr(4, k)) for k in range(1, 5)),
        Poly.const(1))


def _ncr(n, k):
    out = 1
    for i in range(k):
        out = out * (n - i) // (i + 1)
    return out


# ---------------------------------------------------------------------------
# functionality axioms

def test_bijections_count_factorial():
    evidence = (closed_world_evidence("Dom", ("a", "b", "c", "d"),
                                      ("a", "b", "c", "d"))
                + closed_world_evidence("CoDom", ("a", "b", "c", "d"),
                                        ("a", "b", "c", "d")))
    instance = inst(evidence + [FuncBij("F", "Dom", "CoDom")],
                    {"F": 2, "Dom": 1, "CoDom": 1}, ("a", "b", "c", "d"))
    assert wfomc(instance) == Poly.const(24)


@pytest.mark.parametrize("axiom,expected", [
    (Func, 9),       # all functions from 2 to 3 elements... over Dom={a,b}
    (FuncInj, 6),    # injections 3*2
    (FuncSurj, 0),   # no surjection 2 onto 3
])
def test_function_variants_from_two_onto_three(axiom, expected):
    evidence = (closed_world_evidence("Dom", DOM3, DOM2)
                + closed_world_evidence("CoDom", DOM3, DOM3))
    instance = inst(evidence + [axiom("F", "Dom", "CoDom")],
                    {"F": 2, "Dom": 1, "CoDom": 1}, DOM3)
    assert both(instance) == Poly.const(expected)


@pytest.mark.parametrize("axiom", [Func, FuncInj, FuncSurj, FuncBij])
@settings(deadline=None, max_examples=10)
@given(dom=st.sets(st.sampled_from(DOM2)), codom=st.sets(st.sampled_from(DOM2)))
def test_function_counts_match_naive_under_random_evidence(axiom, dom, codom):
    evidence = (closed_world_evidence("Dom", DOM2, dom)
                + closed_world_evidence("CoDom", DOM2, codom))
    instance = inst(evidence + [axiom("F", "Dom", "CoDom")],
                    {"F": 2, "Dom": 1, "CoDom": 1}, DOM2)
    both(instance)


# ---------------------------------------------------------------------------
# order axioms

@pytest.mark.parametrize("n,expected", [(1, 1), (2, 2), (3, 6), (4, 24),
                                        (5, 120)])
def test_linear_axiom_counts_factorial(n, expected):
    domain = tuple(f"e{i}" for i in range(n))
    instance = inst([Linear("L", "Pred")], {"L": 2, "Pred": 2}, domain)
    assert wfomc(instance) == Poly.const(expected)


@pytest.mark.parametrize("n,expected", [(1, 1), (2, 1), (3, 2), (4, 6),
                                        (5, 24)])
def test_circle_axiom_counts_one_less_factorial(n, expected):
    domain = tuple(f"e{i}" for i in range(n))
    instance = inst([CircleAx("Pred")], {"Pred": 2}, domain)
    assert wfomc(instance) == Poly.const(expected)


def test_linear_axiom_agrees_with_naive_on_two():
    instance = inst([Linear("L", "Pred")], {"L": 2, "Pred": 2}, DOM2)
    assert both(instance) == Poly.const(2)


def test_boundary_sentence_confines_the_prefix():
    # elements of S must precede everything outside S: 2 of 6 orders
    boundary = ForAll(X, ForAll(Y, Implies(
        AndF((Atom("S", (X,)), NotF(Atom("S", (Y,))))),
        Atom("L", (X, Y)))))
    conjuncts = ([Linear("L", "Pred"), boundary]
                 + closed_world_evidence("S", DOM3, {"a", "b"}))
    instance = inst(conjuncts, {"L": 2, "Pred": 2, "S": 1}, DOM3)
    assert wfomc(instance) == Poly.const(2)


# ---------------------------------------------------------------------------
# resource limits

def test_order_enumeration_is_capped():
    domain = tuple(f"e{i}" for i in range(9))
    instance = inst([Linear("L", "Pred")], {"L": 2, "Pred": 2}, domain)
    with pytest.raises(ResourceExceeded):
        wfomc(instance)


def test_atom_bound_is_enforced():
    instance = inst([ForAll(X, OrF((Atom("P", (X,)), Atom("Q", (X,)))))],
                    {"P": 1, "Q": 1}, DOM3)
    with pytest.raises(ResourceExceeded):
        wfomc(instance, atom_bound=3)


def test_naive_cap_is_enforced():
    instance = inst([], {"R": 2, "P": 1}, DOM3)
    with pytest.raises(ResourceExceeded):
        naive_wfomc(instance, cap=5)


# ---------------------------------------------------------------------------
# differential fuzzing

FORMULA_POOL = [
    ForAll(X, OrF((Atom("P", (X,)), Atom("Q", (X,))))),
    ForAll(X, Implies(Atom("P", (X,)), Exists(Y, Atom("R", (X, Y))))),
    ForAll(X, ForAll(Y, Implies(Atom("R", (X, Y)), Atom("Q", (Y,))))),
    Exists(X, AndF((Atom("P", (X,)), NotF(Atom("Q", (X,)))))),
    ForAll(Y, Iff(Atom("Q", (Y,)), Exists(X, Atom("R", (X, Y))))),
    NotF(ForAll(X, Atom("P", (X,)))),
]

CARD_POOL = [
    None,
    CardinalityAtom(((1, "P"),), "<=", 1),
    CardinalityAtom(((1, "R"), (-1, "P")), "==", 0),
    CardinalityAtom(((1, "Q"),), ">=", 1),
]


@settings(deadline=None, max_examples=60)
@given(
    picks=st.sets(st.sampled_from(range(len(FORMULA_POOL))), max_size=3),
    card=st.sampled_from(range(len(CARD_POOL))),
    evidence=st.sets(st.sampled_from(DOM2)),
    weighted=st.booleans(),
)
def test_wfomc_matches_naive_on_random_instances(picks, card, evidence,
                                                 weighted):
    conjuncts = [FORMULA_POOL[i] for i in sorted(picks)]
    if CARD_POOL[card] is not None:
        conjuncts.append(CARD_POOL[card])
    conjuncts += closed_world_evidence("P", DOM2, evidence)
    weights = {}
    if weighted:
        weights["Q"] = (Poly.var("q"), Poly.const(1))
        weights["R"] = (Poly.var("r"), Poly.var("rbar"))
    instance = inst(conjuncts, {"P": 1, "Q": 1, "R": 2}, DOM2,
                    weights=weights)
    both(instance)


# ---------------------------------------------------------------------------
# kernel plumbing

def test_kernel_selection_reports_a_name():
    assert IMPLEMENTATION in ("pykernel", "speed")


def test_kernel_counts_a_plain_clause_set():
    one = {(): 1}
    weights = [(one, one)] * 3
    # (1 or 2) and (not 1 or 3): 111, 101, 011, 010
    got = count_clauses(3, [(1, 2), (-1, 3)], weights, {})
    assert got == {(): 4}


def test_kernel_respects_fixed_atoms():
    one = {(): 1}
    weights = [(one, one)] * 2
    got = count_clauses(2, [(1, 2)], weights, {1: False})
    assert got == {(): 1}
    got = count_clauses(2, [(1,), (-1,)], weights, {})
    assert got == {}


def test_kernel_multiplies_disconnected_components():
    x = {(("x", 1),): 1}
    one = {(): 1}
    weights = [(x, one), (x, one)]
    got = count_clauses(2, [(1,), (2,)], weights, {})
    assert got == {(("x", 2),): 1}

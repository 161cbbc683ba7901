"""Logic substrate: grounding, satisfaction, axioms, and evidence.

The functionality-axiom rewrite is checked the hard way: brute-force
model counts with the axiom verified semantically must match counts
with the axiom replaced by its first-order expansion.
"""

import itertools

import pytest
from hypothesis import given, settings, strategies as st

from cofola.fol import (
    AndF, Atom, AtMost, Bot, CardinalityAtom, CircleAx, Eq, Exists,
    ForAll, Func, FuncBij, FuncInj, FuncSurj, Iff, Implies, Linear,
    NotF, OrF, Sentence, Top, Var, X, Y, closed_world_evidence, eval_formula,
    enumerate_order_interpretations, expand_func_axiom, ground,
    satisfies,
)

DOM2 = ("a", "b")
DOM3 = ("a", "b", "c")


def powerset(cells):
    for r in range(len(cells) + 1):
        yield from itertools.combinations(cells, r)


def all_interps(registry, domain):
    preds = sorted(registry)
    spaces = [
        [set(s) for s in powerset(list(
            itertools.product(domain, repeat=registry[p])))]
        for p in preds
    ]
    for combo in itertools.product(*spaces):
        yield dict(zip(preds, combo))


def count_models(sentence, domain):
    return sum(1 for i in all_interps(sentence.predicates, domain)
               if satisfies(i, sentence, domain))


# ---------------------------------------------------------------------------
# evidence

def test_closed_world_evidence_fixes_every_entity():
    lits = closed_world_evidence("P", DOM3, {"a"})
    assert [(l.entity, l.positive) for l in lits] == [
        ("a", True), ("b", False), ("c", False)]


def test_closed_world_evidence_extremes():
    assert all(l.positive for l in closed_world_evidence("P", DOM2, DOM2))
    assert not any(l.positive for l in closed_world_evidence("P", DOM2, ()))


def test_closed_world_evidence_rejects_strangers():
    with pytest.raises(AssertionError):
        closed_world_evidence("P", DOM2, {"z"})


# ---------------------------------------------------------------------------
# grounding

def test_forall_grounds_to_conjunction():
    g = ground(ForAll(X, Atom("R", (X,))), DOM2)
    assert g == AndF((Atom("R", ("a",)), Atom("R", ("b",))))


def test_at_most_one_grounds_to_pairwise_veto():
    g = ground(AtMost(1, X, Atom("P", (X,))), DOM2)
    assert g == AndF((NotF(AndF((Atom("P", ("a",)), Atom("P", ("b",))))),))


def test_at_most_k_beyond_domain_is_vacuous():
    g = ground(AtMost(5, X, Atom("P", (X,))), DOM2)
    assert g == AndF(())


def test_ground_equality_decides():
    g = ground(ForAll(X, Exists(Y, Eq(X, Y))), DOM2)
    assert g == AndF((OrF((Top(), Bot())), OrF((Bot(), Top()))))


def exactly_one_color():
    body = AndF((
        OrF((Atom("Red", (X,)), Atom("Black", (X,)))),
        NotF(AndF((Atom("Red", (X,)), Atom("Black", (X,))))),
    ))
    return Sentence([ForAll(X, body)], {"Red": 1, "Black": 1})


def test_exactly_one_color_has_eight_models():
    assert count_models(exactly_one_color(), DOM3) == 8


def test_cardinality_atom_prunes_the_all_red_model():
    s = exactly_one_color()
    capped = Sentence(
        list(s.conjuncts) + [CardinalityAtom(((1, "Red"),), "<=", 2)],
        s.predicates)
    assert count_models(capped, DOM3) == 7


@settings(deadline=None, max_examples=60)
@given(st.sets(st.sampled_from([("a",), ("b",), ("c",)])),
       st.sets(st.sampled_from(
           list(itertools.product(DOM3, DOM3)))))
def test_grounding_preserves_satisfaction(ps, rs):
    interp = {"P": ps, "R": rs}
    formulas = [
        ForAll(X, Implies(Atom("P", (X,)), Exists(Y, Atom("R", (X, Y))))),
        ForAll(X, ForAll(Y, Implies(Atom("R", (X, Y)),
                                    OrF((Eq(X, Y), Atom("P", (Y,))))))),
        AtMost(2, X, Atom("P", (X,))),
        Exists(X, NotF(Atom("P", (X,)))),
    ]
    for f in formulas:
        assert (eval_formula(f, interp, DOM3)
                == eval_formula(ground(f, DOM3), interp, DOM3))


# ---------------------------------------------------------------------------
# sentence validation

def test_sentence_rejects_constants_in_binary_atoms():
    with pytest.raises(AssertionError):
        Sentence([ForAll(X, Atom("R", (X, "a")))], {"R": 2})


def test_sentence_rejects_open_conjuncts():
    with pytest.raises(AssertionError):
        Sentence([Atom("P", (X,))], {"P": 1})


def test_sentence_rejects_arity_mismatch():
    with pytest.raises(AssertionError):
        Sentence([Atom("P", ("a", "b"))], {"P": 1})


# ---------------------------------------------------------------------------
# axioms, semantically

def natural_linear(domain):
    order = {(domain[i], domain[j])
             for i in range(len(domain)) for j in range(i, len(domain))}
    succ = set(zip(domain, domain[1:]))
    return {"L": order, "Pred": succ}


def test_linear_axiom_accepts_the_natural_order():
    s = Sentence([Linear("L", "Pred")], {"L": 2, "Pred": 2})
    assert satisfies(natural_linear(DOM3), s, DOM3)


def test_linear_axiom_rejects_wrong_successors():
    s = Sentence([Linear("L", "Pred")], {"L": 2, "Pred": 2})
    interp = natural_linear(DOM3)
    interp["Pred"] = {("a", "c")}
    assert not satisfies(interp, s, DOM3)


def test_empty_relation_fails_totality():
    ax = Func("F", "Dom", "CoDom")
    formulas, atoms, _ = expand_func_axiom(ax)
    s = Sentence(formulas + atoms, {"F": 2, "Dom": 1, "CoDom": 1})
    interp = {"F": set(), "Dom": {("a",), ("b",)}, "CoDom": {("a",)}}
    assert not satisfies(interp, s, DOM2)


def test_func_expansion_shapes():
    plain = expand_func_axiom(Func("F", "D", "C"))
    assert len(plain[0]) == 2 and len(plain[1]) == 1 and plain[2] == []
    inj = expand_func_axiom(FuncInj("F", "D", "C"))
    assert len(inj[0]) == 3 and len(inj[1]) == 2
    assert inj[2] == [("Img_F", 1)]
    surj = expand_func_axiom(FuncSurj("F", "D", "C"))
    assert len(surj[0]) == 3 and len(surj[1]) == 1
    bij = expand_func_axiom(FuncBij("F", "D", "C"))
    assert len(bij[0]) == 4 and len(bij[1]) == 2


def test_bijections_over_three_count_six():
    evidence = (closed_world_evidence("Dom", DOM3, DOM3)
                + closed_world_evidence("CoDom", DOM3, DOM3))
    semantic = Sentence(
        evidence + [FuncBij("F", "Dom", "CoDom")],
        {"F": 2, "Dom": 1, "CoDom": 1})
    assert count_models(semantic, DOM3) == 6


AXIOM_VARIANTS = [Func, FuncInj, FuncSurj, FuncBij]

SIDE_FORMULAS = [
    Top(),
    ForAll(X, Implies(Atom("Dom", (X,)), Atom("CoDom", (X,)))),
    Exists(X, Atom("CoDom", (X,))),
    ForAll(X, ForAll(Y, Implies(Atom("F", (X, Y)), NotF(Eq(X, Y))))),
    NotF(ForAll(X, Atom("Dom", (X,)))),
]


@pytest.mark.parametrize("make_axiom", AXIOM_VARIANTS)
@pytest.mark.parametrize("phi", SIDE_FORMULAS)
def test_func_expansion_counts_match_semantics(make_axiom, phi):
    ax = make_axiom("F", "Dom", "CoDom")
    registry = {"F": 2, "Dom": 1, "CoDom": 1}
    semantic = Sentence([phi, ax], registry)
    formulas, atoms, derived = expand_func_axiom(ax)
    expanded = Sentence([phi] + formulas + atoms,
                        {**registry, **dict(derived)})
    assert count_models(semantic, DOM2) == count_models(expanded, DOM2)


@settings(deadline=None, max_examples=10)
@given(st.sets(st.sampled_from(DOM3)), st.sets(st.sampled_from(DOM3)))
def test_func_expansion_matches_under_random_evidence(dom, codom):
    ax = Func("F", "Dom", "CoDom")
    evidence = (closed_world_evidence("Dom", DOM3, dom)
                + closed_world_evidence("CoDom", DOM3, codom))
    registry = {"F": 2, "Dom": 1, "CoDom": 1}
    semantic = Sentence(evidence + [ax], registry)
    formulas, atoms, _ = expand_func_axiom(ax)
    expanded = Sentence(evidence + formulas + atoms, registry)
    assert count_models(semantic, DOM3) == count_models(expanded, DOM3)


# ---------------------------------------------------------------------------
# order enumeration

def test_linear_enumeration_counts_factorial():
    got = list(enumerate_order_interpretations(Linear("L", "Pred"), DOM3))
    assert len(got) == 6
    s = Sentence([Linear("L", "Pred")], {"L": 2, "Pred": 2})
    for interp in got:
        assert satisfies(interp, s, DOM3)
    assert len({frozenset(i["L"]) for i in got}) == 6


def test_circle_enumeration_counts_one_less_factorial():
    got = list(enumerate_order_interpretations(CircleAx("Pred"), DOM3))
    assert len(got) == 2
    s = Sentence([CircleAx("Pred")], {"Pred": 2})
    for interp in got:
        assert satisfies(interp, s, DOM3)


def test_singleton_orders():
    [linear] = enumerate_order_interpretations(Linear("L", "Pred"), ("a",))
    assert linear == {"L": {("a", "a")}, "Pred": set()}
    [circle] = enumerate_order_interpretations(CircleAx("Pred"), ("a",))
    assert circle == {"Pred": {("a", "a")}}


def test_two_element_circle_is_unique():
    got = list(enumerate_order_interpretations(CircleAx("Pred"), DOM2))
    assert got == [{"Pred": {("a", "b"), ("b", "a")}}]


def test_split_cycles_are_rejected():
    s = Sentence([CircleAx("Pred")], {"Pred": 2})
    interp = {"Pred": {("a", "b"), ("b", "a"), ("c", "d"), ("d", "c")}}
    assert not satisfies(interp, s, ("a", "b", "c", "d"))

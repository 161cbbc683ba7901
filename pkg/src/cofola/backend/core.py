"""Ground weighted model counting over the polynomial ring.

``wfomc`` conditions on the order axiom by enumerating its admissible
interpretations, expands functionality axioms, grounds everything to
clauses (equivalence-form auxiliary atoms keep the count exact), and
hands the search to the kernel.  Cardinality atoms become exponent
conditions on per-predicate tracking variables: the predicate's weight
is multiplied by a fresh variable so a model's exponent equals the
extension size, the summed polynomial is restricted to the admitted
monomials, and the tracking variables are projected away.

``naive_wfomc`` is the referee: enumerate every interpretation and
check the sentence semantically, axioms and cardinality atoms included.
"""

from __future__ import annotations

import itertools
from typing import Dict, List, Tuple

from ..errors import ResourceExceeded
from ..fol import (
    AndF, Atom, AtMost, Bot, CircleAx, ForAll, Func, FuncBij, FuncInj,
    Iff, Implies, Linear, NotF, OrF, Top, X, Y,
    enumerate_order_interpretations, expand_func_axiom, ground, satisfies,
)
from ..instance import EncodedInstance
from ..poly import CoeffSystem, LinearCmp, Poly
from ._pykernel import _padd
from .kernel import count_clauses

ORDER_ENUM_CAP = 8
DEFAULT_ATOM_BOUND = 2048
NAIVE_CAP = 22

_ONE = {(): 1}


class _Clausifier:
    """Ground formulas to clauses; fresh atoms are defined by iff.

    Equivalence-form auxiliaries extend every base model uniquely, so
    the model count over the widened atom set is unchanged; they carry
    weight 1 both ways.
    """

    def __init__(self, atom_ids: Dict[tuple, int],
                 id_weights: List[tuple]):
        self.atom_ids = atom_ids
        self.id_weights = id_weights
        self.clauses: List[tuple] = []
        self._aux = 0

    def add(self, g) -> None:
        t = self._simp(g, False)
        if t is True:
            return
        if t is False:
            self.clauses.append(())
        else:
            self._assert(t)

    # -- normalized tree: True | False | ("lit", l) | ("and"/"or", items)

    def _simp(self, f, neg: bool):
        if isinstance(f, Atom):
            lit = self.atom_ids[(f.pred, f.args)]
            return ("lit", -lit if neg else lit)
        if isinstance(f, Top):
            return not neg
        if isinstance(f, Bot):
            return neg
        if isinstance(f, NotF):
            return self._simp(f.body, not neg)
        if isinstance(f, Implies):
            return self._simp(OrF((NotF(f.left), f.right)), neg)
        if isinstance(f, Iff):
            return self._simp(AndF((Implies(f.left, f.right),
                                    Implies(f.right, f.left))), neg)
        assert isinstance(f, (AndF, OrF)), f"unground formula: {f!r}"
        conj = isinstance(f, AndF) != neg
        items = []
        for item in f.items:
            got = self._simp(item, neg)
            if got is (not conj):
                return not conj
            if got is conj:
                continue
            tag = "and" if conj else "or"
            if isinstance(got, tuple) and got[0] == tag:
                items.extend(got[1])
            else:
                items.append(got)
        if not items:
            return conj
        if len(items) == 1:
            return items[0]
        return ("and" if conj else "or", tuple(items))

    def _assert(self, t) -> None:
        if t[0] == "lit":
            self.clauses.append((t[1],))
            return
        if t[0] == "and":
            for item in t[1]:
                self._assert(item)
            return
        lits = [self._literalize(c) for c in t[1]]
        seen = set(lits)
        if any(-l in seen for l in lits):
            return  # tautology
        self.clauses.append(tuple(dict.fromkeys(lits)))

    def _literalize(self, t) -> int:
        if t[0] == "lit":
            return t[1]
        lits = [self._literalize(c) for c in t[1]]
        self._aux += 1
        aux = len(self.id_weights) + 1
        self.atom_ids[("_aux", self._aux)] = aux
        self.id_weights.append((_ONE, _ONE))
        if t[0] == "and":
            for l in lits:
                self.clauses.append((-aux, l))
            self.clauses.append(tuple([aux] + [-l for l in lits]))
        else:
            for l in lits:
                self.clauses.append((aux, -l))
            self.clauses.append(tuple([-aux] + lits))
        return aux


def _split_axioms(sentence):
    order, funcs = [], []
    for ax in sentence.axioms():
        if isinstance(ax, (Linear, CircleAx)):
            order.append(ax)
        else:
            funcs.append(ax)
    assert len(order) <= 1, "at most one order axiom per instance"
    return (order[0] if order else None), funcs


def _functional_shortcuts(ax: Func) -> List:
    """Redundant at-most-one rows (and columns for injective variants).

    Models these clauses remove have a row (or column) hit twice, which
    the |F| = |Dom| (resp. |F| = |Img_F|) condition rejects at decode;
    the admitted monomials are untouched and the search space collapses
    from arbitrary relations to actual functions.
    """
    out = [ForAll(X, AtMost(1, Y, Atom(ax.f, (X, Y))))]
    if isinstance(ax, (FuncInj, FuncBij)):
        out.append(ForAll(Y, AtMost(1, X, Atom(ax.f, (X, Y)))))
    return out


def wfomc(instance: EncodedInstance,
          atom_bound: int = DEFAULT_ATOM_BOUND) -> Poly:
    sentence, domain = instance.sentence, instance.domain
    registry = dict(sentence.predicates)
    formulas = list(sentence.formulas())
    card_atoms = list(sentence.cardinality_atoms())
    order_axiom, func_axioms = _split_axioms(sentence)

    for ax in func_axioms:
        fs, cas, derived = expand_func_axiom(ax)
        for name, arity in derived:
            registry.setdefault(name, arity)
        formulas.extend(fs)
        formulas.extend(_functional_shortcuts(ax))
        card_atoms.extend(cas)

    tracking: Dict[str, str] = {}
    conditions = []
    for ca in card_atoms:
        terms = []
        for coef, pred in ca.terms:
            var = tracking.setdefault(pred, f"#{pred}")
            terms.append((coef, var))
        conditions.append(LinearCmp(tuple(terms), ca.cmp, ca.bound))

    weights: Dict[str, Tuple[dict, dict]] = {}
    for pred in registry:
        pos, neg = instance.weight(pred)
        assert not any(v.startswith("#") for v in pos.variables()
                       | neg.variables()), \
            "weight variables may not use the tracking namespace '#'"
        if pred in tracking:
            pos = pos * Poly.var(tracking[pred])
        weights[pred] = (pos.terms, neg.terms)

    atom_ids: Dict[tuple, int] = {}
    id_weights: List[tuple] = []
    for pred, arity in registry.items():
        for args in itertools.product(domain, repeat=arity):
            atom_ids[(pred, args)] = len(id_weights) + 1
            id_weights.append(weights[pred])

    builder = _Clausifier(atom_ids, id_weights)
    for f in formulas:
        builder.add(ground(f, domain))

    fixed_base: Dict[int, bool] = {}
    for ev in sentence.evidence():
        atom = atom_ids[(ev.pred, (ev.entity,))]
        if fixed_base.get(atom, ev.positive) != ev.positive:
            return Poly()
        fixed_base[atom] = ev.positive

    if order_axiom is not None:
        if len(domain) > ORDER_ENUM_CAP:
            raise ResourceExceeded(
                f"order axiom over {len(domain)} elements needs "
                f"{len(domain)}! interpretations; the cap is "
                f"{ORDER_ENUM_CAP}!")
        order_preds = [order_axiom.pred]
        if isinstance(order_axiom, Linear):
            order_preds.append(order_axiom.order)
        branch_fixes = []
        for interp in enumerate_order_interpretations(order_axiom, domain):
            fix = dict(fixed_base)
            for pred in order_preds:
                rel = interp[pred]
                for pair in itertools.product(domain, repeat=2):
                    fix[atom_ids[(pred, pair)]] = pair in rel
            branch_fixes.append(fix)
    else:
        branch_fixes = [fixed_base]

    in_clauses = {abs(l) for cl in builder.clauses for l in cl}
    free = len(in_clauses - set(branch_fixes[0]))
    if free > atom_bound:
        raise ResourceExceeded(
            f"{free} free ground atoms exceed the bound {atom_bound}")

    total: dict = {}
    for fix in branch_fixes:
        got = count_clauses(len(id_weights), builder.clauses,
                            id_weights, fix)
        total = _padd(total, got)

    result = Poly(total)
    if conditions:
        result = CoeffSystem(tuple(conditions)).restrict(result)
        result = result.project(tracking.values())
    return result


def naive_wfomc(instance: EncodedInstance, cap: int = NAIVE_CAP) -> Poly:
    sentence, domain = instance.sentence, instance.domain
    ground_atoms = [
        (pred, args)
        for pred, arity in sentence.predicates.items()
        for args in itertools.product(domain, repeat=arity)
    ]
    fixed: Dict[tuple, bool] = {}
    for ev in sentence.evidence():
        key = (ev.pred, (ev.entity,))
        if fixed.get(key, ev.positive) != ev.positive:
            return Poly()
        fixed[key] = ev.positive
    free = [a for a in ground_atoms if a not in fixed]
    if len(free) > cap:
        raise ResourceExceeded(
            f"{len(free)} free ground atoms exceed the naive cap {cap}")

    base = Poly.const(1)
    for key, val in fixed.items():
        pos, neg = instance.weight(key[0])
        base = base * (pos if val else neg)

    total = Poly()
    for bits in itertools.product((True, False), repeat=len(free)):
        interp: Dict[str, set] = {p: set() for p in sentence.predicates}
        for (pred, args), val in fixed.items():
            if val:
                interp[pred].add(args)
        weight = base
        for (pred, args), val in zip(free, bits):
            if val:
                interp[pred].add(args)
                weight = weight * instance.weight(pred)[0]
            else:
                weight = weight * instance.weight(pred)[1]
        if satisfies(interp, sentence, domain):
            total = total + weight
    return total

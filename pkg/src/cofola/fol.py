"""Function-free first-order logic over a finite domain.

Predicates, two-variable-friendly formulas with equality, cardinality
atoms over predicate extensions, order and functionality axioms, closed
world evidence, grounding, and brute-force satisfaction.  The encoder
builds sentences out of these pieces; the backend grounds and counts
them.

Constants are plain strings and logical variables are ``Var`` values,
so an atom argument is either.  Sentences allow constants in unary
atoms only; ground formulas (produced by ``ground``) are unrestricted.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple, Union

from .problem import compare


@dataclass(frozen=True)
class Var:
    name: str

    def __repr__(self):
        return self.name


Term = Union[Var, str]

X = Var("x")
Y = Var("y")


# ---------------------------------------------------------------------------
# formulas

@dataclass(frozen=True)
class Atom:
    pred: str
    args: Tuple[Term, ...] = ()

    def __repr__(self):
        if not self.args:
            return self.pred
        return f"{self.pred}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bot:
    pass


@dataclass(frozen=True)
class NotF:
    body: "Formula"


@dataclass(frozen=True)
class AndF:
    items: Tuple["Formula", ...]


@dataclass(frozen=True)
class OrF:
    items: Tuple["Formula", ...]


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Iff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class ForAll:
    var: Var
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: Var
    body: "Formula"


@dataclass(frozen=True)
class AtMost:
    """Counting quantifier: at most k witnesses make the body true."""

    k: int
    var: Var
    body: "Formula"


Formula = Union[Atom, Eq, Top, Bot, NotF, AndF, OrF, Implies, Iff,
                ForAll, Exists, AtMost]


# ---------------------------------------------------------------------------
# non-formula conjuncts

@dataclass(frozen=True)
class CardinalityAtom:
    """Linear comparison over predicate extension sizes."""

    terms: Tuple[Tuple[int, str], ...]
    cmp: str
    bound: int


@dataclass(frozen=True)
class EvidenceLiteral:
    pred: str
    entity: str
    positive: bool


@dataclass(frozen=True)
class Linear:
    """Reflexive total order plus its successor relation."""

    order: str
    pred: str


@dataclass(frozen=True)
class CircleAx:
    """Directed Hamiltonian cycle as a successor relation."""

    pred: str


@dataclass(frozen=True)
class Func:
    f: str
    dom: str
    codom: str


@dataclass(frozen=True)
class FuncInj(Func):
    pass


@dataclass(frozen=True)
class FuncSurj(Func):
    pass


@dataclass(frozen=True)
class FuncBij(Func):
    pass


Axiom = Union[Linear, CircleAx, Func, FuncInj, FuncSurj, FuncBij]
Conjunct = Union[Formula, CardinalityAtom, Axiom, EvidenceLiteral]

FORMULA_TYPES = (Atom, Eq, Top, Bot, NotF, AndF, OrF, Implies, Iff,
                 ForAll, Exists, AtMost)


def free_vars(f: Formula, bound: frozenset = frozenset()) -> Set[Var]:
    if isinstance(f, Atom):
        return {a for a in f.args if isinstance(a, Var) and a not in bound}
    if isinstance(f, Eq):
        return {a for a in (f.left, f.right)
                if isinstance(a, Var) and a not in bound}
    if isinstance(f, (Top, Bot)):
        return set()
    if isinstance(f, NotF):
        return free_vars(f.body, bound)
    if isinstance(f, (AndF, OrF)):
        out: Set[Var] = set()
        for item in f.items:
            out |= free_vars(item, bound)
        return out
    if isinstance(f, (Implies, Iff)):
        return free_vars(f.left, bound) | free_vars(f.right, bound)
    return free_vars(f.body, bound | {f.var})


def _walk_atoms(f: Formula) -> Iterator[Atom]:
    if isinstance(f, Atom):
        yield f
    elif isinstance(f, (Eq, Top, Bot)):
        return
    elif isinstance(f, NotF):
        yield from _walk_atoms(f.body)
    elif isinstance(f, (AndF, OrF)):
        for item in f.items:
            yield from _walk_atoms(item)
    elif isinstance(f, (Implies, Iff)):
        yield from _walk_atoms(f.left)
        yield from _walk_atoms(f.right)
    else:
        yield from _walk_atoms(f.body)


class Sentence:
    """A conjunction of formulas, cardinality atoms, axioms, and evidence.

    Construction validates the tractable fragment: formula conjuncts are
    closed, every atom matches the registry arity, and constants appear
    in unary atoms only.
    """

    __slots__ = ("conjuncts", "predicates")

    def __init__(self, conjuncts: Sequence[Conjunct],
                 predicates: Dict[str, int]):
        self.conjuncts = tuple(conjuncts)
        self.predicates = dict(predicates)
        for c in self.conjuncts:
            self._check(c)

    def _check(self, c: Conjunct) -> None:
        if isinstance(c, FORMULA_TYPES):
            assert not free_vars(c), f"open formula as conjunct: {c!r}"
            for atom in _walk_atoms(c):
                arity = self.predicates.get(atom.pred)
                assert arity is not None, f"unregistered {atom.pred}"
                assert arity == len(atom.args), f"arity mismatch: {atom!r}"
                if arity >= 2:
                    assert all(isinstance(a, Var) for a in atom.args), \
                        f"constant in non-unary atom: {atom!r}"
        elif isinstance(c, CardinalityAtom):
            for _, pred in c.terms:
                assert pred in self.predicates, f"unregistered {pred}"
        elif isinstance(c, EvidenceLiteral):
            assert self.predicates.get(c.pred) == 1, \
                f"evidence needs a unary predicate: {c!r}"
        elif isinstance(c, (Linear, CircleAx)):
            if isinstance(c, Linear):
                assert self.predicates.get(c.order) == 2
            assert self.predicates.get(c.pred) == 2
        else:
            assert isinstance(c, Func), c
            assert self.predicates.get(c.f) == 2
            assert self.predicates.get(c.dom) == 1
            assert self.predicates.get(c.codom) == 1

    def formulas(self) -> List[Formula]:
        return [c for c in self.conjuncts if isinstance(c, FORMULA_TYPES)]

    def cardinality_atoms(self) -> List[CardinalityAtom]:
        return [c for c in self.conjuncts if isinstance(c, CardinalityAtom)]

    def evidence(self) -> List[EvidenceLiteral]:
        return [c for c in self.conjuncts if isinstance(c, EvidenceLiteral)]

    def axioms(self) -> List[Axiom]:
        return [c for c in self.conjuncts
                if isinstance(c, (Linear, CircleAx, Func))]


# ---------------------------------------------------------------------------
# operations

def closed_world_evidence(pred: str, domain: Sequence[str],
                          positives) -> List[EvidenceLiteral]:
    """Fix a unary predicate completely: members positive, rest negative."""
    positives = set(positives)
    assert positives <= set(domain), \
        f"{pred}: positives outside the domain: {positives - set(domain)}"
    return [EvidenceLiteral(pred, e, e in positives) for e in domain]


def expand_func_axiom(ax: Func):
    """Rewrite a functionality axiom into formulas plus cardinality atoms.

    Returns (formulas, cardinality_atoms, derived_predicates); the
    caller registers the derived predicates (the image predicate for
    injective variants) before building the sentence.
    """
    f, dom, codom = ax.f, ax.dom, ax.codom
    formulas: List[Formula] = [
        ForAll(X, Implies(Atom(dom, (X,)),
                          Exists(Y, Atom(f, (X, Y))))),
        ForAll(X, ForAll(Y, Implies(
            Atom(f, (X, Y)),
            AndF((Atom(dom, (X,)), Atom(codom, (Y,))))))),
    ]
    atoms: List[CardinalityAtom] = [
        CardinalityAtom(((1, f), (-1, dom)), "==", 0),
    ]
    derived: List[Tuple[str, int]] = []
    if isinstance(ax, (FuncInj, FuncBij)):
        img = f"Img_{f}"
        formulas.append(ForAll(Y, Iff(
            Atom(img, (Y,)),
            Exists(X, Atom(f, (X, Y))))))
        atoms.append(CardinalityAtom(((1, f), (-1, img)), "==", 0))
        derived.append((img, 1))
    if isinstance(ax, (FuncSurj, FuncBij)):
        formulas.append(ForAll(Y, Implies(
            Atom(codom, (Y,)),
            Exists(X, Atom(f, (X, Y))))))
    return formulas, atoms, derived


def subst(f: Formula, var: Var, const: str) -> Formula:
    if isinstance(f, Atom):
        return Atom(f.pred,
                    tuple(const if a == var else a for a in f.args))
    if isinstance(f, Eq):
        return Eq(const if f.left == var else f.left,
                  const if f.right == var else f.right)
    if isinstance(f, (Top, Bot)):
        return f
    if isinstance(f, NotF):
        return NotF(subst(f.body, var, const))
    if isinstance(f, AndF):
        return AndF(tuple(subst(i, var, const) for i in f.items))
    if isinstance(f, OrF):
        return OrF(tuple(subst(i, var, const) for i in f.items))
    if isinstance(f, Implies):
        return Implies(subst(f.left, var, const), subst(f.right, var, const))
    if isinstance(f, Iff):
        return Iff(subst(f.left, var, const), subst(f.right, var, const))
    if f.var == var:
        return f
    if isinstance(f, ForAll):
        return ForAll(f.var, subst(f.body, var, const))
    if isinstance(f, Exists):
        return Exists(f.var, subst(f.body, var, const))
    return AtMost(f.k, f.var, subst(f.body, var, const))


def ground(f: Formula, domain: Sequence[str]) -> Formula:
    """Replace quantifiers by finite connectives, decide ground equality."""
    if isinstance(f, Atom):
        return f
    if isinstance(f, Eq):
        assert not isinstance(f.left, Var) and not isinstance(f.right, Var)
        return Top() if f.left == f.right else Bot()
    if isinstance(f, (Top, Bot)):
        return f
    if isinstance(f, NotF):
        return NotF(ground(f.body, domain))
    if isinstance(f, AndF):
        return AndF(tuple(ground(i, domain) for i in f.items))
    if isinstance(f, OrF):
        return OrF(tuple(ground(i, domain) for i in f.items))
    if isinstance(f, Implies):
        return Implies(ground(f.left, domain), ground(f.right, domain))
    if isinstance(f, Iff):
        return Iff(ground(f.left, domain), ground(f.right, domain))
    if isinstance(f, ForAll):
        return AndF(tuple(ground(subst(f.body, f.var, d), domain)
                          for d in domain))
    if isinstance(f, Exists):
        return OrF(tuple(ground(subst(f.body, f.var, d), domain)
                         for d in domain))
    assert isinstance(f, AtMost)
    grounded = [ground(subst(f.body, f.var, d), domain) for d in domain]
    vetoes = tuple(
        NotF(AndF(tuple(combo)))
        for combo in itertools.combinations(grounded, f.k + 1))
    return AndF(vetoes)


# ---------------------------------------------------------------------------
# satisfaction

Interpretation = Dict[str, Set[tuple]]


def _eval(f: Formula, interp: Interpretation, domain: Sequence[str],
          env: Dict[Var, str]) -> bool:
    if isinstance(f, Atom):
        args = tuple(env[a] if isinstance(a, Var) else a for a in f.args)
        return args in interp.get(f.pred, set())
    if isinstance(f, Eq):
        left = env[f.left] if isinstance(f.left, Var) else f.left
        right = env[f.right] if isinstance(f.right, Var) else f.right
        return left == right
    if isinstance(f, Top):
        return True
    if isinstance(f, Bot):
        return False
    if isinstance(f, NotF):
        return not _eval(f.body, interp, domain, env)
    if isinstance(f, AndF):
        return all(_eval(i, interp, domain, env) for i in f.items)
    if isinstance(f, OrF):
        return any(_eval(i, interp, domain, env) for i in f.items)
    if isinstance(f, Implies):
        return (not _eval(f.left, interp, domain, env)
                or _eval(f.right, interp, domain, env))
    if isinstance(f, Iff):
        return (_eval(f.left, interp, domain, env)
                == _eval(f.right, interp, domain, env))
    if isinstance(f, ForAll):
        return all(_eval(f.body, interp, domain, {**env, f.var: d})
                   for d in domain)
    if isinstance(f, Exists):
        return any(_eval(f.body, interp, domain, {**env, f.var: d})
                   for d in domain)
    assert isinstance(f, AtMost)
    hits = sum(1 for d in domain
               if _eval(f.body, interp, domain, {**env, f.var: d}))
    return hits <= f.k


def _linear_holds(ax: Linear, interp: Interpretation,
                  domain: Sequence[str]) -> bool:
    order = interp.get(ax.order, set())
    pred = interp.get(ax.pred, set())
    elems = list(domain)
    for a in elems:
        if (a, a) not in order:
            return False
    for a, b in itertools.combinations(elems, 2):
        ab, ba = (a, b) in order, (b, a) in order
        if ab == ba:
            return False  # connected and antisymmetric for distinct pairs
    for a, b, c in itertools.permutations(elems, 3):
        if (a, b) in order and (b, c) in order and (a, c) not in order:
            return False
    successors = set()
    for a, b in order:
        if a == b:
            continue
        if any(z not in (a, b) and (a, z) in order and (z, b) in order
               for z in elems):
            continue
        successors.add((a, b))
    return pred == successors


def _circle_holds(ax: CircleAx, interp: Interpretation,
                  domain: Sequence[str]) -> bool:
    pred = interp.get(ax.pred, set())
    elems = list(domain)
    if len(pred) != len(elems):
        return False
    nxt: Dict[str, str] = {}
    for a, b in pred:
        if a in nxt:
            return False
        nxt[a] = b
    if set(nxt) != set(elems) or set(nxt.values()) != set(elems):
        return False
    # one cycle through everything, not several small ones
    here, seen = elems[0], 1
    while nxt[here] != elems[0]:
        here = nxt[here]
        seen += 1
        if seen > len(elems):
            return False
    return seen == len(elems)


def _func_holds(ax: Func, interp: Interpretation,
                domain: Sequence[str]) -> bool:
    f = interp.get(ax.f, set())
    dom = {t[0] for t in interp.get(ax.dom, set())}
    codom = {t[0] for t in interp.get(ax.codom, set())}
    images: Dict[str, List[str]] = {}
    for a, b in f:
        if a not in dom or b not in codom:
            return False
        images.setdefault(a, []).append(b)
    if any(len(images.get(a, ())) != 1 for a in dom):
        return False
    if isinstance(ax, (FuncInj, FuncBij)):
        hit = [bs[0] for bs in images.values()]
        if len(set(hit)) != len(hit):
            return False
    if isinstance(ax, (FuncSurj, FuncBij)):
        hit = {bs[0] for bs in images.values()}
        if hit != codom:
            return False
    return True


def eval_formula(f: Formula, interp: Interpretation,
                 domain: Sequence[str]) -> bool:
    """Evaluate one closed formula; ground formulas welcome."""
    return _eval(f, interp, domain, {})


def satisfies(interp: Interpretation, sentence: Sentence,
              domain: Sequence[str]) -> bool:
    """Direct semantic check of every conjunct, axioms included."""
    for c in sentence.conjuncts:
        if isinstance(c, FORMULA_TYPES):
            if not _eval(c, interp, domain, {}):
                return False
        elif isinstance(c, CardinalityAtom):
            total = sum(coef * len(interp.get(pred, set()))
                        for coef, pred in c.terms)
            if not compare(total, c.cmp, c.bound):
                return False
        elif isinstance(c, EvidenceLiteral):
            if ((c.entity,) in interp.get(c.pred, set())) != c.positive:
                return False
        elif isinstance(c, Linear):
            if not _linear_holds(c, interp, domain):
                return False
        elif isinstance(c, CircleAx):
            if not _circle_holds(c, interp, domain):
                return False
        else:
            if not _func_holds(c, interp, domain):
                return False
    return True


# ---------------------------------------------------------------------------
# order-axiom enumeration

def enumerate_order_interpretations(ax: Union[Linear, CircleAx],
                                    domain: Sequence[str]
                                    ) -> Iterator[Interpretation]:
    """All admissible order interpretations: n! linear, (n-1)! cyclic."""
    elems = list(domain)
    assert elems, "order axioms need a nonempty domain"
    if isinstance(ax, Linear):
        for perm in itertools.permutations(elems):
            order = {(perm[i], perm[j])
                     for i in range(len(perm))
                     for j in range(i, len(perm))}
            succ = set(zip(perm, perm[1:]))
            yield {ax.order: order, ax.pred: succ}
    else:
        first, rest = elems[0], elems[1:]
        for perm in itertools.permutations(rest):
            cycle = (first,) + perm
            succ = {(cycle[i], cycle[(i + 1) % len(cycle)])
                    for i in range(len(cycle))}
            yield {ax.pred: succ}

"""Denotation and concrete evaluation.

``denote`` maps a normalised Ast to a :class:`CountingProblem`,
performing all name and kind checking.  ``apply_action`` and
``check_constraint`` give the problem its concrete meaning: candidates
an object can take given values for its inputs, and a three-valued
check of a constraint under a partial assignment.  The enumeration
oracle is a thin search loop over these two functions, which keeps the
reference semantics in one place.

Denotation performs a few structural rewrites that are part of the
language's meaning (not optimisations):

* membership and size of an ordered object fold to its content source
  (a tuple/sequence/circle arranges everything the source holds);
* counts over sequences and circles fold to their content source; counts
  over tuples stay put because the encoder exploits position structure;
* ``a < a`` patterns fold to non-membership; ``pred``/``next_to`` of an
  entity with itself stay meaningful only for bag content and are
  rejected otherwise as constant-false-or-absent, folding to
  non-membership as well;
* size atoms over literal objects fold to constants.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterator, Optional, Tuple, Union

from . import ast as A
from .errors import CofolaTypeError, UnsupportedError
from .problem import (
    Action, AddUnionOf, AndC, Arg, Card, CircleOf, ComposeOf,
    ConstraintIR, CountingProblem, CountTerm, DedupTerm, DiffOf,
    DisjointC, EntArg, EqC, FalseC, ForParts, IndexInC, IndexIs, Init,
    IntersectOf, Kind, LessPat, Member, MsetChoose, NextToPat, NotC,
    ObjArg, ObjectDef, OrC, PartIndex, PartitionOf, PatCountTerm,
    PatternC, PatternIR, PredPat, SeqOf, SetChoose, SetChooseR, SizeCmp,
    SizeTerm, SubsetC, SuppOf, Together, TrueC, TupleOf, UnionOf,
    CONTENT_KINDS, ORDERED_KINDS, compare, constraint_objects,
)
from .universe import (
    Bag, Circle, as_bag, circle_arrangements, compositions_k,
    multichoose_k, orderings, partitions_k, subbags, subbags_k, subsets,
    subsets_k,
)


# ---------------------------------------------------------------------------
# denotation

class _Denoter:
    def __init__(self, program: A.Program):
        self.program = program
        self.objects: Dict[str, ObjectDef] = {}
        self.domain: list = []
        self.multiplicity: Dict[str, int] = {}
        # part placeholders in scope: name -> content kind of the parts
        self.part_vars: Dict[str, Kind] = {}

    # -- helpers -------------------------------------------------------

    def err(self, msg: str) -> CofolaTypeError:
        return CofolaTypeError(msg)

    def obj_kind(self, name: str) -> Kind:
        if name in self.part_vars:
            return self.part_vars[name]
        if name not in self.objects:
            raise self.err(f"unknown object {name!r}")
        return self.objects[name].kind

    def is_entity(self, name: str) -> bool:
        return name in self.multiplicity

    def need_entity(self, name: str, where: str) -> str:
        if not self.is_entity(name):
            raise self.err(f"{where}: {name!r} is not a known entity")
        return name

    def resolve_arg(self, name: str, where: str) -> Arg:
        """An argument position that accepts an entity or a set/bag."""
        if name in self.part_vars or name in self.objects:
            kind = self.obj_kind(name)
            if kind not in CONTENT_KINDS:
                raise self.err(f"{where}: {name!r} must be a set or bag, "
                               f"is a {kind.value}")
            return ObjArg(name)
        if self.is_entity(name):
            return EntArg(name)
        raise self.err(f"{where}: unknown name {name!r}")

    def content_source(self, name: str) -> str:
        """Follow an ordered object to the set/bag it arranges."""
        while self.obj_kind(name) in ORDERED_KINDS:
            name = self.objects[name].action.src
        return name

    def init_value(self, name: str):
        """The literal value of an object if it is an Init, else None."""
        if name in self.objects:
            action = self.objects[name].action
            if isinstance(action, Init):
                return action.value
        return None

    # -- declarations ----------------------------------------------------

    def run(self) -> CountingProblem:
        for decl in self.program.decls:
            self.add_decl(decl)
        constraints = tuple(self.denote_constraint(c)
                            for c in self.program.constraints)
        return CountingProblem(tuple(self.domain), self.objects,
                               constraints, self.multiplicity)

    def add_decl(self, decl: A.Decl):
        name = decl.name
        if name in self.objects:
            raise self.err(f"object {name!r} declared twice")
        if self.is_entity(name):
            raise self.err(f"{name!r} already names an entity")
        kind, action, reflection = self.denote_expr(decl.expr, name)
        self.objects[name] = ObjectDef(name, kind, action, reflection)

    def add_entities(self, value: Union[frozenset, Bag], where: str):
        items = value.pairs if isinstance(value, Bag) else \
            [(e, 1) for e in sorted(value)]
        for entity, count in items:
            if entity in self.objects:
                raise self.err(
                    f"{where}: entity {entity!r} clashes with an object")
            if entity not in self.multiplicity:
                self.domain.append(entity)
                self.multiplicity[entity] = 0
            self.multiplicity[entity] += count

    def denote_expr(self, expr: A.Expr, name: str
                    ) -> Tuple[Kind, Action, bool]:
        if isinstance(expr, A.SetLit):
            elems = [item.name for item in expr.items]
            if len(set(elems)) != len(elems):
                raise self.err(f"{name}: duplicate entity in set literal")
            value = frozenset(elems)
            self.add_entities(value, name)
            return Kind.SET, Init(value), False
        if isinstance(expr, A.BagLit):
            counts: Dict[str, int] = {}
            for item in expr.items:
                if item.name in counts:
                    raise self.err(
                        f"{name}: duplicate entity in bag literal")
                if item.count < 1:
                    raise self.err(f"{name}: multiplicity must be positive")
                counts[item.name] = item.count
            value = Bag.from_counts(counts)
            self.add_entities(value, name)
            return Kind.BAG, Init(value), False
        if isinstance(expr, A.Ref):
            raise self.err(f"{name}: aliases are not declarations; "
                           f"apply an operation to {expr.name!r}")
        if isinstance(expr, A.Choose):
            src = self.src_name(expr.src, name)
            kind = self.need_kind(src, CONTENT_KINDS, name)
            if expr.k is not None and expr.k < 0:
                raise self.err(f"{name}: negative size")
            if kind is Kind.SET:
                return Kind.SET, SetChoose(src, expr.k), False
            return Kind.BAG, MsetChoose(src, expr.k), False
        if isinstance(expr, A.ChooseReplace):
            src = self.src_name(expr.src, name)
            self.need_kind(src, (Kind.SET,), name)
            if expr.k is None:
                raise self.err(
                    f"{name}: choose_replace needs an explicit size")
            if expr.k < 0:
                raise self.err(f"{name}: negative size")
            return Kind.BAG, SetChooseR(src, expr.k), False
        if isinstance(expr, A.Supp):
            src = self.src_name(expr.src, name)
            self.need_kind(src, (Kind.BAG,), name)
            return Kind.SET, SuppOf(src), False
        if isinstance(expr, (A.UnionOp, A.IntersectOp, A.DiffOp,
                             A.AddUnionOp)):
            lhs = self.src_name(expr.lhs, name)
            rhs = self.src_name(expr.rhs, name)
            lk = self.need_kind(lhs, CONTENT_KINDS, name)
            rk = self.need_kind(rhs, CONTENT_KINDS, name)
            if isinstance(expr, A.AddUnionOp):
                return Kind.BAG, AddUnionOf(lhs, rhs), False
            out = Kind.SET if lk is Kind.SET and rk is Kind.SET else Kind.BAG
            node = {A.UnionOp: UnionOf, A.IntersectOp: IntersectOf,
                    A.DiffOp: DiffOf}[type(expr)]
            return out, node(lhs, rhs), False
        if isinstance(expr, (A.TupleOf, A.SequenceOf)):
            src = self.src_name(expr.src, name)
            self.need_kind(src, CONTENT_KINDS, name)
            if isinstance(expr, A.TupleOf):
                return Kind.TUPLE, TupleOf(src), False
            return Kind.SEQUENCE, SeqOf(src), False
        if isinstance(expr, A.CircleOf):
            src = self.src_name(expr.src, name)
            self.need_kind(src, CONTENT_KINDS, name)
            return Kind.CIRCLE, CircleOf(src, expr.reflection), \
                expr.reflection
        if isinstance(expr, (A.PartitionOf, A.ComposeOf)):
            src = self.src_name(expr.src, name)
            self.need_kind(src, CONTENT_KINDS, name)
            if expr.k < 1:
                raise self.err(f"{name}: need at least one part")
            if isinstance(expr, A.PartitionOf):
                return Kind.PARTITION, PartitionOf(src, expr.k), False
            return Kind.COMPOSITION, ComposeOf(src, expr.k), False
        if isinstance(expr, A.IndexOf):
            src = self.src_name(expr.src, name)
            kind = self.obj_kind(src)
            if kind is Kind.PARTITION:
                raise self.err(
                    f"{name}: parts of a partition are unordered and "
                    f"cannot be indexed")
            if kind is not Kind.COMPOSITION:
                raise self.err(f"{name}: only compositions can be indexed")
            k = self.objects[src].action.k
            if not 0 <= expr.index < k:
                raise self.err(
                    f"{name}: index {expr.index} outside 0..{k - 1}")
            part_kind = self.obj_kind(self.objects[src].action.src)
            return part_kind, PartIndex(src, expr.index), False
        if isinstance(expr, A.FusedChoose):
            raise AssertionError("desugar must run before denote")
        raise self.err(f"{name}: cannot denote {type(expr).__name__}")

    def src_name(self, expr: A.Expr, where: str) -> str:
        if not isinstance(expr, A.Ref):
            raise AssertionError(
                f"{where}: operand not lifted; desugar must run first")
        name = expr.name
        if name in self.part_vars:
            return name
        if name not in self.objects:
            if self.is_entity(name):
                raise self.err(f"{where}: {name!r} is an entity, "
                               f"not an object")
            raise self.err(f"{where}: unknown object {name!r}")
        return name

    def need_kind(self, name: str, kinds, where: str) -> Kind:
        kind = self.obj_kind(name)
        if kind not in kinds:
            allowed = "/".join(k.value for k in kinds)
            raise self.err(
                f"{where}: {name!r} is a {kind.value}, expected {allowed}")
        return kind

    # -- constraints -----------------------------------------------------

    def denote_constraint(self, c) -> ConstraintIR:
        if isinstance(c, A.CAnd):
            return AndC(tuple(self.denote_constraint(i) for i in c.items))
        if isinstance(c, A.COr):
            return OrC(tuple(self.denote_constraint(i) for i in c.items))
        if isinstance(c, A.CNot):
            return NotC(self.denote_constraint(c.item))
        if isinstance(c, A.CMember):
            entity = self.need_entity(c.entity, "membership")
            obj = self.src_name(c.obj, "membership")
            self.need_kind(obj, CONTENT_KINDS + ORDERED_KINDS, "membership")
            return Member(entity, self.content_source(obj))
        if isinstance(c, A.CSubset):
            lhs = self.src_name(c.lhs, "subset")
            rhs = self.src_name(c.rhs, "subset")
            self.need_kind(lhs, CONTENT_KINDS, "subset")
            self.need_kind(rhs, CONTENT_KINDS, "subset")
            return SubsetC(lhs, rhs)
        if isinstance(c, A.CDisjoint):
            lhs = self.src_name(c.lhs, "disjoint")
            rhs = self.src_name(c.rhs, "disjoint")
            self.need_kind(lhs, CONTENT_KINDS, "disjoint")
            self.need_kind(rhs, CONTENT_KINDS, "disjoint")
            return DisjointC(lhs, rhs)
        if isinstance(c, A.CObjEq):
            lhs = self.src_name(c.lhs, "equality")
            rhs = self.src_name(c.rhs, "equality")
            lk = self.need_kind(lhs, CONTENT_KINDS, "equality")
            rk = self.need_kind(rhs, CONTENT_KINDS, "equality")
            if lk is not rk:
                raise self.err(
                    f"equality: {lhs!r} is a {lk.value} but {rhs!r} is a "
                    f"{rk.value}; comparing a set with a bag is not defined")
            return EqC(lhs, rhs)
        if isinstance(c, A.CSize):
            return self.denote_size(c)
        if isinstance(c, A.CIndexEq):
            obj = self.tuple_indexed(c.obj, c.index)
            entity = self.need_entity(c.entity, "tuple constraint")
            return IndexIs(obj, c.index - 1, entity)
        if isinstance(c, A.CIndexIn):
            obj = self.tuple_indexed(c.obj, c.index)
            target = self.src_name(c.target, "tuple constraint")
            self.need_kind(target, CONTENT_KINDS, "tuple constraint")
            return IndexInC(obj, c.index - 1, target)
        if isinstance(c, A.CPattern):
            return self.denote_pattern_con(c)
        if isinstance(c, A.CForParts):
            return self.denote_for_parts(c)
        raise self.err(f"cannot denote constraint {type(c).__name__}")

    def tuple_indexed(self, name: str, index: int) -> str:
        if name not in self.objects:
            raise self.err(f"tuple constraint: unknown object {name!r}")
        if self.obj_kind(name) is not Kind.TUPLE:
            raise self.err(
                f"tuple constraint: {name!r} is not a tuple")
        if index < 1:
            raise self.err(
                f"tuple constraint: positions are 1-based, got {index}")
        return name

    # -- patterns ---------------------------------------------------------

    def denote_pattern_con(self, c: A.CPattern) -> ConstraintIR:
        obj = c.obj
        if obj not in self.objects:
            raise self.err(f"pattern: unknown object {obj!r}")
        kind = self.obj_kind(obj)
        if kind not in (Kind.SEQUENCE, Kind.CIRCLE):
            raise self.err(f"pattern: {obj!r} is a {kind.value}, "
                           f"patterns apply to sequences and circles")
        pattern = self.denote_pattern(c.pattern, kind, obj)
        if isinstance(pattern, ConstraintIR):
            return pattern  # degenerate pattern folded away
        return PatternC(obj, pattern)

    def denote_pattern(self, p: A.Pattern, kind: Kind, obj: str
                       ) -> Union[PatternIR, ConstraintIR]:
        src = self.content_source(obj)
        src_kind = self.obj_kind(src)
        if isinstance(p, A.PTogether):
            return Together(self.resolve_arg(p.arg, "together"))
        if isinstance(p, A.PLess):
            if kind is Kind.CIRCLE:
                raise UnsupportedError(
                    "relative order is undefined on a circle")
            lhs = self.resolve_arg(p.lhs, "order pattern")
            rhs = self.resolve_arg(p.rhs, "order pattern")
            if lhs == rhs and isinstance(lhs, EntArg):
                # a < a holds only when a does not occur at all
                return NotC(Member(lhs.name, src))
            return LessPat(lhs, rhs)
        if isinstance(p, (A.PPred, A.PNextTo)):
            first = self.need_entity(p.first, "adjacency pattern")
            second = self.need_entity(p.second, "adjacency pattern")
            if first == second:
                if src_kind is Kind.BAG:
                    raise UnsupportedError(
                        "adjacency of an entity with itself in a bag "
                        "arrangement is not supported")
                # with one copy there is no second occurrence to sit
                # next to, so the pattern means absence
                return NotC(Member(first, src))
            if isinstance(p, A.PPred):
                return PredPat(first, second)
            return NextToPat(first, second)
        raise self.err(f"unknown pattern {type(p).__name__}")

    # -- size constraints ---------------------------------------------

    def denote_size(self, c: A.CSize) -> ConstraintIR:
        terms = []
        shift = Fraction(0)
        for coef, atom in c.terms:
            out = self.denote_size_atom(atom)
            if isinstance(out, Fraction):
                shift += coef * out
            else:
                terms.append((coef, out))
        bound = c.bound - shift
        if not terms:
            holds = compare(Fraction(0), c.cmp, bound)
            return TrueC() if holds else FalseC()
        return SizeCmp(tuple(terms), c.cmp, bound)

    def denote_size_atom(self, atom: A.SizeAtom
                         ) -> Union[SizeTerm, Fraction]:
        if isinstance(atom, A.SACard):
            obj = atom.obj
            if obj not in self.objects and obj not in self.part_vars:
                raise self.err(f"size: unknown object {obj!r}")
            kind = self.obj_kind(obj)
            if kind not in CONTENT_KINDS + ORDERED_KINDS:
                raise self.err(f"size: |{obj}| undefined for {kind.value}")
            obj = self.content_source(obj)
            value = self.init_value(obj)
            if value is not None:
                total = value.total() if isinstance(value, Bag) \
                    else len(value)
                return Fraction(total)
            return Card(obj)
        if isinstance(atom, A.SACount):
            return self.denote_count(atom)
        if isinstance(atom, A.SAPatCount):
            return self.denote_pat_count(atom)
        if isinstance(atom, A.SADedup):
            obj = atom.obj
            if self.obj_kind(obj) is not Kind.TUPLE:
                raise self.err("dedup_count applies to tuples")
            arg = self.resolve_arg(self.ref_name(atom.arg), "dedup_count")
            if not isinstance(arg, ObjArg):
                raise self.err("dedup_count takes a set or bag argument")
            return DedupTerm(obj, arg)
        raise self.err(f"unknown size atom {type(atom).__name__}")

    def ref_name(self, expr: A.Expr) -> str:
        if not isinstance(expr, A.Ref):
            raise AssertionError("count argument not lifted by desugar")
        return expr.name

    def denote_count(self, atom: A.SACount) -> Union[SizeTerm, Fraction]:
        obj = atom.obj
        if obj not in self.objects and obj not in self.part_vars:
            raise self.err(f"count: unknown object {obj!r}")
        kind = self.obj_kind(obj)
        arg = self.resolve_arg(self.ref_name(atom.arg), "count")
        if kind in (Kind.SEQUENCE, Kind.CIRCLE):
            obj = self.content_source(obj)
            kind = self.obj_kind(obj)
        if kind in CONTENT_KINDS:
            value = self.init_value(obj)
            if isinstance(arg, EntArg):
                if value is not None:
                    return Fraction(as_bag(value).count(arg.name))
                return CountTerm(obj, arg)
            arg_value = self.init_value(arg.name)
            if value is not None and arg_value is not None:
                support = arg_value.support() if isinstance(arg_value, Bag) \
                    else arg_value
                bag = as_bag(value)
                return Fraction(sum(bag.count(e) for e in support))
            return CountTerm(obj, arg)
        if kind is Kind.TUPLE:
            return CountTerm(obj, arg)
        if kind is Kind.PARTITION or kind is Kind.COMPOSITION:
            raise self.err("count does not apply to groupings")
        raise self.err(f"count: unsupported object kind {kind.value}")

    def denote_pat_count(self, atom: A.SAPatCount) -> SizeTerm:
        obj = atom.obj
        if obj not in self.objects:
            raise self.err(f"count: unknown object {obj!r}")
        kind = self.obj_kind(obj)
        if kind not in (Kind.SEQUENCE, Kind.CIRCLE):
            raise self.err("pattern counts apply to sequences and circles")
        p = atom.pattern
        if isinstance(p, A.PTogether):
            raise UnsupportedError("together cannot be counted")
        if isinstance(p, A.PLess) and kind is Kind.CIRCLE:
            raise UnsupportedError("relative order is undefined on a circle")
        pattern = self.denote_pattern(p, kind, obj)
        if isinstance(pattern, ConstraintIR):
            # degenerate adjacency of an absent entity: zero occurrences
            return PatCountTerm(obj, self._dummy_zero_pattern(p))
        return PatCountTerm(obj, pattern)

    def _dummy_zero_pattern(self, p: A.Pattern) -> PatternIR:
        # pred/next_to/lt of e with itself on a set source never has an
        # occurrence; keep the literal pattern, evaluation yields 0
        if isinstance(p, A.PPred):
            return PredPat(p.first, p.second)
        if isinstance(p, A.PNextTo):
            return NextToPat(p.first, p.second)
        lhs = self.resolve_arg(p.lhs, "order pattern")
        rhs = self.resolve_arg(p.rhs, "order pattern")
        return LessPat(lhs, rhs)

    # -- per-part templates ------------------------------------------------

    def denote_for_parts(self, c: A.CForParts) -> ConstraintIR:
        obj = c.obj
        if obj not in self.objects:
            raise self.err(f"for: unknown object {obj!r}")
        kind = self.obj_kind(obj)
        if kind not in (Kind.PARTITION, Kind.COMPOSITION):
            raise self.err(
                f"for: {obj!r} is a {kind.value}, expected a grouping")
        if c.var in self.objects or self.is_entity(c.var):
            raise self.err(
                f"for: part name {c.var!r} shadows an existing name")
        if c.var in self.part_vars:
            raise self.err(f"for: nested part name {c.var!r}")
        part_kind = self.obj_kind(self.objects[obj].action.src)
        self.part_vars[c.var] = part_kind
        try:
            template = self.denote_constraint(c.template)
        finally:
            del self.part_vars[c.var]
        return ForParts(obj, c.var, template)




def denote(program: A.Program) -> CountingProblem:
    """Type-check a normalised Ast and produce the counting problem."""
    return _Denoter(program).run()


# ---------------------------------------------------------------------------
# concrete evaluation (shared by the oracle and tests)

def apply_action(objdef: ObjectDef, env: Dict[str, object]) -> Iterator:
    """All candidate values for an object given its inputs' values."""
    action = objdef.action
    if isinstance(action, Init):
        yield action.value
    elif isinstance(action, SetChoose):
        src = env[action.src]
        yield from (subsets(src) if action.k is None
                    else subsets_k(src, action.k))
    elif isinstance(action, MsetChoose):
        src = env[action.src]
        yield from (subbags(src) if action.k is None
                    else subbags_k(src, action.k))
    elif isinstance(action, SetChooseR):
        yield from multichoose_k(env[action.src], action.k)
    elif isinstance(action, SuppOf):
        yield env[action.src].support()
    elif isinstance(action, (UnionOf, IntersectOf, DiffOf, AddUnionOf)):
        yield _content_op(action, env[action.lhs], env[action.rhs])
    elif isinstance(action, TupleOf):
        yield from orderings(env[action.src])
    elif isinstance(action, SeqOf):
        yield from orderings(env[action.src])
    elif isinstance(action, CircleOf):
        yield from circle_arrangements(env[action.src], action.reflection)
    elif isinstance(action, PartitionOf):
        yield from partitions_k(env[action.src], action.k)
    elif isinstance(action, ComposeOf):
        yield from compositions_k(env[action.src], action.k)
    elif isinstance(action, PartIndex):
        yield env[action.src].parts[action.index]
    else:
        raise AssertionError(f"no evaluation for {type(action).__name__}")


def _content_op(action: Action, lhs, rhs):
    if isinstance(action, AddUnionOf):
        return as_bag(lhs).add(as_bag(rhs))
    both_sets = isinstance(lhs, frozenset) and isinstance(rhs, frozenset)
    if both_sets:
        if isinstance(action, UnionOf):
            return lhs | rhs
        if isinstance(action, IntersectOf):
            return lhs & rhs
        return lhs - rhs
    lb, rb = as_bag(lhs), as_bag(rhs)
    if isinstance(action, UnionOf):
        return lb.union(rb)
    if isinstance(action, IntersectOf):
        return lb.intersect(rb)
    return lb.diff(rb)


# -- value helpers ----------------------------------------------------------

def _word(value) -> Tuple[str, ...]:
    """The underlying linear word of an ordered value."""
    if isinstance(value, Circle):
        return value.items
    return tuple(value)


def _entity_set(value) -> frozenset:
    if isinstance(value, Bag):
        return value.support()
    if isinstance(value, frozenset):
        return value
    raise AssertionError(f"not a content value: {value!r}")


def _occurrences(value, entity: str) -> int:
    if isinstance(value, Bag):
        return value.count(entity)
    if isinstance(value, frozenset):
        return 1 if entity in value else 0
    return sum(1 for e in _word(value) if e == entity)


def _arg_entities(arg: Arg, env) -> frozenset:
    if isinstance(arg, EntArg):
        return frozenset([arg.name])
    return _entity_set(env[arg.name])


# -- three-valued constraint checking ---------------------------------------

def check_constraint(c: ConstraintIR, env: Dict[str, object]
                     ) -> Optional[bool]:
    """True/False when decidable under the partial assignment ``env``,
    None when some referenced object has no value yet."""
    if isinstance(c, TrueC):
        return True
    if isinstance(c, FalseC):
        return False
    if isinstance(c, AndC):
        out: Optional[bool] = True
        for item in c.items:
            r = check_constraint(item, env)
            if r is False:
                return False
            if r is None:
                out = None
        return out
    if isinstance(c, OrC):
        out = False
        for item in c.items:
            r = check_constraint(item, env)
            if r is True:
                return True
            if r is None:
                out = None
        return out
    if isinstance(c, NotC):
        r = check_constraint(c.item, env)
        return None if r is None else not r
    if isinstance(c, ForParts):
        if c.obj not in env:
            return None
        out = True
        for part in env[c.obj].parts:
            inner = dict(env)
            inner[c.var] = part
            r = check_constraint(c.template, inner)
            if r is False:
                return False
            if r is None:
                out = None
        return out
    # leaf constraints: all referenced objects must be bound
    for name in constraint_objects(c):
        if name not in env:
            return None
    return _check_leaf(c, env)


def _check_leaf(c: ConstraintIR, env) -> bool:
    if isinstance(c, Member):
        return _occurrences(env[c.obj], c.entity) > 0
    if isinstance(c, SubsetC):
        lhs, rhs = env[c.lhs], env[c.rhs]
        if isinstance(lhs, frozenset) and isinstance(rhs, frozenset):
            return lhs <= rhs
        return as_bag(lhs).subbag_of(as_bag(rhs))
    if isinstance(c, DisjointC):
        return not (_entity_set(env[c.lhs]) & _entity_set(env[c.rhs]))
    if isinstance(c, EqC):
        return env[c.lhs] == env[c.rhs]
    if isinstance(c, SizeCmp):
        total = Fraction(0)
        for coef, term in c.terms:
            total += coef * eval_size_term(term, env)
        return compare(total, c.cmp, c.bound)
    if isinstance(c, IndexIs):
        word = _word(env[c.obj])
        return c.index < len(word) and word[c.index] == c.entity
    if isinstance(c, IndexInC):
        word = _word(env[c.obj])
        return c.index < len(word) and \
            word[c.index] in _entity_set(env[c.target])
    if isinstance(c, PatternC):
        return _check_pattern(c.pattern, env[c.obj], env)
    raise AssertionError(f"no evaluation for {type(c).__name__}")


def eval_size_term(term: SizeTerm, env) -> Fraction:
    if isinstance(term, Card):
        value = env[term.obj]
        if isinstance(value, Bag):
            return Fraction(value.total())
        return Fraction(len(value))
    if isinstance(term, CountTerm):
        value = env[term.obj]
        targets = _arg_entities(term.arg, env)
        if isinstance(value, (frozenset, Bag)):
            bag = as_bag(value)
            return Fraction(sum(bag.count(e) for e in targets))
        return Fraction(sum(1 for e in _word(value) if e in targets))
    if isinstance(term, DedupTerm):
        value = env[term.obj]
        used = frozenset(_word(value)) if not isinstance(
            value, (frozenset, Bag)) else _entity_set(value)
        return Fraction(len(used & _arg_entities(term.arg, env)))
    if isinstance(term, PatCountTerm):
        return Fraction(_count_pattern(term.pattern, env[term.obj], env))
    raise AssertionError(f"no evaluation for {type(term).__name__}")


# -- pattern evaluation ------------------------------------------------------

def _positions(word, entities) -> list:
    return [i for i, e in enumerate(word) if e in entities]


def _check_pattern(p: PatternIR, value, env) -> bool:
    word = _word(value)
    cyclic = isinstance(value, Circle)
    n = len(word)
    if isinstance(p, Together):
        pos = _positions(word, _arg_entities(p.arg, env))
        if len(pos) <= 1:
            return True
        if cyclic:
            if n == len(pos):
                return True
            breaks = sum(1 for i in pos if (i + 1) % n not in pos)
            return breaks == 1
        return pos[-1] - pos[0] + 1 == len(pos)
    if isinstance(p, LessPat):
        firsts = _positions(word, _arg_entities(p.lhs, env))
        seconds = _positions(word, _arg_entities(p.rhs, env))
        if not firsts or not seconds:
            return True
        return max(firsts) < min(seconds)
    if isinstance(p, PredPat):
        for i, e in enumerate(word):
            if e == p.first:
                j = (i + 1) % n if cyclic else i + 1
                if j >= n or word[j] != p.second:
                    return False
        return True
    if isinstance(p, NextToPat):
        for i, e in enumerate(word):
            if e == p.first:
                ok = False
                for j in (i - 1, i + 1):
                    if cyclic:
                        j %= n
                    elif not 0 <= j < n:
                        continue
                    if j != i and word[j] == p.second:
                        ok = True
                if not ok:
                    return False
        return True
    raise AssertionError(f"no evaluation for {type(p).__name__}")


def _count_pattern(p: PatternIR, value, env) -> int:
    word = _word(value)
    cyclic = isinstance(value, Circle)
    n = len(word)
    if isinstance(p, LessPat):
        firsts = _arg_entities(p.lhs, env)
        seconds = _arg_entities(p.rhs, env)
        total = 0
        for i in range(n):
            if word[i] in firsts:
                total += sum(1 for j in range(i + 1, n)
                             if word[j] in seconds)
        return total
    if isinstance(p, PredPat):
        limit = n if cyclic else n - 1
        return sum(1 for i in range(max(limit, 0))
                   if word[i] == p.first and word[(i + 1) % n] == p.second)
    if isinstance(p, NextToPat):
        limit = n if cyclic else n - 1
        total = 0
        for i in range(max(limit, 0)):
            j = (i + 1) % n
            if word[i] == p.first and word[j] == p.second:
                total += 1
            if word[i] == p.second and word[j] == p.first:
                total += 1
        return total
    raise AssertionError(f"cannot count {type(p).__name__}")

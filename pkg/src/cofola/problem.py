"""The counting-problem representation a program denotes.

A problem is a triple: the entity domain, a dictionary of derived
objects (each built by one action applied to earlier objects), and a
tree of constraints over those objects.  This is the interface between
the front half of the pipeline (parse, denote) and the back half
(preprocess, decompose, encode, count), and also what the enumeration
oracle consumes.

Only ``Init`` actions introduce entities.  All other actions reference
previously declared objects by name, so declaration order is a valid
evaluation order.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Optional, Tuple, Union

from .universe import Bag


class Kind(enum.Enum):
    SET = "set"
    BAG = "bag"
    TUPLE = "tuple"
    SEQUENCE = "sequence"
    CIRCLE = "circle"
    PARTITION = "partition"
    COMPOSITION = "composition"


ORDERED_KINDS = (Kind.TUPLE, Kind.SEQUENCE, Kind.CIRCLE)
GROUPED_KINDS = (Kind.PARTITION, Kind.COMPOSITION)
CONTENT_KINDS = (Kind.SET, Kind.BAG)


def compare(lhs, cmp: str, rhs) -> bool:
    """Evaluate one of the six size comparators."""
    if cmp == "==":
        return lhs == rhs
    if cmp == "!=":
        return lhs != rhs
    if cmp == "<":
        return lhs < rhs
    if cmp == ">":
        return lhs > rhs
    if cmp == "<=":
        return lhs <= rhs
    if cmp == ">=":
        return lhs >= rhs
    raise AssertionError(f"unknown comparator {cmp!r}")


# ---------------------------------------------------------------------------
# actions

class Action:
    pass


@dataclass(frozen=True)
class Init(Action):
    """An explicit literal; the only action that introduces entities."""
    value: Union[frozenset, Bag]


@dataclass(frozen=True)
class SetChoose(Action):
    """Subset of a set, optionally of fixed size."""
    src: str
    k: Optional[int] = None


@dataclass(frozen=True)
class MsetChoose(Action):
    """Sub-bag of a bag, optionally of fixed total size."""
    src: str
    k: Optional[int] = None


@dataclass(frozen=True)
class SetChooseR(Action):
    """Choose k from a set with replacement; the result is a bag."""
    src: str
    k: int = 0


@dataclass(frozen=True)
class SuppOf(Action):
    src: str


@dataclass(frozen=True)
class UnionOf(Action):
    lhs: str
    rhs: str


@dataclass(frozen=True)
class IntersectOf(Action):
    lhs: str
    rhs: str


@dataclass(frozen=True)
class DiffOf(Action):
    lhs: str
    rhs: str


@dataclass(frozen=True)
class AddUnionOf(Action):
    lhs: str
    rhs: str


@dataclass(frozen=True)
class TupleOf(Action):
    src: str


@dataclass(frozen=True)
class SeqOf(Action):
    src: str


@dataclass(frozen=True)
class CircleOf(Action):
    src: str
    reflection: bool = False


@dataclass(frozen=True)
class PartitionOf(Action):
    src: str
    k: int = 0


@dataclass(frozen=True)
class ComposeOf(Action):
    src: str
    k: int = 0


@dataclass(frozen=True)
class PartIndex(Action):
    """One part of a grouping.  Programs can only index compositions;
    decomposition also mints these for partition parts when expanding
    per-part constraints."""
    src: str
    index: int = 0


def action_deps(action: Action) -> Tuple[str, ...]:
    if isinstance(action, Init):
        return ()
    if isinstance(action, (UnionOf, IntersectOf, DiffOf, AddUnionOf)):
        return (action.lhs, action.rhs)
    return (action.src,)


# ---------------------------------------------------------------------------
# objects

@dataclass(frozen=True)
class ObjectDef:
    name: str
    kind: Kind
    action: Action
    # circles remember whether reflections are identified
    reflection: bool = False


# ---------------------------------------------------------------------------
# pattern and size-term arguments

@dataclass(frozen=True)
class EntArg:
    name: str


@dataclass(frozen=True)
class ObjArg:
    name: str


Arg = Union[EntArg, ObjArg]


class PatternIR:
    pass


@dataclass(frozen=True)
class Together(PatternIR):
    arg: Arg


@dataclass(frozen=True)
class LessPat(PatternIR):
    lhs: Arg
    rhs: Arg


@dataclass(frozen=True)
class PredPat(PatternIR):
    first: str
    second: str


@dataclass(frozen=True)
class NextToPat(PatternIR):
    first: str
    second: str


# ---------------------------------------------------------------------------
# size terms

class SizeTerm:
    pass


@dataclass(frozen=True)
class Card(SizeTerm):
    obj: str


@dataclass(frozen=True)
class CountTerm(SizeTerm):
    """obj.count(arg): multiplicity of an entity in a bag, occurrences
    of an entity among a tuple's positions, or positions holding any
    entity of a set/bag argument."""
    obj: str
    arg: Arg


@dataclass(frozen=True)
class DedupTerm(SizeTerm):
    """obj.dedup_count(arg): distinct entities of arg used by the tuple."""
    obj: str
    arg: ObjArg


@dataclass(frozen=True)
class PatCountTerm(SizeTerm):
    obj: str
    pattern: PatternIR


# ---------------------------------------------------------------------------
# constraints

class ConstraintIR:
    pass


@dataclass(frozen=True)
class AndC(ConstraintIR):
    items: Tuple


@dataclass(frozen=True)
class OrC(ConstraintIR):
    items: Tuple


@dataclass(frozen=True)
class NotC(ConstraintIR):
    item: ConstraintIR


@dataclass(frozen=True)
class TrueC(ConstraintIR):
    """Vacuously true; normalisations can leave it behind."""


@dataclass(frozen=True)
class FalseC(ConstraintIR):
    pass


@dataclass(frozen=True)
class Member(ConstraintIR):
    entity: str
    obj: str


@dataclass(frozen=True)
class SubsetC(ConstraintIR):
    lhs: str
    rhs: str


@dataclass(frozen=True)
class DisjointC(ConstraintIR):
    lhs: str
    rhs: str


@dataclass(frozen=True)
class EqC(ConstraintIR):
    lhs: str
    rhs: str


@dataclass(frozen=True)
class SizeCmp(ConstraintIR):
    """sum_i coef_i * term_i  cmp  bound.  cmp is one of
    == != < > <= >= (!= only arises internally from negation)."""
    terms: Tuple  # of (Fraction, SizeTerm)
    cmp: str
    bound: Fraction

    def negated(self) -> "SizeCmp":
        flip = {"==": "!=", "!=": "==", "<": ">=", ">=": "<",
                ">": "<=", "<=": ">"}
        return SizeCmp(self.terms, flip[self.cmp], self.bound)


@dataclass(frozen=True)
class IndexIs(ConstraintIR):
    """Tuple position (0-based internally) holds a given entity."""
    obj: str
    index: int
    entity: str


@dataclass(frozen=True)
class IndexInC(ConstraintIR):
    obj: str
    index: int
    target: str


@dataclass(frozen=True)
class PatternC(ConstraintIR):
    obj: str
    pattern: PatternIR


@dataclass(frozen=True)
class ForParts(ConstraintIR):
    """The template holds for every part of the grouping; inside the
    template the placeholder name stands for the running part."""
    obj: str
    var: str
    template: ConstraintIR


# ---------------------------------------------------------------------------
# the problem triple

@dataclass
class CountingProblem:
    domain: Tuple[str, ...]
    objects: Dict[str, ObjectDef]
    constraints: Tuple[ConstraintIR, ...]
    # per-entity multiplicity of the whole domain: how many copies of
    # each entity exist across all Init actions (sets contribute 1)
    multiplicity: Dict[str, int] = field(default_factory=dict)

    def kind(self, name: str) -> Kind:
        return self.objects[name].kind

    def action(self, name: str) -> Action:
        return self.objects[name].action

    def order(self) -> Tuple[str, ...]:
        """Objects in declaration order (a valid evaluation order)."""
        return tuple(self.objects)


def constraint_objects(c: ConstraintIR) -> Tuple[str, ...]:
    """Names of all objects a constraint mentions, in first-use order."""
    out = []

    def add(name: str):
        if name not in out:
            out.append(name)

    def arg(a: Arg):
        if isinstance(a, ObjArg):
            add(a.name)

    def pat(p: PatternIR):
        if isinstance(p, Together):
            arg(p.arg)
        elif isinstance(p, LessPat):
            arg(p.lhs)
            arg(p.rhs)

    def walk(c: ConstraintIR):
        if isinstance(c, (AndC, OrC)):
            for i in c.items:
                walk(i)
        elif isinstance(c, NotC):
            walk(c.item)
        elif isinstance(c, Member):
            add(c.obj)
        elif isinstance(c, (SubsetC, DisjointC, EqC)):
            add(c.lhs)
            add(c.rhs)
        elif isinstance(c, SizeCmp):
            for _, term in c.terms:
                add(term.obj)
                if isinstance(term, (CountTerm, DedupTerm)):
                    arg(term.arg)
                elif isinstance(term, PatCountTerm):
                    pat(term.pattern)
        elif isinstance(c, (IndexIs, IndexInC)):
            add(c.obj)
            if isinstance(c, IndexInC):
                add(c.target)
        elif isinstance(c, PatternC):
            add(c.obj)
            pat(c.pattern)
        elif isinstance(c, ForParts):
            add(c.obj)
            walk(c.template)

    walk(c)
    return tuple(out)


def substitute_obj(c: ConstraintIR, old: str, new: str) -> ConstraintIR:
    """Rewrite every reference to object ``old`` into ``new`` (used when
    expanding per-part templates)."""
    def ren(name: str) -> str:
        return new if name == old else name

    def arg(a: Arg) -> Arg:
        if isinstance(a, ObjArg):
            return ObjArg(ren(a.name))
        return a

    def pat(p: PatternIR) -> PatternIR:
        if isinstance(p, Together):
            return Together(arg(p.arg))
        if isinstance(p, LessPat):
            return LessPat(arg(p.lhs), arg(p.rhs))
        return p

    if isinstance(c, AndC):
        return AndC(tuple(substitute_obj(i, old, new) for i in c.items))
    if isinstance(c, OrC):
        return OrC(tuple(substitute_obj(i, old, new) for i in c.items))
    if isinstance(c, NotC):
        return NotC(substitute_obj(c.item, old, new))
    if isinstance(c, Member):
        return Member(c.entity, ren(c.obj))
    if isinstance(c, SubsetC):
        return SubsetC(ren(c.lhs), ren(c.rhs))
    if isinstance(c, DisjointC):
        return DisjointC(ren(c.lhs), ren(c.rhs))
    if isinstance(c, EqC):
        return EqC(ren(c.lhs), ren(c.rhs))
    if isinstance(c, SizeCmp):
        terms = []
        for coef, term in c.terms:
            if isinstance(term, Card):
                term = Card(ren(term.obj))
            elif isinstance(term, CountTerm):
                term = CountTerm(ren(term.obj), arg(term.arg))
            elif isinstance(term, DedupTerm):
                term = DedupTerm(ren(term.obj), arg(term.arg))
            elif isinstance(term, PatCountTerm):
                term = PatCountTerm(ren(term.obj), pat(term.pattern))
            terms.append((coef, term))
        return SizeCmp(tuple(terms), c.cmp, c.bound)
    if isinstance(c, IndexIs):
        return IndexIs(ren(c.obj), c.index, c.entity)
    if isinstance(c, IndexInC):
        return IndexInC(ren(c.obj), c.index, ren(c.target))
    if isinstance(c, PatternC):
        return PatternC(ren(c.obj), pat(c.pattern))
    if isinstance(c, ForParts):
        return ForParts(ren(c.obj), c.var,
                        substitute_obj(c.template, old, new))
    return c

"""Abstract syntax for Cofola programs.

The parser produces these nodes verbatim from the source text; two
rewrite passes (``expand_ranges`` and ``desugar`` in :mod:`cofola.frontend`)
normalise them before denotation.  All nodes are frozen dataclasses so
that structural equality and hashing come for free, which the round-trip
tests rely on.

Conventions:

* ``Ref`` is a reference to a declared object by name.  Operand positions
  that the grammar restricts to object ids still carry an ``Expr`` here,
  because real programs inline literals (``set(a, b) + set(c)``); desugar
  lifts those into fresh declarations so later stages only see ``Ref``.
* Range literals are normalised at parse time to a half-open integer
  interval, whatever surface form they used.
* Tuple indices keep their 1-based surface value; composition indices
  keep their 0-based surface value.  Denotation does the shifting.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union as _U


# --------------------------------------------------------------------------
# literal items

@dataclass(frozen=True)
class Elem:
    """A single entity inside a set/bag literal, with a multiplicity."""
    name: str
    count: int = 1


@dataclass(frozen=True)
class RangeElem:
    """A range literal such as ``player0...10``: entities ``prefix + i``
    for ``start <= i < stop``."""
    prefix: str
    start: int
    stop: int
    count: int = 1


Item = _U[Elem, RangeElem]


# --------------------------------------------------------------------------
# expressions (right-hand sides of declarations)

class Expr:
    pass


@dataclass(frozen=True)
class Ref(Expr):
    name: str


@dataclass(frozen=True)
class SetLit(Expr):
    items: tuple


@dataclass(frozen=True)
class BagLit(Expr):
    items: tuple


@dataclass(frozen=True)
class Choose(Expr):
    """``choose(src)`` or ``choose(src, k)``; subset of a set, sub-bag
    of a bag."""
    src: Expr
    k: Optional[int] = None


@dataclass(frozen=True)
class ChooseReplace(Expr):
    src: Expr
    k: Optional[int] = None


@dataclass(frozen=True)
class Supp(Expr):
    src: Expr


@dataclass(frozen=True)
class UnionOp(Expr):
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class IntersectOp(Expr):
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class DiffOp(Expr):
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class AddUnionOp(Expr):
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class TupleOf(Expr):
    src: Expr


@dataclass(frozen=True)
class SequenceOf(Expr):
    src: Expr


@dataclass(frozen=True)
class CircleOf(Expr):
    src: Expr
    reflection: bool = False


@dataclass(frozen=True)
class PartitionOf(Expr):
    src: Expr
    k: int = 0


@dataclass(frozen=True)
class ComposeOf(Expr):
    src: Expr
    k: int = 0


@dataclass(frozen=True)
class IndexOf(Expr):
    """``comp[i]``: the i-th part of a composition (0-based)."""
    src: Expr
    index: int = 0


@dataclass(frozen=True)
class FusedChoose(Expr):
    """Sugar like ``choose_tuple(src, k)``: a choose immediately arranged
    into an ordered object.  ``shape`` is one of tuple/sequence/circle."""
    src: Expr
    k: Optional[int]
    shape: str
    replace: bool = False
    reflection: bool = False


# --------------------------------------------------------------------------
# patterns (occur inside sequence/circle constraints and .count())

class Pattern:
    pass


@dataclass(frozen=True)
class PTogether(Pattern):
    arg: str


@dataclass(frozen=True)
class PLess(Pattern):
    lhs: str
    rhs: str


@dataclass(frozen=True)
class PPred(Pattern):
    """``(a, b)``: a is the immediate predecessor of b."""
    first: str
    second: str


@dataclass(frozen=True)
class PNextTo(Pattern):
    first: str
    second: str


# --------------------------------------------------------------------------
# size expressions

class SizeAtom:
    pass


@dataclass(frozen=True)
class SACard(SizeAtom):
    obj: str


@dataclass(frozen=True)
class SACount(SizeAtom):
    """``obj.count(arg)`` where arg is an entity, an object id, or an
    inline set literal."""
    obj: str
    arg: Expr


@dataclass(frozen=True)
class SAPatCount(SizeAtom):
    obj: str
    pattern: Pattern


@dataclass(frozen=True)
class SADedup(SizeAtom):
    obj: str
    arg: Expr


# --------------------------------------------------------------------------
# constraints

class Constraint:
    pass


@dataclass(frozen=True)
class CAnd(Constraint):
    items: tuple


@dataclass(frozen=True)
class COr(Constraint):
    items: tuple


@dataclass(frozen=True)
class CNot(Constraint):
    item: Constraint


@dataclass(frozen=True)
class CMember(Constraint):
    entity: str
    obj: Expr


@dataclass(frozen=True)
class CSubset(Constraint):
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class CDisjoint(Constraint):
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class CObjEq(Constraint):
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class CSize(Constraint):
    """``sum_i coef_i * atom_i  cmp  bound`` with cmp one of
    == != < > <= >=."""
    terms: tuple  # of (Fraction, SizeAtom)
    cmp: str
    bound: Fraction


@dataclass(frozen=True)
class CIndexEq(Constraint):
    obj: str
    index: int
    entity: str


@dataclass(frozen=True)
class CIndexIn(Constraint):
    obj: str
    index: int
    target: Expr


@dataclass(frozen=True)
class CPattern(Constraint):
    pattern: Pattern
    obj: str


@dataclass(frozen=True)
class CForParts(Constraint):
    """``template for var in obj``: the template holds for every part of
    the partition/composition ``obj``.  Inside the template the name
    ``var`` refers to the running part."""
    template: Constraint
    var: str
    obj: str


# --------------------------------------------------------------------------
# program

@dataclass(frozen=True)
class Decl:
    name: str
    expr: Expr
    line: int = field(compare=False, default=0)


Statement = _U[Decl, Constraint]


@dataclass(frozen=True)
class Program:
    statements: tuple

    @property
    def decls(self) -> tuple:
        return tuple(s for s in self.statements if isinstance(s, Decl))

    @property
    def constraints(self) -> tuple:
        return tuple(s for s in self.statements if not isinstance(s, Decl))


SIZE_CMPS = ("==", "!=", "<", ">", "<=", ">=")

"""Sparse multivariate polynomials and coefficient extraction.

Weights and counts live in the ring of polynomials over the integers
with named variables.  A monomial is a sorted tuple of (variable,
exponent) pairs with positive exponents; a polynomial maps monomials to
nonzero coefficients.  The final answer of a compiled problem is read
off by summing coefficients of the monomials admitted by a small
constraint system over exponents, so that system lives here too.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Tuple, Union

Mono = Tuple[Tuple[str, int], ...]
ONE_MONO: Mono = ()


def _normalize(pairs: Iterable[Tuple[str, int]]) -> Mono:
    merged: Dict[str, int] = {}
    for var, exp in pairs:
        if exp:
            merged[var] = merged.get(var, 0) + exp
    return tuple(sorted((v, e) for v, e in merged.items() if e))


def mono_mul(a: Mono, b: Mono) -> Mono:
    if not a:
        return b
    if not b:
        return a
    return _normalize(a + b)


def mono_exp(mono: Mono, var: str) -> int:
    for v, e in mono:
        if v == var:
            return e
    return 0


class Poly:
    """Immutable sparse polynomial with integer (or Fraction) coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Mono, Union[int, Fraction]] = ()):
        self.terms: Dict[Mono, Union[int, Fraction]] = {
            m: c for m, c in dict(terms).items() if c}

    # -- constructors ----------------------------------------------------

    @staticmethod
    def const(c: Union[int, Fraction]) -> "Poly":
        return Poly({ONE_MONO: c})

    @staticmethod
    def var(name: str, exp: int = 1,
            coeff: Union[int, Fraction] = 1) -> "Poly":
        if exp == 0:
            return Poly.const(coeff)
        return Poly({((name, exp),): coeff})

    @staticmethod
    def power_range(name: str, lo: int, hi: int) -> "Poly":
        """x^lo + x^(lo+1) + ... + x^hi (empty sum when hi < lo)."""
        return Poly({_normalize([(name, e)]): 1 for e in range(lo, hi + 1)})

    # -- ring operations -------------------------------------------------

    def __add__(self, other: "Poly") -> "Poly":
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return Poly(out)

    def __neg__(self) -> "Poly":
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        out: Dict[Mono, Union[int, Fraction]] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = mono_mul(m1, m2)
                s = out.get(m, 0) + c1 * c2
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        return Poly(out)

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative power")
        out = Poly.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def scale(self, c: Union[int, Fraction]) -> "Poly":
        if not c:
            return Poly()
        return Poly({m: c * v for m, v in self.terms.items()})

    # -- structure -------------------------------------------------------

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __repr__(self) -> str:
        if not self.terms:
            return "Poly(0)"
        bits = []
        for m, c in sorted(self.terms.items()):
            mono = "*".join(f"{v}^{e}" if e != 1 else v for v, e in m)
            bits.append(f"{c}" if not m else f"{c}*{mono}")
        return "Poly(" + " + ".join(bits) + ")"

    def variables(self) -> frozenset:
        return frozenset(v for m in self.terms for v, _ in m)

    def constant(self) -> Union[int, Fraction]:
        """The coefficient of the empty monomial."""
        return self.terms.get(ONE_MONO, 0)

    def total(self) -> Union[int, Fraction]:
        """Value at 1 for every variable."""
        return sum(self.terms.values())

    def project(self, drop: Iterable[str]) -> "Poly":
        """Set the given variables to 1, merging monomials."""
        dropset = frozenset(drop)
        if not dropset:
            return self
        out: Dict[Mono, Union[int, Fraction]] = {}
        for m, c in self.terms.items():
            kept = tuple((v, e) for v, e in m if v not in dropset)
            s = out.get(kept, 0) + c
            if s:
                out[kept] = s
            else:
                out.pop(kept, None)
        return Poly(out)


# ---------------------------------------------------------------------------
# exponent conditions

@dataclass(frozen=True)
class LinearCmp:
    """sum(coef * exp(var)) cmp bound, with cmp one of == != < > <= >=."""
    terms: Tuple[Tuple[Union[int, Fraction], str], ...]
    cmp: str
    bound: Union[int, Fraction]


@dataclass(frozen=True)
class EqMin:
    """exp(target) == min(exp(lhs), exp(rhs))  (bag intersection)."""
    target: str
    lhs: str
    rhs: str


@dataclass(frozen=True)
class EqMax:
    """exp(target) == max(exp(lhs), exp(rhs))  (bag union)."""
    target: str
    lhs: str
    rhs: str


@dataclass(frozen=True)
class EqFloorDiff:
    """exp(target) == max(exp(lhs) - exp(rhs), 0)  (bag difference)."""
    target: str
    lhs: str
    rhs: str


@dataclass(frozen=True)
class EqSum:
    """exp(target) == sum of exp over parts  (additive union)."""
    target: str
    parts: Tuple[str, ...]


@dataclass(frozen=True)
class LexLeq:
    """(exp(l1), exp(l2), ...) <=_lex (exp(r1), ...)  (symmetry breaking)."""
    lhs: Tuple[str, ...]
    rhs: Tuple[str, ...]


Condition = Union[LinearCmp, EqMin, EqMax, EqFloorDiff, EqSum, LexLeq]

_CMP_FUNCS = {
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    ">": lambda a, b: a > b,
    "<=": lambda a, b: a <= b,
    ">=": lambda a, b: a >= b,
}


def condition_holds(cond: Condition, exp) -> bool:
    """``exp`` maps a variable name to its exponent (0 when absent)."""
    if isinstance(cond, LinearCmp):
        total = sum(c * exp(v) for c, v in cond.terms)
        return _CMP_FUNCS[cond.cmp](total, cond.bound)
    if isinstance(cond, EqMin):
        return exp(cond.target) == min(exp(cond.lhs), exp(cond.rhs))
    if isinstance(cond, EqMax):
        return exp(cond.target) == max(exp(cond.lhs), exp(cond.rhs))
    if isinstance(cond, EqFloorDiff):
        return exp(cond.target) == max(exp(cond.lhs) - exp(cond.rhs), 0)
    if isinstance(cond, EqSum):
        return exp(cond.target) == sum(exp(p) for p in cond.parts)
    if isinstance(cond, LexLeq):
        left = tuple(exp(v) for v in cond.lhs)
        right = tuple(exp(v) for v in cond.rhs)
        return left <= right
    raise AssertionError(f"unknown condition {type(cond).__name__}")


@dataclass(frozen=True)
class CoeffSystem:
    """A conjunction of exponent conditions selecting monomials."""
    conditions: Tuple[Condition, ...] = ()

    def admits(self, mono: Mono) -> bool:
        exps = dict(mono)

        def exp(v: str) -> int:
            return exps.get(v, 0)

        return all(condition_holds(c, exp) for c in self.conditions)

    def restrict(self, poly: Poly) -> Poly:
        return Poly({m: c for m, c in poly.terms.items() if self.admits(m)})

    def extract(self, poly: Poly) -> Union[int, Fraction]:
        """Sum of coefficients over admitted monomials."""
        return sum(c for m, c in poly.terms.items() if self.admits(m))

    def joined(self, *conds: Condition) -> "CoeffSystem":
        return CoeffSystem(self.conditions + tuple(conds))

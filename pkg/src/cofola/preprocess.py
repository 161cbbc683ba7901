"""Static analysis and simplification of counting problems.

Four passes, composed by :func:`preprocess`:

* ``entity_analysis`` over-approximates, per object, the entities that
  can occur, the per-entity multiplicity, and the size range;
* ``max_size_inference`` tightens size bounds with exact rational
  Fourier-Motzkin elimination over the linear size constraints;
* ``optimize`` rewrites the problem to a fixed point (constant folding,
  merging duplicate deterministic objects, substituting known sizes,
  dropping unconsumed deterministic objects);
* ``sanity_check`` turns decidably-false problems into Unsat and
  rejects shapes the compiler cannot handle.

Unsat is returned as a value; unsupported features raise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

from .errors import UnsupportedError
from .problem import (
    Action, AddUnionOf, AndC, Card, CircleOf, ComposeOf, ConstraintIR,
    CountingProblem, CountTerm, DiffOf, EntArg, FalseC, ForParts,
    IndexInC, IndexIs, Init, IntersectOf, Kind, Member, MsetChoose,
    NotC, ObjectDef, OrC, PartIndex, PartitionOf, PatCountTerm,
    PatternC, SeqOf, SetChoose, SetChooseR, SizeCmp, SuppOf,
    TrueC, TupleOf, UnionOf, action_deps, compare, constraint_objects,
    substitute_obj,
)
from .semantics import apply_action
from .universe import Bag

INF = math.inf


class Unsat:
    """Marker value: the problem has no satisfying structure."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "Unsat"


UNSAT = Unsat()

# actions whose value is a function of their inputs (exactly one
# candidate); only these may be folded, merged, or dropped
_DETERMINISTIC = (Init, SuppOf, UnionOf, IntersectOf, DiffOf,
                  AddUnionOf, PartIndex)


@dataclass
class AnalysisRecord:
    """Per-object over-approximations.

    ``size`` is None when unknown; ``max_size`` may be ``math.inf``.
    ``mult[v][e]`` bounds how many copies of e the object can hold.
    """
    pent: Dict[str, frozenset]
    size: Dict[str, Optional[int]]
    max_size: Dict[str, Union[int, float]]
    mult: Dict[str, Dict[str, int]]

    def copy(self) -> "AnalysisRecord":
        return AnalysisRecord(dict(self.pent), dict(self.size),
                              dict(self.max_size),
                              {k: dict(v) for k, v in self.mult.items()})


# ---------------------------------------------------------------------------
# entity analysis

def entity_analysis(problem: CountingProblem) -> AnalysisRecord:
    """One topological pass (declaration order) of per-action rules."""
    rec = AnalysisRecord({}, {}, {}, {})
    for name in problem.order():
        objdef = problem.objects[name]
        pent, size, max_size, mult = _analyze(objdef, problem, rec)
        cap = sum(mult.values())
        rec.pent[name] = pent
        rec.size[name] = size
        rec.max_size[name] = min(max_size, cap)
        rec.mult[name] = mult
    return rec


def _analyze(objdef: ObjectDef, problem: CountingProblem,
             rec: AnalysisRecord):
    a = objdef.action
    if isinstance(a, Init):
        v = a.value
        if isinstance(v, Bag):
            mult = v.to_counts()
        else:
            mult = {e: 1 for e in v}
        total = sum(mult.values())
        return frozenset(mult), total, total, mult
    if isinstance(a, SetChoose):
        pent = rec.pent[a.src]
        mult = {e: 1 for e in pent}
        if a.k is None:
            return pent, None, rec.max_size[a.src], mult
        return pent, a.k, min(a.k, rec.max_size[a.src]), mult
    if isinstance(a, MsetChoose):
        pent = rec.pent[a.src]
        mult = dict(rec.mult[a.src])
        if a.k is None:
            return pent, None, rec.max_size[a.src], mult
        mult = {e: min(m, a.k) for e, m in mult.items()}
        return pent, a.k, min(a.k, rec.max_size[a.src]), mult
    if isinstance(a, SetChooseR):
        pent = rec.pent[a.src]
        mult = {e: a.k for e in pent}
        max_size = a.k if pent else 0
        return pent, a.k, max_size, mult
    if isinstance(a, SuppOf):
        pent = rec.pent[a.src]
        mult = {e: 1 for e in pent}
        size = None
        src_mult = rec.mult[a.src]
        if rec.size[a.src] is not None and \
                all(m <= 1 for m in src_mult.values()):
            size = rec.size[a.src]
        return pent, size, min(rec.max_size[a.src], len(pent)), mult
    if isinstance(a, (UnionOf, IntersectOf, DiffOf, AddUnionOf)):
        return _analyze_op(a, rec)
    if isinstance(a, (TupleOf, SeqOf, CircleOf)):
        src = a.src
        return (rec.pent[src], rec.size[src], rec.max_size[src],
                dict(rec.mult[src]))
    if isinstance(a, (PartitionOf, ComposeOf)):
        # the grouping as a whole ranges over its source's entities;
        # its "size" in constraints is never consulted (parts are)
        src = a.src
        return rec.pent[src], None, rec.max_size[src], dict(rec.mult[src])
    if isinstance(a, PartIndex):
        src = a.src
        return rec.pent[src], None, rec.max_size[src], dict(rec.mult[src])
    raise AssertionError(f"no analysis rule for {type(a).__name__}")


def _analyze_op(a: Action, rec: AnalysisRecord):
    lp, rp = rec.pent[a.lhs], rec.pent[a.rhs]
    lm, rm = rec.mult[a.lhs], rec.mult[a.rhs]
    ls, rs = rec.size[a.lhs], rec.size[a.rhs]
    lmax, rmax = rec.max_size[a.lhs], rec.max_size[a.rhs]
    disjoint = not (lp & rp)
    if isinstance(a, AddUnionOf):
        pent = lp | rp
        mult = {e: lm.get(e, 0) + rm.get(e, 0) for e in pent}
        size = ls + rs if ls is not None and rs is not None else None
        return pent, size, lmax + rmax, mult
    if isinstance(a, UnionOf):
        pent = lp | rp
        mult = {e: max(lm.get(e, 0), rm.get(e, 0)) for e in pent}
        size = None
        if disjoint and ls is not None and rs is not None:
            size = ls + rs
        return pent, size, lmax + rmax, mult
    if isinstance(a, IntersectOf):
        pent = lp & rp
        mult = {e: min(lm[e], rm[e]) for e in pent}
        size = 0 if disjoint else None
        return pent, size, min(lmax, rmax), mult
    # difference keeps the left entities: the right operand may lack them
    pent = lp
    mult = dict(lm)
    size = ls if disjoint else None
    return pent, size, lmax, mult


# ---------------------------------------------------------------------------
# size-bound tightening (exact rational Fourier-Motzkin)

# a row means  sum(coeffs[v] * x_v) <= bound,  strict when flagged
Row = Tuple[Dict[str, Fraction], Fraction, bool]


def _size_rows(problem: CountingProblem) -> List[Row]:
    rows: List[Row] = []

    def visit(c: ConstraintIR):
        if isinstance(c, AndC):
            for item in c.items:
                visit(item)
            return
        if isinstance(c, NotC) and isinstance(c.item, SizeCmp):
            visit(c.item.negated())
            return
        if not isinstance(c, SizeCmp):
            return
        if c.cmp == "!=":
            return  # disjunctive; the expansion step handles it
        if not all(isinstance(t, Card) for _, t in c.terms):
            return
        coeffs = {}
        for coef, term in c.terms:
            coeffs[term.obj] = coeffs.get(term.obj, Fraction(0)) + \
                Fraction(coef)
        bound = Fraction(c.bound)
        if c.cmp in ("<=", "<"):
            rows.append((coeffs, bound, c.cmp == "<"))
        elif c.cmp in (">=", ">"):
            rows.append(({v: -x for v, x in coeffs.items()}, -bound,
                         c.cmp == ">"))
        else:  # ==
            rows.append((coeffs, bound, False))
            rows.append(({v: -x for v, x in coeffs.items()}, -bound, False))

    for con in problem.constraints:
        visit(con)
    return rows


def _box_rows(variables, rec: AnalysisRecord) -> List[Row]:
    rows: List[Row] = []
    for v in variables:
        rows.append(({v: Fraction(-1)}, Fraction(0), False))  # x >= 0
        ms = rec.max_size.get(v, INF)
        if ms != INF:
            rows.append(({v: Fraction(1)}, Fraction(ms), False))
        sz = rec.size.get(v)
        if sz is not None:
            rows.append(({v: Fraction(1)}, Fraction(sz), False))
            rows.append(({v: Fraction(-1)}, Fraction(-sz), False))
    return rows


def _eliminate(rows: List[Row], var: str) -> Optional[List[Row]]:
    """Fourier-Motzkin step; None when a constant row is violated."""
    pos, neg, rest = [], [], []
    for coeffs, bound, strict in rows:
        c = coeffs.get(var, Fraction(0))
        if c > 0:
            pos.append((coeffs, bound, strict, c))
        elif c < 0:
            neg.append((coeffs, bound, strict, c))
        else:
            rest.append((coeffs, bound, strict))
    for pc, pb, ps, pcv in pos:
        for nc, nb, ns, ncv in neg:
            mult_p, mult_n = -ncv, pcv
            coeffs = {}
            for v, x in pc.items():
                if v != var:
                    coeffs[v] = coeffs.get(v, Fraction(0)) + mult_p * x
            for v, x in nc.items():
                if v != var:
                    coeffs[v] = coeffs.get(v, Fraction(0)) + mult_n * x
            coeffs = {v: x for v, x in coeffs.items() if x}
            bound = mult_p * pb + mult_n * nb
            strict = ps or ns
            if not coeffs:
                if bound < 0 or (strict and bound == 0):
                    return None
                continue
            rest.append((coeffs, bound, strict))
    return rest


def _var_bounds(rows: List[Row], target: str
                ) -> Optional[Tuple[Union[int, float], Union[int, float]]]:
    """Integer (lo, hi) bounds for target; None when infeasible."""
    variables = {v for coeffs, _, _ in rows for v in coeffs}
    variables.discard(target)
    for v in sorted(variables):
        out = _eliminate(rows, v)
        if out is None:
            return None
        rows = out
    lo: Union[int, float] = -INF
    hi: Union[int, float] = INF
    for coeffs, bound, strict in rows:
        c = coeffs.get(target, Fraction(0))
        if not c:
            if bound < 0 or (strict and bound == 0):
                return None
            continue
        limit = bound / c
        if c > 0:  # target <= limit
            cap = math.floor(limit)
            if strict and limit == cap:
                cap -= 1
            hi = min(hi, cap)
        else:  # target >= limit
            base = math.ceil(limit)
            if strict and limit == base:
                base += 1
            lo = max(lo, base)
    if lo > hi:
        return None
    return lo, hi


def max_size_inference(problem: CountingProblem, rec: AnalysisRecord
                       ) -> Union[AnalysisRecord, Unsat]:
    rows = _size_rows(problem)
    if not rows:
        return rec
    targets = sorted({v for coeffs, _, _ in rows for v in coeffs})
    boxed = rows + _box_rows(targets, rec)
    out = rec.copy()
    for v in targets:
        bounds = _var_bounds(boxed, v)
        if bounds is None:
            return UNSAT
        lo, hi = bounds
        if hi < out.max_size.get(v, INF):
            out.max_size[v] = hi
        if lo == hi and out.size.get(v) is None:
            out.size[v] = int(lo)
    return out


# ---------------------------------------------------------------------------
# optimization to fixed point

def _map_constraint(c: ConstraintIR, leaf) -> ConstraintIR:
    if isinstance(c, AndC):
        return AndC(tuple(_map_constraint(i, leaf) for i in c.items))
    if isinstance(c, OrC):
        return OrC(tuple(_map_constraint(i, leaf) for i in c.items))
    if isinstance(c, NotC):
        return NotC(_map_constraint(c.item, leaf))
    if isinstance(c, ForParts):
        return ForParts(c.obj, c.var, _map_constraint(c.template, leaf))
    return leaf(c)


def simplify_constraint(c: ConstraintIR) -> ConstraintIR:
    """Fold constant truth values through the connectives."""
    if isinstance(c, AndC):
        items = []
        for item in map(simplify_constraint, c.items):
            if isinstance(item, FalseC):
                return FalseC()
            if not isinstance(item, TrueC):
                items.append(item)
        if not items:
            return TrueC()
        return items[0] if len(items) == 1 else AndC(tuple(items))
    if isinstance(c, OrC):
        items = []
        for item in map(simplify_constraint, c.items):
            if isinstance(item, TrueC):
                return TrueC()
            if not isinstance(item, FalseC):
                items.append(item)
        if not items:
            return FalseC()
        return items[0] if len(items) == 1 else OrC(tuple(items))
    if isinstance(c, NotC):
        inner = simplify_constraint(c.item)
        if isinstance(inner, TrueC):
            return FalseC()
        if isinstance(inner, FalseC):
            return TrueC()
        return NotC(inner)
    if isinstance(c, ForParts):
        template = simplify_constraint(c.template)
        if isinstance(template, (TrueC, FalseC)):
            return template  # grouped objects have at least one part
        return ForParts(c.obj, c.var, template)
    return c


def _fold_constants(problem: CountingProblem
                    ) -> Tuple[CountingProblem, bool]:
    values = {}
    objects = dict(problem.objects)
    changed = False
    for name, objdef in problem.objects.items():
        a = objdef.action
        if isinstance(a, Init):
            values[name] = a.value
            continue
        if isinstance(a, (SetChoose, MsetChoose, SetChooseR)) and a.k == 0:
            empty = frozenset() if isinstance(a, SetChoose) else Bag()
            objects[name] = replace(objdef, action=Init(empty))
            values[name] = empty
            changed = True
            continue
        if not isinstance(a, _DETERMINISTIC):
            continue
        deps = action_deps(a)
        if all(d in values for d in deps):
            (value,) = apply_action(objdef, values)
            objects[name] = replace(objdef, action=Init(value))
            values[name] = value
            changed = True
    if not changed:
        return problem, False
    return replace_objects(problem, objects), True


def replace_objects(problem: CountingProblem,
                    objects: Dict[str, ObjectDef],
                    constraints: Optional[tuple] = None) -> CountingProblem:
    return CountingProblem(
        problem.domain, objects,
        problem.constraints if constraints is None else constraints,
        problem.multiplicity)


def _rename_in_action(action: Action, renames: Dict[str, str]) -> Action:
    updates = {}
    for field_name in ("src", "lhs", "rhs"):
        old = getattr(action, field_name, None)
        if isinstance(old, str) and old in renames:
            updates[field_name] = renames[old]
    return replace(action, **updates) if updates else action


def _merge_identicals(problem: CountingProblem
                      ) -> Tuple[CountingProblem, bool]:
    """Replace duplicate deterministic objects with the first of each.

    Only deterministic actions may merge: two identical `choose` objects
    are independent choices and multiply, they are not one object.
    """
    seen: Dict[tuple, str] = {}
    renames: Dict[str, str] = {}
    objects: Dict[str, ObjectDef] = {}
    for name, objdef in problem.objects.items():
        action = _rename_in_action(objdef.action, renames)
        objdef = replace(objdef, action=action)
        if isinstance(action, _DETERMINISTIC):
            key = (objdef.kind, action)
            if key in seen:
                renames[name] = seen[key]
                continue
            seen[key] = name
        objects[name] = objdef
    if not renames:
        return problem, False
    constraints = tuple(_apply_renames(c, renames)
                        for c in problem.constraints)
    return replace_objects(problem, objects, constraints), True


def _apply_renames(c: ConstraintIR, renames: Dict[str, str]) -> ConstraintIR:
    for old, new in renames.items():
        c = substitute_obj(c, old, new)
    return c


def _fold_sizes(problem: CountingProblem, rec: AnalysisRecord
                ) -> Tuple[CountingProblem, bool]:
    def leaf(c: ConstraintIR) -> ConstraintIR:
        if isinstance(c, SizeCmp):
            terms = []
            shift = Fraction(0)
            for coef, term in c.terms:
                if isinstance(term, Card) and \
                        rec.size.get(term.obj) is not None:
                    shift += coef * rec.size[term.obj]
                    continue
                if isinstance(term, CountTerm) and \
                        isinstance(term.arg, EntArg) and \
                        term.obj in rec.pent and \
                        term.arg.name not in rec.pent[term.obj]:
                    continue  # the entity can never occur: count is 0
                terms.append((coef, term))
            if len(terms) == len(c.terms) and shift == 0:
                return c
            bound = c.bound - shift
            if not terms:
                return TrueC() if compare(Fraction(0), c.cmp, bound) \
                    else FalseC()
            return SizeCmp(tuple(terms), c.cmp, bound)
        if isinstance(c, Member) and c.obj in rec.pent and \
                c.entity not in rec.pent[c.obj]:
            return FalseC()
        if isinstance(c, (IndexIs, IndexInC)):
            ms = rec.max_size.get(c.obj, INF)
            if ms != INF and c.index >= ms:
                return FalseC()  # the position cannot exist
        return c

    out = []
    changed = False
    for con in problem.constraints:
        new = simplify_constraint(_map_constraint(con, leaf))
        if new != con:
            changed = True
        if isinstance(new, TrueC):
            changed = True
            continue
        out.append(new)
    if not changed:
        return problem, False
    return replace_objects(problem, dict(problem.objects), tuple(out)), True


def _drop_unused(problem: CountingProblem,
                 rec: AnalysisRecord) -> Tuple[CountingProblem, bool]:
    referenced = set()
    for c in problem.constraints:
        referenced.update(constraint_objects(c))
    consumers: Dict[str, set] = {name: set() for name in problem.objects}
    for name, objdef in problem.objects.items():
        for dep in action_deps(objdef.action):
            consumers[dep].add(name)
    # a record row tighter than what the action alone implies means a
    # folded constraint still binds through this object; it must reach
    # the encoder even with no consumer left
    fresh = entity_analysis(problem)
    dropped = set()
    progress = True
    while progress:
        progress = False
        for name, objdef in problem.objects.items():
            if name in dropped or name in referenced:
                continue
            if not isinstance(objdef.action, _DETERMINISTIC):
                continue  # a choice contributes a factor; it must stay
            if consumers[name] - dropped:
                continue
            if (rec.pent.get(name), rec.size.get(name),
                    rec.max_size.get(name), rec.mult.get(name)) != (
                    fresh.pent[name], fresh.size[name],
                    fresh.max_size[name], fresh.mult[name]):
                continue
            dropped.add(name)
            progress = True
    if not dropped:
        return problem, False
    objects = {n: d for n, d in problem.objects.items() if n not in dropped}
    return replace_objects(problem, objects), True


def _shrink_domain(problem: CountingProblem,
                   rec: AnalysisRecord) -> CountingProblem:
    alive = set()
    for name in problem.objects:
        alive.update(rec.pent[name])
    for c in problem.constraints:
        alive.update(_constraint_entities(c))
    domain = tuple(e for e in problem.domain if e in alive)
    if domain == problem.domain:
        return problem
    multiplicity = {e: m for e, m in problem.multiplicity.items()
                    if e in alive}
    return CountingProblem(domain, dict(problem.objects),
                           problem.constraints, multiplicity)


def _constraint_entities(c: ConstraintIR) -> set:
    out = set()

    def walk(node):
        if isinstance(node, (AndC, OrC)):
            for item in node.items:
                walk(item)
        elif isinstance(node, NotC):
            walk(node.item)
        elif isinstance(node, ForParts):
            walk(node.template)
        elif isinstance(node, Member):
            out.add(node.entity)
        elif isinstance(node, IndexIs):
            out.add(node.entity)
        elif isinstance(node, SizeCmp):
            for _, term in node.terms:
                if isinstance(term, CountTerm) and \
                        isinstance(term.arg, EntArg):
                    out.add(term.arg.name)
                if isinstance(term, PatCountTerm):
                    out.update(_pattern_entities(term.pattern))
        elif isinstance(node, PatternC):
            out.update(_pattern_entities(node.pattern))

    walk(c)
    return out


def _pattern_entities(p) -> set:
    out = set()
    for attr in ("arg", "lhs", "rhs"):
        arg = getattr(p, attr, None)
        if isinstance(arg, EntArg):
            out.add(arg.name)
    for attr in ("first", "second"):
        name = getattr(p, attr, None)
        if isinstance(name, str):
            out.add(name)
    return out


def _refresh(problem: CountingProblem,
             prev: AnalysisRecord) -> AnalysisRecord:
    """Recompute action-derived records, keeping LP tightenings.

    Rewrites preserve each surviving object's meaning, so bounds the LP
    proved for a name stay valid after the problem around it changed.
    """
    rec = entity_analysis(problem)
    for name in rec.max_size:
        if name in prev.max_size:
            rec.max_size[name] = min(rec.max_size[name],
                                     prev.max_size[name])
        if rec.size.get(name) is None and prev.size.get(name) is not None:
            rec.size[name] = prev.size[name]
    return rec


def optimize(problem: CountingProblem, rec: AnalysisRecord
             ) -> Tuple[CountingProblem, AnalysisRecord]:
    while True:
        changed = False
        problem, c = _fold_constants(problem)
        changed |= c
        problem, c = _merge_identicals(problem)
        changed |= c
        rec = _refresh(problem, rec)
        problem, c = _fold_sizes(problem, rec)
        changed |= c
        problem, c = _drop_unused(problem, rec)
        changed |= c
        if not changed:
            break
    rec = _refresh(problem, rec)
    problem = _shrink_domain(problem, rec)
    return problem, rec


# ---------------------------------------------------------------------------
# sanity checks

def sanity_check(problem: CountingProblem,
                 rec: AnalysisRecord) -> Union[None, Unsat]:
    """None means the problem passed; Unsat is returned as a value.

    Unsupported shapes raise :class:`UnsupportedError`.
    """
    for name in problem.objects:
        size, cap = rec.size.get(name), rec.max_size.get(name, INF)
        if size is not None and (size < 0 or size > cap):
            return UNSAT
    for c in problem.constraints:
        if isinstance(c, FalseC):
            return UNSAT
    order_axiom = [n for n, d in problem.objects.items()
                   if d.kind in (Kind.SEQUENCE, Kind.CIRCLE)]
    if len(order_axiom) > 1:
        raise UnsupportedError(
            "only a single sequence or circle is supported "
            f"(found {', '.join(order_axiom)})")
    for name, objdef in problem.objects.items():
        if objdef.kind in (Kind.TUPLE, Kind.SEQUENCE, Kind.CIRCLE) and \
                rec.max_size.get(name, INF) == INF:
            raise UnsupportedError(
                f"cannot bound the length of ordered object {name!r}")
    return None


def preprocess(problem: CountingProblem
               ) -> Union[Tuple[CountingProblem, AnalysisRecord], Unsat]:
    rec = entity_analysis(problem)
    for _ in range(50):
        tightened = max_size_inference(problem, rec)
        if isinstance(tightened, Unsat):
            return UNSAT
        rec = tightened
        new_problem, rec = optimize(problem, rec)
        if new_problem == problem:
            problem = new_problem
            break
        problem = new_problem
    else:
        raise AssertionError("preprocess failed to reach a fixed point")
    verdict = sanity_check(problem, rec)
    if isinstance(verdict, Unsat):
        return UNSAT
    return problem, rec

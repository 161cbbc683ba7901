"""Branch expansion and independent-component splitting.

A preprocessed problem may still hold disjunctions, per-part templates,
and ordered objects of unknown length.  ``expand`` removes all three by
enumeration, yielding branches whose constraints are atomic literals;
``split`` then cuts each branch along independence (no shared entities,
dependencies, or constraints), so downstream counts multiply.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .preprocess import AnalysisRecord, _constraint_entities, entity_analysis
from .problem import (
    AndC, Card, ConstraintIR, CountingProblem, FalseC, ForParts, Kind,
    NotC, ObjectDef, OrC, PartIndex, SizeCmp, TrueC, action_deps,
    constraint_objects, substitute_obj,
)

INF = math.inf

ORDERED = (Kind.TUPLE, Kind.SEQUENCE, Kind.CIRCLE)


@dataclass(frozen=True)
class Branch:
    """One disjunct of the expanded problem, plus how it was produced."""

    problem: CountingProblem
    provenance: Tuple[str, ...] = ()


def _is_literal(c: ConstraintIR) -> bool:
    """Atomic constraint, or the negation of one."""
    if isinstance(c, NotC):
        c = c.item
    return not isinstance(c, (AndC, OrC, NotC, ForParts))


def _flatten(constraints: Sequence[ConstraintIR]) -> List[ConstraintIR]:
    """Split top-level conjunctions apart and drop trivial truths."""
    out: List[ConstraintIR] = []
    stack = list(constraints)
    while stack:
        c = stack.pop(0)
        if isinstance(c, AndC):
            stack = list(c.items) + stack
        elif isinstance(c, TrueC):
            continue
        else:
            out.append(c)
    return out


# ---------------------------------------------------------------------------
# size-range expansion

def _unknown_size_sources(problem: CountingProblem,
                          record: AnalysisRecord) -> List[str]:
    """Content sources of ordered objects whose exact size is unknown.

    Distinct ordered objects may share one source; the source is listed
    once.  Sizes are per-source, so fixing the source fixes them all.
    """
    seen: List[str] = []
    for obj in problem.objects.values():
        if obj.kind not in ORDERED:
            continue
        src = obj.action.src
        if record.size.get(src) is None and src not in seen:
            seen.append(src)
    return seen


def _with_constraints(problem: CountingProblem,
                      constraints: Sequence[ConstraintIR],
                      objects: Optional[Dict[str, ObjectDef]] = None,
                      ) -> CountingProblem:
    return CountingProblem(
        domain=problem.domain,
        objects=dict(objects if objects is not None else problem.objects),
        constraints=tuple(constraints),
        multiplicity=dict(problem.multiplicity),
    )


def _expand_sizes(branch: Branch, record: AnalysisRecord) -> List[Branch]:
    sources = _unknown_size_sources(branch.problem, record)
    branches = [branch]
    for src in sources:
        hi = record.max_size[src]
        assert hi is not INF, "sanity_check admits only bounded ordered objects"
        grown: List[Branch] = []
        for b in branches:
            for k in range(int(hi) + 1):
                pin = SizeCmp(((1, Card(src)),), "==", k)
                grown.append(Branch(
                    problem=_with_constraints(
                        b.problem, list(b.problem.constraints) + [pin]),
                    provenance=b.provenance + (f"|{src}| = {k}",),
                ))
        branches = grown
    return branches


# ---------------------------------------------------------------------------
# group expansion

def _part_count(problem: CountingProblem, obj: str) -> int:
    action = problem.objects[obj].action
    return action.k


def _part_kind(problem: CountingProblem, obj: str) -> Kind:
    src = problem.objects[obj].action.src
    return problem.objects[src].kind


def _expand_groups(branch: Branch) -> Branch:
    """Instantiate each ``for part in g`` template over every part of g.

    All instantiations land in the same branch as a conjunction: the
    template must hold for each part.  Parts are materialised as fresh
    indexed objects right after their grouping so evaluation order stays
    topological.
    """
    problem = branch.problem
    if not any(isinstance(c, ForParts) for c in problem.constraints):
        return branch

    needed: Dict[str, int] = {}
    constraints: List[ConstraintIR] = []
    notes: List[str] = []
    for c in problem.constraints:
        if not isinstance(c, ForParts):
            constraints.append(c)
            continue
        k = _part_count(problem, c.obj)
        needed[c.obj] = max(needed.get(c.obj, 0), k)
        for i in range(k):
            constraints.append(
                substitute_obj(c.template, c.var, f"{c.obj}[{i}]"))
        notes.append(f"{c.obj} instantiated over {k} parts")

    objects: Dict[str, ObjectDef] = {}
    for name, odef in problem.objects.items():
        objects[name] = odef
        for i in range(needed.get(name, 0)):
            part = f"{name}[{i}]"
            objects[part] = ObjectDef(part, _part_kind(problem, name),
                                      PartIndex(src=name, index=i))
    return Branch(
        problem=_with_constraints(problem, _flatten(constraints), objects),
        provenance=branch.provenance + tuple(notes),
    )


# ---------------------------------------------------------------------------
# Shannon expansion

def _atoms_of(c: ConstraintIR, acc: List[ConstraintIR]) -> None:
    if isinstance(c, NotC):
        _atoms_of(c.item, acc)
    elif isinstance(c, (AndC, OrC)):
        for item in c.items:
            _atoms_of(item, acc)
    elif isinstance(c, ForParts):
        raise AssertionError("group expansion must run before Shannon")
    elif isinstance(c, (TrueC, FalseC)):
        pass
    else:
        if c not in acc:
            acc.append(c)


def _eval_prop(c: ConstraintIR,
               assignment: Dict[ConstraintIR, bool]) -> Optional[bool]:
    """Three-valued propositional evaluation under a partial assignment."""
    if isinstance(c, TrueC):
        return True
    if isinstance(c, FalseC):
        return False
    if isinstance(c, NotC):
        inner = _eval_prop(c.item, assignment)
        return None if inner is None else not inner
    if isinstance(c, AndC):
        value: Optional[bool] = True
        for item in c.items:
            got = _eval_prop(item, assignment)
            if got is False:
                return False
            if got is None:
                value = None
        return value
    if isinstance(c, OrC):
        value = False
        for item in c.items:
            got = _eval_prop(item, assignment)
            if got is True:
                return True
            if got is None:
                value = None
        return value
    return assignment.get(c)


def _interval_consistent(literals: Sequence[ConstraintIR],
                         record: AnalysisRecord) -> bool:
    """Check single-variable size literals for an empty intersection.

    Only literals of the shape ``c * |v| cmp b`` participate; anything
    else is ignored, so a True result is not a satisfiability proof,
    while False is a definite contradiction.
    """
    lo: Dict[str, int] = {}
    hi: Dict[str, float] = {}
    for lit in literals:
        negated = isinstance(lit, NotC)
        atom = lit.item if negated else lit
        if not isinstance(atom, SizeCmp):
            continue
        if negated:
            atom = atom.negated()
        if len(atom.terms) != 1:
            continue
        coef, term = atom.terms[0]
        if not isinstance(term, Card) or coef == 0:
            continue
        var = term.obj
        cmp, bound = atom.cmp, Fraction(atom.bound) / Fraction(coef)
        if coef < 0:
            cmp = {"<": ">", ">": "<", "<=": ">=", ">=": "<="}.get(cmp, cmp)
        if cmp == "!=":
            continue
        cur_lo = lo.get(var, 0)
        cap = record.max_size.get(var, INF)
        cur_hi = hi.get(var, cap)
        if cmp == "==":
            if bound.denominator != 1:
                return False
            cur_lo = max(cur_lo, int(bound))
            cur_hi = min(cur_hi, int(bound))
        elif cmp == "<=":
            cur_hi = min(cur_hi, math.floor(bound))
        elif cmp == "<":
            cur_hi = min(cur_hi, math.ceil(bound) - 1)
        elif cmp == ">=":
            cur_lo = max(cur_lo, math.ceil(bound))
        else:
            cur_lo = max(cur_lo, math.floor(bound) + 1)
        lo[var], hi[var] = cur_lo, cur_hi
        if cur_lo > cur_hi:
            return False
    return True


def _describe(atom: ConstraintIR) -> str:
    return repr(atom)


def _expand_shannon(branch: Branch, record: AnalysisRecord) -> List[Branch]:
    fixed: List[ConstraintIR] = []
    compounds: List[ConstraintIR] = []
    for c in _flatten(branch.problem.constraints):
        (fixed if _is_literal(c) else compounds).append(c)

    if not compounds:
        if not _interval_consistent(fixed, record):
            return []
        return [Branch(_with_constraints(branch.problem, fixed),
                       branch.provenance)]

    atoms: List[ConstraintIR] = []
    for c in compounds:
        _atoms_of(c, atoms)

    forced: Dict[ConstraintIR, bool] = {}
    for lit in fixed:
        if isinstance(lit, NotC):
            forced[lit.item] = False
        else:
            forced[lit] = True

    branches: List[Branch] = []

    def walk(i: int, assignment: Dict[ConstraintIR, bool]) -> None:
        if any(_eval_prop(c, assignment) is False for c in compounds):
            return
        if i == len(atoms):
            literals = list(fixed)
            notes: List[str] = []
            for atom in atoms:
                value = assignment[atom]
                literals.append(atom if value else NotC(atom))
                notes.append(f"{_describe(atom)} := {value}")
            if not _interval_consistent(literals, record):
                return
            branches.append(Branch(
                _with_constraints(branch.problem, literals),
                branch.provenance + tuple(notes)))
            return
        atom = atoms[i]
        if atom in forced:
            assignment[atom] = forced[atom]
            walk(i + 1, assignment)
            del assignment[atom]
            return
        for value in (True, False):
            assignment[atom] = value
            walk(i + 1, assignment)
            del assignment[atom]

    walk(0, {})
    return branches


# ---------------------------------------------------------------------------
# public entry points

def expand(problem: CountingProblem,
           record: AnalysisRecord) -> List[Branch]:
    """Expand a preprocessed problem into mutually exclusive branches.

    Order matters: pinning ordered-object sizes first keeps the size
    literals available to Shannon pruning, and instantiating group
    templates before Shannon lets their compounds join the same pool.
    """
    branches = _expand_sizes(Branch(problem), record)
    branches = [_expand_groups(b) for b in branches]
    out: List[Branch] = []
    for b in branches:
        out.extend(_expand_shannon(b, record))
    return out


def _components(problem: CountingProblem) -> List[List[str]]:
    """Union-find over objects: deps, shared entities, shared constraints."""
    names = list(problem.objects)
    parent = {n: n for n in names}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a: str, b: str) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    for name, obj in problem.objects.items():
        for dep in action_deps(obj.action):
            union(name, dep)

    record = entity_analysis(problem)
    owner: Dict[str, str] = {}
    for name in names:
        for e in record.pent.get(name, frozenset()):
            if e in owner:
                union(name, owner[e])
            else:
                owner[e] = name

    for c in problem.constraints:
        touched = [o for o in constraint_objects(c) if o in parent]
        for a, b in zip(touched, touched[1:]):
            union(a, b)

    groups: Dict[str, List[str]] = {}
    for n in names:
        groups.setdefault(find(n), []).append(n)
    return list(groups.values())


def split(branch: Branch) -> List[CountingProblem]:
    """Cut a branch into independent subproblems; counts multiply.

    Constraints referencing no object at all (degenerate truths kept
    for bookkeeping) form their own subproblem so nothing is dropped.
    """
    problem = branch.problem
    if not problem.objects:
        return [problem]

    components = _components(problem)
    if len(components) == 1:
        return [problem]

    membership: Dict[str, int] = {}
    for i, comp in enumerate(components):
        for name in comp:
            membership[name] = i

    per_comp: List[List[ConstraintIR]] = [[] for _ in components]
    floating: List[ConstraintIR] = []
    for c in problem.constraints:
        touched = [o for o in constraint_objects(c) if o in membership]
        if not touched:
            floating.append(c)
            continue
        comp_ids = {membership[o] for o in touched}
        assert len(comp_ids) == 1, "constraint spans components after union"
        per_comp[comp_ids.pop()].append(c)

    record = entity_analysis(problem)
    out: List[CountingProblem] = []
    for i, comp in enumerate(components):
        keep = set(comp)
        entities: set = set()
        for name in comp:
            entities |= record.pent.get(name, frozenset())
        for c in per_comp[i]:
            entities |= _constraint_entities(c)
        domain = tuple(e for e in problem.domain if e in entities)
        objects = {n: o for n, o in problem.objects.items() if n in keep}
        out.append(CountingProblem(
            domain=domain,
            objects=objects,
            constraints=tuple(per_comp[i]),
            multiplicity={e: m for e, m in problem.multiplicity.items()
                          if e in entities},
        ))
    if floating:
        out.append(CountingProblem(
            domain=(), objects={}, constraints=tuple(floating),
            multiplicity={}))
    return out

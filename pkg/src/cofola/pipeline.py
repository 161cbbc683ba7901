"""End-to-end driver: program in, exact count out.

`solve` walks the whole chain: preprocess the problem, expand it into
atomic branches, split each branch into independent components, encode
every component, run the model counter, decode, multiply the component
counts, and sum over branches.  The report keeps a per-branch trail so
a surprising answer can be chased back to the branch that produced it.
"""

import time
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import List, Optional, Tuple

from .backend import core
from .decompose import expand, split
from .encode import encode
from .instance import CircleMeta, EncodedInstance
from .poly import CoeffSystem, Poly
from .preprocess import Unsat, preprocess, sanity_check
from .problem import CountingProblem
from .universe import circular_count


@dataclass
class ComponentReport:
    objects: Tuple[str, ...]
    count: Fraction
    predicates: int = 0
    domain_size: int = 0
    conditions: int = 0


@dataclass
class BranchReport:
    provenance: Tuple[str, ...]
    components: List[ComponentReport] = field(default_factory=list)
    count: Fraction = Fraction(0)
    unsat: bool = False


@dataclass
class SolveReport:
    answer: int
    branches: List[BranchReport] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def branch_counts(self) -> List[Fraction]:
        return [b.count for b in self.branches]


def _multinomial(exps) -> int:
    out = factorial(sum(exps))
    for e in exps:
        out //= factorial(e)
    return out


def decode(f: Poly, a: CoeffSystem, overcount: int,
           sigma: Tuple[Tuple[str, ...], ...],
           circle: Optional[CircleMeta] = None) -> Fraction:
    """Turn the counter's polynomial into the number of outcomes.

    Keeps the monomials admitted by the condition system, divides each
    kept coefficient by the symmetry quotient of its equal-size
    nonempty set parts, rescales circular arrangements from the linear
    words the instance counted, and finally divides the deliberate
    overcount out.
    """
    assert overcount >= 1
    total = Fraction(0)
    for mono, coef in f.terms.items():
        if not a.admits(mono):
            continue
        contribution = Fraction(coef)
        exps = dict(mono)
        if circle is not None:
            counts = [exps.get(v, 0) for v in circle.pos_vars]
            contribution *= Fraction(
                circular_count(counts, circle.reflection),
                _multinomial(counts))
        for group in sigma:
            repeats = {}
            for var in group:
                s = exps.get(var, 0)
                if s:
                    repeats[s] = repeats.get(s, 0) + 1
            for r in repeats.values():
                contribution /= factorial(r)
        total += contribution
    return total / overcount


def solve_component(problem: CountingProblem,
                    atom_bound: int = core.DEFAULT_ATOM_BOUND
                    ) -> Tuple[Fraction, Optional[EncodedInstance]]:
    """Count one independent component, or 0 for an unsatisfiable one."""
    pre = preprocess(problem)
    if isinstance(pre, Unsat):
        return Fraction(0), None
    local, record = pre
    if sanity_check(local, record) is not None:
        return Fraction(0), None
    instance = encode(local, record)
    poly = core.wfomc(instance, atom_bound=atom_bound)
    value = decode(poly, instance.system, instance.overcount,
                   instance.sigma, instance.circle)
    return value, instance


def solve(problem: CountingProblem,
          atom_bound: int = core.DEFAULT_ATOM_BOUND) -> SolveReport:
    """Count the outcomes of a whole problem (the driver loop)."""
    started = time.perf_counter()
    report = SolveReport(answer=0)
    pre = preprocess(problem)
    if isinstance(pre, Unsat):
        report.seconds = time.perf_counter() - started
        return report
    prepped, record = pre
    total = Fraction(0)
    for branch in expand(prepped, record):
        br = BranchReport(provenance=branch.provenance)
        branch_count = Fraction(1)
        for component in split(branch):
            value, instance = solve_component(component, atom_bound)
            cr = ComponentReport(objects=tuple(component.objects),
                                 count=value)
            if instance is not None:
                cr.predicates = len(instance.sentence.predicates)
                cr.domain_size = len(instance.domain)
                cr.conditions = len(instance.system.conditions)
            br.components.append(cr)
            branch_count *= value
            if branch_count == 0:
                br.unsat = True
                break
        br.count = branch_count
        report.branches.append(br)
        total += branch_count
    if total.denominator != 1:
        raise AssertionError(
            f"decoded a non-integral total {total}; branch counts: "
            f"{[str(b.count) for b in report.branches]}")
    report.answer = int(total)
    report.seconds = time.perf_counter() - started
    return report

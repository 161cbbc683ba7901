"""Brute-force reference counter.

Walks every combination of object values depth-first in declaration
order, pruning as soon as any constraint is decidably false under the
partial assignment.  Slow by design; it exists to cross-check the
compiled pipeline on small instances, so it shares nothing with the
encoder except the denoted problem itself.
"""

from __future__ import annotations

from typing import Dict

from .errors import BudgetExceeded
from .problem import CountingProblem
from .semantics import apply_action, check_constraint

DEFAULT_BUDGET = 10_000_000


def oracle_count(problem: CountingProblem,
                 budget: int = DEFAULT_BUDGET) -> int:
    """Number of full assignments satisfying every constraint.

    ``budget`` caps the number of candidate values generated across the
    whole search; exceeding it raises :class:`BudgetExceeded`.
    """
    order = problem.order()
    constraints = problem.constraints
    expansions = 0

    def consistent(env: Dict[str, object]) -> bool:
        return all(check_constraint(c, env) is not False
                   for c in constraints)

    def dfs(i: int, env: Dict[str, object]) -> int:
        nonlocal expansions
        if i == len(order):
            return 1
        name = order[i]
        objdef = problem.objects[name]
        total = 0
        for value in apply_action(objdef, env):
            expansions += 1
            if expansions > budget:
                raise BudgetExceeded(
                    f"oracle stopped after {budget} candidate values")
            env[name] = value
            if consistent(env):
                total += dfs(i + 1, env)
            del env[name]
        return total

    if not consistent({}):
        return 0
    return dfs(0, {})

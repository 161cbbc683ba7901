"""Branch expansion and component splitting.

The one invariant everything here leans on: summing oracle counts over
expanded branches (multiplying over split components) must reproduce the
oracle count of the problem we started from.
"""

from pathlib import Path

import pytest

from cofola.decompose import Branch, expand, split
from cofola.frontend import load
from cofola.oracle import oracle_count
from cofola.preprocess import Unsat, preprocess
from cofola.problem import (
    ForParts, Member, NotC, PartIndex, SizeCmp,
)
from cofola.semantics import denote

FIXTURES = Path(__file__).parent / "fixtures"

ALL_FIXTURES = [
    "water_polo", "water_polo_member", "water_polo_compound",
    "four_letter", "books", "mathcounts", "plants", "red_balls",
    "basketball", "officers", "girls_boys",
]


def prepared(text):
    out = preprocess(denote(load(text)))
    assert not isinstance(out, Unsat)
    return out


def prepared_fixture(name):
    return prepared((FIXTURES / f"{name}.cofola").read_text())


def branch_total(problem, record):
    total = 0
    for branch in expand(problem, record):
        product = 1
        for component in split(branch):
            product *= oracle_count(component)
        total += product
    return total


# ---------------------------------------------------------------------------
# expansion

def test_atomic_problem_is_a_single_branch():
    problem, record = prepared_fixture("water_polo_member")
    branches = expand(problem, record)
    assert len(branches) == 1
    assert branches[0].problem.constraints == problem.constraints


def test_officers_expands_to_three_branches():
    problem, record = prepared_fixture("officers")
    branches = expand(problem, record)
    assert len(branches) == 3
    assert sum(oracle_count(b.problem) for b in branches) == 1122


def test_officers_branches_are_mutually_exclusive():
    problem, record = prepared_fixture("officers")
    branches = expand(problem, record)

    def polarity(branch):
        out = {}
        for c in branch.problem.constraints:
            if isinstance(c, NotC):
                out[c.item] = False
            else:
                out[c] = True
        return out

    seen = [polarity(b) for b in branches]
    for i, left in enumerate(seen):
        for right in seen[i + 1:]:
            assert any(left[a] != right[a] for a in left if a in right)


def test_branch_literals_are_atomic():
    problem, record = prepared_fixture("water_polo_compound")
    for branch in expand(problem, record):
        for c in branch.problem.constraints:
            inner = c.item if isinstance(c, NotC) else c
            assert not isinstance(inner, (NotC, ForParts))
            assert type(inner).__name__ not in ("AndC", "OrC")


def test_shannon_records_provenance():
    problem, record = prepared_fixture("officers")
    for branch in expand(problem, record):
        assert len(branch.provenance) == 2
        assert all(":=" in note for note in branch.provenance)


def test_fixed_atoms_force_shannon_values():
    problem, record = prepared(
        "s = set(a, b, c)\n"
        "t = choose(s)\n"
        "a in t\n"
        "(a in t) or (b in t)\n"
    )
    branches = expand(problem, record)
    assert len(branches) == 2
    for branch in branches:
        assert Member("a", "t") in branch.problem.constraints
    # a in t fixed: 2^2 subsets containing a, split by b's membership
    assert sum(oracle_count(b.problem) for b in branches) == 4


def test_size_range_pins_every_possible_length():
    problem, record = prepared(
        "s = set(a, b, c)\n"
        "t = choose(s)\n"
        "q = sequence(t)\n"
    )
    branches = expand(problem, record)
    assert len(branches) == 4
    pins = sorted(
        c.bound
        for b in branches
        for c in b.problem.constraints
        if isinstance(c, SizeCmp) and c.cmp == "=="
    )
    assert pins == [0, 1, 2, 3]
    # sum over k of C(3,k) * k!
    assert sum(oracle_count(b.problem) for b in branches) == 16


def test_size_range_respects_existing_bounds():
    problem, record = prepared(
        "s = set(a, b, c)\n"
        "t = choose(s)\n"
        "q = sequence(t)\n"
        "|t| >= 2\n"
    )
    branches = expand(problem, record)
    assert len(branches) == 2
    assert sum(oracle_count(b.problem) for b in branches) == 12


def test_known_sizes_are_not_expanded():
    problem, record = prepared(
        "s = set(a, b, c)\n"
        "t = choose(s, 2)\n"
        "q = sequence(t)\n"
    )
    branches = expand(problem, record)
    assert len(branches) == 1


def test_group_expansion_mints_part_objects():
    problem, record = prepared_fixture("basketball")
    branches = expand(problem, record)
    assert len(branches) == 1
    expanded = branches[0].problem
    assert not any(isinstance(c, ForParts) for c in expanded.constraints)
    parts = [n for n, o in expanded.objects.items()
             if isinstance(o.action, PartIndex)]
    assert parts == ["groups[0]", "groups[1]"]
    names = list(expanded.objects)
    assert names.index("groups[0]") == names.index("groups") + 1
    assert oracle_count(expanded) == 126


def test_group_expansion_keeps_one_branch_for_atomic_templates():
    problem, record = prepared_fixture("basketball")
    [branch] = expand(problem, record)
    sizes = [c for c in branch.problem.constraints if isinstance(c, SizeCmp)]
    assert len(sizes) == 2


# ---------------------------------------------------------------------------
# splitting

def test_girls_boys_splits_into_two_components():
    problem, record = prepared_fixture("girls_boys")
    [branch] = expand(problem, record)
    components = split(branch)
    assert len(components) == 2
    assert sorted(oracle_count(c) for c in components) == [20, 462]


def test_components_have_disjoint_domains():
    problem, record = prepared_fixture("girls_boys")
    [branch] = expand(problem, record)
    left, right = split(branch)
    assert not set(left.domain) & set(right.domain)
    assert not set(left.objects) & set(right.objects)


def test_constraint_joins_otherwise_independent_objects():
    problem, record = prepared(
        "s = set(a, b, c)\n"
        "u = set(d, e, f)\n"
        "t = choose(s)\n"
        "v = choose(u)\n"
        "|t| + |v| <= 2\n"
    )
    [branch] = expand(problem, record)
    assert len(split(branch)) == 1


def test_independent_chooses_split_apart():
    problem, record = prepared(
        "s = set(a, b, c)\n"
        "u = set(d, e, f)\n"
        "t = choose(s)\n"
        "v = choose(u)\n"
    )
    [branch] = expand(problem, record)
    components = split(branch)
    assert len(components) == 2
    assert [oracle_count(c) for c in components] == [8, 8]


def test_dependencies_keep_chains_together():
    problem, record = prepared_fixture("plants")
    [branch] = expand(problem, record)
    assert len(split(branch)) == 1


def test_empty_problem_splits_to_itself():
    problem, record = prepared("")
    [branch] = expand(problem, record)
    assert split(branch) == [branch.problem]


# ---------------------------------------------------------------------------
# the distribution law

@pytest.mark.parametrize("name", ALL_FIXTURES)
def test_branches_and_components_preserve_the_count(name):
    problem, record = prepared_fixture(name)
    assert branch_total(problem, record) == oracle_count(problem)


def test_expansion_of_compound_with_sizes_preserves_the_count():
    problem, record = prepared(
        "s = set(a, b, c, d)\n"
        "t = choose(s)\n"
        "q = sequence(t)\n"
        "(a in t) or (|t| <= 2)\n"
    )
    assert branch_total(problem, record) == oracle_count(problem)

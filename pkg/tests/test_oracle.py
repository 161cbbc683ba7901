"""Frozen reference counts via the brute-force oracle.

Each fixture's expected value was fixed before the compiled pipeline
existed, either worked out by hand or taken from the problem's known
answer, so these tests anchor the whole project: the encoder is later
required to agree with every number here.
"""

from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from cofola.errors import BudgetExceeded
from cofola.frontend import load
from cofola.oracle import oracle_count
from cofola.semantics import denote
from cofola.universe import ncr

FIXTURES = Path(__file__).parent / "fixtures"

# fixture name -> count, with the arithmetic that froze it
EXPECTED = {
    # choose 7 of 15, then a goalie among the 7: C(15,7) * 7
    "water_polo": 45045,
    # player1 on the team: C(14,6) * 7
    "water_polo_member": 21021,
    # player1 is the goalie or not on the team: C(14,6) + C(14,7)*7
    "water_polo_compound": 27027,
    # words CxXX from {A..F} \ {C} containing B: C(4,2) * 3!
    "four_letter": 36,
    # two math books shelved together and before the physics book
    "books": 720,
    # 4 magnets from AOU + MTTHCNS with fewer vowels: 25 + 3*25
    "mathcounts": 100,
    # two plants of bag(basil:2, aloe:1) split over 2 lamps, then
    # each lamp's content partitioned over 2 shelves
    "plants": 14,
    # 10 players into two unlabelled fives: C(10,5) / 2
    "basketball": 126,
    # 3 officers from 20, never Alex and Bob at once: C(20,3) - 18
    "officers": 1122,
    # C(6,3) * C(11,5)
    "girls_boys": 9240,
    # 5 balls in a row, red1 and red2 apart: 5! - 2*4!
    "red_balls": 72,
}


def count_fixture(name, **kw):
    text = (FIXTURES / f"{name}.cofola").read_text()
    return oracle_count(denote(load(text)), **kw)


@pytest.mark.parametrize("name,expected", sorted(EXPECTED.items()))
def test_fixture_counts(name, expected):
    assert count_fixture(name) == expected


def test_budget_is_enforced():
    with pytest.raises(BudgetExceeded):
        count_fixture("water_polo", budget=100)


def test_empty_program_counts_one():
    assert oracle_count(denote(load(""))) == 1


def test_unsatisfiable_size_counts_zero():
    problem = denote(load("s = set(a, b)\nt = choose(s)\n|t| == 5\n"))
    assert oracle_count(problem) == 0


def test_constant_false_prunes_immediately():
    problem = denote(load("s = set(a, b, c)\n|s| == 99\n"))
    assert oracle_count(problem, budget=1) == 0


@settings(deadline=None, max_examples=25)
@given(st.integers(1, 6), st.integers(0, 6))
def test_plain_choose_matches_binomial(n, k):
    names = ", ".join(f"e{i}" for i in range(n))
    text = f"s = set({names})\nt = choose(s, {k})\n"
    assert oracle_count(denote(load(text))) == ncr(n, k)


@settings(deadline=None, max_examples=25)
@given(st.integers(1, 5), st.integers(1, 5))
def test_tuple_of_choose_counts_falling_factorials(n, k):
    names = ", ".join(f"e{i}" for i in range(n))
    text = f"s = set({names})\nt = choose(s, {k})\narr = tuple(t)\n"
    expected = 0 if k > n else ncr(n, k) * _fact(k)
    assert oracle_count(denote(load(text))) == expected


def _fact(k):
    out = 1
    for i in range(2, k + 1):
        out *= i
    return out


def test_circle_of_four_without_and_with_reflection():
    base = "s = set(a, b, c, d)\n"
    plain = denote(load(base + "t = circle(s)\n"))
    mirrored = denote(load(base + "t = circle(s, reflection = true)\n"))
    assert oracle_count(plain) == 6
    assert oracle_count(mirrored) == 3

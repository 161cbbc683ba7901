"""Concrete combinatorial values and the operations on them.

Everything the denotational semantics and the enumeration oracle touch
lives here: set and bag values, ordered arrangements, circular
arrangements with a canonical form, partitions and compositions, the
enumeration routines that generate them, and closed-form counting
helpers (multinomials, necklace and bracelet counts via Burnside).

Representation choices:

* sets are plain ``frozenset`` of entity names;
* bags are :class:`Bag`, an immutable sorted tuple of (entity, count);
* tuples and sequences are plain Python tuples of entity names;
* circles are :class:`Circle`, canonicalised up to rotation (and
  reflection when the circle was declared reflection-invariant);
* partitions are :class:`Partition` (a canonically sorted multiset of
  parts), compositions are :class:`Composition` (parts in order).

Partition and composition parts may be empty; a partition with two
equal parts is a single value (the parts form a multiset).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Iterator, Tuple, Union


# ---------------------------------------------------------------------------
# bags

@dataclass(frozen=True)
class Bag:
    """An immutable multiset of entity names."""

    pairs: Tuple[Tuple[str, int], ...] = ()

    @staticmethod
    def from_counts(counts: Dict[str, int]) -> "Bag":
        return Bag(tuple(sorted((e, c) for e, c in counts.items() if c > 0)))

    def to_counts(self) -> Dict[str, int]:
        return dict(self.pairs)

    def count(self, entity: str) -> int:
        for e, c in self.pairs:
            if e == entity:
                return c
        return 0

    def support(self) -> frozenset:
        return frozenset(e for e, _ in self.pairs)

    def total(self) -> int:
        return sum(c for _, c in self.pairs)

    def union(self, other: "Bag") -> "Bag":
        counts = self.to_counts()
        for e, c in other.pairs:
            counts[e] = max(counts.get(e, 0), c)
        return Bag.from_counts(counts)

    def intersect(self, other: "Bag") -> "Bag":
        counts = {}
        for e, c in self.pairs:
            m = min(c, other.count(e))
            if m > 0:
                counts[e] = m
        return Bag.from_counts(counts)

    def diff(self, other: "Bag") -> "Bag":
        counts = {}
        for e, c in self.pairs:
            m = c - other.count(e)
            if m > 0:
                counts[e] = m
        return Bag.from_counts(counts)

    def add(self, other: "Bag") -> "Bag":
        counts = self.to_counts()
        for e, c in other.pairs:
            counts[e] = counts.get(e, 0) + c
        return Bag.from_counts(counts)

    def subbag_of(self, other: "Bag") -> bool:
        return all(c <= other.count(e) for e, c in self.pairs)

    def expand(self) -> Tuple[str, ...]:
        """The sorted word with each entity repeated by multiplicity."""
        return tuple(itertools.chain.from_iterable(
            (e,) * c for e, c in self.pairs))


def as_bag(value: Union[frozenset, Bag]) -> Bag:
    """Promote a set to a multiplicity-1 bag; bags pass through."""
    if isinstance(value, Bag):
        return value
    return Bag(tuple((e, 1) for e in sorted(value)))


# ---------------------------------------------------------------------------
# circles

def canonicalize_circle(items: Iterable[str], reflection: bool = False
                        ) -> Tuple[str, ...]:
    """Canonical representative of a circular arrangement: the
    lexicographically least rotation, also considering the reversed
    orientation when ``reflection`` is set."""
    items = tuple(items)
    n = len(items)
    if n <= 1:
        return items
    candidates = [items[i:] + items[:i] for i in range(n)]
    if reflection:
        rev = items[::-1]
        candidates.extend(rev[i:] + rev[:i] for i in range(n))
    return min(candidates)


@dataclass(frozen=True)
class Circle:
    items: Tuple[str, ...]
    reflection: bool = False

    @staticmethod
    def make(items: Iterable[str], reflection: bool = False) -> "Circle":
        return Circle(canonicalize_circle(items, reflection), reflection)


# ---------------------------------------------------------------------------
# partitions and compositions

def part_key(part):
    """Sort key putting parts in a canonical order (sets and bags)."""
    if isinstance(part, Bag):
        return (part.total(), part.pairs)
    return (len(part), tuple(sorted(part)))


@dataclass(frozen=True)
class Partition:
    """An unordered grouping: the multiset of parts, canonically sorted."""

    parts: Tuple

    @staticmethod
    def make(parts: Iterable) -> "Partition":
        return Partition(tuple(sorted(parts, key=part_key)))


@dataclass(frozen=True)
class Composition:
    """An ordered grouping: parts in their given order."""

    parts: Tuple


Value = Union[frozenset, Bag, tuple, Circle, Partition, Composition]


# ---------------------------------------------------------------------------
# enumeration: subsets and sub-bags

def subsets(value: frozenset) -> Iterator[frozenset]:
    elems = sorted(value)
    for r in range(len(elems) + 1):
        for combo in itertools.combinations(elems, r):
            yield frozenset(combo)


def subsets_k(value: frozenset, k: int) -> Iterator[frozenset]:
    for combo in itertools.combinations(sorted(value), k):
        yield frozenset(combo)


def subbags(value: Bag) -> Iterator[Bag]:
    entities = [e for e, _ in value.pairs]
    ranges = [range(c + 1) for _, c in value.pairs]
    for choice in itertools.product(*ranges):
        yield Bag.from_counts(dict(zip(entities, choice)))


def subbags_k(value: Bag, k: int) -> Iterator[Bag]:
    for bag in subbags(value):
        if bag.total() == k:
            yield bag


def multichoose_k(support: frozenset, k: int) -> Iterator[Bag]:
    """All bags of total size k drawing from ``support`` without a
    multiplicity cap (choose with replacement)."""
    elems = sorted(support)
    if not elems:
        if k == 0:
            yield Bag()
        return
    for combo in itertools.combinations_with_replacement(elems, k):
        counts: Dict[str, int] = {}
        for e in combo:
            counts[e] = counts.get(e, 0) + 1
        yield Bag.from_counts(counts)


# ---------------------------------------------------------------------------
# enumeration: orderings

def orderings(value: Union[frozenset, Bag]) -> Iterator[Tuple[str, ...]]:
    """All distinct linear arrangements of a set or bag."""
    if isinstance(value, Bag):
        yield from _multiset_perms(value.to_counts())
    else:
        yield from itertools.permutations(sorted(value))


def _multiset_perms(counts: Dict[str, int]) -> Iterator[Tuple[str, ...]]:
    if not counts:
        yield ()
        return
    for e in sorted(counts):
        rest = dict(counts)
        rest[e] -= 1
        if rest[e] == 0:
            del rest[e]
        for tail in _multiset_perms(rest):
            yield (e,) + tail


def circle_arrangements(value: Union[frozenset, Bag],
                        reflection: bool = False) -> Iterator[Circle]:
    """All distinct circular arrangements of a set or bag."""
    seen = set()
    for perm in orderings(value):
        circ = Circle.make(perm, reflection)
        if circ.items not in seen:
            seen.add(circ.items)
            yield circ


# ---------------------------------------------------------------------------
# enumeration: partitions and compositions

def set_partitions_k(value: frozenset, k: int) -> Iterator[Partition]:
    """Partitions of a set into exactly k possibly-empty unlabeled parts.
    Generated by restricted growth (each element joins an existing block
    or opens a new one), so no duplicates arise."""
    elems = sorted(value)

    def rec(i: int, blocks):
        if i == len(elems):
            pad = [frozenset()] * (k - len(blocks))
            yield Partition.make([frozenset(b) for b in blocks] + pad)
            return
        for b in blocks:
            b.append(elems[i])
            yield from rec(i + 1, blocks)
            b.pop()
        if len(blocks) < k:
            blocks.append([elems[i]])
            yield from rec(i + 1, blocks)
            blocks.pop()

    yield from rec(0, [])


def bag_partitions_k(value: Bag, k: int) -> Iterator[Partition]:
    """Partitions of a bag into exactly k possibly-empty unlabeled parts."""
    seen = set()
    for comp in bag_compositions_k(value, k):
        p = Partition.make(comp.parts)
        if p not in seen:
            seen.add(p)
            yield p


def set_compositions_k(value: frozenset, k: int) -> Iterator[Composition]:
    """Ordered split of a set into k possibly-empty parts."""
    elems = sorted(value)
    for assignment in itertools.product(range(k), repeat=len(elems)):
        parts = [[] for _ in range(k)]
        for e, idx in zip(elems, assignment):
            parts[idx].append(e)
        yield Composition(tuple(frozenset(p) for p in parts))


def bag_compositions_k(value: Bag, k: int) -> Iterator[Composition]:
    """Ordered split of a bag into k possibly-empty parts."""
    entities = [e for e, _ in value.pairs]
    splits_per_entity = [
        list(_int_compositions(c, k)) for _, c in value.pairs]
    for combo in itertools.product(*splits_per_entity):
        parts = []
        for i in range(k):
            counts = {e: combo[j][i] for j, e in enumerate(entities)
                      if combo[j][i] > 0}
            parts.append(Bag.from_counts(counts))
        yield Composition(tuple(parts))


def _int_compositions(total: int, k: int) -> Iterator[Tuple[int, ...]]:
    """Nonnegative integer k-tuples summing to total."""
    if k == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _int_compositions(total - first, k - 1):
            yield (first,) + rest


def partitions_k(value: Union[frozenset, Bag], k: int) -> Iterator[Partition]:
    if isinstance(value, Bag):
        return bag_partitions_k(value, k)
    return set_partitions_k(value, k)


def compositions_k(value: Union[frozenset, Bag], k: int
                   ) -> Iterator[Composition]:
    if isinstance(value, Bag):
        return bag_compositions_k(value, k)
    return set_compositions_k(value, k)


# ---------------------------------------------------------------------------
# counting helpers

def multinomial(counts: Iterable[int]) -> int:
    counts = list(counts)
    total = sum(counts)
    out = 1
    for c in counts:
        out *= math.comb(total, c)
        total -= c
    return out


def _totient(n: int) -> int:
    out = n
    p = 2
    while p * p <= n:
        if n % p == 0:
            while n % p == 0:
                n //= p
            out -= out // p
        p += 1
    if n > 1:
        out -= out // n
    return out


def necklace_count(counts: Iterable[int]) -> int:
    """Distinct circular arrangements of a multiset, up to rotation
    (Burnside over the cyclic group)."""
    counts = [c for c in counts if c > 0]
    n = sum(counts)
    if n == 0:
        return 1
    g = 0
    for c in counts:
        g = math.gcd(g, c)
    total = 0
    # a rotation fixes an arrangement iff it is a repetition of a block
    # of length n/d; phi(d) rotations share each divisor's block count
    for d in range(1, g + 1):
        if g % d == 0:
            total += _totient(d) * multinomial(c // d for c in counts)
    assert total % n == 0
    return total // n


def _fixed_by_axis(counts, fixed_pts: int) -> int:
    """Arrangements of the multiset fixed by one reflection whose axis
    passes through ``fixed_pts`` positions (0, 1 or 2).  The remaining
    positions pair up and each pair must carry a single entity."""
    counts = [c for c in counts if c > 0]

    def rec(remaining, f):
        if f == 0:
            if any(c % 2 for c in remaining):
                return 0
            return multinomial(c // 2 for c in remaining)
        total = 0
        for i, c in enumerate(remaining):
            if c > 0:
                remaining[i] -= 1
                total += rec(remaining, f - 1)
                remaining[i] += 1
        return total

    return rec(list(counts), fixed_pts)


def _reflection_fixed(counts) -> int:
    """Sum over all n reflections of the number of arrangements each
    one fixes (the reflection half of the Burnside numerator)."""
    counts = [c for c in counts if c > 0]
    n = sum(counts)
    if n % 2 == 1:
        return n * _fixed_by_axis(counts, 1)
    return (n // 2) * (_fixed_by_axis(counts, 0)
                       + _fixed_by_axis(counts, 2))


def bracelet_count(counts: Iterable[int]) -> int:
    """Distinct circular arrangements up to rotation and reflection
    (Burnside over the dihedral group)."""
    counts = [c for c in counts if c > 0]
    n = sum(counts)
    if n == 0:
        return 1
    g = 0
    for c in counts:
        g = math.gcd(g, c)
    rot = 0
    for d in range(1, g + 1):
        if g % d == 0:
            rot += _totient(d) * multinomial(c // d for c in counts)
    refl = _reflection_fixed(counts)
    assert (rot + refl) % (2 * n) == 0
    return (rot + refl) // (2 * n)


def circular_count(counts: Iterable[int], reflection: bool) -> int:
    counts = list(counts)
    return bracelet_count(counts) if reflection else necklace_count(counts)


def ncr(n: int, r: int) -> int:
    return math.comb(n, r) if 0 <= r <= n else 0


def frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)

"""The compiled form handed from the encoder to the solver.

An instance bundles the logical sentence with everything needed to turn
its weighted model count back into a plain number: symbolic weights,
the monomial admission system, the deliberate overcount factor, and the
part-size variable groups whose residual symmetry the decoder divides
out.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

from .fol import Sentence
from .poly import CoeffSystem, Poly


@dataclass(frozen=True)
class CircleMeta:
    """Decode-time correction data for a circle built over a bag.

    The instance counts linear position labellings; the decoder rescales
    each admitted monomial from linear words to circular words using the
    exponents of these position-label variables.
    """

    pos_vars: Tuple[str, ...]
    reflection: bool = False


@dataclass(frozen=True)
class EncodedInstance:
    sentence: Sentence
    domain: Tuple[str, ...]
    weights: Dict[str, Tuple[Poly, Poly]] = field(default_factory=dict)
    system: CoeffSystem = CoeffSystem()
    overcount: int = 1
    sigma: Tuple[Tuple[str, ...], ...] = ()
    circle: Optional[CircleMeta] = None

    def __post_init__(self):
        assert self.overcount >= 1
        for pred in self.weights:
            assert pred in self.sentence.predicates, \
                f"weight for unregistered predicate {pred}"

    def weight(self, pred: str) -> Tuple[Poly, Poly]:
        got = self.weights.get(pred)
        if got is None:
            one = Poly.const(1)
            return one, one
        return got

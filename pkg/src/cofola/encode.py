"""Compile one atomic branch into a weighted model counting instance.

Every object of the branch becomes a cluster of predicates, sentences,
and evidence over the entity domain:

  sets       their own unary predicate; literal sets are pinned by
             closed-world evidence, chosen sets by a subset sentence
             plus a cardinality atom.
  bags       a presence predicate plus one predicate per possible
             entity whose symbolic weight x + x^2 + ... + x^m tracks
             the multiplicity as a monomial exponent.
  tuples     a function from fresh index constants into the source,
             bijective for set sources.
  sequences  a linear order axiom; the source is confined to an
  / circles  initial block and the deliberate overcount of the
             surrounding elements is divided out after solving.
  groupings  per-part predicates covering the source, with symmetry
             of equal parts broken through the admission system and
             recorded for the decoder.

Constraints become ground literals, guarded two-variable sentences, or
entries of the monomial admission system over the symbolic weight
variables.  The result is immutable; `decode` in the pipeline module
turns its weighted count back into a plain number.

Naming scheme: an object's presence predicate is its own name; every
derived predicate is `role[owner,...]`; the weight variable carried by
a predicate P is always `x(P)`.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

from .errors import UnsupportedError
from .fol import (AndF, Atom, Bot, CardinalityAtom, EvidenceLiteral, Exists,
                  ForAll, Formula, Func, FuncBij, FuncInj, Iff, Implies,
                  Linear, NotF, OrF, Sentence, X, Y, closed_world_evidence,
                  expand_func_axiom)
from .instance import CircleMeta, EncodedInstance
from .poly import (CoeffSystem, Condition, EqFloorDiff, EqMax, EqMin, EqSum,
                   LexLeq, LinearCmp, Poly)
from .preprocess import AnalysisRecord
from .problem import (Action, AddUnionOf, Arg, Card, ComposeOf,
                      CountingProblem, CountTerm, DedupTerm, DiffOf, DisjointC,
                      EntArg, EqC, FalseC, ForParts, IndexInC, IndexIs, Init,
                      IntersectOf, Kind, LessPat, Member, MsetChoose,
                      NextToPat, NotC, ObjArg, ObjectDef, PartIndex,
                      PartitionOf, PatCountTerm, PatternC, PatternIR, PredPat,
                      SetChoose, SetChooseR, SizeCmp, SubsetC, SuppOf,
                      Together, TupleOf, UnionOf, action_deps,
                      constraint_objects)

MultExpr = Union[int, str]  # a known multiplicity or a weight variable


def wvar(pred: str) -> str:
    """The symbolic weight variable carried by a predicate."""
    return f"x({pred})"


class _OrderInfo:
    """Everything pattern encodings need to know about the one
    order-carrying object of the branch."""

    __slots__ = ("obj", "circle", "source_kind", "content", "succ",
                 "order", "k", "pos", "reflection", "source")

    def __init__(self, obj, circle, source_kind, content, succ, order, k,
                 pos, reflection, source):
        self.obj = obj
        self.circle = circle                  # bool
        self.source_kind = source_kind        # Kind.SET or Kind.BAG
        self.content = content                # D for sets, I for bags
        self.succ = succ
        self.order = order
        self.k = k
        self.pos = pos                        # entity -> Pos predicate
        self.reflection = reflection
        self.source = source                  # source object name


class _Encoder:
    def __init__(self, problem: CountingProblem, record: AnalysisRecord):
        self.problem = problem
        self.record = record
        self.domain: List[str] = list(problem.domain)
        self.predicates: Dict[str, int] = {}
        self.conjuncts: List = []
        self.weights: Dict[str, Tuple[Poly, Poly]] = {}
        self.conditions: List[Condition] = []
        self.sigma: List[Tuple[str, ...]] = []
        self.overcount = 1
        self.circle_meta: Optional[CircleMeta] = None
        # bag-like object -> entity -> constant multiplicity or weight var
        self.mults: Dict[str, Dict[str, MultExpr]] = {}
        # (grouping, part index) -> the part's multiplicity table
        self.part_mults: Dict[Tuple[str, int], Dict[str, MultExpr]] = {}
        self.order_info: Dict[str, _OrderInfo] = {}
        self.u_minted: Dict[str, str] = {}
        self.img_minted: Dict[str, str] = {}
        self.idx_consts: Dict[str, List[str]] = {}
        self.fused: Dict[str, str] = {}   # dropped choose -> consuming tuple
        self.circ_markers: Dict[str, Tuple[str, str]] = {}
        self.aux_count: Dict[str, int] = {}

    # -- registry helpers ---------------------------------------------------

    def pred(self, name: str, arity: int) -> str:
        have = self.predicates.get(name)
        if have is None:
            self.predicates[name] = arity
        else:
            assert have == arity, f"{name}: arity {have} vs {arity}"
        return name

    def u_pred(self, e: str) -> str:
        """The identifier predicate of one entity, pinned by evidence."""
        got = self.u_minted.get(e)
        if got is None:
            got = self.pred(f"U[{e}]", 1)
            self.u_minted[e] = got
            self.add(*closed_world_evidence(got, self.domain, {e}))
        return got

    def obj_pred(self, name: str) -> str:
        assert name not in self.fused, f"{name} was fused away"
        assert name in self.problem.objects, name
        return self.pred(name, 1)

    def add(self, *conjuncts) -> None:
        self.conjuncts.extend(conjuncts)

    def set_weight(self, pred: str, wpos: Poly) -> None:
        assert pred not in self.weights, f"{pred} weighted twice"
        self.weights[pred] = (wpos, Poly.const(1))

    def aux(self, role: str, owner: str) -> str:
        """Mint a deterministic auxiliary predicate name."""
        n = self.aux_count.get(owner, 0)
        self.aux_count[owner] = n + 1
        return f"{role}[{owner},{n}]"

    def pent(self, obj: str) -> List[str]:
        return sorted(self.record.pent.get(obj, frozenset()))

    # -- multiplicity bookkeeping -------------------------------------------

    def mult_expr(self, obj: str, e: str) -> MultExpr:
        return self.mults[obj].get(e, 0)

    def mult_bound(self, obj: str, e: str) -> int:
        m = self.record.mult.get(obj, {}).get(e, 0)
        assert m != math.inf, f"unbounded multiplicity for {e} in {obj}"
        return int(m)

    def mint_mult_device(self, obj: str, e: str, bound: int) -> str:
        """One per-entity multiplicity predicate: true on e exactly when
        the bag holds e, weighted x + x^2 + ... + x^bound."""
        be = self.pred(f"mult[{obj},{e}]", 1)
        b = self.obj_pred(obj)
        ue = self.u_pred(e)
        self.add(ForAll(X, Iff(Atom(be, (X,)),
                               AndF((Atom(b, (X,)), Atom(ue, (X,)))))))
        var = wvar(be)
        self.set_weight(be, Poly.power_range(var, 1, bound))
        return var

    def ensure_mult_var(self, obj: str, e: str) -> str:
        """Promote a constant multiplicity to a tracked variable (needed
        when a min/max/monus condition mentions it)."""
        cur = self.mults[obj].get(e, 0)
        if isinstance(cur, str):
            return cur
        assert cur > 0, f"no occurrences of {e} in {obj} to track"
        be = self.pred(f"mult[{obj},{e}]", 1)
        b = self.obj_pred(obj)
        ue = self.u_pred(e)
        self.add(ForAll(X, Iff(Atom(be, (X,)),
                               AndF((Atom(b, (X,)), Atom(ue, (X,)))))))
        var = wvar(be)
        # the entity is present for certain, so the exponent is pinned
        self.set_weight(be, Poly.var(var, cur))
        self.mults[obj][e] = var
        return var

    def mint_bag_devices(self, obj: str) -> None:
        """Multiplicity devices for every possible entity of a derived
        bag, plus negative evidence outside the possible set."""
        table: Dict[str, MultExpr] = {}
        possible = self.pent(obj)
        for e in possible:
            bound = self.mult_bound(obj, e)
            if bound <= 0:
                continue
            table[e] = self.mint_mult_device(obj, e, bound)
        self.mults[obj] = table
        b = self.obj_pred(obj)
        covered = set(table)
        for e in self.domain:
            if e not in covered:
                self.add(EvidenceLiteral(b, e, False))

    # -- linear-condition helpers -------------------------------------------

    def add_cmp(self, lhs: MultExpr, cmp: str, rhs: MultExpr) -> None:
        """lhs cmp rhs where each side is a constant or a variable."""
        if isinstance(lhs, int) and isinstance(rhs, int):
            from .problem import compare
            if not compare(lhs, cmp, rhs):
                self.add(Bot())
            return
        terms: List[Tuple[int, str]] = []
        bound = 0
        if isinstance(lhs, str):
            terms.append((1, lhs))
        else:
            bound -= lhs
        if isinstance(rhs, str):
            terms.append((-1, rhs))
        else:
            bound += rhs
        self.conditions.append(LinearCmp(tuple(terms), cmp, bound))

    # -- entry point ---------------------------------------------------------

    def run(self) -> EncodedInstance:
        self._plan_fusion()
        self._mint_index_constants()
        for name in self.problem.order():
            if name in self.fused:
                continue
            self._object(self.problem.objects[name])
        deferred = []
        for c in self.problem.constraints:
            if self._is_size(c):
                deferred.append(c)
            else:
                self._constraint(c)
        for c in deferred:
            self._size_constraint(c)
        return self._build()

    @staticmethod
    def _is_size(c) -> bool:
        while isinstance(c, NotC):
            c = c.item
        return isinstance(c, SizeCmp)

    def _plan_fusion(self) -> None:
        """A choose used only as a tuple's source is not encoded as an
        object of its own; the tuple's function absorbs it."""
        refs: Dict[str, int] = {}
        for od in self.problem.objects.values():
            for dep in action_deps(od.action):
                refs[dep] = refs.get(dep, 0) + 1
        for c in self.problem.constraints:
            for name in constraint_objects(c):
                refs[name] = refs.get(name, 0) + 1
        for od in self.problem.objects.values():
            if od.kind is not Kind.TUPLE:
                continue
            src = od.action.src
            srcdef = self.problem.objects.get(src)
            if srcdef is None:
                continue
            if isinstance(srcdef.action, (SetChoose, SetChooseR, MsetChoose)) \
                    and refs.get(src, 0) == 1:
                self.fused[src] = od.name

    def _mint_index_constants(self) -> None:
        """Fresh position constants for every object that needs an index
        set, added to the domain before any evidence mentions it."""
        for name, od in self.problem.objects.items():
            if od.kind is Kind.TUPLE:
                need = True
            elif od.kind in (Kind.SEQUENCE, Kind.CIRCLE):
                src = od.action.src
                need = self.problem.kind(src) is Kind.BAG
            else:
                need = False
            if not need:
                continue
            k = self.record.size.get(name)
            assert k is not None, f"unknown size for ordered object {name}"
            consts = [f"{name}.idx{i}" for i in range(1, k + 1)]
            self.idx_consts[name] = consts
            self.domain.extend(consts)

    # -- objects --------------------------------------------------------------

    def _object(self, od: ObjectDef) -> None:
        kind, act = od.kind, od.action
        if kind is Kind.SET:
            self._set_object(od.name, act)
        elif kind is Kind.BAG:
            self._bag_object(od.name, act)
        elif kind is Kind.TUPLE:
            self._tuple_object(od.name, act)
        elif kind in (Kind.SEQUENCE, Kind.CIRCLE):
            self._order_object(od, act)
        else:
            assert kind in (Kind.PARTITION, Kind.COMPOSITION), kind
            self._grouping_object(od.name, kind, act)

    def _set_object(self, name: str, act: Action) -> None:
        s = self.obj_pred(name)
        if isinstance(act, Init):
            self.add(*closed_world_evidence(s, self.domain, act.value))
            return
        self._derived_set_action(name, s, act)
        # known sizes always become explicit: they may stem from folded
        # constraints that exist nowhere else any more
        k = self.record.size.get(name)
        if k is not None:
            self.add(CardinalityAtom(((1, s),), "==", k))

    def _derived_set_action(self, name: str, s: str, act: Action) -> None:
        if isinstance(act, SetChoose):
            src = self.obj_pred(act.src)
            self.add(ForAll(X, Implies(Atom(s, (X,)), Atom(src, (X,)))))
        elif isinstance(act, UnionOf):
            l, r = self.obj_pred(act.lhs), self.obj_pred(act.rhs)
            self.add(ForAll(X, Iff(Atom(s, (X,)),
                                   OrF((Atom(l, (X,)), Atom(r, (X,)))))))
        elif isinstance(act, IntersectOf):
            l, r = self.obj_pred(act.lhs), self.obj_pred(act.rhs)
            self.add(ForAll(X, Iff(Atom(s, (X,)),
                                   AndF((Atom(l, (X,)), Atom(r, (X,)))))))
        elif isinstance(act, DiffOf):
            l, r = self.obj_pred(act.lhs), self.obj_pred(act.rhs)
            self.add(ForAll(X, Iff(Atom(s, (X,)),
                                   AndF((Atom(l, (X,)),
                                         NotF(Atom(r, (X,))))))))
        elif isinstance(act, SuppOf):
            b = self.obj_pred(act.src)
            self.add(ForAll(X, Iff(Atom(s, (X,)), Atom(b, (X,)))))
        elif isinstance(act, PartIndex):
            part = self.pred(f"part[{act.src},{act.index}]", 1)
            self.add(ForAll(X, Iff(Atom(s, (X,)), Atom(part, (X,)))))
        else:
            raise AssertionError(f"set object from {type(act).__name__}")

    def _bag_object(self, name: str, act: Action) -> None:
        b = self.obj_pred(name)
        if isinstance(act, Init):
            bag = act.value
            self.add(*closed_world_evidence(b, self.domain, bag.support()))
            self.mults[name] = {e: bag.count(e) for e in sorted(bag.support())}
            return
        if isinstance(act, MsetChoose):
            src = self.obj_pred(act.src)
            self.add(ForAll(X, Implies(Atom(b, (X,)), Atom(src, (X,)))))
            self.mint_bag_devices(name)
            for e in self.pent(name):
                var = self.mults[name].get(e)
                if var is None:
                    continue
                cap = self.mult_expr(act.src, e)
                if isinstance(cap, str) or cap < self.mult_bound(name, e):
                    self.add_cmp(var, "<=", cap)
        elif isinstance(act, SetChooseR):
            src = self.obj_pred(act.src)
            self.add(ForAll(X, Implies(Atom(b, (X,)), Atom(src, (X,)))))
            # the device weights already cap each multiplicity at the
            # analysis bound; the total pins the draw below
            self.mint_bag_devices(name)
        elif isinstance(act, (UnionOf, IntersectOf, AddUnionOf, DiffOf)):
            self._bag_operation(name, act)
        elif isinstance(act, PartIndex):
            part = self.pred(f"part[{act.src},{act.index}]", 1)
            self.add(ForAll(X, Iff(Atom(b, (X,)), Atom(part, (X,)))))
            self.mults[name] = self.part_mults[(act.src, act.index)]
        else:
            raise AssertionError(f"bag object from {type(act).__name__}")
        # as with sets, a known total may be the residue of a folded
        # size constraint; derived bags restate it over their devices
        self._bag_total(name)

    def _bag_total(self, name: str) -> None:
        k = self.record.size.get(name)
        if k is None:
            return
        terms = []
        bound = k
        for e in self.pent(name):
            ex = self.mult_expr(name, e)
            if isinstance(ex, str):
                terms.append((1, ex))
            else:
                bound -= ex
        if terms:
            self.conditions.append(LinearCmp(tuple(terms), "==", bound))
        elif bound != 0:
            self.add(Bot())

    def _bag_operation(self, name: str, act: Action) -> None:
        b = self.obj_pred(name)
        l, r = self.obj_pred(act.lhs), self.obj_pred(act.rhs)
        if isinstance(act, (UnionOf, AddUnionOf)):
            self.add(ForAll(X, Iff(Atom(b, (X,)),
                                   OrF((Atom(l, (X,)), Atom(r, (X,)))))))
        elif isinstance(act, IntersectOf):
            self.add(ForAll(X, Iff(Atom(b, (X,)),
                                   AndF((Atom(l, (X,)), Atom(r, (X,)))))))
        # bag difference has no presence sentence: whether an entity
        # survives depends on the two multiplicities, which only the
        # admission system sees
        self.mint_bag_devices(name)
        for e in self.pent(name):
            tvar = self.mults[name].get(e)
            if tvar is None:
                # multiplicity bound 0: the analysis proved the entity
                # cannot end up in the result, nothing to relate
                continue
            lm = self.mult_expr(act.lhs, e)
            rm = self.mult_expr(act.rhs, e)
            self._bag_entity_condition(act, tvar, act.lhs, act.rhs, e, lm, rm)

    def _as_var(self, obj: str, e: str, m: MultExpr) -> str:
        return m if isinstance(m, str) else self.ensure_mult_var(obj, e)

    def _bag_entity_condition(self, act, tvar: str, lhs: str, rhs: str,
                              e: str, lm: MultExpr, rm: MultExpr) -> None:
        if isinstance(act, AddUnionOf):
            parts = []
            bound = 0
            for m in (lm, rm):
                if isinstance(m, str):
                    parts.append((-1, m))
                else:
                    bound += m
            self.conditions.append(
                LinearCmp(((1, tvar), *parts), "==", bound))
            return
        const_l = isinstance(lm, int)
        const_r = isinstance(rm, int)
        if isinstance(act, UnionOf):
            if const_l and const_r:
                self.add_cmp(tvar, "==", max(lm, rm))
            elif const_l and lm == 0:
                self.add_cmp(tvar, "==", rm)
            elif const_r and rm == 0:
                self.add_cmp(tvar, "==", lm)
            else:
                self.conditions.append(EqMax(
                    tvar, self._as_var(lhs, e, lm), self._as_var(rhs, e, rm)))
        elif isinstance(act, IntersectOf):
            if const_l and const_r:
                self.add_cmp(tvar, "==", min(lm, rm))
            elif (const_l and lm == 0) or (const_r and rm == 0):
                self.add_cmp(tvar, "==", 0)
            else:
                self.conditions.append(EqMin(
                    tvar, self._as_var(lhs, e, lm), self._as_var(rhs, e, rm)))
        else:
            assert isinstance(act, DiffOf)
            if const_l and const_r:
                self.add_cmp(tvar, "==", max(lm - rm, 0))
            elif const_l and lm == 0:
                self.add_cmp(tvar, "==", 0)
            elif const_r and rm == 0:
                self.add_cmp(tvar, "==", lm)
            else:
                self.conditions.append(EqFloorDiff(
                    tvar, self._as_var(lhs, e, lm), self._as_var(rhs, e, rm)))

    # -- tuples ---------------------------------------------------------------

    def _tuple_object(self, name: str, act: TupleOf) -> None:
        consts = self.idx_consts[name]
        ipred = self.pred(f"index[{name}]", 1)
        f = self.pred(f"fun[{name}]", 2)
        self.add(*closed_world_evidence(ipred, self.domain, consts))
        src = act.src
        srcdef = self.problem.objects[src]
        if src in self.fused:
            choose = srcdef.action
            inner = choose.src
            if isinstance(choose, SetChoose):
                self.add(FuncInj(f, ipred, self.obj_pred(inner)))
            elif isinstance(choose, SetChooseR):
                self.add(Func(f, ipred, self.obj_pred(inner)))
            else:
                assert isinstance(choose, MsetChoose)
                self.add(Func(f, ipred, self.obj_pred(inner)))
                for e in self.pent(inner):
                    inv = self._preimage_device(name, f, e)
                    self.add_cmp(wvar(inv), "<=", self.mult_expr(inner, e))
            return
        if srcdef.kind is Kind.SET:
            self.add(FuncBij(f, ipred, self.obj_pred(src)))
            return
        assert srcdef.kind is Kind.BAG, srcdef.kind
        self.add(Func(f, ipred, self.obj_pred(src)))
        for e in self.pent(src):
            inv = self._preimage_device(name, f, e)
            self.add_cmp(wvar(inv), "==", self.mult_expr(src, e))

    def _preimage_device(self, name: str, f: str, e: str) -> str:
        """How many positions map to one entity, tracked as a weight."""
        inv = self.pred(f"inv[{name},{e}]", 1)
        ue = self.u_pred(e)
        self.add(ForAll(X, Iff(Atom(inv, (X,)),
                               Exists(Y, AndF((Atom(f, (X, Y)),
                                               Atom(ue, (Y,))))))))
        self.set_weight(inv, Poly.var(wvar(inv)))
        return inv

    def _image_pred(self, name: str, f: str) -> str:
        """Entities hit by at least one tuple position."""
        got = self.img_minted.get(name)
        if got is None:
            got = self.pred(f"img[{name}]", 1)
            self.add(ForAll(Y, Iff(Atom(got, (Y,)),
                                   Exists(X, Atom(f, (X, Y))))))
            self.img_minted[name] = got
        return got

    # -- sequences and circles --------------------------------------------------

    def _order_object(self, od: ObjectDef, act: Action) -> None:
        name = od.name
        assert not self.order_info, "one order axiom per branch"
        circle = od.kind is Kind.CIRCLE
        reflection = bool(getattr(act, "reflection", False) or od.reflection)
        src = act.src
        src_kind = self.problem.kind(src)
        k = self.record.size.get(name)
        assert k is not None, f"unknown size for {name}"
        order = self.pred(f"ord[{name}]", 2)
        succ = self.pred(f"succ[{name}]", 2)
        self.add(Linear(order, succ))
        n = len(self.domain)
        if src_kind is Kind.SET:
            d = self.obj_pred(src)
            self.add(ForAll(X, ForAll(Y, Implies(
                AndF((Atom(d, (X,)), NotF(Atom(d, (Y,))))),
                Atom(order, (X, Y))))))
            if circle:
                if k == 0:
                    self.overcount *= math.factorial(n)
                else:
                    self.overcount *= math.factorial(n - k) * k
                    if reflection and k > 2:
                        self.overcount *= 2
            else:
                self.overcount *= math.factorial(n - k)
            info = _OrderInfo(name, circle, Kind.SET, d, succ, order, k,
                              {}, reflection, src)
        else:
            assert src_kind is Kind.BAG, src_kind
            consts = self.idx_consts[name]
            ipred = self.pred(f"index[{name}]", 1)
            self.add(*closed_world_evidence(ipred, self.domain, consts))
            self.add(ForAll(X, ForAll(Y, Implies(
                AndF((Atom(ipred, (X,)), NotF(Atom(ipred, (Y,))))),
                Atom(order, (X, Y))))))
            pos: Dict[str, str] = {}
            for e in self.pent(src):
                p = self.pred(f"pos[{name},{e}]", 1)
                pos[e] = p
                self.set_weight(p, Poly.var(wvar(p)))
                self.add_cmp(wvar(p), "==", self.mult_expr(src, e))
            labels = [Atom(pos[e], (X,)) for e in sorted(pos)]
            cover = OrF(tuple(labels)) if len(labels) != 1 else labels[0]
            if labels:
                self.add(ForAll(X, Iff(Atom(ipred, (X,)), cover)))
            else:
                self.add(ForAll(X, NotF(Atom(ipred, (X,)))))
            ordered = sorted(pos)
            for i, e1 in enumerate(ordered):
                for e2 in ordered[i + 1:]:
                    self.add(ForAll(X, NotF(AndF((Atom(pos[e1], (X,)),
                                                  Atom(pos[e2], (X,)))))))
            self.overcount *= math.factorial(k) * math.factorial(n - k)
            if circle and pos:
                self.circle_meta = CircleMeta(
                    tuple(wvar(pos[e]) for e in ordered), reflection)
            info = _OrderInfo(name, circle, Kind.BAG, ipred, succ, order, k,
                              pos, reflection, src)
        self.order_info[name] = info

    def _markers(self, info: _OrderInfo) -> Tuple[str, str]:
        """Block-first and block-last predicates that let a cut-open
        circle wrap around."""
        got = self.circ_markers.get(info.obj)
        if got is not None:
            return got
        bf = self.pred(f"bfirst[{info.obj}]", 1)
        bl = self.pred(f"blast[{info.obj}]", 1)
        d, succ = info.content, info.succ
        self.add(ForAll(X, Iff(Atom(bf, (X,)), AndF((
            Atom(d, (X,)),
            ForAll(Y, Implies(Atom(d, (Y,)), NotF(Atom(succ, (Y, X))))))))))
        self.add(ForAll(X, Iff(Atom(bl, (X,)), AndF((
            Atom(d, (X,)),
            ForAll(Y, Implies(Atom(succ, (X, Y)), NotF(Atom(d, (Y,))))))))))
        self.circ_markers[info.obj] = (bf, bl)
        return bf, bl

    def _adj(self, info: _OrderInfo, a, b) -> Formula:
        """Immediate successor, wrapping around for circles."""
        direct = Atom(info.succ, (a, b))
        if not info.circle:
            return direct
        bf, bl = self._markers(info)
        return OrF((direct, AndF((Atom(bl, (a,)), Atom(bf, (b,))))))

    # -- groupings ----------------------------------------------------------------

    def _grouping_object(self, name: str, kind: Kind, act: Action) -> None:
        assert isinstance(act, (PartitionOf, ComposeOf))
        src = act.src
        k = act.k
        src_kind = self.problem.kind(src)
        s = self.obj_pred(src)
        parts = [self.pred(f"part[{name},{i}]", 1) for i in range(k)]
        atoms = [Atom(p, (X,)) for p in parts]
        cover = OrF(tuple(atoms)) if len(atoms) != 1 else atoms[0]
        self.add(ForAll(X, Iff(Atom(s, (X,)), cover)))
        if src_kind is Kind.SET:
            for i in range(k):
                for j in range(i + 1, k):
                    self.add(ForAll(X, NotF(AndF((atoms[i], atoms[j])))))
            if isinstance(act, PartitionOf):
                pvars = []
                for p in parts:
                    self.set_weight(p, Poly.var(wvar(p)))
                    pvars.append(wvar(p))
                for a, b in zip(pvars, pvars[1:]):
                    self.conditions.append(
                        LinearCmp(((1, a), (-1, b)), "<=", 0))
                self.sigma.append(tuple(pvars))
            return
        assert src_kind is Kind.BAG, src_kind
        entities = self.pent(src)
        signatures: List[Tuple[str, ...]] = []
        for i, p in enumerate(parts):
            table: Dict[str, MultExpr] = {}
            sig = []
            for e in entities:
                bound = self.mult_bound(src, e)
                if bound <= 0:
                    continue
                pm = self.pred(f"partm[{name},{i},{e}]", 1)
                self.add(ForAll(X, Iff(Atom(pm, (X,)),
                                       AndF((Atom(p, (X,)),
                                             Atom(self.u_pred(e), (X,)))))))
                self.set_weight(pm, Poly.power_range(wvar(pm), 1, bound))
                table[e] = wvar(pm)
                sig.append(wvar(pm))
            self.part_mults[(name, i)] = table
            signatures.append(tuple(sig))
        for e in entities:
            if self.mult_bound(src, e) <= 0:
                continue
            terms = [(1, self.part_mults[(name, i)][e]) for i in range(k)]
            total = self.mult_expr(src, e)
            if isinstance(total, str):
                terms.append((-1, total))
                bound = 0
            else:
                bound = total
            self.conditions.append(LinearCmp(tuple(terms), "==", bound))
        if isinstance(act, PartitionOf):
            for a, b in zip(signatures, signatures[1:]):
                self.conditions.append(LexLeq(a, b))

    # -- constraints ------------------------------------------------------------

    def _constraint(self, c, positive: bool = True) -> None:
        from .problem import AndC, OrC, TrueC
        if isinstance(c, NotC):
            self._constraint(c.item, not positive)
            return
        if isinstance(c, TrueC):
            if not positive:
                self.add(Bot())
            return
        if isinstance(c, FalseC):
            if positive:
                self.add(Bot())
            return
        assert not isinstance(c, (AndC, OrC, ForParts)), \
            f"compound constraint reached the encoder: {type(c).__name__}"
        if isinstance(c, Member):
            atom = Atom(self.obj_pred(c.obj), (c.entity,))
            self.add(atom if positive else NotF(atom))
            return
        if isinstance(c, SubsetC):
            self._subset(c, positive)
            return
        if isinstance(c, DisjointC):
            l, r = self.obj_pred(c.lhs), self.obj_pred(c.rhs)
            f = ForAll(X, NotF(AndF((Atom(l, (X,)), Atom(r, (X,))))))
            self.add(f if positive else NotF(f))
            return
        if isinstance(c, EqC):
            self._equality(c, positive)
            return
        if isinstance(c, (IndexIs, IndexInC)):
            self._index_constraint(c, positive)
            return
        if isinstance(c, PatternC):
            self._pattern_constraint(c, positive)
            return
        raise AssertionError(f"unencodable constraint {type(c).__name__}")

    def _subset(self, c: SubsetC, positive: bool) -> None:
        lk, rk = self.problem.kind(c.lhs), self.problem.kind(c.rhs)
        l, r = self.obj_pred(c.lhs), self.obj_pred(c.rhs)
        sentence = ForAll(X, Implies(Atom(l, (X,)), Atom(r, (X,))))
        if lk is Kind.SET:
            # multiplicities are at most 1 on the left, so presence
            # containment is the whole story whatever the right side is
            self.add(sentence if positive else NotF(sentence))
            return
        if not positive:
            raise UnsupportedError(
                "negated sub-bag constraints are not supported (the "
                "positive form spans the sentence and the multiplicity "
                "system, and their disjunction has no encoding)")
        self.add(sentence)
        for e in self.pent(c.lhs):
            lm = self.mult_expr(c.lhs, e)
            rm = 1 if rk is Kind.SET else self.mult_expr(c.rhs, e)
            self.add_cmp(lm, "<=", rm)

    def _equality(self, c: EqC, positive: bool) -> None:
        lk = self.problem.kind(c.lhs)
        l, r = self.obj_pred(c.lhs), self.obj_pred(c.rhs)
        sentence = ForAll(X, Iff(Atom(l, (X,)), Atom(r, (X,))))
        if lk is Kind.SET:
            self.add(sentence if positive else NotF(sentence))
            return
        if not positive:
            raise UnsupportedError(
                "negated bag equality is not supported (the positive "
                "form spans the sentence and the multiplicity system)")
        self.add(sentence)
        for e in sorted(set(self.pent(c.lhs)) | set(self.pent(c.rhs))):
            self.add_cmp(self.mult_expr(c.lhs, e), "==",
                         self.mult_expr(c.rhs, e))

    def _index_constraint(self, c, positive: bool) -> None:
        obj = c.obj
        assert self.problem.kind(obj) is Kind.TUPLE
        i = c.index
        consts = self.idx_consts[obj]
        assert 0 <= i < len(consts), "out-of-range index survived folding"
        idx = self.pred(f"index[{obj},{i + 1}]", 1)
        self.add(*closed_world_evidence(idx, self.domain, {consts[i]}))
        f = self.pred(f"fun[{obj}]", 2)
        if isinstance(c, IndexIs):
            target = self.u_pred(c.entity)
        else:
            target = self.obj_pred(c.target)
        hit = Atom(target, (Y,))
        self.add(ForAll(X, ForAll(Y, Implies(
            AndF((Atom(idx, (X,)), Atom(f, (X, Y)))),
            hit if positive else NotF(hit)))))

    # -- patterns -----------------------------------------------------------------

    def _pattern_info(self, obj: str) -> _OrderInfo:
        info = self.order_info[obj]
        if info.circle and info.source_kind is Kind.BAG:
            raise UnsupportedError(
                "patterns on circles of bags are not supported (the "
                "rotation correction assumes no order-sensitive "
                "constraints)")
        return info

    def _group_pred(self, info: _OrderInfo, arg: Arg) -> Optional[str]:
        """The unary predicate holding the word positions (bag source)
        or word members (set source) of one pattern argument; None when
        the argument provably never occurs."""
        if info.source_kind is Kind.SET:
            if isinstance(arg, EntArg):
                return self.u_pred(arg.name)
            return self.obj_pred(arg.name)
        if isinstance(arg, EntArg):
            return info.pos.get(arg.name)
        content = self._static_content(arg.name)
        members = sorted(e for e in content if e in info.pos)
        if not members:
            return None
        g = self.pred(self.aux("grp", info.obj), 1)
        labels = [Atom(info.pos[e], (X,)) for e in members]
        body = OrF(tuple(labels)) if len(labels) != 1 else labels[0]
        self.add(ForAll(X, Iff(Atom(g, (X,)), body)))
        return g

    def _static_content(self, name: str) -> frozenset:
        act = self.problem.objects[name].action
        if not isinstance(act, Init):
            raise UnsupportedError(
                f"pattern argument {name!r} on a bag arrangement must "
                f"have a fixed value")
        value = act.value
        return frozenset(value.support()) if hasattr(value, "support") \
            else frozenset(value)

    def _arg_pent(self, info: _OrderInfo, arg: Arg) -> frozenset:
        if isinstance(arg, EntArg):
            return frozenset((arg.name,))
        return self.record.pent.get(arg.name, frozenset())

    def _pattern_constraint(self, c: PatternC, positive: bool) -> None:
        info = self._pattern_info(c.obj)
        p = c.pattern
        if isinstance(p, Together):
            self._together(info, p.arg, positive)
            return
        formulas = self._pattern_formulas(info, p)
        if positive:
            self.add(*formulas)
        elif not formulas:
            self.add(Bot())
        elif len(formulas) == 1:
            self.add(NotF(formulas[0]))
        else:
            self.add(NotF(AndF(tuple(formulas))))

    def _together(self, info: _OrderInfo, arg: Arg, positive: bool) -> None:
        g = self._group_pred(info, arg)
        if g is None:
            # the group never occurs: a block of nothing always holds
            if not positive:
                self.add(Bot())
            return
        first = self.pred(self.aux("first", info.obj), 1)
        body = AndF((
            Atom(g, (X,)), Atom(info.content, (X,)),
            ForAll(Y, Implies(Atom(g, (Y,)),
                              NotF(self._adj(info, Y, X))))))
        self.add(ForAll(X, Iff(Atom(first, (X,)), body)))
        self.set_weight(first, Poly.var(wvar(first)))
        cmp = "<=" if positive else ">="
        bound = 1 if positive else 2
        self.conditions.append(LinearCmp(((1, wvar(first)),), cmp, bound))

    def _pattern_formulas(self, info: _OrderInfo,
                          p: PatternIR) -> List[Formula]:
        """The positive encoding of a non-together pattern, as pure
        formulas so that negation stays expressible."""
        if isinstance(p, LessPat):
            return self._less_formulas(info, p)
        assert isinstance(p, (PredPat, NextToPat)), p
        g1 = self._group_pred(info, EntArg(p.first))
        g2 = self._group_pred(info, EntArg(p.second))
        d = info.content
        if g1 is None:
            return []   # no occurrence of the first entity: vacuous
        if g2 is None:
            # occurrences of the first entity can never be satisfied
            return [ForAll(X, NotF(AndF((Atom(g1, (X,)), Atom(d, (X,))))))]
        if isinstance(p, PredPat):
            witness = self._adj(info, X, Y)
        else:
            witness = OrF((self._adj(info, X, Y), self._adj(info, Y, X)))
        return [ForAll(X, Implies(
            AndF((Atom(g1, (X,)), Atom(d, (X,)))),
            Exists(Y, AndF((witness, Atom(g2, (Y,)), Atom(d, (Y,)))))))]

    def _less_formulas(self, info: _OrderInfo, p: LessPat) -> List[Formula]:
        assert not info.circle, "relative order rejected on circles upstream"
        g1 = self._group_pred(info, p.lhs)
        g2 = self._group_pred(info, p.rhs)
        if g1 is None or g2 is None:
            return []
        d = info.content
        out: List[Formula] = [ForAll(X, ForAll(Y, Implies(
            AndF((Atom(g1, (X,)), Atom(d, (X,)),
                  Atom(g2, (Y,)), Atom(d, (Y,)))),
            Atom(info.order, (X, Y)))))]
        # a shared entity inside the word sits in both groups at one
        # position, which the reflexive order atom fails to rule out
        shared = self._arg_pent(info, p.lhs) & self._arg_pent(info, p.rhs)
        for e in sorted(shared):
            if info.source_kind is Kind.SET:
                guards = [Atom(d, (e,))]
                for arg, g in ((p.lhs, g1), (p.rhs, g2)):
                    if isinstance(arg, ObjArg):
                        guards.append(Atom(g, (e,)))
                out.append(NotF(AndF(tuple(guards))
                                if len(guards) != 1 else guards[0]))
            else:
                pe = info.pos.get(e)
                if pe is not None:
                    out.append(ForAll(X, NotF(AndF(
                        (Atom(pe, (X,)), Atom(d, (X,)))))))
        return out

    # -- size constraints ----------------------------------------------------------

    def _size_constraint(self, c) -> None:
        positive = True
        while isinstance(c, NotC):
            c = c.item
            positive = not positive
        assert isinstance(c, SizeCmp)
        if not positive:
            c = c.negated()
        acc: Dict[str, Fraction] = {}
        order: List[str] = []
        bound = Fraction(c.bound)
        for coef, term in c.terms:
            shift, parts = self._size_term(term)
            bound -= coef * shift
            for mult, var in parts:
                if var not in acc:
                    acc[var] = Fraction(0)
                    order.append(var)
                acc[var] += coef * mult
        terms = tuple((acc[v], v) for v in order if acc[v] != 0)
        if not terms:
            from .problem import compare
            if not compare(Fraction(0), c.cmp, bound):
                self.add(Bot())
            return
        self.conditions.append(self._normalized(terms, c.cmp, bound))

    @staticmethod
    def _normalized(terms, cmp: str, bound: Fraction) -> LinearCmp:
        denom = bound.denominator
        for coef, _ in terms:
            denom = denom * coef.denominator // math.gcd(
                denom, coef.denominator)
        out = tuple((int(coef * denom), var) for coef, var in terms)
        return LinearCmp(out, cmp, int(bound * denom))

    def _size_term(self, term) -> Tuple[Fraction,
                                        List[Tuple[Fraction, str]]]:
        """A size atom as (constant, multiplier-variable pairs)."""
        one = Fraction(1)
        if isinstance(term, Card):
            return self._card_term(term.obj)
        if isinstance(term, CountTerm):
            return self._count_term(term)
        if isinstance(term, DedupTerm):
            kind = self.problem.kind(term.obj)
            assert kind is Kind.TUPLE, "dedup counts tuples only"
            f = self.pred(f"fun[{term.obj}]", 2)
            img = self._image_pred(term.obj, f)
            cnt = self.pred(self.aux("cnt", term.obj), 1)
            target = self.obj_pred(term.arg.name)
            self.add(ForAll(Y, Iff(Atom(cnt, (Y,)),
                                   AndF((Atom(img, (Y,)),
                                         Atom(target, (Y,)))))))
            self.set_weight(cnt, Poly.var(wvar(cnt)))
            return Fraction(0), [(one, wvar(cnt))]
        assert isinstance(term, PatCountTerm), term
        return Fraction(0), self._pat_count_term(term)

    def _card_term(self, obj: str) -> Tuple[Fraction,
                                            List[Tuple[Fraction, str]]]:
        kind = self.problem.kind(obj)
        one = Fraction(1)
        if kind is Kind.SET:
            s = self.obj_pred(obj)
            if s not in self.weights:
                self.set_weight(s, Poly.var(wvar(s)))
            return Fraction(0), [(one, wvar(s))]
        if kind is Kind.BAG:
            shift = Fraction(0)
            parts: List[Tuple[Fraction, str]] = []
            for e in self.pent(obj):
                ex = self.mult_expr(obj, e)
                if isinstance(ex, str):
                    parts.append((one, ex))
                else:
                    shift += ex
            return shift, parts
        if kind in (Kind.PARTITION, Kind.COMPOSITION):
            # the size of a grouping is the size of what it groups
            return self._card_term(self.problem.objects[obj].action.src)
        raise AssertionError(
            f"size of a {kind.value} reached the encoder unfolded")

    def _count_term(self, term: CountTerm
                    ) -> Tuple[Fraction, List[Tuple[Fraction, str]]]:
        obj, arg = term.obj, term.arg
        kind = self.problem.kind(obj)
        one = Fraction(1)
        if kind is Kind.BAG:
            if isinstance(arg, EntArg):
                ex = self.mult_expr(obj, arg.name)
                if isinstance(ex, str):
                    return Fraction(0), [(one, ex)]
                return Fraction(ex), []
            # count over a set argument: sum the multiplicities of the
            # argument's members, which needs the membership to be fixed
            content = self._static_content(arg.name)
            shift = Fraction(0)
            parts: List[Tuple[Fraction, str]] = []
            for e in sorted(content):
                ex = self.mult_expr(obj, e)
                if isinstance(ex, str):
                    parts.append((one, ex))
                else:
                    shift += ex
            return shift, parts
        assert kind is Kind.TUPLE, f"count on a {kind.value} survived folding"
        f = self.pred(f"fun[{obj}]", 2)
        if isinstance(arg, EntArg):
            if arg.name not in self.record.pent.get(obj, frozenset()):
                return Fraction(0), []
            target = self.u_pred(arg.name)
        else:
            target = self.obj_pred(arg.name)
        cnt = self.pred(self.aux("cnt", obj), 1)
        self.add(ForAll(X, Iff(Atom(cnt, (X,)),
                               Exists(Y, AndF((Atom(f, (X, Y)),
                                               Atom(target, (Y,))))))))
        self.set_weight(cnt, Poly.var(wvar(cnt)))
        return Fraction(0), [(one, wvar(cnt))]

    def _pat_count_term(self, term: PatCountTerm
                        ) -> List[Tuple[Fraction, str]]:
        info = self._pattern_info(term.obj)
        p = term.pattern
        one = Fraction(1)
        d = info.content
        if isinstance(p, LessPat):
            g1 = self._group_pred(info, p.lhs)
            g2 = self._group_pred(info, p.rhs)
            if g1 is None or g2 is None:
                return []
            cnt = self.pred(self.aux("cnt", info.obj), 2)
            self.add(ForAll(X, ForAll(Y, Iff(Atom(cnt, (X, Y)), AndF((
                Atom(g1, (X,)), Atom(d, (X,)),
                Atom(g2, (Y,)), Atom(d, (Y,)),
                Atom(info.order, (X, Y))))))))
            self.set_weight(cnt, Poly.var(wvar(cnt)))
            parts = [(one, wvar(cnt))]
            if self._arg_pent(info, p.lhs) & self._arg_pent(info, p.rhs):
                diag = self.pred(self.aux("cnt", info.obj), 1)
                self.add(ForAll(X, Iff(Atom(diag, (X,)), AndF((
                    Atom(g1, (X,)), Atom(g2, (X,)), Atom(d, (X,)))))))
                self.set_weight(diag, Poly.var(wvar(diag)))
                parts.append((-one, wvar(diag)))
            return parts
        assert isinstance(p, (PredPat, NextToPat)), p
        g1 = self._group_pred(info, EntArg(p.first))
        g2 = self._group_pred(info, EntArg(p.second))
        if g1 is None or g2 is None:
            return []
        if isinstance(p, PredPat):
            witness = self._adj(info, X, Y)
            scale = one
        else:
            witness = OrF((self._adj(info, X, Y), self._adj(info, Y, X)))
            # tiny circles have a doubled adjacency: with one or two
            # members, each matching edge is seen from both directions
            scale = Fraction(2) if info.circle and info.k <= 2 else one
        cnt = self.pred(self.aux("cnt", info.obj), 2)
        self.add(ForAll(X, ForAll(Y, Iff(Atom(cnt, (X, Y)), AndF((
            Atom(g1, (X,)), Atom(d, (X,)),
            Atom(g2, (Y,)), Atom(d, (Y,)),
            witness))))))
        self.set_weight(cnt, Poly.var(wvar(cnt)))
        return [(scale, wvar(cnt))]

    # -- assembly ------------------------------------------------------------------

    def _build(self) -> EncodedInstance:
        sentence = Sentence(self.conjuncts, self.predicates)
        system = CoeffSystem(tuple(self.conditions))
        weighted = set()
        for wpos, wneg in self.weights.values():
            weighted |= wpos.variables() | wneg.variables()
        for cond in self.conditions:
            for var in _condition_vars(cond):
                assert var in weighted, \
                    f"system variable {var} carries no weight"
        return EncodedInstance(
            sentence=sentence,
            domain=tuple(self.domain),
            weights=dict(self.weights),
            system=system,
            overcount=self.overcount,
            sigma=tuple(self.sigma),
            circle=self.circle_meta,
        )


def _condition_vars(cond: Condition) -> List[str]:
    if isinstance(cond, LinearCmp):
        return [v for _, v in cond.terms]
    if isinstance(cond, (EqMin, EqMax, EqFloorDiff)):
        return [cond.target, cond.lhs, cond.rhs]
    if isinstance(cond, EqSum):
        return [cond.target, *cond.parts]
    assert isinstance(cond, LexLeq), cond
    return [*cond.lhs, *cond.rhs]


def encode(problem: CountingProblem,
           record: AnalysisRecord) -> EncodedInstance:
    """Compile an atomic, sanity-checked branch into a counting instance."""
    return _Encoder(problem, record).run()


# ---------------------------------------------------------------------------
# instance dumps

def _fmt(f) -> str:
    if isinstance(f, Atom):
        return repr(f)
    if isinstance(f, NotF):
        return f"~{_fmt(f.body)}"
    if isinstance(f, AndF):
        return "(" + " & ".join(_fmt(i) for i in f.items) + ")"
    if isinstance(f, OrF):
        return "(" + " | ".join(_fmt(i) for i in f.items) + ")"
    if isinstance(f, Implies):
        return f"({_fmt(f.left)} -> {_fmt(f.right)})"
    if isinstance(f, Iff):
        return f"({_fmt(f.left)} <-> {_fmt(f.right)})"
    if isinstance(f, ForAll):
        return f"forall {f.var}: {_fmt(f.body)}"
    if isinstance(f, Exists):
        return f"exists {f.var}: {_fmt(f.body)}"
    if isinstance(f, Bot):
        return "false"
    type_name = type(f).__name__
    if type_name == "Top":
        return "true"
    if type_name == "Eq":
        return f"{f.left} = {f.right}"
    assert type_name == "AtMost", type_name
    return f"atmost {f.k} {f.var}: {_fmt(f.body)}"


def _fmt_condition(cond: Condition) -> str:
    if isinstance(cond, LinearCmp):
        bits = " + ".join(v if c == 1 else f"{c}*{v}" for c, v in cond.terms)
        return f"{bits or 0} {cond.cmp} {cond.bound}"
    if isinstance(cond, EqMin):
        return f"{cond.target} == min({cond.lhs}, {cond.rhs})"
    if isinstance(cond, EqMax):
        return f"{cond.target} == max({cond.lhs}, {cond.rhs})"
    if isinstance(cond, EqFloorDiff):
        return f"{cond.target} == monus({cond.lhs}, {cond.rhs})"
    if isinstance(cond, EqSum):
        return f"{cond.target} == " + " + ".join(cond.parts)
    assert isinstance(cond, LexLeq), cond
    return f"({', '.join(cond.lhs)}) lex<= ({', '.join(cond.rhs)})"


def _fmt_poly(p: Poly) -> str:
    if not p.terms:
        return "0"
    bits = []
    for mono, coef in sorted(p.terms.items()):
        body = "*".join(v if e == 1 else f"{v}^{e}" for v, e in mono)
        if not body:
            bits.append(str(coef))
        elif coef == 1:
            bits.append(body)
        else:
            bits.append(f"{coef}*{body}")
    return " + ".join(bits)


def instance_sections(instance: EncodedInstance) -> Dict[str, list]:
    """The dump contents as plain data, shared by the text and JSON
    renderings.  Ordering is canonical: domain order for entities,
    name order for predicates, emission order (which is deterministic)
    for sentences and system entries."""
    sent = instance.sentence
    by_pred: Dict[str, Dict[str, bool]] = {}
    for ev in sent.evidence():
        by_pred.setdefault(ev.pred, {})[ev.entity] = ev.positive
    domain_pos = {e: i for i, e in enumerate(instance.domain)}
    evidence = []
    for pred in sorted(by_pred):
        marks = sorted(by_pred[pred].items(), key=lambda kv: domain_pos[kv[0]])
        evidence.append((pred, [("+" if pos else "-") + e
                                for e, pos in marks]))
    axioms = []
    formulas = [_fmt(f) for f in sent.formulas()]
    card_atoms = list(sent.cardinality_atoms())
    for ax in sent.axioms():
        if isinstance(ax, Linear):
            axioms.append(f"linear({ax.order}, {ax.pred})")
        elif isinstance(ax, Func):
            kind = {"Func": "func", "FuncInj": "func_inj",
                    "FuncSurj": "func_surj", "FuncBij": "func_bij"}[
                        type(ax).__name__]
            axioms.append(f"{kind}({ax.f}: {ax.dom} -> {ax.codom})")
            fs, cas, _ = expand_func_axiom(ax)
            formulas.extend(_fmt(f) for f in fs)
            card_atoms.extend(cas)
        else:
            axioms.append(f"circle({ax.pred})")
    cardinality = []
    for ca in card_atoms:
        bits = " + ".join(f"|{p}|" if c == 1 else f"{c}*|{p}|"
                          for c, p in ca.terms)
        cardinality.append(f"{bits} {ca.cmp} {ca.bound}")
    weights = []
    for pred in sorted(instance.weights):
        wpos, wneg = instance.weights[pred]
        weights.append(f"{pred}: {_fmt_poly(wpos)} / {_fmt_poly(wneg)}")
    out = {
        "domain": list(instance.domain),
        "evidence": [f"{pred}: {' '.join(marks)}"
                     for pred, marks in evidence],
        "sentences": formulas,
        "axioms": axioms,
        "cardinality": cardinality,
        "weights": weights,
        "system": [_fmt_condition(c) for c in instance.system.conditions],
        "overcount": [str(instance.overcount)],
        "sigma": [f"({', '.join(group)})" for group in instance.sigma],
    }
    if instance.circle is not None:
        kind = "bracelet" if instance.circle.reflection else "necklace"
        out["circle"] = [f"{kind}({', '.join(instance.circle.pos_vars)})"]
    return out


def dump_instance(instance: EncodedInstance) -> str:
    """Human-readable canonical dump; byte-identical for equal branches."""
    lines = []
    for section, rows in instance_sections(instance).items():
        if section == "domain":
            lines.append("domain: " + " ".join(rows))
            continue
        if not rows:
            continue
        if len(rows) == 1 and section == "overcount":
            lines.append(f"{section}: {rows[0]}")
            continue
        lines.append(f"{section}:")
        lines.extend(f"  {row}" for row in rows)
    return "\n".join(lines) + "\n"

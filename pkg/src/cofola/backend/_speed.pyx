# cython: language_level=3
"""Compiled weighted model-count kernel.

A near-literal translation of ``_pykernel`` with typed loop indices
and C-level branching; the contract and the results are identical,
only the constant factor changes.  Coefficients stay Python ints so
arbitrarily large counts survive; exponents fit a C long comfortably
(they are bounded by domain sizes).  See the pure module for the
algorithm notes.
"""

ONE = {(): 1}


cdef tuple _mono_mul(tuple m1, tuple m2):
    if not m1:
        return m2
    if not m2:
        return m1
    cdef list out = []
    cdef Py_ssize_t i = 0, j = 0
    cdef Py_ssize_t n1 = len(m1), n2 = len(m2)
    cdef tuple p1, p2
    cdef object v1, v2
    while i < n1 and j < n2:
        p1 = <tuple> m1[i]
        p2 = <tuple> m2[j]
        v1 = p1[0]
        v2 = p2[0]
        if v1 == v2:
            out.append((v1, p1[1] + p2[1]))
            i += 1
            j += 1
        elif v1 < v2:
            out.append(p1)
            i += 1
        else:
            out.append(p2)
            j += 1
    if i < n1:
        out.extend(m1[i:])
    if j < n2:
        out.extend(m2[j:])
    return tuple(out)


cdef dict _padd(dict a, dict b):
    if not a:
        return b
    if not b:
        return a
    cdef dict out = dict(a)
    cdef object m, c, s
    for m, c in b.items():
        s = out.get(m, 0) + c
        if s:
            out[m] = s
        else:
            del out[m]
    return out


cdef dict _pmul(dict a, dict b):
    if a is ONE:
        return b
    if b is ONE:
        return a
    if not a or not b:
        return {}
    cdef dict out = {}
    cdef object m1, c1, m2, c2, m, s
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            m = _mono_mul(<tuple> m1, <tuple> m2)
            s = out.get(m, 0) + c1 * c2
            if s:
                out[m] = s
            else:
                del out[m]
    return out


cdef list _apply(list clauses, dict assignment):
    """Drop satisfied clauses, strip false literals; None on conflict."""
    cdef list out = []
    cdef list keep
    cdef bint sat
    cdef long lit
    cdef tuple cl
    cdef object lit_obj, val
    for cl in clauses:
        keep = []
        sat = False
        for lit_obj in cl:
            lit = lit_obj
            val = assignment.get(lit if lit > 0 else -lit)
            if val is None:
                keep.append(lit_obj)
            elif (val is True) == (lit > 0):
                sat = True
                break
        if sat:
            continue
        if not keep:
            return None
        out.append(tuple(keep))
    return out


cdef long _find(dict parent, long x):
    cdef long p
    while True:
        p = parent[x]
        if p == x:
            return x
        parent[x] = parent[p]
        x = parent[p]


cdef list _components(list clauses):
    cdef dict parent = {}
    cdef tuple cl
    cdef long a, root, r
    cdef object lit
    for cl in clauses:
        for lit in cl:
            a = abs(<long> lit)
            if a not in parent:
                parent[a] = a
        root = _find(parent, abs(<long> cl[0]))
        for lit in cl[1:]:
            r = _find(parent, abs(<long> lit))
            if r != root:
                parent[r] = root
    cdef dict groups = {}
    cdef object entry
    for cl in clauses:
        root = _find(parent, abs(<long> cl[0]))
        entry = groups.get(root)
        if entry is None:
            entry = ([], set())
            groups[root] = entry
        (<list> entry[0]).append(cl)
        for lit in cl:
            (<set> entry[1]).add(abs(<long> lit))
    return list(groups.values())


cdef long _pick(list clauses):
    """Most frequent atom within a shortest clause."""
    cdef tuple best = clauses[0]
    cdef tuple cl
    cdef Py_ssize_t k
    for k in range(1, len(clauses)):
        cl = <tuple> clauses[k]
        if len(cl) < len(best):
            best = cl
    cdef dict counts = {}
    cdef object lit
    cdef long a, choice = 0
    cdef long seen = -1, c
    for cl in clauses:
        for lit in cl:
            a = abs(<long> lit)
            counts[a] = counts.get(a, 0) + 1
    for lit in best:
        a = abs(<long> lit)
        c = counts[a]
        if c > seen:
            choice = a
            seen = c
    return choice


cdef dict _count(list clauses, frozenset alive, list weights):
    cdef dict factor = ONE
    cdef object unit_obj
    cdef long unit, atom
    cdef bint val
    cdef tuple cl, pair
    while True:
        unit_obj = None
        for cl in clauses:
            if len(cl) == 1:
                unit_obj = cl[0]
                break
        if unit_obj is None:
            break
        unit = unit_obj
        atom = unit if unit > 0 else -unit
        val = unit > 0
        pair = <tuple> weights[atom - 1]
        factor = _pmul(factor, <dict> pair[0 if val else 1])
        alive = alive - {atom}
        clauses = _apply(clauses, {atom: val})
        if clauses is None:
            return {}
    cdef object a_obj
    cdef dict sub, total, reduced_total
    cdef list reduced
    if not clauses:
        for a_obj in alive:
            pair = <tuple> weights[<long> a_obj - 1]
            factor = _pmul(factor, _padd(<dict> pair[0], <dict> pair[1]))
        return factor
    cdef list comps = _components(clauses)
    cdef object comp
    cdef set covered
    if len(comps) > 1:
        covered = set()
        for comp in comps:
            covered |= <set> comp[1]
            sub = _count(<list> comp[0], frozenset(<set> comp[1]), weights)
            if not sub:
                return {}
            factor = _pmul(factor, sub)
        for a_obj in alive - covered:
            pair = <tuple> weights[<long> a_obj - 1]
            factor = _pmul(factor, _padd(<dict> pair[0], <dict> pair[1]))
        return factor
    atom = _pick(clauses)
    total = {}
    pair = <tuple> weights[atom - 1]
    for val in (True, False):
        reduced = _apply(clauses, {atom: val})
        if reduced is None:
            continue
        sub = _count(reduced, alive - {atom}, weights)
        if not sub:
            continue
        total = _padd(total, _pmul(sub, <dict> pair[0 if val else 1]))
    if not total:
        return {}
    return _pmul(factor, total)


def count_clauses(n_atoms, clauses, weights, fixed):
    cdef dict factor = ONE
    cdef list wlist = [tuple(w) for w in weights]
    cdef dict fdict = {a: bool(v) for a, v in dict(fixed).items()}
    cdef object atom_obj, val
    cdef tuple pair
    for atom_obj, val in fdict.items():
        pair = <tuple> wlist[<long> atom_obj - 1]
        factor = _pmul(factor, <dict> pair[0 if val else 1])
    cdef list reduced = _apply([tuple(cl) for cl in clauses], fdict)
    if reduced is None:
        return {}
    alive = frozenset(range(1, n_atoms + 1)) - set(fdict)
    return _pmul(factor, _count(reduced, alive, wlist))

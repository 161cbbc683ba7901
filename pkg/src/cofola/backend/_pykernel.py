"""Reference weighted model-count kernel, pure Python.

The kernel speaks plain data so the compiled twin can mirror it
exactly: atoms are 1-based ints, clauses are tuples of signed ints,
and a weight is a sparse polynomial dict mapping a monomial (sorted
tuple of (variable, exponent) pairs) to a nonzero integer coefficient.

count_clauses sums, over all total assignments that extend ``fixed``
and satisfy every clause, the product of per-atom weights (the first
polynomial of the pair when the atom is true, the second when false).
Search is DPLL-style: unit propagation, connected-component splits,
then branching; weights of unconstrained atoms fold in as (w + w̄).
"""

ONE = {(): 1}


def _mono_mul(m1, m2):
    if not m1:
        return m2
    if not m2:
        return m1
    out = []
    i = j = 0
    n1, n2 = len(m1), len(m2)
    while i < n1 and j < n2:
        v1, e1 = m1[i]
        v2, e2 = m2[j]
        if v1 == v2:
            out.append((v1, e1 + e2))
            i += 1
            j += 1
        elif v1 < v2:
            out.append(m1[i])
            i += 1
        else:
            out.append(m2[j])
            j += 1
    out.extend(m1[i:])
    out.extend(m2[j:])
    return tuple(out)


def _padd(a, b):
    if not a:
        return b
    if not b:
        return a
    out = dict(a)
    for m, c in b.items():
        s = out.get(m, 0) + c
        if s:
            out[m] = s
        else:
            del out[m]
    return out


def _pmul(a, b):
    if a is ONE:
        return b
    if b is ONE:
        return a
    if not a or not b:
        return {}
    out = {}
    for m1, c1 in a.items():
        for m2, c2 in b.items():
            m = _mono_mul(m1, m2)
            s = out.get(m, 0) + c1 * c2
            if s:
                out[m] = s
            else:
                del out[m]
    return out


def _apply(clauses, assignment):
    """Drop satisfied clauses, strip false literals; None on conflict."""
    out = []
    for cl in clauses:
        keep = []
        sat = False
        for lit in cl:
            val = assignment.get(lit if lit > 0 else -lit)
            if val is None:
                keep.append(lit)
            elif (lit > 0) == val:
                sat = True
                break
        if sat:
            continue
        if not keep:
            return None
        out.append(tuple(keep))
    return out


def _components(clauses):
    parent = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for cl in clauses:
        atoms = [abs(l) for l in cl]
        for a in atoms:
            parent.setdefault(a, a)
        root = find(atoms[0])
        for a in atoms[1:]:
            r = find(a)
            if r != root:
                parent[r] = root
    groups = {}
    for cl in clauses:
        root = find(abs(cl[0]))
        if root not in groups:
            groups[root] = ([], set())
        groups[root][0].append(cl)
        groups[root][1].update(abs(l) for l in cl)
    return list(groups.values())


def _pick(clauses):
    """Most frequent atom within a shortest clause."""
    best = min(clauses, key=len)
    counts = {}
    for cl in clauses:
        for lit in cl:
            a = abs(lit)
            counts[a] = counts.get(a, 0) + 1
    choice, seen = 0, -1
    for lit in best:
        a = abs(lit)
        if counts[a] > seen:
            choice, seen = a, counts[a]
    return choice


def _count(clauses, alive, weights):
    factor = ONE
    while True:
        unit = None
        for cl in clauses:
            if len(cl) == 1:
                unit = cl[0]
                break
        if unit is None:
            break
        atom, val = abs(unit), unit > 0
        factor = _pmul(factor, weights[atom - 1][0 if val else 1])
        alive = alive - {atom}
        clauses = _apply(clauses, {atom: val})
        if clauses is None:
            return {}
    if not clauses:
        for a in alive:
            pos, neg = weights[a - 1]
            factor = _pmul(factor, _padd(pos, neg))
        return factor
    comps = _components(clauses)
    if len(comps) > 1:
        covered = set()
        for comp_clauses, comp_atoms in comps:
            covered |= comp_atoms
            sub = _count(comp_clauses, frozenset(comp_atoms), weights)
            if not sub:
                return {}
            factor = _pmul(factor, sub)
        for a in alive - covered:
            pos, neg = weights[a - 1]
            factor = _pmul(factor, _padd(pos, neg))
        return factor
    atom = _pick(clauses)
    total = {}
    for val in (True, False):
        reduced = _apply(clauses, {atom: val})
        if reduced is None:
            continue
        sub = _count(reduced, alive - {atom}, weights)
        if not sub:
            continue
        total = _padd(total, _pmul(sub, weights[atom - 1][0 if val else 1]))
    if not total:
        return {}
    return _pmul(factor, total)


def count_clauses(n_atoms, clauses, weights, fixed):
    factor = ONE
    for atom, val in fixed.items():
        factor = _pmul(factor, weights[atom - 1][0 if val else 1])
    reduced = _apply([tuple(cl) for cl in clauses], fixed)
    if reduced is None:
        return {}
    alive = frozenset(range(1, n_atoms + 1)) - set(fixed)
    result = _pmul(factor, _count(reduced, alive, weights))
    return result

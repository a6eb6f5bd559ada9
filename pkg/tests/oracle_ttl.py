"""Exhaustive bounded-depth search over the literal TTL rules.

Shares only the formula data types with the package.  Every rule instance is
applied with exact index names; counit rules may pick as new name any index
bound in the goal or one fresh name.  A sequent is reported derivable when
some derivation of height at most ``depth`` exists.
"""

from __future__ import annotations

from itertools import combinations

from tensorlogic.formulas import Atom, Par, Tensor


def _neg(f):
    if isinstance(f, Atom):
        return Atom(f.name, not f.neg, f.lower, f.upper)
    if isinstance(f, Tensor):
        return Par(_neg(f.left), _neg(f.right))
    return Tensor(_neg(f.left), _neg(f.right))


def _occ(f, which):
    if isinstance(f, Atom):
        return list(f.upper if which == "u" else f.lower)
    return _occ(f.left, which) + _occ(f.right, which)


def _free(f):
    u, l = _occ(f, "u"), _occ(f, "l")
    return set(u) - set(l), set(l) - set(u)


def _bound(f):
    return set(_occ(f, "u")) & set(_occ(f, "l"))


def _ren(f, which, old, new):
    if isinstance(f, Atom):
        up = tuple(new if (which in "ub" and x == old) else x for x in f.upper)
        lo = tuple(new if (which in "lb" and x == old) else x for x in f.lower)
        return Atom(f.name, f.neg, up, lo)
    return type(f)(_ren(f.left, which, old, new), _ren(f.right, which, old, new))


def _fresh(taken):
    k = 0
    while f"#{k}" in taken:
        k += 1
    return f"#{k}"


def _names(seq):
    out = set()
    for f in seq:
        out |= set(_occ(f, "u")) | set(_occ(f, "l"))
    return out


def _subst(f, which, old, new, taken):
    """Replace the free ``which``-occurrence of ``old`` by ``new``, renaming a captured binder."""
    fu, fl = _free(f)
    if new in fu or new in fl:
        return None
    if new in _bound(f):
        f = _ren(f, "b", new, _fresh(taken | _names([f]) | {new, old}))
    return _ren(f, which, old, new)


def _ok(seq):
    ups, lows = [], []
    for f in seq:
        u, l = _free(f)
        ups += u
        lows += l
    return len(ups) == len(set(ups)) and len(lows) == len(set(lows)) and set(ups) == set(lows)


def _balanced(seq):
    count = {}
    for f in seq:
        for a in _atoms(f):
            if a.name != "1":
                count[a.name] = count.get(a.name, 0) + (-1 if a.neg else 1)
    return not any(count.values())


def _atoms(f):
    if isinstance(f, Atom):
        return [f]
    return _atoms(f.left) + _atoms(f.right)


def _erase(f):
    if isinstance(f, Atom):
        return ("~" if f.neg else "") + f.name + f"/{len(f.upper)}{len(f.lower)}"
    return "(" + _erase(f.left) + (" * " if isinstance(f, Tensor) else " | ") + _erase(f.right) + ")"


def _canon(seq):
    """Rename all indices consistently by first occurrence after sorting on shape.

    A global bijective renaming maps rule instances to rule instances, so the
    search may continue on the renamed sequent.  Ties make this only a partial
    canonical form, which costs memo hits but nothing else.
    """
    order = sorted(seq, key=lambda f: (_erase(f), str(f)))
    names = {}
    for f in order:
        for a in _atoms(f):
            for x in a.upper + a.lower:
                names.setdefault(x, f"x{len(names)}")
    return tuple(_map_all(f, names) for f in order)


def _map_all(f, names):
    if isinstance(f, Atom):
        return Atom(f.name, f.neg, tuple(names[x] for x in f.upper), tuple(names[x] for x in f.lower))
    return type(f)(_map_all(f.left, names), _map_all(f.right, names))


def _key(seq):
    return tuple(str(f) for f in seq)


def _is_bot(f):
    return isinstance(f, Atom) and f.name == "1" and f.neg


def _bot(up, low):
    return Atom("1", True, (up,), (low,))


class Oracle:
    """Least-fixpoint derivability over the finite space of backward states.

    ``extra_counits`` caps how many counits a sequent may carry beyond the
    goal's; ``max_states`` aborts runaway explorations.
    """

    def __init__(self, extra_counits=2, max_states=200_000):
        self.extra = extra_counits
        self.max_states = max_states
        self.cap = 0

    def derivable(self, formulas):
        seq = tuple(formulas)
        if not _ok(seq) or not _balanced(seq):
            return False
        self.cap = sum(1 for f in seq if _is_bot(f)) + self.extra
        start = _canon(seq)
        rules = {}
        todo = [start]
        while todo:
            cur = todo.pop()
            key = _key(cur)
            if key in rules:
                continue
            if len(rules) >= self.max_states:
                raise RuntimeError("oracle state space too large")
            inst = []
            for prem in self._backward(cur):
                keys = []
                for p in prem:
                    c = _canon(p)
                    keys.append(_key(c))
                    todo.append(c)
                inst.append(keys)
            rules[key] = inst
        proved = set()
        changed = True
        while changed:
            changed = False
            for key, inst in rules.items():
                if key not in proved and any(all(k in proved for k in ks) for ks in inst):
                    proved.add(key)
                    changed = True
        return _key(start) in proved

    def _backward(self, seq):
        seq = list(seq)
        if len(seq) == 2 and _neg(seq[0]) == seq[1]:
            yield []
            return
        taken = _names(seq)
        free = set()
        for f in seq:
            u, _ = _free(f)
            free |= u
        bound = set().union(*(_bound(f) for f in seq))
        for k, f in enumerate(seq):
            rest = seq[:k] + seq[k + 1:]
            if isinstance(f, Par):
                p = rest + [f.left, f.right]
                if _ok(p):
                    yield [p]
            elif isinstance(f, Tensor):
                n = len(rest)
                for r in range(n + 1):
                    for left in combinations(range(n), r):
                        g1 = [rest[x] for x in left] + [f.left]
                        g2 = [rest[x] for x in range(n) if x not in left] + [f.right]
                        if _ok(g1) and _ok(g2) and _balanced(g1):
                            yield [g1, g2]
            if _is_bot(f):
                # conclusion |- G, bot^j_i, A^[i/j] from |- G, A
                j, i = f.upper[0], f.lower[0]
                for m, y in enumerate(rest):
                    if i in _free(y)[0]:
                        y2 = _subst(y, "u", i, j, taken)
                        p = rest[:m] + rest[m + 1:] + [y2]
                        if y2 is not None and _ok(p):
                            yield [p]
            # conclusion |- G, A_[i/j] from |- G, A, bot^j_i
            if sum(1 for g in seq if _is_bot(g)) >= self.cap:
                continue
            for i in _free(f)[1]:
                for j in sorted(bound | {_fresh(taken)}):
                    if j in free:
                        continue
                    f2 = _subst(f, "l", i, j, taken)
                    if f2 is not None and _ok(p := rest + [f2, _bot(j, i)]):
                        yield [p]


def oracle_derivable(formulas, extra_counits=2):
    return Oracle(extra_counits).derivable(formulas)

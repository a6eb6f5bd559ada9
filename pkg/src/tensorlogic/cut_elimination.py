"""Cut elimination for classical tensor logic derivations.

Cuts are removed topmost first.  A cut whose premise is an axiom is erased;
a cut whose formula is not touched by the last rule of one premise is
permuted upwards into that premise; a cut on a formula last modified by a
counit rule is pushed above that rule after renaming the affected indices
fresh; a cut between a tensor and the matching par is split into two cuts
on the components.

The intermediate trees live in the primed system, where a tensor or par
node may bind different names than its premises use.  Those nodes are
expanded back into plain steps at the end by renaming chains, so the
result uses only the primitive rules and has exactly the input conclusion.
"""

from __future__ import annotations

from dataclasses import dataclass

from .formulas import Formula, alpha_eq, bot, dual, rename_free
from .sequents import (
    Derivation,
    RuleTag,
    Sequent,
    System,
    make_counit_expand,
    make_counit_reduce,
    make_par,
    make_tensor,
    rename_derivation,
    similarity_derivation,
    validate_derivation,
)
from .terms import LOWER, UPPER, Index, fresh_index

_TENSORS = (RuleTag.TENSOR, RuleTag.TENSOR_ALPHA)
_PARS = (RuleTag.PAR, RuleTag.PAR_ALPHA)
_COUNITS = (RuleTag.COUNIT_EXPAND, RuleTag.COUNIT_REDUCE)


class CutEliminationError(ValueError):
    pass


@dataclass
class CutStats:
    side_steps: int = 0
    counit_steps: int = 0
    principal_steps: int = 0
    axiom_steps: int = 0

    def reset(self) -> None:
        self.side_steps = self.counit_steps = self.principal_steps = self.axiom_steps = 0


STATS = CutStats()


def _components(d: Derivation) -> tuple[Formula, Formula]:
    f = d.data["formula"]
    return d.data.get("left", f.left), d.data.get("right", f.right)


def _positions(f: Formula) -> list[Index]:
    out = []
    for at in f.atoms():
        out.extend(at.upper)
        out.extend(at.lower)
    return out


def _align(a: Formula, b: Formula) -> dict[Index, Index]:
    """Name correspondence between two formulas of the same shape."""
    return dict(zip(_positions(a), _positions(b)))


def _replace(s: Sequent, old: Formula, new: Formula) -> Sequent:
    rest = s.without(old)
    return Sequent(rest + [new])


# ---------------------------------------------------------------------------
# changing bound names of a conclusion formula


def realpha(d: Derivation, old: Formula, new: Formula) -> Derivation:
    """Rewrite cut-free ``d`` so that ``old`` in its conclusion reads ``new``.

    ``new`` must be an alpha-variant of ``old``.  The change is absorbed by
    the nearest counit step (whose result is compared up to bound names) or
    by re-labelling the binders of a tensor or par step.
    """
    if old == new:
        return d
    if not alpha_eq(old, new):
        raise CutEliminationError(f"{new} is not an alpha-variant of {old}")
    rule = d.rule
    data = dict(d.data)
    concl = _replace(d.conclusion, old, new)
    if rule in _COUNITS and data["result"] == old:
        data["result"] = new
        return Derivation(concl, rule, d.premises, data)
    if rule in _TENSORS + _PARS and data["formula"] == old:
        left, right = _components(d)
        cross_new = new.cross
        back = {k: v for k, v in _align(new, old).items() if k in cross_new}
        old_map = _align(old.left, left)
        old_map.update(_align(old.right, right))
        to_prem = {k: old_map[v] for k, v in back.items()}
        nl, nr = rename_free(new.left, to_prem), rename_free(new.right, to_prem)
        if rule in _TENSORS:
            p1, p2 = d.premises
            p1, p2 = realpha(p1, left, nl), realpha(p2, right, nr)
            return make_tensor(p1, p2, nl, nr, result=new)
        (p0,) = d.premises
        p0 = realpha(realpha(p0, left, nl), right, nr)
        return make_par(p0, nl, nr, result=new)
    for k, p in enumerate(d.premises):
        if old in p.conclusion and not _is_active(d, k, old):
            prem = list(d.premises)
            prem[k] = realpha(p, old, new)
            return Derivation(concl, rule, tuple(prem), data)
    raise CutEliminationError(f"cannot trace {old} upwards through {rule.value}")


def _is_active(d: Derivation, k: int, f: Formula) -> bool:
    """Is ``f`` consumed by the rule at ``d`` from premise ``k``?"""
    rule = d.rule
    if rule in _TENSORS:
        left, right = _components(d)
        return f == (left if k == 0 else right) and d.premises[k].conclusion.counter[f] == 1
    if rule in _PARS:
        left, right = _components(d)
        return f in (left, right) and d.premises[k].conclusion.counter[f] == 1
    if rule in _COUNITS:
        a = d.data["formula"]
        j, i = d.data["upper"], d.data["lower"]
        used = {a} | ({bot(j, i)} if rule is RuleTag.COUNIT_REDUCE else set())
        return f in used and d.premises[k].conclusion.counter[f] == 1
    return False


def fix_conclusion(d: Derivation, target: Sequent) -> Derivation:
    """Align the bound names of ``d``'s conclusion with ``target`` using plain rules."""
    return to_plain(_fix(d, target))


def _fix(d: Derivation, target: Sequent) -> Derivation:
    have = list(d.conclusion.formulas)
    want = list(target.formulas)
    for f in list(want):
        if f in have:
            have.remove(f)
            want.remove(f)
    for f in want:
        for g in have:
            if alpha_eq(f, g):
                have.remove(g)
                d = realpha(d, g, f)
                break
        else:
            raise CutEliminationError(f"{f} has no alpha-variant in {d.conclusion}")
    return d


# ---------------------------------------------------------------------------
# cut reduction


def _involves(d: Derivation, f: Formula) -> bool:
    rule = d.rule
    if rule is RuleTag.ID:
        return True
    if rule in _TENSORS + _PARS:
        return d.data["formula"] == f
    if rule is RuleTag.COUNIT_EXPAND:
        return f in (d.data["result"], bot(d.data["upper"], d.data["lower"]))
    if rule is RuleTag.COUNIT_REDUCE:
        return d.data["result"] == f
    raise CutEliminationError(f"rule {rule.value} is not supported by cut elimination")


def _reduce(p: Derivation, q: Derivation, a: Formula) -> Derivation:
    """Cut-free derivation of the cut of ``p`` (containing ``a``) and ``q``."""
    if p.rule is RuleTag.ID:
        STATS.axiom_steps += 1
        return q
    if q.rule is RuleTag.ID:
        STATS.axiom_steps += 1
        return p
    na = dual(a)
    for x, y, f in ((p, q, a), (q, p, na)):
        if not _involves(x, f):
            return _permute(x, y, f)
    for x, y, f in ((p, q, a), (q, p, na)):
        if x.rule in _COUNITS and x.data["result"] == f:
            return _counit_step(x, y, f)
    if p.rule in _TENSORS and q.rule in _PARS:
        return _principal(p, q, a)
    if q.rule in _TENSORS and p.rule in _PARS:
        return _principal(q, p, na)
    raise CutEliminationError(f"no reduction applies to the cut on {a}")


def _check_side(before: tuple[Derivation, Derivation], after: tuple[Derivation, Derivation]) -> None:
    n_before = before[0].size + before[1].size
    n_after = after[0].size + after[1].size
    if not n_after < n_before:
        raise AssertionError(f"side-cut measure did not decrease ({n_before} -> {n_after})")


def _permute(x: Derivation, y: Derivation, f: Formula) -> Derivation:
    STATS.side_steps += 1
    other = Sequent(y.conclusion.without(dual(f)))
    rule = x.rule
    data = x.data
    if rule in _TENSORS:
        p1, p2 = x.premises
        left, right = _components(x)
        first = p1.conclusion.counter[f] - (1 if left == f else 0) > 0
        src = p1 if first else p2
        _check_side((x, y), (src, y))
        new = _reduce(src, y, f)
        if first:
            return make_tensor(new, p2, left, right, result=data["formula"])
        return make_tensor(p1, new, left, right, result=data["formula"])
    if rule in _PARS:
        (p0,) = x.premises
        left, right = _components(x)
        clash = (left.free & right.free) & other.free
        if clash:
            ren = {k: fresh_index() for k in sorted(clash)}
            p0 = rename_derivation(p0, ren)
            left, right = rename_free(left, ren), rename_free(right, ren)
        _check_side((x, y), (p0, y))
        new = _reduce(p0, y, f)
        return make_par(new, left, right, result=data["formula"])
    (p0,) = x.premises
    a, j, i, result = data["formula"], data["upper"], data["lower"], data["result"]
    if rule is RuleTag.COUNIT_REDUCE and j in other.free:
        jj = fresh_index()
        p0 = rename_derivation(p0, {j: jj})
        a, j = rename_free(a, {j: jj}), jj
    _check_side((x, y), (p0, y))
    new = _reduce(p0, y, f)
    build = make_counit_expand if rule is RuleTag.COUNIT_EXPAND else make_counit_reduce
    return build(new, a, j, i, result=result)


def _counit_step(x: Derivation, y: Derivation, f: Formula) -> Derivation:
    """The cut formula ``f`` was produced by a counit rule at ``x``."""
    STATS.counit_steps += 1
    (x0,) = x.premises
    a, j, i = x.data["formula"], x.data["upper"], x.data["lower"]
    jj = fresh_index()
    x1 = rename_derivation(x0, {j: jj})
    a1 = rename_free(a, {j: jj})
    y1 = rename_derivation(y, {i: jj})
    y1 = realpha(y1, rename_free(dual(f), {i: jj}), dual(a1))
    _check_side((x, y), (x1, y1))
    d = _reduce(x1, y1, a1)
    s = d.conclusion
    if x.rule is RuleTag.COUNIT_REDUCE:
        holder = s.holder(jj, LOWER)
        return make_counit_reduce(d, holder, jj, i, result=rename_free(holder, {jj: i}))
    holder = s.holder(jj, UPPER)
    d = make_counit_expand(d, holder, jj, i, result=rename_free(holder, {jj: i}))
    return similarity_derivation(d, {jj: j})


def _principal(t: Derivation, p: Derivation, a: Formula) -> Derivation:
    STATS.principal_steps += 1
    p1, p2 = t.premises
    tl, tr = _components(t)
    (q0,) = p.premises
    ql, qr = _components(p)
    na = dual(a)
    fresh = {x: fresh_index() for x in sorted(a.cross)}
    t_names = {**_align(a.left, tl), **_align(a.right, tr)}
    q_names = {**_align(na.left, ql), **_align(na.right, qr)}
    sigma_t = {t_names[x]: v for x, v in fresh.items()}
    sigma_q = {q_names[x]: v for x, v in fresh.items()}
    p1, p2 = rename_derivation(p1, sigma_t), rename_derivation(p2, sigma_t)
    q0 = rename_derivation(q0, sigma_q)
    left, right = rename_free(tl, sigma_t), rename_free(tr, sigma_t)
    # the dual of a tensor lists its components in reverse order
    q0 = realpha(realpha(q0, rename_free(qr, sigma_q), dual(left)), rename_free(ql, sigma_q), dual(right))
    for part in (left, right):
        if not part.size < a.size:
            raise AssertionError("principal cut did not reduce the cut formula")
    d1 = _reduce(p1, q0, left)
    d2 = _reduce(p2, d1, right)
    return similarity_derivation(d2, {v: t_names[x] for x, v in fresh.items() if t_names[x] != v})


def _eliminate(d: Derivation) -> Derivation:
    prem = tuple(_eliminate(p) for p in d.premises)
    if d.rule is RuleTag.CUT:
        out = _reduce(prem[0], prem[1], d.data["formula"])
        return _fix(out, d.conclusion)
    if all(a is b for a, b in zip(prem, d.premises)):
        return d
    return Derivation(d.conclusion, d.rule, prem, d.data)


# ---------------------------------------------------------------------------
# from the primed system back to plain steps


def to_plain(d: Derivation) -> Derivation:
    """Replace every alpha tensor/par node by a plain node between renaming chains."""
    prem = tuple(to_plain(p) for p in d.premises)
    if d.rule is RuleTag.TENSOR_ALPHA:
        out = _plain_tensor(d, *prem)
    elif d.rule is RuleTag.PAR_ALPHA:
        out = _plain_par(d, prem[0])
    elif all(a is b for a, b in zip(prem, d.premises)):
        return d
    else:
        out = Derivation(d.conclusion, d.rule, prem, d.data)
    return _fix(out, d.conclusion)


def _binder_maps(d: Derivation) -> dict[Index, Index]:
    f = d.data["formula"]
    left, right = _components(d)
    names = {**_align(left, f.left), **_align(right, f.right)}
    cross = left.free & right.free
    return {c: names[c] for c in cross}


def _plain_tensor(d: Derivation, p1: Derivation, p2: Derivation) -> Derivation:
    f = d.data["formula"]
    left, right = _components(d)
    to_bound = _binder_maps(d)
    back: dict[Index, Index] = {}
    renamed = []
    for p in (p1, p2):
        rho = {c: x for c, x in to_bound.items() if c != x}
        for z in sorted(f.cross & p.conclusion.free - set(to_bound)):
            t = fresh_index()
            rho[z] = t
            back[t] = z
        renamed.append(similarity_derivation(p, rho) if rho else p)
    node = make_tensor(renamed[0], renamed[1], rename_free(left, to_bound), rename_free(right, to_bound))
    for c, x in to_bound.items():
        if c != x:
            back[x] = c
    return similarity_derivation(node, back) if back else node


def _plain_par(d: Derivation, p0: Derivation) -> Derivation:
    f = d.data["formula"]
    left, right = _components(d)
    to_bound = _binder_maps(d)
    rho = {c: x for c, x in to_bound.items() if c != x}
    back: dict[Index, Index] = {}
    for z in sorted(f.cross & p0.conclusion.free - set(to_bound)):
        t = fresh_index()
        rho[z] = t
        back[t] = z
    p0 = similarity_derivation(p0, rho) if rho else p0
    node = make_par(p0, rename_free(left, to_bound), rename_free(right, to_bound))
    return similarity_derivation(node, back) if back else node


def eliminate_cuts(d: Derivation, check: bool = True) -> Derivation:
    """Cut-free derivation of the conclusion of ``d`` (which may use cuts)."""
    if check:
        validate_derivation(d, System.TTL)
    if d.is_cut_free() and not (d.rules_used() & {RuleTag.TENSOR_ALPHA, RuleTag.PAR_ALPHA}):
        return d
    out = to_plain(_eliminate(d))
    if check:
        validate_derivation(out, System.TTL, cut_free=True)
    return out


__all__ = ["CutEliminationError", "STATS", "eliminate_cuts", "fix_conclusion", "realpha", "to_plain"]

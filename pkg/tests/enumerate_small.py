"""Exhaustive enumeration of small Lambek and cyclic MLL sequents."""

from __future__ import annotations

from functools import lru_cache
from itertools import product

from tensorlogic.translations import LLit, LambekSequent, MLit, MPar, MTensor, Over, Product, Under

LAMBEK_OPS = (Product, Under, Over)
MLL_OPS = (MTensor, MPar)


@lru_cache(maxsize=None)
def lambek_types(connectives: int, literals: tuple = ("p", "q")) -> tuple:
    """All Lambek types with exactly ``connectives`` connectives."""
    if connectives == 0:
        return tuple(LLit(x) for x in literals)
    out = []
    for k in range(connectives):
        for op in LAMBEK_OPS:
            for a, b in product(lambek_types(k, literals), lambek_types(connectives - 1 - k, literals)):
                out.append(op(a, b))
    return tuple(out)


@lru_cache(maxsize=None)
def mll_formulas(connectives: int, literals: tuple = ("p", "q")) -> tuple:
    if connectives == 0:
        return tuple(MLit(x, neg) for x in literals for neg in (False, True))
    out = []
    for k in range(connectives):
        for op in MLL_OPS:
            for a, b in product(mll_formulas(k, literals), mll_formulas(connectives - 1 - k, literals)):
                out.append(op(a, b))
    return tuple(out)


def _budgets(slots: int, total: int):
    """Connective counts for ``slots`` formulas summing to at most ``total``."""
    if slots == 0:
        yield ()
        return
    for k in range(total + 1):
        for rest in _budgets(slots - 1, total - k):
            yield (k,) + rest


def lambek_sequents(max_connectives: int = 3, max_antecedent: int = 3, literals=("p", "q")):
    for n in range(max_antecedent + 1):
        for counts in _budgets(n + 1, max_connectives):
            pools = [lambek_types(c, tuple(literals)) for c in counts]
            for combo in product(*pools):
                yield LambekSequent(tuple(combo[:-1]), combo[-1])


def cmll_sequents(max_connectives: int = 3, max_formulas: int = 3, literals=("p", "q")):
    """Cyclic sequents, one representative per rotation class."""
    for n in range(1, max_formulas + 1):
        for counts in _budgets(n, max_connectives):
            pools = [mll_formulas(c, tuple(literals)) for c in counts]
            for combo in product(*pools):
                key = repr(combo)
                if all(key <= repr(combo[k:] + combo[:k]) for k in range(1, n)):
                    yield combo


# ---------------------------------------------------------------------------
# cyclic sequents up to rotation and literal renaming (swap p/q, flip signs)


@lru_cache(maxsize=None)
def _skeletons(connectives: int) -> tuple:
    """Formula shapes as nested tuples with ``None`` leaves."""
    if connectives == 0:
        return (None,)
    out = []
    for k in range(connectives):
        for op in MLL_OPS:
            for a, b in product(_skeletons(k), _skeletons(connectives - 1 - k)):
                out.append((op, a, b))
    return tuple(out)


def _leaves(shape) -> int:
    return 1 if shape is None else _leaves(shape[1]) + _leaves(shape[2])


def _fill(shape, lits, pos: int, literals):
    if shape is None:
        v = lits[pos]
        return MLit(literals[v // 2], bool(v % 2)), pos + 1
    left, pos = _fill(shape[1], lits, pos, literals)
    right, pos = _fill(shape[2], lits, pos, literals)
    return shape[0](left, right), pos


def _normal(lits: tuple) -> tuple:
    """Rename literals so the first is ``p`` and the first other name is ``q``, both positive."""
    first = lits[0]
    flips = {first // 2: (0, first % 2)}
    for v in lits:
        if v // 2 not in flips:
            flips[v // 2] = (1, v % 2)
            break
    return tuple(2 * flips[v // 2][0] + (v % 2 ^ flips[v // 2][1]) for v in lits)


def _normal_assignments(length: int):
    def go(prefix: tuple, seen_q: bool):
        if len(prefix) == length:
            yield prefix
            return
        for v in (0, 1, 2, 3) if seen_q else (0, 1, 2):
            yield from go(prefix + (v,), seen_q or v >= 2)

    yield from go((0,), False)


def cmll_orbit_representatives(max_connectives: int = 3, max_formulas: int = 4, literals=("p", "q")):
    """One cyclic sequent per orbit under rotation and renaming of the two literals."""
    for n in range(1, max_formulas + 1):
        for counts in _budgets(n, max_connectives):
            for shapes in product(*(range(len(_skeletons(c))) for c in counts)):
                sizes = [_leaves(_skeletons(c)[s]) for c, s in zip(counts, shapes)]
                starts = [sum(sizes[:k]) for k in range(n)]
                sig = list(zip(counts, shapes))
                for lits in _normal_assignments(sum(sizes)):
                    key = (sig, lits)
                    if any(
                        (sig[k:] + sig[:k], _normal(lits[starts[k] :] + lits[: starts[k]])) < key
                        for k in range(1, n)
                    ):
                        continue
                    out, pos = [], 0
                    for c, s in sig:
                        f, pos = _fill(_skeletons(c)[s], lits, pos, literals)
                        out.append(f)
                    yield tuple(out)

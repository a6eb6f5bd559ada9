"""Backward cut-free proof search for classical tensor logic.

Derivability is invariant under renaming free index pairs, renaming bound
indices, and inserting or consuming a counit ``bot^j_i`` on a free pair
that links two different formulas.  The search therefore works on
*reduced* sequents, in which every such linking counit has been consumed.
On a reduced goal it tries:

* the axiom ``|- ~a, a`` (this covers ``|- bot^j_i, 1^i_j``);
* the par rule, which is invertible and applied first;
* the tensor rule for every tensor formula ``A * B`` and every split of
  the context.  A free pair whose ends land on different sides is routed
  through the bound indices of ``A * B``; wherever a route passes between
  two indices of the same component, a counit is placed beside it;
* with non-logical axioms, closing the goal on an axiom instance, or
  replacing an instance of an axiom's word context by the dual of its
  last formula (a cut against the axiom).

Each step strictly lowers the non-unit size of the goal, so the search
terminates.  Results are memoised on canonical forms.  Witnesses use
primitive rules only; counit steps undo the reductions and renaming
chains restore the original index names.
"""

from __future__ import annotations

import os
import threading
from collections import Counter
from dataclasses import dataclass, field
from itertools import product as cartesian
from typing import Iterable, Iterator, Optional, Sequence, Union

from .cut_elimination import fix_conclusion
from .formulas import Atom, Formula, Par, Tensor, alpha_eq, bot, dual, rename_all, rename_free
from .sequents import (
    Derivation,
    IntuitionisticSequent,
    Sequent,
    SequentError,
    as_classical,
    canonical_key,
    make_counit_expand,
    make_counit_reduce,
    make_id,
    make_lex,
    make_lex_leaf,
    make_par,
    make_tensor,
    sequent_well_formed,
    similar_canonical,
    similarity_derivation,
    substitute,
)
from .terms import UPPER, fresh_index

DEFAULT_BUDGET = 10**6


class ProofSearchError(Exception):
    pass


class NotDerivable(ProofSearchError):
    pass


class BudgetExceeded(ProofSearchError):
    pass


class ComplexityViolation(AssertionError):
    """A backward step failed to lower the termination measure."""


def default_budget() -> int:
    raw = os.environ.get("TTL_BUDGET")
    if not raw:
        return DEFAULT_BUDGET
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"TTL_BUDGET must be an integer, got {raw!r}") from None
    if value < 1:
        raise ValueError("TTL_BUDGET must be positive")
    return value


@dataclass
class SearchConfig:
    """Knobs for the search.

    ``max_visited`` bounds the number of expanded sequents (default from
    ``TTL_BUDGET``).  ``prune_splits=False`` disables the counting filters
    on context splits, which is only useful for cross-checking them.
    ``jobs`` is the number of worker processes used by :func:`prove_many`.
    """

    max_visited: Optional[int] = None
    memoize: bool = True
    collect_all: bool = False
    prune_splits: bool = True
    jobs: int = 1

    def __post_init__(self):
        if self.max_visited is None:
            self.max_visited = default_budget()
        if self.max_visited < 1:
            raise ValueError("max_visited must be at least 1")
        if self.jobs < 1:
            raise ValueError("jobs must be at least 1")


# ---------------------------------------------------------------------------
# measures


@dataclass(frozen=True)
class ComplexityReport:
    formula_sum: int
    suspicious: frozenset
    total: int


def complexity(s: Union[Sequent, IntuitionisticSequent, Sequence[Formula]]) -> ComplexityReport:
    """Sum of formula sizes plus twice the number of suspicious indices.

    An index is suspicious when it is bound somewhere in the sequent but no
    counit ``bot^j_i`` carries it as its upper index.
    """
    if isinstance(s, (Sequent, IntuitionisticSequent)):
        formulas = as_classical(s).formulas
    else:
        formulas = tuple(s)
    bound: set = set()
    counits: set = set()
    for f in formulas:
        bound |= f.bound
        if isinstance(f, Atom) and f.is_bot:
            counits.add(f.upper[0])
    fsum = sum(f.size for f in formulas)
    sus = frozenset(bound - counits)
    return ComplexityReport(fsum, sus, fsum + 2 * len(sus))


def search_measure(formulas: Iterable[Formula], terminals: frozenset = frozenset()) -> tuple[int, int, int]:
    """Termination measure: (word literals, size without counits, counits)."""
    words = size = counits = 0
    for f in formulas:
        if isinstance(f, Atom) and f.is_bot:
            counits += 1
            continue
        size += f.size
        if terminals:
            words += sum(1 for a in f.atoms() if a.name in terminals)
    return words, size, counits


def balanced(formulas: Iterable[Formula], ignore: frozenset = frozenset()) -> bool:
    """Every non-unit literal occurs as often positively as negatively."""
    count: Counter = Counter()
    for f in formulas:
        for at in f.atoms():
            if not at.is_unit and at.name not in ignore:
                count[at.name] += -1 if at.neg else 1
    return not any(count.values())


@dataclass
class SearchStats:
    expanded: int = 0
    steps: int = 0
    measure_violations: int = 0
    # steps whose premise does not lower ``complexity(...).total``; searches
    # from lexical axioms are counted apart, since they trade words for types
    complexity_increases: int = 0
    axiom_complexity_increases: int = 0
    cache_hits: int = 0
    examples: list = field(default_factory=list)

    def reset(self) -> None:
        self.expanded = self.steps = self.measure_violations = 0
        self.complexity_increases = self.axiom_complexity_increases = self.cache_hits = 0
        self.examples.clear()

    def note_increase(self, goal, premise, from_axioms: bool) -> None:
        if from_axioms:
            self.axiom_complexity_increases += 1
            return
        self.complexity_increases += 1
        if len(self.examples) < 5:
            self.examples.append((Sequent(list(goal)), Sequent(list(premise))))


STATS = SearchStats()
_MEMO: dict = {}
_MEMO_LOCK = threading.Lock()


def clear_memo() -> None:
    with _MEMO_LOCK:
        _MEMO.clear()


# ---------------------------------------------------------------------------
# reduced sequents

Goal = tuple


def _goal(formulas: Iterable[Formula]) -> Goal:
    return tuple(sorted(formulas, key=str))


def _holders(formulas: Sequence[Formula]) -> tuple[dict, dict]:
    up: dict = {}
    low: dict = {}
    for k, f in enumerate(formulas):
        for i in f.free_up:
            up[i] = k
        for i in f.free_low:
            low[i] = k
    return up, low


def _linking(formulas: Sequence[Formula]) -> Optional[tuple[int, int, int]]:
    """Positions (counit, lower holder, upper holder) of a consumable counit."""
    up, low = _holders(formulas)
    for k, c in enumerate(formulas):
        if isinstance(c, Atom) and c.is_bot:
            x, y = low.get(c.upper[0]), up.get(c.lower[0])
            if x is not None and y is not None and x != y:
                return k, x, y
    return None


def reduce_goal(formulas: Iterable[Formula]) -> tuple[Goal, list]:
    """Consume linking counits; return the reduced goal and the undo steps.

    A step ``(restored, j, i, target)`` means ``target`` in the reduced
    goal came from ``restored`` by a counit expansion on ``bot^j_i``.
    """
    cur = list(formulas)
    steps = []
    while True:
        hit = _linking(cur)
        if hit is None:
            return _goal(cur), steps
        k, _, y = hit
        c, target = cur[k], cur[y]
        j, i = c.upper[0], c.lower[0]
        restored = substitute(target, UPPER, i, j)
        steps.append((restored, j, i, target))
        cur = [f for n, f in enumerate(cur) if n not in (k, y)] + [restored]


def _undo_reduction(d: Derivation, steps: list) -> Derivation:
    for restored, j, i, target in reversed(steps):
        d = make_counit_expand(d, restored, j, i, result=target)
    return d


def transport(d: Derivation, target: Sequence[Formula]) -> Derivation:
    """Extend ``d`` to a derivation of ``target``.

    The conclusion of ``d`` must reduce to a sequent similar to ``target``
    up to bound renaming.
    """
    while True:
        cur = list(d.conclusion.formulas)
        hit = _linking(cur)
        if hit is None:
            break
        k, x, _ = hit
        d = make_counit_reduce(d, cur[x], cur[k].upper[0], cur[k].lower[0])
    tgt = Sequent(target)
    have, to_canon = similar_canonical(d.conclusion)
    want, from_canon = similar_canonical(tgt)
    if have != want:
        raise ProofSearchError(f"cannot transport {d.conclusion} to {tgt}")
    back = {v: k for k, v in from_canon.items()}
    mapping = {n: back[c] for n, c in to_canon.items() if back[c] != n}
    if mapping:
        d = similarity_derivation(d, mapping)
    return fix_conclusion(d, tgt)


def _away(f: Formula, avoid) -> Formula:
    """Alpha-rename the bound indices of ``f`` that occur in ``avoid``."""
    clash = f.bound & frozenset(avoid)
    if not clash:
        return f
    return rename_all(f, {i: fresh_index() for i in sorted(clash)})


def _free_of(formulas: Iterable[Formula]) -> frozenset:
    out: frozenset = frozenset()
    for g in formulas:
        out |= g.free
    return out


# ---------------------------------------------------------------------------
# axioms


class _Axioms:
    def __init__(self, axioms: Sequence[Sequent]):
        self.axioms = list(axioms)
        self.keys: dict = {}
        for ax in self.axioms:
            red, _ = reduce_goal(ax.formulas)
            self.keys.setdefault(canonical_key(red), ax)
        principal: set = set()
        for ax in self.axioms:
            principal |= {a.name for a in ax.formulas[-1].atoms()}
        self.rules = []
        terminal: set = set()
        for ax in self.axioms:
            side = ax.formulas[:-1]
            names = {a.name for f in side for a in f.atoms()} - principal
            if side and names:
                self.rules.append((ax, ax.formulas[-1], side))
                terminal |= names
        self.terminal = frozenset(terminal)


def _match_side(side: Sequence[Formula], goal: Goal) -> Iterator[tuple[dict, list]]:
    """Injective free-index maps sending each formula of ``side`` onto a goal formula."""

    def extend(k: int, used: list, mapping: dict) -> Iterator[tuple[dict, list]]:
        if k == len(side):
            yield mapping, used
            return
        for pos, g in enumerate(goal):
            if pos in used:
                continue
            m = _match_formula(side[k], g, mapping)
            if m is not None:
                yield from extend(k + 1, used + [pos], m)

    yield from extend(0, [], {})


def _match_formula(pattern: Formula, target: Formula, mapping: dict) -> Optional[dict]:
    pa, ta = list(pattern.atoms()), list(target.atoms())
    if len(pa) != len(ta):
        return None
    out = dict(mapping)
    used = set(out.values())
    for x, y in zip(pa, ta):
        if (x.name, x.neg, x.valency) != (y.name, y.neg, y.valency):
            return None
        for i, j in zip(x.upper + x.lower, y.upper + y.lower):
            if i in pattern.bound:
                continue
            if i in out:
                if out[i] != j:
                    return None
            elif j in used:
                return None
            else:
                out[i] = j
                used.add(j)
    try:
        renamed = rename_free(_away(pattern, used), out)
    except ValueError:
        return None
    return out if alpha_eq(renamed, target) else None


# ---------------------------------------------------------------------------
# routing free pairs through the bound indices of a tensor


def _sequences(su: int, sl: int, pools: dict, limit: int) -> Iterator[tuple]:
    """Alternating cross sequences leading from side ``su`` to side ``sl``, shortest first."""

    def go(side: int, used: tuple) -> Iterator[tuple]:
        if side == sl:
            yield used
        if len(used) >= limit:
            return
        for x in sorted(pools[side] - set(used)):
            yield from go(3 - side, used + (x,))

    yield from go(su, ())


def _routings(edges: list, d12: frozenset, d21: frozenset) -> Iterator[dict]:
    """Assign every bound index of the tensor to exactly one free pair."""
    total = len(d12) + len(d21)

    def rec(k: int, a12: frozenset, a21: frozenset, acc: dict) -> Iterator[dict]:
        if k == len(edges):
            if not a12 and not a21:
                yield dict(acc)
            return
        need12 = sum(1 for _, su, sl in edges[k:] if (su, sl) == (1, 2))
        need21 = sum(1 for _, su, sl in edges[k:] if (su, sl) == (2, 1))
        if len(a12) < need12 or len(a21) < need21 or len(a12) - len(a21) != need12 - need21:
            return
        name, su, sl = edges[k]
        for seq in _sequences(su, sl, {1: a12, 2: a21}, total):
            acc[name] = seq
            yield from rec(k + 1, a12.difference(seq), a21.difference(seq), acc)
            del acc[name]

    yield from rec(0, d12, d21, {})


def _split_premises(nodes, side, up, low, routing, comp) -> Optional[list]:
    up_ren: dict = {}
    low_ren: dict = {}
    counits: dict = {1: [], 2: []}
    for name, seq in routing.items():
        if not seq:
            continue
        u, v = up[name], low[name]
        s = side[u]
        if u == comp[s]:
            counits[s].append(bot(seq[0], name))
        else:
            up_ren.setdefault(u, {})[name] = seq[0]
        for k in range(1, len(seq)):
            s = 3 - s
            counits[s].append(bot(seq[k], seq[k - 1]))
        s = 3 - s
        if v == comp[s]:
            counits[s].append(bot(name, seq[-1]))
        else:
            low_ren.setdefault(v, {})[name] = seq[-1]
    out: dict = {1: [], 2: []}
    for k, f in enumerate(nodes):
        if k in up_ren or k in low_ren:
            f = f.map_indices(up_ren.get(k, {}), low_ren.get(k, {}))
        out[side[k]].append(f)
    premises = [out[1] + counits[1], out[2] + counits[2]]
    try:
        for p in premises:
            sequent_well_formed(Sequent(p))
    except (SequentError, ValueError):
        return None
    return [_goal(p) for p in premises]


# ---------------------------------------------------------------------------
# the engine


class Engine:
    def __init__(self, cfg: SearchConfig, axioms: Optional[Sequence[Sequent]] = None):
        self.cfg = cfg
        self.visited = 0
        self.ax = _Axioms(axioms) if axioms else None
        self.terminals = self.ax.terminal if self.ax else frozenset()
        self.memo = _MEMO if self.ax is None and cfg.memoize else {}
        self.mode = ("ttl", cfg.prune_splits)

    def tick(self) -> None:
        self.visited += 1
        STATS.expanded += 1
        if self.visited > self.cfg.max_visited:
            raise BudgetExceeded(f"search expanded more than {self.cfg.max_visited} sequents")

    def measure(self, goal: Sequence[Formula]) -> tuple[int, int, int]:
        return search_measure(goal, self.terminals)

    # -- rule instances on reduced goals -----------------------------------
    #
    # Each instance is (premises, build): raw premise goals, and a function
    # turning derivations of those premises into a derivation of the goal.

    def instances(self, goal: Goal) -> Iterator[tuple[list, object]]:
        if len(goal) == 2:
            a, b = goal
            if isinstance(a, Atom) and dual(a) == b:
                yield [], lambda ds, a=a, goal=goal: transport(make_id(a), goal)
                return
        if self.ax is not None:
            found = self.ax.keys.get(canonical_key(goal))
            if found is not None:
                yield [], lambda ds, ax=found, goal=goal: transport(make_lex_leaf(ax, ax), goal)
        for f in goal:
            if isinstance(f, Par):
                yield self._par(goal, f)
                return
        if self.ax is not None:
            yield from self._lex(goal)
        for f in goal:
            if isinstance(f, Tensor):
                yield from self._tensor(goal, f)

    def _par(self, goal: Goal, f: Par):
        rest = list(goal)
        rest.remove(f)
        clash = f.cross & _free_of(rest)
        if clash:
            ren = {k: fresh_index() for k in sorted(clash)}
            rest = [rename_free(g, ren) for g in rest]
        premise = _goal(rest + [f.left, f.right])

        def build(ds, f=f, goal=goal):
            return transport(make_par(ds[0], f.left, f.right), goal)

        return [premise], build

    def _lex(self, goal: Goal):
        for ax, principal, side in self.ax.rules:
            for mapping, used in _match_side(side, goal):
                cut = rename_free(_away(principal, _free_of(goal)), mapping)
                matched = [goal[p] for p in used]
                rest = [g for p, g in enumerate(goal) if p not in used]
                inst = Sequent(matched + [cut])
                try:
                    sequent_well_formed(inst)
                except SequentError:
                    continue

                def build(ds, ax=ax, inst=inst, cut=cut, goal=goal):
                    return transport(make_lex(ds[0], ax, inst, cut), goal)

                yield [_goal(rest + [dual(cut)])], build

    def _tensor(self, goal: Goal, t: Tensor):
        a, b = t.left, t.right
        rest = list(goal)
        rest.remove(t)
        cross = t.cross
        clash = cross & _free_of(rest)
        if clash:
            ren = {k: fresh_index() for k in sorted(clash)}
            rest = [rename_free(g, ren) for g in rest]
        rest = [_away(g, cross) for g in rest]
        n = len(rest)
        comp = {1: n, 2: n + 1}
        nodes = rest + [a, b]
        up, low = _holders(nodes)
        names = sorted(set(up) - cross)
        d12 = frozenset(cross & a.free_low)
        d21 = frozenset(cross & a.free_up)
        prune = self.cfg.prune_splits
        for assign in cartesian((1, 2), repeat=n):
            side = list(assign) + [1, 2]
            edges = [(x, side[up[x]], side[low[x]]) for x in names]
            if prune:
                a12 = sum(1 for _, su, sl in edges if (su, sl) == (1, 2))
                a21 = sum(1 for _, su, sl in edges if (su, sl) == (2, 1))
                if a12 > len(d12) or a21 > len(d21) or a12 - a21 != len(d12) - len(d21):
                    continue
                left = [rest[k] for k in range(n) if side[k] == 1] + [a]
                right = [rest[k] for k in range(n) if side[k] == 2] + [b]
                if not (balanced(left, self.terminals) and balanced(right, self.terminals)):
                    continue
            edges.sort(key=lambda e: (e[1] == e[2], e[0]))
            for routing in _routings(edges, d12, d21):
                premises = _split_premises(nodes, side, up, low, routing, comp)
                if premises is None:
                    continue

                def build(ds, a=a, b=b, goal=goal):
                    return transport(make_tensor(ds[0], ds[1], a, b), goal)

                yield premises, build

    # -- decision and witnesses --------------------------------------------

    def _check_step(self, goal: Goal, premises: list) -> list:
        reduced = [reduce_goal(p)[0] for p in premises]
        here = self.measure(goal)
        c_here = complexity(goal).total
        for p in reduced:
            STATS.steps += 1
            if not self.measure(p) < here:
                STATS.measure_violations += 1
                raise ComplexityViolation(f"premise {p} does not lower the measure of {goal}")
            if complexity(p).total >= c_here:
                STATS.note_increase(goal, p, self.ax is not None)
        return reduced

    def derivable(self, raw: Sequence[Formula]) -> bool:
        goal, _ = reduce_goal(raw)
        return self._derivable(goal)

    def _derivable(self, goal: Goal) -> bool:
        if self.ax is None and not balanced(goal):
            return False
        key = (self.mode, canonical_key(goal))
        hit = self.memo.get(key)
        if hit is not None:
            STATS.cache_hits += 1
            return hit
        self.tick()
        result = False
        for premises, _ in self.instances(goal):
            if all(self._derivable(p) for p in self._check_step(goal, premises)):
                result = True
                break
        self.memo[key] = result
        return result

    def witness(self, raw: Sequence[Formula]) -> Derivation:
        goal, steps = reduce_goal(raw)
        for premises, build in self.instances(goal):
            if all(self._derivable(p) for p in self._check_step(goal, premises)):
                return _undo_reduction(build([self.witness(p) for p in premises]), steps)
        raise NotDerivable(f"|- {', '.join(map(str, raw))} is not derivable")

    def all_witnesses(self, raw: Sequence[Formula]) -> Iterator[Derivation]:
        goal, steps = reduce_goal(raw)
        for premises, build in self.instances(goal):
            if not all(self._derivable(p) for p in self._check_step(goal, premises)):
                continue
            pools = [list(self.all_witnesses(p)) for p in premises]
            for combo in cartesian(*pools):
                yield _undo_reduction(build(list(combo)), steps)


# ---------------------------------------------------------------------------
# public entry points


def _prepare(s) -> Goal:
    seq = as_classical(s)
    sequent_well_formed(seq)
    return _goal(seq.formulas)


def _finish(d: Derivation, s) -> Derivation:
    return fix_conclusion(d, as_classical(s))


def prove(s: Union[Sequent, IntuitionisticSequent], cfg: Optional[SearchConfig] = None) -> Derivation:
    """Return a cut-free derivation of ``s`` or raise :class:`NotDerivable`.

    Raises :class:`BudgetExceeded` when more than ``cfg.max_visited``
    sequents are expanded.
    """
    cfg = cfg or SearchConfig()
    eng = Engine(cfg)
    goal = _prepare(s)
    if not eng.derivable(goal):
        raise NotDerivable(f"{as_classical(s)} is not derivable")
    return _finish(eng.witness(goal), s)


def is_derivable(s: Union[Sequent, IntuitionisticSequent], cfg: Optional[SearchConfig] = None) -> bool:
    return Engine(cfg or SearchConfig()).derivable(_prepare(s))


def prove_all(
    s: Union[Sequent, IntuitionisticSequent], cfg: Optional[SearchConfig] = None, limit: int = 100
) -> list[Derivation]:
    """Up to ``limit`` pairwise different cut-free derivations found by the search."""
    cfg = cfg or SearchConfig(collect_all=True)
    eng = Engine(cfg)
    goal = _prepare(s)
    out: list[Derivation] = []
    if not eng.derivable(goal):
        return out
    seen = set()
    for d in eng.all_witnesses(goal):
        d = _finish(d, s)
        sig = tuple((path, node.rule.value, str(node.conclusion)) for path, node in d.nodes())
        if sig in seen:
            continue
        seen.add(sig)
        out.append(d)
        if len(out) >= limit:
            break
    return out


def _decide(args) -> bool:
    text, budget, prune = args
    from .sequents import parse_classical

    return is_derivable(parse_classical(text, allow_internal=True), SearchConfig(max_visited=budget, prune_splits=prune))


def prove_many(sequents: Sequence[Sequent], cfg: Optional[SearchConfig] = None) -> list[bool]:
    """Decide several sequents, in ``cfg.jobs`` worker processes when above one."""
    cfg = cfg or SearchConfig()
    if cfg.jobs == 1 or len(sequents) < 2:
        return [is_derivable(s, cfg) for s in sequents]
    from concurrent.futures import ProcessPoolExecutor

    work = [(str(as_classical(s)), cfg.max_visited, cfg.prune_splits) for s in sequents]
    with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
        return list(pool.map(_decide, work))


def prove_from_axioms(
    s: Union[Sequent, IntuitionisticSequent],
    axioms: Iterable[Sequent],
    cfg: Optional[SearchConfig] = None,
) -> Derivation:
    """Search for a derivation of ``s`` that may use the given non-logical axioms.

    Axiom instances are accepted up to similarity.  An axiom ``|- T, A``
    whose context ``T`` mentions literals that no axiom's last formula
    contains can also be cut against on ``A`` (a ``Lex`` step), replacing
    an instance of ``T`` in the goal by ``~A``.
    """
    cfg = cfg or SearchConfig()
    axioms = [as_classical(a) for a in axioms]
    if not axioms:
        return prove(s, cfg)
    eng = Engine(cfg, axioms)
    goal = _prepare(s)
    if not eng.derivable(goal):
        raise NotDerivable(f"{as_classical(s)} is not derivable from the axioms")
    return _finish(eng.witness(goal), s)


def derivable_from_axioms(s, axioms: Iterable[Sequent], cfg: Optional[SearchConfig] = None) -> bool:
    axioms = [as_classical(a) for a in axioms]
    cfg = cfg or SearchConfig()
    if not axioms:
        return is_derivable(s, cfg)
    return Engine(cfg, axioms).derivable(_prepare(s))


from .cut_elimination import eliminate_cuts  # noqa: E402  (re-export)

__all__ = [
    "BudgetExceeded",
    "ComplexityReport",
    "ComplexityViolation",
    "NotDerivable",
    "ProofSearchError",
    "STATS",
    "SearchConfig",
    "balanced",
    "clear_memo",
    "complexity",
    "derivable_from_axioms",
    "eliminate_cuts",
    "is_derivable",
    "prove",
    "prove_all",
    "prove_from_axioms",
    "prove_many",
    "reduce_goal",
    "search_measure",
    "transport",
]

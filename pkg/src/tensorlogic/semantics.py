"""Naive tensor-term semantics over finite valuations.

Formulas are read as sets of tensor terms: a literal by its valuation,
``1^i_j`` as ``{[]^i_j}``, ``A * B`` as the set of products and ``A -o B``
as the terms ``t`` with ``t s`` in ``B`` for every ``s`` in ``A``.  Only
part of the language is executable this way (see :class:`EvalClass`).
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from itertools import product as cartesian
from typing import Iterable, Optional, Sequence, Union

from .formulas import Atom, Formula, FormulaError, Par, Signature, Tensor, dual, parse_formula
from .sequents import IntuitionisticSequent, Sequent
from .terms import Edge, Index, Loop, TensorTerm, TermError, kronecker, normalize, parse_term, product, product_all, rename_indices


class Unsupported(Exception):
    """The formula lies outside the executable fragment."""

    def __init__(self, formula: Formula, reason: str):
        super().__init__(f"{formula}: {reason}")
        self.formula = formula


class ValuationError(ValueError):
    pass


class EvalClass(enum.IntEnum):
    UNSUPPORTED = 0
    MEMBER_CHECKABLE = 1
    ENUMERABLE = 2


def eval_class(a: Formula) -> EvalClass:
    if isinstance(a, Atom):
        return EvalClass.UNSUPPORTED if a.neg else EvalClass.ENUMERABLE
    if isinstance(a, Tensor):
        both = min(eval_class(a.left), eval_class(a.right))
        return EvalClass.ENUMERABLE if both is EvalClass.ENUMERABLE else EvalClass.UNSUPPORTED
    if isinstance(a, Par):
        arg = eval_class(dual(a.left))
        res = eval_class(a.right)
        if arg is EvalClass.ENUMERABLE and res >= EvalClass.MEMBER_CHECKABLE:
            return EvalClass.MEMBER_CHECKABLE
    return EvalClass.UNSUPPORTED


@dataclass
class FiniteValuation:
    """Denotations of literals, stored once per literal name.

    ``assign(p^i_j, terms)`` fixes the set for ``p`` at the boundary
    ``(i; j)``; asking for ``p^k_l`` renames the stored terms.
    """

    table: dict[str, tuple[Atom, frozenset[TensorTerm]]] = field(default_factory=dict)

    def assign(self, at: Atom, terms: Iterable[TensorTerm]) -> None:
        if at.is_unit or at.neg:
            raise ValuationError(f"only positive literals get a valuation, not {at}")
        terms = frozenset(terms)
        for t in terms:
            if t.upper != at.free_up or t.lower != at.free_low:
                raise ValuationError(f"{t} does not have the boundary of {at}")
        if at.name in self.table:
            raise ValuationError(f"literal {at.name!r} already has a valuation")
        self.table[at.name] = (at, terms)

    def lookup(self, at: Atom) -> frozenset[TensorTerm]:
        try:
            ref, terms = self.table[at.name]
        except KeyError:
            raise ValuationError(f"no valuation for literal {at.name!r}") from None
        if ref.valency != at.valency:
            raise ValuationError(f"{at} does not match the valuation's {ref}")
        if ref == at:
            return terms
        mapping = dict(zip(ref.upper + ref.lower, at.upper + at.lower))
        return frozenset(rename_indices(t, mapping) for t in terms)

    def __str__(self) -> str:
        lines = []
        for name in sorted(self.table):
            at, terms = self.table[name]
            lines.append(f"{at} = " + " , ".join(sorted(map(str, terms))))
        return "\n".join(lines)


def enumerate_denotation(a: Formula, v: FiniteValuation) -> frozenset[TensorTerm]:
    """The exact (finite) denotation of an enumerable formula."""
    if isinstance(a, Atom):
        if a.neg:
            raise Unsupported(a, "negative literals have no naive denotation")
        if a.is_unit:
            return frozenset({kronecker(a.upper[0], a.lower[0])})
        return v.lookup(a)
    if isinstance(a, Tensor):
        left = enumerate_denotation(a.left, v)
        right = enumerate_denotation(a.right, v)
        try:
            return frozenset(product(t, s) for t in left for s in right)
        except TermError as exc:
            raise ValuationError(f"undefined product while evaluating {a}: {exc}") from None
    raise Unsupported(a, "not enumerable")


def member(t: TensorTerm, a: Formula, v: FiniteValuation) -> bool:
    t = normalize(t)
    if t.upper != a.free_up or t.lower != a.free_low:
        return False
    cls = eval_class(a)
    if cls is EvalClass.ENUMERABLE:
        return t in enumerate_denotation(a, v)
    if cls is EvalClass.UNSUPPORTED:
        raise Unsupported(a, "outside the executable fragment")
    arg, res = dual(a.left), a.right
    for s in enumerate_denotation(arg, v):
        try:
            ts = product(t, s)
        except TermError as exc:
            raise ValuationError(f"undefined product while evaluating {a}: {exc}") from None
        if not member(ts, res, v):
            return False
    return True


def _split(s: Union[Sequent, IntuitionisticSequent]) -> tuple[list[Formula], Formula]:
    if isinstance(s, IntuitionisticSequent):
        return list(s.antecedent), s.succedent
    *ctx, last = s.formulas
    return [dual(f) for f in ctx], last


def sequent_valid(s: Union[Sequent, IntuitionisticSequent], v: FiniteValuation) -> bool:
    """Whenever ``ti`` is in ``Ai`` for each antecedent, the product is in the succedent.

    A classical sequent is read with its last formula as succedent and the
    duals of the others as antecedents.
    """
    ants, succ = _split(s)
    for f in ants:
        if eval_class(f) is not EvalClass.ENUMERABLE:
            raise Unsupported(f, "antecedents must be enumerable")
    if eval_class(succ) is EvalClass.UNSUPPORTED:
        raise Unsupported(succ, "the succedent must be member-checkable")
    pools = [sorted(enumerate_denotation(f, v), key=str) for f in ants]
    for choice in cartesian(*pools):
        try:
            t = product_all(choice)
        except TermError as exc:
            raise ValuationError(f"undefined product of antecedent terms: {exc}") from None
        if not member(t, succ, v):
            return False
    return True


def is_evaluable(s: Union[Sequent, IntuitionisticSequent]) -> bool:
    ants, succ = _split(s)
    return all(eval_class(f) is EvalClass.ENUMERABLE for f in ants) and eval_class(succ) is not EvalClass.UNSUPPORTED


# ---------------------------------------------------------------------------
# loading and generating valuations


def parse_valuation(text: str, signature: Optional[Signature] = None) -> FiniteValuation:
    """Read lines ``p^{i}_{j} = [a]^i_j , [b c]^i_j`` (``#`` starts a comment)."""
    v = FiniteValuation()
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValuationError(f"line {no}: expected 'literal = terms'")
        lhs, rhs = line.split("=", 1)
        try:
            at = parse_formula(lhs.strip(), signature)
            terms = [parse_term(part.strip()) for part in rhs.split(",") if part.strip()]
        except (FormulaError, TermError) as exc:
            raise ValuationError(f"line {no}: {exc}") from None
        if not isinstance(at, Atom):
            raise ValuationError(f"line {no}: {at} is not a literal")
        try:
            v.assign(at, terms)
        except ValuationError as exc:
            raise ValuationError(f"line {no}: {exc}") from None
    return v


def _random_term(rng: random.Random, ups: Sequence[Index], lows: Sequence[Index], alphabet: Sequence[str]) -> TensorTerm:
    lows = list(lows)
    rng.shuffle(lows)
    edges = [Edge(tuple(rng.choice(alphabet) for _ in range(rng.randint(0, 2))), u, l) for u, l in zip(ups, lows)]
    loops = [Loop(tuple(rng.choice(alphabet) for _ in range(rng.randint(1, 2))))] if rng.random() < 0.1 else []
    return normalize(edges + loops)


def random_valuation(
    rng: random.Random,
    literals: Iterable[Atom],
    alphabet: Sequence[str] = ("a", "b"),
    max_terms: int = 3,
) -> FiniteValuation:
    """One to ``max_terms`` random terms per literal name (empty when the valency is unbalanced)."""
    v = FiniteValuation()
    for at in literals:
        if at.is_unit or at.name in v.table:
            continue
        ref = Atom(at.name, False, at.upper, at.lower)
        if len(ref.upper) != len(ref.lower):
            v.assign(ref, ())
            continue
        n = rng.randint(1, max_terms)
        v.assign(ref, {_random_term(rng, ref.upper, ref.lower, alphabet) for _ in range(n)})
    return v


__all__ = [
    "EvalClass",
    "FiniteValuation",
    "Unsupported",
    "ValuationError",
    "enumerate_denotation",
    "eval_class",
    "is_evaluable",
    "member",
    "parse_valuation",
    "random_valuation",
    "sequent_valid",
]

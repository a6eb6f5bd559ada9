"""Lambek calculus and multiplicative linear logic inside tensor logic.

Three embeddings live here:

* Lambek types into intuitionistic tensor formulas (``lambek_to_ittl``);
* cyclic multiplicative formulas into tensor formulas (``cmll_to_ttl``),
  together with the reverse erasure ``cyclic_readback``;
* MLL derivations into decorated TTL derivations (``mll_derivation_to_ttl``).

The module also carries small exhaustive provers for LC, CMLL and MLL.
They share no code with :mod:`tensorlogic.prover` and serve as oracles.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Optional, Sequence, Union

from .cut_elimination import fix_conclusion
from .formulas import (
    Atom,
    Formula,
    FormulaError,
    Par,
    Signature,
    Tensor,
    atom,
    bot,
    dual,
    lollipop,
    one,
    parse_formula,
    rename_free,
)
from .sequents import (
    Derivation,
    IntuitionisticSequent,
    InvalidDerivation,
    Sequent,
    intuitionistic,
    make_counit_expand,
    make_counit_reduce,
    make_cut,
    make_id,
    make_par,
    make_tensor,
)
from .terms import LOWER, EqualIndices, Index, fresh_index


class TranslationError(ValueError):
    pass


class LambekSyntaxError(TranslationError):
    pass


class NotCyclicFragment(TranslationError):
    pass


class NotACycle(TranslationError):
    pass


class OracleBudgetExceeded(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Lambek types


@dataclass(frozen=True)
class LLit:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Product:
    left: "LambekType"
    right: "LambekType"

    def __str__(self) -> str:
        return f"({self.left} . {self.right})"


@dataclass(frozen=True)
class Under:
    """``left \\ right``: looks for ``left`` on its left."""

    left: "LambekType"
    right: "LambekType"

    def __str__(self) -> str:
        return f"({self.left} \\ {self.right})"


@dataclass(frozen=True)
class Over:
    """``left / right``: looks for ``right`` on its right."""

    left: "LambekType"
    right: "LambekType"

    def __str__(self) -> str:
        return f"({self.left} / {self.right})"


LambekType = Union[LLit, Product, Under, Over]


def lambek_str(t: LambekType) -> str:
    s = str(t)
    return s[1:-1] if s.startswith("(") else s


def lambek_size(t: LambekType) -> int:
    if isinstance(t, LLit):
        return 0
    return 1 + lambek_size(t.left) + lambek_size(t.right)


@dataclass(frozen=True)
class LambekSequent:
    antecedent: tuple[LambekType, ...]
    succedent: LambekType

    def __str__(self) -> str:
        ante = ", ".join(lambek_str(a) for a in self.antecedent)
        return f"{ante} |- {lambek_str(self.succedent)}".lstrip()


_LTOKEN = re.compile(r"\s*(?:(?P<name>[A-Za-z_][A-Za-z0-9_']*)|(?P<op>[\\/.(),]|\|-))")
_OPS = {"\\": Under, "/": Over, ".": Product}


def _lex(text: str) -> list[str]:
    out, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _LTOKEN.match(text, pos)
        if not m:
            raise LambekSyntaxError(f"unexpected character {text[pos]!r} at {pos} in {text!r}")
        out.append(m.group("name") or m.group("op"))
        pos = m.end()
    return out


class _LambekParser:
    def __init__(self, tokens: list[str]):
        self.toks = tokens
        self.pos = 0

    def peek(self) -> Optional[str]:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def take(self, want: Optional[str] = None) -> str:
        tok = self.peek()
        if tok is None or (want is not None and tok != want):
            raise LambekSyntaxError(f"expected {want or 'a type'} at token {self.pos}")
        self.pos += 1
        return tok

    def primary(self) -> LambekType:
        tok = self.take()
        if tok == "(":
            t = self.typ()
            self.take(")")
            return t
        if tok in _OPS or tok in (")", ",", "|-"):
            raise LambekSyntaxError(f"unexpected {tok!r}")
        return LLit(tok)

    def typ(self) -> LambekType:
        operands = [self.primary()]
        op = None
        while self.peek() in _OPS:
            nxt = self.take()
            if op is not None and nxt != op:
                raise LambekSyntaxError("mixing \\, / and . needs parentheses")
            op = nxt
            operands.append(self.primary())
        if op is None:
            return operands[0]
        if op == "\\":
            out = operands[-1]
            for t in reversed(operands[:-1]):
                out = Under(t, out)
            return out
        out = operands[0]
        for t in operands[1:]:
            out = _OPS[op](out, t)
        return out


def parse_lambek(text: str) -> LambekType:
    """Parse ``np \\ s``, ``s / np``, ``np . n``; ``\\`` groups to the right, ``/`` and ``.`` to the left."""
    p = _LambekParser(_lex(text))
    t = p.typ()
    if p.peek() is not None:
        raise LambekSyntaxError(f"trailing input in {text!r}")
    return t


def parse_lambek_sequent(text: str) -> LambekSequent:
    p = _LambekParser(_lex(text))
    ante: list[LambekType] = []
    if p.peek() != "|-":
        ante.append(p.typ())
        while p.peek() == ",":
            p.take(",")
            ante.append(p.typ())
    p.take("|-")
    succ = p.typ()
    if p.peek() is not None:
        raise LambekSyntaxError(f"trailing input in {text!r}")
    return LambekSequent(tuple(ante), succ)


def lambek_to_ittl(t: LambekType, i: Index, j: Index) -> Formula:
    """Intuitionistic tensor formula with boundary ``(i, j)`` for a Lambek type."""
    if i == j:
        raise EqualIndices(f"translation needs two different indices, got {i!r} twice")
    if isinstance(t, LLit):
        return atom(t.name, (i,), (j,))
    k = fresh_index()
    if isinstance(t, Product):
        return Tensor(lambek_to_ittl(t.left, i, k), lambek_to_ittl(t.right, k, j))
    if isinstance(t, Under):
        return lollipop(lambek_to_ittl(t.left, k, i), lambek_to_ittl(t.right, k, j))
    return lollipop(lambek_to_ittl(t.right, j, k), lambek_to_ittl(t.left, i, k))


def _chain(n: int, indices: Optional[Sequence[Index]]) -> list[Index]:
    if indices is None:
        return [f"i{k}" for k in range(n)]
    if len(indices) != n or len(set(indices)) != n:
        raise TranslationError(f"need {n} pairwise different indices")
    return list(indices)


def lambek_seq_to_ittl(s: LambekSequent, indices: Optional[Sequence[Index]] = None) -> IntuitionisticSequent:
    """``A1..An |- B`` becomes ``||A1||^{i0}_{i1}, .., ||An||^{i(n-1)}_{in} |- ||B||^{i0}_{in}``.

    With no antecedent the result is ``1^i_j |- ||B||^i_j``.
    """
    n = len(s.antecedent)
    idx = _chain(max(n, 1) + 1, indices)
    if n == 0:
        return intuitionistic([one(idx[0], idx[1])], lambek_to_ittl(s.succedent, idx[0], idx[1]))
    ante = [lambek_to_ittl(a, idx[k], idx[k + 1]) for k, a in enumerate(s.antecedent)]
    return intuitionistic(ante, lambek_to_ittl(s.succedent, idx[0], idx[n]))


# ---------------------------------------------------------------------------
# multiplicative formulas


@dataclass(frozen=True)
class MLit:
    name: str
    neg: bool = False

    def __str__(self) -> str:
        return ("~" if self.neg else "") + self.name


@dataclass(frozen=True)
class MTensor:
    left: "MllFormula"
    right: "MllFormula"

    def __str__(self) -> str:
        return f"({self.left} * {self.right})"


@dataclass(frozen=True)
class MPar:
    left: "MllFormula"
    right: "MllFormula"

    def __str__(self) -> str:
        return f"({self.left} | {self.right})"


MllFormula = Union[MLit, MTensor, MPar]


def mll_str(f: MllFormula) -> str:
    s = str(f)
    return s[1:-1] if s.startswith("(") else s


def mll_seq_str(fs: Sequence[MllFormula]) -> str:
    return "|- " + ", ".join(mll_str(f) for f in fs)


def dual_mll(f: MllFormula) -> MllFormula:
    if isinstance(f, MLit):
        return MLit(f.name, not f.neg)
    if isinstance(f, MTensor):
        return MPar(dual_mll(f.right), dual_mll(f.left))
    return MTensor(dual_mll(f.right), dual_mll(f.left))


def mll_size(f: MllFormula) -> int:
    if isinstance(f, MLit):
        return 0
    return 1 + mll_size(f.left) + mll_size(f.right)


def mll_literals(f: MllFormula) -> Iterator[MLit]:
    if isinstance(f, MLit):
        yield f
    else:
        yield from mll_literals(f.left)
        yield from mll_literals(f.right)


def erase(f: Formula) -> MllFormula:
    """Drop all indices; units have no counterpart."""
    if isinstance(f, Atom):
        if f.is_unit:
            raise TranslationError(f"{f} has no multiplicative counterpart")
        return MLit(f.name, f.neg)
    cls = MTensor if isinstance(f, Tensor) else MPar
    return cls(erase(f.left), erase(f.right))


def parse_mll(text: str) -> MllFormula:
    """Index-free formula syntax: ``~p``, ``A * B``, ``A | B``, ``A -o B``."""
    try:
        return erase(parse_formula(text, Signature(default=(0, 0))))
    except (FormulaError, TranslationError) as exc:
        raise TranslationError(f"bad multiplicative formula {text!r}: {exc}") from None


def parse_mll_sequent(text: str) -> tuple[MllFormula, ...]:
    body = text.strip()
    if not body.startswith("|-"):
        raise TranslationError("a multiplicative sequent starts with '|-'")
    body = body[2:].strip()
    if not body:
        return ()
    parts, depth, start = [], 0, 0
    for k, ch in enumerate(body):
        depth += ch == "("
        depth -= ch == ")"
        if ch == "," and depth == 0:
            parts.append(body[start:k])
            start = k + 1
    parts.append(body[start:])
    return tuple(parse_mll(p) for p in parts)


def lambek_to_mll(t: LambekType) -> MllFormula:
    """``A.B = A*B``, ``A\\B = ~A|B``, ``B/A = B|~A``."""
    if isinstance(t, LLit):
        return MLit(t.name)
    if isinstance(t, Product):
        return MTensor(lambek_to_mll(t.left), lambek_to_mll(t.right))
    if isinstance(t, Under):
        return MPar(dual_mll(lambek_to_mll(t.left)), lambek_to_mll(t.right))
    return MPar(lambek_to_mll(t.left), dual_mll(lambek_to_mll(t.right)))


def lambek_seq_to_cmll(s: LambekSequent) -> tuple[MllFormula, ...]:
    """``A1..An |- B`` as the cyclic sequent ``|- ~An, .., ~A1, B``."""
    return tuple(dual_mll(lambek_to_mll(a)) for a in reversed(s.antecedent)) + (lambek_to_mll(s.succedent),)


# ---------------------------------------------------------------------------
# cyclic translation


def cmll_to_ttl(f: MllFormula, i: Index, j: Index) -> Formula:
    if i == j:
        raise EqualIndices(f"translation needs two different indices, got {i!r} twice")
    if isinstance(f, MLit):
        return atom(f.name, (i,), (j,), neg=f.neg)
    k = fresh_index()
    cls = Tensor if isinstance(f, MTensor) else Par
    return cls(cmll_to_ttl(f.left, i, k), cmll_to_ttl(f.right, k, j))


def cmll_seq_to_ttl(formulas: Sequence[MllFormula], indices: Optional[Sequence[Index]] = None) -> Sequent:
    """Chain ``|- A1, .., An`` cyclically; a single formula is padded with a counit."""
    n = len(formulas)
    if n == 0:
        raise TranslationError("the cyclic translation needs at least one formula")
    if n == 1:
        i, j = _chain(2, indices)
        return Sequent((bot(i, j), cmll_to_ttl(formulas[0], j, i)))
    idx = _chain(n, indices)
    return Sequent(tuple(cmll_to_ttl(f, idx[k], idx[(k + 1) % n]) for k, f in enumerate(formulas)))


def _cyclic_ends(f: Formula) -> Optional[tuple[Index, Index]]:
    """Boundary ``(i, j)`` if ``f`` is in the image of the cyclic translation."""
    if isinstance(f, Atom):
        if f.is_unit or len(f.upper) != 1 or len(f.lower) != 1 or f.upper == f.lower:
            return None
        return f.upper[0], f.lower[0]
    left, right = _cyclic_ends(f.left), _cyclic_ends(f.right)
    if left is None or right is None or left[1] != right[0] or left[0] == right[1]:
        return None
    if f.left.indices & f.right.indices != {left[1]}:
        return None
    return left[0], right[1]


def cyclic_readback(s: Sequent) -> tuple[MllFormula, ...]:
    """Erase indices and counits along the neighbouring order of ``s``.

    ``A`` precedes ``B`` when the lower index of ``A`` is the upper index
    of ``B``; this must arrange all of ``s`` in one cycle.
    """
    ends = []
    for f in s:
        e = (f.upper[0], f.lower[0]) if isinstance(f, Atom) and f.is_bot else _cyclic_ends(f)
        if e is None:
            raise NotCyclicFragment(f"{f} is neither cyclic nor a counit")
        ends.append(e)
    items = list(s)
    if not items:
        return ()
    by_upper = {}
    for k, (up, _) in enumerate(ends):
        if up in by_upper:
            raise NotACycle(f"two formulas start at {up}")
        by_upper[up] = k
    order, k = [], 0
    while True:
        order.append(k)
        nxt = by_upper.get(ends[k][1])
        if nxt is None:
            raise NotACycle(f"no formula starts at {ends[k][1]}")
        if nxt == 0:
            break
        if nxt in order:
            raise NotACycle("the neighbouring relation has a cycle avoiding the first formula")
        k = nxt
    if len(order) != len(items):
        raise NotACycle(f"{len(items) - len(order)} formulas lie on another cycle")
    return tuple(erase(items[k]) for k in order if not (isinstance(items[k], Atom) and items[k].is_bot))


# ---------------------------------------------------------------------------
# MLL derivations (ordered conclusions, explicit exchange)


class MllRule(enum.Enum):
    ID = "Id"
    PAR = "Par"
    TENSOR = "Tensor"
    CUT = "Cut"
    EX = "Ex"


@dataclass(frozen=True)
class MllDerivation:
    """Conventions: par joins the last two formulas; tensor joins the last
    formula of the left premise with the first of the right one; cut does
    the same with dual formulas; exchange lists old positions in new order."""

    conclusion: tuple[MllFormula, ...]
    rule: MllRule
    premises: tuple["MllDerivation", ...] = ()
    perm: tuple[int, ...] = field(default=())

    @property
    def size(self) -> int:
        return 1 + sum(p.size for p in self.premises)

    def cuts(self) -> int:
        return (self.rule is MllRule.CUT) + sum(p.cuts() for p in self.premises)

    def __str__(self) -> str:
        return "\n".join(_mll_lines(self, 0))


def _mll_lines(d: MllDerivation, depth: int) -> Iterator[str]:
    yield "  " * depth + f"{mll_seq_str(d.conclusion)}   ({d.rule.value})"
    for p in d.premises:
        yield from _mll_lines(p, depth + 1)


def mll_id(lit: MLit) -> MllDerivation:
    return MllDerivation((dual_mll(lit), lit), MllRule.ID)


def mll_par(d: MllDerivation) -> MllDerivation:
    c = d.conclusion
    if len(c) < 2:
        raise InvalidDerivation((), "par needs two formulas")
    return MllDerivation(c[:-2] + (MPar(c[-2], c[-1]),), MllRule.PAR, (d,))


def mll_tensor(d1: MllDerivation, d2: MllDerivation) -> MllDerivation:
    a, b = d1.conclusion, d2.conclusion
    if not a or not b:
        raise InvalidDerivation((), "tensor needs non-empty premises")
    return MllDerivation(a[:-1] + (MTensor(a[-1], b[0]),) + b[1:], MllRule.TENSOR, (d1, d2))


def mll_cut(d1: MllDerivation, d2: MllDerivation) -> MllDerivation:
    a, b = d1.conclusion, d2.conclusion
    if not a or not b or dual_mll(a[-1]) != b[0]:
        raise InvalidDerivation((), "cut formulas are not dual")
    return MllDerivation(a[:-1] + b[1:], MllRule.CUT, (d1, d2))


def mll_ex(d: MllDerivation, perm: Sequence[int]) -> MllDerivation:
    perm = tuple(perm)
    if sorted(perm) != list(range(len(d.conclusion))):
        raise InvalidDerivation((), f"{perm} is not a permutation of the conclusion")
    if perm == tuple(range(len(perm))):
        return d
    if d.rule is MllRule.EX:
        inner = d.perm
        return mll_ex(d.premises[0], [inner[k] for k in perm])
    return MllDerivation(tuple(d.conclusion[k] for k in perm), MllRule.EX, (d,), perm)


def mll_arrange(d: MllDerivation, order: Sequence[MllFormula]) -> MllDerivation:
    """Exchange so that the conclusion reads ``order`` (a permutation of it)."""
    used: set[int] = set()
    perm = []
    for f in order:
        k = next((k for k, g in enumerate(d.conclusion) if g == f and k not in used), None)
        if k is None:
            raise InvalidDerivation((), f"{mll_str(f)} is not in {mll_seq_str(d.conclusion)}")
        used.add(k)
        perm.append(k)
    return mll_ex(d, perm)


def validate_mll(d: MllDerivation, cyclic: bool = False, path: tuple[int, ...] = ()) -> None:
    """Check every step; with ``cyclic`` exchange may only rotate."""
    for k, p in enumerate(d.premises):
        validate_mll(p, cyclic, path + (k,))
    rule = d.rule
    try:
        if rule is MllRule.ID:
            c = d.conclusion
            ok = len(c) == 2 and isinstance(c[1], MLit) and c[0] == dual_mll(c[1])
        elif rule is MllRule.PAR:
            ok = mll_par(d.premises[0]).conclusion == d.conclusion
        elif rule is MllRule.TENSOR:
            ok = mll_tensor(*d.premises).conclusion == d.conclusion
        elif rule is MllRule.CUT:
            ok = mll_cut(*d.premises).conclusion == d.conclusion
        else:
            n = len(d.perm)
            ok = tuple(d.premises[0].conclusion[k] for k in d.perm) == d.conclusion
            if cyclic and n:
                ok = ok and all(d.perm[k] == (d.perm[0] + k) % n for k in range(n))
    except (InvalidDerivation, IndexError, TypeError) as exc:
        raise InvalidDerivation(path, str(exc)) from None
    if not ok:
        raise InvalidDerivation(path, f"{rule.value} step does not match its conclusion")


# ---------------------------------------------------------------------------
# MLL cut elimination


def _drop(seq: tuple, k: int) -> tuple:
    return seq[:k] + seq[k + 1 :]


def _relabel(d: MllDerivation, have: list, want: list) -> MllDerivation:
    """Exchange step taking the occurrences labelled ``have`` into the order ``want``."""
    return mll_ex(d, [have.index(w) for w in want])


def _principal_at(d: MllDerivation, k: int) -> bool:
    if d.rule is MllRule.PAR:
        return k == len(d.conclusion) - 1
    if d.rule is MllRule.TENSOR:
        return k == len(d.premises[0].conclusion) - 1
    return False


def _tensor_source(d: MllDerivation, x: int) -> tuple:
    """Premise occurrence behind position ``x`` of a tensor conclusion."""
    n1 = len(d.premises[0].conclusion)
    if x < n1 - 1:
        return (1, x)
    if x == n1 - 1:
        return ("T",)
    return (2, x - n1 + 1)


def _mll_reduce(p: MllDerivation, q: MllDerivation, a: int, b: int) -> MllDerivation:
    """Cut-free derivation of the conclusion of ``p`` without occurrence ``a``
    followed by that of ``q`` without occurrence ``b`` (order preserved)."""
    np_, nq = len(p.conclusion), len(q.conclusion)
    target = [("p", x) for x in range(np_) if x != a] + [("q", y) for y in range(nq) if y != b]
    qlab = [("q", y) for y in range(nq) if y != b]
    plab = [("p", x) for x in range(np_) if x != a]
    if p.rule is MllRule.EX:
        (p0,) = p.premises
        r = _mll_reduce(p0, q, p.perm[a], b)
        inv = {z: x for x, z in enumerate(p.perm)}
        have = [("p", inv[z]) for z in range(np_) if z != p.perm[a]] + qlab
        return _relabel(r, have, target)
    if q.rule is MllRule.EX:
        (q0,) = q.premises
        r = _mll_reduce(p, q0, a, q.perm[b])
        inv = {z: y for y, z in enumerate(q.perm)}
        have = plab + [("q", inv[z]) for z in range(nq) if z != q.perm[b]]
        return _relabel(r, have, target)
    if p.rule is MllRule.ID:
        have = [("q", y) if y != b else ("p", 1 - a) for y in range(nq)]
        return _relabel(q, have, target)
    if q.rule is MllRule.ID:
        have = [("p", x) if x != a else ("q", 1 - b) for x in range(np_)]
        return _relabel(p, have, target)
    pp, qp = _principal_at(p, a), _principal_at(q, b)
    if not pp:
        return _commute(p, q, a, b, target)
    if not qp or p.rule is MllRule.PAR:
        # commute q instead, or put the tensor first
        r = _mll_reduce(q, p, b, a)
        have = [("q", y) for y in range(nq) if y != b] + [("p", x) for x in range(np_) if x != a]
        return _relabel(r, have, target)
    (p1, p2), (q0,) = p.premises, q.premises
    n1, m = len(p1.conclusion), len(q0.conclusion)
    # A1*A2 against ~A2|~A1: cut A1 with ~A1, then A2 with ~A2
    r1 = _mll_reduce(p1, q0, n1 - 1, m - 1)
    lab1 = [(1, x) for x in range(n1 - 1)] + [("q0", y) for y in range(m - 1)]
    r2 = _mll_reduce(p2, r1, 0, lab1.index(("q0", m - 2)))
    have = [(2, z) for z in range(1, len(p2.conclusion))] + [w for w in lab1 if w != ("q0", m - 2)]
    want = [_tensor_source(p, x) for x in range(np_) if x != a] + [("q0", y) for y in range(nq) if y != b]
    return _relabel(r2, have, want)


def _commute(p: MllDerivation, q: MllDerivation, a: int, b: int, target: list) -> MllDerivation:
    """The cut occurrence ``a`` is a side formula of the last step of ``p``."""
    qlab = [("q", y) for y in range(len(q.conclusion)) if y != b]
    if p.rule is MllRule.PAR:
        (p0,) = p.premises
        n0 = len(p0.conclusion)
        r = _mll_reduce(p0, q, a, b)
        have = [("p", z) for z in range(n0) if z != a] + qlab
        front = [("p", z) for z in range(n0 - 2) if z != a]
        r = mll_par(_relabel(r, have, front + qlab + [("p", n0 - 2), ("p", n0 - 1)]))
        # the par occurrence takes the last position of p
        return _relabel(r, front + qlab + [("p", n0 - 2)], target)
    p1, p2 = p.premises
    n1, n2 = len(p1.conclusion), len(p2.conclusion)
    src = _tensor_source(p, a)
    want = [_tensor_source(p, x) for x in range(len(p.conclusion)) if x != a] + qlab
    if src[0] == 1:
        r = _mll_reduce(p1, q, a, b)
        have = [(1, x) for x in range(n1) if x != a] + qlab
        front = [(1, x) for x in range(n1 - 1) if x != a] + qlab
        t = mll_tensor(_relabel(r, have, front + [(1, n1 - 1)]), p2)
        return _relabel(t, front + [("T",)] + [(2, z) for z in range(1, n2)], want)
    k = src[1]
    r = _mll_reduce(p2, q, k, b)
    rest = [(2, z) for z in range(1, n2) if z != k] + qlab
    t = mll_tensor(p1, r)
    return _relabel(t, [(1, x) for x in range(n1 - 1)] + [("T",)] + rest, want)


def mll_eliminate_cuts(d: MllDerivation) -> MllDerivation:
    """Standard principal/commutative cut reduction, innermost cuts first."""
    prem = tuple(mll_eliminate_cuts(p) for p in d.premises)
    if d.rule is MllRule.CUT:
        p, q = prem
        return _mll_reduce(p, q, len(p.conclusion) - 1, 0)
    if all(x is y for x, y in zip(prem, d.premises)):
        return d
    return MllDerivation(d.conclusion, d.rule, prem, d.perm)


# ---------------------------------------------------------------------------
# decorating MLL derivations with indices


@dataclass
class MllTranslationStats:
    aligned_cuts: int = 0
    fallback_cuts: int = 0


TRANSLATION_STATS = MllTranslationStats()


def _decorate_literal(lit: MLit, signature: Signature) -> Atom:
    m, n = signature.valency.get(lit.name, signature.default)
    if lit.neg:
        m, n = n, m
    return atom(lit.name, [fresh_index() for _ in range(m)], [fresh_index() for _ in range(n)], neg=lit.neg)


def _positions(f: Formula) -> list[tuple[str, Index]]:
    out = []
    for at in f.atoms():
        out.extend(("u", i) for i in at.upper)
        out.extend(("l", i) for i in at.lower)
    return out


def _cut_alignment(a1: Formula, a2: Formula) -> Optional[dict[Index, Index]]:
    """Map free names of ``dual(a1)`` to those of ``a2`` if the two agree up to names."""
    left, right = dual(a1), a2
    if erase_shape(left) != erase_shape(right):
        return None
    fwd: dict[Index, Index] = {}
    back: dict[Index, Index] = {}
    for (pol1, x), (pol2, y) in zip(_positions(left), _positions(right)):
        if pol1 != pol2 or fwd.setdefault(x, y) != y or back.setdefault(y, x) != x:
            return None
        if (x in left.bound) != (y in right.bound):
            return None
    return {x: y for x, y in fwd.items() if x in left.free}


def erase_shape(f: Formula) -> str:
    if isinstance(f, Atom):
        return ("~" if f.neg else "") + f.name + f"{len(f.upper)}{len(f.lower)}"
    op = "*" if isinstance(f, Tensor) else "|"
    return f"({erase_shape(f.left)}{op}{erase_shape(f.right)})"


def _translate(d: MllDerivation, sig: Signature) -> tuple[list[Formula], Derivation]:
    rule = d.rule
    if rule is MllRule.ID:
        a = _decorate_literal(d.conclusion[1], sig)
        return [dual(a), a], make_id(a)
    if rule is MllRule.EX:
        fs, t = _translate(d.premises[0], sig)
        return [fs[k] for k in d.perm], t
    if rule is MllRule.PAR:
        fs, t = _translate(d.premises[0], sig)
        return fs[:-2] + [Par(fs[-2], fs[-1])], make_par(t, fs[-2], fs[-1])
    if rule is MllRule.TENSOR:
        fs1, t1 = _translate(d.premises[0], sig)
        fs2, t2 = _translate(d.premises[1], sig)
        return fs1[:-1] + [Tensor(fs1[-1], fs2[0])] + fs2[1:], make_tensor(t1, t2, fs1[-1], fs2[0])
    fs1, t1 = _translate(d.premises[0], sig)
    fs2, t2 = _translate(d.premises[1], sig)
    a1, a2 = fs1[-1], fs2[0]
    link = _cut_alignment(a1, a2)
    if link is None:
        TRANSLATION_STATS.fallback_cuts += 1
        return _translate(mll_eliminate_cuts(d), sig)
    TRANSLATION_STATS.aligned_cuts += 1
    # link: free names of dual(a1) -> free names of a2.  An upper index i of
    # a1 is a lower index of dual(a1); its partner link[i] is a lower index of a2.
    for i in sorted(a1.free_up):
        t1 = make_counit_expand(t1, a1, i, link[i])
        a1 = rename_free(a1, {i: link[i]})
    back = {y: x for x, y in link.items()}
    for k in sorted(a2.free_up):
        t2 = make_counit_expand(t2, a2, k, back[k])
        a2 = rename_free(a2, {k: back[k]})
    t2 = fix_conclusion(t2, Sequent(t2.conclusion.without(a2) + [dual(a1)]))
    t = make_cut(t1, t2, a1)
    gamma, delta = fs1[:-1], fs2[1:]
    for i in sorted(fs1[-1].free_up):
        holder = t.conclusion.holder(i, LOWER)
        t = make_counit_reduce(t, holder, i, link[i])
        gamma = [rename_free(g, {i: link[i]}) if g == holder else g for g in gamma]
    for k in sorted(fs2[0].free_up):
        holder = t.conclusion.holder(k, LOWER)
        t = make_counit_reduce(t, holder, k, back[k])
        delta = [rename_free(g, {k: back[k]}) if g == holder else g for g in delta]
    return gamma + delta, t



def mll_derivation_to_ttl(d: MllDerivation, signature: Optional[Signature] = None) -> tuple[Sequent, Derivation]:
    """Decorate the conclusion of ``d`` with indices and build a TTL derivation of it.

    Cuts whose two decorated cut formulas are duals up to free names are
    translated by counit chains around a TTL cut.  Otherwise the cut is
    eliminated in MLL first and the result is decorated.
    """
    validate_mll(d)
    fs, t = _translate(d, signature or Signature())
    return Sequent(fs), t


def decorated(d: MllDerivation, signature: Optional[Signature] = None) -> list[Formula]:
    validate_mll(d)
    return _translate(d, signature or Signature())[0]


# ---------------------------------------------------------------------------
# oracles: exhaustive cut-free search, independent of the tensor prover


@dataclass
class OracleConfig:
    max_nodes: int = 2_000_000


class _Budget:
    def __init__(self, cfg: Optional[OracleConfig]):
        self.left = (cfg or OracleConfig()).max_nodes

    def tick(self) -> None:
        self.left -= 1
        if self.left < 0:
            raise OracleBudgetExceeded("oracle search budget exhausted")


def _splits(seq: tuple) -> Iterator[tuple[tuple, tuple, tuple]]:
    for k in range(len(seq) + 1):
        for m in range(k, len(seq) + 1):
            yield seq[:k], seq[k:m], seq[m:]


def lambek_oracle(s: LambekSequent, cfg: Optional[OracleConfig] = None) -> bool:
    """Cut-free search in the Lambek calculus with empty antecedents."""
    budget = _Budget(cfg)

    @lru_cache(maxsize=None)
    def prov(ante: tuple, succ) -> bool:
        budget.tick()
        if isinstance(succ, LLit) and ante == (succ,):
            return True
        if isinstance(succ, Under) and prov((succ.left,) + ante, succ.right):
            return True
        if isinstance(succ, Over) and prov(ante + (succ.right,), succ.left):
            return True
        for k, f in enumerate(ante):
            if isinstance(f, Product):
                # invertible
                return prov(ante[:k] + (f.left, f.right) + ante[k + 1 :], succ)
        if isinstance(succ, Product):
            for k in range(len(ante) + 1):
                if prov(ante[:k], succ.left) and prov(ante[k:], succ.right):
                    return True
        for k, f in enumerate(ante):
            if isinstance(f, Under):
                before = ante[:k]
                for m in range(len(before) + 1):
                    arg = before[m:]
                    if prov(arg, f.left) and prov(before[:m] + (f.right,) + ante[k + 1 :], succ):
                        return True
            elif isinstance(f, Over):
                after = ante[k + 1 :]
                for m in range(len(after) + 1):
                    if prov(after[:m], f.right) and prov(ante[:k] + (f.left,) + after[m:], succ):
                        return True
        return False

    return prov(tuple(s.antecedent), s.succedent)


def _rotations(seq: tuple) -> Iterator[tuple]:
    for k in range(len(seq)):
        yield seq[k:] + seq[:k]


def cmll_oracle(formulas: Sequence[MllFormula], cfg: Optional[OracleConfig] = None) -> bool:
    """Cut-free search in cyclic MLL; sequents are compared up to rotation."""
    budget = _Budget(cfg)

    def canon(seq: tuple) -> tuple:
        return min(_rotations(seq), key=repr) if seq else seq

    @lru_cache(maxsize=None)
    def prov(seq: tuple) -> bool:
        budget.tick()
        if len(seq) == 2 and isinstance(seq[1], MLit) and seq[0] == dual_mll(seq[1]):
            return True
        for k, f in enumerate(seq):
            if isinstance(f, MPar):
                return prov(canon(seq[:k] + (f.left, f.right) + seq[k + 1 :]))
        for k, f in enumerate(seq):
            if not isinstance(f, MTensor):
                continue
            rest = seq[k + 1 :] + seq[:k]
            for m in range(len(rest) + 1):
                delta, gamma = rest[:m], rest[m:]
                if prov(canon(gamma + (f.left,))) and prov(canon((f.right,) + delta)):
                    return True
        return False

    return prov(canon(tuple(formulas)))


def _literal_balance(formulas: Sequence[MllFormula]) -> bool:
    count: dict[str, int] = {}
    for f in formulas:
        for lit in mll_literals(f):
            count[lit.name] = count.get(lit.name, 0) + (-1 if lit.neg else 1)
    return not any(count.values())


def mll_prove(
    formulas: Sequence[MllFormula], cfg: Optional[OracleConfig] = None, rng=None
) -> Optional[MllDerivation]:
    """A cut-free MLL derivation of ``|- formulas`` (in that order), or ``None``.

    With ``rng`` the tensor splits are tried in random order, so repeated
    calls can return different derivations.
    """
    budget = _Budget(cfg)
    memo: dict[tuple, Optional[MllDerivation]] = {}

    def key(seq: tuple) -> tuple:
        return tuple(sorted(seq, key=repr))

    def prov(seq: tuple) -> Optional[MllDerivation]:
        k = key(seq)
        if k in memo:
            hit = memo[k]
            return None if hit is None else mll_arrange(hit, seq)
        budget.tick()
        memo[k] = out = search(k)
        return None if out is None else mll_arrange(out, seq)

    def search(seq: tuple) -> Optional[MllDerivation]:
        if not _literal_balance(seq):
            return None
        if len(seq) == 2:
            for x, y in (seq, seq[::-1]):
                if isinstance(y, MLit) and x == dual_mll(y):
                    return mll_id(y)
        for k, f in enumerate(seq):
            if isinstance(f, MPar):
                sub = prov(_drop(seq, k) + (f.left, f.right))
                return None if sub is None else mll_par(sub)
        choices = []
        for k, f in enumerate(seq):
            if not isinstance(f, MTensor):
                continue
            rest = _drop(seq, k)
            for mask in range(1 << len(rest)):
                left = tuple(g for b, g in enumerate(rest) if mask >> b & 1)
                right = tuple(g for b, g in enumerate(rest) if not mask >> b & 1)
                choices.append((f, left, right))
        if rng is not None:
            rng.shuffle(choices)
        for f, left, right in choices:
            p1 = prov(left + (f.left,))
            if p1 is None:
                continue
            p2 = prov((f.right,) + right)
            if p2 is not None:
                return mll_tensor(p1, p2)
        return None

    return prov(tuple(formulas))


def mll_oracle(formulas: Sequence[MllFormula], cfg: Optional[OracleConfig] = None) -> bool:
    """Derivability in MLL; ``formulas`` is read as a multiset."""
    budget = _Budget(cfg)

    @lru_cache(maxsize=None)
    def prov(seq: tuple) -> bool:
        budget.tick()
        if len(seq) == 2 and isinstance(seq[1], MLit) and seq[0] == dual_mll(seq[1]):
            return True
        if len(seq) == 2 and isinstance(seq[0], MLit) and seq[1] == dual_mll(seq[0]):
            return True
        for k, f in enumerate(seq):
            if isinstance(f, MPar):
                return prov(tuple(sorted(_drop(seq, k) + (f.left, f.right), key=repr)))
        for k, f in enumerate(seq):
            if not isinstance(f, MTensor):
                continue
            rest = _drop(seq, k)
            seen = set()
            for mask in range(1 << len(rest)):
                left = tuple(g for b, g in enumerate(rest) if mask >> b & 1)
                if left in seen:
                    continue
                seen.add(left)
                right = tuple(g for b, g in enumerate(rest) if not mask >> b & 1)
                if prov(tuple(sorted(left + (f.left,), key=repr))) and prov(
                    tuple(sorted((f.right,) + right, key=repr))
                ):
                    return True
        return False

    return prov(tuple(sorted(formulas, key=repr)))


__all__ = [
    "LLit",
    "LambekSequent",
    "LambekSyntaxError",
    "LambekType",
    "MLit",
    "MPar",
    "MTensor",
    "MllDerivation",
    "MllFormula",
    "MllRule",
    "NotACycle",
    "NotCyclicFragment",
    "OracleBudgetExceeded",
    "OracleConfig",
    "Over",
    "Product",
    "TRANSLATION_STATS",
    "TranslationError",
    "Under",
    "cmll_oracle",
    "cmll_seq_to_ttl",
    "cmll_to_ttl",
    "cyclic_readback",
    "decorated",
    "dual_mll",
    "erase",
    "lambek_oracle",
    "lambek_seq_to_cmll",
    "lambek_seq_to_ittl",
    "lambek_to_ittl",
    "lambek_to_mll",
    "mll_arrange",
    "mll_cut",
    "mll_derivation_to_ttl",
    "mll_eliminate_cuts",
    "mll_ex",
    "mll_id",
    "mll_oracle",
    "mll_par",
    "mll_prove",
    "mll_tensor",
    "parse_lambek",
    "parse_lambek_sequent",
    "parse_mll",
    "parse_mll_sequent",
    "validate_mll",
]

"""Classical tensor formulas with indexed atoms.

Formulas are built from atoms ``p^{i...}_{j...}`` (possibly negated), the
constants ``1`` and ``bot`` (each with one upper and one lower index), and the
binary connectives tensor ``*`` and par ``|``.  Double-quoted names such as
``"Mary"`` are terminal literals, kept apart from ordinary literal names.  Negation is not a connective:
:func:`dual` pushes it to the atoms.  Linear implication ``A -o B`` is read
as ``~A | B`` and printed back in that form whenever the left operand of a
par is the dual of an implication-style formula.

Every formula object is immutable and caches its index bookkeeping (free
upper, free lower and bound indices), which the prover leans on heavily.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

from .terms import UPPER, Index, Polarity, read_index_list

UNIT_NAME = "1"


class FormulaError(ValueError):
    pass


class IllFormedFormula(FormulaError):
    pass


class NotFree(FormulaError):
    pass


class WouldBind(FormulaError):
    pass


class FormulaSyntaxError(FormulaError):
    pass


class ValencyError(FormulaError):
    pass


class Formula:
    """Common base for :class:`Atom`, :class:`Tensor` and :class:`Par`.

    Cached attributes: ``ups``/``lows`` (all upper/lower occurrences),
    ``free_up``, ``free_low``, ``bound`` (frozensets) and ``size`` (the
    connective-count complexity, 1 for atoms).
    """

    __slots__ = ("ups", "lows", "free_up", "free_low", "bound", "size", "_hash", "_str")

    def _init_indices(self, ups: tuple, lows: tuple) -> None:
        su, sl = frozenset(ups), frozenset(lows)
        if len(su) != len(ups):
            dup = next(i for i in ups if ups.count(i) > 1)
            raise IllFormedFormula(f"index {dup!r} has two upper occurrences")
        if len(sl) != len(lows):
            dup = next(i for i in lows if lows.count(i) > 1)
            raise IllFormedFormula(f"index {dup!r} has two lower occurrences")
        self.ups = ups
        self.lows = lows
        self.bound = su & sl
        self.free_up = su - self.bound
        self.free_low = sl - self.bound
        self._str = None

    @property
    def free(self) -> frozenset[Index]:
        return self.free_up | self.free_low

    @property
    def indices(self) -> frozenset[Index]:
        return frozenset(self.ups) | frozenset(self.lows)

    def __str__(self) -> str:
        if self._str is None:
            self._str = format_formula(self)
        return self._str

    def __repr__(self) -> str:
        return f"{type(self).__name__}({str(self)!r})"

    def __hash__(self) -> int:
        return self._hash

    # structural operations -------------------------------------------------

    def map_indices(self, up: dict[Index, Index], low: dict[Index, Index]) -> "Formula":
        raise NotImplementedError

    def atoms(self) -> Iterator["Atom"]:
        raise NotImplementedError


class Atom(Formula):
    __slots__ = ("name", "neg", "upper", "lower")

    def __init__(self, name: str, neg: bool, upper: Iterable[Index], lower: Iterable[Index]):
        self.name = name
        self.neg = neg
        self.upper = tuple(upper)
        self.lower = tuple(lower)
        if name == UNIT_NAME and (len(self.upper), len(self.lower)) != (1, 1):
            raise ValencyError("the constants 1 and bot take one upper and one lower index")
        if set(self.upper) & set(self.lower):
            raise IllFormedFormula(f"atom {name} repeats an index between its upper and lower lists")
        self._init_indices(self.upper, self.lower)
        self.size = 1
        self._hash = hash((name, neg, self.upper, self.lower))

    @property
    def is_unit(self) -> bool:
        return self.name == UNIT_NAME

    @property
    def is_one(self) -> bool:
        return self.name == UNIT_NAME and not self.neg

    @property
    def is_bot(self) -> bool:
        return self.name == UNIT_NAME and self.neg

    @property
    def valency(self) -> tuple[int, int]:
        return len(self.upper), len(self.lower)

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        return (
            isinstance(other, Atom)
            and self._hash == other._hash
            and self.name == other.name
            and self.neg == other.neg
            and self.upper == other.upper
            and self.lower == other.lower
        )

    __hash__ = Formula.__hash__

    def map_indices(self, up, low):
        return Atom(self.name, self.neg, (up.get(i, i) for i in self.upper), (low.get(j, j) for j in self.lower))

    def atoms(self):
        yield self


class _Binary(Formula):
    __slots__ = ("left", "right")
    symbol = "?"

    def __init__(self, left: Formula, right: Formula):
        self.left = left
        self.right = right
        self._init_indices(left.ups + right.ups, left.lows + right.lows)
        self.size = left.size + right.size + 1
        self._hash = hash((self.symbol, left._hash, right._hash))

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        return (
            type(other) is type(self)
            and self._hash == other._hash
            and self.left == other.left
            and self.right == other.right
        )

    __hash__ = Formula.__hash__

    def map_indices(self, up, low):
        return type(self)(self.left.map_indices(up, low), self.right.map_indices(up, low))

    def atoms(self):
        yield from self.left.atoms()
        yield from self.right.atoms()

    @property
    def cross(self) -> frozenset[Index]:
        """Bound indices whose two occurrences sit on different sides."""
        return self.bound - self.left.bound - self.right.bound


class Tensor(_Binary):
    __slots__ = ()
    symbol = "*"


class Par(_Binary):
    __slots__ = ()
    symbol = "|"


# ---------------------------------------------------------------------------
# constructors


def atom(name: str, upper: Iterable[Index] = (), lower: Iterable[Index] = (), neg: bool = False) -> Atom:
    return Atom(name, neg, upper, lower)


def one(upper: Index, lower: Index) -> Atom:
    return Atom(UNIT_NAME, False, (upper,), (lower,))


def bot(upper: Index, lower: Index) -> Atom:
    return Atom(UNIT_NAME, True, (upper,), (lower,))


def lollipop(a: Formula, b: Formula) -> Formula:
    """Linear implication, stored as ``dual(a) | b``."""
    return Par(dual(a), b)


def tensor_all(formulas: list[Formula]) -> Formula:
    out = formulas[0]
    for f in formulas[1:]:
        out = Tensor(out, f)
    return out


# ---------------------------------------------------------------------------
# core operations


def dual(a: Formula) -> Formula:
    if isinstance(a, Atom):
        return Atom(a.name, not a.neg, a.lower[::-1], a.upper[::-1])
    if isinstance(a, Tensor):
        return Par(dual(a.right), dual(a.left))
    return Tensor(dual(a.right), dual(a.left))


@dataclass(frozen=True)
class FormulaBoundary:
    upper_free: frozenset[Index]
    lower_free: frozenset[Index]
    bound: frozenset[Index]


def free_boundary(a: Formula) -> FormulaBoundary:
    return FormulaBoundary(a.free_up, a.free_low, a.bound)


def complexity_formula(a: Formula) -> int:
    return a.size


def reparam_formula(a: Formula, polarity: Polarity, old: Index, new: Index) -> Formula:
    """Substitute ``new`` for the free ``polarity`` occurrence of ``old``.

    Raises :class:`NotFree` if ``old`` is not free at that polarity and
    :class:`WouldBind` if ``new`` already occurs in ``a``.
    """
    side = a.free_up if polarity is UPPER else a.free_low
    if old not in side:
        raise NotFree(f"{old!r} is not a free {polarity.value} index of {a}")
    if new in a.indices:
        raise WouldBind(f"substituting {new!r} into {a} would clash with an existing occurrence")
    if polarity is UPPER:
        return a.map_indices({old: new}, {})
    return a.map_indices({}, {old: new})


def rename_free(a: Formula, mapping: dict[Index, Index]) -> Formula:
    """Rename free occurrences only; bound indices are left alone."""
    up = {i: mapping[i] for i in a.free_up if i in mapping}
    low = {i: mapping[i] for i in a.free_low if i in mapping}
    if not up and not low:
        return a
    return a.map_indices(up, low)


def rename_all(a: Formula, mapping: dict[Index, Index]) -> Formula:
    return a.map_indices(mapping, mapping)


def occurrence_order(a: Formula) -> list[Index]:
    """Indices in order of first occurrence, reading atoms left to right."""
    seen: dict[Index, None] = {}
    for at in a.atoms():
        for i in at.upper:
            seen.setdefault(i, None)
        for j in at.lower:
            seen.setdefault(j, None)
    return list(seen)


def alpha_canonical(a: Formula, prefix: str = "%") -> Formula:
    """Rename bound indices to ``%1, %2, ...`` in order of first occurrence."""
    mapping = {}
    for i in occurrence_order(a):
        if i in a.bound:
            mapping[i] = f"{prefix}{len(mapping) + 1}"
    return rename_all(a, mapping) if mapping else a


def alpha_eq(a: Formula, b: Formula) -> bool:
    return alpha_canonical(a) == alpha_canonical(b)


def shape(a: Formula) -> str:
    """A print of ``a`` with every index erased (used for canonical ordering)."""
    if isinstance(a, Atom):
        return ("~" if a.neg else "") + a.name + f"/{len(a.upper)}{len(a.lower)}"
    return f"({shape(a.left)}{a.symbol}{shape(a.right)})"


def polarity_sets(a: Formula) -> tuple[frozenset[Index], frozenset[Index]]:
    """Upper/lower polarity index sets.

    In the stored classical form the polarity of an occurrence is simply its
    written position, so this reads them off the cached occurrence lists.
    Intuitionistic input is desugared on the way in, which turns the
    inductive polarity clauses for implication into plain position.
    """
    return frozenset(a.ups), frozenset(a.lows)


def literal_names(a: Formula) -> set[str]:
    return {at.name for at in a.atoms() if not at.is_unit}


# ---------------------------------------------------------------------------
# signatures


@dataclass
class Signature:
    """Literal valencies.  Unknown literals get ``default`` unless ``infer``."""

    valency: dict[str, tuple[int, int]] = field(default_factory=dict)
    default: tuple[int, int] = (1, 1)
    infer: bool = False

    def declare(self, name: str, upper: int, lower: int) -> None:
        if name in (UNIT_NAME, "bot"):
            raise ValencyError(f"{name!r} is a reserved constant")
        old = self.valency.get(name)
        if old is not None and old != (upper, lower):
            raise ValencyError(f"literal {name!r} declared with valency {old} and {(upper, lower)}")
        self.valency[name] = (upper, lower)

    def check(self, at: Atom) -> None:
        if at.is_unit:
            return
        want = self.valency.get(at.name)
        if want is None:
            if self.infer:
                self.valency[at.name] = at.valency
                return
            want = self.default
        if at.valency != want:
            raise ValencyError(f"literal {at.name!r} has valency {want}, written with {at.valency}")


# ---------------------------------------------------------------------------
# printing

_SIMPLE = re.compile(r"[A-Za-z0-9']+\Z")


def _fmt_indices(marker: str, idx: tuple) -> str:
    if not idx:
        return ""
    if len(idx) == 1 and _SIMPLE.match(idx[0]):
        return marker + idx[0]
    return marker + "{" + " ".join(idx) + "}"


def format_atom(a: Atom) -> str:
    if a.neg and not a.is_unit:
        # a negated literal prints as the negation of the atom it is dual to
        return "~" + format_atom(dual(a))
    head = ("bot" if a.neg else "1") if a.is_unit else a.name
    return head + _fmt_indices("^", a.upper) + _fmt_indices("_", a.lower)


def _is_intuitionistic(a: Formula) -> bool:
    if isinstance(a, Atom):
        return not a.neg
    if isinstance(a, Tensor):
        return _is_intuitionistic(a.left) and _is_intuitionistic(a.right)
    return _is_intuitionistic(dual(a.left)) and _is_intuitionistic(a.right)


def _is_implication(a: Formula) -> bool:
    return isinstance(a, Par) and _is_intuitionistic(dual(a.left))


def format_formula(a: Formula) -> str:
    if isinstance(a, Atom):
        return format_atom(a)
    if _is_implication(a):
        ante = dual(a.left)
        left = format_formula(ante)
        if _is_implication(ante):
            left = f"({left})"
        return f"{left} -o {format_formula(a.right)}"
    left = format_formula(a.left)
    if not isinstance(a.left, Atom) and (type(a.left) is not type(a) or _is_implication(a.left)):
        left = f"({left})"
    right = format_formula(a.right)
    if not isinstance(a.right, Atom):
        right = f"({right})"
    return f"{left} {a.symbol} {right}"


# ---------------------------------------------------------------------------
# parsing

_UNICODE = {"⊗": "*", "⅋": "|", "⊸": "-o", "⊥": "bot", "⊢": "|-", "¬": "~"}

_TOKEN = re.compile(
    r"""\s*(?:
        (?P<turnstile>\|-)
      | (?P<lolli>-o(?![A-Za-z0-9]))
      | (?P<op>[*|~(),])
      | (?P<name>[A-Za-z][A-Za-z0-9']*|1|"[^"\s]+")
    )""",
    re.VERBOSE,
)


def _normalize_unicode(text: str) -> str:
    for k, v in _UNICODE.items():
        text = text.replace(k, v)
    return text


class _Parser:
    def __init__(self, text: str, signature: Optional[Signature], allow_internal: bool):
        self.text = _normalize_unicode(text)
        self.pos = 0
        self.sig = signature if signature is not None else Signature(infer=True)
        self.allow_internal = allow_internal

    def error(self, msg: str) -> FormulaSyntaxError:
        return FormulaSyntaxError(f"{msg} at position {self.pos} in {self.text!r}")

    def peek(self) -> Optional[tuple[str, str]]:
        m = _TOKEN.match(self.text, self.pos)
        if not m:
            rest = self.text[self.pos :].strip()
            if rest:
                raise self.error("unexpected input")
            return None
        kind = m.lastgroup
        return kind, m.group(kind)

    def advance(self) -> tuple[str, str]:
        m = _TOKEN.match(self.text, self.pos)
        if not m:
            raise self.error("unexpected input")
        self.pos = m.end()
        return m.lastgroup, m.group(m.lastgroup)

    def at_end(self) -> bool:
        return self.text[self.pos :].strip() == ""

    def expect(self, value: str) -> None:
        tok = self.peek()
        if tok is None or tok[1] != value:
            raise self.error(f"expected {value!r}")
        self.advance()

    # formula := chain ('-o' formula)?
    def formula(self) -> Formula:
        left = self.chain()
        tok = self.peek()
        if tok and tok[0] == "lolli":
            self.advance()
            right = self.formula()
            return lollipop(left, right)
        return left

    # chain := unary (op unary)*, all ops identical
    def chain(self) -> Formula:
        left = self.unary()
        op = None
        while True:
            tok = self.peek()
            if not tok or tok[1] not in ("*", "|"):
                return left
            if op is not None and tok[1] != op:
                raise self.error("mixing '*' and '|' needs parentheses")
            op = tok[1]
            self.advance()
            right = self.unary()
            left = Tensor(left, right) if op == "*" else Par(left, right)

    def unary(self) -> Formula:
        tok = self.peek()
        if tok is None:
            raise self.error("unexpected end of formula")
        if tok[1] == "~":
            self.advance()
            return dual(self.unary())
        if tok[1] == "(":
            self.advance()
            inner = self.formula()
            self.expect(")")
            return inner
        if tok[0] == "name":
            return self.atom()
        raise self.error(f"unexpected {tok[1]!r}")

    def atom(self) -> Atom:
        _, name = self.advance()
        upper: list[Index] = []
        lower: list[Index] = []
        seen = set()
        while True:
            m = re.compile(r"([\^_])").match(self.text, self.pos)
            if not m:
                break
            if m.group(1) in seen:
                raise self.error("repeated index marker")
            seen.add(m.group(1))
            names, self.pos = read_index_list(self.text, m.end(), self.allow_internal)
            (upper if m.group(1) == "^" else lower).extend(names)
        if name in (UNIT_NAME, "bot"):
            try:
                a = Atom(UNIT_NAME, name == "bot", upper, lower)
            except FormulaError as exc:
                raise self.error(str(exc)) from None
            return a
        try:
            a = Atom(name, False, upper, lower)
            self.sig.check(a)
        except FormulaError as exc:
            raise self.error(str(exc)) from None
        return a


def parse_formula(text: str, signature: Optional[Signature] = None, allow_internal: bool = False) -> Formula:
    """Parse formula text; see the module docstring for the syntax."""
    p = _Parser(text, signature, allow_internal)
    try:
        f = p.formula()
    except IllFormedFormula as exc:
        raise FormulaSyntaxError(f"{exc} in {text!r}") from None
    if not p.at_end():
        raise p.error("trailing input")
    return f


def parse_formula_list(parser: _Parser, stop: tuple[str, ...] = ()) -> list[Formula]:
    out: list[Formula] = []
    tok = parser.peek()
    if tok is None or tok[1] in stop:
        return out
    while True:
        try:
            out.append(parser.formula())
        except IllFormedFormula as exc:
            raise parser.error(str(exc)) from None
        tok = parser.peek()
        if tok is None or tok[1] != ",":
            return out
        parser.advance()

"""Sequents, inference rules and derivation trees for classical tensor logic.

A classical sequent ``|- A1, ..., An`` is a multiset of formulas in which
every free index has exactly one upper and one lower free occurrence, the
two occurrences sitting in different formulas.  Bound indices are local to
their formula: the same name may be bound in one member and free (or bound)
in another.  An intuitionistic sequent ``A1, ..., An |- B`` stands for the
classical ``|- ~A1, ..., ~An, B``.

Derivations are immutable trees of :class:`Derivation` nodes.  Each node
names its rule and carries a small ``data`` record pinning the instance
(principal formula, substituted indices, axiom used), which is what
:func:`check_step` verifies and what the JSON format stores.
"""

from __future__ import annotations

import enum
import json
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence, Union

from .formulas import (
    Atom,
    Formula,
    FormulaError,
    Par,
    Signature,
    Tensor,
    _Parser,
    alpha_eq,
    bot,
    dual,
    occurrence_order,
    parse_formula,
    parse_formula_list,
    rename_all,
    rename_free,
    shape,
)
from .terms import LOWER, UPPER, Index, Polarity, fresh_index, reserve_index


class SequentError(ValueError):
    pass


class DanglingIndex(SequentError):
    """A free index lacks its partner occurrence of the opposite polarity."""

    def __init__(self, index: Index, polarity: Polarity):
        super().__init__(f"free {polarity.value} index {index!r} has no {_other(polarity).value} partner")
        self.index = index
        self.polarity = polarity


class DuplicateIndex(SequentError):
    """Two formulas carry the same free index with the same polarity."""

    def __init__(self, index: Index, polarity: Polarity):
        super().__init__(f"free {polarity.value} index {index!r} occurs in two formulas")
        self.index = index
        self.polarity = polarity


class SequentSyntaxError(SequentError):
    pass


class RuleMismatch(SequentError):
    pass


class InvalidDerivation(SequentError):
    def __init__(self, path: tuple[int, ...], reason: str):
        where = "root" + "".join(f".{k}" for k in path)
        super().__init__(f"{where}: {reason}")
        self.path = path
        self.reason = reason


def _other(p: Polarity) -> Polarity:
    return LOWER if p is UPPER else UPPER


# ---------------------------------------------------------------------------
# sequents


class Sequent:
    """A classical sequent; ``formulas`` keeps presentation order only."""

    __slots__ = ("formulas", "_counter", "_hash")

    def __init__(self, formulas: Iterable[Formula] = ()):
        self.formulas: tuple[Formula, ...] = tuple(formulas)
        self._counter: Optional[Counter] = None
        self._hash: Optional[int] = None

    @property
    def counter(self) -> Counter:
        if self._counter is None:
            self._counter = Counter(self.formulas)
        return self._counter

    def __eq__(self, other) -> bool:
        if not isinstance(other, Sequent):
            return NotImplemented
        return len(self.formulas) == len(other.formulas) and self.counter == other.counter

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.counter.items()))
        return self._hash

    def __iter__(self):
        return iter(self.formulas)

    def __len__(self) -> int:
        return len(self.formulas)

    def __contains__(self, f: Formula) -> bool:
        return f in self.counter

    def __str__(self) -> str:
        return "|- " + ", ".join(str(f) for f in self.formulas) if self.formulas else "|-"

    def __repr__(self) -> str:
        return f"Sequent({str(self)!r})"

    @property
    def free_up(self) -> frozenset[Index]:
        return frozenset().union(*(f.free_up for f in self.formulas))

    @property
    def free_low(self) -> frozenset[Index]:
        return frozenset().union(*(f.free_low for f in self.formulas))

    @property
    def free(self) -> frozenset[Index]:
        return self.free_up | self.free_low

    def indices(self) -> frozenset[Index]:
        return frozenset().union(*(f.indices for f in self.formulas))

    def without(self, *drop: Formula) -> list[Formula]:
        """The formulas with one occurrence of each of ``drop`` removed."""
        rest = list(self.formulas)
        for f in drop:
            try:
                rest.remove(f)
            except ValueError:
                raise RuleMismatch(f"{f} does not occur in {self}") from None
        return rest

    def holder(self, index: Index, polarity: Polarity) -> Formula:
        """The member carrying ``index`` free with the given polarity."""
        for f in self.formulas:
            if index in (f.free_up if polarity is UPPER else f.free_low):
                return f
        raise KeyError(index)

    def rename(self, mapping: Mapping[Index, Index]) -> "Sequent":
        """Rename free indices (a similarity transformation when injective)."""
        return Sequent(rename_free(f, dict(mapping)) for f in self.formulas)


def sequent_well_formed(s: Union[Sequent, "IntuitionisticSequent"]) -> None:
    """Raise :class:`DuplicateIndex`/:class:`DanglingIndex` unless ``s`` is well formed."""
    if isinstance(s, IntuitionisticSequent):
        _check_context(s.antecedent)
        s = s.to_classical()
    _check_context(s.formulas)
    ups = s.free_up
    lows = s.free_low
    for i in sorted(ups - lows):
        raise DanglingIndex(i, UPPER)
    for i in sorted(lows - ups):
        raise DanglingIndex(i, LOWER)


def _check_context(formulas: Sequence[Formula]) -> None:
    seen_up: set[Index] = set()
    seen_low: set[Index] = set()
    for f in formulas:
        clash = seen_up & f.free_up
        if clash:
            raise DuplicateIndex(min(clash), UPPER)
        clash = seen_low & f.free_low
        if clash:
            raise DuplicateIndex(min(clash), LOWER)
        seen_up |= f.free_up
        seen_low |= f.free_low


def is_well_formed(s) -> bool:
    try:
        sequent_well_formed(s)
    except SequentError:
        return False
    return True


@dataclass(frozen=True)
class IntuitionisticSequent:
    antecedent: tuple[Formula, ...]
    succedent: Formula

    def to_classical(self) -> Sequent:
        return Sequent(tuple(dual(a) for a in self.antecedent) + (self.succedent,))

    def __str__(self) -> str:
        ante = ", ".join(str(a) for a in self.antecedent)
        return f"{ante} |- {self.succedent}" if ante else f"|- {self.succedent}"


def intuitionistic(antecedent: Iterable[Formula], succedent: Formula) -> IntuitionisticSequent:
    return IntuitionisticSequent(tuple(antecedent), succedent)


def as_classical(s: Union[Sequent, IntuitionisticSequent]) -> Sequent:
    return s.to_classical() if isinstance(s, IntuitionisticSequent) else s


def parse_sequent(
    text: str,
    signature: Optional[Signature] = None,
    allow_internal: bool = False,
    check: bool = True,
) -> Union[Sequent, IntuitionisticSequent]:
    """Parse ``|- A, B`` (classical) or ``A, B |- C`` (intuitionistic)."""
    p = _Parser(text, signature, allow_internal)
    try:
        left = parse_formula_list(p, stop=("|-",))
        tok = p.peek()
        if tok is None or tok[0] != "turnstile":
            raise SequentSyntaxError(f"expected '|-' in {text!r}")
        p.advance()
        right = parse_formula_list(p)
    except FormulaError as exc:
        raise SequentSyntaxError(str(exc)) from None
    if not p.at_end():
        raise SequentSyntaxError(f"trailing input at position {p.pos} in {text!r}")
    if left:
        if len(right) != 1:
            raise SequentSyntaxError("an intuitionistic sequent needs exactly one succedent formula")
        s: Union[Sequent, IntuitionisticSequent] = IntuitionisticSequent(tuple(left), right[0])
    else:
        s = Sequent(right)
    if check:
        sequent_well_formed(s)
    return s


def parse_classical(text: str, signature: Optional[Signature] = None, allow_internal: bool = False) -> Sequent:
    return as_classical(parse_sequent(text, signature, allow_internal))


# ---------------------------------------------------------------------------
# canonical forms up to similarity and renaming of bound indices


class _Skeleton:
    """Index-erased view of a formula plus its index occurrence sequence."""

    __slots__ = ("formula", "shape", "occ", "bound_code")

    def __init__(self, f: Formula):
        self.formula = f
        self.shape = shape(f)
        occ = []
        for at in f.atoms():
            occ.extend(at.upper)
            occ.extend(at.lower)
        self.occ = tuple(occ)
        codes: dict[Index, int] = {}
        for i in self.occ:
            if i in f.bound and i not in codes:
                codes[i] = -(len(codes) + 1)
        self.bound_code = codes

    def key(self, naming: dict[Index, int], start: int) -> tuple[tuple, dict[Index, int]]:
        fresh: dict[Index, int] = {}
        out = []
        for i in self.occ:
            c = self.bound_code.get(i)
            if c is None:
                c = naming.get(i)
                if c is None:
                    c = fresh.get(i)
                    if c is None:
                        c = fresh[i] = start + len(fresh)
            out.append(c)
        return (self.shape, tuple(out)), fresh


def _canonical_order(formulas: Sequence[Formula]) -> tuple[tuple, list[Formula], dict[Index, int]]:
    skels = [_Skeleton(f) for f in formulas]
    best: list = [None, None, None]

    def search(remaining: list[_Skeleton], naming: dict[Index, int], keys: list, order: list) -> None:
        if not remaining:
            cand = tuple(keys)
            if best[0] is None or cand < best[0]:
                best[0], best[1], best[2] = cand, list(order), dict(naming)
            return
        start = len(naming) + 1
        scored = [(sk.key(naming, start), idx) for idx, sk in enumerate(remaining)]
        low = min(k for (k, _), _ in scored)
        if best[0] is not None:
            prefix = best[0][: len(keys) + 1]
            if tuple(keys) + (low,) > prefix:
                return
        seen_keys = set()
        for (k, fresh), idx in scored:
            if k != low:
                continue
            sk = remaining[idx]
            # identical formulas give identical subtrees
            if sk.formula in seen_keys:
                continue
            seen_keys.add(sk.formula)
            naming2 = dict(naming)
            naming2.update(fresh)
            search(remaining[:idx] + remaining[idx + 1 :], naming2, keys + [k], order + [sk.formula])

    search(skels, {}, [], [])
    return best[0], best[1], best[2]


def canonical_key(formulas: Sequence[Formula]) -> tuple:
    """A hashable key equal for two contexts iff they are similar up to bound renaming."""
    return _canonical_order(formulas)[0]


def similar_canonical(s: Sequent) -> tuple[Sequent, dict[Index, Index]]:
    """Canonical representative of the similarity/bound-renaming class of ``s``.

    Free pairs become ``_f1, _f2, ...`` and bound indices ``_b1, _b2, ...``
    (numbered per formula).  The returned mapping sends each original free
    index to its canonical name.
    """
    _, order, naming = _canonical_order(s.formulas)
    free_names = {i: f"_f{n}" for i, n in naming.items()}
    out = []
    for f in order:
        mapping = dict(free_names)
        k = 0
        for i in occurrence_order(f):
            if i in f.bound:
                k += 1
                mapping[i] = f"_b{k}"
        out.append(rename_all(f, mapping))
    return Sequent(out), {i: free_names[i] for i in naming}


def are_similar(a: Sequent, b: Sequent) -> bool:
    return len(a) == len(b) and canonical_key(a.formulas) == canonical_key(b.formulas)


# ---------------------------------------------------------------------------
# substitution helpers


def substitute(a: Formula, polarity: Polarity, old: Index, new: Index) -> Formula:
    """``a`` with its free ``polarity`` occurrence of ``old`` renamed to ``new``.

    A bound occurrence of ``new`` inside ``a`` is renamed away first; ``new``
    must not be free in ``a``.
    """
    side = a.free_up if polarity is UPPER else a.free_low
    if old not in side:
        raise RuleMismatch(f"{old!r} is not a free {polarity.value} index of {a}")
    if new in a.free:
        raise RuleMismatch(f"{new!r} is already free in {a}")
    if new in a.bound:
        a = rename_all(a, {new: fresh_index()})
    if polarity is UPPER:
        return a.map_indices({old: new}, {})
    return a.map_indices({}, {old: new})


# ---------------------------------------------------------------------------
# rules and derivations


class RuleTag(enum.Enum):
    ID = "Id"
    CUT = "Cut"
    TENSOR = "Tensor"
    PAR = "Par"
    COUNIT_EXPAND = "CounitExpand"
    COUNIT_REDUCE = "CounitReduce"
    TENSOR_ALPHA = "TensorAlpha"
    PAR_ALPHA = "ParAlpha"
    LEX = "Lex"


RULE_LABELS = {
    RuleTag.ID: "(Id)",
    RuleTag.CUT: "(Cut)",
    RuleTag.TENSOR: "(⊗)",
    RuleTag.PAR: "(⅋)",
    RuleTag.COUNIT_EXPAND: "(⊥→)",
    RuleTag.COUNIT_REDUCE: "(⊥←)",
    RuleTag.TENSOR_ALPHA: "(⊗≡α)",
    RuleTag.PAR_ALPHA: "(⅋≡α)",
    RuleTag.LEX: "(Lex)",
}

PRIMITIVE_RULES = frozenset(
    {RuleTag.ID, RuleTag.CUT, RuleTag.TENSOR, RuleTag.PAR, RuleTag.COUNIT_EXPAND, RuleTag.COUNIT_REDUCE}
)
PRIMED_RULES = PRIMITIVE_RULES | {RuleTag.TENSOR_ALPHA, RuleTag.PAR_ALPHA}

_FORMULA_KEYS = ("formula", "left", "right", "result")
_INDEX_KEYS = ("upper", "lower")
_SEQUENT_KEYS = ("axiom", "instance")


@dataclass(frozen=True, eq=False)
class Derivation:
    conclusion: Sequent
    rule: RuleTag
    premises: tuple["Derivation", ...] = ()
    data: Mapping = field(default_factory=dict)

    @cached_property
    def size(self) -> int:
        return 1 + sum(p.size for p in self.premises)

    @cached_property
    def height(self) -> int:
        return 1 + max((p.height for p in self.premises), default=0)

    def nodes(self):
        """Pre-order traversal yielding ``(path, node)`` pairs."""
        stack = [((), self)]
        while stack:
            path, node = stack.pop()
            yield path, node
            for k in range(len(node.premises) - 1, -1, -1):
                stack.append((path + (k,), node.premises[k]))

    def rules_used(self) -> set[RuleTag]:
        return {n.rule for _, n in self.nodes()}

    def is_cut_free(self) -> bool:
        return RuleTag.CUT not in self.rules_used()

    def __eq__(self, other) -> bool:
        if not isinstance(other, Derivation):
            return NotImplemented
        return to_json_obj(self) == to_json_obj(other)

    def __hash__(self) -> int:
        return hash((self.conclusion, self.rule, self.premises))


def _mismatch(cond: bool, msg: str) -> None:
    if not cond:
        raise RuleMismatch(msg)


def _same(actual: Iterable[Formula], expected: Iterable[Formula], what: str) -> None:
    a, e = Counter(actual), Counter(expected)
    if a != e:
        missing = ", ".join(str(f) for f in (e - a).elements()) or "nothing"
        extra = ", ".join(str(f) for f in (a - e).elements()) or "nothing"
        raise RuleMismatch(f"{what}: expected also {missing}; unexpected {extra}")


def _binary_alpha_ok(plain: Formula, actual: Formula) -> None:
    """``actual`` must be ``plain`` with some cross indices renamed."""
    _mismatch(type(plain) is type(actual), f"{actual} is not a {type(plain).__name__.lower()} of the premise formulas")
    _mismatch(shape(plain) == shape(actual), f"{actual} does not match the shape of {plain}")
    src = []
    dst = []
    for x, y in zip(plain.atoms(), actual.atoms()):
        src.extend(x.upper + x.lower)
        dst.extend(y.upper + y.lower)
    mapping: dict[Index, Index] = {}
    for x, y in zip(src, dst):
        if mapping.setdefault(x, y) != y:
            raise RuleMismatch(f"{actual} renames {x!r} inconsistently")
    cross = plain.cross
    taken = plain.left.free | plain.right.free
    for x, y in mapping.items():
        if x == y:
            continue
        _mismatch(x in cross, f"only indices linking the two components may be renamed, not {x!r}")
        _mismatch(y not in taken, f"renamed index {y!r} is free in a component")
    _mismatch(len(set(mapping.values())) == len(mapping), f"{actual} merges indices of {plain}")


def check_step(
    rule: RuleTag,
    data: Mapping,
    premises: Sequence[Sequent],
    conclusion: Sequent,
    axioms: Optional[Iterable[Sequent]] = None,
) -> None:
    """Raise :class:`RuleMismatch` unless ``conclusion`` follows by ``rule``.

    All sequents involved must be well formed.  For ``Lex`` the referenced
    axiom has to be similar to a member of ``axioms`` when that set is given.
    """
    for s in (*premises, conclusion):
        try:
            sequent_well_formed(s)
        except SequentError as exc:
            raise RuleMismatch(f"ill-formed sequent {s}: {exc}") from None
    arity = {RuleTag.ID: 0, RuleTag.CUT: 2, RuleTag.TENSOR: 2, RuleTag.TENSOR_ALPHA: 2}.get(rule, 1)
    if rule is RuleTag.LEX:
        arity = len(premises) if len(premises) in (0, 1) else 1
    _mismatch(len(premises) == arity, f"{rule.value} takes {arity} premise(s), got {len(premises)}")
    handler = _CHECKERS[rule]
    handler(dict(data), list(premises), conclusion, axioms)


def _check_id(data, premises, concl, axioms) -> None:
    _mismatch(len(concl) == 2, "an axiom has exactly two formulas")
    a, b = concl.formulas
    _mismatch(isinstance(a, Atom) and dual(a) == b, f"{concl} is not of the form |- ~A, A with A atomic")


def _check_cut(data, premises, concl, axioms) -> None:
    cut = data.get("formula")
    _mismatch(isinstance(cut, Formula), "Cut needs the cut formula")
    p, q = premises
    if cut not in p:
        p, q = q, p
    _mismatch(cut in p and dual(cut) in q, f"premises do not contain {cut} and its dual")
    _same(concl.formulas, p.without(cut) + q.without(dual(cut)), "Cut conclusion")


def _check_tensor(data, premises, concl, axioms) -> None:
    f = data.get("formula")
    _mismatch(isinstance(f, Tensor), "Tensor needs a tensor principal formula")
    _tensor_common(f.left, f.right, f, premises, concl)


def _check_tensor_alpha(data, premises, concl, axioms) -> None:
    f, left, right = data.get("formula"), data.get("left"), data.get("right")
    _mismatch(isinstance(f, Tensor) and left is not None and right is not None, "TensorAlpha needs formula/left/right")
    try:
        plain = Tensor(left, right)
    except FormulaError as exc:
        raise RuleMismatch(str(exc)) from None
    _binary_alpha_ok(plain, f)
    _tensor_common(left, right, f, premises, concl)


def _tensor_common(left, right, f, premises, concl) -> None:
    p, q = premises
    if not (left in p and right in q):
        p, q = q, p
    _mismatch(left in p and right in q, f"premises do not supply {left} and {right}")
    _same(concl.formulas, p.without(left) + q.without(right) + [f], "Tensor conclusion")


def _check_par(data, premises, concl, axioms) -> None:
    f = data.get("formula")
    _mismatch(isinstance(f, Par), "Par needs a par principal formula")
    (p,) = premises
    _same(concl.formulas, p.without(f.left, f.right) + [f], "Par conclusion")


def _check_par_alpha(data, premises, concl, axioms) -> None:
    f, left, right = data.get("formula"), data.get("left"), data.get("right")
    _mismatch(isinstance(f, Par) and left is not None and right is not None, "ParAlpha needs formula/left/right")
    try:
        plain = Par(left, right)
    except FormulaError as exc:
        raise RuleMismatch(str(exc)) from None
    _binary_alpha_ok(plain, f)
    (p,) = premises
    _same(concl.formulas, p.without(left, right) + [f], "Par conclusion")


def _counit_parts(data):
    a, result, j, i = data.get("formula"), data.get("result"), data.get("upper"), data.get("lower")
    _mismatch(
        isinstance(a, Formula) and isinstance(result, Formula) and isinstance(j, str) and isinstance(i, str),
        "counit rules need formula, result, upper and lower",
    )
    _mismatch(i not in a.free, f"{i!r} must not be free in {a}")
    return a, result, j, i


def _check_counit_expand(data, premises, concl, axioms) -> None:
    a, result, j, i = _counit_parts(data)
    _mismatch(j in a.free_up, f"{j!r} is not a free upper index of {a}")
    _mismatch(alpha_eq(result, substitute(a, UPPER, j, i)), f"{result} is not {a} with upper {j!r} renamed to {i!r}")
    (p,) = premises
    _same(concl.formulas, p.without(a) + [bot(j, i), result], "CounitExpand conclusion")


def _check_counit_reduce(data, premises, concl, axioms) -> None:
    a, result, j, i = _counit_parts(data)
    _mismatch(j in a.free_low, f"{j!r} is not a free lower index of {a}")
    _mismatch(alpha_eq(result, substitute(a, LOWER, j, i)), f"{result} is not {a} with lower {j!r} renamed to {i!r}")
    (p,) = premises
    _same(concl.formulas, p.without(a, bot(j, i)) + [result], "CounitReduce conclusion")


def _check_lex(data, premises, concl, axioms) -> None:
    axiom = data.get("axiom")
    _mismatch(isinstance(axiom, Sequent), "Lex needs the axiom it uses")
    if axioms is not None:
        key = canonical_key(axiom.formulas)
        _mismatch(any(canonical_key(ax.formulas) == key for ax in axioms), f"{axiom} is not a listed axiom")
    if not premises:
        _mismatch(are_similar(concl, axiom), f"{concl} is not an instance of {axiom}")
        return
    inst, cut = data.get("instance"), data.get("formula")
    _mismatch(isinstance(inst, Sequent) and isinstance(cut, Formula), "Lex needs the axiom instance and its formula")
    _mismatch(are_similar(inst, axiom), f"{inst} is not similar to {axiom}")
    _mismatch(cut in inst, f"{cut} is not in the axiom instance")
    (p,) = premises
    _mismatch(dual(cut) in p, f"premise lacks {dual(cut)}")
    _same(concl.formulas, p.without(dual(cut)) + inst.without(cut), "Lex conclusion")


_CHECKERS = {
    RuleTag.ID: _check_id,
    RuleTag.CUT: _check_cut,
    RuleTag.TENSOR: _check_tensor,
    RuleTag.PAR: _check_par,
    RuleTag.COUNIT_EXPAND: _check_counit_expand,
    RuleTag.COUNIT_REDUCE: _check_counit_reduce,
    RuleTag.TENSOR_ALPHA: _check_tensor_alpha,
    RuleTag.PAR_ALPHA: _check_par_alpha,
    RuleTag.LEX: _check_lex,
}


class System(enum.Enum):
    TTL = "TTL"
    TTL_PRIMED = "TTL'"


def validate_derivation(
    d: Derivation,
    system: Union[System, str] = System.TTL,
    axioms: Optional[Iterable[Sequent]] = None,
    cut_free: bool = False,
) -> None:
    """Check every node of ``d``; raise :class:`InvalidDerivation` at the first bad one.

    ``axioms`` enables the ``Lex`` rule (and axiom leaves) against that set.
    """
    system = System(system)
    allowed = set(PRIMED_RULES if system is System.TTL_PRIMED else PRIMITIVE_RULES)
    ax = None
    if axioms is not None:
        ax = list(axioms)
        allowed.add(RuleTag.LEX)
    if cut_free:
        allowed.discard(RuleTag.CUT)
    for path, node in d.nodes():
        if node.rule not in allowed:
            raise InvalidDerivation(path, f"rule {node.rule.value} is not allowed here")
        try:
            check_step(node.rule, node.data, [p.conclusion for p in node.premises], node.conclusion, ax)
        except RuleMismatch as exc:
            raise InvalidDerivation(path, f"{node.rule.value}: {exc}") from None


def is_valid(d: Derivation, **kw) -> bool:
    try:
        validate_derivation(d, **kw)
    except InvalidDerivation:
        return False
    return True


# ---------------------------------------------------------------------------
# builders: each returns a node whose conclusion is computed from the premises


def make_id(a: Atom) -> Derivation:
    return Derivation(Sequent((dual(a), a)), RuleTag.ID)


def make_cut(p: Derivation, q: Derivation, cut: Formula) -> Derivation:
    concl = Sequent(p.conclusion.without(cut) + q.conclusion.without(dual(cut)))
    return Derivation(concl, RuleTag.CUT, (p, q), {"formula": cut})


def make_tensor(p: Derivation, q: Derivation, left: Formula, right: Formula, result: Optional[Formula] = None) -> Derivation:
    plain = Tensor(left, right)
    rest = p.conclusion.without(left) + q.conclusion.without(right)
    if result is None or result == plain:
        return Derivation(Sequent(rest + [plain]), RuleTag.TENSOR, (p, q), {"formula": plain})
    return Derivation(
        Sequent(rest + [result]), RuleTag.TENSOR_ALPHA, (p, q), {"formula": result, "left": left, "right": right}
    )


def make_par(p: Derivation, left: Formula, right: Formula, result: Optional[Formula] = None) -> Derivation:
    plain = Par(left, right)
    rest = p.conclusion.without(left, right)
    if result is None or result == plain:
        return Derivation(Sequent(rest + [plain]), RuleTag.PAR, (p,), {"formula": plain})
    return Derivation(Sequent(rest + [result]), RuleTag.PAR_ALPHA, (p,), {"formula": result, "left": left, "right": right})


def make_counit_expand(
    p: Derivation, a: Formula, upper: Index, lower: Index, result: Optional[Formula] = None
) -> Derivation:
    if result is None:
        result = substitute(a, UPPER, upper, lower)
    concl = Sequent(p.conclusion.without(a) + [bot(upper, lower), result])
    return Derivation(concl, RuleTag.COUNIT_EXPAND, (p,), {"formula": a, "result": result, "upper": upper, "lower": lower})


def make_counit_reduce(
    p: Derivation, a: Formula, upper: Index, lower: Index, result: Optional[Formula] = None
) -> Derivation:
    if result is None:
        result = substitute(a, LOWER, upper, lower)
    concl = Sequent(p.conclusion.without(a, bot(upper, lower)) + [result])
    return Derivation(concl, RuleTag.COUNIT_REDUCE, (p,), {"formula": a, "result": result, "upper": upper, "lower": lower})


def make_lex_leaf(axiom: Sequent, instance: Sequent) -> Derivation:
    return Derivation(instance, RuleTag.LEX, (), {"axiom": axiom})


def make_lex(p: Derivation, axiom: Sequent, instance: Sequent, cut: Formula) -> Derivation:
    concl = Sequent(p.conclusion.without(dual(cut)) + instance.without(cut))
    return Derivation(concl, RuleTag.LEX, (p,), {"axiom": axiom, "instance": instance, "formula": cut})


# ---------------------------------------------------------------------------
# similarity chains and admissible rules


def rename_step(d: Derivation, old: Index, new: Index) -> Derivation:
    """Rename the free pair ``old`` to ``new`` with one expansion and one reduction."""
    s = d.conclusion
    upper_holder = s.holder(old, UPPER)
    d1 = make_counit_expand(d, upper_holder, old, new)
    lower_holder = d1.conclusion.holder(old, LOWER)
    return make_counit_reduce(d1, lower_holder, old, new)


def similarity_derivation(d: Derivation, mapping: Mapping[Index, Index]) -> Derivation:
    """Extend ``d`` to a cut-free derivation of its conclusion renamed by ``mapping``.

    ``mapping`` sends free indices to new names; it must be injective and its
    targets must not be free in the conclusion unless they are renamed too.
    """
    moves = {a: b for a, b in mapping.items() if a != b}
    if not moves:
        return d
    free = d.conclusion.free
    missing = set(moves) - free
    if missing:
        raise SequentError(f"indices {sorted(missing)} are not free in {d.conclusion}")
    if len(set(moves.values())) != len(moves):
        raise SequentError("a similarity renaming must be injective")
    clash = (set(moves.values()) & free) - set(moves)
    if clash:
        raise SequentError(f"targets {sorted(clash)} are already free in {d.conclusion}")
    if set(moves.values()) & set(moves):
        tmp = {a: fresh_index() for a in moves}
        for a, t in tmp.items():
            d = rename_step(d, a, t)
        for a, t in tmp.items():
            d = rename_step(d, t, moves[a])
        return d
    for a, b in moves.items():
        d = rename_step(d, a, b)
    return d


def counit_expand_lower(d: Derivation, a: Formula, lower: Index, new: Index) -> Derivation:
    """Admissible rule: from ``|- G, A`` with ``lower`` free below in ``A``
    derive ``|- G, bot^new_lower, A_[new/lower]`` using primitive steps only."""
    partner = Sequent(d.conclusion.without(a)).holder(lower, UPPER)
    tmp = fresh_index()
    d1 = make_counit_expand(d, partner, lower, tmp)
    # now bot^lower_tmp, partner has upper tmp, a keeps lower `lower`
    return similarity_derivation(d1, {lower: new, tmp: lower})


def counit_reduce_upper(d: Derivation, a: Formula, upper_of_bot: Index, lower_of_bot: Index) -> Derivation:
    """Admissible rule: from ``|- G, A, bot^i_j`` with ``j`` free above in ``A``
    derive ``|- G, A^[i/j]`` using primitive steps only."""
    counit = bot(upper_of_bot, lower_of_bot)
    rest = Sequent(d.conclusion.without(a, counit))
    partner = rest.holder(upper_of_bot, LOWER)
    d1 = make_counit_reduce(d, partner, upper_of_bot, lower_of_bot)
    return similarity_derivation(d1, {lower_of_bot: upper_of_bot})


# ---------------------------------------------------------------------------
# renaming inside whole derivations


def rename_derivation(d: Derivation, mapping: Mapping[Index, Index]) -> Derivation:
    """Rename free occurrences of indices at every node (``pi[i'/i]``).

    Valid in the primed system whenever the new names occur nowhere in
    ``d``; plain tensor/par nodes whose components changed become their
    primed variants.
    """
    mapping = dict(mapping)
    if not mapping:
        return d
    memo: dict[int, Derivation] = {}

    def go(node: Derivation) -> Derivation:
        key = id(node)
        if key in memo:
            return memo[key]
        prem = tuple(go(p) for p in node.premises)
        concl = node.conclusion.rename(mapping)
        data = dict(node.data)
        rule = node.rule
        if rule in (RuleTag.TENSOR, RuleTag.PAR, RuleTag.TENSOR_ALPHA, RuleTag.PAR_ALPHA):
            f = data["formula"]
            left = data.get("left", f.left)
            right = data.get("right", f.right)
            new_f = rename_free(f, mapping)
            new_left = rename_free(left, mapping)
            new_right = rename_free(right, mapping)
            tensor = rule in (RuleTag.TENSOR, RuleTag.TENSOR_ALPHA)
            plain = (Tensor if tensor else Par)(new_left, new_right)
            if plain == new_f:
                rule = RuleTag.TENSOR if tensor else RuleTag.PAR
                data = {"formula": new_f}
            else:
                rule = RuleTag.TENSOR_ALPHA if tensor else RuleTag.PAR_ALPHA
                data = {"formula": new_f, "left": new_left, "right": new_right}
        elif rule in (RuleTag.COUNIT_EXPAND, RuleTag.COUNIT_REDUCE):
            data["formula"] = rename_free(data["formula"], mapping)
            data["result"] = rename_free(data["result"], mapping)
            data["upper"] = mapping.get(data["upper"], data["upper"])
            data["lower"] = mapping.get(data["lower"], data["lower"])
        elif rule is RuleTag.CUT:
            data["formula"] = rename_free(data["formula"], mapping)
        elif rule is RuleTag.LEX and "instance" in data:
            data["instance"] = data["instance"].rename(mapping)
            data["formula"] = rename_free(data["formula"], mapping)
        out = Derivation(concl, rule, prem, data)
        memo[key] = out
        return out

    return go(d)


def derivation_indices(d: Derivation) -> set[Index]:
    out: set[Index] = set()
    for _, node in d.nodes():
        out |= node.conclusion.indices()
    return out


# ---------------------------------------------------------------------------
# JSON


def _enc(key: str, value):
    if key in _FORMULA_KEYS:
        return str(value)
    if key in _SEQUENT_KEYS:
        return str(value)
    return value


def _dec(key: str, value, sig: Signature):
    if key in _FORMULA_KEYS:
        return parse_formula(value, sig, allow_internal=True)
    if key in _SEQUENT_KEYS:
        return parse_classical(value, sig, allow_internal=True)
    return value


def to_json_obj(d: Derivation) -> dict:
    return {
        "conclusion": str(d.conclusion),
        "rule": d.rule.value,
        "ruleData": {k: _enc(k, v) for k, v in sorted(d.data.items())},
        "premises": [to_json_obj(p) for p in d.premises],
    }


def to_json(d: Derivation, indent: Optional[int] = None) -> str:
    return json.dumps(to_json_obj(d), indent=indent, ensure_ascii=False)


def from_json_obj(obj: Mapping, signature: Optional[Signature] = None) -> Derivation:
    sig = signature if signature is not None else Signature(infer=True)
    try:
        concl = parse_classical(obj["conclusion"], sig, allow_internal=True)
        rule = RuleTag(obj["rule"])
        data = {k: _dec(k, v, sig) for k, v in obj.get("ruleData", {}).items()}
        prem = tuple(from_json_obj(p, sig) for p in obj.get("premises", []))
    except (KeyError, TypeError, ValueError) as exc:
        raise SequentSyntaxError(f"malformed derivation document: {exc}") from None
    for i in concl.indices():
        reserve_index(i)
    return Derivation(concl, rule, prem, data)


def from_json(text: str, signature: Optional[Signature] = None) -> Derivation:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SequentSyntaxError(f"invalid JSON: {exc}") from None
    return from_json_obj(obj, signature)


# ---------------------------------------------------------------------------
# intuitionistic rule names, read through the classical embedding

INTUITIONISTIC_RULES = {
    "Id": RuleTag.ID,
    "Cut": RuleTag.CUT,
    "L-o": RuleTag.TENSOR,
    "R-o": RuleTag.PAR,
    "L*": RuleTag.PAR,
    "R*": RuleTag.TENSOR,
    "L1->": RuleTag.COUNIT_EXPAND,
    "R1->": RuleTag.COUNIT_EXPAND,
    "L1<-": RuleTag.COUNIT_REDUCE,
    "R1<-": RuleTag.COUNIT_REDUCE,
}


def check_intuitionistic_step(
    name: str,
    data: Mapping,
    premises: Sequence[IntuitionisticSequent],
    conclusion: IntuitionisticSequent,
) -> None:
    """Check a two-sided rule instance by converting everything to the classical form.

    ``data`` is given in classical terms (principal formula as it appears in
    the classical conclusion), so ``L-o`` carries the tensor dual to the
    implication.
    """
    try:
        rule = INTUITIONISTIC_RULES[name]
    except KeyError:
        raise RuleMismatch(f"unknown intuitionistic rule {name!r}") from None
    check_step(rule, data, [p.to_classical() for p in premises], conclusion.to_classical())
    # the classical check is blind to which side a formula sits on
    ante_names = {"L-o", "L*", "L1->", "L1<-"}
    if name in ante_names:
        principal = data.get("result", data.get("formula"))
        if name == "L1->":
            principal = bot(data["upper"], data["lower"])
        _mismatch(
            any(dual(a) == principal for a in conclusion.antecedent),
            f"{name} must act on the antecedent",
        )
    elif name in {"R-o", "R*", "R1->", "R1<-"}:
        if name == "R1->":
            _mismatch(
                any(dual(a) == bot(data["upper"], data["lower"]) for a in conclusion.antecedent),
                "R1-> introduces the unit on the left",
            )
            _mismatch(conclusion.succedent == data["result"], "R1-> acts on the succedent")
        elif name == "R1<-":
            _mismatch(conclusion.succedent == data["result"], "R1<- acts on the succedent")
        else:
            _mismatch(conclusion.succedent == data["formula"], f"{name} acts on the succedent")

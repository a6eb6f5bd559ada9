"""Tensor terms: string-labelled edges and cyclic loops glued along indices.

A term is a multiset of *edges* ``[w]^i_j`` (a word ``w`` running from the
upper endpoint ``i`` to the lower endpoint ``j``) and *loops* ``[w]`` (cyclic
words).  Terms are kept in a normal form in which every index occurs exactly
once: edges sharing an endpoint are concatenated and closed chains become
loops.  Loops are stored in their lexicographically least rotation, so
structural equality of normal forms is equality of terms.

Words are tuples of whole-string tokens, so ``[likes cats]^i_j`` carries
two tokens.  Indices are plain strings; names beginning with ``_`` are
reserved for indices minted by :func:`fresh_index`.
"""

from __future__ import annotations

import enum
import itertools
import re
import threading
from dataclasses import dataclass
from typing import Iterable, Iterator, Union

Index = str
Word = tuple[str, ...]


class TermError(ValueError):
    """Base class for term-algebra errors."""


class IllFormed(TermError):
    """An index has two upper or two lower occurrences."""

    def __init__(self, index: Index, polarity: "Polarity"):
        super().__init__(f"index {index!r} has two {polarity.value} occurrences")
        self.index = index
        self.polarity = polarity


class Clash(TermError):
    """A product is undefined because both factors share a free index."""

    def __init__(self, index: Index, polarity: "Polarity"):
        super().__init__(f"product undefined: index {index!r} is {polarity.value} in both factors")
        self.index = index
        self.polarity = polarity


class NotFree(TermError):
    pass


class AlreadyOccurs(TermError):
    pass


class EqualIndices(TermError):
    pass


class TermSyntaxError(TermError):
    pass


class Polarity(enum.Enum):
    UPPER = "upper"
    LOWER = "lower"

    def flip(self) -> "Polarity":
        return Polarity.LOWER if self is Polarity.UPPER else Polarity.UPPER


UPPER = Polarity.UPPER
LOWER = Polarity.LOWER


# ---------------------------------------------------------------------------
# fresh indices

_fresh_counter = itertools.count(1)
_fresh_lock = threading.Lock()
_fresh_floor = 0
_FRESH_RE = re.compile(r"_(\d+)$")


def fresh_index() -> Index:
    """Mint a new index ``_k`` that has never been returned before."""
    with _fresh_lock:
        while True:
            k = next(_fresh_counter)
            if k > _fresh_floor:
                return f"_{k}"


def fresh_indices(n: int) -> list[Index]:
    return [fresh_index() for _ in range(n)]


def reserve_index(name: Index) -> None:
    """Make sure the fresh-index minter never returns ``name``.

    Needed when externally produced data (e.g. a saved derivation) already
    contains minted indices.
    """
    global _fresh_floor
    m = _FRESH_RE.match(name)
    if m:
        with _fresh_lock:
            _fresh_floor = max(_fresh_floor, int(m.group(1)))


def is_internal_index(name: Index) -> bool:
    return name.startswith("_")


def index_sort_key(name: Index):
    """Total order on indices: user names first, then minted ones numerically."""
    m = _FRESH_RE.match(name)
    if m:
        return (1, int(m.group(1)), "")
    return (0, 0, name)


# ---------------------------------------------------------------------------
# elementary terms


def canonical_rotation(word: Iterable[str]) -> Word:
    word = tuple(word)
    if not word:
        return word
    return min(word[k:] + word[:k] for k in range(len(word)))


@dataclass(frozen=True, order=True)
class Edge:
    word: Word
    upper: Index
    lower: Index

    def __str__(self) -> str:
        return f"[{' '.join(self.word)}]^{_fmt_index(self.upper)}_{_fmt_index(self.lower)}"


@dataclass(frozen=True, order=True)
class Loop:
    word: Word

    def __post_init__(self):
        object.__setattr__(self, "word", canonical_rotation(self.word))

    def __str__(self) -> str:
        return f"({' '.join(self.word)})"


Elementary = Union[Edge, Loop]


@dataclass(frozen=True)
class PseudoTerm:
    """An unnormalised product of elementary terms."""

    factors: tuple[Elementary, ...] = ()

    def __mul__(self, other: "PseudoTerm") -> "PseudoTerm":
        return PseudoTerm(self.factors + other.factors)

    def __str__(self) -> str:
        return " . ".join(str(f) for f in self.factors) if self.factors else "1"


@dataclass(frozen=True)
class Boundary:
    upper: frozenset[Index]
    lower: frozenset[Index]


class TermClass(enum.Flag):
    NONE = 0
    REGULAR = enum.auto()
    SINGULAR = enum.auto()
    LEXICAL = enum.auto()


@dataclass(frozen=True)
class TensorTerm:
    """A term in normal form.  Build these with :func:`normalize`."""

    edges: tuple[Edge, ...] = ()
    loops: tuple[Loop, ...] = ()

    @property
    def boundary(self) -> Boundary:
        return Boundary(frozenset(e.upper for e in self.edges), frozenset(e.lower for e in self.edges))

    @property
    def upper(self) -> frozenset[Index]:
        return frozenset(e.upper for e in self.edges)

    @property
    def lower(self) -> frozenset[Index]:
        return frozenset(e.lower for e in self.edges)

    def indices(self) -> set[Index]:
        out = set()
        for e in self.edges:
            out.add(e.upper)
            out.add(e.lower)
        return out

    def is_unit(self) -> bool:
        return not self.edges and not self.loops

    def __mul__(self, other: "TensorTerm") -> "TensorTerm":
        return product(self, other)

    def __str__(self) -> str:
        parts = [str(e) for e in self.edges] + [str(lp) for lp in self.loops]
        return " . ".join(parts) if parts else "1"

    def __repr__(self) -> str:
        return f"TensorTerm({str(self)!r})"


UNIT = TensorTerm()


def edge(word: Iterable[str] | str, upper: Index, lower: Index) -> PseudoTerm:
    return PseudoTerm((Edge(_as_word(word), upper, lower),))


def loop(word: Iterable[str] | str) -> PseudoTerm:
    return PseudoTerm((Loop(_as_word(word)),))


def _as_word(word: Iterable[str] | str) -> Word:
    if isinstance(word, str):
        return tuple(word.split())
    return tuple(word)


# ---------------------------------------------------------------------------
# normal forms


def _factors(p) -> tuple[Elementary, ...]:
    if isinstance(p, TensorTerm):
        return p.edges + p.loops
    if isinstance(p, PseudoTerm):
        return p.factors
    return tuple(p)


def normalize(p: PseudoTerm | TensorTerm | Iterable[Elementary]) -> TensorTerm:
    """Glue every bound index away and return the canonical representative."""
    factors = _factors(p)
    by_upper: dict[Index, Edge] = {}
    lowers: set[Index] = set()
    loops: list[Loop] = []
    for f in factors:
        if isinstance(f, Loop):
            loops.append(f)
            continue
        if f.upper in by_upper:
            raise IllFormed(f.upper, UPPER)
        if f.lower in lowers:
            raise IllFormed(f.lower, LOWER)
        by_upper[f.upper] = f
        lowers.add(f.lower)

    edges: list[Edge] = []
    seen: set[Index] = set()
    # chains start at an upper endpoint that nobody glues onto
    for head in sorted(by_upper, key=index_sort_key):
        if head in lowers:
            continue
        word: list[str] = []
        cur = by_upper[head]
        while True:
            seen.add(cur.upper)
            word.extend(cur.word)
            nxt = by_upper.get(cur.lower)
            if nxt is None:
                break
            cur = nxt
        edges.append(Edge(tuple(word), head, cur.lower))
    # whatever is left closes up into cycles
    for start in sorted(by_upper, key=index_sort_key):
        if start in seen:
            continue
        word = []
        cur = by_upper[start]
        while cur.upper not in seen:
            seen.add(cur.upper)
            word.extend(cur.word)
            cur = by_upper[cur.lower]
        loops.append(Loop(tuple(word)))
    edges.sort(key=lambda e: (index_sort_key(e.upper), index_sort_key(e.lower), e.word))
    loops.sort()
    return TensorTerm(tuple(edges), tuple(loops))


def product(t: TensorTerm, s: TensorTerm) -> TensorTerm:
    """Multiply two terms; defined only when their boundaries do not clash."""
    tb, sb = t.boundary, s.boundary
    shared_up = tb.upper & sb.upper
    if shared_up:
        raise Clash(min(shared_up, key=index_sort_key), UPPER)
    shared_low = tb.lower & sb.lower
    if shared_low:
        raise Clash(min(shared_low, key=index_sort_key), LOWER)
    return normalize(t.edges + t.loops + s.edges + s.loops)


def product_all(terms: Iterable[TensorTerm]) -> TensorTerm:
    out = UNIT
    for t in terms:
        out = product(out, t)
    return out


def boundary(t: TensorTerm) -> Boundary:
    return t.boundary


def reparameterize(t: TensorTerm, polarity: Polarity, old: Index, new: Index) -> TensorTerm:
    """Replace the free ``polarity`` occurrence of ``old`` by the unused ``new``."""
    side = t.upper if polarity is UPPER else t.lower
    if old not in side:
        raise NotFree(f"{old!r} is not a free {polarity.value} index of {t}")
    if new in t.indices():
        raise AlreadyOccurs(f"{new!r} already occurs in {t}")
    edges = []
    for e in t.edges:
        if polarity is UPPER and e.upper == old:
            e = Edge(e.word, new, e.lower)
        elif polarity is LOWER and e.lower == old:
            e = Edge(e.word, e.upper, new)
        edges.append(e)
    return normalize(edges + list(t.loops))


def rename_indices(t: TensorTerm, mapping: dict[Index, Index]) -> TensorTerm:
    """Apply an injective renaming to every endpoint of ``t``."""
    return normalize(
        [Edge(e.word, mapping.get(e.upper, e.upper), mapping.get(e.lower, e.lower)) for e in t.edges]
        + list(t.loops)
    )


def kronecker(upper: Index, lower: Index) -> TensorTerm:
    """The delta ``[]^upper_lower``: an empty-word edge between distinct indices."""
    if upper == lower:
        raise EqualIndices(f"delta needs two distinct indices, got {upper!r} twice")
    return TensorTerm((Edge((), upper, lower),), ())


def classify(t: TensorTerm) -> TermClass:
    flags = TermClass.SINGULAR if t.loops else TermClass.REGULAR
    if all(e.word for e in t.edges) and all(lp.word for lp in t.loops):
        flags |= TermClass.LEXICAL
    return flags


def is_regular(t: TensorTerm) -> bool:
    return not t.loops


def is_lexical(t: TensorTerm) -> bool:
    return TermClass.LEXICAL in classify(t)


def words(t: TensorTerm) -> Iterator[Word]:
    for e in t.edges:
        yield e.word
    for lp in t.loops:
        yield lp.word


# ---------------------------------------------------------------------------
# text syntax

_SIMPLE_INDEX = re.compile(r"[A-Za-z0-9']+\Z")


def _fmt_index(i: Index) -> str:
    return i if _SIMPLE_INDEX.match(i) else "{" + i + "}"


_TERM_TOKEN = re.compile(
    r"""\s*(?:
        (?P<edge>\[(?P<ew>[^\]]*)\])
      | (?P<loop>\((?P<lw>[^)]*)\))
      | (?P<dot>[.·])
      | (?P<one>1)
    )""",
    re.VERBOSE,
)

_INDEX_SPEC = re.compile(r"\s*(?:\{(?P<braced>[^}]*)\}|(?P<plain>[A-Za-z0-9']+))")


def read_index_list(text: str, pos: int, allow_internal: bool) -> tuple[list[Index], int]:
    """Read the index list that follows a ``^`` or ``_`` marker."""
    m = _INDEX_SPEC.match(text, pos)
    if not m:
        raise TermSyntaxError(f"expected an index at position {pos} in {text!r}")
    if m.group("plain") is not None:
        names = [m.group("plain")]
    else:
        names = [n for n in re.split(r"[\s,]+", m.group("braced").strip()) if n]
    for n in names:
        if is_internal_index(n) and not allow_internal:
            raise TermSyntaxError(f"index {n!r}: names starting with '_' are reserved")
        if not re.fullmatch(r"[A-Za-z0-9'_%]+", n):
            raise TermSyntaxError(f"bad index name {n!r}")
        if allow_internal:
            reserve_index(n)
    return names, m.end()


def _read_edge_indices(text: str, pos: int, allow_internal: bool) -> tuple[Index, Index, int]:
    up = low = None
    for _ in range(2):
        m = re.compile(r"\s*([\^_])").match(text, pos)
        if not m:
            break
        names, pos = read_index_list(text, m.end(), allow_internal)
        if len(names) != 1:
            raise TermSyntaxError(f"an edge has exactly one upper and one lower index in {text!r}")
        if m.group(1) == "^":
            if up is not None:
                raise TermSyntaxError(f"two upper indices on one edge in {text!r}")
            up = names[0]
        else:
            if low is not None:
                raise TermSyntaxError(f"two lower indices on one edge in {text!r}")
            low = names[0]
    if up is None or low is None:
        raise TermSyntaxError(f"edge at position {pos} lacks an upper or lower index in {text!r}")
    return up, low, pos


def parse_pseudoterm(text: str, allow_internal: bool = False) -> PseudoTerm:
    """Parse ``[a b]^i_j . (c) . []^j_k`` style text into a pseudo-term."""
    factors: list[Elementary] = []
    pos = 0
    expect_factor = True
    text = text.rstrip()
    while pos < len(text):
        m = _TERM_TOKEN.match(text, pos)
        if not m:
            raise TermSyntaxError(f"unexpected input at position {pos} in {text!r}")
        pos = m.end()
        if m.group("dot"):
            if expect_factor:
                raise TermSyntaxError(f"misplaced '.' in {text!r}")
            expect_factor = True
            continue
        if not expect_factor:
            raise TermSyntaxError(f"missing '.' between factors in {text!r}")
        expect_factor = False
        if m.group("edge"):
            up, low, pos = _read_edge_indices(text, pos, allow_internal)
            factors.append(Edge(tuple(m.group("ew").split()), up, low))
        elif m.group("loop"):
            factors.append(Loop(tuple(m.group("lw").split())))
        # the literal unit contributes nothing
    if expect_factor and factors:
        raise TermSyntaxError(f"dangling '.' in {text!r}")
    return PseudoTerm(tuple(factors))


def parse_term(text: str, allow_internal: bool = False) -> TensorTerm:
    return normalize(parse_pseudoterm(text, allow_internal))

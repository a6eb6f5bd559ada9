"""Tensor grammars: lexicons of typing judgements and parsing by proof search.

A lexicon entry ``t :: A`` pairs a lexical term with a formula of the same
boundary.  Terminal tokens become literals of valency (1,1) in the
*extended* language, which turns a term into a context (``ct_map``) and a
judgement into a sequent (``sequent_form``).

A judgement ``t :: A`` is derivable in a grammar when ``t`` factors into
renamed lexicon entries ``t1 .. tn`` with ``|- ~A1, .., ~An, A`` provable.
``derive_judgement`` searches such factorizations by tiling the words of
``t`` with the words of the entries, then calls the prover once per
candidate.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import permutations, product
from typing import Iterator, Optional, Sequence

from .formulas import Atom, Formula, FormulaError, Signature, atom, bot, dual, one, parse_formula, rename_all, rename_free
from .prover import NotDerivable, SearchConfig, prove, prove_from_axioms
from .sequents import Derivation, Sequent, canonical_key, make_lex, validate_derivation
from .terms import Edge, Index, TensorTerm, TermError, fresh_index, is_lexical, is_regular, normalize, parse_term

# ---------------------------------------------------------------------------
# judgements and lexicons


class GrammarError(ValueError):
    pass


class LexiconError(GrammarError):
    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


@dataclass(frozen=True)
class TypingJudgement:
    term: TensorTerm
    formula: Formula

    def __post_init__(self):
        if self.term.upper != self.formula.free_up or self.term.lower != self.formula.free_low:
            raise GrammarError(f"boundary of {self.term} differs from that of {self.formula}")

    def __str__(self) -> str:
        return f"{self.term} :: {self.formula}"


@dataclass
class Lexicon:
    entries: list[TypingJudgement]
    signature: Signature
    terminals: frozenset[str]
    sentence: Optional[str] = None

    def axioms(self) -> list[Sequent]:
        """Sequent forms of the entries (the non-logical axioms)."""
        return [sequent_form(e) for e in self.entries]


@dataclass
class Grammar:
    lexicon: Lexicon
    sentence: str

    def __post_init__(self):
        sig = self.lexicon.signature
        if sig.valency.get(self.sentence, sig.default) != (1, 1):
            raise GrammarError(f"sentence symbol {self.sentence!r} must have valency (1, 1)")


_LITERAL = re.compile(r"literal\s+([A-Za-z0-9']+)\s*:\s*(\d+)\s+(\d+)\s*$")
_SENTENCE = re.compile(r"sentence\s+([A-Za-z0-9']+)\s*$")


def _formula_literals(f: Formula) -> Iterator[Atom]:
    for at in f.atoms():
        if not at.is_unit:
            yield at


def check_entry(entry: TypingJudgement, signature: Signature) -> list[str]:
    """Problems that keep ``entry`` out of a lexicon (empty when it is fine)."""
    out = []
    if not is_regular(entry.term):
        out.append(f"term {entry.term} has a loop (not regular)")
    if not is_lexical(entry.term):
        out.append(f"term {entry.term} has an empty word (not lexical)")
    for at in _formula_literals(entry.formula):
        try:
            signature.check(at)
        except FormulaError as exc:
            out.append(str(exc))
    return out


def parse_lexicon(text: str) -> tuple[Lexicon, list[str]]:
    """Parse a lexicon file; returns the lexicon and per-line diagnostics."""
    sig = Signature()
    declared: set[str] = set()
    problems: list[str] = []
    entries: list[TypingJudgement] = []
    sentence = None
    pending: list[tuple[int, str, str]] = []
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if m := _LITERAL.match(line):
            name, up, low = m.group(1), int(m.group(2)), int(m.group(3))
            try:
                sig.declare(name, up, low)
                declared.add(name)
            except FormulaError as exc:
                problems.append(f"line {no}: {exc}")
        elif m := _SENTENCE.match(line):
            sentence = m.group(1)
        elif "::" in line:
            term_text, formula_text = line.split("::", 1)
            pending.append((no, term_text.strip(), formula_text.strip()))
        else:
            problems.append(f"line {no}: cannot read {line!r}")
    for no, term_text, formula_text in pending:
        try:
            term = parse_term(term_text)
            formula = parse_formula(formula_text, sig)
        except (TermError, FormulaError) as exc:
            problems.append(f"line {no}: {exc}")
            continue
        try:
            entry = TypingJudgement(term, formula)
        except GrammarError as exc:
            problems.append(f"line {no}: {exc}")
            continue
        problems.extend(f"line {no}: {p}" for p in check_entry(entry, sig))
        entries.append(entry)
    terminals = frozenset(tok for e in entries for w in (x.word for x in e.term.edges) for tok in w)
    literals = declared | {at.name for e in entries for at in _formula_literals(e.formula)}
    clash = terminals & literals
    if clash:
        problems.append(f"tokens {sorted(clash)} are also used as literal names")
    if sentence is not None and sig.valency.get(sentence, sig.default) != (1, 1):
        problems.append(f"sentence symbol {sentence!r} must have valency (1, 1)")
    return Lexicon(entries, sig, terminals, sentence), problems


def load_lexicon(text: str) -> Lexicon:
    lex, problems = parse_lexicon(text)
    if problems:
        raise LexiconError(problems)
    return lex


def validate_lexicon(text: str) -> list[str]:
    return parse_lexicon(text)[1]


def load_grammar(text: str, sentence: Optional[str] = None) -> Grammar:
    lex = load_lexicon(text)
    s = sentence or lex.sentence
    if s is None:
        raise GrammarError("no sentence symbol given")
    return Grammar(lex, s)


RELATIVE_CLAUSE_LEXICON = """\
# noun phrases, a transitive verb, an adverb and a relative pronoun
literal np : 1 1
literal s : 1 1
sentence s
[Mary]^i_j :: np^i_j
[John]^i_j :: np^i_j
[loves]^i_j :: np^j_y -o np^x_i -o s^x_y
[madly]^y_k :: (np^x_i -o s^x_y) -o np^z_i -o s^z_k
[who]^t_z :: 1^j_y * (np^j_y -o s^z_k) -o np^u_t -o np^u_k
"""


def relative_clause_grammar(sentence: str = "s") -> Grammar:
    return load_grammar(RELATIVE_CLAUSE_LEXICON, sentence)


# ---------------------------------------------------------------------------
# terms as contexts


def _edge_context(word: Sequence[str], upper: Index, lower: Index) -> list[Formula]:
    if not word:
        return [bot(lower, upper)]
    names = [upper] + [fresh_index() for _ in word[1:]] + [lower]
    return [dual(atom(tok, (names[k],), (names[k + 1],))) for k, tok in enumerate(word)]


def ct_map(t: TensorTerm) -> list[Formula]:
    """Context of the extended language representing ``t``.

    Words are split into one-token edges through fresh indices;
    ``[a]^i_j`` becomes ``~a^j_i`` and the delta ``[]^i_j`` becomes
    ``bot^j_i``.  Loops are opened with fresh indices.
    """
    out: list[Formula] = []
    for e in t.edges:
        out.extend(_edge_context(e.word, e.upper, e.lower))
    for lp in t.loops:
        i, j = fresh_index(), fresh_index()
        if not lp.word:
            out += [bot(j, i), bot(i, j)]
        elif len(lp.word) == 1:
            out += [bot(i, j)] + _edge_context(lp.word, i, j)
        else:
            names = [i] + [fresh_index() for _ in lp.word[1:]] + [i]
            out += [dual(atom(tok, (names[k],), (names[k + 1],))) for k, tok in enumerate(lp.word)]
    return out


def sequent_form(j: TypingJudgement) -> Sequent:
    """``|- ct(t), A`` for the judgement ``t :: A``."""
    return Sequent(ct_map(j.term) + [j.formula])


# ---------------------------------------------------------------------------
# factorization search


@dataclass
class GrammarConfig:
    max_typing_axioms: int = 0
    max_witnesses: int = 10
    search: SearchConfig = field(default_factory=SearchConfig)


@dataclass(frozen=True)
class Witness:
    """Renamed lexicon entries (``None`` marks a typing axiom) and a proof of
    ``|- ~A1, .., ~An, A``."""

    entries: tuple[Optional[int], ...]
    instances: tuple[TypingJudgement, ...]
    derivation: Derivation

    def term(self) -> TensorTerm:
        return normalize(list(f for inst in self.instances for f in inst.term.edges))

    def lex_derivation(self, lex: "Lexicon") -> Derivation:
        """Derivation of the sequent form from the lexicon axioms, one Lex step per entry.

        Typing axioms need no step: the dual of ``1^i_j`` is already ``ct([]^i_j)``.
        """
        d = self.derivation
        for inst, idx in zip(self.instances, self.entries):
            if idx is not None:
                d = make_lex(d, sequent_form(lex.entries[idx]), sequent_form(inst), inst.formula)
        return d

    def __str__(self) -> str:
        return " , ".join(str(i) for i in self.instances)


@dataclass
class ParseResult:
    member: bool
    witnesses: list[Witness]

    def __bool__(self) -> bool:
        return self.member


@dataclass(frozen=True)
class _Piece:
    entry: Optional[int]  # None: typing axiom
    edge: int
    word: tuple[str, ...]


def _tilings(word: tuple[str, ...], pieces: list[_Piece], deltas: int) -> Iterator[tuple[list[_Piece], int]]:
    """Sequences of pieces whose words concatenate to ``word``, with the number of deltas used."""

    def go(pos: int, left: int, acc: list[_Piece], last_delta: bool):
        if pos == len(word) and acc:
            yield list(acc), deltas - left
        for pc in pieces:
            n = len(pc.word)
            if n and tuple(word[pos : pos + n]) == pc.word:
                acc.append(pc)
                yield from go(pos + n, left, acc, False)
                acc.pop()
        if left and not last_delta:
            acc.append(_Piece(None, 0, ()))
            yield from go(pos, left - 1, acc, True)
            acc.pop()

    yield from go(0, deltas, [], False)


def _fresh_bound(f: Formula) -> Formula:
    return rename_all(f, {b: fresh_index() for b in f.bound}) if f.bound else f


def _instances(
    lex: Lexicon, placed: list[tuple[_Piece, Index, Index]]
) -> Iterator[list[tuple[Optional[int], TypingJudgement]]]:
    """Group placed pieces into whole entry instances (all edges of an entry together)."""
    singles: list[tuple[Optional[int], TypingJudgement]] = []
    groups: dict[int, dict[int, list[tuple[Index, Index]]]] = {}
    for pc, up, low in placed:
        if pc.entry is None:
            singles.append((None, TypingJudgement(TensorTerm((Edge((), up, low),)), one(up, low))))
            continue
        entry = lex.entries[pc.entry]
        if len(entry.term.edges) == 1:
            e = entry.term.edges[0]
            f = rename_free(_fresh_bound(entry.formula), {e.upper: up, e.lower: low})
            singles.append((pc.entry, TypingJudgement(TensorTerm((Edge(e.word, up, low),)), f)))
        else:
            groups.setdefault(pc.entry, {}).setdefault(pc.edge, []).append((up, low))
    options: list[list[list[tuple[int, TypingJudgement]]]] = []
    for idx, by_edge in groups.items():
        entry = lex.entries[idx]
        edges = entry.term.edges
        counts = {len(by_edge.get(k, [])) for k in range(len(edges))}
        if len(counts) != 1:
            return
        (n,) = counts
        choices = []
        for perms in product(*(permutations(by_edge[k]) for k in range(1, len(edges)))):
            insts = []
            for m in range(n):
                ends = [by_edge[0][m]] + [perms[k - 1][m] for k in range(1, len(edges))]
                mapping: dict[Index, Index] = {}
                for e, (up, low) in zip(edges, ends):
                    mapping[e.upper] = up
                    mapping[e.lower] = low
                term = TensorTerm(tuple(Edge(e.word, *end) for e, end in zip(edges, ends)))
                f = rename_free(_fresh_bound(entry.formula), mapping)
                insts.append((idx, TypingJudgement(term, f)))
            choices.append(insts)
        options.append(choices)
    for combo in product(*options):
        yield singles + [inst for part in combo for inst in part]


def factorizations(lex: Lexicon, t: TensorTerm, max_typing_axioms: int = 0) -> Iterator[list]:
    """All ways of writing ``t`` as a product of renamed entries (and typing axioms)."""
    if not is_regular(t):
        raise GrammarError(f"{t} is not regular")
    pieces = [_Piece(k, m, e.word) for k, j in enumerate(lex.entries) for m, e in enumerate(j.term.edges)]
    per_edge = [list(_tilings(e.word, pieces, max_typing_axioms)) for e in t.edges]
    for choice in product(*per_edge):
        if sum(n for _, n in choice) > max_typing_axioms:
            continue
        placed = []
        for e, (tiling, _) in zip(t.edges, choice):
            names = [e.upper] + [fresh_index() for _ in tiling[1:]] + [e.lower]
            placed += [(pc, names[k], names[k + 1]) for k, pc in enumerate(tiling)]
        yield from _instances(lex, placed)


def derive_judgement(
    g: Grammar | Lexicon, t: TensorTerm, a: Formula, cfg: Optional[GrammarConfig] = None
) -> ParseResult:
    """Is ``t :: a`` derivable from the lexicon?  Collects up to ``cfg.max_witnesses`` parses."""
    cfg = cfg or GrammarConfig()
    lex = g.lexicon if isinstance(g, Grammar) else g
    TypingJudgement(t, a)
    seen: set = set()
    witnesses: list[Witness] = []
    for insts in factorizations(lex, t, cfg.max_typing_axioms):
        seq = Sequent([dual(j.formula) for _, j in insts] + [a])
        key = canonical_key(seq.formulas)
        if key in seen:
            continue
        seen.add(key)
        try:
            d = prove(seq, cfg.search)
        except NotDerivable:
            continue
        witnesses.append(Witness(tuple(k for k, _ in insts), tuple(j for _, j in insts), d))
        if len(witnesses) >= cfg.max_witnesses:
            break
    witnesses.sort(key=str)
    return ParseResult(bool(witnesses), witnesses)


def tokenize(words: str | Sequence[str]) -> tuple[str, ...]:
    return tuple(words.split()) if isinstance(words, str) else tuple(words)


def language_membership(
    g: Grammar, words: str | Sequence[str], cfg: Optional[GrammarConfig] = None, ends: tuple[Index, Index] = ("i", "j")
) -> ParseResult:
    """Is ``[w]^i_j :: S^i_j`` derivable, for the sentence symbol ``S``?"""
    i, j = ends
    t = TensorTerm((Edge(tokenize(words), i, j),))
    return derive_judgement(g, t, atom(g.sentence, (i,), (j,)), cfg)


def derive_from_axioms(lex: Lexicon, t: TensorTerm, a: Formula, cfg: Optional[SearchConfig] = None) -> bool:
    """Decide ``t :: a`` by proof search from the sequent forms of the lexicon."""
    try:
        prove_from_axioms(sequent_form(TypingJudgement(t, a)), lex.axioms(), cfg)
    except NotDerivable:
        return False
    return True


def check_witness(lex: Lexicon, t: TensorTerm, a: Formula, w: Witness) -> None:
    """Replay a witness: the product of its terms is ``t`` and both derivations validate."""
    if w.term() != normalize(t):
        raise GrammarError(f"witness terms multiply to {w.term()}, not {t}")
    validate_derivation(w.derivation)
    want = Sequent([dual(j.formula) for j in w.instances] + [a])
    if w.derivation.conclusion != want:
        raise GrammarError("witness derivation proves a different sequent")
    validate_derivation(w.lex_derivation(lex), axioms=lex.axioms())


__all__ = [
    "RELATIVE_CLAUSE_LEXICON",
    "Grammar",
    "GrammarConfig",
    "GrammarError",
    "Lexicon",
    "LexiconError",
    "ParseResult",
    "TypingJudgement",
    "Witness",
    "check_entry",
    "check_witness",
    "ct_map",
    "derive_from_axioms",
    "derive_judgement",
    "factorizations",
    "relative_clause_grammar",
    "language_membership",
    "load_grammar",
    "load_lexicon",
    "parse_lexicon",
    "sequent_form",
    "tokenize",
    "validate_lexicon",
]

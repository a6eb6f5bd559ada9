"""Small random lexicons for cross-checking the factorization search."""

import random

from tensorlogic.formulas import Signature, atom
from tensorlogic.grammars import Lexicon, TypingJudgement
from tensorlogic.terms import Edge, TensorTerm
from tensorlogic.translations import LLit, Over, Product, Under, lambek_to_ittl

LITERALS = ("np", "s")


def random_lambek(rng: random.Random, size: int):
    if size == 0:
        return LLit(rng.choice(LITERALS))
    k = rng.randint(0, size - 1)
    left, right = random_lambek(rng, k), random_lambek(rng, size - 1 - k)
    return rng.choice((Under, Over, Product))(left, right)


def random_lexicon(rng: random.Random, words=("w1", "w2", "w3"), max_size: int = 2) -> Lexicon:
    sig = Signature()
    for name in LITERALS:
        sig.declare(name, 1, 1)
    entries = []
    for w in words:
        for _ in range(rng.randint(1, 2)):
            f = lambek_to_ittl(random_lambek(rng, rng.randint(0, max_size)), "i", "j")
            entries.append(TypingJudgement(TensorTerm((Edge((w,), "i", "j"),)), f))
    return Lexicon(entries, sig, frozenset(words), "s")


def random_query(rng: random.Random, lex: Lexicon, max_len: int = 3):
    words = tuple(rng.choice(sorted(lex.terminals)) for _ in range(rng.randint(1, max_len)))
    goal = atom(rng.choice(LITERALS), ("i",), ("j",))
    return TensorTerm((Edge(words, "i", "j"),)), goal

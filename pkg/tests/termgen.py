"""Pairs of pseudo-terms related by one application of the defining relations."""

import random

from tensorlogic.terms import Edge, Loop, PseudoTerm

TOKENS = ("a", "b", "c")


def random_rewrite(rng: random.Random, factors: list) -> list:
    """Apply one defining relation to a random factor, in either direction."""
    out = list(factors)
    k = rng.randrange(len(out))
    f = out[k]
    if isinstance(f, Loop):
        w = f.word
        r = rng.randrange(len(w) + 1)
        out[k] = Loop(w[r:] + w[:r])
        return out
    if len(f.word) >= 1 and rng.random() < 0.7:
        cut = rng.randint(0, len(f.word))
        mid = f"m{rng.randrange(10**9)}"
        out[k : k + 1] = [Edge(f.word[:cut], f.upper, mid), Edge(f.word[cut:], mid, f.lower)]
        return out
    mid = f"m{rng.randrange(10**9)}"
    out[k : k + 1] = [Edge((), f.upper, mid), Edge(f.word, mid, f.lower)]
    return out


def random_rewrite_pair(rng: random.Random) -> tuple[PseudoTerm, PseudoTerm]:
    n = rng.randint(1, 4)
    names = [f"x{k}" for k in range(n + 2)]
    lows = names[:]
    rng.shuffle(lows)
    base = [Edge(tuple(rng.choice(TOKENS) for _ in range(rng.randint(0, 3))), u, l) for u, l in zip(names[:n], lows[:n])]
    base += [Loop(("a", "b"))] if rng.random() < 0.2 else []
    return PseudoTerm(tuple(base)), PseudoTerm(tuple(random_rewrite(rng, base)))

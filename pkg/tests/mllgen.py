"""Random MLL derivations for the translation tests."""

from __future__ import annotations

import random

from tensorlogic.translations import (
    MLit,
    MPar,
    MTensor,
    MllFormula,
    dual_mll,
    mll_arrange,
    mll_cut,
    mll_prove,
)

LITERALS = ("p", "q")


def random_mll(rng: random.Random, connectives: int, literals=LITERALS) -> MllFormula:
    if connectives == 0:
        return MLit(rng.choice(literals), rng.random() < 0.5)
    k = rng.randrange(connectives)
    cls = MTensor if rng.random() < 0.5 else MPar
    return cls(random_mll(rng, k, literals), random_mll(rng, connectives - 1 - k, literals))


def unpack(rng: random.Random, f: MllFormula) -> list[MllFormula]:
    """Formulas ``D`` with ``|- ~f, D`` derivable: pars of ``f`` are opened at random."""
    if isinstance(f, MPar) and rng.random() < 0.7:
        return unpack(rng, f.left) + unpack(rng, f.right)
    return [f]


def one_cut_mll(rng: random.Random, max_connectives: int = 3):
    """A random MLL derivation whose only cut is its last step."""
    while True:
        a = random_mll(rng, rng.randint(1, max_connectives))
        gamma = unpack(rng, dual_mll(a))
        delta = unpack(rng, a)
        rng.shuffle(gamma)
        rng.shuffle(delta)
        p1 = mll_prove(tuple(gamma) + (a,), rng=rng)
        p2 = mll_prove((dual_mll(a),) + tuple(delta), rng=rng)
        if p1 is None or p2 is None:
            continue
        return mll_cut(mll_arrange(p1, tuple(gamma) + (a,)), mll_arrange(p2, (dual_mll(a),) + tuple(delta)))

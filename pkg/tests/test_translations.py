import random

import pytest
from hypothesis import given, settings, strategies as st

from enumerate_small import cmll_sequents, lambek_sequents
from mllgen import one_cut_mll, random_mll, unpack
from tensorlogic.formulas import alpha_eq, bot, dual, parse_formula
from tensorlogic.prover import is_derivable, prove
from tensorlogic.sequents import RuleTag, Sequent, are_similar, parse_sequent, validate_derivation
from tensorlogic.terms import EqualIndices
from tensorlogic.translations import (
    LambekSyntaxError,
    LLit,
    MLit,
    MTensor,
    NotACycle,
    NotCyclicFragment,
    Over,
    Product,
    Under,
    cmll_oracle,
    cmll_seq_to_ttl,
    cmll_to_ttl,
    cyclic_readback,
    dual_mll,
    lambek_oracle,
    lambek_seq_to_ittl,
    lambek_to_ittl,
    mll_derivation_to_ttl,
    mll_eliminate_cuts,
    mll_id,
    mll_oracle,
    mll_prove,
    mll_seq_str,
    parse_lambek,
    parse_lambek_sequent,
    parse_mll_sequent,
    validate_mll,
)

F = parse_formula
L = parse_lambek_sequent


def test_lambek_parse():
    assert parse_lambek("np\\s") == Under(LLit("np"), LLit("s"))
    assert parse_lambek("s/np") == Over(LLit("s"), LLit("np"))
    assert parse_lambek("a . b") == Product(LLit("a"), LLit("b"))
    assert parse_lambek("a\\b\\c") == Under(LLit("a"), Under(LLit("b"), LLit("c")))
    with pytest.raises(LambekSyntaxError):
        parse_lambek("a\\b/c")
    with pytest.raises(LambekSyntaxError):
        parse_lambek("(a")


def test_lambek_formula_cases():
    assert lambek_to_ittl(LLit("p"), "i", "j") == F("p^i_j")
    under = lambek_to_ittl(parse_lambek("np\\s"), "x", "y")
    assert alpha_eq(under, F("np^k_x -o s^k_y"))
    over = lambek_to_ittl(parse_lambek("s/np"), "i", "j")
    assert alpha_eq(over, F("np^j_k -o s^i_k"))
    prod = lambek_to_ittl(parse_lambek("a . b"), "i", "j")
    assert alpha_eq(prod, F("a^i_k * b^k_j"))
    with pytest.raises(EqualIndices):
        lambek_to_ittl(LLit("p"), "i", "i")


def test_lambek_sequent_chain():
    s = lambek_seq_to_ittl(L("np, np\\s |- s"))
    assert s.antecedent[0] == F("np^i0_i1")
    assert alpha_eq(s.antecedent[1], F("np^k_i1 -o s^k_i2"))
    assert s.succedent == F("s^i0_i2")
    empty = lambek_seq_to_ittl(L("|- p\\p"))
    assert empty.antecedent == (F("1^i0_i1"),)
    assert lambek_seq_to_ittl(L("p |- p")).to_classical() == parse_sequent("p^i0_i1 |- p^i0_i1").to_classical()


def test_cyclic_translation():
    s = cmll_seq_to_ttl(parse_mll_sequent("|- ~p, p"))
    assert s == Sequent([dual(F("p^i1_i0")), F("p^i1_i0")])
    single = cmll_seq_to_ttl(parse_mll_sequent("|- ~p | p"))
    assert single.formulas[0] == bot("i0", "i1")
    assert single.formulas[1].free_up == {"i1"} and single.formulas[1].free_low == {"i0"}
    t = cmll_to_ttl(MTensor(MLit("a"), MLit("b")), "i", "j")
    assert alpha_eq(t, F("a^i_k * b^k_j"))


def test_readback():
    src = parse_mll_sequent("|- ~p, p * q, ~q")
    assert cyclic_readback(cmll_seq_to_ttl(src)) == src
    single = parse_mll_sequent("|- ~p | p")
    assert cyclic_readback(cmll_seq_to_ttl(single)) == single
    two = Sequent(list(cmll_seq_to_ttl(parse_mll_sequent("|- ~p, p"))) + list(cmll_seq_to_ttl(parse_mll_sequent("|- ~q, q"), ["x", "y"])))
    with pytest.raises(NotACycle):
        cyclic_readback(two)
    with pytest.raises(NotCyclicFragment):
        cyclic_readback(parse_sequent("|- a^{i k}_{j l}, ~a^{i k}_{j l}"))


def test_oracle_examples():
    assert lambek_oracle(L("p, p\\q |- q"))
    assert not lambek_oracle(L("p\\q, p |- q"))
    assert mll_oracle(parse_mll_sequent("|- ~p | p"))
    assert cmll_oracle(parse_mll_sequent("|- p, ~p"))
    assert not cmll_oracle(parse_mll_sequent("|- p * q, ~p, ~q"))
    assert mll_oracle(parse_mll_sequent("|- p * q, ~p, ~q"))


def test_mll_identity_translation():
    s, d = mll_derivation_to_ttl(mll_id(MLit("p")))
    assert are_similar(s, parse_sequent("|- ~p^i_j, p^i_j"))
    assert d.rule is RuleTag.ID


def test_mll_par_keeps_decorations():
    base = mll_prove(parse_mll_sequent("|- ~q, ~p, p * q"))
    s0, _ = mll_derivation_to_ttl(base)
    d = mll_prove(parse_mll_sequent("|- ~q | ~p, p * q"))
    s1, t1 = mll_derivation_to_ttl(d)
    validate_derivation(t1)
    assert sorted(f.size for f in s1) == [3, 3]


def test_cut_translation_uses_counit_bracketing():
    rng = random.Random(0)
    seen = False
    for _ in range(30):
        d = one_cut_mll(rng)
        s, t = mll_derivation_to_ttl(d)
        validate_derivation(t)
        if t.rule in (RuleTag.COUNIT_REDUCE, RuleTag.CUT):
            seen = seen or RuleTag.CUT in t.rules_used()
    assert seen


def test_lambek_agreement_two_connectives():
    for s in lambek_sequents(2, 3):
        assert lambek_oracle(s) == is_derivable(lambek_seq_to_ittl(s)), s


def test_cmll_agreement_two_connectives():
    for fs in cmll_sequents(2, 3):
        assert cmll_oracle(fs) == is_derivable(cmll_seq_to_ttl(fs)), mll_seq_str(fs)


def test_lambek_embeds_into_cmll():
    for s in lambek_sequents(2, 2):
        assert lambek_oracle(s) <= cmll_oracle(lambek_to_mll_seq(s)), s


def lambek_to_mll_seq(s):
    from tensorlogic.translations import lambek_seq_to_cmll

    return lambek_seq_to_cmll(s)


@settings(max_examples=60)
@given(st.integers(0, 10**6))
def test_decoration_independence(seed):
    rng = random.Random(seed)
    fs = tuple(random_mll(rng, rng.randint(0, 2)) for _ in range(rng.randint(1, 3)))
    n = len(fs) if len(fs) > 1 else 2
    a = cmll_seq_to_ttl(fs)
    b = cmll_seq_to_ttl(fs, [f"z{k}" for k in reversed(range(n))])
    assert are_similar(a, b)
    assert is_derivable(a) == is_derivable(b)


@settings(max_examples=80)
@given(st.integers(0, 10**6))
def test_readback_inverts_translation(seed):
    rng = random.Random(seed)
    fs = tuple(random_mll(rng, rng.randint(0, 2)) for _ in range(rng.randint(1, 3)))
    assert cyclic_readback(cmll_seq_to_ttl(fs)) == fs


def test_mll_cut_elimination_and_invariance():
    rng = random.Random(5)
    for _ in range(40):
        d = one_cut_mll(rng)
        validate_mll(d)
        e = mll_eliminate_cuts(d)
        validate_mll(e)
        assert e.cuts() == 0 and e.conclusion == d.conclusion
        s1, t1 = mll_derivation_to_ttl(d)
        s2, t2 = mll_derivation_to_ttl(e)
        validate_derivation(t1)
        validate_derivation(t2, cut_free=True)
        assert are_similar(s1, s2)


@settings(max_examples=60)
@given(st.integers(0, 10**6))
def test_mll_like_proofs_avoid_counits(seed):
    rng = random.Random(seed)
    a = random_mll(rng, rng.randint(1, 3))
    fs = tuple(unpack(rng, dual_mll(a))) + (a,)
    d = mll_prove(fs, rng=rng)
    if d is None:
        return
    s, _ = mll_derivation_to_ttl(d)
    found = prove(s)
    assert not found.rules_used() & {RuleTag.COUNIT_EXPAND, RuleTag.COUNIT_REDUCE}

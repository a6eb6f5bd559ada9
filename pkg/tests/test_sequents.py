import random

import pytest
from hypothesis import given, settings, strategies as st

from gen import random_sequent
from tensorlogic.formulas import bot, dual, one, parse_formula
from tensorlogic.prover import NotDerivable, SearchConfig, prove
from tensorlogic.sequents import (
    DanglingIndex,
    DuplicateIndex,
    InvalidDerivation,
    IntuitionisticSequent,
    RuleMismatch,
    RuleTag,
    Sequent,
    are_similar,
    check_intuitionistic_step,
    check_step,
    from_json,
    make_counit_reduce,
    make_cut,
    make_id,
    make_tensor,
    parse_classical,
    parse_sequent,
    sequent_well_formed,
    similar_canonical,
    similarity_derivation,
    to_json,
    validate_derivation,
)

F = parse_formula
S = parse_classical


def test_well_formed_examples():
    sequent_well_formed(S("|- ~a^i_j, a^i_j"))
    sequent_well_formed(S("|- bot^j_i, 1^i_j"))
    with pytest.raises(DanglingIndex):
        sequent_well_formed(Sequent([F("a^i_j")]))
    with pytest.raises(DuplicateIndex):
        sequent_well_formed(Sequent([F("a^i_j"), F("b^i_k"), F("~a^l_j"), F("~b^l_k")]))


def test_intuitionistic_converts():
    s = parse_sequent("a^i_j |- a^i_j")
    assert isinstance(s, IntuitionisticSequent)
    assert s.to_classical() == S("|- ~a^i_j, a^i_j")


def test_check_par():
    f = F("~a^i_j | a^i_j")
    check_step(RuleTag.PAR, {"formula": f}, [S("|- ~a^i_j, a^i_j")], Sequent([f]))


def test_check_counit_reduce():
    # |- G, A, bot^j_i with j a free lower index of A gives |- G, A_[i/j]
    prem = Sequent([F("~a^j_k"), bot("j", "i"), F("a^i_k")])
    concl = Sequent([F("~a^i_k"), F("a^i_k")])
    a = dual(F("a^j_k"))
    check_step(RuleTag.COUNIT_REDUCE, {"formula": a, "result": dual(F("a^i_k")), "upper": "j", "lower": "i"}, [prem], concl)


def test_check_tensor_rejects_bad_split():
    f = F("a^i_j * b^j_k")
    concl = Sequent([F("~a^i_j"), F("~b^j_k"), f])
    check_step(RuleTag.TENSOR, {"formula": f}, [S("|- ~a^i_j, a^i_j"), S("|- ~b^j_k, b^j_k")], concl)
    with pytest.raises(RuleMismatch, match="do not supply"):
        check_step(RuleTag.TENSOR, {"formula": f}, [S("|- ~a^i_j, a^i_j"), S("|- ~c^j_k, c^j_k")], concl)
    dangling = Sequent([F("~a^i_j"), F("a^i_m")])
    with pytest.raises(RuleMismatch, match="ill-formed"):
        check_step(RuleTag.TENSOR, {"formula": f}, [dangling, S("|- ~b^j_k, b^j_k")], concl)


def reparameterization_derivation():
    """a^i_k |- a^j_k * 1^i_j, by hand."""
    t = make_tensor(make_id(F("a^j_k")), make_id(one("i", "j")), F("a^j_k"), one("i", "j"))
    return make_counit_reduce(t, dual(F("a^j_k")), "j", "i")


def test_hand_built_reparameterization():
    d = reparameterization_derivation()
    validate_derivation(d, cut_free=True)
    assert d.conclusion == parse_sequent("a^i_k |- a^j_k * 1^i_j").to_classical()
    assert d.size == 4


def test_swapped_tensor_premises_validate():
    d = reparameterization_derivation()
    t = d.premises[0]
    swapped = type(t)(t.conclusion, t.rule, (t.premises[1], t.premises[0]), t.data)
    validate_derivation(type(d)(d.conclusion, d.rule, (swapped,), d.data))


def test_cut_rejected_in_cut_free_mode():
    p = make_id(F("a^i_j"))
    q = make_id(F("a^i_j"))
    d = make_cut(p, q, F("a^i_j"))
    validate_derivation(d)
    with pytest.raises(InvalidDerivation):
        validate_derivation(d, cut_free=True)


def test_broken_node_is_located():
    d = reparameterization_derivation()
    t = d.premises[0]
    bad_leaf = type(d)(t.premises[0].conclusion, RuleTag.PAR, (), {})
    t = type(t)(t.conclusion, t.rule, (bad_leaf, t.premises[1]), t.data)
    with pytest.raises(InvalidDerivation) as info:
        validate_derivation(type(d)(d.conclusion, d.rule, (t,), d.data))
    assert info.value.path == (0, 0)


def test_similar_canonical():
    a, _ = similar_canonical(S("|- ~a^i_j, a^i_j"))
    b, _ = similar_canonical(S("|- ~a^k_l, a^k_l"))
    assert a == b
    assert similar_canonical(a)[0] == a
    free = S("|- ~a^i_j, ~b^j_k, a^i_l * b^l_k")
    other = S("|- ~a^i_j * ~b^j_k, a^i_l * b^l_k")
    assert not are_similar(free, other)


def test_intuitionistic_rules():
    prem = parse_sequent("a^i_j |- a^i_j")
    concl = IntuitionisticSequent((), F("a^i_j -o a^i_j"))
    check_intuitionistic_step("R-o", {"formula": F("a^i_j -o a^i_j")}, [prem], concl)
    with pytest.raises(RuleMismatch):
        check_intuitionistic_step("L*", {"formula": F("a^i_j -o a^i_j")}, [prem], concl)


def test_json_roundtrip_is_exact():
    d = reparameterization_derivation()
    text = to_json(d)
    back = from_json(text)
    assert back == d
    assert to_json(back) == text
    validate_derivation(back)


@settings(max_examples=40)
@given(st.integers(0, 10**6))
def test_similarity_chain_validates(seed):
    rng = random.Random(seed)
    s = Sequent(random_sequent(rng, 2, 3, balanced=True))
    try:
        d = prove(s, SearchConfig(max_visited=20000))
    except NotDerivable:
        return
    free = sorted(s.free)
    targets = [f"r{k}" for k in range(len(free))]
    rng.shuffle(targets)
    mapping = dict(zip(free, targets))
    e = similarity_derivation(d, mapping)
    validate_derivation(e, cut_free=True)
    assert e.conclusion == s.rename(mapping)
    assert are_similar(e.conclusion, s)


@settings(max_examples=60)
@given(st.integers(0, 10**6))
def test_accepted_steps_have_well_formed_sequents(seed):
    s = Sequent(random_sequent(random.Random(seed), 3, 3, balanced=True))
    try:
        d = prove(s, SearchConfig(max_visited=20000))
    except NotDerivable:
        return
    for _, node in d.nodes():
        sequent_well_formed(node.conclusion)

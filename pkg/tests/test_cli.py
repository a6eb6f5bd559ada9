import json
import random
import re

import pytest
from click.testing import CliRunner

from cutgen import one_cut_derivations
from tensorlogic.cli import EXIT_BUDGET, EXIT_INPUT, EXIT_NO, EXIT_OK, main, render_derivation
from tensorlogic.formulas import Signature
from tensorlogic.prover import prove
from tensorlogic.sequents import (
    RULE_LABELS,
    RuleTag,
    are_similar,
    from_json,
    from_json_obj,
    parse_sequent,
    to_json,
    validate_derivation,
)
from tensorlogic.grammars import RELATIVE_CLAUSE_LEXICON, load_lexicon

UNIT_ID = "|- bot^j_i, 1^i_j"
CROSSED_TENSOR = "|- (a^i_j -o a^i_k) * (a^l_k -o a^l_j)"
BIG = "a^i_j, b^j_k, c^k_m |- (a^i_l * b^l_n) * c^n_m"


@pytest.fixture
def run():
    runner = CliRunner()

    def go(*args, env=None):
        return runner.invoke(main, list(args), env=env)

    return go


@pytest.fixture
def lexicon_file(tmp_path):
    path = tmp_path / "relative_clause.lex"
    path.write_text(RELATIVE_CLAUSE_LEXICON)
    return str(path)


def test_prove_unit_axiom(run):
    r = run("prove", UNIT_ID)
    assert r.exit_code == EXIT_OK
    lines = r.output.strip().splitlines()
    assert len(lines) == 1 and lines[0].endswith("(Id)")


def test_prove_underivable(run):
    r = run("prove", CROSSED_TENSOR)
    assert r.exit_code == EXIT_NO
    assert "not derivable" in r.output


def test_prove_bad_input(run):
    assert run("prove", "|- a^i_j *").exit_code == EXIT_INPUT
    assert run("prove", "--budget", "0", UNIT_ID).exit_code == EXIT_INPUT


def test_prove_budget(run):
    r = run("prove", "--budget", "1", BIG)
    assert r.exit_code == EXIT_BUDGET
    r = run("prove", BIG, env={"TTL_BUDGET": "1"})
    assert r.exit_code == EXIT_BUDGET
    assert run("prove", BIG).exit_code == EXIT_OK


def test_prove_json_revalidates(run):
    r = run("prove", "--json", BIG)
    doc = json.loads(r.output)
    assert doc["derivable"] and doc["sequent"]
    for obj in doc["derivations"]:
        d = from_json_obj(obj)
        validate_derivation(d, cut_free=True)
        assert are_similar(d.conclusion, parse_sequent(BIG).to_classical())


def test_prove_several_with_jobs(run):
    r = run("prove", "--json", "--jobs", "2", UNIT_ID, CROSSED_TENSOR)
    assert r.exit_code == EXIT_NO
    assert [doc["derivable"] for doc in json.loads(r.output)] == [True, False]


def test_prove_all(run):
    r = run("prove", "--all", "--json", "|- ~a^i_j, ~b^j_k, a^i_l * b^l_k")
    docs = json.loads(r.output)
    assert len(docs["derivations"]) >= 1


def test_dot_output(run):
    r = run("prove", "--dot", BIG)
    assert r.output.startswith("digraph")
    assert r.output.rstrip().endswith("}")
    assert "(⊗)" in r.output


def test_output_is_byte_stable(run):
    outs = {run("prove", BIG).output for _ in range(3)}
    assert len(outs) == 1
    d = prove(parse_sequent(BIG))
    assert render_derivation(d, "json") == render_derivation(prove(parse_sequent(BIG)), "json")


def test_text_uses_rule_labels():
    d = prove(parse_sequent(BIG))
    text = render_derivation(d, "text").decode()
    labels = set(re.findall(r"\([^()\s]+\)$", text, re.M))
    assert labels and labels <= set(RULE_LABELS.values())
    indent = [len(line) - len(line.lstrip()) for line in text.splitlines()]
    assert indent[-1] == 0 and all(n % 2 == 0 for n in indent)


def test_normalize(run):
    r = run("normalize", "[a]^i_k . [b]^k_j")
    assert r.exit_code == EXIT_OK and r.output.strip() == "[a b]^i_j"
    assert run("normalize", "[a]^i_k . [b]^i_j").exit_code == EXIT_INPUT
    assert json.loads(run("normalize", "--json", "[]^i_k . [b]^k_j").output)


def test_translate(run):
    r = run("translate", "--from", "lambek", "--prove", "p, p\\q |- q")
    assert r.exit_code == EXIT_OK
    assert "q^i0_i2" in r.output
    r = run("translate", "--from", "lambek", "--prove", "p\\q, p |- q")
    assert r.exit_code == EXIT_NO
    r = run("translate", "--from", "cmll", "--json", "|- ~p, p")
    assert json.loads(r.output)
    assert run("translate", "--from", "cmll", "|- p *").exit_code == EXIT_INPUT


def test_parse_relative_clause(run, lexicon_file):
    r = run("parse", "-g", lexicon_file, "--category", "np^i_j", "Mary who John loves madly")
    assert r.exit_code == EXIT_OK
    assert "(Lex)" in r.output
    r = run("parse", "-g", lexicon_file, "John", "loves", "Mary")
    assert r.exit_code == EXIT_OK
    assert run("parse", "-g", lexicon_file, "loves John Mary").exit_code == EXIT_NO


def test_parse_json_revalidates(run, lexicon_file):
    r = run("parse", "-g", lexicon_file, "--json", "--all", "John loves Mary")
    doc = json.loads(r.output)
    assert doc["member"] and doc["witnesses"]
    axioms = load_lexicon(RELATIVE_CLAUSE_LEXICON).axioms()
    for w in doc["witnesses"]:
        validate_derivation(from_json_obj(w["derivation"], Signature(infer=True)), axioms=axioms)


def test_parse_input_errors(run, tmp_path, lexicon_file):
    bad = tmp_path / "bad.lex"
    bad.write_text("literal np : 1 1\n[]^i_j :: np^i_j\n")
    r = run("parse", "-g", str(bad), "x")
    assert r.exit_code == EXIT_INPUT
    assert "line 2" in r.output
    assert run("parse", "-g", str(tmp_path / "missing.lex"), "x").exit_code == EXIT_INPUT
    assert run("parse", "-g", lexicon_file, "--category", "np^k_l -o np^k_l", "John").exit_code == EXIT_INPUT


def test_validate_and_cutfree_round_trip(run, tmp_path):
    (d,) = one_cut_derivations(random.Random(3), 1, pool_size=40)
    path = tmp_path / "cut.json"
    path.write_text(to_json(d))
    r = run("validate", "--json", str(path))
    assert r.exit_code == EXIT_OK and json.loads(r.output)["valid"]
    assert run("validate", "--system", "TTL'", str(path)).exit_code in (EXIT_OK, EXIT_NO)
    r = run("cutfree", "--json", str(path))
    assert r.exit_code == EXIT_OK
    out = from_json(r.output)
    validate_derivation(out, cut_free=True)
    assert RuleTag.CUT not in out.rules_used()
    assert are_similar(out.conclusion, d.conclusion)


def test_validate_rejects_broken(run, tmp_path):
    d = prove(parse_sequent(BIG).to_classical())
    obj = json.loads(to_json(d))
    obj["rule"] = RuleTag.PAR.value
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(obj))
    r = run("validate", "--json", str(path))
    assert r.exit_code == EXIT_NO and not json.loads(r.output)["valid"]
    path.write_text("{not json")
    assert run("validate", str(path)).exit_code == EXIT_INPUT


def test_validate_with_grammar(run, tmp_path, lexicon_file):
    r = run("parse", "-g", lexicon_file, "--json", "John loves Mary")
    path = tmp_path / "parse.json"
    path.write_text(json.dumps(json.loads(r.output)["witnesses"][0]["derivation"]))
    assert run("validate", str(path)).exit_code == EXIT_NO
    assert run("validate", "-g", lexicon_file, str(path)).exit_code == EXIT_OK

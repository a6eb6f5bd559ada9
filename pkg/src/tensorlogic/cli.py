"""Command-line front end (``ttl``).

Exit codes: 0 derivable/member/ok, 1 underivable/non-member/invalid,
2 bad input, 3 search budget exceeded.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Optional

import click

from . import grammars as gr
from . import translations as tr
from .cut_elimination import CutEliminationError, eliminate_cuts
from .formulas import FormulaError, Signature, atom, parse_formula
from .prover import BudgetExceeded, NotDerivable, SearchConfig, prove, prove_all, prove_many
from .sequents import (
    RULE_LABELS,
    Derivation,
    InvalidDerivation,
    SequentError,
    System,
    as_classical,
    from_json,
    parse_sequent,
    to_json_obj,
    validate_derivation,
)
from .terms import Edge, TensorTerm, TermError, normalize, parse_pseudoterm

EXIT_OK, EXIT_NO, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3

# ---------------------------------------------------------------------------
# rendering


def render_text(d: Derivation) -> str:
    """Premises above their conclusion, two spaces of indentation per level."""
    lines: list[str] = []

    def go(node: Derivation, depth: int) -> None:
        for p in node.premises:
            go(p, depth + 1)
        lines.append(f"{'  ' * depth}{node.conclusion}   {RULE_LABELS[node.rule]}")

    go(d, 0)
    return "\n".join(lines)


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def render_dot(d: Derivation) -> str:
    out = ["digraph derivation {", "  rankdir=BT;", "  node [shape=box, fontname=monospace];"]
    for n, (path, node) in enumerate(d.nodes()):
        name = "n" + "_".join(map(str, path)) if path else "root"
        out.append(f'  {name} [label="{_dot_escape(str(node.conclusion))}\\n{RULE_LABELS[node.rule]}"];')
        if path:
            parent = "n" + "_".join(map(str, path[:-1])) if len(path) > 1 else "root"
            out.append(f"  {name} -> {parent};")
    out.append("}")
    return "\n".join(out)


def render_derivation(d: Derivation, mode: str = "text") -> bytes:
    if mode == "json":
        text = json.dumps(to_json_obj(d), indent=2, ensure_ascii=False)
    elif mode == "dot":
        text = render_dot(d)
    elif mode == "text":
        text = render_text(d)
    else:
        raise ValueError(f"unknown render mode {mode!r}")
    return (text + "\n").encode("utf-8")


def _emit(d: Derivation, dot: bool) -> None:
    click.echo(render_derivation(d, "dot" if dot else "text").decode("utf-8"), nl=False)


def _emit_json(obj) -> None:
    click.echo(json.dumps(obj, indent=2, ensure_ascii=False))


def _fail(message: str, code: int = EXIT_INPUT):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _config(budget: Optional[int], jobs: int = 1, collect_all: bool = False) -> SearchConfig:
    try:
        return SearchConfig(max_visited=budget, jobs=jobs, collect_all=collect_all)
    except ValueError as exc:
        _fail(str(exc))


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        _fail(f"cannot read {path}: {exc.strerror}")


# ---------------------------------------------------------------------------
# commands


@click.group()
@click.version_option(package_name="artifact")
def main() -> None:
    """Tensor type logic: terms, sequents, proof search, translations and grammars."""


@main.command("normalize")
@click.argument("term")
@click.option("--json", "as_json", is_flag=True, help="Print a JSON object.")
def normalize_cmd(term: str, as_json: bool) -> None:
    """Print the normal form of a (pseudo)term such as '[a]^i_j . [b]^j_k'."""
    try:
        t = normalize(parse_pseudoterm(term))
    except TermError as exc:
        _fail(str(exc))
    if as_json:
        _emit_json({"term": str(t), "upper": sorted(t.upper), "lower": sorted(t.lower)})
    else:
        click.echo(str(t))


@main.command("prove")
@click.argument("sequents", nargs=-1, required=True)
@click.option("--all", "all_", is_flag=True, help="List every derivation the search finds.")
@click.option("--budget", type=int, default=None, help="Maximum number of expanded sequents.")
@click.option("--json", "as_json", is_flag=True, help="Print JSON results.")
@click.option("--dot", is_flag=True, help="Print derivations as a graph description.")
@click.option("--jobs", type=int, default=1, show_default=True, help="Worker processes for several sequents.")
def prove_cmd(sequents: tuple[str, ...], all_: bool, budget: Optional[int], as_json: bool, dot: bool, jobs: int) -> None:
    """Search for cut-free derivations of SEQUENTS ('|- A, B' or 'A |- B')."""
    cfg = _config(budget, jobs, collect_all=all_)
    try:
        parsed = [parse_sequent(text) for text in sequents]
    except (SequentError, FormulaError) as exc:
        _fail(str(exc))
    results = []
    try:
        if jobs > 1 and len(parsed) > 1:
            verdicts = prove_many([as_classical(s) for s in parsed], cfg)
        else:
            verdicts = [None] * len(parsed)
        for s, verdict in zip(parsed, verdicts):
            if verdict is False:
                results.append((s, []))
            elif all_:
                results.append((s, prove_all(s, cfg)))
            else:
                try:
                    results.append((s, [prove(s, cfg)]))
                except NotDerivable:
                    results.append((s, []))
    except BudgetExceeded as exc:
        _fail(f"search budget exceeded: {exc}", EXIT_BUDGET)
    if as_json:
        docs = [
            {"sequent": str(s), "derivable": bool(ds), "derivations": [to_json_obj(d) for d in ds]} for s, ds in results
        ]
        _emit_json(docs[0] if len(docs) == 1 else docs)
    else:
        for s, ds in results:
            if not ds:
                click.echo(f"not derivable: {s}")
            for d in ds:
                _emit(d, dot)
    sys.exit(EXIT_OK if all(ds for _, ds in results) else EXIT_NO)


@main.command("translate")
@click.option("--from", "source", type=click.Choice(["lambek", "cmll"]), required=True)
@click.argument("text")
@click.option("--prove", "decide", is_flag=True, help="Also decide the translated sequent.")
@click.option("--budget", type=int, default=None)
@click.option("--json", "as_json", is_flag=True)
def translate_cmd(source: str, text: str, decide: bool, budget: Optional[int], as_json: bool) -> None:
    """Translate a Lambek sequent ('p, p\\q |- q') or a cyclic MLL sequent ('|- ~p, p')."""
    try:
        if source == "lambek":
            target = tr.lambek_seq_to_ittl(tr.parse_lambek_sequent(text))
        else:
            target = tr.cmll_seq_to_ttl(tr.parse_mll_sequent(text))
    except (tr.TranslationError, FormulaError, TermError, SequentError) as exc:
        _fail(str(exc))
    result = {"source": text, "translation": str(target)}
    code = EXIT_OK
    if decide:
        try:
            d = prove(target, _config(budget))
            result["derivable"] = True
            result["derivation"] = to_json_obj(d)
        except NotDerivable:
            result["derivable"] = False
            code = EXIT_NO
        except BudgetExceeded as exc:
            _fail(f"search budget exceeded: {exc}", EXIT_BUDGET)
    if as_json:
        _emit_json(result)
    else:
        click.echo(result["translation"])
        if decide:
            click.echo("derivable" if result["derivable"] else "not derivable")
    sys.exit(code)


@main.command("parse")
@click.option("-g", "--grammar", "grammar_path", required=True, help="Lexicon file.")
@click.argument("words", nargs=-1, required=True)
@click.option("--category", default=None, help="Target formula, e.g. 'np^i_j' (default: the sentence symbol).")
@click.option("--all", "all_", is_flag=True, help="Print every witness, not only the first.")
@click.option("--typing-axioms", type=int, default=0, show_default=True, help="Typing axioms a parse may use.")
@click.option("--budget", type=int, default=None)
@click.option("--json", "as_json", is_flag=True)
@click.option("--dot", is_flag=True)
def parse_cmd(
    grammar_path: str,
    words: tuple[str, ...],
    category: Optional[str],
    all_: bool,
    typing_axioms: int,
    budget: Optional[int],
    as_json: bool,
    dot: bool,
) -> None:
    """Decide whether WORDS (spanning the boundary i, j) have the given category."""
    text = _read(grammar_path)
    lex, problems = gr.parse_lexicon(text)
    if problems:
        for p in problems:
            click.echo(f"{grammar_path}: {p}", err=True)
        sys.exit(EXIT_INPUT)
    tokens = tuple(tok for w in words for tok in w.split())
    cfg = gr.GrammarConfig(max_typing_axioms=typing_axioms, max_witnesses=10 if all_ else 1, search=_config(budget))
    try:
        if category is None:
            if lex.sentence is None:
                _fail("the lexicon declares no sentence symbol; pass --category")
            target = atom(lex.sentence, ("i",), ("j",))
        else:
            target = parse_formula(category, lex.signature)
        if len(target.free_up) != 1 or len(target.free_low) != 1:
            _fail("the category needs exactly one free upper and one free lower index")
        (up,), (low,) = target.free_up, target.free_low
        term = TensorTerm((Edge(tokens, up, low),))
        result = gr.derive_judgement(lex, term, target, cfg)
    except (FormulaError, gr.GrammarError) as exc:
        _fail(str(exc))
    except BudgetExceeded as exc:
        _fail(f"search budget exceeded: {exc}", EXIT_BUDGET)
    shown = result.witnesses if all_ else result.witnesses[:1]
    if as_json:
        _emit_json(
            {
                "judgement": f"{term} :: {target}",
                "member": result.member,
                "witnesses": [
                    {"entries": [str(j) for j in w.instances], "derivation": to_json_obj(w.lex_derivation(lex))}
                    for w in shown
                ],
            }
        )
    else:
        click.echo(f"{term} :: {target}: {'derivable' if result.member else 'not derivable'}")
        for w in shown:
            click.echo("using " + str(w))
            _emit(w.lex_derivation(lex), dot)
    sys.exit(EXIT_OK if result.member else EXIT_NO)


def _load_derivation(path: str) -> Derivation:
    try:
        return from_json(_read(path), Signature(infer=True))
    except (SequentError, FormulaError, TermError) as exc:
        _fail(str(exc))


def _axioms(grammar_path: Optional[str]):
    if grammar_path is None:
        return None
    lex, problems = gr.parse_lexicon(_read(grammar_path))
    if problems:
        _fail("; ".join(problems))
    return lex.axioms()


@main.command("validate")
@click.argument("derivation_path")
@click.option("--system", type=click.Choice(["TTL", "TTL'"]), default="TTL", show_default=True)
@click.option("-g", "--grammar", "grammar_path", default=None, help="Lexicon whose entries may be used by Lex.")
@click.option("--json", "as_json", is_flag=True)
def validate_cmd(derivation_path: str, system: str, grammar_path: Optional[str], as_json: bool) -> None:
    """Check a JSON derivation rule by rule."""
    d = _load_derivation(derivation_path)
    try:
        validate_derivation(d, System(system), axioms=_axioms(grammar_path))
    except InvalidDerivation as exc:
        if as_json:
            _emit_json({"valid": False, "path": list(exc.path), "reason": str(exc)})
        else:
            click.echo(f"invalid: {exc}")
        sys.exit(EXIT_NO)
    if as_json:
        _emit_json({"valid": True, "conclusion": str(d.conclusion), "size": d.size})
    else:
        click.echo(f"valid: {d.conclusion}")


@main.command("cutfree")
@click.argument("derivation_path")
@click.option("--json", "as_json", is_flag=True)
@click.option("--dot", is_flag=True)
def cutfree_cmd(derivation_path: str, as_json: bool, dot: bool) -> None:
    """Eliminate the cuts of a JSON derivation."""
    d = _load_derivation(derivation_path)
    try:
        validate_derivation(d)
        out = eliminate_cuts(d)
    except InvalidDerivation as exc:
        _fail(f"input derivation is invalid: {exc}")
    except CutEliminationError as exc:
        _fail(str(exc), EXIT_NO)
    if as_json:
        _emit_json(to_json_obj(out))
    else:
        _emit(out, dot)


if __name__ == "__main__":  # pragma: no cover
    main()

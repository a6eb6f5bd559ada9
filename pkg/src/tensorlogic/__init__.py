"""Tensor type logic: tensor terms, formulas with indices, sequent calculus,
proof search, cut elimination, translations and tensor grammars."""

from .formulas import Formula, Signature, dual, parse_formula
from .grammars import Grammar, TypingJudgement, derive_judgement, relative_clause_grammar, language_membership, load_grammar
from .prover import BudgetExceeded, NotDerivable, SearchConfig, is_derivable, prove, prove_from_axioms
from .sequents import Derivation, IntuitionisticSequent, Sequent, parse_sequent, validate_derivation
from .terms import TensorTerm, normalize, parse_term

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded",
    "Derivation",
    "Formula",
    "Grammar",
    "IntuitionisticSequent",
    "NotDerivable",
    "SearchConfig",
    "Sequent",
    "Signature",
    "TensorTerm",
    "TypingJudgement",
    "derive_judgement",
    "dual",
    "relative_clause_grammar",
    "is_derivable",
    "language_membership",
    "load_grammar",
    "normalize",
    "parse_formula",
    "parse_sequent",
    "parse_term",
    "prove",
    "prove_from_axioms",
    "validate_derivation",
]

"""Proof engine for a free-variable sequent calculus with variable conditions.

Replays, interactively constructs and searches for proofs in a calculus whose
delta rules introduce weak or strong free universal variables guarded by a
directed variable condition instead of Skolem terms.
"""

from .syntax import (
    Formula, Sequent, Substitution, Term, Var, VarClass,
    parse_formula, parse_sequent_formulas, parse_substitution, parse_term,
    print_formula, print_sequent, print_term,
)
from .vc import ChoiceCondition, VariableCondition, Accepted, Rejected
from .rules import RuleId
from .forest import ProofForest, Lemma

__all__ = [
    "Formula", "Sequent", "Substitution", "Term", "Var", "VarClass",
    "parse_formula", "parse_sequent_formulas", "parse_substitution",
    "parse_term", "print_formula", "print_sequent", "print_term",
    "ChoiceCondition", "VariableCondition", "Accepted", "Rejected",
    "RuleId", "ProofForest", "Lemma",
]

"""Reductive inference rules: alpha, beta, gamma, delta-, delta+, delta++,
definitional expansion, and axiom detection.

Every rule deletes its principal formula from the children except gamma,
which prepends its side formula to the entire parent sequent. The delta
rules differ in their variable-condition footprint: delta- blocks the rigid
variables of the whole conclusion sequent against the new weak variable,
delta+ blocks only the free variables of the principal formula against the
new strong variable and records a choice-condition entry (the conjugate of
the side formula). delta++ reuses the strong variable of an alpha-equivalent
principal reduced earlier, with no new footprint at all.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

from .syntax import (
    And, Exists, Forall, Formula, Implies, Not, Or, Defined, SeqEntry, Sequent,
    Term, TruthConst, Var, VarClass, VarRef, OriginCounter, alpha_normalize,
    conjugate, expand_definition, free_vars, instantiate, rigid_vars,
)
from .vc import Edge


class RuleId(Enum):
    ALPHA = "alpha"
    BETA = "beta"
    GAMMA = "gamma"
    DELTA_MINUS = "delta-"
    DELTA_PLUS = "delta+"
    DELTA_PLUS_PLUS = "delta++"
    EXPAND = "expand"
    LEMMA_APP = "applylemma"
    AXIOM = "axiom"


DEFAULT_POLICY = frozenset({RuleId.DELTA_MINUS, RuleId.DELTA_PLUS})

PiValue = Union[Formula, Term, Var]


@dataclass(frozen=True)
class RuleApplication:
    """An inference step: rule, principal position, and the (pi, rho) split of
    its meta-variable instantiation per the permutability machinery."""

    rule: RuleId
    form: str  # which shape of the rule fired, e.g. "and", "neg-exists"
    principal_index: int
    principal: Formula
    pi: tuple[tuple[str, PiValue], ...]
    rho: tuple[tuple[str, tuple[Formula, ...]], ...]
    produced: tuple[Var, ...] = ()
    vc_delta: frozenset[Edge] = frozenset()
    cc_delta: tuple[tuple[Var, Formula], ...] = ()

    def pi_get(self, name: str) -> Optional[PiValue]:
        for k, v in self.pi:
            if k == name:
                return v
        return None


class RuleError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Smullyan classification

def alpha_components(f: Formula) -> Optional[list[Formula]]:
    if isinstance(f, Or):
        return [f.left, f.right]
    if isinstance(f, Implies):
        return [conjugate(f.left), f.right]
    if isinstance(f, Not):
        b = f.body
        if isinstance(b, And):
            return [conjugate(b.left), conjugate(b.right)]
        if isinstance(b, Not):
            return [b.body]
    return None


def beta_components(f: Formula) -> Optional[list[Formula]]:
    if isinstance(f, And):
        return [f.left, f.right]
    if isinstance(f, Not):
        b = f.body
        if isinstance(b, Or):
            return [conjugate(b.left), conjugate(b.right)]
        if isinstance(b, Implies):
            return [b.left, conjugate(b.right)]
    return None


def gamma_parts(f: Formula) -> Optional[tuple[Var, Formula, bool]]:
    """(bound var, matrix, positive) for a gamma-type formula; the side formula
    for instantiation t is matrix[t] when positive, else its conjugate."""
    if isinstance(f, Exists):
        return (f.var, f.body, True)
    if isinstance(f, Not) and isinstance(f.body, Forall):
        return (f.body.var, f.body.body, False)
    return None


def delta_parts(f: Formula) -> Optional[tuple[Var, Formula, bool]]:
    if isinstance(f, Forall):
        return (f.var, f.body, True)
    if isinstance(f, Not) and isinstance(f.body, Exists):
        return (f.body.var, f.body.body, False)
    return None


def _form_tag(f: Formula, positive_tag: str, negative_tag: str) -> str:
    return positive_tag if not isinstance(f, Not) else negative_tag


def expandable(f: Formula) -> bool:
    g = f
    while isinstance(g, Not):
        g = g.body
    return isinstance(g, Defined)


# ---------------------------------------------------------------------------
# Rule applications

def _entry(f: Formula, origins: OriginCounter) -> SeqEntry:
    return SeqEntry(f, origins.fresh())


def _replaced(seq: Sequent, i: int, replacements: list[SeqEntry]) -> Sequent:
    return Sequent(seq.entries[:i] + tuple(replacements) + seq.entries[i + 1:])


def _context(seq: Sequent, i: int) -> tuple[tuple[str, tuple[Formula, ...]], ...]:
    before = tuple(e.formula for e in seq.entries[:i])
    after = tuple(e.formula for e in seq.entries[i + 1:])
    return (("Gamma", before), ("Pi", after))


def _principal(seq: Sequent, i: int) -> Formula:
    if not (0 <= i < len(seq.entries)):
        raise RuleError(f"principal index {i} out of range")
    return seq.entries[i].formula


def apply_alpha(seq: Sequent, i: int, origins: OriginCounter) -> tuple[RuleApplication, list[Sequent]]:
    f = _principal(seq, i)
    comps = alpha_components(f)
    if comps is None:
        raise RuleError(f"formula is not of alpha type: {f}")
    if isinstance(f, Or):
        form, pi = "or", (("A", f.left), ("B", f.right))
    elif isinstance(f, Implies):
        form, pi = "implies", (("A", f.left), ("B", f.right))
    elif isinstance(f.body, And):  # type: ignore[union-attr]
        form, pi = "neg-and", (("A", f.body.left), ("B", f.body.right))  # type: ignore[union-attr]
    else:
        form, pi = "neg-neg", (("A", f.body.body),)  # type: ignore[union-attr]
    child = _replaced(seq, i, [_entry(c, origins) for c in comps])
    app = RuleApplication(RuleId.ALPHA, form, i, f, pi, _context(seq, i))
    return app, [child]


def apply_beta(seq: Sequent, i: int, origins: OriginCounter) -> tuple[RuleApplication, list[Sequent]]:
    f = _principal(seq, i)
    comps = beta_components(f)
    if comps is None:
        raise RuleError(f"formula is not of beta type: {f}")
    if isinstance(f, And):
        form, pi = "and", (("A", f.left), ("B", f.right))
    elif isinstance(f.body, Or):  # type: ignore[union-attr]
        form, pi = "neg-or", (("A", f.body.left), ("B", f.body.right))  # type: ignore[union-attr]
    else:
        form, pi = "neg-implies", (("A", f.body.left), ("B", f.body.right))  # type: ignore[union-attr]
    children = [_replaced(seq, i, [_entry(c, origins)]) for c in comps]
    app = RuleApplication(RuleId.BETA, form, i, f, pi, _context(seq, i))
    return app, children


def apply_gamma(seq: Sequent, i: int, inst: Union[Var, Term],
                origins: OriginCounter) -> tuple[RuleApplication, list[Sequent]]:
    """Gamma retains the whole parent sequent below its new side formula."""
    f = _principal(seq, i)
    parts = gamma_parts(f)
    if parts is None:
        raise RuleError(f"formula is not of gamma type: {f}")
    x, matrix, positive = parts
    if isinstance(inst, Var):
        if inst.cls is not VarClass.GAMMA:
            raise RuleError(f"gamma must introduce a gamma variable, got {inst}")
        inst_term: Term = VarRef(inst)
        produced: tuple[Var, ...] = (inst,)
    else:
        inst_term = inst
        produced = ()
    side = instantiate(matrix, x, inst_term)
    if not positive:
        side = conjugate(side)
    child = Sequent((_entry(side, origins),) + seq.entries)
    form = _form_tag(f, "exists", "neg-forall")
    pi = (("x", x), ("t", inst_term))
    app = RuleApplication(RuleId.GAMMA, form, i, f, pi, _context(seq, i), produced)
    return app, [child]


def apply_delta_minus(seq: Sequent, i: int, fresh: Var,
                      origins: OriginCounter) -> tuple[RuleApplication, list[Sequent]]:
    f = _principal(seq, i)
    parts = delta_parts(f)
    if parts is None:
        raise RuleError(f"formula is not of delta type: {f}")
    if fresh.cls is not VarClass.WEAK:
        raise RuleError(f"delta- must introduce a weak variable, got {fresh}")
    x, matrix, positive = parts
    side = instantiate(matrix, x, VarRef(fresh))
    if not positive:
        side = conjugate(side)
    vc_delta = frozenset((z, fresh) for z in rigid_vars(seq))
    child = _replaced(seq, i, [_entry(side, origins)])
    form = _form_tag(f, "forall", "neg-exists")
    pi = (("x", x), ("xw", fresh))
    app = RuleApplication(RuleId.DELTA_MINUS, form, i, f, pi, _context(seq, i),
                          (fresh,), vc_delta)
    return app, [child]


def apply_delta_plus(seq: Sequent, i: int, fresh: Var,
                     origins: OriginCounter) -> tuple[RuleApplication, list[Sequent]]:
    f = _principal(seq, i)
    parts = delta_parts(f)
    if parts is None:
        raise RuleError(f"formula is not of delta type: {f}")
    if fresh.cls is not VarClass.STRONG:
        raise RuleError(f"delta+ must introduce a strong variable, got {fresh}")
    x, matrix, positive = parts
    side = instantiate(matrix, x, VarRef(fresh))
    if not positive:
        side = conjugate(side)
    vc_delta = frozenset((z, fresh) for z in free_vars(f))
    cc_delta = ((fresh, conjugate(side)),)
    child = _replaced(seq, i, [_entry(side, origins)])
    form = _form_tag(f, "forall", "neg-exists")
    pi = (("x", x), ("xs", fresh), ("A", matrix))
    app = RuleApplication(RuleId.DELTA_PLUS, form, i, f, pi, _context(seq, i),
                          (fresh,), vc_delta, cc_delta)
    return app, [child]


def delta_memo_key(f: Formula) -> str:
    """delta++ reuses a strong variable across alpha-equivalent principals."""
    from .syntax import print_formula
    return print_formula(alpha_normalize(f))


def apply_delta_plus_plus(seq: Sequent, i: int, memo: dict[str, Var],
                          fresh: Optional[Var],
                          origins: OriginCounter) -> tuple[RuleApplication, list[Sequent]]:
    """Reuse the memoized strong variable if this principal was reduced before;
    otherwise behave exactly as delta+ (fresh must then be provided)."""
    f = _principal(seq, i)
    parts = delta_parts(f)
    if parts is None:
        raise RuleError(f"formula is not of delta type: {f}")
    key = delta_memo_key(f)
    reused = memo.get(key)
    if reused is not None:
        x, matrix, positive = parts
        side = instantiate(matrix, x, VarRef(reused))
        if not positive:
            side = conjugate(side)
        child = _replaced(seq, i, [_entry(side, origins)])
        form = _form_tag(f, "forall", "neg-exists")
        pi = (("x", x), ("xs", reused), ("A", matrix))
        app = RuleApplication(RuleId.DELTA_PLUS_PLUS, form, i, f, pi, _context(seq, i))
        return app, [child]
    if fresh is None:
        raise RuleError("delta++ miss requires a fresh strong variable")
    app, children = apply_delta_plus(seq, i, fresh, origins)
    app = RuleApplication(RuleId.DELTA_PLUS_PLUS, app.form, i, f, app.pi, app.rho,
                          app.produced, app.vc_delta, app.cc_delta)
    return app, children


def apply_expand(seq: Sequent, i: int, origins: OriginCounter,
                 names: tuple[str, ...] = ()) -> tuple[RuleApplication, list[Sequent]]:
    """Definitional expansion of the outermost Defined node of formula i,
    transparently through negations."""
    f = _principal(seq, i)
    prefix = 0
    g = f
    while isinstance(g, Not):
        g = g.body
        prefix += 1
    if not isinstance(g, Defined):
        raise RuleError(f"formula has no defined notation to expand: {f}")
    expanded: Formula = expand_definition(g, names)
    for _ in range(prefix):
        expanded = Not(expanded)
    # expansion keeps the origin: the formula is the same up to the definition
    child = Sequent(seq.entries[:i] + (SeqEntry(expanded, seq.entries[i].origin),) + seq.entries[i + 1:])
    app = RuleApplication(RuleId.EXPAND, g.kind.value, i, f, (("A", expanded),), _context(seq, i))
    return app, [child]


# ---------------------------------------------------------------------------
# Axioms

_axiom_cache: dict[int, bool] = {}
_axiom_cache_keep: list[Sequent] = []


def is_axiom(seq: Sequent) -> bool:
    """True iff the sequent contains `true` or a conjugate pair (modulo the
    stored-negation convention)."""
    cached = _axiom_cache.get(id(seq))
    if cached is not None:
        return cached
    formulas = set(seq.formulas)
    result = False
    for f in formulas:
        if isinstance(f, TruthConst) and f.value:
            result = True
            break
        if isinstance(f, Not) and f.body in formulas:
            result = True
            break
    _axiom_cache[id(seq)] = result
    _axiom_cache_keep.append(seq)
    return result


def axiom_pair(seq: Sequent) -> Optional[tuple[Formula, Formula]]:
    formulas = set(seq.formulas)
    for f in seq.formulas:
        if isinstance(f, TruthConst) and f.value:
            return (f, f)
        if isinstance(f, Not) and f.body in formulas:
            return (f.body, f)
    return None

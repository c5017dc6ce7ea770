"""Connection finding and bounded exhaustive proof search.

The search follows the folklore staging: non-branching decompositions are
forced, then at each choice point the engine tries connection closures,
lemma applications, delta variants, gamma expansions below the multiplicity
threshold, and beta splits, in promise order, backtracking over all of them.
Gamma steps introduce fresh variables only; rigid variables are solved
exclusively by unifiers harvested from connections and lemma matches, which
keeps the space at a fixed multiplicity finite.

An `Unclosable` verdict therefore means: the documented move space at the
given budgets is exhausted. It is bounded-search evidence, deliberately
complemented by the exact semantic countermodel route in `countermodel`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from .forest import Lemma, ProofForest, ForestError, LemmaApplicationError, Node
from .rules import (
    RuleId, alpha_components, beta_components, delta_memo_key, delta_parts,
    expandable, gamma_parts,
)
from .syntax import (
    App, Atom, Defined, Formula, Not, Num, Sequent, Substitution, Term, Var,
    VarClass, VarRef, And, Or, Implies, Forall, Exists, TruthConst,
    print_formula, print_term, subst_term, term_vars,
)
from .vc import Accepted, Rejected, update_acyclic, validate_r_substitution


# ---------------------------------------------------------------------------
# Unification on gamma variables (plus lemma pattern variables)

def _resolve(t: Term, env: dict[Var, Term]) -> Term:
    while isinstance(t, VarRef) and t.var in env:
        t = env[t.var]
    return t


def _occurs(v: Var, t: Term, env: dict[Var, Term]) -> bool:
    t = _resolve(t, env)
    if isinstance(t, VarRef):
        return t.var == v
    if isinstance(t, App):
        if isinstance(t.head, Var) and t.head == v:
            return True
        return any(_occurs(v, a, env) for a in t.args)
    return False


def unify_terms(a: Term, b: Term, env: dict[Var, Term],
                unifiable) -> Optional[dict[Var, Term]]:
    """Syntactic first-order unification with occur check; only variables the
    predicate admits may be instantiated."""
    a, b = _resolve(a, env), _resolve(b, env)
    if a == b:
        return env
    if isinstance(a, VarRef) and unifiable(a.var):
        if _occurs(a.var, b, env):
            return None
        out = dict(env)
        out[a.var] = b
        return out
    if isinstance(b, VarRef) and unifiable(b.var):
        return unify_terms(b, a, env, unifiable)
    if isinstance(a, App) and isinstance(b, App) and a.head == b.head \
            and len(a.args) == len(b.args):
        for x, y in zip(a.args, b.args):
            env2 = unify_terms(x, y, env, unifiable)
            if env2 is None:
                return None
            env = env2
        return env
    return None


def unify_formulas(a: Formula, b: Formula, env: dict[Var, Term],
                   unifiable) -> Optional[dict[Var, Term]]:
    """Structural unification; binders must agree literally (the connection
    and lemma formulas of interest are quantifier-free)."""
    if type(a) is not type(b):
        return None
    if isinstance(a, Atom):
        assert isinstance(b, Atom)
        if a.pred != b.pred or len(a.args) != len(b.args):
            return None
        for x, y in zip(a.args, b.args):
            env2 = unify_terms(x, y, env, unifiable)
            if env2 is None:
                return None
            env = env2
        return env
    if isinstance(a, Not):
        assert isinstance(b, Not)
        return unify_formulas(a.body, b.body, env, unifiable)
    if isinstance(a, (And, Or, Implies)):
        assert isinstance(b, (And, Or, Implies))
        env2 = unify_formulas(a.left, b.left, env, unifiable)
        if env2 is None:
            return None
        return unify_formulas(a.right, b.right, env2, unifiable)
    if isinstance(a, (Forall, Exists)):
        assert isinstance(b, (Forall, Exists))
        if a.var != b.var:
            return None
        return unify_formulas(a.body, b.body, env, unifiable)
    if isinstance(a, TruthConst):
        return env if a == b else None
    if isinstance(a, Defined):
        assert isinstance(b, Defined)
        if a.kind is not b.kind or a.var != b.var or len(a.terms) != len(b.terms):
            return None
        for x, y in zip(a.terms, b.terms):
            env2 = unify_terms(x, y, env, unifiable)
            if env2 is None:
                return None
            env = env2
        if a.body is None:
            return env
        assert b.body is not None
        return unify_formulas(a.body, b.body, env, unifiable)
    return None


def GAMMA_ONLY(v: Var) -> bool:
    return v.cls is VarClass.GAMMA


def _flatten_env(env: dict[Var, Term]) -> dict[Var, Term]:
    def chase(t: Term) -> Term:
        t = _resolve(t, env)
        if isinstance(t, App):
            return App(t.head, tuple(chase(a) for a in t.args))
        return t
    return {v: chase(t) for v, t in env.items()}


# ---------------------------------------------------------------------------
# Connections

@dataclass(frozen=True)
class Connection:
    leaf_id: str
    positive_index: int
    negative_index: int
    unifier: Substitution

    def promise(self) -> tuple[int, int, int]:
        # fewest instantiated variables first, ties by leftmost position
        return (len(self.unifier.bindings), self.negative_index, self.positive_index)


def leaf_connections(forest: ProofForest, leaf: Node) -> list[Connection]:
    out = []
    formulas = leaf.sequent.formulas
    for j, g in enumerate(formulas):
        if not isinstance(g, Not):
            continue
        for i, f in enumerate(formulas):
            if i == j:
                continue
            env = unify_formulas(f, g.body, {}, GAMMA_ONLY)
            if env is None:
                continue
            try:
                sigma = Substitution.of(_flatten_env(env))
            except ValueError:
                continue
            if not update_acyclic(forest.r, sigma):
                continue
            out.append(Connection(leaf.id, i, j, sigma))
    out.sort(key=Connection.promise)
    return out


def find_connections(forest: ProofForest) -> list[Connection]:
    """All admissible connections across the open leaves of the forest."""
    out = []
    for leaf in forest.open_leaves():
        out.extend(leaf_connections(forest, leaf))
    return out


# ---------------------------------------------------------------------------
# Budgets and outcomes

@dataclass(frozen=True)
class SearchBudget:
    gamma_multiplicity: int = 1
    lemma_uses_per_branch: int = 2
    node_limit: int = 1_000_000

    def __post_init__(self):
        if min(self.gamma_multiplicity, self.lemma_uses_per_branch, self.node_limit) < 1:
            raise ValueError("all budget fields must be positive")


@dataclass
class SearchStats:
    nodes_explored: int = 0
    gamma_multiplicity: int = 1


@dataclass
class Closed:
    forest: ProofForest
    stats: SearchStats

    def report_lines(self) -> list[str]:
        lines = ["outcome=closed",
                 f"nodes_explored={self.stats.nodes_explored}",
                 f"gamma_multiplicity={self.stats.gamma_multiplicity}"]
        for n in sorted((m for m in self.forest.nodes.values() if m.applied is None),
                        key=lambda m: m.id):
            lines.append(f"branch.{n.id}={self.forest.closing_reason(n)}")
        return lines


@dataclass
class Unclosable:
    stats: SearchStats

    def report_lines(self) -> list[str]:
        return ["outcome=unclosable",
                f"nodes_explored={self.stats.nodes_explored}",
                f"gamma_multiplicity={self.stats.gamma_multiplicity}"]


@dataclass
class Inconclusive:
    stats: SearchStats
    reason: str = "node limit exceeded"

    def report_lines(self) -> list[str]:
        return ["outcome=inconclusive",
                f"reason={self.reason}",
                f"nodes_explored={self.stats.nodes_explored}",
                f"gamma_multiplicity={self.stats.gamma_multiplicity}"]


SearchOutcome = Union[Closed, Unclosable, Inconclusive]


class _LimitExceeded(Exception):
    pass


_cache_keep: list = []


# ---------------------------------------------------------------------------
# Move generation

@dataclass(frozen=True)
class _LemmaMove:
    lemma: str
    sigma: Substitution       # gamma-variable part, applied globally first
    theta: Substitution       # weak-variable instantiation of the lemma
    missing: int
    size: int

    def promise(self):
        return (self.missing, len(self.sigma.bindings), self.size, self.lemma)


def _subterms_of_formula(f: Formula) -> Iterator[Term]:
    if isinstance(f, Atom):
        for a in f.args:
            yield from _subterms(a)
    elif isinstance(f, Not):
        yield from _subterms_of_formula(f.body)
    elif isinstance(f, (And, Or, Implies)):
        yield from _subterms_of_formula(f.left)
        yield from _subterms_of_formula(f.right)
    elif isinstance(f, (Forall, Exists)):
        yield from _subterms_of_formula(f.body)
    elif isinstance(f, Defined):
        for t in f.terms:
            yield from _subterms(t)
        if f.body is not None:
            yield from _subterms_of_formula(f.body)


def _subterms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, App):
        for a in t.args:
            yield from _subterms(a)


def lemma_moves(forest: ProofForest, leaf: Node, cap: int = 24) -> list[_LemmaMove]:
    """Candidate lemma applications at a leaf.

    Pattern variables are the lemma's own weak variables; the goal side may
    contribute gamma-variable bindings, which become a global substitution
    applied before the lemma. Candidates whose lemma variables stay unbound
    after formula- and subterm-level matching are dropped.
    """
    moves: dict[tuple, _LemmaMove] = {}
    goal = leaf.sequent.formulas
    for name in sorted(forest.lemmas):
        lemma = forest.lemmas[name]
        pats = lemma.statement.formulas
        weak_vars = frozenset(v for f in pats for v in _formula_weak_vars(f))

        def unifiable(v: Var, _weak=weak_vars) -> bool:
            return v.cls is VarClass.GAMMA or v in _weak

        for env, matched in _match_assignments(pats, goal, unifiable):
            flat = _flatten_env(env)
            unbound = [v for v in weak_vars if v not in flat]
            if unbound:
                _bind_by_subterms(pats, goal, flat, weak_vars)
                unbound = [v for v in weak_vars if v not in flat]
            if unbound or (not matched and not flat):
                continue
            move = _move_from_env(forest, name, matched, pats, flat, weak_vars)
            if move is not None:
                moves.setdefault((move.lemma, str(move.sigma), str(move.theta)), move)
    out = sorted(moves.values(), key=_LemmaMove.promise)
    return out[:cap]


def _formula_weak_vars(f: Formula) -> frozenset[Var]:
    from .syntax import free_vars
    return free_vars(f, {VarClass.WEAK})


def _match_assignments(pats: tuple[Formula, ...], goal: tuple[Formula, ...],
                       unifiable, limit: int = 64) -> list[tuple[dict[Var, Term], int]]:
    """Consistent ways of unifying each lemma formula with a goal formula or
    leaving it missing; at most `limit` assignments, most-matched first."""
    results: list[tuple[dict[Var, Term], int]] = []

    def run(i: int, env: dict[Var, Term], matched: int) -> None:
        if len(results) >= limit:
            return
        if i == len(pats):
            results.append((env, matched))
            return
        for g in goal:
            env2 = unify_formulas(pats[i], g, env, unifiable)
            if env2 is not None:
                run(i + 1, env2, matched + 1)
        run(i + 1, env, matched)  # leave pats[i] missing

    run(0, {}, 0)
    results.sort(key=lambda r: -r[1])
    return results


def _bind_by_subterms(pats, goal, flat: dict[Var, Term], weak_vars) -> bool:
    """Try to complete a candidate by unifying lemma atom arguments against
    goal subterms (how the triangle-inequality style lemmas are aimed)."""
    changed = False

    def unifiable(v: Var) -> bool:
        return v in weak_vars

    for pat in pats:
        for atom in _atoms_of(pat):
            for arg in atom.args:
                arg_res = subst_term(arg, flat)
                if not any(v in weak_vars for v in term_vars(arg_res)):
                    continue
                done = False
                for g in goal:
                    for sub in _subterms_of_formula(g):
                        env2 = unify_terms(arg_res, sub, dict(flat), unifiable)
                        if env2 is not None and len(env2) > len(flat):
                            flat.update(_flatten_env(env2))
                            changed = True
                            done = True
                            break
                    if done:
                        break
    return changed


def _atoms_of(f: Formula) -> Iterator[Atom]:
    if isinstance(f, Atom):
        yield f
    elif isinstance(f, Not):
        yield from _atoms_of(f.body)
    elif isinstance(f, (And, Or, Implies)):
        yield from _atoms_of(f.left)
        yield from _atoms_of(f.right)


def _move_from_env(forest: ProofForest, name: str, matched: int, pats,
                   flat: dict[Var, Term], weak_vars) -> Optional[_LemmaMove]:
    gamma_part = {v: t for v, t in flat.items() if v.cls is VarClass.GAMMA}
    theta_part = {v: subst_term(t, flat) for v, t in flat.items() if v.cls is VarClass.WEAK}
    try:
        sigma = Substitution.of(gamma_part)
        theta = Substitution.of(theta_part)
    except ValueError:
        return None
    if not update_acyclic(forest.r, sigma):
        return None
    missing = len(pats) - matched
    size = sum(len(t[1].args) if isinstance(t[1], App) else 1 for t in theta.bindings)
    return _LemmaMove(name, sigma, theta, missing, size)


# ---------------------------------------------------------------------------
# The bounded search

def _delta_variants(forest: ProofForest, principal: Formula) -> list[RuleId]:
    variants = []
    if RuleId.DELTA_PLUS_PLUS in forest.policy:
        key = delta_memo_key(principal)
        if forest._memo_get(key) is not None:
            variants.append(RuleId.DELTA_PLUS_PLUS)
    if RuleId.DELTA_PLUS in forest.policy:
        variants.append(RuleId.DELTA_PLUS)
    elif RuleId.DELTA_PLUS_PLUS in forest.policy and RuleId.DELTA_PLUS_PLUS not in variants:
        variants.append(RuleId.DELTA_PLUS_PLUS)
    if RuleId.DELTA_MINUS in forest.policy:
        variants.append(RuleId.DELTA_MINUS)
    return variants


def _lemma_uses_on_branch(forest: ProofForest, leaf: Node) -> int:
    from .forest import LemmaApplication
    count = 0
    cur = leaf.parent
    while cur is not None:
        node = forest.nodes[cur]
        if isinstance(node.applied, LemmaApplication):
            count += 1
        cur = node.parent
    return count


def _state_key(forest: ProofForest) -> tuple:
    """Canonical key for memoizing exhausted states.

    The variable condition enters only via its transitive projection onto the
    variables of the open leaves: edges through variables of already-closed
    subtrees can never lie on a cycle created by a future substitution, whose
    update edges always connect open-leaf variables."""
    from .syntax import free_vars
    leaves = []
    relevant: set[Var] = set()
    for n in forest.open_leaves():
        formulas = tuple(sorted(print_formula(f) for f in n.sequent.formulas))
        counts = tuple(sorted((print_formula(next(e.formula for e in n.sequent.entries
                                                  if e.origin == o)), c)
                              for o, c in n.gamma_counts
                              if any(e.origin == o for e in n.sequent.entries)))
        leaves.append((formulas, counts, _lemma_uses_on_branch(forest, n)))
        relevant |= free_vars(n.sequent)
    succs: dict[Var, list[Var]] = {}
    for z, x in forest.r.edges:
        succs.setdefault(z, []).append(x)
    projected = []
    for start in relevant:
        stack, visited = [start], {start}
        while stack:
            v = stack.pop()
            for w in succs.get(v, ()):
                if w not in visited:
                    visited.add(w)
                    if w in relevant:
                        projected.append(f"{start}>{w}")
                    stack.append(w)
    return (tuple(sorted(leaves)), tuple(sorted(projected)))


_forced_cache: dict[tuple, Optional[tuple[RuleId, int]]] = {}
_forced_cache_keep: list = []


def _forced_move(leaf: Node, budget: SearchBudget) -> Optional[tuple[RuleId, int]]:
    """Stage order: alpha/expansion, then delta (variant resolved by the
    caller), then gamma below threshold, then beta; leftmost formula first."""
    key = (id(leaf.sequent), leaf.gamma_counts, budget.gamma_multiplicity)
    if key in _forced_cache:
        return _forced_cache[key]
    result = _forced_move_impl(leaf, budget)
    _forced_cache[key] = result
    _forced_cache_keep.append(leaf.sequent)
    return result


def _forced_move_impl(leaf: Node, budget: SearchBudget) -> Optional[tuple[RuleId, int]]:
    formulas = leaf.sequent.formulas
    for i, formula in enumerate(formulas):
        if alpha_components(formula) is not None:
            return (RuleId.ALPHA, i)
        if expandable(formula):
            return (RuleId.EXPAND, i)
    for i, formula in enumerate(formulas):
        if delta_parts(formula) is not None:
            return (RuleId.DELTA_PLUS, i)
    for i, formula in enumerate(formulas):
        if gamma_parts(formula) is None:
            continue
        origin = leaf.sequent.entries[i].origin
        if leaf.gamma_count(origin) < budget.gamma_multiplicity:
            return (RuleId.GAMMA, i)
    for i, formula in enumerate(formulas):
        if beta_components(formula) is not None:
            return (RuleId.BETA, i)
    return None


def auto_close(forest: ProofForest, budget: SearchBudget) -> SearchOutcome:
    """Bounded exhaustive closability: Closed with a witness forest, Unclosable
    when the whole move space at the budget is exhausted, Inconclusive when the
    node limit binds. Deterministic: rerunning yields identical outcomes and
    exploration counts."""
    import os
    import time as _time
    trace = os.environ.get("FVSEQUENT_SEARCH_TRACE") == "1"
    t0 = _time.time()
    stats = SearchStats(gamma_multiplicity=budget.gamma_multiplicity)
    seen: set[tuple] = set()
    sol_cache: dict = {}

    def bump() -> None:
        stats.nodes_explored += 1
        if trace and stats.nodes_explored % 10000 == 0:
            print(f"[search] nodes={stats.nodes_explored} t={_time.time()-t0:.0f}s "
                  f"seen={len(seen)}", flush=True)
        if stats.nodes_explored > budget.node_limit:
            raise _LimitExceeded

    def search(f: ProofForest) -> Optional[ProofForest]:
        bump()
        # stage discipline: forced alpha/expansion, then delta (the variant is
        # the only branching decision), then every gamma below the threshold,
        # then beta splits in canonical order; expansion order is confluent,
        # so no backtracking happens over it
        while True:
            leaves = f.open_leaves()
            if not leaves:
                return f
            forced = None
            for leaf in leaves:
                mv = _forced_move(leaf, budget)
                if mv is not None:
                    forced = (leaf, mv)
                    break
            if forced is None:
                break
            leaf, (rule, i) = forced
            if rule in (RuleId.DELTA_PLUS, RuleId.DELTA_MINUS, RuleId.DELTA_PLUS_PLUS):
                variants = _delta_variants(f, leaf.sequent.formulas[i])
                if len(variants) > 1:
                    for v in variants:
                        g = f.clone(light=True)
                        try:
                            g.apply_rule(leaf.id, v, i)
                        except ForestError:
                            continue
                        r = search(g)
                        if r is not None:
                            return r
                    return None
                rule = variants[0]
            f.apply_rule(leaf.id, rule, i)
            bump()
        key = _state_key(f)
        if key in seen:
            return None
        seen.add(key)
        return _solve_closure(f, leaves, budget, stats, bump, sol_cache)

    try:
        witness = search(forest.clone(light=True))
    except _LimitExceeded:
        return Inconclusive(stats)
    except RecursionError:
        return Inconclusive(stats, reason="recursion depth exceeded")
    if witness is None:
        return Unclosable(stats)
    return Closed(witness, stats)


# ---------------------------------------------------------------------------
# Joint closure: the connection-method core.
#
# Once every leaf is fully decomposed, its possible closures are compiled
# context-free: each solution is a chain of at most `lemma_uses_per_branch`
# lemma applications ending in a subsumption or a connection, together with
# the gamma-variable constraint it imposes. Closing the forest then means
# picking one solution per leaf whose constraints unify jointly into a single
# R-substitution; that assignment is searched with most-constrained-first
# ordering and memoized suffix failures keyed by the constraint restriction
# that can still interact with the remaining leaves.

@dataclass(frozen=True)
class _Chain:
    steps: tuple  # (lemma name, theta) pairs applied in order; empty for connections
    constraint: tuple[tuple[Var, Term], ...]
    uses: frozenset  # prints of the goal formulas the chain touches

    def promise(self):
        return (len(self.constraint), len(self.steps),
                tuple((str(v), print_term(t)) for v, t in self.constraint))


def _leaf_connections_free(formulas: tuple[Formula, ...]) -> list[tuple[dict, frozenset]]:
    out = []
    for j, g in enumerate(formulas):
        if not isinstance(g, Not):
            continue
        for i, fm in enumerate(formulas):
            if i == j:
                continue
            env = unify_formulas(fm, g.body, {}, GAMMA_ONLY)
            if env is not None:
                out.append((_flatten_env(env),
                            frozenset({print_formula(fm), print_formula(g)})))
    return out


def _leaf_solutions(lemmas: dict[str, Lemma], formulas: tuple[Formula, ...],
                    lemma_budget: int, bump, cache: dict,
                    cap: int = 64) -> list[_Chain]:
    """Closure solutions of one branch: a chain of lemma applications ending
    in a subsumption or a connection, with the joint gamma constraint.

    Chains produced under a cut must use the cut formula; a chain ignoring it
    is already a solution of the parent and would only be re-derived."""
    key = (tuple(sorted(print_formula(fm) for fm in formulas)), lemma_budget)
    cached = cache.get(key)
    if cached is not None:
        return cached
    bump()
    chains: dict[tuple, _Chain] = {}

    def add(steps: tuple, constraint: dict[Var, Term], uses: frozenset) -> None:
        items = tuple(sorted(constraint.items(), key=lambda kv: kv[0].sort_key()))
        skey = tuple((name, str(theta)) for name, theta in steps)
        chains.setdefault((skey, items), _Chain(steps, items, uses))

    for env, uses in _leaf_connections_free(formulas):
        add((), env, uses)
    if lemma_budget > 0:
        from .syntax import subst_formula, conjugate
        goal_set = set(formulas)
        for move, inst in _lemma_candidates(lemmas, formulas):
            combined = dict(move.sigma.as_dict())
            goal_inst = goal_set if move.sigma.is_empty() \
                else {subst_formula(g, combined) for g in formulas}
            matched_prints = frozenset(print_formula(fi) for fi in inst if fi in goal_inst)
            missing = [fi for fi in inst if fi not in goal_inst]
            if not missing:
                add(((move.lemma, move.theta),), combined, matched_prints)
                continue
            if len(missing) > 1 or lemma_budget == 1:
                continue
            cut = conjugate(missing[0])
            if cut in goal_inst:
                continue  # the cut adds a formula that is already present
            cut_print = print_formula(cut)
            child = tuple(subst_formula(g, combined) for g in formulas) + (cut,)
            for sub in _leaf_solutions(lemmas, child, lemma_budget - 1, bump, cache, cap):
                if cut_print not in sub.uses:
                    continue
                merged = _merge_constraint(combined, sub.constraint)
                if merged is None:
                    continue
                add(((move.lemma, move.theta),) + sub.steps, merged,
                    matched_prints | sub.uses)
    out = sorted(chains.values(), key=_Chain.promise)[:cap]
    cache[key] = out
    return out


def _merge_constraint(acc: dict[Var, Term], items) -> Optional[dict[Var, Term]]:
    env = dict(acc)
    for v, t in items:
        env2 = unify_terms(VarRef(v), t, env, GAMMA_ONLY)
        if env2 is None:
            return None
        env = env2
    return _flatten_env(env)


def _lemma_candidates(lemmas: dict[str, Lemma],
                      goal: tuple[Formula, ...]) -> list[tuple["_LemmaMove", tuple]]:
    """Context-free lemma moves with their instantiated statements."""
    from .syntax import subst_formula
    out = []
    seen: set[tuple] = set()
    for name in sorted(lemmas):
        lemma = lemmas[name]
        pats = lemma.statement.formulas
        weak_vars = frozenset(v for fm in pats for v in _formula_weak_vars(fm))

        def unifiable(v: Var, _weak=weak_vars) -> bool:
            return v.cls is VarClass.GAMMA or v in _weak

        for env, matched in _match_assignments(pats, goal, unifiable):
            flat = _flatten_env(env)
            unbound = [v for v in weak_vars if v not in flat]
            if unbound:
                _bind_by_subterms(pats, goal, flat, weak_vars)
                unbound = [v for v in weak_vars if v not in flat]
            if unbound or (not matched and not flat):
                continue
            gamma_part = {v: t for v, t in flat.items() if v.cls is VarClass.GAMMA}
            theta_part = {v: subst_term(t, flat) for v, t in flat.items()
                          if v.cls is VarClass.WEAK}
            try:
                sigma = Substitution.of(gamma_part)
                theta = Substitution.of(theta_part)
            except ValueError:
                continue
            dedupe = (name, str(sigma), str(theta))
            if dedupe in seen:
                continue
            seen.add(dedupe)
            inst = tuple(subst_formula(p, flat) for p in pats)
            move = _LemmaMove(name, sigma, theta, 0, len(flat))
            out.append((move, inst))
    return out


def _solve_closure(f: ProofForest, leaves, budget: SearchBudget, stats, bump,
                   sol_cache: dict):
    solsets = []
    for leaf in leaves:
        remaining = budget.lemma_uses_per_branch - _lemma_uses_on_branch(f, leaf)
        sols = _leaf_solutions(f.lemmas, leaf.sequent.formulas, max(remaining, 0),
                               bump, sol_cache)
        if not sols:
            return None
        solsets.append((leaf, sols))
    solsets.sort(key=lambda p: (len(p[1]), p[0].id))
    n = len(solsets)
    # gamma variables a suffix can still interact with, per position
    future: list[frozenset[Var]] = [frozenset()] * (n + 1)
    for i in range(n - 1, -1, -1):
        vs = set(future[i + 1])
        for chain in solsets[i][1]:
            for v, t in chain.constraint:
                vs.add(v)
                vs.update(w for w in term_vars(t) if w.cls is VarClass.GAMMA)
        future[i] = frozenset(vs)
    failed: set[tuple] = set()

    def dfs(i: int, acc: dict[Var, Term]) -> Optional[list[_Chain]]:
        bump()
        if i == n:
            return []
        key = (i, tuple(sorted((str(v), print_term(t)) for v, t in acc.items()
                               if v in future[i])))
        if key in failed:
            return None
        for chain in solsets[i][1]:
            merged = _merge_constraint(acc, chain.constraint)
            if merged is None:
                continue
            if not _acc_admissible(f, merged):
                continue
            rest = dfs(i + 1, merged)
            if rest is not None:
                return [chain] + rest
        failed.add(key)
        return None

    assignment = dfs(0, {})
    if assignment is None:
        return None
    return _replay_assignment(f, solsets, assignment)


def _acc_admissible(f: ProofForest, acc: dict[Var, Term]) -> bool:
    try:
        sigma = Substitution.of(acc)
    except ValueError:
        return False
    return update_acyclic(f.r, sigma)


def _replay_assignment(f: ProofForest, solsets, assignment) -> Optional[ProofForest]:
    """Materialize a joint solution on the engine: one composed global
    substitution, then the lemma chains leaf by leaf."""
    g = f.clone(light=True)
    total: dict[Var, Term] = {}
    for chain in assignment:
        merged = _merge_constraint(total, chain.constraint)
        if merged is None:
            return None
        total = merged
    if total:
        sigma = Substitution.of(total)
        if isinstance(g.apply_global_substitution(sigma), Rejected):
            return None
    for (leaf, _), chain in zip(solsets, assignment):
        current = leaf.id
        for name, theta in chain.steps:
            node = g.node(current)
            if node.closed_by is not None or g.leaf_closed(node):
                break
            theta_applied = Substitution(tuple(
                (v, subst_term(t, total)) for v, t in theta.bindings))
            try:
                children = g.apply_lemma(current, name, theta_applied)
            except (ForestError, LemmaApplicationError):
                return None
            if not children:
                break
            current = children[0]
        if not _subtree_closed_ids(g, leaf.id):
            return None
    return g if g.is_closed() else None


def _subtree_closed_ids(g: ProofForest, node_id: str) -> bool:
    stack = [node_id]
    while stack:
        n = g.node(stack.pop())
        if n.applied is None:
            if not g.leaf_closed(n):
                return False
        else:
            stack.extend(n.children)
    return True


# ---------------------------------------------------------------------------
# Permutability

@dataclass
class Permutable:
    witness: ProofForest
    stats: SearchStats

    def report_lines(self):
        return ["outcome=permutable", f"nodes_explored={self.stats.nodes_explored}"]


@dataclass
class NotPermutable:
    stats: SearchStats

    def report_lines(self):
        return ["outcome=not-permutable", f"nodes_explored={self.stats.nodes_explored}"]


@dataclass
class PermutabilityPreconditionError(ValueError):
    message: str

    def __str__(self):
        return self.message


def check_permutability(forest: ProofForest, n0_id: str, n1_id: str,
                        budget: SearchBudget) -> Union[Permutable, NotPermutable, Inconclusive]:
    """Can the later step be done first? The forest must be a closed proof
    tree where n0's step immediately precedes n1's (one sequent in between);
    the check rebuilds the subtree at n0 starting with n1's rule instance and
    searches for a closed completion within the budget."""
    from .forest import LemmaApplication
    if not forest.is_closed():
        raise PermutabilityPreconditionError("the given forest is not a closed proof tree")
    n0 = forest.node(n0_id)
    n1 = forest.node(n1_id)
    if n0.applied is None or n1.applied is None:
        raise PermutabilityPreconditionError("both nodes must carry inference steps")
    if isinstance(n0.applied, LemmaApplication) or isinstance(n1.applied, LemmaApplication):
        raise PermutabilityPreconditionError("permutability is defined for reductive steps")
    if n1.parent != n0.id:
        raise PermutabilityPreconditionError(
            "the steps must be adjacent (exactly one sequent node in between)")
    step1 = n1.applied
    principal = step1.principal
    try:
        index = n0.sequent.formulas.index(principal)
    except ValueError:
        raise PermutabilityPreconditionError(
            "no substitution makes the later step applicable at the earlier node: "
            f"principal {print_formula(principal)} does not occur there")
    variant = forest.clone()
    variant.prune_for_variant(n0_id)
    variant.apply_rule(n0_id, step1.rule, index,
                       var=step1.pi_get("xs") or step1.pi_get("xw"))
    outcome = auto_close(variant, budget)
    if isinstance(outcome, Closed):
        return Permutable(outcome.forest, outcome.stats)
    if isinstance(outcome, Unclosable):
        return NotPermutable(outcome.stats)
    return outcome

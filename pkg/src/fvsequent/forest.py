"""Proof forests: history-carrying trees of sequents and inference steps,
with global substitution, lemma application between trees, snapshots and
backtracking, and deterministic script export.

The forest owns the global variable condition R, the choice condition C,
the freshness universe and the delta++ memo. Every mutation appends one
directive line to the history, so a forest is always exportable as a script
that replays to a bit-identical forest.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Optional, Union

from .rules import (
    RuleApplication, RuleId, DEFAULT_POLICY,
    apply_alpha, apply_beta, apply_delta_minus, apply_delta_plus,
    apply_delta_plus_plus, apply_expand, apply_gamma, delta_memo_key,
    delta_parts, gamma_parts, is_axiom,
)
from .syntax import (
    Formula, OriginCounter, SeqEntry, Sequent, Substitution, Term, Var,
    VarClass, VarRef, all_vars, apply_subst, conjugate, free_vars,
    print_formula, print_sequent, print_term, rigid_vars,
)
from .vc import (
    Accepted, ChoiceCondition, Rejected, VariableCondition, find_cycle,
    is_wellfounded, sigma_update, validate_r_substitution,
)


class ForestError(ValueError):
    pass


class FreshnessError(ForestError):
    pass


class LemmaApplicationError(ForestError):
    pass


@dataclass(frozen=True)
class Lemma:
    name: str
    statement: Sequent
    status: str = "open"  # open lemmas are usable but flagged in reports


@dataclass(frozen=True)
class Subsumption:
    lemma: str
    inst: Substitution


@dataclass(frozen=True)
class LemmaApplication:
    lemma: str
    inst: Substitution
    matched: tuple[Formula, ...]
    missing: tuple[Formula, ...]


Step = Union[RuleApplication, LemmaApplication]


@dataclass(frozen=True)
class Snapshot:
    r: VariableCondition
    c: ChoiceCondition
    used: frozenset[Var]
    memo: tuple[tuple[str, Var], ...]
    origin_next: int


@dataclass(frozen=True)
class Node:
    id: str
    tree: str
    sequent: Sequent
    parent: Optional[str]
    created_at: int  # index into history at creation time
    snapshot: Snapshot
    gamma_counts: tuple[tuple[int, int], ...] = ()  # (origin, count) on this branch
    applied: Optional[Step] = None
    children: tuple[str, ...] = ()
    closed_by: Optional[Subsumption] = None

    def gamma_count(self, origin: int) -> int:
        for o, n in self.gamma_counts:
            if o == origin:
                return n
        return 0


@dataclass(frozen=True)
class SubstEvent:
    sigma: Substitution
    prev_nodes: Mapping[str, Node]
    prev_c: ChoiceCondition


_RULE_DIRECTIVES = {
    RuleId.ALPHA: "alpha",
    RuleId.BETA: "beta",
    RuleId.GAMMA: "gamma",
    RuleId.DELTA_MINUS: "delta-",
    RuleId.DELTA_PLUS: "delta+",
    RuleId.DELTA_PLUS_PLUS: "delta++",
    RuleId.EXPAND: "expand",
}

POLICY_NAMES = {
    "delta-": RuleId.DELTA_MINUS,
    "delta+": RuleId.DELTA_PLUS,
    "delta++": RuleId.DELTA_PLUS_PLUS,
}


class ProofForest:
    """Single-writer proof session state. All contained values are immutable;
    clone() is a cheap shallow copy safe to hand to search workers."""

    def __init__(self, policy: Iterable[RuleId] = DEFAULT_POLICY):
        self.policy = frozenset(policy)
        if not self.policy & {RuleId.DELTA_MINUS, RuleId.DELTA_PLUS, RuleId.DELTA_PLUS_PLUS}:
            raise ForestError("policy must include at least one delta rule")
        self.trees: dict[str, str] = {}
        self.nodes: dict[str, Node] = {}
        self.lemmas: dict[str, Lemma] = {}
        self.lemma_deps: set[tuple[str, str]] = set()
        self.r = VariableCondition.empty()
        self.c = ChoiceCondition.empty()
        self.used: frozenset[Var] = frozenset()
        self.memo: tuple[tuple[str, Var], ...] = ()
        self.origins = OriginCounter()
        self.history: list[str] = []
        self.events: dict[int, SubstEvent] = {}  # history index -> subst undo info
        self.advice: list[tuple[Substitution, str]] = []  # sigmas stored before backtracking
        self.last_subst: Optional[Union[Accepted, Rejected]] = None
        self.light = False  # light forests skip history bookkeeping (search workers)
        if self.policy != DEFAULT_POLICY:
            names = sorted(k for k, v in POLICY_NAMES.items() if v in self.policy)
            self._record(f"policy {','.join(names)}")

    # -- construction ------------------------------------------------------

    def clone(self, light: bool = False) -> "ProofForest":
        """Cheap copy over immutable building blocks. A light clone drops the
        replay history (search workers never export scripts)."""
        f = ProofForest.__new__(ProofForest)
        f.policy = self.policy
        f.trees = dict(self.trees)
        f.nodes = dict(self.nodes)
        f.lemmas = self.lemmas if light else dict(self.lemmas)
        f.lemma_deps = set(self.lemma_deps)
        f.r = self.r
        f.c = self.c
        f.used = self.used
        f.memo = self.memo
        f.origins = OriginCounter(self.origins.next_id)
        f.history = [] if light else list(self.history)
        f.events = {} if light else dict(self.events)
        f.advice = [] if light else list(self.advice)
        f.last_subst = self.last_subst
        f.light = light or self.light
        return f

    def add_goal(self, formulas: Iterable[Formula], name: Optional[str] = None) -> str:
        """Add a goal tree; its root id is the 1-based tree number."""
        tree_name = name if name is not None else f"goal{len(self.trees) + 1}"
        if tree_name in self.trees:
            raise ForestError(f"duplicate goal name {tree_name!r}")
        root_id = str(len(self.trees) + 1)
        seq = self.origins.sequent(formulas)
        self._record(f"goal {tree_name}: {print_sequent(seq)}")
        self._register_vars(all_vars(seq))
        node = Node(root_id, tree_name, seq, None, len(self.history) - 1, self._snapshot())
        self.trees[tree_name] = root_id
        self.nodes[root_id] = node
        return root_id

    def add_lemma(self, name: str, formulas: Iterable[Formula]) -> None:
        # lemma variables are local (instantiated or renamed apart per
        # application), so they do not enter the freshness universe
        if name in self.lemmas:
            raise ForestError(f"duplicate lemma name {name!r}")
        seq = self.origins.sequent(formulas)
        self.lemmas[name] = Lemma(name, seq)
        self._record(f"lemma {name}: {print_sequent(seq)}")

    def seed_vc_edge(self, z: Var, x: Var) -> None:
        """Preload a variable-condition edge (used by reduced-forest scripts)."""
        self.r = self.r.union({(z, x)})
        self._register_vars({z, x})
        self._record(f"vc-edge {z} {x}")

    def seed_cc_entry(self, v: Var, f: Formula) -> None:
        self.c = self.c.insert(v, f)
        self._register_vars({v} | all_vars(f))
        self._record(f"cc {v}: {print_formula(f)}")

    # -- bookkeeping ------------------------------------------------------

    def _record(self, line: str) -> None:
        if not self.light:
            self.history.append(line)

    def _snapshot(self) -> Snapshot:
        return Snapshot(self.r, self.c, self.used, self.memo, self.origins.next_id)

    def _register_vars(self, vs: Iterable[Var]) -> None:
        self.used = self.used | frozenset(v for v in vs if v.cls is not VarClass.BOUND)

    def node(self, node_id: str) -> Node:
        n = self.nodes.get(node_id)
        if n is None:
            raise ForestError(f"unknown node {node_id!r}")
        return n

    def open_leaves(self) -> list[Node]:
        return [n for n in sorted(self.nodes.values(), key=lambda n: n.id)
                if n.applied is None and not self.leaf_closed(n)]

    def leaf_closed(self, n: Node) -> bool:
        return n.closed_by is not None or is_axiom(n.sequent)

    def is_closed(self) -> bool:
        return all(self.leaf_closed(n) for n in self.nodes.values() if n.applied is None)

    def closing_reason(self, n: Node) -> str:
        if n.closed_by is not None:
            return f"subsumption({n.closed_by.lemma})"
        if is_axiom(n.sequent):
            return "axiom"
        return "open"

    def fresh_var(self, stem: str, cls: VarClass) -> Var:
        serial = 0
        while Var(stem, cls, serial) in self.used:
            serial = serial + 1 if serial else 2
        return Var(stem, cls, serial)

    def _check_fresh(self, v: Var) -> None:
        if v in self.used:
            raise FreshnessError(f"variable {v} was already introduced in this forest")

    def _memo_get(self, key: str) -> Optional[Var]:
        for k, v in self.memo:
            if k == key:
                return v
        return None

    # -- rule application ---------------------------------------------------

    def apply_rule(self, node_id: str, rule: RuleId, index: int, *,
                   var: Optional[Var] = None, term: Optional[Term] = None,
                   names: tuple[str, ...] = (), labels: tuple[str, ...] = ()) -> list[str]:
        """Apply one reductive rule at an open leaf; returns the child node ids."""
        n = self.node(node_id)
        if n.applied is not None:
            raise ForestError(f"node {node_id} is not a leaf")
        if n.closed_by is not None:
            raise ForestError(f"node {node_id} is already closed")
        if rule in (RuleId.DELTA_MINUS, RuleId.DELTA_PLUS, RuleId.DELTA_PLUS_PLUS) \
                and rule not in self.policy:
            raise ForestError(f"rule {rule.value} is not enabled by the session policy")

        directive = _RULE_DIRECTIVES[rule]
        parts = [directive, node_id, str(index)]
        app: RuleApplication
        if rule is RuleId.ALPHA:
            app, children = apply_alpha(n.sequent, index, self.origins)
        elif rule is RuleId.BETA:
            app, children = apply_beta(n.sequent, index, self.origins)
        elif rule is RuleId.GAMMA:
            if term is not None:
                app, children = apply_gamma(n.sequent, index, term, self.origins)
                parts.append(f"term {print_term(term)}")
            else:
                fresh = var if var is not None else self.fresh_var(_binder_stem(n.sequent, index), VarClass.GAMMA)
                self._check_fresh(fresh)
                app, children = apply_gamma(n.sequent, index, fresh, self.origins)
                parts.append(f"var {fresh}")
        elif rule is RuleId.DELTA_MINUS:
            fresh = var if var is not None else self.fresh_var(_binder_stem(n.sequent, index), VarClass.WEAK)
            self._check_fresh(fresh)
            app, children = apply_delta_minus(n.sequent, index, fresh, self.origins)
            parts.append(f"var {fresh}")
        elif rule is RuleId.DELTA_PLUS:
            fresh = var if var is not None else self.fresh_var(_binder_stem(n.sequent, index), VarClass.STRONG)
            self._check_fresh(fresh)
            app, children = apply_delta_plus(n.sequent, index, fresh, self.origins)
            parts.append(f"var {fresh}")
        elif rule is RuleId.DELTA_PLUS_PLUS:
            memo = dict(self.memo)
            key = delta_memo_key(n.sequent.formulas[index])
            if self._memo_get(key) is None:
                fresh = var if var is not None else self.fresh_var(_binder_stem(n.sequent, index), VarClass.STRONG)
                self._check_fresh(fresh)
                app, children = apply_delta_plus_plus(n.sequent, index, memo, fresh, self.origins)
                parts.append(f"var {fresh}")
            else:
                app, children = apply_delta_plus_plus(n.sequent, index, memo, None, self.origins)
        elif rule is RuleId.EXPAND:
            app, children = apply_expand(n.sequent, index, self.origins, names)
            if names:
                parts.append("names " + " ".join(names))
        else:
            raise ForestError(f"rule {rule.value} cannot be applied directly")

        # the variable-condition extension of a delta step is always acyclic
        # (all new edges point into the fresh vertex), but verify anyway
        new_r = self.r.union(app.vc_delta)
        cycle = find_cycle(new_r)
        if cycle is not None:
            raise ForestError("rule rejected: vc cycle " + " -> ".join(map(str, cycle)))

        child_ids = self._attach(n, app, children, labels, parts)
        self.r = new_r
        for v, f in app.cc_delta:
            self.c = self.c.insert(v, f)
        for v in app.produced:
            self._register_vars({v})
        if app.rule in (RuleId.DELTA_PLUS, RuleId.DELTA_PLUS_PLUS) and app.produced:
            key = delta_memo_key(app.principal)
            if self._memo_get(key) is None:
                self.memo = self.memo + ((key, app.produced[0]),)
        return child_ids

    def _attach(self, n: Node, step: Step, children: list[Sequent],
                labels: tuple[str, ...], parts: list[str]) -> list[str]:
        if labels and len(labels) != len(children):
            raise ForestError(f"expected {len(children)} labels, got {len(labels)}")
        child_ids = []
        for k, seq in enumerate(children):
            cid = labels[k] if labels else f"{n.id}.{k + 1}"
            if cid in self.nodes:
                raise ForestError(f"node id {cid!r} already exists")
            child_ids.append(cid)
        if labels:
            parts.append("as " + " ".join(child_ids))
        self._record(" ".join(parts))
        counts = n.gamma_counts
        if isinstance(step, RuleApplication) and step.rule is RuleId.GAMMA:
            origin = n.sequent.entries[step.principal_index].origin
            bumped = dict(counts)
            bumped[origin] = bumped.get(origin, 0) + 1
            counts = tuple(sorted(bumped.items()))
        snap = self._snapshot()
        for cid, seq in zip(child_ids, children):
            self.nodes[cid] = Node(cid, n.tree, seq, n.id, len(self.history) - 1, snap, counts)
        self.nodes[n.id] = replace(n, applied=step, children=tuple(child_ids))
        return child_ids

    # -- global substitution -------------------------------------------------

    def apply_global_substitution(self, sigma: Substitution) -> Union[Accepted, Rejected]:
        """Apply an R-substitution on gamma variables to every label of the forest.

        On rejection the forest is unchanged and the cycle witness is returned.
        """
        for v in sigma.domain:
            if v.cls is not VarClass.GAMMA:
                raise ForestError(f"global substitutions may instantiate gamma variables only, got {v}")
        self._record(f"subst {sigma}")
        result = validate_r_substitution(self.r, sigma)
        self.last_subst = result
        if isinstance(result, Rejected):
            return result
        if not sigma.is_empty():
            if not self.light:
                event = SubstEvent(sigma, dict(self.nodes), self.c)
                self.events[len(self.history) - 1] = event
            self.nodes = {nid: self._subst_node(node, sigma) for nid, node in self.nodes.items()}
            self.c = self.c.map_formulas(lambda f: apply_subst(f, sigma))
            self.r = result.updated
            for _, t in sigma.bindings:
                self._register_vars(free_vars(t))
        return result

    def _subst_node(self, n: Node, sigma: Substitution) -> Node:
        step = n.applied
        if isinstance(step, RuleApplication):
            step = replace(
                step,
                principal=apply_subst(step.principal, sigma),
                pi=tuple((k, v if isinstance(v, Var) else apply_subst(v, sigma)) for k, v in step.pi),
                rho=tuple((k, tuple(apply_subst(f, sigma) for f in fs)) for k, fs in step.rho),
            )
        elif isinstance(step, LemmaApplication):
            step = replace(
                step,
                inst=_subst_subst(step.inst, sigma),
                matched=tuple(apply_subst(f, sigma) for f in step.matched),
                missing=tuple(apply_subst(f, sigma) for f in step.missing),
            )
        closed = n.closed_by
        if closed is not None:
            closed = Subsumption(closed.lemma, _subst_subst(closed.inst, sigma))
        return replace(n, sequent=apply_subst(n.sequent, sigma), applied=step, closed_by=closed)

    # -- lemma application ----------------------------------------------------

    def instantiable_weak_vars(self, lemma: Lemma) -> frozenset[Var]:
        """Weak variables of the lemma not blocked by the current vc: y is
        instantiable iff every rigid variable of the statement is already
        related to y in R (vacuously true for rigid-free statements)."""
        rigids = rigid_vars(lemma.statement)
        weaks = free_vars(lemma.statement, {VarClass.WEAK})
        return frozenset(y for y in weaks if all((z, y) in self.r.edges for z in rigids))

    def apply_lemma(self, node_id: str, lemma_name: str, weak_inst: Substitution,
                    labels: tuple[str, ...] = ()) -> list[str]:
        """Reduce a leaf by a lemma: close by subsumption when the instantiated
        lemma is a subsequent, else cut in the conjugates of the missing formulas."""
        n = self.node(node_id)
        if n.applied is not None or n.closed_by is not None:
            raise ForestError(f"node {node_id} is not an open leaf")
        lemma = self.lemmas.get(lemma_name)
        if lemma is None:
            raise ForestError(f"unknown lemma {lemma_name!r}")
        self._check_lemma_wellfounded(n.tree, lemma_name)
        allowed = self.instantiable_weak_vars(lemma)
        for v in weak_inst.domain:
            if v.cls is not VarClass.WEAK:
                raise LemmaApplicationError(f"lemma instantiation domain must be weak variables, got {v}")
            if v not in allowed:
                raise LemmaApplicationError(f"weak variable {v} is blocked by the variable condition")
        # weak variables of the statement left uninstantiated are renamed apart,
        # so each application stays local to the lemma
        mapping = weak_inst.as_dict()
        leftover = free_vars(lemma.statement, {VarClass.WEAK}) - frozenset(weak_inst.domain)
        for y in sorted(leftover, key=Var.sort_key):
            fresh = self.fresh_var(y.name, VarClass.WEAK)
            mapping[y] = VarRef(fresh)
            self._register_vars({fresh})
        inst = apply_subst(lemma.statement, Substitution.of(mapping))
        goal_formulas = set(n.sequent.formulas)
        matched: list[Formula] = []
        missing: list[Formula] = []
        for f in inst.formulas:
            (matched if f in goal_formulas else missing).append(f)
        step = LemmaApplication(lemma_name, weak_inst, tuple(matched), tuple(missing))
        self.lemma_deps.add((n.tree, lemma_name))
        parts = ["applylemma", node_id, lemma_name, str(weak_inst)]
        if not missing:
            self._record(" ".join(parts))
            self.nodes[node_id] = replace(n, closed_by=Subsumption(lemma_name, weak_inst))
            self._register_vars(all_vars(inst))
            return []
        children = [Sequent((SeqEntry(conjugate(cf), self.origins.fresh()),) + n.sequent.entries)
                    for cf in missing]
        ids = self._attach(n, step, children, labels, parts)
        self._register_vars(all_vars(inst))
        return ids

    def _check_lemma_wellfounded(self, tree: str, lemma_name: str) -> None:
        if tree == lemma_name:
            raise LemmaApplicationError(f"lemma {lemma_name!r} cannot be applied in its own proof")
        deps = self.lemma_deps | {(tree, lemma_name)}
        # follow dependency chains: using-tree -> lemma whose proof tree uses ...
        stack, seen = [lemma_name], set()
        while stack:
            cur = stack.pop()
            if cur == tree:
                raise LemmaApplicationError("lemma application must stay wellfounded")
            if cur in seen:
                continue
            seen.add(cur)
            stack.extend(l for t, l in deps if t == cur)

    # -- backtracking ----------------------------------------------------------

    def backtrack(self, node_id: str) -> None:
        """Delete the subtree below a node and restore R, C, ledger and the
        freshness state to the snapshot taken when the node was created.
        Accepted global substitutions newer than that snapshot are undone on
        the surviving labels but stay stored as advice."""
        n = self.node(node_id)
        snap = n.snapshot
        survivors = {nid for nid, m in self.nodes.items() if not self._strictly_below(nid, node_id)}
        # restore labels from the earliest substitution event after the snapshot;
        # every undone substitution is kept as advice for the restart
        undone = [idx for idx in sorted(self.events) if idx >= n.created_at]
        for idx in undone:
            self.advice.append((self.events[idx].sigma, f"undone by backtrack {node_id}"))
        if undone:
            event = self.events[undone[0]]
            restored = {nid: event.prev_nodes.get(nid, self.nodes[nid]) for nid in survivors}
            self.nodes = {**self.nodes, **restored}
        self.events = {idx: ev for idx, ev in self.events.items() if idx < n.created_at}
        self.nodes = {nid: m for nid, m in self.nodes.items() if nid in survivors}
        for nid, m in list(self.nodes.items()):
            kept = tuple(c for c in m.children if c in self.nodes)
            if kept != m.children or nid == node_id:
                self.nodes[nid] = replace(m, children=kept,
                                          applied=None if nid == node_id else m.applied)
        self.r, self.c, self.used, self.memo = snap.r, snap.c, snap.used, snap.memo
        self.origins = OriginCounter(snap.origin_next)
        self.last_subst = None
        self._record(f"backtrack {node_id}")

    def _strictly_below(self, nid: str, ancestor: str) -> bool:
        cur = self.nodes[nid].parent
        while cur is not None:
            if cur == ancestor:
                return True
            cur = self.nodes[cur].parent
        return False

    def prune_for_variant(self, node_id: str) -> None:
        """Rebuild the state for a permutability variant: the subtree below the
        node is discarded, R/C/memo revert to the node's snapshot plus the
        updates of all later accepted global substitutions, and the freshness
        universe is recomputed from everything still visible."""
        n = self.node(node_id)
        snap = n.snapshot
        later = [self.events[i] for i in sorted(self.events) if i >= n.created_at]
        self.nodes = {nid: m for nid, m in self.nodes.items()
                      if not self._strictly_below(nid, node_id)}
        for nid, m in list(self.nodes.items()):
            kept = tuple(c for c in m.children if c in self.nodes)
            if kept != m.children or nid == node_id:
                self.nodes[nid] = replace(m, children=kept,
                                          applied=None if nid == node_id else m.applied)
        r, c = snap.r, snap.c
        for ev in later:
            r = sigma_update(r, ev.sigma)
            c = c.map_formulas(lambda f, s=ev.sigma: apply_subst(f, s))
        self.r, self.c, self.memo = r, c, snap.memo
        used: set[Var] = set(v for e in self.r.edges for v in e)
        for v, f in self.c.entries:
            used.add(v)
            used |= set(all_vars(f))
        for m in self.nodes.values():
            used |= set(all_vars(m.sequent))
        for lemma in self.lemmas.values():
            used |= set(all_vars(lemma.statement))
        self.used = frozenset(v for v in used if v.cls is not VarClass.BOUND)
        self.events = {}
        self._record(f"# variant at {node_id}")

    # -- export ------------------------------------------------------------------

    def export_script(self) -> str:
        return "\n".join(self.history) + "\n"

    def gamma_ledger(self, leaf_id: str) -> dict[int, int]:
        return dict(self.node(leaf_id).gamma_counts)

    def report_lines(self) -> list[str]:
        lines = [f"closed={'true' if self.is_closed() else 'false'}"]
        for n in sorted((m for m in self.nodes.values() if m.applied is None), key=lambda m: m.id):
            lines.append(f"branch.{n.id}={self.closing_reason(n)}")
        lines.append(f"vc.acyclic={'true' if is_wellfounded(self.r) else 'false'}")
        return lines


def _binder_stem(seq: Sequent, index: int) -> str:
    f = seq.formulas[index]
    parts = delta_parts(f) or gamma_parts(f)
    return parts[0].name if parts else "v"


def _subst_subst(inner: Substitution, sigma: Substitution) -> Substitution:
    return Substitution(tuple((v, apply_subst(t, sigma)) for v, t in inner.bindings))

"""Variable conditions and choice conditions.

A variable condition is a finite directed relation over free variables;
an edge (z, x) forbids instantiating x with any term in which z could ever
occur. Applying a substitution extends the relation by its sigma-update, and
a substitution is admissible (an R-substitution) exactly when that update is
acyclic, which for finite relations coincides with wellfoundedness.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Union

from .syntax import Formula, Substitution, Var, free_vars, print_formula

Edge = tuple[Var, Var]


@dataclass(frozen=True)
class VariableCondition:
    edges: frozenset[Edge]

    @staticmethod
    def empty() -> "VariableCondition":
        return VariableCondition(frozenset())

    @staticmethod
    def of(edges: Iterable[Edge]) -> "VariableCondition":
        es = frozenset(edges)
        for z, x in es:
            if not (z.is_free and x.is_free):
                raise ValueError(f"vc edge ({z}, {x}) must relate free variables")
        return VariableCondition(es)

    def union(self, edges: Iterable[Edge]) -> "VariableCondition":
        return VariableCondition.of(self.edges | set(edges))

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges, key=lambda e: (e[0].sort_key(), e[1].sort_key()))

    def vertices(self) -> frozenset[Var]:
        return frozenset(v for e in self.edges for v in e)

    def export(self) -> str:
        """Plain-text graph export, one `z -> x` line per edge, deterministic order."""
        return "\n".join(f"{z} -> {x}" for z, x in self.sorted_edges())

    def __str__(self) -> str:
        return "{" + ", ".join(f"({z}, {x})" for z, x in self.sorted_edges()) + "}"


def sigma_update(r: VariableCondition, sigma: Substitution) -> VariableCondition:
    """R extended by an edge (z, x) for every x in DOM sigma and z free in sigma(x)."""
    new_edges: set[Edge] = set(r.edges)
    for x, t in sigma.bindings:
        for z in free_vars(t):
            new_edges.add((z, x))
    # domain and range variables are free by the substitution invariants
    return VariableCondition(frozenset(new_edges))


def find_cycle(r: VariableCondition) -> Optional[list[Var]]:
    """First cycle in deterministic vertex order, as a vertex list, or None.

    Iterative depth-first search with an explicit stack; the returned list
    starts and ends at the same vertex.
    """
    succs: dict[Var, list[Var]] = {}
    for z, x in r.sorted_edges():
        succs.setdefault(z, []).append(x)
    visited: set[Var] = set()
    for start in sorted(succs, key=Var.sort_key):
        if start in visited:
            continue
        # stack holds (vertex, iterator index); path is the current chain
        path: list[Var] = []
        on_path: set[Var] = set()
        stack: list[tuple[Var, int]] = [(start, 0)]
        while stack:
            v, i = stack[-1]
            if i == 0:
                path.append(v)
                on_path.add(v)
            nexts = succs.get(v, [])
            if i < len(nexts):
                stack[-1] = (v, i + 1)
                w = nexts[i]
                if w in on_path:
                    cycle = path[path.index(w):] + [w]
                    return cycle
                if w not in visited:
                    stack.append((w, 0))
            else:
                stack.pop()
                path.pop()
                on_path.discard(v)
                visited.add(v)
    return None


def is_wellfounded(r: VariableCondition) -> bool:
    """For a finite relation: wellfounded iff acyclic."""
    return _edges_acyclic(r.edges)


def _edges_acyclic(edges) -> bool:
    # Kahn's algorithm without any ordering guarantees; used on hot paths
    # where no witness cycle is needed
    indeg: dict = {}
    succs: dict = {}
    for z, x in edges:
        succs.setdefault(z, []).append(x)
        indeg[x] = indeg.get(x, 0) + 1
        indeg.setdefault(z, indeg.get(z, 0))
    queue = [v for v, d in indeg.items() if d == 0]
    seen = 0
    while queue:
        v = queue.pop()
        seen += 1
        for w in succs.get(v, ()):
            indeg[w] -= 1
            if indeg[w] == 0:
                queue.append(w)
    return seen == len(indeg)


def update_acyclic(r: VariableCondition, sigma: Substitution) -> bool:
    """Fast admissibility check: is the sigma-update of R acyclic?"""
    edges = set(r.edges)
    for x, t in sigma.bindings:
        for z in free_vars(t):
            edges.add((z, x))
    return _edges_acyclic(edges)


@dataclass(frozen=True)
class Accepted:
    updated: VariableCondition


@dataclass(frozen=True)
class Rejected:
    cycle: tuple[Var, ...]

    def __str__(self) -> str:
        return " -> ".join(str(v) for v in self.cycle)


def validate_r_substitution(r: VariableCondition, sigma: Substitution) -> Union[Accepted, Rejected]:
    """Accept with the sigma-update when it stays acyclic, else return a witness cycle."""
    updated = sigma_update(r, sigma)
    if _edges_acyclic(updated.edges):
        return Accepted(updated)
    cycle = find_cycle(updated)
    assert cycle is not None
    return Rejected(tuple(cycle))


# ---------------------------------------------------------------------------
# Choice conditions

class ChoiceConditionError(ValueError):
    pass


@dataclass(frozen=True)
class ChoiceCondition:
    """Map from strong variables to their characterizing formulas.

    Entries are never overwritten: a repeated delta step under the delta++
    policy must look the variable up instead of rebinding it.
    """

    entries: tuple[tuple[Var, Formula], ...]

    @staticmethod
    def empty() -> "ChoiceCondition":
        return ChoiceCondition(())

    def insert(self, v: Var, f: Formula) -> "ChoiceCondition":
        if any(k == v for k, _ in self.entries):
            raise ChoiceConditionError(f"choice condition already has an entry for {v}")
        return ChoiceCondition(self.entries + ((v, f),))

    def get(self, v: Var) -> Optional[Formula]:
        for k, f in self.entries:
            if k == v:
                return f
        return None

    def keys(self) -> tuple[Var, ...]:
        return tuple(k for k, _ in self.entries)

    def map_formulas(self, fn) -> "ChoiceCondition":
        return ChoiceCondition(tuple((k, fn(f)) for k, f in self.entries))

    def __str__(self) -> str:
        return "{" + ", ".join(f"{k} -> {print_formula(f)}" for k, f in self.entries) + "}"


def cc_insert(c: ChoiceCondition, v: Var, f: Formula) -> ChoiceCondition:
    return c.insert(v, f)

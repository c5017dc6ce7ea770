"""The worked (lim+) corpus: the reconstructed lemma library, the golden proof
scripts, and their expected outputs.

Scripts are shipped as plain-text files under corpus/ and are the golden-test
medium; this module can regenerate them deterministically (scripts/gen_corpus.py)
and exposes them as corpus entries. Node ids follow the dotted labels of the
worked proof (`1^5` abbreviates 1.1.1.1.1 and is treated as an opaque id).

The lemma library is a reconstruction pinned by three constraints: every entry
must match its application sites, be valid over the reals, and be minimal.
The min lower bound is split into the two one-sided entries 2a/2b because a
single-formula statement cannot serve both the left and the right bound at
the two symmetric application sites.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from .forest import ProofForest, Lemma
from .script import ReplayResult, execute_directive, golden_lines, run_script
from .syntax import (
    Formula, Sequent, Var, VarClass, parse_formula, parse_sequent_formulas,
    print_formula, print_sequent, subst_formula, svar, wvar,
)
from .vc import sigma_update

LEMMA_LIBRARY: tuple[tuple[str, str], ...] = (
    ("2a", "min(y^w, z^w) <= y^w"),
    ("2b", "min(y^w, z^w) <= z^w"),
    ("3", "y^w !<= x^w, z^w < x^w, z^w !< y^w"),
    ("4", "0 !< y^w, 0 !< z^w, 0 < min(y^w, z^w)"),
    ("5", "|(z_0^w + z_1^w) - (z_2^w + z_3^w)| <= (|z_0^w - z_2^w| + |z_1^w - z_3^w|)"),
    ("6", "z_4^w !<= z_5^w, z_4^w < z_6^w, z_5^w !< z_6^w"),
    ("7", "(z_0^w + z_1^w) < (z_2^w + z_3^w), z_0^w !< z_2^w, z_1^w !< z_3^w"),
    ("8", "z^w !< (y^w/2 + y^w/2), z^w < y^w"),
    ("9", "0 !< y^w, 0 < y^w/2"),
)

GOAL_LIMPLUS = ("((lim[x->x_0^w] f^w(x) = y_f^w & lim[x->x_0^w] g^w(x) = y_g^w)"
                " -> lim[x->x_0^w] (f^w(x) + g^w(x)) = (y_f^w + y_g^w))")

SIGMA = "{x_f^e -> x^s, x_g^e -> x^s, delta^e -> min(delta_f^s, delta_g^s)}"
SIGMA2 = "{eps_f^e -> eps^w/2, eps_g^e -> eps^w/2}"
SIGMA_MINUS = "{x_f^e -> x^w, x_g^e -> x^w, delta^e -> min(delta_f^w, delta_g^w)}"

ABS_SUM = "(|f^w(x^s) - y_f^w| + |g^w(x^s) - y_g^w|)"
T_TERM = "|(f^w(x^s) + g^w(x^s)) - (y_f^w + y_g^w)|"


def lemma_library() -> list[Lemma]:
    """The nine reconstructed library lemmas, as sequents over weak variables."""
    from .syntax import OriginCounter
    origins = OriginCounter()
    return [Lemma(name, origins.sequent(parse_sequent_formulas(text)))
            for name, text in LEMMA_LIBRARY]


class Builder:
    """Emits script lines while executing them, so principal indices can be
    resolved by content instead of hand counting."""

    def __init__(self, policy_line: Optional[str] = None):
        self.lines: list[str] = []
        first = [policy_line] if policy_line else []
        self.forest = run_script("\n".join(first)).forest if first else ProofForest()
        self.result = ReplayResult(self.forest)
        if policy_line:
            self.lines.append(policy_line)

    def emit(self, line: str) -> None:
        execute_directive(self.forest, line, self.result)
        self.lines.append(line)

    def idx(self, node_id: str, *fragments: str) -> int:
        """Index of the first formula whose canonical print contains all fragments."""
        seq = self.forest.node(node_id).sequent
        for i, f in enumerate(seq.formulas):
            s = print_formula(f)
            if all(frag in s for frag in fragments):
                return i
        raise LookupError(f"no formula matching {fragments} in {node_id}: {print_sequent(seq)}")

    def step(self, directive: str, node_id: str, *fragments: str, tail: str = "") -> None:
        i = self.idx(node_id, *fragments)
        line = f"{directive} {node_id} {i}"
        if tail:
            line += f" {tail}"
        self.emit(line)

    def script(self) -> str:
        return "\n".join(self.lines) + "\n"


def _emit_lemmas(b: Builder) -> None:
    for name, text in LEMMA_LIBRARY:
        b.emit(f"lemma {name}: {text}")


def _phase_a(b: Builder) -> None:
    """The shared opening: root (1) down to (1^5.3.1), where the proof attempts fork."""
    b.emit(f"goal limplus: {GOAL_LIMPLUS}")
    _emit_lemmas(b)
    b.step("alpha", "1", "->")                         # unfold the implication
    b.step("alpha", "1.1", "~(lim")                    # split the negated conjunction
    b.step("expand", "1.1.1", "lim[x->x_0^w] (f^w(x) + g^w(x))",
           tail="names eps delta x as 1^2")
    b.step("expand", "1^2", "forall eps>0")
    b.step("delta-", "1^2.1", "forall eps.", tail="var eps^w")
    b.step("alpha", "1^2.1.1", "0 < eps^w ->")
    b.step("expand", "1^2.1.1.1", "exists delta>0", tail="as 1^3")
    b.step("gamma", "1^3", "exists delta.", tail="var delta^e as 1^4")
    b.step("expand", "1^4", "~lim", "f^w", tail="names eps_f delta_f x_f")
    b.step("expand", "1^4.1", "~forall eps_f>0")
    b.step("gamma", "1^4.1.1", "~forall eps_f.", tail="var eps_f^e")
    b.step("expand", "1^4.1.1.1", "~lim", "g^w", tail="names eps_g delta_g x_g")
    b.step("expand", "1^4.1.1.1.1", "~forall eps_g>0")
    b.step("gamma", "1^4.1.1.1.1.1", "~forall eps_g.", tail="var eps_g^e as 1^5")
    b.step("beta", "1^5", "~(0 < eps_f^e ->", tail="as 1^5.1 1^5.x")
    b.step("beta", "1^5.x", "~(0 < eps_g^e ->", tail="as 1^5.2 1^5.y")
    b.step("expand", "1^5.y", "~exists delta_f>0")
    b.step("expand", "1^5.y.1", "~exists delta_g>0", tail="as 1^5.3")
    b.step("delta+", "1^5.3", "~exists delta_f.", tail="var delta_f^s as 1^5.3.1")


def _close_branch_34(b: Builder, node3: str, node4: str, child3: str, child4: str) -> None:
    """Close the two distance branches with the min bounds plus transitivity."""
    b.emit(f"applylemma {node3} 2a {{y^w -> delta_f^s, z^w -> delta_g^s}} as {child3}")
    b.emit(f"applylemma {child3} 3 {{y^w -> min(delta_f^s, delta_g^s), x^w -> delta_f^s,"
           f" z^w -> |x^s - x_0^w|}}")
    b.emit(f"applylemma {node4} 2b {{y^w -> delta_f^s, z^w -> delta_g^s}} as {child4}")
    b.emit(f"applylemma {child4} 3 {{y^w -> min(delta_f^s, delta_g^s), x^w -> delta_g^s,"
           f" z^w -> |x^s - x_0^w|}}")


def _clean_up_branch5(b: Builder, node5: str) -> None:
    """The working mathematician's focus: triangle inequality, transitivity,
    monotonicity of +, the closing substitution, and the halving bound."""
    b.emit(f"applylemma {node5} 5 {{z_0^w -> f^w(x^s), z_1^w -> g^w(x^s),"
           f" z_2^w -> y_f^w, z_3^w -> y_g^w}} as {node5}.1")
    b.emit(f"applylemma {node5}.1 6 {{z_4^w -> {T_TERM}, z_5^w -> {ABS_SUM},"
           f" z_6^w -> eps^w}} as {node5}.1^2")
    b.emit(f"applylemma {node5}.1^2 7 {{z_0^w -> |f^w(x^s) - y_f^w|, z_1^w -> |g^w(x^s) - y_g^w|,"
           f" z_2^w -> eps_f^e, z_3^w -> eps_g^e}} as {node5}.1^3")
    b.emit(f"subst {SIGMA2}")
    b.emit("expect-vc-acyclic")
    b.emit(f"applylemma {node5}.1^3 8 {{z^w -> {ABS_SUM}, y^w -> eps^w}}")


def build_success() -> Builder:
    """The straight path: delta+ both limits, gammas, the critical beta last."""
    b = Builder()
    _phase_a(b)
    n = "1^5.3.1"
    b.step("delta+", n, "~exists delta_g.", tail="var delta_g^s")
    b.step("alpha", f"{n}.1", "~(0 < delta_f^s &")
    b.step("alpha", f"{n}.1.1", "~(0 < delta_g^s &")
    b.step("expand", f"{n}.1.1.1", "~forall x_f!=")
    b.step("expand", f"{n}.1.1.1.1", "~forall x_g!=")
    b.step("gamma", f"{n}.1.1.1.1.1", "~forall x_f.", tail="var x_f^e")
    b.step("gamma", f"{n}.1.1.1.1.1.1", "~forall x_g.", tail="var x_g^e as 1^5.3.1^2")
    m = "1^5.3.1^2"
    b.step("beta", m, "(0 < delta^e &", tail=f"as {m}.1 {m}.2")
    b.step("expand", f"{m}.2", "forall x!=x_0^w", tail=f"as {m}.2a")
    b.step("delta+", f"{m}.2a", "forall x.", tail=f"var x^s as {m}.2b")
    b.step("alpha", f"{m}.2b", "x^s != x_0^w ->", tail=f"as {m}.2c")
    b.step("alpha", f"{m}.2c", "|x^s - x_0^w| < delta^e ->", tail=f"as {m}.2.1")
    q = f"{m}.2.1"
    b.step("beta", q, "~(x_f^e != x_0^w ->", tail=f"as {q}.1 {q}.i1")
    b.step("beta", f"{q}.i1", "~(|x_f^e - x_0^w| < delta_f^s ->", tail=f"as {q}.3 {q}.i2")
    b.step("beta", f"{q}.i2", "~(x_g^e != x_0^w ->", tail=f"as {q}.2 {q}.i3")
    b.step("beta", f"{q}.i3", "~(|x_g^e - x_0^w| < delta_g^s ->", tail=f"as {q}.4 {q}.5")
    b.emit(f"subst {SIGMA}")
    b.emit("expect-vc-acyclic")
    b.emit(f"expect-axiom {q}.1")
    b.emit(f"expect-axiom {q}.2")
    _close_branch_34(b, f"{q}.3", f"{q}.4", f"{q}.3.1", f"{q}.4.1")
    _clean_up_branch5(b, f"{q}.5")
    b.emit(f"applylemma {m}.1 4 {{y^w -> delta_f^s, z^w -> delta_g^s}}")
    b.emit("applylemma 1^5.1 9 {y^w -> eps^w}")
    b.emit("applylemma 1^5.2 9 {y^w -> eps^w}")
    b.emit("expect-closed")
    return b


def build_bad_turn() -> Builder:
    """The early beta against the folklore heuristics: four branches close,
    (1^5.3.1.1) stays open."""
    b = Builder()
    _phase_a(b)
    n = "1^5.3.1"
    b.step("beta", n, "(0 < delta^e &", tail=f"as {n}.1 {n}.2")
    b.step("delta+", f"{n}.2", "~exists delta_g.", tail=f"var delta_g^s as {n}.2a")
    b.step("alpha", f"{n}.2a", "~(0 < delta_f^s &", tail=f"as {n}.2b")
    b.step("alpha", f"{n}.2b", "~(0 < delta_g^s &", tail=f"as {n}.2c")
    b.step("expand", f"{n}.2c", "forall x!=x_0^w", tail=f"as {n}.2.1")
    q = f"{n}.2.1"
    b.step("delta+", q, "forall x.", tail=f"var x^s as {q}a")
    b.step("alpha", f"{q}a", "x^s != x_0^w ->", tail=f"as {q}b")
    b.step("alpha", f"{q}b", "|x^s - x_0^w| < delta^e ->", tail=f"as {q}^2")
    b.step("expand", f"{q}^2", "~forall x_f!=")
    b.step("expand", f"{q}^2.1", "~forall x_g!=")
    b.step("gamma", f"{q}^2.1.1", "~forall x_f.", tail="var x_f^e")
    b.step("gamma", f"{q}^2.1.1.1", "~forall x_g.", tail=f"var x_g^e as {q}^3")
    r = f"{q}^3"
    b.step("beta", r, "~(x_f^e != x_0^w ->", tail=f"as {r}.1 {r}.i1")
    b.step("beta", f"{r}.i1", "~(|x_f^e - x_0^w| < delta_f^s ->", tail=f"as {r}.3 {r}.i2")
    b.step("beta", f"{r}.i2", "~(x_g^e != x_0^w ->", tail=f"as {r}.2 {r}.i3")
    b.step("beta", f"{r}.i3", "~(|x_g^e - x_0^w| < delta_g^s ->", tail=f"as {r}.4 {r}.5")
    b.emit(f"subst {SIGMA}")
    b.emit("expect-vc-acyclic")
    b.emit(f"expect-axiom {r}.1")
    b.emit(f"expect-axiom {r}.2")
    _close_branch_34(b, f"{r}.3", f"{r}.4", f"{r}.3.1", f"{r}.4.1")
    b.emit(f"expect-closed {r}.1")
    b.emit(f"expect-closed {r}.2")
    b.emit(f"expect-closed {r}.3")
    b.emit(f"expect-closed {r}.4")
    b.emit(f"expect-open {n}.1")
    return b


def build_delta_minus() -> Builder:
    """The delta- variant: the closing substitution is no R-substitution."""
    b = Builder()
    _phase_a_delta_minus(b)
    b.emit(f"subst {SIGMA_MINUS}")
    b.emit("expect-vc-cyclic delta^e delta_f^w")
    return b


def _phase_a_delta_minus(b: Builder) -> None:
    b.emit(f"goal limplus: {GOAL_LIMPLUS}")
    _emit_lemmas(b)
    b.step("alpha", "1", "->")
    b.step("alpha", "1.1", "~(lim")
    b.step("expand", "1.1.1", "lim[x->x_0^w] (f^w(x) + g^w(x))",
           tail="names eps delta x as 1^2")
    b.step("expand", "1^2", "forall eps>0")
    b.step("delta-", "1^2.1", "forall eps.", tail="var eps^w")
    b.step("alpha", "1^2.1.1", "0 < eps^w ->")
    b.step("expand", "1^2.1.1.1", "exists delta>0", tail="as 1^3")
    b.step("gamma", "1^3", "exists delta.", tail="var delta^e as 1^4")
    b.step("expand", "1^4", "~lim", "f^w", tail="names eps_f delta_f x_f")
    b.step("expand", "1^4.1", "~forall eps_f>0")
    b.step("gamma", "1^4.1.1", "~forall eps_f.", tail="var eps_f^e")
    b.step("expand", "1^4.1.1.1", "~lim", "g^w", tail="names eps_g delta_g x_g")
    b.step("expand", "1^4.1.1.1.1", "~forall eps_g>0")
    b.step("gamma", "1^4.1.1.1.1.1", "~forall eps_g.", tail="var eps_g^e as 1^5")
    b.step("beta", "1^5", "~(0 < eps_f^e ->", tail="as 1^5.1 1^5.x")
    b.step("beta", "1^5.x", "~(0 < eps_g^e ->", tail="as 1^5.2 1^5.y")
    b.step("expand", "1^5.y", "~exists delta_f>0")
    b.step("expand", "1^5.y.1", "~exists delta_g>0", tail="as 1^5.3")
    b.step("delta-", "1^5.3", "~exists delta_f.", tail="var delta_f^w as 1^5.3.1")
    n = "1^5.3.1"
    b.step("beta", n, "(0 < delta^e &", tail=f"as {n}.1 {n}.2")
    b.step("delta-", f"{n}.2", "~exists delta_g.", tail=f"var delta_g^w as {n}.2a")
    b.step("alpha", f"{n}.2a", "~(0 < delta_f^w &", tail=f"as {n}.2b")
    b.step("alpha", f"{n}.2b", "~(0 < delta_g^w &", tail=f"as {n}.2c")
    b.step("expand", f"{n}.2c", "forall x!=x_0^w", tail=f"as {n}.2.1")
    q = f"{n}.2.1"
    b.step("delta-", q, "forall x.", tail=f"var x^w as {q}a")
    b.step("alpha", f"{q}a", "x^w != x_0^w ->", tail=f"as {q}b")
    b.step("alpha", f"{q}b", "|x^w - x_0^w| < delta^e ->", tail=f"as {q}^2")
    b.step("expand", f"{q}^2", "~forall x_f!=")
    b.step("expand", f"{q}^2.1", "~forall x_g!=")
    b.step("gamma", f"{q}^2.1.1", "~forall x_f.", tail="var x_f^e")
    b.step("gamma", f"{q}^2.1.1.1", "~forall x_g.", tail=f"var x_g^e as {q}^3")


def build_delta_plus_plus() -> Builder:
    """Repeating the delta step from (1^5.3.1.1) under the delta++ policy
    reuses delta_g^s and lets lemma (4) close the branch."""
    b = Builder("policy delta-,delta+,delta++")
    _phase_a(b)
    n = "1^5.3.1"
    b.step("beta", n, "(0 < delta^e &", tail=f"as {n}.1 {n}.2")
    b.step("delta+", f"{n}.2", "~exists delta_g.", tail="var delta_g^s")
    b.emit(f"subst {SIGMA}")
    b.emit("expect-vc-acyclic")
    m = f"{n}.1"
    b.step("delta++", m, "~exists delta_g.", tail=f"as {m}a")
    b.step("alpha", f"{m}a", "~(0 < delta_g^s &", tail=f"as {m}b")
    b.step("alpha", f"{m}b", "~(0 < delta_f^s &", tail=f"as {m}.1")
    b.emit(f"applylemma {m}.1 4 {{y^w -> delta_f^s, z^w -> delta_g^s}}")
    b.emit(f"expect-closed {m}")
    return b


def build_example_eta() -> Builder:
    """Strong variables escape their quantifier scope: mu+ is admissible and
    closes the leaf, mu- is blocked by the delta- edge."""
    b = Builder()
    b.emit("goal eta_plus: (forall y. ~P(y) | exists x. P(x))")
    b.step("alpha", "1", "|")
    b.step("gamma", "1.1", "exists x.", tail="var x^e")
    b.step("delta+", "1.1.1", "forall y.", tail="var y^s")
    b.emit("subst {x^e -> y^s}")
    b.emit("expect-vc-acyclic")
    b.emit("expect-axiom 1.1.1.1")
    b.emit("expect-closed 1")
    b.emit("goal eta_minus: (forall y2. ~P(y2) | exists x2. P(x2))")
    b.step("alpha", "2", "|")
    b.step("gamma", "2.1", "exists x2.", tail="var x2^e")
    b.step("delta-", "2.1.1", "forall y2.", tail="var y2^w")
    b.emit("subst {x2^e -> y2^w}")
    b.emit("expect-vc-cyclic x2^e y2^w")
    b.emit("expect-open 2.1.1.1")
    return b


def build_permutation() -> Builder:
    """The closed tree used by the permutability check: the critical beta
    placed immediately below the delta+ step that introduces delta_g^s."""
    b = Builder()
    _phase_a(b)
    n = "1^5.3.1"
    b.step("delta+", n, "~exists delta_g.", tail="var delta_g^s")
    s = f"{n}.1"
    b.step("beta", s, "(0 < delta^e &", tail=f"as {s}.a {s}.b")
    # the first branch: both alpha splits, then lemma (4) once sigma is in
    b.step("alpha", f"{s}.a", "~(0 < delta_f^s &")
    b.step("alpha", f"{s}.a.1", "~(0 < delta_g^s &", tail=f"as {s}.a1")
    # the second branch: the rest of the worked proof
    b.step("expand", f"{s}.b", "forall x!=x_0^w")
    b.step("delta+", f"{s}.b.1", "forall x.", tail="var x^s")
    b.step("alpha", f"{s}.b.1.1", "x^s != x_0^w ->")
    b.step("alpha", f"{s}.b.1.1.1", "|x^s - x_0^w| < delta^e ->")
    b.step("alpha", f"{s}.b.1.1.1.1", "~(0 < delta_f^s &")
    b.step("alpha", f"{s}.b.1.1.1.1.1", "~(0 < delta_g^s &")
    b.step("expand", f"{s}.b.1.1.1.1.1.1", "~forall x_f!=")
    b.step("expand", f"{s}.b.1.1.1.1.1.1.1", "~forall x_g!=")
    b.step("gamma", f"{s}.b.1.1.1.1.1.1.1.1", "~forall x_f.", tail="var x_f^e")
    b.step("gamma", f"{s}.b.1.1.1.1.1.1.1.1.1", "~forall x_g.", tail=f"var x_g^e as {s}.c")
    r = f"{s}.c"
    b.step("beta", r, "~(x_f^e != x_0^w ->", tail=f"as {r}.1 {r}.i1")
    b.step("beta", f"{r}.i1", "~(|x_f^e - x_0^w| < delta_f^s ->", tail=f"as {r}.3 {r}.i2")
    b.step("beta", f"{r}.i2", "~(x_g^e != x_0^w ->", tail=f"as {r}.2 {r}.i3")
    b.step("beta", f"{r}.i3", "~(|x_g^e - x_0^w| < delta_g^s ->", tail=f"as {r}.4 {r}.5")
    b.emit(f"subst {SIGMA}")
    b.emit(f"expect-axiom {r}.1")
    b.emit(f"expect-axiom {r}.2")
    _close_branch_34(b, f"{r}.3", f"{r}.4", f"{r}.3.1", f"{r}.4.1")
    _clean_up_branch5(b, f"{r}.5")
    b.emit(f"applylemma {s}.a1 4 {{y^w -> delta_f^s, z^w -> delta_g^s}}")
    b.emit("applylemma 1^5.1 9 {y^w -> eps^w}")
    b.emit("applylemma 1^5.2 9 {y^w -> eps^w}")
    b.emit("expect-closed")
    return b


# ---------------------------------------------------------------------------
# The reduced parallel forest of the no-completion lemma

GAMMA_FORMULA_MARKERS = ("exists delta.", "~forall eps_f.", "~forall eps_g.")


def build_lemma1_reduced() -> str:
    """Script for the three gamma-removed sequents of the no-completion lemma,
    carrying over the variable condition and choice condition of the failed
    attempt. Generated from the bad-turn replay."""
    bad = build_bad_turn()
    forest = bad.forest
    lines = ["policy delta-,delta+"]
    for name, text in LEMMA_LIBRARY:
        lines.append(f"lemma {name}: {text}")
    for z, x in forest.r.sorted_edges():
        lines.append(f"vc-edge {z} {x}")
    for v, f in forest.c.entries:
        lines.append(f"cc {v}: {print_formula(f)}")
    for goal_name, node_id in (("g1", "1^5.1"), ("g2", "1^5.2"), ("g3", "1^5.3.1.1")):
        seq = forest.node(node_id).sequent
        kept = [f for f in seq.formulas if not _is_gamma_context_formula(f)]
        lines.append(f"goal {goal_name}: " + ", ".join(print_formula(f) for f in kept))
    return "\n".join(lines) + "\n"


def _is_gamma_context_formula(f: Formula) -> bool:
    s = print_formula(f)
    return any(s.startswith(m) for m in GAMMA_FORMULA_MARKERS)


# ---------------------------------------------------------------------------
# The countermodel input of the no-completion lemma

def build_countermodel_file() -> str:
    """The nu-instantiated, gamma-removed sequents plus the refuting assignment."""
    bad = build_bad_turn()
    forest = bad.forest
    from .syntax import VarRef
    nu = {svar("delta_f"): VarRef(wvar("delta_f")), svar("delta_g"): VarRef(wvar("delta_g"))}
    lines = []
    for node_id in ("1^5.1", "1^5.2", "1^5.3.1.1"):
        seq = forest.node(node_id).sequent
        kept = [subst_formula(f, nu) for f in seq.formulas if not _is_gamma_context_formula(f)]
        lines.append("sequent " + ", ".join(print_formula(f) for f in kept))
    lines += [
        "assign delta_f^w = 1",
        "assign delta_g^w = 0",
        "assign eps^w = 1",
        "assign x_0^w = 0",
        "assign y_f^w = 0",
        "assign y_g^w = 0",
        "assign f^w = fn v. 0",
        "assign g^w = fn v. 0",
        "unknowns eps_f^e, eps_g^e",
    ]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Entries

@dataclass(frozen=True)
class CorpusEntry:
    name: str
    script: str
    golden: str


_BUILDERS: tuple[tuple[str, Callable[[], Builder]], ...] = (
    ("success", build_success),
    ("bad_turn", build_bad_turn),
    ("delta_minus", build_delta_minus),
    ("delta_plus_plus", build_delta_plus_plus),
    ("example_eta", build_example_eta),
)


def generate_entries() -> list[CorpusEntry]:
    entries = []
    for name, make in _BUILDERS:
        b = make()
        entries.append(CorpusEntry(name, b.script(), "\n".join(golden_lines(b.result)) + "\n"))
    return entries


def corpus_dir() -> Path:
    return Path(__file__).resolve().parents[2] / "corpus"


def corpus() -> list[CorpusEntry]:
    """The shipped corpus entries, read from the plain-text script files."""
    root = corpus_dir()
    entries = []
    for name, _ in _BUILDERS:
        script = (root / f"{name}.script").read_text()
        golden = (root / f"{name}.golden").read_text()
        entries.append(CorpusEntry(name, script, golden))
    return entries


def generate_all(root: Path) -> list[Path]:
    """Regenerate every corpus artifact under the given directory."""
    root.mkdir(parents=True, exist_ok=True)
    written = []
    for entry in generate_entries():
        (root / f"{entry.name}.script").write_text(entry.script)
        (root / f"{entry.name}.golden").write_text(entry.golden)
        written += [root / f"{entry.name}.script", root / f"{entry.name}.golden"]
    perm = build_permutation()
    (root / "permutation.script").write_text(perm.script())
    written.append(root / "permutation.script")
    (root / "lemma1_reduced.script").write_text(build_lemma1_reduced())
    written.append(root / "lemma1_reduced.script")
    (root / "lemma1_countermodel.txt").write_text(build_countermodel_file())
    written.append(root / "lemma1_countermodel.txt")
    success = build_success()
    (root / "success.vc").write_text(success.forest.r.export() + "\n")
    written.append(root / "success.vc")
    return written

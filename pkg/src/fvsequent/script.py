"""Line-oriented proof scripts: the deterministic replay medium.

A script declares a policy, goals and lemmas, then drives the engine one
directive per line. `as` clauses assign explicit node ids to the children a
step creates (defaulting to positional ids), which is how the dotted labels
of the worked corpus stay addressable. Expectation directives make scripts
self-checking; replay reports are byte-deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .forest import ForestError, ProofForest, POLICY_NAMES
from .rules import RuleId, DEFAULT_POLICY, is_axiom
from .syntax import (
    ParseError, Substitution, Var, parse_formula, parse_sequent_formulas,
    parse_substitution, parse_term, parse_var, print_sequent,
)
from .vc import Accepted, Rejected, is_wellfounded


class ScriptError(ValueError):
    def __init__(self, message: str, line_no: int, line: str):
        super().__init__(f"line {line_no}: {message}: {line!r}")
        self.line_no = line_no
        self.line = line


@dataclass
class Check:
    line_no: int
    directive: str
    ok: bool
    detail: str = ""


@dataclass
class ReplayResult:
    forest: ProofForest
    checks: list[Check] = field(default_factory=list)
    creation_labels: dict[str, str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def report_lines(self) -> list[str]:
        lines = []
        for c in self.checks:
            status = "ok" if c.ok else "FAIL"
            suffix = f" [{c.detail}]" if c.detail else ""
            lines.append(f"{status} line {c.line_no}: {c.directive}{suffix}")
        lines.append(f"result={'pass' if self.ok else 'fail'}")
        return lines


_RULES = {
    "alpha": RuleId.ALPHA,
    "beta": RuleId.BETA,
    "gamma": RuleId.GAMMA,
    "delta-": RuleId.DELTA_MINUS,
    "delta+": RuleId.DELTA_PLUS,
    "delta++": RuleId.DELTA_PLUS_PLUS,
    "expand": RuleId.EXPAND,
}


def _split_braces(text: str) -> tuple[list[str], Optional[str], list[str]]:
    """Split a directive tail into (tokens before {..}, the braced block, tokens after)."""
    if "{" not in text:
        return text.split(), None, []
    i = text.index("{")
    depth = 0
    for j in range(i, len(text)):
        if text[j] == "{":
            depth += 1
        elif text[j] == "}":
            depth -= 1
            if depth == 0:
                return text[:i].split(), text[i:j + 1], text[j + 1:].split()
    raise ParseError("unbalanced braces", i)


def _take_labels(tokens: list[str]) -> tuple[list[str], tuple[str, ...]]:
    if "as" in tokens:
        k = tokens.index("as")
        return tokens[:k], tuple(tokens[k + 1:])
    return tokens, ()


def parse_policy(text: str) -> frozenset[RuleId]:
    rules = set()
    for name in text.split(","):
        name = name.strip()
        if name not in POLICY_NAMES:
            raise ValueError(f"unknown delta rule {name!r}")
        rules.add(POLICY_NAMES[name])
    return frozenset(rules)


def run_script(text: str, forest: Optional[ProofForest] = None) -> ReplayResult:
    """Execute a script from scratch (or continue an existing forest)."""
    lines = text.splitlines()
    policy = DEFAULT_POLICY
    # a leading policy line must be known before the forest is constructed
    for raw in lines:
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("policy "):
            policy = parse_policy(stripped[len("policy "):])
        break
    if forest is None:
        forest = ProofForest(policy)
    result = ReplayResult(forest)
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            execute_directive(forest, line, result)
        except ScriptError:
            raise
        except (ForestError, ParseError, ValueError) as exc:
            raise ScriptError(str(exc), line_no, line) from exc
        for c in result.checks:
            if c.line_no == 0:
                c.line_no = line_no
    return result


def execute_directive(forest: ProofForest, line: str, result: ReplayResult) -> None:
    """Execute one directive; expectation directives append to result.checks."""
    if line.startswith("policy "):
        wanted = parse_policy(line[len("policy "):])
        if forest.trees and wanted != forest.policy:
            raise ForestError("policy cannot change after goals were added")
        forest.policy = wanted
        return
    if line.startswith("goal "):
        head, sep, seq_text = line[len("goal "):].partition(":")
        if not sep:
            raise ValueError("goal directive needs `goal <name>: <sequent>`")
        root = forest.add_goal(parse_sequent_formulas(seq_text.strip()), head.strip())
        result.creation_labels[root] = print_sequent(forest.node(root).sequent)
        return
    if line.startswith("lemma "):
        head, sep, seq_text = line[len("lemma "):].partition(":")
        if not sep:
            raise ValueError("lemma directive needs `lemma <name>: <sequent>`")
        forest.add_lemma(head.strip(), parse_sequent_formulas(seq_text.strip()))
        return
    if line.startswith("vc-edge "):
        _, z_text, x_text = line.split()
        forest.seed_vc_edge(parse_var(z_text), parse_var(x_text))
        return
    if line.startswith("cc "):
        head, sep, f_text = line[len("cc "):].partition(":")
        if not sep:
            raise ValueError("cc directive needs `cc <var>: <formula>`")
        forest.seed_cc_entry(parse_var(head.strip()), parse_formula(f_text.strip()))
        return
    if line.startswith("subst "):
        sigma = parse_substitution(line[len("subst "):].strip())
        forest.apply_global_substitution(sigma)
        return
    if line.startswith("applylemma "):
        before, braced, after = _split_braces(line[len("applylemma "):])
        if braced is None or len(before) != 2:
            raise ValueError("applylemma needs `applylemma <node> <lemma> {..} [as ...]`")
        node_id, lemma_name = before
        labels: tuple[str, ...] = ()
        if after:
            if after[0] != "as":
                raise ValueError(f"unexpected token {after[0]!r} after lemma instantiation")
            labels = tuple(after[1:])
        ids = forest.apply_lemma(node_id, lemma_name, parse_substitution(braced), labels)
        for cid in ids:
            result.creation_labels[cid] = print_sequent(forest.node(cid).sequent)
        return
    if line.startswith("backtrack "):
        forest.backtrack(line.split()[1])
        return
    if line.startswith("expect-"):
        _run_expectation(forest, line, result)
        return

    tokens = line.split()
    if tokens and tokens[0] in _RULES:
        rule = _RULES[tokens[0]]
        if len(tokens) < 3:
            raise ValueError(f"{tokens[0]} needs `<node> <index>`")
        node_id, index = tokens[1], int(tokens[2])
        rest, labels = _take_labels(tokens[3:])
        var: Optional[Var] = None
        term = None
        names: tuple[str, ...] = ()
        i = 0
        while i < len(rest):
            if rest[i] == "var":
                var = parse_var(rest[i + 1])
                i += 2
            elif rest[i] == "term":
                term = parse_term(" ".join(rest[i + 1:]))
                i = len(rest)
            elif rest[i] == "names":
                names = tuple(rest[i + 1:])
                i = len(rest)
            else:
                raise ValueError(f"unexpected token {rest[i]!r}")
        ids = forest.apply_rule(node_id, rule, index, var=var, term=term,
                                names=names, labels=labels)
        for cid in ids:
            result.creation_labels[cid] = print_sequent(forest.node(cid).sequent)
        return
    raise ValueError(f"unknown directive {line.split()[0]!r}")


def _run_expectation(forest: ProofForest, line: str, result: ReplayResult) -> None:
    tokens = line.split()
    name, args = tokens[0], tokens[1:]
    if name == "expect-closed":
        if args:
            ok, detail = _subtree_closed(forest, args[0])
        else:
            ok = forest.is_closed()
            detail = "" if ok else "open leaves: " + ", ".join(n.id for n in forest.open_leaves())
        result.checks.append(Check(0, line, ok, detail))
    elif name == "expect-open":
        n = forest.node(args[0])
        ok = n.applied is None and not forest.leaf_closed(n)
        result.checks.append(Check(0, line, ok, "" if ok else forest.closing_reason(n)))
    elif name == "expect-axiom":
        n = forest.node(args[0])
        ok = n.applied is None and is_axiom(n.sequent)
        result.checks.append(Check(0, line, ok))
    elif name == "expect-vc-acyclic":
        accepted = not isinstance(forest.last_subst, Rejected)
        ok = accepted and is_wellfounded(forest.r)
        result.checks.append(Check(0, line, ok, "" if ok else "last substitution rejected"))
    elif name == "expect-vc-cyclic":
        rej = forest.last_subst if isinstance(forest.last_subst, Rejected) else None
        ok = rej is not None
        detail = ""
        if ok and args:
            cycle_vars = {str(v) for v in rej.cycle}
            ok = all(a in cycle_vars for a in args)
            detail = "cycle: " + str(rej) if ok else f"cycle {rej} does not cover {args}"
        elif ok:
            detail = "cycle: " + str(rej)
        result.checks.append(Check(0, line, ok, detail))
    else:
        raise ValueError(f"unknown expectation {name!r}")


def _subtree_closed(forest: ProofForest, node_id: str) -> tuple[bool, str]:
    open_ids = []
    stack = [node_id]
    while stack:
        n = forest.node(stack.pop())
        if n.applied is None:
            if not forest.leaf_closed(n):
                open_ids.append(n.id)
        else:
            stack.extend(n.children)
    return (not open_ids, "" if not open_ids else "open: " + ", ".join(sorted(open_ids)))


# ---------------------------------------------------------------------------
# Golden expectation files

def check_golden(result: ReplayResult, golden_text: str) -> list[Check]:
    """Compare creation-time labels against `node <id> :: <sequent>` lines."""
    checks = []
    for line_no, raw in enumerate(golden_text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not line.startswith("node "):
            raise ValueError(f"golden line {line_no}: unknown entry {line!r}")
        head, sep, expected = line[len("node "):].partition("::")
        if not sep:
            raise ValueError(f"golden line {line_no}: missing `::`")
        node_id = head.strip()
        actual = result.creation_labels.get(node_id)
        expected = expected.strip()
        ok = actual == expected
        detail = "" if ok else f"expected {expected!r}, got {actual!r}"
        checks.append(Check(line_no, f"golden node {node_id}", ok, detail))
    result.checks.extend(checks)
    return checks


def golden_lines(result: ReplayResult) -> list[str]:
    return [f"node {nid} :: {label}" for nid, label in sorted(result.creation_labels.items())]

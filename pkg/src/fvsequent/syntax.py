"""Terms, formulas, sequents and substitutions for the free-variable sequent calculus.

Variables come in four classes: gamma variables (x^e) are rigid placeholders
introduced by gamma steps and solved by global substitution; weak and strong
universal variables (x^w, x^s) are the parameters introduced by delta- and
delta+ steps; bound variables only ever occur under a binder for them.

Binder discipline: a binder on x is rejected if a binder on x already occurs
in its body, and every bound occurrence sits inside the scope of its binder.
Stored-negation convention: !=, !< and !<= are Not over the positive atom.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Optional, Union


class VarClass(Enum):
    GAMMA = "e"
    WEAK = "w"
    STRONG = "s"
    BOUND = "b"

    @property
    def suffix(self) -> str:
        return "" if self is VarClass.BOUND else "^" + self.value


FREE_CLASSES = frozenset({VarClass.GAMMA, VarClass.WEAK, VarClass.STRONG})
RIGID_CLASSES = frozenset({VarClass.GAMMA, VarClass.STRONG})


@dataclass(frozen=True, eq=False)
class Var:
    name: str
    cls: VarClass = VarClass.BOUND
    serial: int = 0

    def __post_init__(self):
        key = (self.name, self.cls.value, self.serial)
        object.__setattr__(self, "_key", key)
        object.__setattr__(self, "_hash", hash(key))
        object.__setattr__(self, "is_free", self.cls in FREE_CLASSES)
        object.__setattr__(self, "is_rigid", self.cls in RIGID_CLASSES)

    def __hash__(self) -> int:
        return self._hash  # type: ignore[attr-defined]

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        return (isinstance(other, Var) and self.name == other.name
                and self.cls is other.cls and self.serial == other.serial)

    def __str__(self) -> str:
        tail = str(self.serial) if self.serial else ""
        return f"{self.name}{self.cls.suffix}{tail}"

    def sort_key(self):
        return self._key  # type: ignore[attr-defined]


def gvar(name: str, serial: int = 0) -> Var:
    return Var(name, VarClass.GAMMA, serial)


def wvar(name: str, serial: int = 0) -> Var:
    return Var(name, VarClass.WEAK, serial)


def svar(name: str, serial: int = 0) -> Var:
    return Var(name, VarClass.STRONG, serial)


def bvar(name: str) -> Var:
    return Var(name, VarClass.BOUND, 0)


# ---------------------------------------------------------------------------
# Terms

PLUS, MINUS, ABS, MIN, HALF = "+", "-", "abs", "min", "half"
BUILTIN_ARITY = {PLUS: 2, MINUS: 2, ABS: 1, MIN: 2, HALF: 1}


class Term:
    __slots__ = ()


@dataclass(frozen=True)
class VarRef(Term):
    var: Var

    def __str__(self) -> str:
        return str(self.var)


@dataclass(frozen=True)
class Num(Term):
    value: Fraction

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class App(Term):
    head: Union[str, Var]
    args: tuple[Term, ...]

    def __str__(self) -> str:
        return print_term(self)


def num(value) -> Num:
    return Num(Fraction(value))


def add(a: Term, b: Term) -> Term:
    return App(PLUS, (a, b))


def sub(a: Term, b: Term) -> Term:
    return App(MINUS, (a, b))


def abs_(a: Term) -> Term:
    return App(ABS, (a,))


def min_(a: Term, b: Term) -> Term:
    return App(MIN, (a, b))


def half(a: Term) -> Term:
    return App(HALF, (a,))


# ---------------------------------------------------------------------------
# Formulas

LT, LE, EQ = "<", "<=", "="
COMPARISONS = (LT, LE, EQ)


class Formula:
    __slots__ = ()

    def __str__(self) -> str:
        return print_formula(self)  # type: ignore[arg-type]


@dataclass(frozen=True)
class Atom(Formula):
    pred: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: Var
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: Var
    body: Formula


@dataclass(frozen=True)
class TruthConst(Formula):
    value: bool


class DefinedKind(Enum):
    LIM = "lim"
    BOUNDED_FORALL = "bounded_forall"
    BOUNDED_EXISTS = "bounded_exists"
    FORALL_NEQ = "forall_neq"


@dataclass(frozen=True)
class Defined(Formula):
    """Definitional sugar kept as a first-class node so expansion is a proof step.

    LIM             var=x, terms=(z, t_x, t_prime)   lim[x->z] t_x = t_prime
    BOUNDED_FORALL  var=v, terms=(), body=A          forall v>0. A
    BOUNDED_EXISTS  var=v, terms=(), body=B          exists v>0. B
    FORALL_NEQ      var=v, terms=(z,), body=C        forall v!=z. C
    """

    kind: DefinedKind
    var: Var
    terms: tuple[Term, ...]
    body: Optional[Formula]


def lt(a: Term, b: Term) -> Formula:
    return Atom(LT, (a, b))


def le(a: Term, b: Term) -> Formula:
    return Atom(LE, (a, b))


def eq(a: Term, b: Term) -> Formula:
    return Atom(EQ, (a, b))


def neq(a: Term, b: Term) -> Formula:
    return Not(eq(a, b))


def nlt(a: Term, b: Term) -> Formula:
    return Not(lt(a, b))


def nle(a: Term, b: Term) -> Formula:
    return Not(le(a, b))


def conjugate(f: Formula) -> Formula:
    """The conjugate partner of a formula, collapsing one double negation."""
    if isinstance(f, Not):
        return f.body
    return Not(f)


# ---------------------------------------------------------------------------
# Sequents

@dataclass(frozen=True)
class SeqEntry:
    formula: Formula
    origin: int

    def __str__(self) -> str:
        return print_formula(self.formula)


@dataclass(frozen=True)
class Sequent:
    entries: tuple[SeqEntry, ...]

    @property
    def formulas(self) -> tuple[Formula, ...]:
        cached = _sequent_formulas_cache.get(id(self))
        if cached is None:
            cached = tuple(e.formula for e in self.entries)
            _sequent_formulas_cache[id(self)] = cached
            _sequent_cache_keep.append(self)
        return cached

    def __len__(self) -> int:
        return len(self.entries)

    def __str__(self) -> str:
        return print_sequent(self)


_sequent_formulas_cache: dict[int, tuple] = {}
_sequent_cache_keep: list["Sequent"] = []


class OriginCounter:
    """Mints origin ids for sequent entries; a formula keeps its origin when
    copied into child sequents, so gamma-multiplicity can be tracked per origin."""

    def __init__(self, start: int = 0):
        self.next_id = start

    def fresh(self) -> int:
        v = self.next_id
        self.next_id += 1
        return v

    def sequent(self, formulas: Iterable[Formula]) -> Sequent:
        return Sequent(tuple(SeqEntry(f, self.fresh()) for f in formulas))


# ---------------------------------------------------------------------------
# Substitutions

class SubstitutionError(ValueError):
    pass


@dataclass(frozen=True)
class Substitution:
    """Finite map from free variables to terms. Ranges are plain terms, which
    cannot contain binders, so application is capture-avoiding by construction."""

    bindings: tuple[tuple[Var, Term], ...]

    @staticmethod
    def of(mapping: Mapping[Var, Term]) -> "Substitution":
        items = tuple(sorted(mapping.items(), key=lambda kv: kv[0].sort_key()))
        for v, t in items:
            if not v.is_free:
                raise SubstitutionError(f"substitution domain must be free variables, got {v}")
            for rv in term_vars(t):
                if rv.cls is VarClass.BOUND:
                    raise SubstitutionError(f"substitution range contains bound variable {rv}")
        return Substitution(items)

    def as_dict(self) -> dict[Var, Term]:
        return dict(self.bindings)

    @property
    def domain(self) -> tuple[Var, ...]:
        return tuple(v for v, _ in self.bindings)

    def is_empty(self) -> bool:
        return not self.bindings

    def __str__(self) -> str:
        inner = ", ".join(f"{v} -> {print_term(t)}" for v, t in self.bindings)
        return "{" + inner + "}"


def term_vars(t: Term) -> Iterator[Var]:
    if isinstance(t, VarRef):
        yield t.var
    elif isinstance(t, App):
        if isinstance(t.head, Var):
            yield t.head
        for a in t.args:
            yield from term_vars(a)


def formula_vars(f: Formula) -> Iterator[Var]:
    if isinstance(f, Atom):
        for a in f.args:
            yield from term_vars(a)
    elif isinstance(f, Not):
        yield from formula_vars(f.body)
    elif isinstance(f, (And, Or, Implies)):
        yield from formula_vars(f.left)
        yield from formula_vars(f.right)
    elif isinstance(f, (Forall, Exists)):
        yield from formula_vars(f.body)
    elif isinstance(f, Defined):
        for t in f.terms:
            yield from term_vars(t)
        if f.body is not None:
            yield from formula_vars(f.body)


def free_vars(x, classes: Optional[Iterable[VarClass]] = None) -> frozenset[Var]:
    """Free-variable occurrences of the requested classes (all free classes by default)."""
    wanted = frozenset(classes) if classes is not None else FREE_CLASSES
    if isinstance(x, Term):
        it: Iterator[Var] = term_vars(x)
    elif isinstance(x, Formula):
        it = formula_vars(x)
    elif isinstance(x, Sequent):
        it = (v for e in x.entries for v in formula_vars(e.formula))
    else:
        raise TypeError(f"free_vars: unsupported {type(x).__name__}")
    return frozenset(v for v in it if v.cls in wanted)


def rigid_vars(x) -> frozenset[Var]:
    return free_vars(x, RIGID_CLASSES)


def all_vars(x) -> frozenset[Var]:
    """Every variable occurring in x, bound occurrences included."""
    if isinstance(x, Term):
        return frozenset(term_vars(x))
    if isinstance(x, Formula):
        vs = set(formula_vars(x))
        for g in iter_subformulas(x):
            if isinstance(g, (Forall, Exists)):
                vs.add(g.var)
            elif isinstance(g, Defined):
                vs.add(g.var)
        return frozenset(vs)
    if isinstance(x, Sequent):
        out: set[Var] = set()
        for e in x.entries:
            out |= all_vars(e.formula)
        return frozenset(out)
    raise TypeError(f"all_vars: unsupported {type(x).__name__}")


def iter_subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, Not):
        yield from iter_subformulas(f.body)
    elif isinstance(f, (And, Or, Implies)):
        yield from iter_subformulas(f.left)
        yield from iter_subformulas(f.right)
    elif isinstance(f, (Forall, Exists)):
        yield from iter_subformulas(f.body)
    elif isinstance(f, Defined) and f.body is not None:
        yield from iter_subformulas(f.body)


def subst_term(t: Term, mapping: Mapping[Var, Term]) -> Term:
    if isinstance(t, VarRef):
        return mapping.get(t.var, t)
    if isinstance(t, App):
        new_args = tuple(subst_term(a, mapping) for a in t.args)
        head = t.head
        if isinstance(head, Var) and head in mapping:
            image = mapping[head]
            if not (isinstance(image, VarRef) and image.var.is_free):
                raise SubstitutionError(f"function variable {head} must map to a variable")
            head = image.var
        return App(head, new_args)
    return t


def subst_formula(f: Formula, mapping: Mapping[Var, Term]) -> Formula:
    if isinstance(f, Atom):
        return Atom(f.pred, tuple(subst_term(a, mapping) for a in f.args))
    if isinstance(f, Not):
        return Not(subst_formula(f.body, mapping))
    if isinstance(f, And):
        return And(subst_formula(f.left, mapping), subst_formula(f.right, mapping))
    if isinstance(f, Or):
        return Or(subst_formula(f.left, mapping), subst_formula(f.right, mapping))
    if isinstance(f, Implies):
        return Implies(subst_formula(f.left, mapping), subst_formula(f.right, mapping))
    if isinstance(f, Forall):
        return Forall(f.var, subst_formula(f.body, mapping))
    if isinstance(f, Exists):
        return Exists(f.var, subst_formula(f.body, mapping))
    if isinstance(f, Defined):
        body = subst_formula(f.body, mapping) if f.body is not None else None
        return Defined(f.kind, f.var, tuple(subst_term(t, mapping) for t in f.terms), body)
    return f


def apply_subst(x, sigma: Substitution):
    """Apply a substitution on free variables to a term, formula or sequent."""
    mapping = sigma.as_dict()
    if not mapping:
        return x
    if isinstance(x, Term):
        return subst_term(x, mapping)
    if isinstance(x, Formula):
        return subst_formula(x, mapping)
    if isinstance(x, Sequent):
        return Sequent(tuple(SeqEntry(subst_formula(e.formula, mapping), e.origin) for e in x.entries))
    raise TypeError(f"apply_subst: unsupported {type(x).__name__}")


def instantiate(body: Formula, bound: Var, replacement: Term) -> Formula:
    """Replace all occurrences of a bound variable (binder removed) by a term."""
    return subst_formula(body, {bound: replacement})


# ---------------------------------------------------------------------------
# Binder discipline

class BinderError(ValueError):
    pass


def binders_in(f: Formula) -> set[str]:
    names: set[str] = set()
    for g in iter_subformulas(f):
        if isinstance(g, (Forall, Exists)):
            names.add(g.var.name)
        elif isinstance(g, Defined):
            names.add(g.var.name)
    return names


def check_binders(f: Formula, in_scope: frozenset[str] = frozenset()) -> None:
    """Reject rebinding and out-of-scope bound occurrences."""
    if isinstance(f, Atom):
        for t in f.args:
            _check_term_scope(t, in_scope)
    elif isinstance(f, Not):
        check_binders(f.body, in_scope)
    elif isinstance(f, (And, Or, Implies)):
        check_binders(f.left, in_scope)
        check_binders(f.right, in_scope)
    elif isinstance(f, (Forall, Exists)):
        _check_binder(f.var, f.body, in_scope)
        check_binders(f.body, in_scope | {f.var.name})
    elif isinstance(f, Defined):
        if f.kind is DefinedKind.LIM:
            _check_lim(f, in_scope)
        else:
            if f.kind is DefinedKind.FORALL_NEQ:
                _check_term_scope(f.terms[0], in_scope)
            assert f.body is not None
            _check_binder(f.var, f.body, in_scope)
            check_binders(f.body, in_scope | {f.var.name})


def _check_lim(f: Defined, in_scope: frozenset[str]) -> None:
    z, t, t2 = f.terms
    if f.var.cls is not VarClass.BOUND:
        raise BinderError(f"binder variable {f.var} must be of bound class")
    if f.var.name in in_scope:
        raise BinderError(f"rebinding of {f.var.name}")
    _check_term_scope(z, in_scope)
    _check_term_scope(t, in_scope | {f.var.name})
    _check_term_scope(t2, in_scope)


def _check_binder(v: Var, body: Formula, in_scope: frozenset[str]) -> None:
    if v.cls is not VarClass.BOUND:
        raise BinderError(f"binder variable {v} must be of bound class")
    if v.name in in_scope:
        raise BinderError(f"rebinding of {v.name}")
    if v.name in binders_in(body):
        raise BinderError(f"binder on {v.name} already occurs in the body")


def _check_term_scope(t: Term, in_scope: frozenset[str]) -> None:
    for v in term_vars(t):
        if v.cls is VarClass.BOUND and v.name not in in_scope:
            raise BinderError(f"bound variable {v.name} occurs outside its binder")


# ---------------------------------------------------------------------------
# Definitional expansion

class ExpansionError(ValueError):
    pass


DEFAULT_LIM_NAMES = ("eps", "delta")


def expand_definition(f: Formula, names: tuple[str, ...] = ()) -> Formula:
    """One-level expansion of a Defined head.

    For lim, `names` may carry up to three fresh binder names (epsilon bound,
    delta bound, rename of the lim binder); defaults are eps/delta/keep.
    """
    if not isinstance(f, Defined):
        raise ExpansionError(f"not a defined notation: {print_formula(f)}")
    if f.kind is DefinedKind.BOUNDED_FORALL:
        assert f.body is not None
        return Forall(f.var, Implies(lt(num(0), VarRef(f.var)), f.body))
    if f.kind is DefinedKind.BOUNDED_EXISTS:
        assert f.body is not None
        return Exists(f.var, And(lt(num(0), VarRef(f.var)), f.body))
    if f.kind is DefinedKind.FORALL_NEQ:
        assert f.body is not None
        return Forall(f.var, Implies(neq(VarRef(f.var), f.terms[0]), f.body))
    # lim[x->z] t = t2
    z, t, t2 = f.terms
    eps_name = names[0] if len(names) > 0 else DEFAULT_LIM_NAMES[0]
    delta_name = names[1] if len(names) > 1 else DEFAULT_LIM_NAMES[1]
    x_name = names[2] if len(names) > 2 else f.var.name
    eps, delta, x = bvar(eps_name), bvar(delta_name), bvar(x_name)
    if len({eps_name, delta_name, x_name}) != 3:
        raise ExpansionError("lim expansion binder names must be distinct")
    t_renamed = subst_term(t, {f.var: VarRef(x)}) if x != f.var else t
    kernel = Implies(lt(abs_(sub(VarRef(x), z)), VarRef(delta)),
                     lt(abs_(sub(t_renamed, t2)), VarRef(eps)))
    out = Defined(DefinedKind.BOUNDED_FORALL, eps, (),
                  Defined(DefinedKind.BOUNDED_EXISTS, delta, (),
                          Defined(DefinedKind.FORALL_NEQ, x, (z,), kernel)))
    check_binders(out)
    return out


def count_defined(f: Formula) -> int:
    return sum(1 for g in iter_subformulas(f) if isinstance(g, Defined))


# ---------------------------------------------------------------------------
# Canonical printer

_ATOMIC_TERMS = (VarRef, Num)


def print_term(t: Term) -> str:
    if isinstance(t, VarRef):
        return str(t.var)
    if isinstance(t, Num):
        return str(t.value)
    if isinstance(t, App):
        if t.head == PLUS:
            return f"({print_term(t.args[0])} + {print_term(t.args[1])})"
        if t.head == MINUS:
            return f"({print_term(t.args[0])} - {print_term(t.args[1])})"
        if t.head == ABS:
            return f"|{_strip_parens(print_term(t.args[0]))}|"
        if t.head == MIN:
            return f"min({print_term(t.args[0])}, {print_term(t.args[1])})"
        if t.head == HALF:
            return f"{print_term(t.args[0])}/2"
        if not t.args and isinstance(t.head, str):
            return t.head
        args = ", ".join(print_term(a) for a in t.args)
        return f"{t.head}({args})"
    raise TypeError(f"print_term: {t!r}")


def _strip_parens(s: str) -> str:
    # inside |...| the outer parentheses of a sum or difference are redundant
    if s.startswith("(") and s.endswith(")"):
        depth = 0
        for i, ch in enumerate(s):
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
                if depth == 0 and i != len(s) - 1:
                    return s
        return s[1:-1]
    return s


_NEGATED_COMPARISON = {LT: "!<", LE: "!<=", EQ: "!="}
_POSITIVE_COMPARISON = {LT: "<", LE: "<=", EQ: "="}

_print_cache: dict[int, str] = {}
_print_cache_keep: list[Formula] = []


def print_formula(f: Formula) -> str:
    # printing is on every hot path (state keys, orderings, reports); formulas
    # are immutable, so cache by identity and pin the keys alive
    cached = _print_cache.get(id(f))
    if cached is not None:
        return cached
    s = _print_formula(f)
    _print_cache[id(f)] = s
    _print_cache_keep.append(f)
    return s


def _print_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        if f.pred in COMPARISONS:
            return f"{print_term(f.args[0])} {_POSITIVE_COMPARISON[f.pred]} {print_term(f.args[1])}"
        if f.args:
            return f"{f.pred}({', '.join(print_term(a) for a in f.args)})"
        return f.pred
    if isinstance(f, Not):
        b = f.body
        if isinstance(b, Atom) and b.pred in COMPARISONS:
            return f"{print_term(b.args[0])} {_NEGATED_COMPARISON[b.pred]} {print_term(b.args[1])}"
        return f"~{_print_unary(b)}"
    if isinstance(f, And):
        return f"({print_formula(f.left)} & {print_formula(f.right)})"
    if isinstance(f, Or):
        return f"({print_formula(f.left)} | {print_formula(f.right)})"
    if isinstance(f, Implies):
        return f"({print_formula(f.left)} -> {print_formula(f.right)})"
    if isinstance(f, Forall):
        return f"forall {f.var.name}. {_print_body(f.body)}"
    if isinstance(f, Exists):
        return f"exists {f.var.name}. {_print_body(f.body)}"
    if isinstance(f, TruthConst):
        return "true" if f.value else "false"
    if isinstance(f, Defined):
        if f.kind is DefinedKind.BOUNDED_FORALL:
            return f"forall {f.var.name}>0. {_print_body(f.body)}"
        if f.kind is DefinedKind.BOUNDED_EXISTS:
            return f"exists {f.var.name}>0. {_print_body(f.body)}"
        if f.kind is DefinedKind.FORALL_NEQ:
            return f"forall {f.var.name}!={print_term(f.terms[0])}. {_print_body(f.body)}"
        z, t, t2 = f.terms
        return f"lim[{f.var.name}->{print_term(z)}] {print_term(t)} = {print_term(t2)}"
    raise TypeError(f"print_formula: {f!r}")


def _print_unary(f: Formula) -> str:
    # And/Or/Implies self-parenthesize; quantifiers and lim are unary
    # productions, so only negated comparisons need extra parentheses here.
    s = print_formula(f)
    if isinstance(f, Not) and isinstance(f.body, Atom) and f.body.pred in COMPARISONS:
        return f"({s})"
    return s


def _print_body(f) -> str:
    return print_formula(f)


def print_sequent(s: Sequent) -> str:
    return ", ".join(print_formula(e.formula) for e in s.entries)


# ---------------------------------------------------------------------------
# Parser

class ParseError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


_PUNCT = ["!<=", "!<", "!=", "<=", "->", "<-", "(", ")", "[", "]", "{", "}",
          ",", ".", "<", "=", ">", "&", "|", "~", "+", "-", "/", ":"]
_KEYWORDS = {"forall", "exists", "lim", "true", "false"}
_CMP_OPS = ("<", "<=", "=", "!=", "!<", "!<=")


@dataclass(frozen=True)
class _Token:
    kind: str  # ident, var, number, punct, keyword, end
    text: str
    pos: int
    var: Optional[Var] = None


def _tokenize(text: str) -> list[_Token]:
    toks: list[_Token] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch == "#":
            break
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(_Token("number", text[i:j], i))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            name = text[i:j]
            if j < n and text[j] == "^" and j + 1 < n and text[j + 1] in "ews":
                cls = VarClass(text[j + 1])
                j += 2
                k = j
                while k < n and text[k].isdigit():
                    k += 1
                serial = int(text[j:k]) if k > j else 0
                toks.append(_Token("var", text[i:k], i, Var(name, cls, serial)))
                i = k
                continue
            kind = "keyword" if name in _KEYWORDS else "ident"
            toks.append(_Token(kind, name, i))
            i = j
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                toks.append(_Token("punct", p, i))
                i += len(p)
                break
        else:
            raise ParseError(f"unexpected character {ch!r}", i)
    toks.append(_Token("end", "", n))
    return toks


class Parser:
    """Recursive-descent parser for the documented formula grammar.

    Binary connectives must be explicitly parenthesized (no precedence,
    no chains), binders take the tightest following formula, and `|` is an
    absolute-value delimiter in term position but disjunction after a formula.
    """

    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.scope: list[str] = []
        self.arities: dict[str, int] = {}

    # -- token helpers

    def peek(self) -> _Token:
        return self.toks[self.i]

    def next(self) -> _Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        t = self.peek()
        return t.kind == "punct" and t.text == text

    def expect(self, text: str) -> _Token:
        t = self.next()
        if t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text!r}", t.pos)
        return t

    def done(self) -> bool:
        return self.peek().kind == "end"

    # -- entry points

    def parse_formula(self) -> Formula:
        f = self.formula()
        if not self.done():
            t = self.peek()
            raise ParseError(f"trailing input {t.text!r}", t.pos)
        return f

    def parse_sequent(self) -> list[Formula]:
        out = [self.formula()]
        while self.at(","):
            self.next()
            out.append(self.formula())
        if not self.done():
            t = self.peek()
            raise ParseError(f"trailing input {t.text!r}", t.pos)
        return out

    def parse_term_only(self) -> Term:
        t = self.term()
        if not self.done():
            tok = self.peek()
            raise ParseError(f"trailing input {tok.text!r}", tok.pos)
        return t

    # -- formulas

    def formula(self) -> Formula:
        left = self.unary()
        t = self.peek()
        if t.kind == "punct" and t.text in ("&", "|", "->", "<-"):
            self.next()
            right = self.unary()
            if t.text == "&":
                return And(left, right)
            if t.text == "|":
                return Or(left, right)
            if t.text == "->":
                return Implies(left, right)
            return Implies(right, left)
        return left

    def unary(self) -> Formula:
        t = self.peek()
        if t.kind == "punct" and t.text == "~":
            self.next()
            return Not(self.unary())
        if t.kind == "punct" and t.text == "(":
            # `(` may open a parenthesized formula or a parenthesized term
            # that starts a comparison; try the comparison reading first
            mark = self.i
            try:
                left = self.term()
                nxt = self.peek()
                if nxt.kind == "punct" and nxt.text in _CMP_OPS:
                    return self.comparison(left)
            except ParseError:
                pass
            self.i = mark
            self.next()
            f = self.formula()
            self.expect(")")
            return f
        if t.kind == "keyword" and t.text in ("forall", "exists"):
            return self.quantified()
        if t.kind == "keyword" and t.text == "lim":
            return self.lim_formula()
        if t.kind == "keyword" and t.text in ("true", "false"):
            self.next()
            return TruthConst(t.text == "true")
        return self.atom()

    def quantified(self) -> Formula:
        kw = self.next().text
        vt = self.next()
        if vt.kind != "ident":
            raise ParseError("expected a bound variable name", vt.pos)
        v = bvar(vt.text)
        if vt.text in self.scope:
            raise ParseError(f"rebinding of {vt.text}", vt.pos)
        sugar = None
        guard_term = None
        if self.at(">"):
            self.next()
            zt = self.next()
            if zt.text != "0":
                raise ParseError("only >0 bounds are supported", zt.pos)
            sugar = "pos"
        elif self.at("!="):
            self.next()
            guard_term = self.term()
            sugar = "neq"
        self.expect(".")
        self.scope.append(vt.text)
        body = self.unary()
        self.scope.pop()
        if v.name in binders_in(body):
            raise ParseError(f"binder on {v.name} already occurs in the body", vt.pos)
        if sugar == "pos":
            kind = DefinedKind.BOUNDED_FORALL if kw == "forall" else DefinedKind.BOUNDED_EXISTS
            return Defined(kind, v, (), body)
        if sugar == "neq":
            if kw != "forall":
                raise ParseError("!= bounds are only supported on forall", vt.pos)
            assert guard_term is not None
            return Defined(DefinedKind.FORALL_NEQ, v, (guard_term,), body)
        return Forall(v, body) if kw == "forall" else Exists(v, body)

    def lim_formula(self) -> Formula:
        self.next()  # lim
        self.expect("[")
        vt = self.next()
        if vt.kind != "ident":
            raise ParseError("expected lim binder name", vt.pos)
        if vt.text in self.scope:
            raise ParseError(f"rebinding of {vt.text}", vt.pos)
        v = bvar(vt.text)
        self.expect("->")
        z = self.term()
        self.expect("]")
        self.scope.append(vt.text)
        t = self.term()
        self.scope.pop()
        self.expect("=")
        t2 = self.term()
        return Defined(DefinedKind.LIM, v, (z, t, t2), None)

    def atom(self) -> Formula:
        start = self.peek()
        left = self.term()
        t = self.peek()
        if t.kind == "punct" and t.text in _CMP_OPS:
            return self.comparison(left)
        if isinstance(left, App) and isinstance(left.head, str) and left.head not in BUILTIN_ARITY:
            return Atom(left.head, left.args)
        raise ParseError("expected a comparison or predicate", start.pos)

    def comparison(self, left: Term) -> Formula:
        op = self.next().text
        right = self.term()
        if op == "<":
            return lt(left, right)
        if op == "<=":
            return le(left, right)
        if op == "=":
            return eq(left, right)
        if op == "!=":
            return neq(left, right)
        if op == "!<":
            return nlt(left, right)
        return nle(left, right)

    # -- terms

    def term(self) -> Term:
        left = self.term_unary()
        while True:
            t = self.peek()
            if t.kind == "punct" and t.text in ("+", "-"):
                self.next()
                right = self.term_unary()
                left = App(PLUS if t.text == "+" else MINUS, (left, right))
            else:
                return left

    def term_unary(self) -> Term:
        t = self.term_atom()
        while self.at("/"):
            self.next()
            d = self.next()
            if d.text != "2":
                raise ParseError("only /2 is a built-in operator", d.pos)
            t = App(HALF, (t,))
        return t

    def term_atom(self) -> Term:
        t = self.peek()
        if t.kind == "punct" and t.text == "(":
            self.next()
            inner = self.term()
            self.expect(")")
            return inner
        if t.kind == "punct" and t.text == "|":
            self.next()
            inner = self.term()
            self.expect("|")
            return App(ABS, (inner,))
        if t.kind == "number":
            self.next()
            return Num(Fraction(int(t.text)))
        if t.kind == "var":
            self.next()
            assert t.var is not None
            if self.at("("):
                args = self.call_args()
                self._check_arity(str(t.var), len(args), t.pos)
                return App(t.var, tuple(args))
            return VarRef(t.var)
        if t.kind == "ident":
            self.next()
            if t.text == "min":
                args = self.call_args()
                if len(args) != 2:
                    raise ParseError("min takes two arguments", t.pos)
                return App(MIN, tuple(args))
            if self.at("("):
                args = self.call_args()
                self._check_arity(t.text, len(args), t.pos)
                return App(t.text, tuple(args))
            if t.text in self.scope:
                return VarRef(bvar(t.text))
            if t.text[0].isupper():
                # uppercase bare identifiers are uninterpreted constants
                # (or nullary predicates, decided by position)
                self._check_arity(t.text, 0, t.pos)
                return App(t.text, ())
            raise ParseError(f"bound variable {t.text} occurs outside its binder", t.pos)
        raise ParseError(f"expected a term, found {t.text!r}", t.pos)

    def call_args(self) -> list[Term]:
        self.expect("(")
        args = [self.term()]
        while self.at(","):
            self.next()
            args.append(self.term())
        self.expect(")")
        return args

    def _check_arity(self, name: str, arity: int, pos: int) -> None:
        seen = self.arities.setdefault(name, arity)
        if seen != arity:
            raise ParseError(f"{name} used with arity {arity}, declared {seen}", pos)


def parse_formula(text: str) -> Formula:
    f = Parser(text).parse_formula()
    check_binders(f)
    return f


def parse_sequent_formulas(text: str) -> list[Formula]:
    fs = Parser(text).parse_sequent()
    for f in fs:
        check_binders(f)
    return fs


def parse_term(text: str) -> Term:
    return Parser(text).parse_term_only()


def parse_var(text: str) -> Var:
    toks = _tokenize(text)
    if len(toks) == 2 and toks[0].kind == "var":
        assert toks[0].var is not None
        return toks[0].var
    raise ParseError(f"expected a decorated variable, got {text!r}", 0)


def parse_substitution(text: str) -> Substitution:
    """Parse `{x^e -> t, ...}` into a substitution."""
    text = text.strip()
    if not (text.startswith("{") and text.endswith("}")):
        raise ParseError("substitution must be enclosed in braces", 0)
    inner = text[1:-1].strip()
    mapping: dict[Var, Term] = {}
    if inner:
        for part in _split_top(inner):
            if "->" not in part:
                raise ParseError(f"missing -> in binding {part!r}", 0)
            lhs, rhs = part.split("->", 1)
            v = parse_var(lhs.strip())
            t = parse_term(rhs.strip())
            if v in mapping:
                raise ParseError(f"duplicate binding for {v}", 0)
            mapping[v] = t
    return Substitution.of(mapping)


def _split_top(text: str) -> list[str]:
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append(text[start:i])
            start = i + 1
    parts.append(text[start:])
    return [p.strip() for p in parts if p.strip()]


# ---------------------------------------------------------------------------
# Alpha normalization (used by the delta++ memo)

def alpha_normalize(f: Formula) -> Formula:
    """Rename bound variables to a canonical b1, b2, ... numbering."""
    counter = [0]

    def fresh() -> Var:
        counter[0] += 1
        return bvar(f"b{counter[0]}")

    def go(g: Formula, env: dict[Var, Term]) -> Formula:
        if isinstance(g, Atom):
            return Atom(g.pred, tuple(subst_term(a, env) for a in g.args))
        if isinstance(g, Not):
            return Not(go(g.body, env))
        if isinstance(g, And):
            return And(go(g.left, env), go(g.right, env))
        if isinstance(g, Or):
            return Or(go(g.left, env), go(g.right, env))
        if isinstance(g, Implies):
            return Implies(go(g.left, env), go(g.right, env))
        if isinstance(g, (Forall, Exists)):
            v = fresh()
            env2 = dict(env)
            env2[g.var] = VarRef(v)
            body = go(g.body, env2)
            return Forall(v, body) if isinstance(g, Forall) else Exists(v, body)
        if isinstance(g, Defined):
            v = fresh()
            env2 = dict(env)
            env2[g.var] = VarRef(v)
            if g.kind is DefinedKind.LIM:
                z, t, t2 = g.terms
                return Defined(g.kind, v, (subst_term(z, env), subst_term(t, env2), subst_term(t2, env)), None)
            assert g.body is not None
            terms = tuple(subst_term(t, env) for t in g.terms)
            return Defined(g.kind, v, terms, go(g.body, env2))
        return g

    return go(f, {})

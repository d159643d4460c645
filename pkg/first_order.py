# first_order.py
"""
First-order sentences with unary and binary atoms: the AST, the DSL shared
by postulates and FO/MSO sentences, the min macros, and a compiled
evaluator over finite interpretations.

DSL summary::

    forall x. <body>      exists x. <body>      (bodies extend as far right as possible)
    K(x)  p1(x)  A1(x)  L2(x)  Kstar[p1 & !p2](x)  E(x, y)
    x <= y   x < y   x = y   x != y   min(x)   min[A1 & A2](x)
    !  &  |  ->  <->  true  false  ( )
"""

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, FrozenSet, Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from lark import Lark, Transformer
from lark.exceptions import UnexpectedInput, VisitError

from errors import FormulaSyntaxError, PostulateError, SignatureMismatchError, WorkbenchError
from logic_core import And, Const, Formula, Iff, Implies, Not, Or, Var, render

ORDER = "<="


# --- AST ---

@dataclass(frozen=True)
class Truth:
    value: bool


@dataclass(frozen=True)
class Pred:
    """Unary atom name(var)."""
    name: str
    var: str


@dataclass(frozen=True)
class Rel:
    """Binary atom; name is "<=" for the order."""
    name: str
    left: str
    right: str


@dataclass(frozen=True)
class Eq:
    left: str
    right: str


@dataclass(frozen=True)
class Star:
    """(K * mu)(var) with mu a propositional combination, Var(i) standing for p_i."""
    mu: Formula
    var: str


@dataclass(frozen=True)
class Neg:
    arg: "Sentence"


@dataclass(frozen=True)
class Conj:
    left: "Sentence"
    right: "Sentence"


@dataclass(frozen=True)
class Disj:
    left: "Sentence"
    right: "Sentence"


@dataclass(frozen=True)
class Cond:
    left: "Sentence"
    right: "Sentence"


@dataclass(frozen=True)
class Bicond:
    left: "Sentence"
    right: "Sentence"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Sentence"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Sentence"


Sentence = Union[Truth, Pred, Rel, Eq, Star, Neg, Conj, Disj, Cond, Bicond, Forall, Exists]

TRUE = Truth(True)
FALSE = Truth(False)

_ATOMS = (Truth, Pred, Rel, Eq, Star)
_BINARY = (Conj, Disj, Cond, Bicond)
_QUANTIFIERS = (Forall, Exists)


def free_variables(f: Sentence) -> FrozenSet[str]:
    if isinstance(f, Truth):
        return frozenset()
    if isinstance(f, (Pred, Star)):
        return frozenset({f.var})
    if isinstance(f, (Rel, Eq)):
        return frozenset({f.left, f.right})
    if isinstance(f, Neg):
        return free_variables(f.arg)
    if isinstance(f, _QUANTIFIERS):
        return free_variables(f.body) - {f.var}
    return free_variables(f.left) | free_variables(f.right)


def variables(f: Sentence) -> FrozenSet[str]:
    """Every variable name occurring in f, free or bound."""
    if isinstance(f, _QUANTIFIERS):
        return variables(f.body) | {f.var}
    if isinstance(f, Neg):
        return variables(f.arg)
    if isinstance(f, _BINARY):
        return variables(f.left) | variables(f.right)
    return free_variables(f)


def quantifier_rank(f: Sentence) -> int:
    if isinstance(f, _QUANTIFIERS):
        return 1 + quantifier_rank(f.body)
    if isinstance(f, Neg):
        return quantifier_rank(f.arg)
    if isinstance(f, _BINARY):
        return max(quantifier_rank(f.left), quantifier_rank(f.right))
    return 0


def fresh_variable(used: Iterable[str]) -> str:
    """First of y, z, w, u, v, y1, y2, ... not in used."""
    used = set(used)
    for name in ("y", "z", "w", "u", "v"):
        if name not in used:
            return name
    i = 1
    while f"y{i}" in used:
        i += 1
    return f"y{i}"


def substitute(f: Sentence, old: str, new: str) -> Sentence:
    """Replace free occurrences of old by new, renaming binders that would capture new."""
    if old == new:
        return f
    swap = lambda v: new if v == old else v
    if isinstance(f, Truth):
        return f
    if isinstance(f, Pred):
        return Pred(f.name, swap(f.var))
    if isinstance(f, Star):
        return Star(f.mu, swap(f.var))
    if isinstance(f, Rel):
        return Rel(f.name, swap(f.left), swap(f.right))
    if isinstance(f, Eq):
        return Eq(swap(f.left), swap(f.right))
    if isinstance(f, Neg):
        return Neg(substitute(f.arg, old, new))
    if isinstance(f, _QUANTIFIERS):
        if f.var == old:
            return f
        if f.var == new and old in free_variables(f.body):
            renamed = fresh_variable(variables(f.body) | {old, new})
            body = substitute(f.body, f.var, renamed)
            return type(f)(renamed, substitute(body, old, new))
        return type(f)(f.var, substitute(f.body, old, new))
    return type(f)(substitute(f.left, old, new), substitute(f.right, old, new))


# --- Macros ---

def strictly_less(u: str, v: str) -> Sentence:
    """u < v, expanded to u <= v & !(v <= u)."""
    return Conj(Rel(ORDER, u, v), Neg(Rel(ORDER, v, u)))


def min_macro(nu: Optional[Sentence], x: str) -> Sentence:
    """Minimality of x, within nu when given.

    min(x)      = forall y. !(y < x)
    min[nu](x)  = nu(x) & forall y. nu(y) -> !(y < x)

    nu may have one free variable (its argument) or none (a constant
    condition such as true). y is the first fresh name not used in nu.
    """
    if nu is None:
        y = fresh_variable({x})
        return Forall(y, Neg(strictly_less(y, x)))
    free = free_variables(nu)
    if len(free) > 1:
        raise PostulateError(
            f"min[...] needs a formula with one free variable, got {sorted(free)}"
        )
    z = next(iter(free), x)
    y = fresh_variable(variables(nu) | {x})
    return Conj(
        substitute(nu, z, x),
        Forall(y, Cond(substitute(nu, z, y), Neg(strictly_less(y, x)))),
    )


# --- Rendering ---

_SYMBOLS = {Conj: "&", Disj: "|", Cond: "->", Bicond: "<->"}
_PRECEDENCE = {Bicond: 1, Cond: 2, Disj: 3, Conj: 4, Neg: 5}


def render_sentence(f: Sentence) -> str:
    """DSL text for f; parse_sentence(render_sentence(f)) == f."""

    def go(node, context: int) -> str:
        if isinstance(node, Truth):
            return "true" if node.value else "false"
        if isinstance(node, Pred):
            return f"{node.name}({node.var})"
        if isinstance(node, Star):
            return f"Kstar[{render(node.mu, atom=lambda i: f'p{i}')}]({node.var})"
        if isinstance(node, Rel):
            if node.name == ORDER:
                return f"{node.left} <= {node.right}"
            return f"{node.name}({node.left}, {node.right})"
        if isinstance(node, Eq):
            return f"{node.left} = {node.right}"
        if isinstance(node, _QUANTIFIERS):
            word = "forall" if isinstance(node, Forall) else "exists"
            text = f"{word} {node.var}. {go(node.body, 0)}"
            return f"({text})" if context > 0 else text
        prec = _PRECEDENCE[type(node)]
        if isinstance(node, Neg):
            inner = go(node.arg, prec)
            if isinstance(node.arg, Eq) or (isinstance(node.arg, Rel) and node.arg.name == ORDER):
                inner = f"({inner})"
            text = "!" + inner
        else:
            kind = type(node)
            left_ctx, right_ctx = (prec + 1, prec) if kind is Cond else (prec, prec + 1)
            text = f"{go(node.left, left_ctx)} {_SYMBOLS[kind]} {go(node.right, right_ctx)}"
        return f"({text})" if prec < context else text

    return go(f, 0)


# --- Parsing ---

_SENTENCE_GRAMMAR = r"""
    ?start: iff
    ?iff: imp
        | iff "<->" imp                            -> bicond_
    ?imp: disj
        | disj "->" imp                            -> cond_
    ?disj: conj
         | disj "|" conj                           -> disj_
    ?conj: unary
         | conj "&" unary                          -> conj_
    ?unary: "!" unary                              -> neg_
          | quantified
          | atom
    quantified: "forall" VARNAME "." iff           -> forall_
              | "exists" VARNAME "." iff           -> exists_
    ?atom: PRED "(" VARNAME ")"                    -> unary_atom
         | PHI "(" VARNAME ")"                     -> unary_atom
         | PRED "(" VARNAME "," VARNAME ")"        -> binary_atom
         | "Kstar" "[" sexpr "]" "(" VARNAME ")"   -> star_atom
         | "min" "(" VARNAME ")"                   -> min_atom
         | "min" "[" sexpr "]" "(" VARNAME ")"     -> min_within_atom
         | VARNAME "<=" VARNAME                    -> leq_atom
         | VARNAME "<" VARNAME                     -> lt_atom
         | VARNAME "=" VARNAME                     -> eq_atom
         | VARNAME "!=" VARNAME                    -> neq_atom
         | "true"                                  -> true_
         | "false"                                 -> false_
         | "(" iff ")"

    ?sexpr: sconj
          | sexpr "|" sconj                        -> s_or
    ?sconj: sunary
          | sconj "&" sunary                       -> s_and
    ?sunary: "!" sunary                            -> s_not
           | PHI                                   -> s_name
           | PRED                                  -> s_name
           | "true"                                -> s_true
           | "false"                               -> s_false
           | "Kstar" "[" sexpr "]"                 -> s_nested_star
           | "(" sexpr ")"

    PHI.2: /p[1-9](?![A-Za-z0-9_])/
    VARNAME: /[a-z][a-z0-9_]*/
    PRED: /[A-Z][A-Za-z0-9]*/

    %import common.WS
    %ignore WS
"""

# Quantifier bodies are greedy: shift/reduce conflicts resolve as shift.
_SENTENCE_PARSER = Lark(_SENTENCE_GRAMMAR, parser="lalr")


def _phi_index(name: str) -> int:
    return int(name[1:])


class _SentenceBuilder(Transformer):
    """Builds Sentence nodes; bracketed set expressions stay as nested tuples."""

    def unary_atom(self, children):
        name, var = children
        return Pred(str(name), str(var))

    def binary_atom(self, children):
        name, left, right = children
        return Rel(str(name), str(left), str(right))

    def star_atom(self, children):
        expr, var = children
        return Star(_set_expr_to_mu(expr), str(var))

    def min_atom(self, children):
        return min_macro(None, str(children[0]))

    def min_within_atom(self, children):
        expr, var = children
        return min_macro(_set_expr_to_sentence(expr, str(var)), str(var))

    def leq_atom(self, children):
        return Rel(ORDER, str(children[0]), str(children[1]))

    def lt_atom(self, children):
        return strictly_less(str(children[0]), str(children[1]))

    def eq_atom(self, children):
        return Eq(str(children[0]), str(children[1]))

    def neq_atom(self, children):
        return Neg(Eq(str(children[0]), str(children[1])))

    def true_(self, _):
        return TRUE

    def false_(self, _):
        return FALSE

    def neg_(self, children):
        return Neg(children[0])

    def conj_(self, children):
        return Conj(*children)

    def disj_(self, children):
        return Disj(*children)

    def cond_(self, children):
        return Cond(*children)

    def bicond_(self, children):
        return Bicond(*children)

    def forall_(self, children):
        var, body = children
        return Forall(str(var), body)

    def exists_(self, children):
        var, body = children
        return Exists(str(var), body)

    def s_or(self, children):
        return ("or", children[0], children[1])

    def s_and(self, children):
        return ("and", children[0], children[1])

    def s_not(self, children):
        return ("not", children[0])

    def s_name(self, children):
        return ("name", str(children[0]))

    def s_true(self, _):
        return ("const", True)

    def s_false(self, _):
        return ("const", False)

    def s_nested_star(self, _):
        raise PostulateError(
            "A starred argument must be a Boolean combination of p1..p9; it cannot contain Kstar"
        )


def _set_expr_to_mu(expr) -> Formula:
    kind = expr[0]
    if kind == "name":
        name = expr[1]
        if not (len(name) == 2 and name[0] == "p" and name[1].isdigit()):
            raise PostulateError(
                f"A starred argument must be a Boolean combination of p1..p9; found {name}"
            )
        return Var(_phi_index(name))
    if kind == "const":
        return Const(expr[1])
    if kind == "not":
        return Not(_set_expr_to_mu(expr[1]))
    build = And if kind == "and" else Or
    return build(_set_expr_to_mu(expr[1]), _set_expr_to_mu(expr[2]))


def _set_expr_to_sentence(expr, var: str) -> Sentence:
    kind = expr[0]
    if kind == "name":
        return Pred(expr[1], var)
    if kind == "const":
        return Truth(expr[1])
    if kind == "not":
        return Neg(_set_expr_to_sentence(expr[1], var))
    build = Conj if kind == "and" else Disj
    return build(_set_expr_to_sentence(expr[1], var), _set_expr_to_sentence(expr[2], var))


def parse_sentence(text: str) -> Sentence:
    """Parse first-order DSL text (free variables are allowed here)."""
    try:
        tree = _SENTENCE_PARSER.parse(text)
    except UnexpectedInput as e:
        raise FormulaSyntaxError(
            f"Syntax error in sentence {text!r}", getattr(e, "pos_in_stream", None)
        ) from e
    try:
        return _SentenceBuilder().transform(tree)
    except VisitError as e:
        raise e.orig_exc from e


def mu_to_sentence(mu: Formula, var: str, prefix: str = "A") -> Sentence:
    """The FO formula in var for a propositional combination, Var(i) becoming <prefix>i(var)."""
    if isinstance(mu, Var):
        return Pred(f"{prefix}{mu.index}", var)
    if isinstance(mu, Const):
        return Truth(mu.value)
    if isinstance(mu, Not):
        return Neg(mu_to_sentence(mu.arg, var, prefix))
    kinds = {And: Conj, Or: Disj, Implies: Cond, Iff: Bicond}
    return kinds[type(mu)](mu_to_sentence(mu.left, var, prefix), mu_to_sentence(mu.right, var, prefix))


# --- Evaluation ---

@dataclass
class Interpretation:
    """A finite interpretation over elements 0..size-1.

    unary[name] and stars[mu] are bitmasks over elements; binary[name][a]
    has bit b set iff name(a, b).
    """
    size: int
    unary: Dict[str, int] = field(default_factory=dict)
    binary: Dict[str, Sequence[int]] = field(default_factory=dict)
    stars: Dict[Formula, int] = field(default_factory=dict)


def rows_of(matrix) -> Tuple[int, ...]:
    """Row bitmasks of a square boolean matrix."""
    matrix = np.asarray(matrix, dtype=bool)
    return tuple(sum(1 << int(b) for b in np.flatnonzero(row)) for row in matrix)


def mask_of(elements: Iterable[int]) -> int:
    mask = 0
    for a in elements:
        mask |= 1 << int(a)
    return mask


def symbols(f: Sentence) -> Tuple[FrozenSet[str], FrozenSet[str], FrozenSet[Formula]]:
    """(unary names, binary names, starred arguments) used in f."""
    unary, binary, stars = set(), set(), set()

    def go(node):
        if isinstance(node, Pred):
            unary.add(node.name)
        elif isinstance(node, Rel):
            binary.add(node.name)
        elif isinstance(node, Star):
            stars.add(node.mu)
        elif isinstance(node, Neg):
            go(node.arg)
        elif isinstance(node, _QUANTIFIERS):
            go(node.body)
        elif isinstance(node, _BINARY):
            go(node.left)
            go(node.right)

    go(f)
    return frozenset(unary), frozenset(binary), frozenset(stars)


Compiled = Callable[[Interpretation, Dict[str, int]], bool]


@lru_cache(maxsize=4096)
def compile_sentence(f: Sentence) -> Compiled:
    """A closure evaluating f under an interpretation and a variable environment."""
    if isinstance(f, Truth):
        value = f.value
        return lambda I, env: value
    if isinstance(f, Pred):
        name, var = f.name, f.var
        return lambda I, env: bool((I.unary[name] >> env[var]) & 1)
    if isinstance(f, Star):
        mu, var = f.mu, f.var
        return lambda I, env: bool((I.stars[mu] >> env[var]) & 1)
    if isinstance(f, Rel):
        name, left, right = f.name, f.left, f.right
        return lambda I, env: bool((I.binary[name][env[left]] >> env[right]) & 1)
    if isinstance(f, Eq):
        left, right = f.left, f.right
        return lambda I, env: env[left] == env[right]
    if isinstance(f, Neg):
        arg = compile_sentence(f.arg)
        return lambda I, env: not arg(I, env)
    if isinstance(f, Forall):
        body, var = compile_sentence(f.body), f.var
        return lambda I, env: all(body(I, {**env, var: a}) for a in range(I.size))
    if isinstance(f, Exists):
        body, var = compile_sentence(f.body), f.var
        return lambda I, env: any(body(I, {**env, var: a}) for a in range(I.size))
    left, right = compile_sentence(f.left), compile_sentence(f.right)
    if isinstance(f, Conj):
        return lambda I, env: left(I, env) and right(I, env)
    if isinstance(f, Disj):
        return lambda I, env: left(I, env) or right(I, env)
    if isinstance(f, Cond):
        return lambda I, env: (not left(I, env)) or right(I, env)
    return lambda I, env: left(I, env) == right(I, env)


def check_signature(f: Sentence, I: Interpretation) -> None:
    unary, binary, stars = symbols(f)
    missing = sorted(unary - I.unary.keys()) + sorted(binary - I.binary.keys())
    if missing:
        raise SignatureMismatchError(f"Symbols not interpreted by the structure: {missing}")
    if stars - I.stars.keys():
        raise SignatureMismatchError("Starred atoms are not interpreted by the structure")


def holds(f: Sentence, I: Interpretation, env: Optional[Dict[str, int]] = None) -> bool:
    """Standard first-order satisfaction of f in I under env."""
    env = dict(env or {})
    unbound = free_variables(f) - env.keys()
    if unbound:
        raise WorkbenchError(f"Free variables without values: {sorted(unbound)}")
    for var, a in env.items():
        if not 0 <= a < I.size:
            raise WorkbenchError(f"Variable {var} is bound to {a}, outside 0..{I.size - 1}")
    check_signature(f, I)
    return compile_sentence(f)(I, env)

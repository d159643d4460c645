# logic_core.py
"""
Propositional layer: formulas over x1..xn, truth assignments and model sets.

Assignments are integers in [0, 2^n); bit i-1 holds the value of x_i
(x1 is the least significant bit). A model set is a bit vector over the
2^n assignments, stored as a Python int (bit u set iff assignment u is a
member).
"""

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Iterator, List, Sequence, Union

import numpy as np
from lark import Lark, Transformer
from lark.exceptions import UnexpectedInput, VisitError

from config import MAX_VARIABLES
from errors import FormulaSyntaxError, VariableRangeError, WorkbenchError


def _check_n(n: int) -> None:
    if not 1 <= n <= MAX_VARIABLES:
        raise WorkbenchError(f"Variable count must be in 1..{MAX_VARIABLES}, got {n}")


@dataclass(frozen=True)
class Assignment:
    n: int
    bits: int

    def __post_init__(self):
        _check_n(self.n)
        if not 0 <= self.bits < (1 << self.n):
            raise WorkbenchError(f"Assignment {self.bits} out of range for n={self.n}")

    def value(self, i: int) -> bool:
        """Truth value of variable x_i."""
        if not 1 <= i <= self.n:
            raise VariableRangeError(f"x{i} is not a variable over n={self.n}")
        return bool((self.bits >> (i - 1)) & 1)

    def __str__(self):
        return ",".join(f"x{i}={int(self.value(i))}" for i in range(1, self.n + 1))


# --- Formula AST ---

@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Iff:
    left: "Formula"
    right: "Formula"


Formula = Union[Var, Const, Not, And, Or, Implies, Iff]

TOP = Const(True)
BOTTOM = Const(False)

_BINARY_SYMBOLS = {And: "&", Or: "|", Implies: "->", Iff: "<->"}
_PRECEDENCE = {Iff: 1, Implies: 2, Or: 3, And: 4, Not: 5, Var: 6, Const: 6}


def variables_of(phi: Formula) -> frozenset:
    """Indices of the variables occurring in phi."""
    if isinstance(phi, Var):
        return frozenset({phi.index})
    if isinstance(phi, Const):
        return frozenset()
    if isinstance(phi, Not):
        return variables_of(phi.arg)
    return variables_of(phi.left) | variables_of(phi.right)


def render(phi: Formula, atom=None) -> str:
    """Render phi in DSL syntax with minimal parentheses.

    `atom` maps a variable index to its text (default ``x<i>``).
    """
    name = atom or (lambda i: f"x{i}")

    def go(node, context: int) -> str:
        kind = type(node)
        prec = _PRECEDENCE[kind]
        if isinstance(node, Var):
            text = name(node.index)
        elif isinstance(node, Const):
            text = "true" if node.value else "false"
        elif isinstance(node, Not):
            text = "!" + go(node.arg, prec)
        else:
            # & | <-> associate to the left, -> to the right
            left_ctx, right_ctx = (prec + 1, prec) if kind is Implies else (prec, prec + 1)
            text = f"{go(node.left, left_ctx)} {_BINARY_SYMBOLS[kind]} {go(node.right, right_ctx)}"
        return f"({text})" if prec < context else text

    return go(phi, 0)


# --- Parsing ---

_FORMULA_GRAMMAR = r"""
    ?start: iff
    ?iff: imp
        | iff "<->" imp        -> iff_
    ?imp: disj
        | disj "->" imp        -> implies
    ?disj: conj
         | disj "|" conj       -> or_
    ?conj: unary
         | conj "&" unary      -> and_
    ?unary: "!" unary          -> not_
          | atom
    ?atom: VAR                 -> var
         | "true"              -> true
         | "false"             -> false
         | "(" iff ")"

    VAR: /x[0-9]+/

    %import common.WS
    %ignore WS
"""

_FORMULA_PARSER = Lark(_FORMULA_GRAMMAR, parser="lalr")


class _FormulaBuilder(Transformer):
    def __init__(self, n: int):
        super().__init__()
        self.n = n

    def var(self, children):
        (token,) = children
        index = int(token[1:])
        if not 1 <= index <= self.n:
            raise VariableRangeError(
                f"Variable {token} out of range: only x1..x{self.n} exist "
                f"(at position {token.start_pos})"
            )
        return Var(index)

    def true(self, _):
        return TOP

    def false(self, _):
        return BOTTOM

    def not_(self, children):
        return Not(children[0])

    def and_(self, children):
        return And(*children)

    def or_(self, children):
        return Or(*children)

    def implies(self, children):
        return Implies(*children)

    def iff_(self, children):
        return Iff(*children)


def parse_formula(text: str, n: int) -> Formula:
    """
    Parse formula-DSL text over variables x1..xn.

    Args:
        text: Formula text such as "x1 & !(x2 | x3)"
        n: Number of variables

    Returns:
        The formula AST

    Raises:
        FormulaSyntaxError: On malformed text, with the error position when known
        VariableRangeError: When a variable index exceeds n
    """
    _check_n(n)
    try:
        tree = _FORMULA_PARSER.parse(text)
    except UnexpectedInput as e:
        raise FormulaSyntaxError(
            f"Syntax error in formula {text!r}", getattr(e, "pos_in_stream", None)
        ) from e
    try:
        return _FormulaBuilder(n).transform(tree)
    except VisitError as e:
        raise e.orig_exc from e


# --- Model sets ---

@dataclass(frozen=True)
class ModelSet:
    n: int
    mask: int

    def __post_init__(self):
        _check_n(self.n)
        if not 0 <= self.mask < (1 << (1 << self.n)):
            raise WorkbenchError(f"Model set mask out of range for n={self.n}")

    @classmethod
    def empty(cls, n: int) -> "ModelSet":
        return cls(n, 0)

    @classmethod
    def full(cls, n: int) -> "ModelSet":
        return cls(n, (1 << (1 << n)) - 1)

    @classmethod
    def from_members(cls, n: int, members: Iterable[Union[int, Assignment]]) -> "ModelSet":
        mask = 0
        for u in members:
            bits = u.bits if isinstance(u, Assignment) else int(u)
            if not 0 <= bits < (1 << n):
                raise WorkbenchError(f"Assignment {bits} out of range for n={n}")
            mask |= 1 << bits
        return cls(n, mask)

    @classmethod
    def from_vector(cls, n: int, vector: np.ndarray) -> "ModelSet":
        """Build from a boolean truth-table column of length 2^n."""
        packed = np.packbits(np.asarray(vector, dtype=np.uint8), bitorder="little")
        return cls(n, int.from_bytes(packed.tobytes(), "little"))

    @property
    def size(self) -> int:
        """Number of assignments over n variables (the universe, not the set)."""
        return 1 << self.n

    def to_vector(self) -> np.ndarray:
        nbytes = max(1, (self.size + 7) // 8)
        raw = np.frombuffer(self.mask.to_bytes(nbytes, "little"), dtype=np.uint8)
        return np.unpackbits(raw, bitorder="little")[: self.size].astype(bool)

    def members(self) -> List[int]:
        return [u for u in range(self.size) if (self.mask >> u) & 1]

    def assignments(self) -> List[Assignment]:
        return [Assignment(self.n, u) for u in self.members()]

    def __contains__(self, u) -> bool:
        bits = u.bits if isinstance(u, Assignment) else int(u)
        return bool((self.mask >> bits) & 1)

    def __iter__(self) -> Iterator[int]:
        return iter(self.members())

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    def __bool__(self) -> bool:
        return self.mask != 0

    def _same_n(self, other: "ModelSet") -> None:
        if other.n != self.n:
            raise WorkbenchError(f"Model sets over n={self.n} and n={other.n} cannot be combined")

    def __and__(self, other: "ModelSet") -> "ModelSet":
        self._same_n(other)
        return ModelSet(self.n, self.mask & other.mask)

    def __or__(self, other: "ModelSet") -> "ModelSet":
        self._same_n(other)
        return ModelSet(self.n, self.mask | other.mask)

    def __invert__(self) -> "ModelSet":
        return ModelSet(self.n, ModelSet.full(self.n).mask ^ self.mask)

    def issubset(self, other: "ModelSet") -> bool:
        self._same_n(other)
        return self.mask & ~other.mask == 0

    def __str__(self):
        return "{" + ", ".join(str(u) for u in self.members()) + "}"


def all_model_sets(n: int) -> Iterator[ModelSet]:
    """Every model set over n variables, in ascending mask order."""
    for mask in range(1 << (1 << n)):
        yield ModelSet(n, mask)


def _truth_vector(phi: Formula, columns: np.ndarray) -> np.ndarray:
    if isinstance(phi, Var):
        return columns[phi.index - 1]
    if isinstance(phi, Const):
        return np.full(columns.shape[1], phi.value, dtype=bool)
    if isinstance(phi, Not):
        return ~_truth_vector(phi.arg, columns)
    left = _truth_vector(phi.left, columns)
    right = _truth_vector(phi.right, columns)
    if isinstance(phi, And):
        return left & right
    if isinstance(phi, Or):
        return left | right
    if isinstance(phi, Implies):
        return ~left | right
    return left == right


def models(phi: Formula, n: int) -> ModelSet:
    """|phi|: the assignments over x1..xn satisfying phi (truth-table enumeration)."""
    _check_n(n)
    bad = [i for i in variables_of(phi) if not 1 <= i <= n]
    if bad:
        raise VariableRangeError(f"x{max(bad)} is not a variable over n={n}")
    universe = np.arange(1 << n)
    columns = ((universe[None, :] >> np.arange(n)[:, None]) & 1).astype(bool)
    return ModelSet.from_vector(n, _truth_vector(phi, columns))


def evaluate(phi: Formula, a: Assignment) -> bool:
    """Truth value of phi under assignment a."""
    if isinstance(phi, Var):
        return a.value(phi.index)
    if isinstance(phi, Const):
        return phi.value
    if isinstance(phi, Not):
        return not evaluate(phi.arg, a)
    left = evaluate(phi.left, a)
    if isinstance(phi, And):
        return left and evaluate(phi.right, a)
    if isinstance(phi, Or):
        return left or evaluate(phi.right, a)
    if isinstance(phi, Implies):
        return (not left) or evaluate(phi.right, a)
    return left == evaluate(phi.right, a)


def _minterm(u: int, n: int) -> Formula:
    literals = [Var(i) if (u >> (i - 1)) & 1 else Not(Var(i)) for i in range(1, n + 1)]
    return reduce(And, literals)


def formula_of(A: ModelSet) -> Formula:
    """<A>: full DNF with minterms in ascending assignment order; false for the empty set."""
    members = A.members()
    if not members:
        return BOTTOM
    return reduce(Or, (_minterm(u, A.n) for u in members))


def combine(mu: Formula, sets: Sequence[ModelSet], n: int) -> ModelSet:
    """Evaluate a Boolean combination of set symbols, Var(i) standing for sets[i-1]."""
    full = (1 << (1 << n)) - 1

    def go(node) -> int:
        if isinstance(node, Var):
            if not 1 <= node.index <= len(sets):
                raise VariableRangeError(f"p{node.index} has no set (only {len(sets)} given)")
            return sets[node.index - 1].mask
        if isinstance(node, Const):
            return full if node.value else 0
        if isinstance(node, Not):
            return full ^ go(node.arg)
        left, right = go(node.left), go(node.right)
        if isinstance(node, And):
            return left & right
        if isinstance(node, Or):
            return left | right
        if isinstance(node, Implies):
            return (full ^ left) | right
        return full ^ (left ^ right)

    return ModelSet(n, go(mu))


def random_model_set(n: int, rng: np.random.Generator) -> ModelSet:
    """Uniformly random model set drawn from a seeded generator."""
    return ModelSet.from_vector(n, rng.integers(0, 2, size=1 << n).astype(bool))

# postulates.py
"""
Postulates: first-order sentences over K, p1..p9 and Kstar[mu], read with
element variables ranging over truth assignments and implicitly
quantified over the p_i.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import DEFAULT_SAMPLE_SIZE, EXHAUSTIVE_TUPLE_LIMIT
from errors import CapExceededError, PostulateError, WorkbenchError
from first_order import (
    Bicond,
    Cond,
    Conj,
    Disj,
    Eq,
    Exists,
    Forall,
    Interpretation,
    Neg,
    Pred,
    Rel,
    Sentence,
    Star,
    Truth,
    free_variables,
    holds,
    parse_sentence,
    render_sentence,
)
from logic_core import And, Formula, ModelSet, Not, Or, Var, combine, random_model_set, variables_of
from revision import RevisionOperator

logger = logging.getLogger(__name__)

BUILTIN_POSTULATES: Dict[str, str] = {
    "agm-success": "(exists x. K(x)) & (exists x. p1(x)) -> (exists x. Kstar[p1](x))",
    "agm-success-printed": "(exists x. K(x)) -> (exists x. Kstar[p1](x))",
    "agm-subexpansion": (
        "(exists x. Kstar[p1](x) & p2(x)) -> "
        "(forall y. Kstar[p1 & p2](y) -> Kstar[p1](y) & p2(y))"
    ),
    "faithful-probe": "forall x. Kstar[true](x) <-> K(x)",
    "vacuity": "(exists x. K(x) & p1(x)) -> (forall x. Kstar[p1](x) <-> K(x) & p1(x))",
    "inclusion": "forall x. Kstar[p1](x) -> p1(x)",
    "superexpansion": "forall x. Kstar[p1](x) & p2(x) -> Kstar[p1 & p2](x)",
    "disjunction": "forall x. Kstar[p1](x) & Kstar[p2](x) -> Kstar[p1 | p2](x)",
}

# Sound for minimization over every faithful partial preorder.
PARTIAL_ORDER_SOUND = (
    "agm-success",
    "inclusion",
    "superexpansion",
    "disjunction",
    "vacuity",
    "faithful-probe",
)


@dataclass(frozen=True)
class Postulate:
    body: Sentence
    ell: int
    mus: Tuple[Formula, ...]
    name: Optional[str] = None

    @property
    def m(self) -> int:
        return len(self.mus)

    @property
    def text(self) -> str:
        return render_sentence(self.body)

    def __str__(self):
        return self.name or self.text


def _phi_atom_index(name: str) -> Optional[int]:
    if len(name) == 2 and name[0] == "p" and name[1] in "123456789":
        return int(name[1])
    return None


def _walk(f: Sentence):
    yield f
    if isinstance(f, Neg):
        yield from _walk(f.arg)
    elif isinstance(f, (Forall, Exists)):
        yield from _walk(f.body)
    elif isinstance(f, (Conj, Disj, Cond, Bicond)):
        yield from _walk(f.left)
        yield from _walk(f.right)


def postulate_from_body(body: Sentence, name: Optional[str] = None) -> Postulate:
    """Validate a postulate body and infer ell and the starred combinations."""
    free = free_variables(body)
    if free:
        raise PostulateError(f"A postulate must be a sentence; free variables: {sorted(free)}")
    ell = 0
    mus: List[Formula] = []
    for node in _walk(body):
        if isinstance(node, Pred):
            index = _phi_atom_index(node.name)
            if index is None and node.name != "K":
                raise PostulateError(f"Predicate {node.name} is not allowed in postulates (use K or p1..p9)")
            ell = max(ell, index or 0)
        elif isinstance(node, Star):
            ell = max([ell, *variables_of(node.mu)])
            if node.mu not in mus:
                mus.append(node.mu)
        elif isinstance(node, Rel):
            raise PostulateError(f"Binary atom {node.name} is not allowed in postulates")
    return Postulate(body, ell, tuple(mus), name)


def parse_postulate(text: str, name: Optional[str] = None) -> Postulate:
    """Parse postulate DSL text; ell is the largest p-index, mus are deduplicated syntactically."""
    return postulate_from_body(parse_sentence(text), name)


def get_postulate(name_or_text: str) -> Postulate:
    """A built-in postulate by name, or parsed DSL text."""
    if name_or_text in BUILTIN_POSTULATES:
        return parse_postulate(BUILTIN_POSTULATES[name_or_text], name=name_or_text)
    return parse_postulate(name_or_text)


def _interpretation(op: RevisionOperator, K: ModelSet, P: Postulate, phis: Sequence[ModelSet]) -> Interpretation:
    n = K.n
    unary = {"K": K.mask}
    for i, phi in enumerate(phis, start=1):
        unary[f"p{i}"] = phi.mask
    stars = {mu: op(combine(mu, phis, n)).mask for mu in P.mus}
    return Interpretation(size=1 << n, unary=unary, stars=stars)


def eval_instance(op: RevisionOperator, K: ModelSet, P: Postulate, phis: Sequence[ModelSet]) -> bool:
    """P for one choice of phi_1..phi_ell, variables ranging over assignments."""
    if len(phis) != P.ell:
        raise PostulateError(f"{P} needs {P.ell} formulas, got {len(phis)}")
    if K.n != op.n or any(phi.n != op.n for phi in phis):
        raise WorkbenchError(f"Operator, knowledge base and formulas must share n={op.n}")
    return holds(P.body, _interpretation(op, K, P, phis))


@dataclass(frozen=True)
class Verdict:
    """Outcome of a universally quantified check."""
    holds: bool
    checked: int
    counterexample: Optional[Tuple] = None
    mode: str = "exhaustive"
    seed: Optional[int] = None

    def __bool__(self):
        return self.holds


def tuple_at(index: int, base: int, length: int) -> Tuple[int, ...]:
    """The index-th tuple of range(base)^length in lexicographic order."""
    digits = []
    for _ in range(length):
        index, digit = divmod(index, base)
        digits.append(digit)
    return tuple(reversed(digits))


def first_failure(worker: Callable[[int, int], Optional[int]], total: int, jobs: int = 1) -> Optional[int]:
    """Smallest index in [0, total) rejected by worker(lo, hi).

    With jobs > 1 contiguous ranges run in a process pool; the minimum over
    the ranges keeps the answer independent of scheduling.
    """
    if jobs <= 1 or total < 2 * jobs:
        return worker(0, total)
    bounds = [total * k // jobs for k in range(jobs + 1)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(worker, lo, hi) for lo, hi in zip(bounds, bounds[1:])]
        found = [f.result() for f in futures]
    failing = [i for i in found if i is not None]
    return min(failing) if failing else None


def _scan_tuples(op: RevisionOperator, K: ModelSet, P: Postulate, lo: int, hi: int) -> Optional[int]:
    n = K.n
    base = 1 << (1 << n)
    for index in range(lo, hi):
        phis = [ModelSet(n, mask) for mask in tuple_at(index, base, P.ell)]
        if not eval_instance(op, K, P, phis):
            return index
    return None


def satisfies(
    op: RevisionOperator,
    K: ModelSet,
    P: Postulate,
    mode: str = "exhaustive",
    samples: int = DEFAULT_SAMPLE_SIZE,
    seed: Optional[int] = None,
    jobs: int = 1,
    max_tuples: int = EXHAUSTIVE_TUPLE_LIMIT,
) -> Verdict:
    """
    Check P for every (or k seeded random) tuple of model sets.

    Args:
        op: Revision operator under test
        K: Knowledge base the operator revises
        P: Postulate to check
        mode: "exhaustive" or "sample"
        samples: Number of random tuples in sample mode
        seed: Seed for sample mode (required there)
        jobs: Worker processes for the exhaustive scan
        max_tuples: Largest exhaustive scan accepted

    Returns:
        Verdict with the tuple count and, on failure, the counterexample.
        Exhaustive mode reports the lexicographically first one.
    """
    n = K.n
    if mode == "exhaustive":
        total = (1 << (1 << n)) ** P.ell
        if total > max_tuples:
            raise CapExceededError(
                f"Exhaustive check of {P} at n={n} needs {total} tuples (limit {max_tuples}); "
                f"use sample mode with a seed"
            )
        logger.debug(f"Checking {P} exhaustively over {total} tuples")
        failing = first_failure(partial(_scan_tuples, op, K, P), total, jobs)
        if failing is None:
            return Verdict(True, total)
        base = 1 << (1 << n)
        witness = tuple(ModelSet(n, mask) for mask in tuple_at(failing, base, P.ell))
        return Verdict(False, failing + 1, witness)

    if mode == "sample":
        if seed is None:
            raise WorkbenchError("Sampled checks need an explicit seed")
        rng = np.random.default_rng(seed)
        for k in range(samples):
            phis = tuple(random_model_set(n, rng) for _ in range(P.ell))
            if not eval_instance(op, K, P, phis):
                return Verdict(False, k + 1, phis, mode="sample", seed=seed)
        return Verdict(True, samples, mode="sample", seed=seed)

    raise WorkbenchError(f"Unknown mode {mode!r}; use exhaustive or sample")


# --- Random postulates ---

def _random_mu(rng: np.random.Generator, ell: int, depth: int) -> Formula:
    if depth == 0 or rng.random() < 0.4:
        return Var(int(rng.integers(1, ell + 1)))
    kind = int(rng.integers(3))
    if kind == 0:
        return Not(_random_mu(rng, ell, depth - 1))
    build = And if kind == 1 else Or
    return build(_random_mu(rng, ell, depth - 1), _random_mu(rng, ell, depth - 1))


def _random_body(rng: np.random.Generator, ell: int, bound: List[str], depth: int) -> Sentence:
    if depth == 0 or (bound and rng.random() < 0.3):
        if not bound:
            return Truth(bool(rng.integers(2)))
        var = bound[int(rng.integers(len(bound)))]
        kind = int(rng.integers(4))
        if kind == 0:
            return Pred("K", var)
        if kind == 1:
            return Pred(f"p{int(rng.integers(1, ell + 1))}", var)
        if kind == 2 or len(bound) == 1:
            return Star(_random_mu(rng, ell, 2), var)
        other = bound[int(rng.integers(len(bound)))]
        return Eq(var, other)
    kind = int(rng.integers(6))
    if kind in (0, 1) and len(bound) < 3:
        var = "xyz"[len(bound)]
        body = _random_body(rng, ell, bound + [var], depth - 1)
        return Forall(var, body) if kind == 0 else Exists(var, body)
    if kind == 2:
        return Neg(_random_body(rng, ell, bound, depth - 1))
    build = (Conj, Disj, Cond, Bicond)[int(rng.integers(4))]
    return build(_random_body(rng, ell, bound, depth - 1), _random_body(rng, ell, bound, depth - 1))


def random_postulate(rng: np.random.Generator, ell: int = 2, depth: int = 4) -> Postulate:
    """A random closed postulate over p1..p_ell (the inferred ell may be smaller)."""
    return postulate_from_body(_random_body(rng, ell, [], depth))

# mso.py
"""
Translation of postulates into first-order sentences over <= and A1..Al,
extensions of faithful structures, and evaluation of FO and universal
(or existential) monadic second-order sentences on finite orders.
"""

import logging
import re
from dataclasses import dataclass
from functools import partial
from itertools import permutations
from typing import FrozenSet, Optional, Sequence, Tuple

import numpy as np

from config import DEFAULT_SAMPLE_SIZE, EXHAUSTIVE_TUPLE_LIMIT
from errors import CapExceededError, FormulaSyntaxError, PostulateError, WorkbenchError
from first_order import (
    ORDER,
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
    mask_of,
    min_macro,
    mu_to_sentence,
    parse_sentence,
    render_sentence,
    rows_of,
    symbols,
)
from logic_core import ModelSet
from orders import PartialPreorder
from postulates import Postulate, Verdict, eval_instance, first_failure, satisfies, tuple_at
from revision import FaithfulStructure, operator_table, operator_view

logger = logging.getLogger(__name__)

_SET_NAME = re.compile(r"A([1-9][0-9]*)$")
_UMSO_PREFIX = re.compile(r"\s*forallsets\s+A1\s*(?:\.\.\s*A([1-9][0-9]*)\s*)?\.(.*)\Z", re.DOTALL)


@dataclass(frozen=True)
class UMSOSentence:
    """forallsets A1..Al. body"""
    ell: int
    body: Sentence

    def __post_init__(self):
        if self.ell < 0:
            raise WorkbenchError(f"Number of set variables must be >= 0, got {self.ell}")
        check_fo_sentence(self.body, self.ell)

    def __str__(self):
        if self.ell == 0:
            return render_sentence(self.body)
        sets = "A1" if self.ell == 1 else f"A1..A{self.ell}"
        return f"forallsets {sets}. {render_sentence(self.body)}"


@dataclass(frozen=True)
class ExtendedStructure:
    order: PartialPreorder
    sets: Tuple[FrozenSet[int], ...]

    def __post_init__(self):
        sets = tuple(frozenset(int(a) for a in s) for s in self.sets)
        for i, s in enumerate(sets, start=1):
            bad = [a for a in s if not 0 <= a < self.order.m]
            if bad:
                raise WorkbenchError(f"A{i} contains {bad[0]}, outside 0..{self.order.m - 1}")
        object.__setattr__(self, "sets", sets)

    @property
    def ell(self) -> int:
        return len(self.sets)

    def interpretation(self) -> Interpretation:
        return order_interpretation(self.order, [mask_of(s) for s in self.sets])


def order_interpretation(R: PartialPreorder, set_masks: Sequence[int], rows: Optional[Sequence[int]] = None) -> Interpretation:
    unary = {f"A{i}": mask for i, mask in enumerate(set_masks, start=1)}
    return Interpretation(size=R.m, unary=unary, binary={ORDER: rows if rows is not None else rows_of(R.leq)})


def check_fo_sentence(psi: Sentence, ell: Optional[int] = None) -> None:
    """psi is closed and uses only <= and A1..A_ell."""
    free = free_variables(psi)
    if free:
        raise PostulateError(f"Not a sentence; free variables: {sorted(free)}")
    unary, binary, stars = symbols(psi)
    if stars or binary - {ORDER}:
        raise PostulateError("Sentences over orders may only use <=, = and A1..Al")
    for name in unary:
        match = _SET_NAME.match(name)
        if not match:
            raise PostulateError(f"Unary symbol {name} is not a set symbol A<i>")
        if ell is not None and int(match.group(1)) > ell:
            raise PostulateError(f"{name} exceeds the {ell} declared set variables")


def set_count(psi: Sentence) -> int:
    """Largest i such that A_i occurs in psi."""
    unary, _, _ = symbols(psi)
    indices = [int(m.group(1)) for m in map(_SET_NAME.match, unary) if m]
    return max(indices, default=0)


def parse_fo(text: str) -> Sentence:
    """Parse an FO sentence over <= and A1..Al (min macros are expanded)."""
    psi = parse_sentence(text)
    check_fo_sentence(psi)
    return psi


def parse_umso(text: str) -> UMSOSentence:
    """Parse `forallsets A1..Al. <body>`; plain FO text gives ell = 0."""
    match = _UMSO_PREFIX.match(text)
    if match is None:
        if text.lstrip().startswith("forallsets"):
            raise FormulaSyntaxError(f"Malformed set quantifier prefix in {text!r}", 0)
        return UMSOSentence(0, parse_fo(text))
    ell = int(match.group(1) or 1)
    return UMSOSentence(ell, parse_sentence(match.group(2)))


# --- Translation ---

def translate(P: Postulate) -> Sentence:
    """tau(P): K(x) -> min(x), p_i -> A_i, Kstar[mu](x) -> min[mu^](x), macros expanded."""

    def go(node: Sentence) -> Sentence:
        if isinstance(node, Pred):
            if node.name == "K":
                return min_macro(None, node.var)
            return Pred("A" + node.name[1:], node.var)
        if isinstance(node, Star):
            return min_macro(mu_to_sentence(node.mu, node.var), node.var)
        if isinstance(node, (Truth, Eq, Rel)):
            return node
        if isinstance(node, Neg):
            return Neg(go(node.arg))
        if isinstance(node, (Forall, Exists)):
            return type(node)(node.var, go(node.body))
        return type(node)(go(node.left), go(node.right))

    return go(P.body)


def universal_closure(P: Postulate) -> UMSOSentence:
    """forallsets A1..Al. tau(P)"""
    return UMSOSentence(P.ell, translate(P))


# --- Evaluation ---

def eval_fo(S: ExtendedStructure, psi: Sentence) -> bool:
    check_fo_sentence(psi)
    if set_count(psi) > S.ell:
        raise WorkbenchError(f"Sentence uses A{set_count(psi)} but the structure has {S.ell} sets")
    return holds(psi, S.interpretation())


def extension_of(F: FaithfulStructure, phis: Sequence[ModelSet]) -> ExtendedStructure:
    """A_i = t^-1(phis[i])."""
    for phi in phis:
        if phi.n != F.n:
            raise WorkbenchError(f"Formula over n={phi.n} for a structure over n={F.n}")
    return ExtendedStructure(F.order, tuple(F.preimage(phi) for phi in phis))


def check_prop_equivalence(F: FaithfulStructure, P: Postulate, phis: Sequence[ModelSet]) -> bool:
    """P holds for K_F at phis iff the phis-extension of F satisfies tau(P)."""
    direct = eval_instance(operator_view(F), F.kb, P, phis)
    translated = eval_fo(extension_of(F, phis), translate(P))
    if direct != translated:
        logger.warning(f"Translation disagrees for {P} at {[str(phi) for phi in phis]}")
    return direct == translated


def _scan_subsets(R: PartialPreorder, body: Sentence, ell: int, expected: bool, lo: int, hi: int) -> Optional[int]:
    base = 1 << R.m
    rows = rows_of(R.leq)
    for index in range(lo, hi):
        I = order_interpretation(R, tuple_at(index, base, ell), rows)
        if holds(body, I) != expected:
            return index
    return None


def _subset_tuple(masks: Sequence[int], m: int) -> Tuple[FrozenSet[int], ...]:
    return tuple(frozenset(a for a in range(m) if (mask >> a) & 1) for mask in masks)


def _check_sets(
    R: PartialPreorder,
    body: Sentence,
    ell: int,
    expected: bool,
    mode: str,
    samples: int,
    seed: Optional[int],
    jobs: int,
    max_tuples: int,
) -> Verdict:
    """Search for a tuple of subsets where body != expected."""
    check_fo_sentence(body, ell)
    if mode == "exhaustive":
        total = (1 << R.m) ** ell
        if total > max_tuples:
            raise CapExceededError(
                f"{total} subset tuples over {R.m} elements exceed the limit {max_tuples}; "
                f"use sample mode with a seed"
            )
        found = first_failure(partial(_scan_subsets, R, body, ell, expected), total, jobs)
        if found is None:
            return Verdict(True, total)
        witness = _subset_tuple(tuple_at(found, 1 << R.m, ell), R.m)
        return Verdict(False, found + 1, witness)
    if mode == "sample":
        if seed is None:
            raise WorkbenchError("Sampled checks need an explicit seed")
        rng = np.random.default_rng(seed)
        for k in range(samples):
            masks = [mask_of(np.flatnonzero(rng.integers(0, 2, size=R.m))) for _ in range(ell)]
            if holds(body, order_interpretation(R, masks)) != expected:
                return Verdict(False, k + 1, _subset_tuple(masks, R.m), mode="sample", seed=seed)
        return Verdict(True, samples, mode="sample", seed=seed)
    raise WorkbenchError(f"Unknown mode {mode!r}; use exhaustive or sample")


def eval_umso(
    R: PartialPreorder,
    Phi: UMSOSentence,
    mode: str = "exhaustive",
    samples: int = DEFAULT_SAMPLE_SIZE,
    seed: Optional[int] = None,
    jobs: int = 1,
    max_tuples: int = EXHAUSTIVE_TUPLE_LIMIT,
) -> Verdict:
    """forallsets semantics; on failure the witness is the first falsifying tuple of subsets."""
    return _check_sets(R, Phi.body, Phi.ell, True, mode, samples, seed, jobs, max_tuples)


def eval_emso(
    R: PartialPreorder,
    Phi: UMSOSentence,
    mode: str = "exhaustive",
    samples: int = DEFAULT_SAMPLE_SIZE,
    seed: Optional[int] = None,
    jobs: int = 1,
    max_tuples: int = EXHAUSTIVE_TUPLE_LIMIT,
) -> Verdict:
    """existssets A1..Al. body, read off the universal dual.

    holds is True iff some tuple satisfies the body; the witness is then the
    first satisfying tuple.
    """
    dual = _check_sets(R, Phi.body, Phi.ell, False, mode, samples, seed, jobs, max_tuples)
    return Verdict(not dual.holds, dual.checked, dual.counterexample, dual.mode, dual.seed)


def check_definability(
    R: PartialPreorder,
    P: Postulate,
    labelings: Optional[Sequence[Sequence[int]]] = None,
) -> bool:
    """R satisfies forallsets tau(P) iff every faithful labeling of R satisfies P.

    Checks each labeling (all m! of them by default) against the one UMSO
    verdict; R must be regular so that K is determined by the labeling.
    """
    umso = eval_umso(R, universal_closure(P)).holds
    for labels in labelings if labelings is not None else permutations(range(R.m)):
        F = FaithfulStructure.create(R, labels)
        if satisfies(operator_table(F), F.kb, P).holds != umso:
            logger.info(f"Definability check fails for labeling {list(labels)}")
            return False
    return True

# revision.py
"""
Revision by minimization over faithful partial preorders.

A FaithfulStructure separates the preorder on elements 0..2^n-1 from the
labeling t of elements by truth assignments. Revising by phi returns the
t-images of the minimal elements of t^-1(|phi|).
"""

import json
import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from config import MATERIALIZE_MAX_N, REPRESENTABLE_FULL_MAX_N, DEFAULT_SAMPLE_SIZE
from errors import (
    CapExceededError,
    FaithfulnessError,
    InconsistentPairError,
    NonTransitiveError,
    OperatorUndefinedError,
    OrderValidationError,
    ReconstructionError,
    TableMismatchError,
    WorkbenchError,
)
from logic_core import ModelSet, random_model_set
from orders import (
    PartialPreorder,
    is_regular,
    minimal_elements,
    strict_less,
    validate_preorder,
)

logger = logging.getLogger(__name__)

VERIFY_MODES = ("full", "pairs", "sample")


def _variable_count(m: int) -> int:
    n = m.bit_length() - 1
    if n < 1 or (1 << n) != m:
        raise WorkbenchError(f"A faithful structure needs 2^n elements (n >= 1), got {m}")
    return n


def _check_labels(m: int, labels: Sequence[int]) -> Tuple[int, ...]:
    labels = tuple(int(u) for u in labels)
    if len(labels) != m:
        raise WorkbenchError(f"Labeling has {len(labels)} entries for {m} elements")
    if sorted(labels) != list(range(m)):
        raise WorkbenchError(f"Labeling {list(labels)} is not a bijection onto the assignments")
    return labels


@dataclass(frozen=True)
class FaithfulnessCheck:
    ok: bool
    reason: Optional[str] = None
    witness: Tuple[int, ...] = ()

    def __bool__(self):
        return self.ok


def check_faithful(R: PartialPreorder, t: Sequence[int], K: ModelSet) -> FaithfulnessCheck:
    """Both faithfulness conditions; the report names the first violating element or pair."""
    n = _variable_count(R.m)
    if K.n != n:
        raise WorkbenchError(f"Knowledge base is over n={K.n}, order has 2^{n} elements")
    t = _check_labels(R.m, t)

    minimal = minimal_elements(R)
    for a in range(R.m):
        if (a in minimal) != (t[a] in K):
            if a in minimal:
                reason = f"element {a} is minimal but t({a})={t[a]} is not a model of K"
            else:
                reason = f"t({a})={t[a]} is a model of K but element {a} is not minimal"
            return FaithfulnessCheck(False, reason, (a,))
    for a in range(R.m):
        if t[a] not in K:
            continue
        for b in range(R.m):
            if t[b] not in K and not strict_less(R, a, b):
                return FaithfulnessCheck(
                    False,
                    f"t({a}) satisfies K and t({b}) falsifies K but not {a} < {b}",
                    (a, b),
                )
    return FaithfulnessCheck(True)


def knowledge_base_of(R: PartialPreorder, t: Sequence[int]) -> ModelSet:
    """K = { t(a) : a minimal } for a regular preorder."""
    if not is_regular(R):
        raise WorkbenchError("The knowledge base is only determined for regular preorders")
    n = _variable_count(R.m)
    t = _check_labels(R.m, t)
    return ModelSet.from_members(n, (t[a] for a in minimal_elements(R)))


def _minimize(mask: int, below: Sequence[int]) -> int:
    result = 0
    rest = mask
    while rest:
        low = rest & -rest
        if not below[low.bit_length() - 1] & mask:
            result |= low
        rest ^= low
    return result


@dataclass(frozen=True)
class FaithfulStructure:
    order: PartialPreorder
    labels: Tuple[int, ...]
    kb: ModelSet

    def __post_init__(self):
        check = check_faithful(self.order, self.labels, self.kb)
        if not check:
            raise FaithfulnessError(check.reason)
        object.__setattr__(self, "labels", tuple(int(u) for u in self.labels))

    @classmethod
    def create(
        cls,
        order: PartialPreorder,
        labels: Optional[Sequence[int]] = None,
        kb: Optional[ModelSet] = None,
    ) -> "FaithfulStructure":
        """Identity labeling and the minimal images as K unless given."""
        labels = tuple(range(order.m)) if labels is None else tuple(labels)
        if kb is None:
            kb = knowledge_base_of(order, labels)
        return cls(order, labels, kb)

    @property
    def n(self) -> int:
        return self.kb.n

    @cached_property
    def inverse(self) -> Tuple[int, ...]:
        inv = [0] * len(self.labels)
        for a, u in enumerate(self.labels):
            inv[u] = a
        return tuple(inv)

    @cached_property
    def assignment_below(self) -> Tuple[int, ...]:
        """mask[u] holds every v with t^-1(v) < t^-1(u)."""
        element_below = self.order.strict_below_masks()
        result = []
        for u in range(self.order.m):
            mask = element_below[self.inverse[u]]
            translated = 0
            while mask:
                low = mask & -mask
                translated |= 1 << self.labels[low.bit_length() - 1]
                mask ^= low
            result.append(translated)
        return tuple(result)

    def preimage(self, phi: ModelSet) -> frozenset:
        """t^-1(phi) as a set of elements."""
        return frozenset(self.inverse[u] for u in phi)


def revise(F: FaithfulStructure, phi: ModelSet) -> ModelSet:
    """K *_F phi: the t-images of the minimal elements of t^-1(|phi|)."""
    if phi.n != F.n:
        raise WorkbenchError(f"Revising formula is over n={phi.n}, structure over n={F.n}")
    return ModelSet(F.n, _minimize(phi.mask, F.assignment_below))


class RevisionOperator:
    """A map from model sets to model sets.

    Backed either by explicit entries (mask -> mask, possibly partial) or by
    a faithful structure (a computed view usable at any n).
    """

    def __init__(
        self,
        n: int,
        entries: Optional[Mapping[int, int]] = None,
        source: Optional[FaithfulStructure] = None,
    ):
        if (entries is None) == (source is None):
            raise WorkbenchError("An operator needs exactly one of entries or a source structure")
        self.n = n
        self.source = source
        self._entries = dict(entries) if entries is not None else None

    @classmethod
    def from_function(cls, n: int, fn: Callable[[ModelSet], ModelSet]) -> "RevisionOperator":
        _materializable(n)
        return cls(n, entries={mask: fn(ModelSet(n, mask)).mask for mask in range(1 << (1 << n))})

    @property
    def is_materialized(self) -> bool:
        return self._entries is not None

    @property
    def is_total(self) -> bool:
        if self._entries is None:
            return True
        return len(self._entries) == 1 << (1 << self.n)

    def apply_mask(self, mask: int) -> int:
        if self._entries is None:
            return _minimize(mask, self.source.assignment_below)
        try:
            return self._entries[mask]
        except KeyError:
            raise OperatorUndefinedError(
                f"Operator has no entry for {ModelSet(self.n, mask)}"
            ) from None

    def __call__(self, phi: ModelSet) -> ModelSet:
        if phi.n != self.n:
            raise WorkbenchError(f"Operator is over n={self.n}, argument over n={phi.n}")
        return ModelSet(self.n, self.apply_mask(phi.mask))

    def knowledge_base(self) -> ModelSet:
        """K * true, which is K for operators arising from faithful structures."""
        return self(ModelSet.full(self.n))

    def table(self) -> List[int]:
        _materializable(self.n)
        return [self.apply_mask(mask) for mask in range(1 << (1 << self.n))]

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {"phi": ModelSet(self.n, mask).members(), "result": ModelSet(self.n, result).members()}
            for mask, result in sorted(self._items())
        ]
        return pd.DataFrame(rows, columns=["phi", "result"])

    def _items(self):
        if self._entries is not None:
            return self._entries.items()
        return enumerate(self.table())

    def __eq__(self, other):
        # extensional
        if not isinstance(other, RevisionOperator):
            return NotImplemented
        if self.n != other.n:
            return False
        return self.table() == other.table()

    __hash__ = None

    def __repr__(self):
        kind = "table" if self.is_materialized else "view"
        return f"RevisionOperator(n={self.n}, {kind})"


def _materializable(n: int) -> None:
    if n > MATERIALIZE_MAX_N:
        raise CapExceededError(
            f"Tables are materialized only for n <= {MATERIALIZE_MAX_N} "
            f"(n={n} has 2^{1 << n} entries); use a computed view"
        )


def operator_view(F: FaithfulStructure) -> RevisionOperator:
    return RevisionOperator(F.n, source=F)


def operator_table(F: FaithfulStructure) -> RevisionOperator:
    """Materialized table of *_F over every model set (n <= 4)."""
    _materializable(F.n)
    below = F.assignment_below
    entries = {mask: _minimize(mask, below) for mask in range(1 << (1 << F.n))}
    logger.debug(f"Materialized operator table with {len(entries)} entries")
    return RevisionOperator(F.n, entries=entries)


def _pair_data(op: RevisionOperator) -> np.ndarray:
    """Strict preference read off singletons and pairs (strict[u, v] iff u < v)."""
    m = 1 << op.n
    for u in range(m):
        got = op.apply_mask(1 << u)
        if got != 1 << u:
            raise InconsistentPairError(
                f"op({{{u}}}) = {ModelSet(op.n, got)}, expected {{{u}}}"
            )
    strict = np.zeros((m, m), dtype=bool)
    for u in range(m):
        for v in range(u + 1, m):
            pair = (1 << u) | (1 << v)
            got = op.apply_mask(pair)
            if got == 1 << u:
                strict[u, v] = True
            elif got == 1 << v:
                strict[v, u] = True
            elif got != pair:
                raise InconsistentPairError(
                    f"op({{{u}, {v}}}) = {ModelSet(op.n, got)} is not a non-empty subset of {{{u}, {v}}}"
                )
    return strict


def _verification_masks(n: int, verify: str, samples: int, seed: Optional[int]):
    if verify == "full":
        _materializable(n)
        return range(1 << (1 << n))
    if verify == "sample":
        if seed is None:
            raise WorkbenchError("Sampled verification needs an explicit seed")
        rng = np.random.default_rng(seed)
        return [random_model_set(n, rng).mask for _ in range(samples)]
    return []


def reconstruct_order(
    op: RevisionOperator,
    verify: str = "full",
    samples: int = DEFAULT_SAMPLE_SIZE,
    seed: Optional[int] = None,
) -> PartialPreorder:
    """
    Recover the partial order (t = identity) behind a minimization operator.

    u < v iff op({u, v}) = {u}; u ~ v iff op({u, v}) = {u, v}. Ties
    (a <= b <= a) look like incomparability on pairs, so the result is
    always antisymmetric.

    Args:
        op: Operator to read pairs from
        verify: "full" re-runs minimization on every set, "sample" on seeded
            random sets, "pairs" stops after the pair data
        samples: Number of random sets in sample mode
        seed: Seed for sample mode (required there)

    Returns:
        The reconstructed partial order
    """
    if verify not in VERIFY_MODES:
        raise WorkbenchError(f"Unknown verification mode {verify!r}; use one of {VERIFY_MODES}")
    strict = _pair_data(op)
    leq = strict | np.eye(1 << op.n, dtype=bool)
    try:
        R = validate_preorder(leq)
    except OrderValidationError as e:
        raise NonTransitiveError(f"Pairwise preferences are not transitive: {e}") from e

    below = R.strict_below_masks()
    for mask in _verification_masks(op.n, verify, samples, seed):
        expected = _minimize(mask, below)
        got = op.apply_mask(mask)
        if got != expected:
            raise TableMismatchError(
                f"op({ModelSet(op.n, mask)}) = {ModelSet(op.n, got)} but minimization "
                f"over the reconstructed order gives {ModelSet(op.n, expected)}"
            )
    return R


def is_representable(
    op: RevisionOperator,
    family: Callable[[PartialPreorder], bool],
    verify: str = "full",
    samples: int = DEFAULT_SAMPLE_SIZE,
    seed: Optional[int] = None,
) -> Optional[FaithfulStructure]:
    """A faithful structure from the family representing op, or None.

    Partial-order uniqueness makes the reconstructed order the only candidate.
    """
    if verify == "full" and op.n > REPRESENTABLE_FULL_MAX_N:
        raise CapExceededError(
            f"Full verification is limited to n <= {REPRESENTABLE_FULL_MAX_N}; use pairs or sample"
        )
    if op.n > MATERIALIZE_MAX_N:
        raise CapExceededError(f"Representability checks are limited to n <= {MATERIALIZE_MAX_N}")
    try:
        R = reconstruct_order(op, verify=verify, samples=samples, seed=seed)
    except ReconstructionError as e:
        logger.info(f"Operator is not a minimization operator: {e}")
        return None
    identity = tuple(range(R.m))
    K = op.knowledge_base()
    check = check_faithful(R, identity, K)
    if not check:
        logger.info(f"Reconstructed order is not faithful for K: {check.reason}")
        return None
    if not family(R):
        logger.info("Reconstructed order is outside the family")
        return None
    return FaithfulStructure(R, identity, K)


# --- JSON ---

def operator_to_json(op: RevisionOperator) -> Dict:
    return {
        "n": op.n,
        "entries": [
            {"phi": ModelSet(op.n, mask).members(), "result": ModelSet(op.n, result).members()}
            for mask, result in sorted(op._items())
        ],
    }


def operator_from_json(data: Dict) -> RevisionOperator:
    try:
        n = int(data["n"])
        pairs = [
            (ModelSet.from_members(n, e["phi"]), ModelSet.from_members(n, e["result"]))
            for e in data["entries"]
        ]
    except (KeyError, TypeError, ValueError) as e:
        raise WorkbenchError(f"Malformed operator JSON: {e}") from e
    entries: Dict[int, int] = {}
    for phi, result in pairs:
        if phi.mask in entries:
            raise WorkbenchError(f"Operator JSON lists phi = {phi} twice")
        entries[phi.mask] = result.mask
    op = RevisionOperator(n, entries=entries)
    if not op.is_total:
        logger.info(f"Loaded a partial operator table ({len(entries)} of {1 << (1 << n)} entries)")
    return op


def load_operator(path: Union[str, Path]) -> RevisionOperator:
    with open(path) as f:
        return operator_from_json(json.load(f))


def dump_operator(op: RevisionOperator, path: Union[str, Path]) -> None:
    with open(path, "w") as f:
        json.dump(operator_to_json(op), f)

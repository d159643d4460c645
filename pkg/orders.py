# orders.py
"""
Finite partial preorders over elements 0..m-1, stored as boolean m x m
matrices (leq[a, b] means a <= b).
"""

import json
import logging
from functools import lru_cache
from itertools import product
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from errors import CapExceededError, OrderValidationError, WorkbenchError

logger = logging.getLogger(__name__)

ENUMERATION_MAX_SIZE = 4


class PartialPreorder:
    """A validated reflexive, transitive relation on m elements."""

    __slots__ = ("_leq",)

    def __init__(self, leq: np.ndarray):
        # use validate_preorder / close to construct from untrusted input
        matrix = np.array(leq, dtype=bool, copy=True)
        matrix.setflags(write=False)
        self._leq = matrix

    @property
    def leq(self) -> np.ndarray:
        return self._leq

    @property
    def m(self) -> int:
        return self._leq.shape[0]

    def le(self, a: int, b: int) -> bool:
        self._check_index(a)
        self._check_index(b)
        return bool(self._leq[a, b])

    def _check_index(self, a: int) -> None:
        if not 0 <= a < self.m:
            raise WorkbenchError(f"Element {a} out of range 0..{self.m - 1}")

    def strict_below_masks(self) -> List[int]:
        """mask[a] has bit b set iff b < a."""
        strict = self._leq & ~self._leq.T
        return [sum(1 << int(b) for b in np.flatnonzero(strict[:, a])) for a in range(self.m)]

    def pairs(self) -> List[Tuple[int, int]]:
        """All (a, b) with a <= b, diagonal excluded."""
        return [(int(a), int(b)) for a, b in np.argwhere(self._leq) if a != b]

    def __eq__(self, other):
        if not isinstance(other, PartialPreorder):
            return NotImplemented
        return np.array_equal(self._leq, other._leq)

    def __hash__(self):
        return hash((self.m, self._leq.tobytes()))

    def __repr__(self):
        return f"PartialPreorder(m={self.m}, pairs={self.pairs()})"


def _as_matrix(leq) -> np.ndarray:
    matrix = np.array(leq, dtype=bool)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise OrderValidationError(f"Relation must be a square matrix, got shape {matrix.shape}")
    return matrix


def _first_transitivity_violation(matrix: np.ndarray) -> Optional[Tuple[int, int, int]]:
    as_int = matrix.astype(np.int64)
    composite = (as_int @ as_int) > 0
    offending = np.argwhere(composite & ~matrix)
    if len(offending) == 0:
        return None
    a, c = (int(x) for x in offending[0])
    b = int(np.flatnonzero(matrix[a] & matrix[:, c])[0])
    return a, b, c


def validate_preorder(leq) -> PartialPreorder:
    """Accept a reflexive, transitive matrix; never repairs the input."""
    matrix = _as_matrix(leq)
    missing = np.flatnonzero(~np.diag(matrix))
    if len(missing):
        raise OrderValidationError(f"Not reflexive: {int(missing[0])} <= {int(missing[0])} is missing")
    violation = _first_transitivity_violation(matrix)
    if violation:
        a, b, c = violation
        raise OrderValidationError(f"Not transitive: {a} <= {b} and {b} <= {c} but not {a} <= {c}")
    return PartialPreorder(matrix)


def close(leq) -> PartialPreorder:
    """Reflexive-transitive closure (Warshall)."""
    matrix = _as_matrix(leq).copy()
    np.fill_diagonal(matrix, True)
    for k in range(matrix.shape[0]):
        matrix |= matrix[:, k : k + 1] & matrix[k : k + 1, :]
    return PartialPreorder(matrix)


def from_pairs(m: int, pairs: Iterable[Sequence[int]], closure: bool = False) -> PartialPreorder:
    """Build from (a, b) pairs meaning a <= b; the diagonal is implied."""
    matrix = np.eye(m, dtype=bool)
    for a, b in pairs:
        if not (0 <= a < m and 0 <= b < m):
            raise OrderValidationError(f"Pair ({a}, {b}) out of range for size {m}")
        matrix[a, b] = True
    return close(matrix) if closure else validate_preorder(matrix)


def chain(m: int) -> PartialPreorder:
    """0 < 1 < ... < m-1."""
    return PartialPreorder(np.triu(np.ones((m, m), dtype=bool)))


def antichain(m: int) -> PartialPreorder:
    return PartialPreorder(np.eye(m, dtype=bool))


def is_partial_order(R: PartialPreorder) -> bool:
    """Antisymmetry: a <= b and b <= a only for a = b."""
    both = R.leq & R.leq.T
    np.fill_diagonal(both, False)
    return not both.any()


def strict_less(R: PartialPreorder, a: int, b: int) -> bool:
    return R.le(a, b) and not R.le(b, a)


def incomparable(R: PartialPreorder, a: int, b: int) -> bool:
    return not R.le(a, b) and not R.le(b, a)


def minimal_elements(R: PartialPreorder, subset: Optional[Iterable[int]] = None) -> FrozenSet[int]:
    """Elements of the subset with nothing strictly below them inside the subset."""
    members = range(R.m) if subset is None else sorted(set(subset))
    for a in members:
        R._check_index(a)
    chosen = np.zeros(R.m, dtype=bool)
    chosen[list(members)] = True
    strict = R.leq & ~R.leq.T
    # below[a]: some chosen b with b < a
    below = (strict & chosen[:, None]).any(axis=0)
    return frozenset(int(a) for a in members if not below[a])


def is_antichain(R: PartialPreorder) -> bool:
    return not (R.leq & ~np.eye(R.m, dtype=bool)).any()


def is_total(R: PartialPreorder) -> bool:
    return bool((R.leq | R.leq.T).all())


def is_ranked(R: PartialPreorder) -> bool:
    """Neither-strictly-below is transitive, i.e. the elements fall into ordered ranks."""
    strict = R.leq & ~R.leq.T
    level = ~(strict | strict.T)
    as_int = level.astype(np.int64)
    return not (((as_int @ as_int) > 0) & ~level).any()


def comparability_graph(R: PartialPreorder) -> nx.Graph:
    graph = nx.Graph()
    graph.add_nodes_from(range(R.m))
    comparable = R.leq | R.leq.T
    graph.add_edges_from((int(a), int(b)) for a, b in np.argwhere(np.triu(comparable, k=1)))
    return graph


def is_power_of_two(m: int) -> bool:
    return m >= 1 and m & (m - 1) == 0


def is_regular(R: PartialPreorder) -> bool:
    """Minimal elements lie strictly below all non-minimal ones, and m is a power of 2."""
    if not is_power_of_two(R.m):
        return False
    minimal = minimal_elements(R)
    others = [b for b in range(R.m) if b not in minimal]
    return all(strict_less(R, a, b) for a in minimal for b in others)


def is_connected(graph: nx.Graph) -> bool:
    """Breadth-first connectivity; the empty graph counts as connected."""
    if graph.number_of_nodes() == 0:
        return True
    start = next(iter(graph.nodes))
    return len(nx.node_connected_component(graph, start)) == graph.number_of_nodes()


def is_regular_disconnected(R: PartialPreorder) -> bool:
    if not is_regular(R):
        return False
    minimal = minimal_elements(R)
    upper = comparability_graph(R).subgraph(b for b in range(R.m) if b not in minimal)
    return not is_connected(upper)


def relabel(R: PartialPreorder, perm: Sequence[int]) -> PartialPreorder:
    """The isomorphic copy in which element a is renamed perm[a]."""
    if sorted(perm) != list(range(R.m)):
        raise WorkbenchError(f"{list(perm)} is not a permutation of 0..{R.m - 1}")
    index = np.argsort(np.asarray(perm))
    return PartialPreorder(R.leq[np.ix_(index, index)])


def induced(R: PartialPreorder, elements: Sequence[int]) -> PartialPreorder:
    """Restriction to the given elements, renumbered 0.. in the given order."""
    idx = list(elements)
    return PartialPreorder(R.leq[np.ix_(idx, idx)])


@lru_cache(maxsize=None)
def _preorders(m: int) -> Tuple[PartialPreorder, ...]:
    off_diagonal = [(a, b) for a in range(m) for b in range(m) if a != b]
    found = []
    for bits in product((False, True), repeat=len(off_diagonal)):
        matrix = np.eye(m, dtype=bool)
        for (a, b), bit in zip(off_diagonal, bits):
            matrix[a, b] = bit
        if _first_transitivity_violation(matrix) is None:
            found.append(PartialPreorder(matrix))
    logger.debug(f"Enumerated {len(found)} preorders on {m} elements")
    return tuple(found)


def enumerate_preorders(m: int) -> List[PartialPreorder]:
    """Every preorder on m labeled elements (355 for m = 4)."""
    if m > ENUMERATION_MAX_SIZE:
        raise CapExceededError(f"Preorder enumeration is capped at m <= {ENUMERATION_MAX_SIZE}")
    return list(_preorders(m))


def regular_preorders(m: int, partial_orders_only: bool = False) -> List[PartialPreorder]:
    return [
        R for R in enumerate_preorders(m)
        if is_regular(R) and (is_partial_order(R) or not partial_orders_only)
    ]


def random_regular_preorder(m: int, rng: np.random.Generator, partial_order: bool = False) -> PartialPreorder:
    pool = regular_preorders(m, partial_orders_only=partial_order)
    return pool[int(rng.integers(len(pool)))]


# --- JSON / DOT ---

def order_to_json(R: PartialPreorder) -> Dict:
    return {"size": R.m, "leq": [list(p) for p in R.pairs()]}


def order_from_json(data: Dict) -> PartialPreorder:
    """Load {"size": m, "leq": [[a, b], ...]}; reflexivity implied, transitivity validated."""
    try:
        m = int(data["size"])
        pairs = [(int(a), int(b)) for a, b in data["leq"]]
    except (KeyError, TypeError, ValueError) as e:
        raise WorkbenchError(f"Malformed order JSON: {e}") from e
    return from_pairs(m, pairs)


def load_order(path: Union[str, Path]) -> PartialPreorder:
    with open(path) as f:
        return order_from_json(json.load(f))


def dump_order(R: PartialPreorder, path: Union[str, Path]) -> None:
    with open(path, "w") as f:
        json.dump(order_to_json(R), f, indent=2)


def to_dot(graph: nx.Graph, name: str = "G") -> str:
    """DOT text of an undirected graph for external rendering."""
    lines = [f"graph {name} {{"]
    lines += [f"  {v};" for v in sorted(graph.nodes)]
    lines += [f"  {u} -- {v};" for u, v in sorted(tuple(sorted(e)) for e in graph.edges)]
    lines.append("}")
    return "\n".join(lines)

# crowns.py
"""
Crowns, double crowns and their extensions by bottom elements; finite
relational structures; the colored-graph encoding of crown-family orders
and the first-order definitions linking the two.

Element numbering used by the builders:
    crown(s):  a_i = i - 1, b_i = s + i - 1  (i = 1..s)
    double crown(s1, s2): crown(s1) followed by crown(s2) shifted by 2*s1
    extend_with_bottom(R, k): bottoms are m..m+k-1
"""

import json
import logging
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from errors import NotACrownError, SignatureMismatchError, WorkbenchError
from first_order import Interpretation, Sentence, holds, mask_of, parse_sentence, rows_of
from orders import (
    PartialPreorder,
    close,
    comparability_graph,
    is_partial_order,
    is_power_of_two,
    is_regular,
    is_regular_disconnected,
    minimal_elements,
    order_from_json,
    strict_less,
)

logger = logging.getLogger(__name__)

EDGE = "E"
ORDER = "<="
CROWN_COLORS = ("L1", "L2", "L3")
_EXTENSION_NAME = re.compile(r"A[1-9][0-9]*$")


# --- Relational structures ---

@dataclass(frozen=True, eq=False)
class RelationalStructure:
    """Elements 0..size-1 with named binary relations (boolean matrices) and unary colors."""
    size: int
    binary: Dict[str, np.ndarray] = field(default_factory=dict)
    unary: Dict[str, FrozenSet[int]] = field(default_factory=dict)

    def __post_init__(self):
        binary = {}
        for name, matrix in self.binary.items():
            matrix = np.array(matrix, dtype=bool, copy=True)
            if matrix.shape != (self.size, self.size):
                raise WorkbenchError(f"Relation {name} has shape {matrix.shape}, expected {(self.size, self.size)}")
            matrix.setflags(write=False)
            binary[name] = matrix
        unary = {}
        for name, members in self.unary.items():
            members = frozenset(int(v) for v in members)
            bad = [v for v in members if not 0 <= v < self.size]
            if bad:
                raise WorkbenchError(f"Color {name} contains {bad[0]}, outside 0..{self.size - 1}")
            unary[name] = members
        object.__setattr__(self, "binary", binary)
        object.__setattr__(self, "unary", unary)

    @classmethod
    def graph(
        cls,
        size: int,
        edges: Iterable[Sequence[int]],
        colors: Optional[Dict[str, Iterable[int]]] = None,
    ) -> "RelationalStructure":
        """Undirected graph: E is stored symmetric."""
        matrix = np.zeros((size, size), dtype=bool)
        for u, v in edges:
            if not (0 <= u < size and 0 <= v < size):
                raise WorkbenchError(f"Edge ({u}, {v}) out of range for {size} vertices")
            matrix[u, v] = matrix[v, u] = True
        return cls(size, {EDGE: matrix}, dict(colors or {}))

    @classmethod
    def from_order(cls, R: PartialPreorder, colors: Optional[Dict[str, Iterable[int]]] = None) -> "RelationalStructure":
        return cls(R.m, {ORDER: R.leq}, dict(colors or {}))

    def signature(self) -> Tuple[Tuple[str, ...], Tuple[str, ...]]:
        return tuple(sorted(self.unary)), tuple(sorted(self.binary))

    def color_signature(self, v: int) -> Tuple[bool, ...]:
        return tuple(v in self.unary[name] for name in sorted(self.unary))

    def interpretation(self) -> Interpretation:
        return Interpretation(
            size=self.size,
            unary={name: mask_of(members) for name, members in self.unary.items()},
            binary={name: rows_of(matrix) for name, matrix in self.binary.items()},
        )

    def gaifman_graph(self) -> nx.Graph:
        return self._gaifman

    @cached_property
    def _gaifman(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.size))
        for matrix in self.binary.values():
            graph.add_edges_from((int(u), int(v)) for u, v in np.argwhere(matrix | matrix.T) if u < v)
        return graph

    def edges(self, name: str = EDGE) -> List[Tuple[int, int]]:
        matrix = self.binary[name]
        return [(int(u), int(v)) for u, v in np.argwhere(matrix | matrix.T) if u < v]

    def is_symmetric_graph(self) -> bool:
        """Only E, stored symmetric, without loops."""
        if set(self.binary) != {EDGE}:
            return False
        matrix = self.binary[EDGE]
        return bool((matrix == matrix.T).all()) and not matrix.diagonal().any()

    def induced(self, vertices: Sequence[int]) -> "RelationalStructure":
        """Substructure on the given vertices, renumbered 0.. in the given order."""
        idx = list(vertices)
        position = {v: i for i, v in enumerate(idx)}
        return RelationalStructure(
            len(idx),
            {name: matrix[np.ix_(idx, idx)] for name, matrix in self.binary.items()},
            {name: [position[v] for v in members if v in position] for name, members in self.unary.items()},
        )

    def with_colors(self, colors: Dict[str, Iterable[int]]) -> "RelationalStructure":
        unary = dict(self.unary)
        unary.update({name: frozenset(members) for name, members in colors.items()})
        return RelationalStructure(self.size, dict(self.binary), unary)

    def without_colors(self, names: Iterable[str]) -> "RelationalStructure":
        drop = set(names)
        return RelationalStructure(
            self.size, dict(self.binary), {k: v for k, v in self.unary.items() if k not in drop}
        )

    def with_edges(self, edges: Iterable[Sequence[int]]) -> "RelationalStructure":
        replaced = RelationalStructure.graph(self.size, edges)
        return RelationalStructure(self.size, {**self.binary, EDGE: replaced.binary[EDGE]}, dict(self.unary))

    def degrees(self) -> List[int]:
        graph = self.gaifman_graph()
        return [graph.degree(v) for v in range(self.size)]

    def components(self) -> List[List[int]]:
        return sorted(sorted(c) for c in nx.connected_components(self.gaifman_graph()))

    def __eq__(self, other):
        if not isinstance(other, RelationalStructure):
            return NotImplemented
        return (
            self.size == other.size
            and self.unary == other.unary
            and self.binary.keys() == other.binary.keys()
            and all(np.array_equal(m, other.binary[k]) for k, m in self.binary.items())
        )

    __hash__ = None

    def __repr__(self):
        names, relations = self.signature()
        return f"RelationalStructure(size={self.size}, binary={list(relations)}, unary={list(names)})"


def same_signature(S1: RelationalStructure, S2: RelationalStructure) -> None:
    if S1.signature() != S2.signature():
        raise SignatureMismatchError(f"Signatures differ: {S1.signature()} vs {S2.signature()}")


def extension_colors(structure: RelationalStructure) -> List[str]:
    """A1, A2, ... present on the structure, in index order."""
    names = [name for name in structure.unary if _EXTENSION_NAME.match(name)]
    return sorted(names, key=lambda name: int(name[1:]))


# --- JSON ---

def structure_to_json(G: RelationalStructure) -> Dict:
    """{"vertices": m, "edges": [[u, v], ...], "colors": {...}, "A": [[...], ...]}"""
    extension = extension_colors(G)
    return {
        "vertices": G.size,
        "edges": [list(e) for e in G.edges()] if EDGE in G.binary else [],
        "colors": {name: sorted(members) for name, members in sorted(G.unary.items()) if name not in extension},
        "A": [sorted(G.unary[name]) for name in extension],
    }


def structure_from_json(data: Dict) -> RelationalStructure:
    """Colored-graph JSON; order JSON ({"size", "leq"}) gives a structure over <=."""
    if "leq" in data:
        return RelationalStructure.from_order(order_from_json(data))
    try:
        size = int(data["vertices"])
        edges = [(int(u), int(v)) for u, v in data.get("edges", [])]
        colors = {str(k): [int(v) for v in members] for k, members in data.get("colors", {}).items()}
        for i, members in enumerate(data.get("A", []), start=1):
            colors[f"A{i}"] = [int(v) for v in members]
    except (KeyError, TypeError, ValueError) as e:
        raise WorkbenchError(f"Malformed colored-graph JSON: {e}") from e
    return RelationalStructure.graph(size, edges, colors)


def load_structure(path: Union[str, Path]) -> RelationalStructure:
    with open(path) as f:
        return structure_from_json(json.load(f))


def dump_structure(G: RelationalStructure, path: Union[str, Path]) -> None:
    with open(path, "w") as f:
        json.dump(structure_to_json(G), f)


# --- Builders ---

@dataclass(frozen=True)
class CrownSpec:
    s: int
    bottoms: int = 0
    double: bool = False
    s2: int = 0

    def __post_init__(self):
        if self.s < 2 or (self.double and self.s2 < 2):
            raise NotACrownError(f"Crown widths must be at least 2, got {self.widths}")
        if self.bottoms < 0:
            raise NotACrownError(f"Bottom count must be non-negative, got {self.bottoms}")

    @property
    def widths(self) -> Tuple[int, ...]:
        return (self.s, self.s2) if self.double else (self.s,)

    @property
    def size(self) -> int:
        return 2 * sum(self.widths) + self.bottoms

    @property
    def is_regular_size(self) -> bool:
        return self.bottoms >= 1 and is_power_of_two(self.size)

    def build(self) -> PartialPreorder:
        R = build_double_crown(self.s, self.s2) if self.double else build_crown(self.s)
        return extend_with_bottom(R, self.bottoms) if self.bottoms else R


def _crown_pairs(s: int, offset: int = 0) -> List[Tuple[int, int]]:
    """(b, a) pairs for a_i > b_i and a_i > b_{i+1}, indices cyclic."""
    pairs = []
    for i in range(s):
        a = offset + i
        pairs.append((offset + s + i, a))
        pairs.append((offset + s + (i + 1) % s, a))
    return pairs


def build_crown(s: int) -> PartialPreorder:
    """Height-1 order with a_i > b_i and a_i > b_{i+1 mod s}."""
    if s < 2:
        raise NotACrownError(f"A crown needs s >= 2, got {s}")
    if s == 2:
        logger.warning("Crown width 2 degenerates to a complete bipartite 2x2 order")
    matrix = np.eye(2 * s, dtype=bool)
    for b, a in _crown_pairs(s):
        matrix[b, a] = True
    return PartialPreorder(matrix)


def build_double_crown(s1: int, s2: int) -> PartialPreorder:
    """Disjoint union of crown(s1) and crown(s2) with no cross comparabilities."""
    first, second = build_crown(s1), build_crown(s2)
    m1 = first.m
    matrix = np.zeros((m1 + second.m, m1 + second.m), dtype=bool)
    matrix[:m1, :m1] = first.leq
    matrix[m1:, m1:] = second.leq
    return PartialPreorder(matrix)


def extend_with_bottom(R: PartialPreorder, k: int) -> PartialPreorder:
    """Append k mutually incomparable elements strictly below every element of R."""
    if k < 1:
        raise WorkbenchError(f"Need at least one bottom element, got {k}")
    m = R.m
    matrix = np.zeros((m + k, m + k), dtype=bool)
    matrix[:m, :m] = R.leq
    matrix[m:, :m] = True
    np.fill_diagonal(matrix, True)
    return close(matrix)


# --- Recognition ---

@dataclass(frozen=True)
class CrownDecomposition:
    L1: FrozenSet[int]
    L2: FrozenSet[int]
    L3: FrozenSet[int]
    cycles: Tuple[Tuple[int, ...], ...]

    @property
    def widths(self) -> Tuple[int, ...]:
        return tuple(len(c) // 2 for c in self.cycles)

    @property
    def bottoms(self) -> int:
        return len(self.L3)

    def spec(self) -> CrownSpec:
        if len(self.cycles) == 1:
            return CrownSpec(self.widths[0], self.bottoms)
        return CrownSpec(self.widths[0], self.bottoms, double=True, s2=self.widths[1])


def cycle_order(graph: nx.Graph, vertices: Iterable[int]) -> Tuple[int, ...]:
    """Walk a cycle from its lowest vertex toward its higher-indexed neighbour."""
    vertices = sorted(vertices)
    start = vertices[0]
    neighbours = sorted(graph.neighbors(start))
    if len(neighbours) != 2:
        raise NotACrownError(f"Vertex {start} has {len(neighbours)} cycle neighbours, expected 2")
    walk = [start, neighbours[1]]
    while True:
        previous, current = walk[-2], walk[-1]
        following = [v for v in graph.neighbors(current) if v != previous]
        if len(following) != 1:
            raise NotACrownError(f"Vertex {current} has {len(following) + 1} cycle neighbours, expected 2")
        nxt = following[0]
        if nxt == start:
            break
        if nxt in walk:
            raise NotACrownError(f"Comparability graph is not a single cycle near vertex {nxt}")
        walk.append(nxt)
    if len(walk) != len(vertices):
        raise NotACrownError(f"Cycle through {start} covers {len(walk)} of {len(vertices)} vertices")
    return tuple(walk)


def decompose_crown_family(R: PartialPreorder) -> CrownDecomposition:
    """Recognise a (double) crown, possibly extended by bottoms, from the order alone."""
    if not is_partial_order(R):
        raise NotACrownError("Crown-family members are partial orders")
    minimal = minimal_elements(R)
    rest = [v for v in range(R.m) if v not in minimal]
    has_inner_comparability = any(strict_less(R, u, v) for u in rest for v in rest)
    bottoms = frozenset(minimal) if has_inner_comparability else frozenset()
    crown = [v for v in range(R.m) if v not in bottoms]

    for u in bottoms:
        for v in bottoms:
            if u != v and R.le(u, v):
                raise NotACrownError(f"Bottom elements {u} and {v} are comparable")
        for v in crown:
            if not strict_less(R, u, v):
                raise NotACrownError(f"Bottom element {u} is not below {v}")

    crown_minimal = minimal_elements(R, crown)
    L2 = frozenset(crown_minimal)
    L1 = frozenset(v for v in crown if v not in L2)
    for u in L1:
        for v in L1:
            if u != v and R.le(u, v):
                raise NotACrownError(f"Upper elements {u} and {v} are comparable (height exceeds 1)")

    graph = comparability_graph(R).subgraph(crown)
    for v in crown:
        if graph.degree(v) != 2:
            raise NotACrownError(f"Crown element {v} has {graph.degree(v)} comparabilities, expected 2")
    components = sorted(sorted(c) for c in nx.connected_components(graph))
    if len(components) not in (1, 2):
        raise NotACrownError(f"Expected one or two crowns, found {len(components)} components")
    cycles = []
    for component in components:
        cycle = cycle_order(graph, component)
        if len(cycle) < 4 or sum(v in L1 for v in cycle) * 2 != len(cycle):
            raise NotACrownError(f"Component {component} is not an alternating cycle")
        cycles.append(cycle)
    return CrownDecomposition(L1, L2, bottoms, tuple(cycles))


def _decomposes(R: PartialPreorder) -> Optional[CrownDecomposition]:
    try:
        return decompose_crown_family(R)
    except NotACrownError:
        return None


def is_extended_crown(R: PartialPreorder) -> bool:
    """An extended crown whose size is a power of 2."""
    d = _decomposes(R)
    return d is not None and len(d.cycles) == 1 and d.bottoms >= 1 and is_power_of_two(R.m)


def is_extended_double_crown(R: PartialPreorder) -> bool:
    """An extended double crown whose size is a power of 2."""
    d = _decomposes(R)
    return d is not None and len(d.cycles) == 2 and d.bottoms >= 1 and is_power_of_two(R.m)


FAMILIES: Dict[str, Callable[[PartialPreorder], bool]] = {
    "regular": is_regular,
    "regular-disconnected": is_regular_disconnected,
    "extended-crown": is_extended_crown,
    "extended-double-crown": is_extended_double_crown,
}


def get_family(name: str) -> Callable[[PartialPreorder], bool]:
    try:
        return FAMILIES[name]
    except KeyError:
        raise WorkbenchError(f"Unknown family {name!r}; choose from {sorted(FAMILIES)}") from None


# --- Colored graphs ---

def to_colored_graph(M: PartialPreorder, extension: Sequence[Iterable[int]] = ()) -> RelationalStructure:
    """G_M: comparability edges, L1 upper crown elements, L2 lower crown elements, L3 bottoms.

    Extension sets become colors A1..Al.
    """
    d = decompose_crown_family(M)
    colors: Dict[str, Iterable[int]] = {"L1": d.L1, "L2": d.L2, "L3": d.L3}
    for i, members in enumerate(extension, start=1):
        colors[f"A{i}"] = members
    return RelationalStructure.graph(M.m, comparability_graph(M).edges, colors)


_ORIENTED = {("L2", "L1"), ("L3", "L2"), ("L3", "L1")}


def _crown_color(G: RelationalStructure, v: int) -> str:
    found = [name for name in CROWN_COLORS if v in G.unary.get(name, ())]
    if len(found) != 1:
        raise NotACrownError(f"Vertex {v} has colors {found}; L1, L2, L3 must partition the vertices")
    return found[0]


def from_colored_graph(G: RelationalStructure) -> PartialPreorder:
    """a < b iff E(a, b) and the color pair is (L2, L1), (L3, L2) or (L3, L1)."""
    if EDGE not in G.binary:
        raise NotACrownError("Colored graph has no edge relation E")
    color = [_crown_color(G, v) for v in range(G.size)]
    matrix = np.eye(G.size, dtype=bool)
    for u, v in G.edges():
        if (color[u], color[v]) in _ORIENTED:
            matrix[u, v] = True
        elif (color[v], color[u]) in _ORIENTED:
            matrix[v, u] = True
        else:
            raise NotACrownError(f"Edge ({u}, {v}) joins {color[u]} and {color[v]}")
    R = close(matrix)
    if not is_partial_order(R):
        raise NotACrownError("The oriented colored graph does not close to a partial order")
    return R


# --- Inter-definability ---

ORDER_FROM_GRAPH = "E(a, b) & (L2(a) & L1(b) | L3(a) & L2(b) | L3(a) & L1(b))"
ORDER_FROM_GRAPH_LITERAL = "E(a, b) & (L2(a) & L1(b) | L3(a) & L2(b) | (L3(a) | L1(b)))"
GRAPH_FROM_ORDER = {
    "E": "a < b | b < a",
    # L3 lies under a chain of length 2; L1 is maximal but not minimal
    "L3": "exists c. exists d. a < c & c < d",
    "L2": "(exists c. a < c) & !(exists c. exists d. a < c & c < d)",
    "L1": "(exists c. c < a) & !(exists c. a < c)",
}


def order_definition(literal: bool = False) -> Sentence:
    """Formula in a, b over E, L1..L3 defining a < b."""
    return parse_sentence(ORDER_FROM_GRAPH_LITERAL if literal else ORDER_FROM_GRAPH)


def graph_definitions() -> Dict[str, Sentence]:
    """Formulas over <= defining E (in a, b) and L1..L3 (in a)."""
    return {name: parse_sentence(text) for name, text in GRAPH_FROM_ORDER.items()}


def check_interdefinability(M: PartialPreorder, literal: bool = False) -> bool:
    """Both directions of the definitions agree with M and G_M on every element and pair."""
    G = to_colored_graph(M)
    graph_side = G.interpretation()
    order_side = RelationalStructure.from_order(M).interpretation()
    to_order = order_definition(literal)
    definitions = graph_definitions()
    for a in range(M.m):
        for name in CROWN_COLORS:
            if holds(definitions[name], order_side, {"a": a}) != (a in G.unary[name]):
                logger.info(f"{name} definition fails at element {a}")
                return False
        for b in range(M.m):
            env = {"a": a, "b": b}
            if holds(to_order, graph_side, env) != strict_less(M, a, b):
                logger.info(f"Order definition fails at ({a}, {b})")
                return False
            if holds(definitions["E"], order_side, env) != bool(G.binary[EDGE][a, b]):
                logger.info(f"Edge definition fails at ({a}, {b})")
                return False
    return True

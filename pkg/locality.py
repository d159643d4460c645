# locality.py
"""
Ehrenfeucht-Fraisse games, r-neighborhood types, Hanf-style type matching,
and the edge swap that splits a colored crown cycle into two cycles while
preserving every r-neighborhood type.
"""

import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from itertools import permutations, product
from math import factorial, prod
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from config import CANONICAL_VERTEX_CAP, EF_SIZE_CAPS, ef_size_cap
from crowns import (
    RelationalStructure,
    cycle_order,
    decompose_crown_family,
    from_colored_graph,
    is_extended_double_crown,
    same_signature,
    to_colored_graph,
)
from errors import CapExceededError, NoSwapPairError, NotACrownError, WorkbenchError
from orders import PartialPreorder, is_regular_disconnected

logger = logging.getLogger(__name__)

SPOILER = "Spoiler"
DUPLICATOR = "Duplicator"
PERMUTATION_CAP = 200_000


@dataclass(frozen=True)
class GameParameters:
    """q rounds, ell extension colors; radius and neighborhood-type budget derived from them."""
    q: int
    ell: int = 1

    def __post_init__(self):
        if self.q < 0 or self.ell < 0:
            raise WorkbenchError(f"Need q >= 0 and ell >= 0, got q={self.q}, ell={self.ell}")

    @property
    def r(self) -> int:
        return (3 ** self.q - 1) // 2

    @property
    def T(self) -> int:
        return 2 * 2 ** (self.ell * (2 * self.r + 1))

    @property
    def cycle_bound(self) -> int:
        return (4 * self.r + 4) * self.T

    @property
    def separation(self) -> int:
        """Minimum cycle distance between the two swapped vertices."""
        return max(2 * self.r + 2, 4)

    def to_dict(self) -> Dict[str, int]:
        return {"q": self.q, "r": self.r, "ell": self.ell, "T": self.T, "cycle_bound": self.cycle_bound}


# --- Ehrenfeucht-Fraisse games ---

@dataclass(frozen=True)
class GameMove:
    round: int
    side: str           # structure Spoiler picks in: "left" or "right"
    spoiler: int
    duplicator: int


@dataclass(frozen=True)
class GameResult:
    winner: str
    q: int
    trace: Tuple[GameMove, ...] = ()

    @property
    def duplicator_wins(self) -> bool:
        return self.winner == DUPLICATOR


class _TypeSolver:
    """Rank-k types of element tuples, interned so both structures share ids.

    type_0(t) is the atomic type of t; type_k(t) pairs it with the set of
    type_{k-1}(t c) over all elements c. Duplicator wins the k-round game
    from (t1, t2) iff type_k(t1) == type_k(t2).
    """

    def __init__(self, structures: Sequence[RelationalStructure]):
        self.structures = structures
        _, relations = structures[0].signature()
        self.colors = [
            [S.color_signature(v) for v in range(S.size)] for S in structures
        ]
        self.matrices = [[S.binary[name] for name in relations] for S in structures]
        self._intern: Dict[Hashable, int] = {}
        self._memo: Dict[Tuple[int, Tuple[int, ...], int], int] = {}

    def intern(self, key: Hashable) -> int:
        return self._intern.setdefault(key, len(self._intern))

    def extend_atomic(self, side: int, prefix: Tuple[int, ...], atom: int, c: int) -> int:
        matrices = self.matrices[side]
        links = tuple((c == a, *(bool(M[a, c]) for M in matrices), *(bool(M[c, a]) for M in matrices)) for a in prefix)
        loops = tuple(bool(M[c, c]) for M in matrices)
        return self.intern(("atom", atom, self.colors[side][c], loops, links))

    def rank_type(self, side: int, prefix: Tuple[int, ...], atom: int, k: int) -> int:
        if k == 0:
            return atom
        key = (side, prefix, k)
        if key not in self._memo:
            children = frozenset(self.child_types(side, prefix, atom, k))
            self._memo[key] = self.intern(("type", k, atom, children))
        return self._memo[key]

    def child_types(self, side: int, prefix: Tuple[int, ...], atom: int, k: int) -> List[int]:
        """type_{k-1}(prefix c) for every element c, indexed by c."""
        size = self.structures[side].size
        return [
            self.rank_type(side, prefix + (c,), self.extend_atomic(side, prefix, atom, c), k - 1)
            for c in range(size)
        ]

    def spoiler_line(self, q: int) -> Tuple[GameMove, ...]:
        """One winning Spoiler line, following Duplicator's smallest-index response each round.

        Other responses lose as well; the line is a witness, not the whole strategy tree.
        """
        moves = []
        prefixes: List[Tuple[int, ...]] = [(), ()]
        atoms = [self.intern("empty"), self.intern("empty")]
        for k in range(q, 0, -1):
            if atoms[0] != atoms[1]:
                break
            children = [self.child_types(side, prefixes[side], atoms[side], k) for side in (0, 1)]
            for side in (0, 1):
                other = set(children[1 - side])
                missing = [c for c, t in enumerate(children[side]) if t not in other]
                if missing:
                    break
            if self.structures[1 - side].size == 0:
                moves.append(GameMove(q - k + 1, "left" if side == 0 else "right", missing[0], -1))
                break
            pick, response = missing[0], 0
            picks = [0, 0]
            picks[side], picks[1 - side] = pick, response
            moves.append(GameMove(q - k + 1, "left" if side == 0 else "right", pick, response))
            atoms = [self.extend_atomic(s, prefixes[s], atoms[s], picks[s]) for s in (0, 1)]
            prefixes = [prefixes[s] + (picks[s],) for s in (0, 1)]
        return tuple(moves)


def _check_game_caps(S1: RelationalStructure, S2: RelationalStructure, q: int, caps: Optional[Dict[int, Optional[int]]]) -> None:
    table = EF_SIZE_CAPS if caps is None else caps
    if q < 0:
        raise WorkbenchError(f"Number of rounds must be >= 0, got {q}")
    if q not in table:
        raise CapExceededError(f"No exact EF solving beyond q={max(table)}")
    cap = ef_size_cap(q, table)
    size = max(S1.size, S2.size)
    if cap is not None and size > cap:
        raise CapExceededError(f"EF game with q={q} is capped at {cap} elements, got {size}")


def ef_game(
    S1: RelationalStructure,
    S2: RelationalStructure,
    q: int,
    caps: Optional[Dict[int, Optional[int]]] = None,
    trace: bool = True,
) -> GameResult:
    """
    Solve the q-round Ehrenfeucht-Fraisse game exactly.

    Args:
        S1: Left structure
        S2: Right structure over the same signature
        q: Number of rounds
        caps: Per-round universe-size caps overriding EF_SIZE_CAPS
        trace: Whether a Spoiler win should carry a winning line

    Returns:
        GameResult naming the winner; a Spoiler win carries one losing line for Duplicator
    """
    same_signature(S1, S2)
    _check_game_caps(S1, S2, q, caps)
    solver = _TypeSolver([S1, S2])
    empty = solver.intern("empty")
    left = solver.rank_type(0, (), empty, q)
    right = solver.rank_type(1, (), empty, q)
    if left == right:
        return GameResult(DUPLICATOR, q)
    moves = solver.spoiler_line(q) if trace else ()
    logger.debug(f"Spoiler wins the {q}-round game in {len(moves)} moves")
    return GameResult(SPOILER, q, moves)


def q_equivalent(S1: RelationalStructure, S2: RelationalStructure, q: int, caps: Optional[Dict[int, Optional[int]]] = None) -> bool:
    return ef_game(S1, S2, q, caps, trace=False).duplicator_wins


# --- Neighborhoods ---

@dataclass(frozen=True, eq=False)
class Neighborhood:
    root: int
    vertices: Tuple[int, ...]
    structure: RelationalStructure


def ball(G: RelationalStructure, v: int, r: int) -> Dict[int, int]:
    """Vertices within Gaifman distance r of v, with their distances."""
    if not 0 <= v < G.size:
        raise WorkbenchError(f"Vertex {v} out of range 0..{G.size - 1}")
    return nx.single_source_shortest_path_length(G.gaifman_graph(), v, cutoff=r)


def r_neighborhood(G: RelationalStructure, v: int, r: int) -> Neighborhood:
    """Induced substructure on the r-ball, vertices ordered by (distance, id); the root is index 0."""
    distances = ball(G, v, r)
    vertices = tuple(sorted(distances, key=lambda u: (distances[u], u)))
    return Neighborhood(0, vertices, G.induced(vertices))


def _arc_code(S: RelationalStructure, graph: nx.Graph, root: int) -> Tuple:
    sig = S.color_signature
    neighbours = sorted(graph.neighbors(root))
    if all(graph.degree(u) == 2 for u in graph.nodes) and nx.is_connected(graph) and S.size >= 3:
        forward = cycle_order(graph, graph.nodes)
        start = forward.index(root)
        rotated = forward[start:] + forward[:start]
        backward = (rotated[0],) + tuple(reversed(rotated[1:]))
        return ("cycle", min(tuple(map(sig, rotated)), tuple(map(sig, backward))))
    arms = []
    for first in neighbours:
        arm, previous, current = [first], root, first
        while True:
            following = [u for u in graph.neighbors(current) if u != previous]
            if not following:
                break
            previous, current = current, following[0]
            arm.append(current)
        arms.append(tuple(map(sig, arm)))
    return ("path", sig(root), tuple(sorted(arms)))


def _refine(S: RelationalStructure, root: int) -> List[int]:
    """Isomorphism-invariant colour classes of a rooted structure (WL refinement)."""
    _, relations = S.signature()
    matrices = [S.binary[name] for name in relations]
    initial = [(v == root, S.color_signature(v), tuple(bool(M[v, v]) for M in matrices)) for v in range(S.size)]
    initial_ranks = {s: i for i, s in enumerate(sorted(set(initial)))}
    colour = [initial_ranks[s] for s in initial]
    while True:
        signatures = [
            (
                colour[v],
                tuple(
                    (tuple(sorted(colour[u] for u in np.flatnonzero(M[v]))), tuple(sorted(colour[u] for u in np.flatnonzero(M[:, v]))))
                    for M in matrices
                ),
            )
            for v in range(S.size)
        ]
        ranks = {s: i for i, s in enumerate(sorted(set(signatures)))}
        refined = [ranks[s] for s in signatures]
        if len(set(refined)) == len(set(colour)):
            return refined
        colour = refined


def _labeling_code(S: RelationalStructure, root: int) -> Tuple:
    if S.size > CANONICAL_VERTEX_CAP:
        raise CapExceededError(
            f"Canonical labeling is capped at {CANONICAL_VERTEX_CAP} vertices, neighborhood has {S.size}"
        )
    names, relations = S.signature()
    matrices = [S.binary[name] for name in relations]
    classes = _refine(S, root)
    cells = defaultdict(list)
    for v, c in enumerate(classes):
        cells[c].append(v)
    ordered = [cells[c] for c in sorted(cells)]
    orderings = prod(factorial(len(cell)) for cell in ordered)
    if orderings > PERMUTATION_CAP:
        raise CapExceededError(f"Neighborhood has {orderings} candidate labelings (cap {PERMUTATION_CAP})")
    best = None
    for choice in product(*(permutations(cell) for cell in ordered)):
        order = [v for part in choice for v in part]
        code = (
            tuple((v == root, S.color_signature(v)) for v in order),
            tuple(tuple(bool(M[u, v]) for u in order for v in order) for M in matrices),
        )
        if best is None or code < best:
            best = code
    return ("general", tuple(len(cell) for cell in ordered), names, relations, best)


def neighborhood_type(G: RelationalStructure, v: int, r: int) -> Tuple:
    """Canonical code of the rooted r-neighborhood of v (equal codes iff isomorphic)."""
    nb = r_neighborhood(G, v, r)
    S = nb.structure
    if S.is_symmetric_graph():
        graph = S.gaifman_graph()
        if max((d for _, d in graph.degree), default=0) <= 2:
            return _arc_code(S, graph, nb.root)
    return _labeling_code(S, nb.root)


def hanf_check(S1: RelationalStructure, S2: RelationalStructure, r: int) -> Optional[Dict[int, int]]:
    """
    Match the r-neighborhood types of two structures.

    Args:
        S1: Left structure
        S2: Right structure of the same size and signature
        r: Neighborhood radius

    Returns:
        A type-preserving bijection from S1 to S2, or None when the type multisets differ
    """
    if S1.size != S2.size:
        raise WorkbenchError(f"No bijection between {S1.size} and {S2.size} elements")
    same_signature(S1, S2)
    types1 = [neighborhood_type(S1, v, r) for v in range(S1.size)]
    types2 = [neighborhood_type(S2, v, r) for v in range(S2.size)]
    if Counter(types1) != Counter(types2):
        return None
    pool = defaultdict(list)
    for v, t in enumerate(types2):
        pool[t].append(v)
    taken = defaultdict(int)
    bijection = {}
    for v, t in enumerate(types1):
        bijection[v] = pool[t][taken[t]]
        taken[t] += 1
    return bijection


# --- Edge swap ---

@dataclass(frozen=True, eq=False)
class SwapResult:
    structure: RelationalStructure
    a: int
    a_succ: int
    b: int
    b_succ: int
    parameters: GameParameters

    def to_dict(self) -> Dict[str, int]:
        return {"a": self.a, "a_succ": self.a_succ, "b": self.b, "b_succ": self.b_succ}


def _check_colored_cycle(C: RelationalStructure) -> Tuple[int, ...]:
    if not C.is_symmetric_graph():
        raise NotACrownError("Expected an undirected colored graph")
    graph = C.gaifman_graph()
    if C.size < 4 or any(d != 2 for _, d in graph.degree) or not nx.is_connected(graph):
        raise NotACrownError("Expected a single cycle")
    upper, lower = C.unary.get("L1", frozenset()), C.unary.get("L2", frozenset())
    for v in range(C.size):
        if (v in upper) == (v in lower):
            raise NotACrownError(f"Vertex {v} must carry exactly one of L1, L2")
    for u, v in graph.edges:
        if (u in upper) == (v in upper):
            raise NotACrownError(f"Edge ({u}, {v}) does not alternate between L1 and L2")
    return cycle_order(graph, graph.nodes)


def oriented_window(C: RelationalStructure, order: Sequence[int], position: int, r: int) -> Tuple:
    """Color signatures from r steps behind to r steps ahead along the orientation."""
    L = len(order)
    return tuple(C.color_signature(order[(position + d) % L]) for d in range(-r, r + 1))


def swap_construction(C: RelationalStructure, q: int, ell: int) -> SwapResult:
    """Split an alternating colored cycle into two cycles by swapping two far-apart edges.

    a, b: the lexicographically smallest vertex pair at cycle distance
    >= 2r+2 with equal oriented r-windows; a', b' their successors.
    Edges {a, a'} and {b, b'} are replaced by {a, b'} and {b, a'}.
    """
    params = GameParameters(q, ell)
    order = _check_colored_cycle(C)
    L = len(order)
    if L < params.cycle_bound:
        logger.warning(
            f"Cycle of length {L} is below the bound {params.cycle_bound} for q={q}, ell={ell}; "
            f"a swap pair may not exist"
        )
    r, gap = params.r, params.separation
    position = {v: i for i, v in enumerate(order)}
    windows = {v: oriented_window(C, order, position[v], r) for v in order}
    by_window = defaultdict(list)
    for v in range(C.size):
        by_window[windows[v]].append(v)

    for a in range(C.size):
        for b in by_window[windows[a]]:
            if b <= a:
                continue
            d = abs(position[a] - position[b])
            if min(d, L - d) >= gap:
                a_succ = order[(position[a] + 1) % L]
                b_succ = order[(position[b] + 1) % L]
                edges = [e for e in C.edges() if set(e) not in ({a, a_succ}, {b, b_succ})]
                edges += [(a, b_succ), (b, a_succ)]
                logger.info(f"Swapping edges ({a}, {a_succ}) and ({b}, {b_succ})")
                return SwapResult(C.with_edges(edges), a, a_succ, b, b_succ, params)
    raise NoSwapPairError(
        f"No two vertices at cycle distance >= {gap} share an r-neighborhood (r={r}, length {L})"
    )


@dataclass(frozen=True, eq=False)
class SplitReport:
    verdict: bool
    parameters: GameParameters
    original: PartialPreorder
    result: Optional[PartialPreorder]
    swap: Optional[SwapResult]
    checks: Dict[str, bool] = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {
            "verdict": self.verdict,
            "parameters": self.parameters.to_dict(),
            "size": self.original.m,
            "swap": self.swap.to_dict() if self.swap else None,
            "checks": dict(self.checks),
        }


def verify_crown_split(
    M1: PartialPreorder,
    q: int,
    ell: int,
    extension: Sequence[Sequence[int]],
    caps: Optional[Dict[int, Optional[int]]] = None,
) -> SplitReport:
    """From an extended crown and an extension, build an extended double crown of the same
    size whose extended colored graph is q-equivalent to the original one.
    """
    if len(extension) != ell:
        raise WorkbenchError(f"Expected {ell} extension sets, got {len(extension)}")
    params = GameParameters(q, ell)
    d = decompose_crown_family(M1)
    if len(d.cycles) != 1 or d.bottoms < 1:
        raise NotACrownError("The split starts from an extended crown (one crown, at least one bottom)")
    logger.info("=" * 60)
    logger.info(f"Splitting extended crown s={d.widths[0]} with {d.bottoms} bottoms, {params.to_dict()}")
    cycle_length = len(d.cycles[0])
    if cycle_length < params.cycle_bound:
        logger.warning(f"Cycle length {cycle_length} is below the bound {params.cycle_bound}")

    G1 = to_colored_graph(M1, extension)
    cycle_vertices = sorted(v for v in range(M1.m) if v not in d.L3)
    C1 = G1.induced(cycle_vertices).without_colors(["L3"])
    swap = swap_construction(C1, q, ell)

    bottom_edges = [(u, v) for u in d.L3 for v in cycle_vertices]
    cycle_edges = [(cycle_vertices[u], cycle_vertices[v]) for u, v in swap.structure.edges()]
    G2 = G1.with_edges(cycle_edges + bottom_edges)
    M2 = from_colored_graph(G2)
    swap = SwapResult(G2, *(cycle_vertices[v] for v in (swap.a, swap.a_succ, swap.b, swap.b_succ)), params)

    checks = {
        "same_size": M2.m == M1.m,
        "extended_double_crown": is_extended_double_crown(M2),
        "regular_disconnected": is_regular_disconnected(M2),
        "q_equivalent": q_equivalent(G1, G2, q, caps),
    }
    verdict = all(checks.values())
    logger.info(f"Split verdict: {verdict} {checks}")
    logger.info("=" * 60)
    return SplitReport(verdict, params, M1, M2, swap, checks)

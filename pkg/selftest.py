# selftest.py - Acceptance suite: property and oracle checks across every module
import logging
import time
from dataclasses import dataclass
from itertools import permutations
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from crowns import RelationalStructure, build_crown, build_double_crown, extend_with_bottom, get_family
from first_order import parse_sentence
from locality import DUPLICATOR, SPOILER, GameParameters, ef_game, hanf_check, q_equivalent, verify_crown_split
from logic_core import ModelSet, all_model_sets, formula_of, models, random_model_set
from mso import check_prop_equivalence, translate
from orders import chain, is_ranked, random_regular_preorder, regular_preorders, relabel
from postulates import BUILTIN_POSTULATES, PARTIAL_ORDER_SOUND, get_postulate, random_postulate, satisfies, tuple_at
from revision import FaithfulStructure, is_representable, operator_table, reconstruct_order

logger = logging.getLogger(__name__)

GOLDEN_TRANSLATION = Path(__file__).parent / "tests" / "golden" / "agm_subexpansion_translation.txt"
SUBEXPANSION = "agm-subexpansion"


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    checked: int
    failures: int
    seconds: float = 0.0
    detail: str = ""

    def to_dict(self) -> Dict:
        return {
            "criterion": self.number,
            "name": self.name,
            "passed": self.passed,
            "checked": self.checked,
            "failures": self.failures,
            "seconds": round(self.seconds, 3),
            "detail": self.detail,
        }


def _labelings(m: int, quick: bool) -> List[Tuple[int, ...]]:
    if quick:
        return [tuple(range(m)), tuple(reversed(range(m)))]
    return list(permutations(range(m)))


# --- 1. Logic round trip ---

def check_logic_roundtrip(seed: int, quick: bool = False) -> CriterionResult:
    """models(formula_of(A)) == A on every set at n = 2 and on random sets at n = 3."""
    checked = failures = 0
    for A in all_model_sets(2):
        checked += 1
        failures += models(formula_of(A), 2) != A
    rng = np.random.default_rng(seed)
    for _ in range(32 if quick else 256):
        A = random_model_set(3, rng)
        checked += 1
        failures += models(formula_of(A), 3) != A
    return CriterionResult(1, "logic round trip", failures == 0, checked, failures)


# --- 2. Minimization soundness ---

def check_minimization_soundness(quick: bool = False) -> CriterionResult:
    """Sound postulates pass on every regular preorder of size 4 and every labeling;
    sub-expansion passes exactly on the ranked ones."""
    sound = [get_postulate(name) for name in PARTIAL_ORDER_SOUND]
    subexpansion = get_postulate(SUBEXPANSION)
    checked = failures = 0
    first = ""
    for R in regular_preorders(4):
        ranked = is_ranked(R)
        for labels in _labelings(4, quick):
            F = FaithfulStructure.create(R, labels)
            op = operator_table(F)
            for P in sound:
                checked += 1
                verdict = satisfies(op, F.kb, P)
                if not verdict.holds:
                    failures += 1
                    first = first or f"{P} fails on {R.pairs()} with labels {list(labels)}"
            checked += 1
            if satisfies(op, F.kb, subexpansion).holds != ranked:
                failures += 1
                first = first or f"{SUBEXPANSION} disagrees with rankedness on {R.pairs()}"
    return CriterionResult(2, "minimization soundness", failures == 0, checked, failures, detail=first)


# --- 3. Translation equivalence ---

def check_translation_equivalence(seed: int, quick: bool = False) -> CriterionResult:
    """Direct evaluation and the translated sentence agree on structures and random postulates."""
    checked = failures = 0
    first = ""
    postulates = [get_postulate(name) for name in BUILTIN_POSTULATES]
    pool = regular_preorders(4)
    if quick:
        pool = pool[::8]
    for R in pool:
        F = FaithfulStructure.create(R)
        for P in postulates:
            base = 1 << (1 << F.n)
            for index in range(base ** P.ell):
                phis = [ModelSet(F.n, mask) for mask in tuple_at(index, base, P.ell)]
                checked += 1
                if not check_prop_equivalence(F, P, phis):
                    failures += 1
                    first = first or f"{P} on {R.pairs()} at {[str(phi) for phi in phis]}"
    rng = np.random.default_rng(seed)
    for _ in range(100 if quick else 1000):
        R = random_regular_preorder(4, rng)
        F = FaithfulStructure.create(R, [int(u) for u in rng.permutation(4)])
        P = random_postulate(rng, ell=2, depth=4)
        phis = [random_model_set(F.n, rng) for _ in range(P.ell)]
        checked += 1
        if not check_prop_equivalence(F, P, phis):
            failures += 1
            first = first or f"random postulate {P.text} on {R.pairs()}"
    return CriterionResult(3, "translation equivalence", failures == 0, checked, failures, detail=first)


# --- 4. Reconstruction ---

def check_reconstruction(quick: bool = False) -> CriterionResult:
    """The order read off the table is the labeled copy of the original."""
    checked = failures = 0
    first = ""
    for R in regular_preorders(4, partial_orders_only=True):
        for labels in _labelings(4, quick):
            F = FaithfulStructure.create(R, labels)
            checked += 1
            if reconstruct_order(operator_table(F), verify="full") != relabel(R, labels):
                failures += 1
                first = first or f"{R.pairs()} with labels {list(labels)}"
    return CriterionResult(4, "reconstruction uniqueness", failures == 0, checked, failures, detail=first)


# --- 5. Golden translation ---

def check_golden_translation() -> CriterionResult:
    expected = parse_sentence(GOLDEN_TRANSLATION.read_text())
    passed = translate(get_postulate(SUBEXPANSION)) == expected
    return CriterionResult(5, "golden translation", passed, 1, int(not passed))


# --- 6. EF sanity ---

def cycles(lengths: Sequence[int], colors: Optional[Sequence[int]] = None, color: str = "C") -> RelationalStructure:
    """Disjoint cycles; colors[i] (0/1) decides membership of vertex i in the given color."""
    edges, offset = [], 0
    for L in lengths:
        edges += [(offset + i, offset + (i + 1) % L) for i in range(L)]
        offset += L
    members = [v for v in range(offset) if colors is not None and colors[v]]
    return RelationalStructure.graph(offset, edges, {color: members})


def paths(lengths: Sequence[int], colors: Optional[Sequence[int]] = None, color: str = "C") -> RelationalStructure:
    edges, offset = [], 0
    for L in lengths:
        edges += [(offset + i, offset + i + 1) for i in range(L - 1)]
        offset += L
    members = [v for v in range(offset) if colors is not None and colors[v]]
    return RelationalStructure.graph(offset, edges, {color: members})


def random_structure(size: int, rng: np.random.Generator) -> RelationalStructure:
    edges = [(u, v) for u in range(size) for v in range(u + 1, size) if rng.random() < 0.4]
    colored = [v for v in range(size) if rng.random() < 0.5]
    return RelationalStructure.graph(size, edges, {"C": colored})


def permuted(S: RelationalStructure, perm: Sequence[int]) -> RelationalStructure:
    """Isomorphic copy with vertex v renamed perm[v]."""
    edges = [(perm[u], perm[v]) for u, v in S.edges()]
    colors = {name: [perm[v] for v in members] for name, members in S.unary.items()}
    return RelationalStructure.graph(S.size, edges, colors)


def check_ef_sanity(seed: int, quick: bool = False) -> CriterionResult:
    checked = failures = 0
    first = ""
    rng = np.random.default_rng(seed)
    for _ in range(3 if quick else 10):
        S = random_structure(int(rng.integers(3, 7)), rng)
        T = permuted(S, [int(v) for v in rng.permutation(S.size)])
        for q in range(4):
            checked += 1
            if not q_equivalent(S, T, q):
                failures += 1
                first = first or f"isomorphic copies separated at q={q}"
    expectations = [
        (cycles([6]), cycles([3, 3]), 2, DUPLICATOR),
        (cycles([6]), cycles([3, 3]), 3, SPOILER),
        (RelationalStructure.from_order(chain(2)), RelationalStructure.from_order(chain(3)), 2, SPOILER),
    ]
    for left, right, q, winner in expectations:
        checked += 1
        if ef_game(left, right, q).winner != winner:
            failures += 1
            first = first or f"expected {winner} at q={q} on sizes {left.size}/{right.size}"
    return CriterionResult(6, "EF solver sanity", failures == 0, checked, failures, detail=first)


# --- 7. Hanf direction ---

def hanf_corpus(seed: int, count: int = 50) -> List[Tuple[RelationalStructure, RelationalStructure, int]]:
    """Pairs of colored cycles/paths with q in {1, 2}; about half share neighborhood types."""
    rng = np.random.default_rng(seed)
    corpus = []
    while len(corpus) < count:
        q = int(rng.integers(1, 3))
        r = GameParameters(q).r
        period = int(rng.integers(1, 4))
        pattern = [int(b) for b in rng.integers(0, 2, size=period)]
        repeats = -(-(2 * r + 2) // period)
        L = period * repeats
        kind = len(corpus) % 4
        if kind == 0:
            left = cycles([2 * L], pattern * (2 * repeats))
            right = cycles([L, L], pattern * (2 * repeats))
        elif kind == 1:
            colors = [int(b) for b in rng.integers(0, 2, size=2 * L)]
            left = cycles([2 * L], colors)
            right = permuted(left, [int(v) for v in rng.permutation(2 * L)])
        elif kind == 2:
            size = int(rng.integers(4, 12))
            left = paths([size], [int(b) for b in rng.integers(0, 2, size=size)])
            right = paths([size], [int(b) for b in rng.integers(0, 2, size=size)])
        else:
            left = cycles([2 * L], pattern * (2 * repeats))
            right = paths([2 * L], pattern * (2 * repeats))
        corpus.append((left, right, q))
    return corpus


def check_hanf_direction(seed: int, quick: bool = False) -> CriterionResult:
    checked = failures = matched = 0
    first = ""
    for left, right, q in hanf_corpus(seed, 12 if quick else 50):
        checked += 1
        if hanf_check(left, right, GameParameters(q).r) is None:
            continue
        matched += 1
        if not q_equivalent(left, right, q):
            failures += 1
            first = first or f"types match at q={q} but the game separates sizes {left.size}"
    return CriterionResult(
        7, "Hanf direction", failures == 0, checked, failures, detail=first or f"{matched} pairs matched"
    )


# --- 8. Crown split ---

def check_crown_split(seed: int, quick: bool = False) -> CriterionResult:
    """q = 1, ell = 1 on crown(64) extended by 128 bottoms."""
    M1 = extend_with_bottom(build_crown(64), 128)
    rng = np.random.default_rng(seed)
    checked = failures = 0
    first = ""
    for _ in range(2 if quick else 10):
        extension = [[int(v) for v in np.flatnonzero(rng.integers(0, 2, size=M1.m))]]
        report = verify_crown_split(M1, q=1, ell=1, extension=extension)
        checked += 1
        if not report.verdict:
            failures += 1
            first = first or f"checks {report.checks}"
    return CriterionResult(8, "crown split pipeline", failures == 0, checked, failures, detail=first)


# --- 9. Family separation ---

def check_family_separation(seed: int, quick: bool = False) -> CriterionResult:
    """Extended double crowns vs extended crowns at 16 elements, sampled verification."""
    rng = np.random.default_rng(seed)
    samples = 100 if quick else 1000
    double = extend_with_bottom(build_double_crown(3, 3), 4)
    single = extend_with_bottom(build_crown(6), 4)
    cases = [
        (double, "regular-disconnected", True),
        (double, "extended-crown", False),
        (single, "extended-crown", True),
        (single, "regular-disconnected", False),
    ]
    checked = failures = 0
    first = ""
    for R, family, expected in cases:
        labels = [int(u) for u in rng.permutation(R.m)]
        op = operator_table(FaithfulStructure.create(R, labels))
        found = is_representable(op, get_family(family), verify="sample", samples=samples, seed=seed)
        checked += 1
        if (found is not None) != expected:
            failures += 1
            first = first or f"{family}: expected representable={expected}"
    return CriterionResult(9, "family separation", failures == 0, checked, failures, detail=first)


def _criteria(seed: int, quick: bool) -> List[Tuple[str, Callable[[], CriterionResult]]]:
    return [
        ("logic round trip", lambda: check_logic_roundtrip(seed, quick)),
        ("minimization soundness", lambda: check_minimization_soundness(quick)),
        ("translation equivalence", lambda: check_translation_equivalence(seed, quick)),
        ("reconstruction uniqueness", lambda: check_reconstruction(quick)),
        ("golden translation", check_golden_translation),
        ("EF solver sanity", lambda: check_ef_sanity(seed, quick)),
        ("Hanf direction", lambda: check_hanf_direction(seed, quick)),
        ("crown split pipeline", lambda: check_crown_split(seed, quick)),
        ("family separation", lambda: check_family_separation(seed, quick)),
    ]


def run_selftest(seed: int = 0, quick: bool = False, only: Optional[Sequence[int]] = None) -> pd.DataFrame:
    """Run the acceptance criteria and return one summary row per criterion."""
    logger.info("=" * 60)
    logger.info(f"Starting selftest (seed={seed}, quick={quick})")
    rows = []
    for number, (name, check) in enumerate(_criteria(seed, quick), start=1):
        if only and number not in only:
            continue
        logger.info(f"Criterion {number}: {name}")
        started = time.perf_counter()
        result = check()
        result.seconds = time.perf_counter() - started
        level = logging.INFO if result.passed else logging.ERROR
        logger.log(level, f"Criterion {number} {'passed' if result.passed else 'FAILED'} "
                          f"({result.checked} checks, {result.failures} failures, {result.seconds:.1f}s)")
        rows.append(result.to_dict())
    summary = pd.DataFrame(rows, columns=["criterion", "name", "passed", "checked", "failures", "seconds", "detail"])
    logger.info(f"Selftest finished: {int(summary['passed'].sum())}/{len(summary)} criteria passed")
    logger.info("=" * 60)
    return summary

from itertools import count, permutations

import numpy as np
import pytest

from errors import CapExceededError, PostulateError, WorkbenchError
from first_order import Bicond, Cond, Conj, Disj, Exists, Forall, Neg, substitute
from logic_core import And, ModelSet, Var, random_model_set
from orders import chain, is_ranked, random_regular_preorder, regular_preorders
from postulates import (
    BUILTIN_POSTULATES,
    PARTIAL_ORDER_SOUND,
    eval_instance,
    first_failure,
    get_postulate,
    parse_postulate,
    postulate_from_body,
    random_postulate,
    satisfies,
    tuple_at,
)
from revision import FaithfulStructure, RevisionOperator, operator_table


def S(*members, n=2):
    return ModelSet.from_members(n, members)


@pytest.fixture
def chain_operator(chain4):
    F = FaithfulStructure.create(chain4)
    return operator_table(F), F.kb


def test_parse_postulate_infers_ell_and_mus():
    P = get_postulate("agm-subexpansion")
    assert P.ell == 2
    assert P.mus == (Var(1), And(Var(1), Var(2)))
    assert P.m == 2
    assert P.name == "agm-subexpansion"


def test_repeated_stars_are_deduplicated_syntactically():
    P = parse_postulate("forall x. Kstar[p1 & p2](x) -> Kstar[p2 & p1](x) | Kstar[p1 & p2](x)")
    assert P.mus == (And(Var(1), Var(2)), And(Var(2), Var(1)))


def test_ell_counts_indices_inside_stars():
    assert parse_postulate("forall x. Kstar[p3](x) -> K(x)").ell == 3
    assert get_postulate("faithful-probe").ell == 0


@pytest.mark.parametrize(
    "text",
    [
        "forall x. K(x) -> p1(y)",
        "forall x. A1(x)",
        "forall x. forall y. x <= y",
        "forall x. E(x, x)",
    ],
)
def test_invalid_postulates(text):
    with pytest.raises(PostulateError):
        parse_postulate(text)


def test_eval_instance(chain_operator):
    op, K = chain_operator
    P = get_postulate("inclusion")
    assert eval_instance(op, K, P, [S(1, 2)])
    with pytest.raises(PostulateError):
        eval_instance(op, K, P, [])
    with pytest.raises(WorkbenchError):
        eval_instance(op, K, P, [ModelSet.full(3)])


def test_eval_instance_sees_a_broken_operator():
    broken = RevisionOperator.from_function(2, lambda phi: ~phi)
    assert not eval_instance(broken, S(0), get_postulate("inclusion"), [S(1, 2)])


def test_success_on_chain(chain_operator):
    op, K = chain_operator
    verdict = satisfies(op, K, get_postulate("agm-success"))
    assert verdict.holds
    assert verdict.checked == 16
    assert verdict.counterexample is None


def test_printed_success_fails_on_the_empty_formula(chain_operator):
    op, K = chain_operator
    verdict = satisfies(op, K, get_postulate("agm-success-printed"))
    assert not verdict
    assert verdict.counterexample == (ModelSet.empty(2),)
    assert verdict.checked == 1


def test_subexpansion_counterexample_on_unranked_order(unranked):
    F = FaithfulStructure.create(unranked)
    verdict = satisfies(operator_table(F), F.kb, get_postulate("agm-subexpansion"))
    assert not verdict.holds
    phi, psi = verdict.counterexample
    op = operator_table(F)
    revised = op(phi)
    assert revised & psi
    assert not op(phi & psi).issubset(revised & psi)


def test_subexpansion_holds_on_ranked_order(diamond):
    F = FaithfulStructure.create(diamond)
    assert satisfies(operator_table(F), F.kb, get_postulate("agm-subexpansion")).holds


def test_counterexample_is_lexicographically_first():
    broken = RevisionOperator.from_function(2, lambda phi: ~phi)
    verdict = satisfies(broken, S(0), get_postulate("inclusion"))
    # phi = {} maps to the full set, the first tuple already fails
    assert verdict.counterexample == (ModelSet.empty(2),)


def test_sampling_needs_a_seed(chain_operator):
    op, K = chain_operator
    with pytest.raises(WorkbenchError):
        satisfies(op, K, get_postulate("vacuity"), mode="sample")
    verdict = satisfies(op, K, get_postulate("vacuity"), mode="sample", samples=50, seed=11)
    assert verdict.holds and verdict.mode == "sample" and verdict.seed == 11
    assert verdict.checked == 50


def test_sampled_counterexamples_are_reproducible():
    broken = RevisionOperator.from_function(2, lambda phi: ~phi)
    P = get_postulate("superexpansion")
    first = satisfies(broken, S(0), P, mode="sample", samples=200, seed=5)
    second = satisfies(broken, S(0), P, mode="sample", samples=200, seed=5)
    assert first == second


def test_exhaustive_limit(chain_operator):
    op, K = chain_operator
    with pytest.raises(CapExceededError):
        satisfies(op, K, get_postulate("agm-subexpansion"), max_tuples=100)
    with pytest.raises(WorkbenchError):
        satisfies(op, K, get_postulate("vacuity"), mode="random")


def test_tuple_order():
    assert tuple_at(0, 16, 2) == (0, 0)
    assert tuple_at(1, 16, 2) == (0, 1)
    assert tuple_at(16, 16, 2) == (1, 0)
    assert tuple_at(255, 16, 2) == (15, 15)
    assert tuple_at(0, 16, 0) == ()


def _first_multiple_of_seven(lo, hi):
    for i in range(max(lo, 1), hi):
        if i % 7 == 0:
            return i
    return None


def test_first_failure_is_independent_of_jobs():
    assert first_failure(_first_multiple_of_seven, 100, jobs=1) == 7
    assert first_failure(_first_multiple_of_seven, 100, jobs=3) == 7
    assert first_failure(_first_multiple_of_seven, 6, jobs=2) is None


def test_parallel_and_serial_verdicts_agree(unranked):
    F = FaithfulStructure.create(unranked)
    op = operator_table(F)
    P = get_postulate("agm-subexpansion")
    assert satisfies(op, F.kb, P, jobs=1) == satisfies(op, F.kb, P, jobs=2)


def test_random_postulates_are_closed_and_seeded():
    a = random_postulate(np.random.default_rng(9))
    b = random_postulate(np.random.default_rng(9))
    assert a == b
    assert a.ell <= 2
    for seed in range(20):
        P = random_postulate(np.random.default_rng(seed), ell=2, depth=4)
        F = FaithfulStructure.create(chain(4))
        phis = [ModelSet.full(2)] * P.ell
        assert isinstance(eval_instance(operator_table(F), F.kb, P, phis), bool)


def test_library_names():
    assert set(PARTIAL_ORDER_SOUND) < set(BUILTIN_POSTULATES)
    for name in BUILTIN_POSTULATES:
        assert get_postulate(name).name == name
    assert get_postulate("forall x. K(x) -> K(x)").name is None


@pytest.mark.slow
def test_minimization_soundness_sweep():
    sound = [get_postulate(name) for name in PARTIAL_ORDER_SOUND]
    subexpansion = get_postulate("agm-subexpansion")
    for R in regular_preorders(4):
        for labels in permutations(range(4)):
            F = FaithfulStructure.create(R, labels)
            op = operator_table(F)
            for P in sound:
                assert satisfies(op, F.kb, P).holds, (P.name, R)
            assert satisfies(op, F.kb, subexpansion).holds == is_ranked(R)


def rename_bound(f, fresh):
    if isinstance(f, (Forall, Exists)):
        new = f"v{next(fresh)}"
        return type(f)(new, rename_bound(substitute(f.body, f.var, new), fresh))
    if isinstance(f, Neg):
        return Neg(rename_bound(f.arg, fresh))
    if isinstance(f, (Conj, Disj, Cond, Bicond)):
        return type(f)(rename_bound(f.left, fresh), rename_bound(f.right, fresh))
    return f


def double_negate(f):
    if isinstance(f, (Forall, Exists)):
        return type(f)(f.var, Neg(Neg(double_negate(f.body))))
    if isinstance(f, Neg):
        return Neg(double_negate(f.arg))
    if isinstance(f, (Conj, Disj, Cond, Bicond)):
        return type(f)(double_negate(f.left), double_negate(f.right))
    return f


@pytest.mark.parametrize("n", [1, 2])
def test_verdicts_ignore_renaming_and_double_negation(n):
    rng = np.random.default_rng(11)
    library = [get_postulate(name) for name in BUILTIN_POSTULATES]
    for i in range(60):
        P = library[i % len(library)] if i < 2 * len(library) else random_postulate(rng, ell=2, depth=4)
        renamed = postulate_from_body(rename_bound(P.body, count()))
        negated = postulate_from_body(Neg(Neg(double_negate(P.body))))
        assert renamed.ell == negated.ell == P.ell
        R = random_regular_preorder(1 << n, rng)
        F = FaithfulStructure.create(R, [int(u) for u in rng.permutation(1 << n)])
        op = operator_table(F)
        for _ in range(4):
            phis = [random_model_set(n, rng) for _ in range(P.ell)]
            expected = eval_instance(op, F.kb, P, phis)
            assert eval_instance(op, F.kb, renamed, phis) == expected
            assert eval_instance(op, F.kb, negated, phis) == expected

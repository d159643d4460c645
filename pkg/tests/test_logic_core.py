import numpy as np
import pytest

from errors import FormulaSyntaxError, VariableRangeError, WorkbenchError
from logic_core import (
    BOTTOM,
    TOP,
    And,
    Assignment,
    Iff,
    Implies,
    ModelSet,
    Not,
    Or,
    Var,
    all_model_sets,
    combine,
    evaluate,
    formula_of,
    models,
    parse_formula,
    random_model_set,
    render,
)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("x1 & !x2", And(Var(1), Not(Var(2)))),
        ("(x1 -> x2) | x1", Or(Implies(Var(1), Var(2)), Var(1))),
        ("x1 -> x2 -> x1", Implies(Var(1), Implies(Var(2), Var(1)))),
        ("x1 & x2 | x1", Or(And(Var(1), Var(2)), Var(1))),
        ("x1 <-> x2 <-> x1", Iff(Iff(Var(1), Var(2)), Var(1))),
        ("!!x1", Not(Not(Var(1)))),
        ("true | false", Or(TOP, BOTTOM)),
    ],
)
def test_parse_formula(text, expected):
    assert parse_formula(text, 2) == expected


def test_parse_rejects_variable_out_of_range():
    with pytest.raises(VariableRangeError):
        parse_formula("x3", 2)


@pytest.mark.parametrize("text", ["x1 &", "x1 x2", "(x1", "y1", ""])
def test_parse_reports_syntax_errors(text):
    with pytest.raises(FormulaSyntaxError):
        parse_formula(text, 2)


def test_assignment_encoding():
    a = Assignment(2, 1)
    assert a.value(1) is True
    assert a.value(2) is False
    assert str(a) == "x1=1,x2=0"
    with pytest.raises(VariableRangeError):
        a.value(3)
    with pytest.raises(WorkbenchError):
        Assignment(2, 4)


def test_models_of_simple_formulas():
    assert models(parse_formula("x1 & !x2", 2), 2).members() == [1]
    assert models(parse_formula("x2", 2), 2).members() == [2, 3]
    assert models(TOP, 2) == ModelSet.full(2)
    assert models(BOTTOM, 3) == ModelSet.empty(3)


def test_models_rejects_unknown_variables():
    with pytest.raises(VariableRangeError):
        models(Var(3), 2)


def test_formula_of_round_trip_n2():
    for A in all_model_sets(2):
        assert models(formula_of(A), 2) == A


def test_formula_of_round_trip_random_n3(rng):
    for _ in range(64):
        A = random_model_set(3, rng)
        assert models(formula_of(A), 3) == A


def test_formula_of_empty_set_is_false():
    assert formula_of(ModelSet.empty(2)) == BOTTOM


@pytest.mark.parametrize("text", ["x1 & !x2", "(x1 -> x2) | x3", "x1 <-> !x3", "!(x1 | x2) -> x3"])
def test_evaluate_agrees_with_truth_table(text):
    phi = parse_formula(text, 3)
    table = models(phi, 3)
    for u in range(8):
        assert evaluate(phi, Assignment(3, u)) == (u in table)


@pytest.mark.parametrize(
    "text", ["x1 & !x2", "(x1 -> x2) -> x1", "x1 -> (x2 -> x1)", "!(x1 & x2) | x2", "(x1 <-> x2) & true"]
)
def test_render_parses_back(text):
    phi = parse_formula(text, 2)
    assert parse_formula(render(phi), 2) == phi


def test_model_set_algebra():
    A = ModelSet.from_members(2, [0, 1])
    B = ModelSet.from_members(2, [1, 3])
    assert (A & B).members() == [1]
    assert (A | B).members() == [0, 1, 3]
    assert (~A).members() == [2, 3]
    assert len(A) == 2
    assert 1 in A and 2 not in A
    assert list(B) == [1, 3]
    assert A.issubset(A | B)
    assert not ModelSet.empty(2)
    assert str(B) == "{1, 3}"


def test_model_set_vectors():
    A = ModelSet.from_members(3, [0, 5, 7])
    vector = A.to_vector()
    assert vector.dtype == bool
    assert np.flatnonzero(vector).tolist() == [0, 5, 7]
    assert ModelSet.from_vector(3, vector) == A


def test_model_sets_of_different_n_do_not_mix():
    with pytest.raises(WorkbenchError):
        ModelSet.full(2) & ModelSet.full(3)


def test_combine_evaluates_boolean_combinations():
    A = ModelSet.from_members(2, [0, 1])
    B = ModelSet.from_members(2, [1, 3])
    assert combine(And(Var(1), Not(Var(2))), [A, B], 2) == A & ~B
    assert combine(Or(Var(2), BOTTOM), [A, B], 2) == B
    assert combine(Implies(Var(1), Var(2)), [A, B], 2) == ~A | B


def test_all_model_sets_count():
    assert sum(1 for _ in all_model_sets(2)) == 16


def random_formula(rng, n, depth):
    if depth == 0 or rng.random() < 0.25:
        return Var(int(rng.integers(1, n + 1))) if rng.random() < 0.9 else (TOP if rng.random() < 0.5 else BOTTOM)
    kind = int(rng.integers(5))
    if kind == 0:
        return Not(random_formula(rng, n, depth - 1))
    connective = (And, Or, Implies, Iff)[kind - 1]
    return connective(random_formula(rng, n, depth - 1), random_formula(rng, n, depth - 1))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_models_distributes_over_connectives(rng, n):
    for _ in range(100):
        phi, psi = random_formula(rng, n, 4), random_formula(rng, n, 4)
        assert models(And(phi, psi), n) == models(phi, n) & models(psi, n)
        assert models(Or(phi, psi), n) == models(phi, n) | models(psi, n)
        assert models(Not(phi), n) == ~models(phi, n)
        for u in range(1 << n):
            assert evaluate(phi, Assignment(n, u)) == (u in models(phi, n))

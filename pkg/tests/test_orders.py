import numpy as np
import pytest

from errors import CapExceededError, OrderValidationError, WorkbenchError
from orders import (
    PartialPreorder,
    antichain,
    chain,
    close,
    comparability_graph,
    dump_order,
    enumerate_preorders,
    from_pairs,
    incomparable,
    induced,
    is_antichain,
    is_partial_order,
    is_power_of_two,
    is_ranked,
    is_regular,
    is_regular_disconnected,
    is_total,
    load_order,
    minimal_elements,
    order_from_json,
    order_to_json,
    random_regular_preorder,
    regular_preorders,
    relabel,
    strict_less,
    to_dot,
    validate_preorder,
)


def test_validate_rejects_missing_reflexivity():
    with pytest.raises(OrderValidationError, match="Not reflexive"):
        validate_preorder([[True, True], [False, False]])


def test_validate_names_the_transitivity_violation():
    matrix = np.eye(3, dtype=bool)
    matrix[0, 1] = matrix[1, 2] = True
    with pytest.raises(OrderValidationError, match="0 <= 1 and 1 <= 2"):
        validate_preorder(matrix)


def test_validate_rejects_non_square_input():
    with pytest.raises(OrderValidationError):
        validate_preorder(np.ones((2, 3), dtype=bool))


def test_close_repairs_what_validate_rejects():
    matrix = np.zeros((3, 3), dtype=bool)
    matrix[0, 1] = matrix[1, 2] = True
    assert close(matrix) == chain(3)


def test_matrix_is_read_only(chain4):
    with pytest.raises(ValueError):
        chain4.leq[0, 0] = False


def test_partial_order_and_ties():
    tie = from_pairs(2, [(0, 1), (1, 0)])
    assert is_partial_order(chain(3))
    assert not is_partial_order(tie)
    assert not strict_less(tie, 0, 1)
    assert not incomparable(tie, 0, 1)


def test_strict_and_incomparable(diamond):
    assert strict_less(diamond, 0, 3)
    assert not strict_less(diamond, 3, 0)
    assert incomparable(diamond, 1, 2)
    with pytest.raises(WorkbenchError):
        diamond.le(0, 4)


def test_minimal_elements(diamond):
    assert minimal_elements(diamond) == {0}
    assert minimal_elements(diamond, {1, 2, 3}) == {1, 2}
    assert minimal_elements(diamond, set()) == frozenset()


def test_minimal_elements_with_ties():
    R = from_pairs(3, [(0, 1), (1, 0), (0, 2), (1, 2)])
    assert minimal_elements(R) == {0, 1}


def test_regularity(diamond):
    assert is_regular(diamond)
    assert is_regular(antichain(4))
    assert not is_regular(chain(3))
    two_chains = from_pairs(4, [(0, 1), (2, 3)])
    assert not is_regular(two_chains)


def test_regular_disconnected(diamond):
    fan = from_pairs(4, [(0, 1), (0, 2), (0, 3)])
    assert is_regular_disconnected(fan)
    assert not is_regular_disconnected(diamond)


def test_rankedness(diamond, unranked):
    assert is_ranked(diamond)
    assert is_ranked(chain(4))
    assert is_ranked(antichain(3))
    assert not is_ranked(unranked)


def test_totality_and_antichains():
    assert is_total(chain(3))
    assert not is_total(antichain(2))
    assert is_antichain(antichain(3))
    assert not is_antichain(chain(2))


def test_comparability_graph(diamond):
    graph = comparability_graph(diamond)
    assert sorted(graph.edges) == [(0, 1), (0, 2), (0, 3), (1, 3), (2, 3)]


@pytest.mark.parametrize("m, expected", [(1, 1), (2, 4), (3, 29), (4, 355)])
def test_enumerate_preorders_counts(m, expected):
    found = enumerate_preorders(m)
    assert len(found) == expected
    assert len(set(found)) == expected


def test_enumeration_is_capped():
    with pytest.raises(CapExceededError):
        enumerate_preorders(5)


def test_regular_preorder_counts():
    assert len(regular_preorders(4)) == 199
    assert len(regular_preorders(4, partial_orders_only=True)) == 99


def test_random_regular_preorder_is_seeded():
    first = random_regular_preorder(4, np.random.default_rng(3))
    second = random_regular_preorder(4, np.random.default_rng(3))
    assert first == second
    assert is_regular(first)


def test_relabel_renames_elements():
    reversed_chain = relabel(chain(3), [2, 1, 0])
    assert reversed_chain.le(2, 1) and reversed_chain.le(1, 0)
    assert not reversed_chain.le(0, 2)
    with pytest.raises(WorkbenchError):
        relabel(chain(3), [0, 0, 1])


def test_induced_suborder(diamond):
    sub = induced(diamond, [1, 2, 3])
    assert sub.m == 3
    assert sub.le(0, 2) and sub.le(1, 2)
    assert incomparable(sub, 0, 1)


def test_power_of_two():
    assert [m for m in range(1, 17) if is_power_of_two(m)] == [1, 2, 4, 8, 16]
    assert not is_power_of_two(0)


def test_json_round_trip(tmp_path, diamond):
    path = tmp_path / "diamond.json"
    dump_order(diamond, path)
    assert load_order(path) == diamond
    assert order_from_json(order_to_json(diamond)) == diamond


def test_json_implies_reflexivity_and_validates_transitivity():
    assert order_from_json({"size": 2, "leq": [[0, 1]]}) == chain(2)
    with pytest.raises(OrderValidationError):
        order_from_json({"size": 3, "leq": [[0, 1], [1, 2]]})
    with pytest.raises(WorkbenchError):
        order_from_json({"leq": []})


def test_dot_export(diamond):
    text = to_dot(comparability_graph(diamond), "D")
    assert text.startswith("graph D {")
    assert "  1 -- 3;" in text
    assert "1 -- 2" not in text


def test_equal_orders_hash_alike():
    assert hash(chain(3)) == hash(PartialPreorder(np.triu(np.ones((3, 3), dtype=bool))))

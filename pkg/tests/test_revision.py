from itertools import permutations

import pytest

from errors import (
    CapExceededError,
    FaithfulnessError,
    InconsistentPairError,
    NonTransitiveError,
    OperatorUndefinedError,
    TableMismatchError,
    WorkbenchError,
)
from logic_core import ModelSet, all_model_sets
from orders import (
    antichain,
    chain,
    from_pairs,
    is_regular,
    is_regular_disconnected,
    minimal_elements,
    regular_preorders,
    relabel,
)
from revision import (
    FaithfulStructure,
    RevisionOperator,
    check_faithful,
    dump_operator,
    is_representable,
    knowledge_base_of,
    load_operator,
    operator_from_json,
    operator_table,
    operator_view,
    reconstruct_order,
    revise,
)


def S(*members, n=2):
    return ModelSet.from_members(n, members)


def naive_revise(R, labels, phi):
    """t-images of the minimal elements of t^-1(phi), straight from the definition."""
    inverse = {u: a for a, u in enumerate(labels)}
    elements = {inverse[u] for u in phi}
    return S(*(labels[a] for a in minimal_elements(R, elements)), n=phi.n)


def test_create_defaults_to_minimal_images(chain4):
    F = FaithfulStructure.create(chain4)
    assert F.n == 2
    assert F.kb == S(0)
    assert F.labels == (0, 1, 2, 3)


def test_revise_chain(chain4):
    F = FaithfulStructure.create(chain4)
    assert revise(F, S(1, 2)) == S(1)
    assert revise(F, S(3)) == S(3)
    assert revise(F, ModelSet.full(2)) == F.kb
    assert revise(F, ModelSet.empty(2)) == ModelSet.empty(2)


def test_revise_respects_labels(diamond):
    labels = (3, 2, 1, 0)
    F = FaithfulStructure.create(diamond, labels)
    assert F.kb == S(3)
    # elements 1 and 2 carry assignments 2 and 1 and are incomparable
    assert revise(F, S(0, 1, 2)) == S(1, 2)
    for phi in all_model_sets(2):
        assert revise(F, phi) == naive_revise(diamond, labels, phi)


def test_revise_checks_n(chain4):
    F = FaithfulStructure.create(chain4)
    with pytest.raises(WorkbenchError):
        revise(F, ModelSet.full(3))


def test_check_faithful_reports_violations(chain4, diamond):
    assert check_faithful(chain4, (0, 1, 2, 3), S(0))
    report = check_faithful(chain4, (0, 1, 2, 3), S(1))
    assert not report
    assert report.witness == (0,)
    assert "minimal" in report.reason


def test_faithfulness_is_enforced(chain4):
    with pytest.raises(FaithfulnessError):
        FaithfulStructure.create(chain4, kb=S(0, 1))


def test_knowledge_base_needs_regular_order():
    two_chains = from_pairs(4, [(0, 1), (2, 3)])
    with pytest.raises(WorkbenchError):
        knowledge_base_of(two_chains, (0, 1, 2, 3))


def test_labels_must_be_a_bijection(chain4):
    with pytest.raises(WorkbenchError):
        FaithfulStructure.create(chain4, (0, 0, 1, 2))
    with pytest.raises(WorkbenchError):
        FaithfulStructure.create(chain(3))


def test_table_and_view_agree(diamond):
    F = FaithfulStructure.create(diamond, (2, 0, 3, 1))
    table = operator_table(F)
    assert table.is_materialized and not operator_view(F).is_materialized
    assert table == operator_view(F)
    assert table.knowledge_base() == F.kb
    frame = table.to_frame()
    assert frame.shape == (16, 2)
    assert list(frame.columns) == ["phi", "result"]


def test_tables_are_capped_at_n4():
    F = FaithfulStructure.create(chain(32))
    with pytest.raises(CapExceededError):
        operator_table(F)
    assert operator_view(F)(ModelSet.from_members(5, [7, 30])) == ModelSet.from_members(5, [7])


def test_reconstruct_recovers_labeled_order(diamond):
    labels = (2, 0, 3, 1)
    F = FaithfulStructure.create(diamond, labels)
    assert reconstruct_order(operator_table(F)) == relabel(diamond, labels)


def test_reconstruct_recovers_every_two_element_order():
    for R in regular_preorders(2, partial_orders_only=True):
        for labels in permutations(range(2)):
            F = FaithfulStructure.create(R, labels)
            assert reconstruct_order(operator_table(F)) == relabel(R, labels)


@pytest.mark.slow
def test_reconstruct_recovers_every_four_element_order():
    for R in regular_preorders(4, partial_orders_only=True):
        for labels in permutations(range(4)):
            F = FaithfulStructure.create(R, labels)
            assert reconstruct_order(operator_table(F)) == relabel(R, labels)


def test_reconstruct_rejects_non_selecting_operators():
    op = RevisionOperator.from_function(2, lambda phi: ModelSet.empty(2))
    with pytest.raises(InconsistentPairError):
        reconstruct_order(op)


def _cyclic_operator():
    prefer = {frozenset({0, 1}): 0, frozenset({1, 2}): 1, frozenset({0, 2}): 2}

    def fn(phi):
        members = frozenset(phi.members())
        if members in prefer:
            return S(prefer[members])
        return phi

    return RevisionOperator.from_function(2, fn)


def test_reconstruct_rejects_cyclic_preferences():
    with pytest.raises(NonTransitiveError):
        reconstruct_order(_cyclic_operator())


def _chain_with_one_wrong_entry():
    F = FaithfulStructure.create(chain(4))
    entries = dict(operator_table(F)._items())
    entries[S(0, 1, 2).mask] = S(1).mask
    return RevisionOperator(2, entries=entries)


def test_reconstruct_full_verification_finds_mismatch():
    op = _chain_with_one_wrong_entry()
    with pytest.raises(TableMismatchError):
        reconstruct_order(op, verify="full")
    assert reconstruct_order(op, verify="pairs") == chain(4)


def test_sampled_verification_needs_seed(chain4):
    op = operator_table(FaithfulStructure.create(chain4))
    with pytest.raises(WorkbenchError):
        reconstruct_order(op, verify="sample")
    assert reconstruct_order(op, verify="sample", samples=50, seed=1) == chain4


def test_representable_in_family(diamond):
    op = operator_table(FaithfulStructure.create(diamond))
    found = is_representable(op, is_regular)
    assert found is not None
    assert found.order == diamond
    assert found.kb == S(0)
    assert is_representable(op, is_regular_disconnected) is None


def test_non_minimization_operator_is_not_representable():
    assert is_representable(_cyclic_operator(), is_regular) is None
    assert is_representable(_chain_with_one_wrong_entry(), is_regular) is None


def test_identity_operator_is_represented_by_the_antichain():
    op = RevisionOperator.from_function(2, lambda phi: phi)
    found = is_representable(op, is_regular)
    assert found.order == antichain(4)
    assert found.kb == ModelSet.full(2)


def test_representable_full_verification_is_capped():
    op = RevisionOperator(4, entries={})
    with pytest.raises(CapExceededError):
        is_representable(op, is_regular, verify="full")


def test_operator_json_round_trip(tmp_path, diamond):
    op = operator_table(FaithfulStructure.create(diamond, (1, 0, 3, 2)))
    path = tmp_path / "op.json"
    dump_operator(op, path)
    assert load_operator(path) == op


def test_partial_tables_load_but_refuse_missing_entries():
    op = operator_from_json({"n": 1, "entries": [{"phi": [0, 1], "result": [0]}]})
    assert not op.is_total
    assert op(ModelSet.full(1)) == ModelSet.from_members(1, [0])
    with pytest.raises(OperatorUndefinedError):
        op(ModelSet.from_members(1, [1]))


def test_malformed_operator_json():
    with pytest.raises(WorkbenchError):
        operator_from_json({"n": 2, "entries": [{"phi": [0]}]})


def test_operator_json_rejects_repeated_formulas():
    entries = [{"phi": [0, 1], "result": [0]}, {"phi": [1, 0], "result": [1]}]
    with pytest.raises(WorkbenchError, match="twice"):
        operator_from_json({"n": 1, "entries": entries})

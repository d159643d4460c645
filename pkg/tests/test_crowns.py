import pytest

from crowns import (
    CrownSpec,
    RelationalStructure,
    build_crown,
    build_double_crown,
    check_interdefinability,
    decompose_crown_family,
    dump_structure,
    extend_with_bottom,
    from_colored_graph,
    get_family,
    is_extended_crown,
    is_extended_double_crown,
    load_structure,
    same_signature,
    structure_from_json,
    structure_to_json,
    to_colored_graph,
)
from errors import NotACrownError, SignatureMismatchError, WorkbenchError
from first_order import holds, parse_sentence
from orders import antichain, chain, is_regular, is_regular_disconnected, strict_less


@pytest.fixture
def crown_with_bottoms():
    return extend_with_bottom(build_crown(3), 2)


def test_crown_comparabilities():
    R = build_crown(4)
    assert R.m == 8
    # a_i = i - 1 sits above b_i = 4 + i - 1 and b_{i+1}
    assert strict_less(R, 4, 0) and strict_less(R, 5, 0)
    assert strict_less(R, 4, 3)
    assert not strict_less(R, 6, 0)
    assert not strict_less(R, 0, 1)


def test_crown_width_is_checked():
    with pytest.raises(NotACrownError):
        build_crown(1)
    with pytest.raises(NotACrownError):
        CrownSpec(3, double=True, s2=1)
    with pytest.raises(NotACrownError):
        CrownSpec(3, bottoms=-1)


def test_double_crown_has_no_cross_comparabilities():
    R = build_double_crown(3, 4)
    assert R.m == 14
    assert not any(strict_less(R, u, v) or strict_less(R, v, u) for u in range(6) for v in range(6, 14))


def test_bottoms_sit_below_everything(crown_with_bottoms):
    R = crown_with_bottoms
    assert R.m == 8
    assert all(strict_less(R, b, v) for b in (6, 7) for v in range(6))
    assert not strict_less(R, 6, 7) and not strict_less(R, 7, 6)
    assert is_regular(R)
    with pytest.raises(WorkbenchError):
        extend_with_bottom(build_crown(3), 0)


def test_crown_spec_builds():
    spec = CrownSpec(6, bottoms=4)
    assert spec.size == 16
    assert spec.is_regular_size
    assert spec.build() == extend_with_bottom(build_crown(6), 4)
    double = CrownSpec(3, bottoms=4, double=True, s2=3)
    assert double.widths == (3, 3)
    assert double.build() == extend_with_bottom(build_double_crown(3, 3), 4)
    assert not CrownSpec(3).is_regular_size


def test_decompose_extended_crown(crown_with_bottoms):
    d = decompose_crown_family(crown_with_bottoms)
    assert d.L1 == {0, 1, 2}
    assert d.L2 == {3, 4, 5}
    assert d.L3 == {6, 7}
    assert d.cycles == ((0, 4, 1, 5, 2, 3),)
    assert d.spec() == CrownSpec(3, bottoms=2)


def test_decompose_bare_crown_has_no_bottoms():
    d = decompose_crown_family(build_crown(5))
    assert d.bottoms == 0
    assert d.widths == (5,)


def test_decompose_double_crown():
    d = decompose_crown_family(extend_with_bottom(build_double_crown(3, 3), 4))
    assert d.widths == (3, 3)
    assert d.spec() == CrownSpec(3, bottoms=4, double=True, s2=3)


@pytest.mark.parametrize("R", [antichain(4), chain(4), extend_with_bottom(chain(3), 1)])
def test_non_crowns_are_rejected(R):
    with pytest.raises(NotACrownError):
        decompose_crown_family(R)


def test_families():
    crown8 = extend_with_bottom(build_crown(3), 2)
    double16 = extend_with_bottom(build_double_crown(3, 3), 4)
    assert is_extended_crown(crown8)
    assert not is_extended_double_crown(crown8)
    assert is_extended_double_crown(double16)
    assert not is_extended_crown(double16)
    # size 7 is not a power of two
    assert not is_extended_crown(extend_with_bottom(build_crown(3), 1))
    assert get_family("regular") is is_regular
    assert get_family("regular-disconnected") is is_regular_disconnected
    with pytest.raises(WorkbenchError):
        get_family("crowns")


def test_colored_graph_encoding(crown_with_bottoms):
    G = to_colored_graph(crown_with_bottoms, extension=[{0, 6}])
    assert G.is_symmetric_graph()
    assert G.unary["L3"] == {6, 7}
    assert G.unary["A1"] == {0, 6}
    # two crown edges per upper element plus every crown element over both bottoms
    assert len(G.edges()) == 6 + 12
    assert G.degrees()[6] == 6


@pytest.mark.parametrize(
    "M",
    [
        build_crown(4),
        extend_with_bottom(build_crown(3), 2),
        extend_with_bottom(build_double_crown(3, 4), 2),
    ],
)
def test_colored_graph_decodes_back(M):
    assert from_colored_graph(to_colored_graph(M)) == M


@pytest.mark.slow
@pytest.mark.parametrize("bottoms", [0, 1, 2, 3, 8, 16])
@pytest.mark.parametrize("s", range(2, 9))
def test_colored_graph_decode_sweep(s, bottoms):
    crowns = [build_crown(s)] + [build_double_crown(s, s2) for s2 in range(2, 9)]
    for M in crowns:
        if bottoms:
            M = extend_with_bottom(M, bottoms)
        assert from_colored_graph(to_colored_graph(M)) == M


def test_colored_graph_rejects_bad_colors():
    G = RelationalStructure.graph(2, [(0, 1)], {"L1": [0, 1], "L2": [], "L3": []})
    with pytest.raises(NotACrownError):
        from_colored_graph(G)
    with pytest.raises(NotACrownError):
        from_colored_graph(RelationalStructure.graph(2, [(0, 1)], {"L1": [0], "L2": [0, 1], "L3": []}))


@pytest.mark.parametrize("literal", [False, True])
@pytest.mark.parametrize(
    "M",
    [
        build_crown(2),
        build_crown(3),
        build_crown(6),
        build_double_crown(3, 4),
        extend_with_bottom(build_crown(3), 2),
        extend_with_bottom(build_crown(6), 4),
        extend_with_bottom(build_double_crown(3, 3), 4),
    ],
)
def test_interdefinability(M, literal):
    assert check_interdefinability(M, literal=literal)


def test_relational_structure_validation():
    with pytest.raises(WorkbenchError):
        RelationalStructure.graph(2, [(0, 2)])
    with pytest.raises(WorkbenchError):
        RelationalStructure.graph(2, [], {"C": [3]})


def test_structure_operations():
    S = RelationalStructure.graph(4, [(0, 1), (2, 3)], {"C": [0, 2]})
    assert S.components() == [[0, 1], [2, 3]]
    sub = S.induced([2, 3])
    assert sub == RelationalStructure.graph(2, [(0, 1)], {"C": [0]})
    assert S.with_colors({"D": [1]}).signature() == (("C", "D"), ("E",))
    assert S.without_colors(["C"]).unary == {}
    assert S.with_edges([(0, 3)]).edges() == [(0, 3)]
    assert S.color_signature(0) == (True,)
    assert holds(parse_sentence("exists x. exists y. E(x, y) & C(x) & !C(y)"), S.interpretation())


def test_structure_json(tmp_path, crown_with_bottoms):
    G = to_colored_graph(crown_with_bottoms, extension=[{1}, {2, 3}])
    data = structure_to_json(G)
    assert data["A"] == [[1], [2, 3]]
    assert "A1" not in data["colors"]
    assert structure_from_json(data) == G
    path = tmp_path / "g.json"
    dump_structure(G, path)
    assert load_structure(path) == G


def test_order_json_loads_as_a_structure():
    S = structure_from_json({"size": 2, "leq": [[0, 1]]})
    assert S == RelationalStructure.from_order(chain(2))
    with pytest.raises(WorkbenchError):
        structure_from_json({"edges": []})


def test_equality_sees_signature():
    assert RelationalStructure.graph(2, []) != RelationalStructure.graph(2, [], {"C": []})
    assert RelationalStructure.graph(2, []) != RelationalStructure.from_order(antichain(2))


def test_same_signature_raises():
    with pytest.raises(SignatureMismatchError):
        same_signature(RelationalStructure.graph(1, []), RelationalStructure.graph(1, [], {"C": []}))

from pathlib import Path

import pytest

from errors import CapExceededError, FormulaSyntaxError, PostulateError, WorkbenchError
from first_order import parse_sentence, quantifier_rank, render_sentence
from logic_core import ModelSet, all_model_sets
from orders import antichain, chain, regular_preorders
from mso import (
    ExtendedStructure,
    UMSOSentence,
    check_definability,
    check_prop_equivalence,
    eval_emso,
    eval_fo,
    eval_umso,
    extension_of,
    parse_fo,
    parse_umso,
    set_count,
    translate,
    universal_closure,
)
from postulates import BUILTIN_POSTULATES, get_postulate
from revision import FaithfulStructure

GOLDEN = Path(__file__).parent / "golden" / "agm_subexpansion_translation.txt"


def test_subexpansion_translation_matches_golden_file():
    expected = parse_sentence(GOLDEN.read_text().strip())
    assert translate(get_postulate("agm-subexpansion")) == expected


def test_translation_renders_back():
    tau = translate(get_postulate("agm-subexpansion"))
    assert parse_sentence(render_sentence(tau)) == tau


@pytest.mark.parametrize("name", sorted(BUILTIN_POSTULATES))
def test_translations_are_sentences_over_orders(name):
    P = get_postulate(name)
    closure = universal_closure(P)
    assert closure.ell == P.ell
    assert set_count(closure.body) <= P.ell
    assert quantifier_rank(closure.body) >= 1


def test_parse_umso_prefixes():
    assert parse_umso("forallsets A1..A3. exists x. A3(x)").ell == 3
    assert parse_umso("forallsets A1. exists x. A1(x)").ell == 1
    plain = parse_umso("exists x. min(x)")
    assert plain.ell == 0
    assert str(plain) == "exists x. forall y. !(y <= x & !(x <= y))"
    with pytest.raises(FormulaSyntaxError):
        parse_umso("forallsets B1. exists x. A1(x)")
    with pytest.raises(PostulateError):
        parse_umso("forallsets A1. exists x. A2(x)")


def test_umso_renders_its_prefix():
    Phi = parse_umso("forallsets A1..A2. exists x. A1(x) | A2(x)")
    assert str(Phi).startswith("forallsets A1..A2. ")
    assert parse_umso(str(Phi)) == Phi


@pytest.mark.parametrize("text", ["exists x. K(x)", "exists x. E(x, x)", "x <= y", "exists x. B1(x)"])
def test_fo_sentences_over_orders_only(text):
    with pytest.raises(PostulateError):
        parse_fo(text)


def test_umso_sentence_validates_ell():
    with pytest.raises(WorkbenchError):
        UMSOSentence(-1, parse_fo("exists x. min(x)"))


def test_extended_structure_checks_elements():
    with pytest.raises(WorkbenchError):
        ExtendedStructure(chain(2), ({0, 5},))


def test_eval_fo_on_extended_structures():
    S = ExtendedStructure(chain(3), ({1, 2},))
    assert eval_fo(S, parse_fo("exists x. min[A1](x) & !min(x)"))
    assert not eval_fo(S, parse_fo("forall x. A1(x)"))
    with pytest.raises(WorkbenchError):
        eval_fo(S, parse_fo("exists x. A2(x)"))


def test_eval_umso_reports_first_falsifying_tuple():
    Phi = parse_umso("forallsets A1. exists x. A1(x)")
    verdict = eval_umso(chain(3), Phi)
    assert not verdict.holds
    assert verdict.counterexample == (frozenset(),)
    assert verdict.checked == 1


def test_eval_umso_holds_on_valid_sentence():
    Phi = parse_umso("forallsets A1. (exists x. A1(x)) -> (exists x. min[A1](x))")
    verdict = eval_umso(chain(3), Phi)
    assert verdict.holds
    assert verdict.checked == 8


def test_eval_emso_returns_a_witness():
    Phi = parse_umso("forallsets A1..A2. exists x. A1(x) & A2(x) & !min(x)")
    verdict = eval_emso(chain(2), Phi)
    assert verdict.holds
    # first satisfying tuple in lexicographic order of masks
    assert verdict.counterexample == (frozenset({1}), frozenset({1}))
    assert not eval_emso(antichain(2), Phi).holds


def test_set_checks_are_capped_and_sampled():
    Phi = parse_umso("forallsets A1..A3. exists x. min(x)")
    with pytest.raises(CapExceededError):
        eval_umso(chain(4), Phi, max_tuples=100)
    with pytest.raises(WorkbenchError):
        eval_umso(chain(4), Phi, mode="sample")
    verdict = eval_umso(chain(4), Phi, mode="sample", samples=30, seed=2)
    assert verdict.holds and verdict.checked == 30


def test_extension_uses_preimages(diamond):
    F = FaithfulStructure.create(diamond, (3, 2, 1, 0))
    S = extension_of(F, [ModelSet.from_members(2, [0, 1])])
    assert S.sets == (frozenset({2, 3}),)
    with pytest.raises(WorkbenchError):
        extension_of(F, [ModelSet.full(3)])


@pytest.mark.parametrize("name", ["agm-success", "agm-subexpansion", "vacuity", "disjunction"])
def test_prop_equivalence_on_small_orders(name):
    P = get_postulate(name)
    sets = list(all_model_sets(2))
    for R in regular_preorders(4)[::11]:
        F = FaithfulStructure.create(R, (1, 3, 0, 2))
        for phi in sets:
            for psi in sets[::3]:
                assert check_prop_equivalence(F, P, [phi, psi][: P.ell])


def test_definability_for_ranked_and_unranked_orders(diamond, unranked):
    P = get_postulate("agm-subexpansion")
    labelings = [(0, 1, 2, 3), (3, 1, 0, 2)]
    assert check_definability(diamond, P, labelings)
    assert check_definability(unranked, P, labelings)
    assert eval_umso(diamond, universal_closure(P)).holds
    assert not eval_umso(unranked, universal_closure(P)).holds


@pytest.mark.slow
@pytest.mark.parametrize("name", ["agm-subexpansion", "inclusion", "disjunction"])
def test_definability_over_every_labeling(name):
    P = get_postulate(name)
    for R in regular_preorders(4)[::4]:
        assert check_definability(R, P)

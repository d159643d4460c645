# workbench.py - Command-line front end: one subcommand per workbench operation
import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import (
    DEFAULT_SAMPLE_SIZE,
    EF_SIZE_CAPS,
    EXHAUSTIVE_TUPLE_LIMIT,
    LOG_LEVEL,
    MATERIALIZE_MAX_N,
    configure_logging,
)
from crowns import (
    CrownSpec,
    FAMILIES,
    decompose_crown_family,
    dump_structure,
    get_family,
    load_structure,
    structure_to_json,
    to_colored_graph,
)
from errors import CapExceededError, NoSwapPairError, OrderValidationError, ReconstructionError, WorkbenchError
from first_order import render_sentence
from locality import GameParameters, ef_game, hanf_check, swap_construction, verify_crown_split
from logic_core import ModelSet, formula_of, models, parse_formula, render
from mso import check_prop_equivalence, eval_emso, eval_umso, parse_umso, translate, universal_closure
from orders import (
    PartialPreorder,
    comparability_graph,
    dump_order,
    is_partial_order,
    is_ranked,
    is_regular,
    is_regular_disconnected,
    load_order,
    minimal_elements,
    order_from_json,
    order_to_json,
    to_dot,
)
from postulates import get_postulate, satisfies, tuple_at
from report_renderer import Report, render as render_report
from revision import (
    FaithfulStructure,
    dump_operator,
    is_representable,
    load_operator,
    operator_table,
    operator_view,
    reconstruct_order,
    revise,
)
from selftest import run_selftest

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_CAP = 3

# A command returns (passed, result, witness, parameters).
Outcome = Tuple[bool, object, object, Dict]


# --- Argument helpers ---

def _int_list(text: str) -> List[int]:
    text = text.strip()
    if not text:
        return []
    try:
        return [int(part) for part in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"Expected comma-separated integers, got {text!r}") from None


def _set_list(text: str) -> List[List[int]]:
    """"0,1;2;" -> [[0, 1], [2], []]"""
    return [_int_list(part) for part in text.split(";")]


def _ef_cap(text: str) -> Tuple[int, Optional[int]]:
    try:
        q, cap = text.split("=")
        return int(q), None if cap.strip().lower() == "none" else int(cap)
    except ValueError:
        raise argparse.ArgumentTypeError(f"Expected q=m (or q=none), got {text!r}") from None


def _caps(args) -> Dict[int, Optional[int]]:
    caps = dict(EF_SIZE_CAPS)
    caps.update(dict(args.ef_cap or []))
    return caps


def _mode(args) -> Tuple[str, int]:
    if getattr(args, "sample", None) is not None:
        return "sample", args.sample
    return "exhaustive", DEFAULT_SAMPLE_SIZE


def _write_out(args, data: Dict) -> None:
    if args.out:
        Path(args.out).write_text(json.dumps(data, indent=2))
        logger.info(f"Wrote {args.out}")


def _write_dot(args, graph, name: str) -> None:
    if args.dot:
        Path(args.dot).write_text(to_dot(graph, name) + "\n")
        logger.info(f"Wrote DOT graph to {args.dot}")


def _structure(args) -> FaithfulStructure:
    R = load_order(args.order)
    kb = ModelSet.from_members(R.m.bit_length() - 1, args.kb) if args.kb is not None else None
    F = FaithfulStructure.create(R, args.labels, kb)
    if args.n is not None and args.n != F.n:
        raise WorkbenchError(f"--n {args.n} does not match an order with {R.m} elements (n={F.n})")
    return F


def _operator_and_kb(args):
    if args.operator:
        op = load_operator(args.operator)
        kb = ModelSet.from_members(op.n, args.kb) if args.kb is not None else op.knowledge_base()
        return op, kb
    if not args.order:
        raise WorkbenchError("Give --order (faithful structure) or --operator (table JSON)")
    F = _structure(args)
    op = operator_table(F) if F.n <= MATERIALIZE_MAX_N else operator_view(F)
    return op, F.kb


def _phis_witness(witness) -> Optional[Dict[str, List[int]]]:
    if witness is None:
        return None
    return {f"p{i}": phi.members() for i, phi in enumerate(witness, start=1)}


# --- logic-core ---

def cmd_models(args) -> Outcome:
    phi = parse_formula(args.formula, args.n)
    A = models(phi, args.n)
    result = {"formula": render(phi), "models": A.members(), "assignments": [str(a) for a in A.assignments()]}
    return True, result, None, {"n": args.n}


def cmd_formula_of(args) -> Outcome:
    A = ModelSet.from_members(args.n, args.models)
    return True, {"models": A.members(), "formula": render(formula_of(A))}, None, {"n": args.n}


# --- orders ---

def _order_facts(R: PartialPreorder) -> Dict:
    return {
        "size": R.m,
        "partial_order": is_partial_order(R),
        "ranked": is_ranked(R),
        "regular": is_regular(R),
        "regular_disconnected": is_regular_disconnected(R),
        "minimal": sorted(minimal_elements(R)),
    }


def cmd_validate_order(args) -> Outcome:
    try:
        data = json.loads(Path(args.order).read_text())
        R = order_from_json(data)
    except OrderValidationError as e:
        return False, None, str(e), {}
    _write_dot(args, comparability_graph(R), "comparability")
    return True, _order_facts(R), None, {"m": R.m}


def cmd_regular(args) -> Outcome:
    R = load_order(args.order)
    _write_dot(args, comparability_graph(R), "comparability")
    facts = _order_facts(R)
    passed = facts["regular_disconnected"] if args.disconnected else facts["regular"]
    return passed, facts, None, {"m": R.m}


# --- revision ---

def cmd_revise(args) -> Outcome:
    F = _structure(args)
    phi = models(parse_formula(args.formula, F.n), F.n)
    revised = revise(F, phi)
    result = {"phi": phi.members(), "knowledge_base": F.kb.members(), "revised": revised.members(),
              "formula": render(formula_of(revised))}
    return True, result, None, {"n": F.n}


def cmd_table(args) -> Outcome:
    F = _structure(args)
    op = operator_table(F)
    if args.out:
        dump_operator(op, args.out)
    frame = op.to_frame()
    result = {"entries": len(frame), "knowledge_base": F.kb.members()}
    if F.n <= 2:
        result["table"] = frame.to_dict(orient="records")
    return True, result, None, {"n": F.n}


def cmd_reconstruct(args) -> Outcome:
    op = load_operator(args.operator)
    mode, samples = ("sample", args.sample) if args.sample is not None else (args.verify, DEFAULT_SAMPLE_SIZE)
    try:
        R = reconstruct_order(op, verify=mode, samples=samples, seed=args.seed)
    except ReconstructionError as e:
        return False, None, {"error": type(e).__name__, "message": str(e)}, {"n": op.n, "verify": mode}
    if args.out:
        dump_order(R, args.out)
    _write_dot(args, comparability_graph(R), "reconstructed")
    return True, order_to_json(R), None, {"n": op.n, "verify": mode}


def cmd_representable(args) -> Outcome:
    op = load_operator(args.operator)
    mode, samples = ("sample", args.sample) if args.sample is not None else (args.verify, DEFAULT_SAMPLE_SIZE)
    found = is_representable(op, get_family(args.family), verify=mode, samples=samples, seed=args.seed)
    parameters = {"n": op.n, "family": args.family, "verify": mode}
    if found is None:
        return False, {"representable": False}, None, parameters
    result = {"representable": True, "order": order_to_json(found.order), "knowledge_base": found.kb.members()}
    return True, result, None, parameters


# --- postulates ---

def cmd_check_postulate(args) -> Outcome:
    P = get_postulate(args.postulate)
    op, kb = _operator_and_kb(args)
    mode, samples = _mode(args)
    verdict = satisfies(op, kb, P, mode=mode, samples=samples, seed=args.seed, jobs=args.jobs,
                        max_tuples=args.max_tuples)
    parameters = {"n": op.n, "ell": P.ell, "mode": mode}
    if mode == "sample":
        parameters["seed"] = args.seed
    result = {"postulate": str(P), "text": P.text, "checked": verdict.checked}
    return verdict.holds, result, _phis_witness(verdict.counterexample), parameters


# --- mso ---

def cmd_translate(args) -> Outcome:
    P = get_postulate(args.postulate)
    text = str(universal_closure(P)) if args.closure else render_sentence(translate(P))
    return True, text, None, {"ell": P.ell}


def cmd_eval_mso(args) -> Outcome:
    R = load_order(args.order)
    Phi = parse_umso(args.sentence)
    mode, samples = _mode(args)
    evaluate = eval_emso if args.existential else eval_umso
    verdict = evaluate(R, Phi, mode=mode, samples=samples, seed=args.seed, jobs=args.jobs,
                       max_tuples=args.max_tuples)
    witness = None
    if verdict.counterexample is not None:
        witness = {f"A{i}": sorted(s) for i, s in enumerate(verdict.counterexample, start=1)}
    result = {"sentence": str(Phi), "checked": verdict.checked, "holds": verdict.holds}
    return verdict.holds, result, witness, {"m": R.m, "ell": Phi.ell, "mode": mode}


def cmd_verify_translation(args) -> Outcome:
    F = _structure(args)
    P = get_postulate(args.postulate)
    if args.phis is not None:
        if len(args.phis) != P.ell:
            raise WorkbenchError(f"{P} needs {P.ell} formulas, got {len(args.phis)}")
        instances = [[ModelSet.from_members(F.n, members) for members in args.phis]]
    else:
        base = 1 << (1 << F.n)
        total = base ** P.ell
        if total > args.max_tuples:
            raise CapExceededError(f"{total} formula tuples exceed the limit {args.max_tuples}; pass --phis")
        instances = ([ModelSet(F.n, mask) for mask in tuple_at(i, base, P.ell)] for i in range(total))
    checked = 0
    for phis in instances:
        checked += 1
        if not check_prop_equivalence(F, P, phis):
            return False, {"checked": checked}, _phis_witness(phis), {"n": F.n, "ell": P.ell}
    return True, {"checked": checked, "translation": render_sentence(translate(P))}, None, {"n": F.n, "ell": P.ell}


# --- fmt ---

def cmd_crown(args) -> Outcome:
    spec = CrownSpec(args.s, args.bottoms, double=args.double is not None, s2=args.double or 0)
    R = spec.build()
    parameters = {"s": args.s, "s2": args.double, "bottoms": args.bottoms, "size": spec.size}
    if args.graph:
        data = structure_to_json(to_colored_graph(R))
    else:
        data = order_to_json(R)
    _write_out(args, data)
    _write_dot(args, comparability_graph(R), "crown")
    result = {"size": R.m, "regular_size": spec.is_regular_size, **_order_facts(R)}
    if not args.out:
        result["structure"] = data
    return True, result, None, parameters


def cmd_ef(args) -> Outcome:
    left, right = load_structure(args.left), load_structure(args.right)
    game = ef_game(left, right, args.q, caps=_caps(args))
    trace = [
        {"round": m.round, "side": m.side, "spoiler": m.spoiler, "duplicator": m.duplicator}
        for m in game.trace
    ]
    result = {"winner": game.winner, "sizes": [left.size, right.size]}
    return game.duplicator_wins, result, trace or None, {"q": args.q}


def cmd_hanf(args) -> Outcome:
    left, right = load_structure(args.left), load_structure(args.right)
    r = args.r if args.r is not None else GameParameters(args.q).r
    bijection = hanf_check(left, right, r)
    parameters = {"r": r} if args.q is None else {"q": args.q, "r": r}
    if bijection is None:
        return False, {"matched": False}, None, parameters
    return True, {"matched": True, "bijection": [bijection[v] for v in range(left.size)]}, None, parameters


def cmd_swap(args) -> Outcome:
    C = load_structure(args.cycle)
    params = GameParameters(args.q, args.ell)
    try:
        swap = swap_construction(C, args.q, args.ell)
    except NoSwapPairError as e:
        return False, None, str(e), params.to_dict()
    data = structure_to_json(swap.structure)
    if args.out:
        dump_structure(swap.structure, args.out)
    result = {"swap": swap.to_dict(), "components": len(swap.structure.components())}
    if not args.out:
        result["structure"] = data
    return True, result, None, params.to_dict()


def _extension(args, size: int) -> List[List[int]]:
    if args.extension is not None:
        data = json.loads(Path(args.extension).read_text())
        return [[int(v) for v in members] for members in data]
    if args.seed is None:
        raise WorkbenchError("A random extension needs --seed (or pass --extension)")
    rng = np.random.default_rng(args.seed)
    return [[int(v) for v in np.flatnonzero(rng.integers(0, 2, size=size))] for _ in range(args.ell)]


def cmd_verify_split(args) -> Outcome:
    if args.order:
        M1 = load_order(args.order)
    else:
        M1 = CrownSpec(args.s, args.bottoms).build()
    extension = _extension(args, M1.m)
    report = verify_crown_split(M1, args.q, args.ell, extension, caps=_caps(args))
    if args.out and report.swap is not None:
        dump_structure(report.swap.structure, args.out)
    widths = decompose_crown_family(report.result).widths if report.result is not None else None
    result = {"checks": report.checks, "size": M1.m, "result_widths": widths}
    witness = None if report.verdict else {k: v for k, v in report.checks.items() if not v}
    parameters = dict(report.parameters.to_dict(), swap=report.swap.to_dict() if report.swap else None)
    return report.verdict, result, witness, parameters


# --- selftest ---

def cmd_selftest(args) -> Outcome:
    seed = 0 if args.seed is None else args.seed
    summary = run_selftest(seed=seed, quick=args.quick, only=args.only)
    rows = summary.to_dict(orient="records")
    failed = [row["criterion"] for row in rows if not row["passed"]]
    return not failed, rows, failed or None, {"seed": seed, "quick": args.quick}


# --- Parser ---

def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="text")
    common.add_argument("--seed", type=int, help="seed for every sampled mode (mandatory there)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for exhaustive scans")
    common.add_argument("--dot", help="write the comparability graph as DOT to this path")
    common.add_argument("--out", help="write the command's structure/table JSON to this path")
    common.add_argument("--verbose", action="store_true")
    common.add_argument("--max-tuples", type=int, default=EXHAUSTIVE_TUPLE_LIMIT)
    common.add_argument("--ef-cap", type=_ef_cap, action="append", metavar="Q=M",
                        help="override the EF size cap for q rounds (repeatable)")
    return common


def _structure_options(parser: argparse.ArgumentParser, required: bool = True) -> None:
    parser.add_argument("--order", required=required, help="order JSON {\"size\", \"leq\"}")
    parser.add_argument("--labels", type=_int_list, help="bijection t as comma-separated assignments")
    parser.add_argument("--kb", type=_int_list, help="knowledge base models (defaults to the minimal images)")
    parser.add_argument("--n", type=int, help="number of variables (checked against the order size)")


def _sampling_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--exhaustive", action="store_true", help="check every tuple (default)")
    group.add_argument("--sample", type=int, metavar="K", help="check K seeded random tuples (needs --seed)")


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="workbench",
        description="Minimization revision and finite model theory workbench",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    def add(name: str, fn: Callable, help_text: str, aliases: Sequence[str] = ()) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text, parents=[common], aliases=list(aliases))
        p.set_defaults(handler=fn)
        return p

    p = add("models", cmd_models, "models of a formula")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--formula", required=True)

    p = add("formula-of", cmd_formula_of, "canonical formula of a model set")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--models", type=_int_list, required=True)

    p = add("validate-order", cmd_validate_order, "validate an order JSON file")
    p.add_argument("--order", required=True)

    p = add("regular", cmd_regular, "regularity of an order")
    p.add_argument("--order", required=True)
    p.add_argument("--disconnected", action="store_true", help="require a regular-disconnected order")

    p = add("revise", cmd_revise, "revise by minimization")
    _structure_options(p)
    p.add_argument("--formula", required=True)

    p = add("table", cmd_table, "materialize the operator table")
    _structure_options(p)

    for name, fn, help_text in (
        ("reconstruct", cmd_reconstruct, "recover the order behind an operator table"),
        ("representable", cmd_representable, "representability in an order family"),
    ):
        p = add(name, fn, help_text)
        p.add_argument("--operator", required=True)
        p.add_argument("--verify", choices=("full", "pairs"), default="full")
        p.add_argument("--sample", type=int, metavar="K", help="verify on K seeded random sets (needs --seed)")
        if name == "representable":
            p.add_argument("--family", choices=sorted(FAMILIES), required=True)

    p = add("check-postulate", cmd_check_postulate, "check a postulate on an operator")
    _structure_options(p, required=False)
    p.add_argument("--operator")
    p.add_argument("--postulate", required=True, help="built-in name or postulate DSL text")
    _sampling_options(p)

    p = add("translate", cmd_translate, "translate a postulate into FO over <= and A1..Al")
    p.add_argument("--postulate", required=True)
    p.add_argument("--closure", action="store_true", help="print the universal set closure")

    p = add("eval-mso", cmd_eval_mso, "evaluate a universal MSO sentence on an order")
    p.add_argument("--order", required=True)
    p.add_argument("--sentence", required=True)
    p.add_argument("--existential", action="store_true", help="read the set prefix existentially")
    _sampling_options(p)

    p = add(
        "verify-translation", cmd_verify_translation, "direct and translated postulate evaluation agree",
        aliases=["verify-prop1"],
    )
    _structure_options(p)
    p.add_argument("--postulate", required=True)
    p.add_argument("--phis", type=_set_list, help="model sets as '0,1;2' (default: every tuple)")

    p = add("crown", cmd_crown, "build a (double) crown, optionally extended")
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--double", type=int, metavar="S2", help="second crown width")
    p.add_argument("--bottoms", type=int, default=0)
    p.add_argument("--graph", action="store_true", help="emit the colored graph instead of the order")

    p = add("ef", cmd_ef, "solve the q-round Ehrenfeucht-Fraisse game")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--q", type=int, required=True)

    p = add("hanf", cmd_hanf, "match r-neighborhood types")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    radius = p.add_mutually_exclusive_group(required=True)
    radius.add_argument("--r", type=int)
    radius.add_argument("--q", type=int, help="use r = (3^q - 1) / 2")

    p = add("swap", cmd_swap, "split a colored crown cycle by an edge swap")
    p.add_argument("--cycle", required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--ell", type=int, default=1)

    p = add(
        "verify-split", cmd_verify_split, "split an extended crown into a q-equivalent double crown",
        aliases=["verify-lemma5"],
    )
    p.add_argument("--order", help="extended crown order JSON (default: built from --s/--bottoms)")
    p.add_argument("--s", type=int, default=64)
    p.add_argument("--bottoms", type=int, default=128)
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--ell", type=int, default=1)
    p.add_argument("--extension", help="JSON list of ell element lists (default: random, needs --seed)")

    p = add("selftest", cmd_selftest, "run the acceptance suite")
    p.add_argument("--quick", action="store_true")
    p.add_argument("--only", type=_int_list, help="criterion numbers to run")

    return parser


def run(argv: Optional[Sequence[str]] = None) -> Tuple[int, Report]:
    """Parse argv, execute one subcommand and return (exit code, report)."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        code = EXIT_PASS if e.code == 0 else EXIT_INPUT
        return code, Report(argv, "pass" if code == EXIT_PASS else "error", witness="usage error")

    configure_logging("DEBUG" if args.verbose else LOG_LEVEL)
    logger.info(f"Running {args.command}")
    started = time.perf_counter()
    try:
        passed, result, witness, parameters = args.handler(args)
    except CapExceededError as e:
        logger.error(f"Cap exceeded: {e}")
        return EXIT_CAP, Report(argv, "error", {"error": type(e).__name__, "message": str(e)},
                                time.perf_counter() - started)
    except (WorkbenchError, json.JSONDecodeError, OSError) as e:
        logger.error(f"Input error: {e}")
        return EXIT_INPUT, Report(argv, "error", {"error": type(e).__name__, "message": str(e)},
                                  time.perf_counter() - started)
    elapsed = time.perf_counter() - started
    report = Report(argv, "pass" if passed else "fail", witness, elapsed, parameters, result)
    logger.info(f"{args.command} finished with verdict {report.verdict} in {elapsed:.2f}s")
    return (EXIT_PASS if passed else EXIT_FAIL), report


def main(argv: Optional[Sequence[str]] = None) -> int:
    code, report = run(argv)
    try:
        options, _ = _common_options().parse_known_args(list(sys.argv[1:] if argv is None else argv))
        fmt = options.format
    except SystemExit:
        fmt = "text"
    print(render_report(report, fmt))
    return code


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: ``nonlocal-toys <subcommand> ...``.

Exit codes: 0 clean, 1 violations found, 2 input error.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import memorybox, pairwise, quantum, sequential
from .formats import ParseError, load_pairwise, matrices_from_text, parse_scenario
from .pairwise import CROSS_PAIRS, OUTCOME_PAIRS, InvalidState, format_outcome
from .prob import SeedStream, format_rational

MUTATIONS = {
    "none": sequential.DEFAULT_RULES,
    "skip-actualization": sequential.SKIP_ACTUALIZATION,
    "never-flip": sequential.NEVER_FLIP,
}


@dataclass
class Report:
    command: str
    lines: list[str] = field(default_factory=list)
    checked: int = 0
    violations: int = 0
    errors: int = 0
    data: dict = field(default_factory=dict)

    @property
    def exit_status(self) -> int:
        if self.errors:
            return 2
        return 1 if self.violations else 0

    def render(self, fmt: str = "text") -> str:
        if fmt == "machine":
            obj = {
                "command": self.command,
                "checked": self.checked,
                "violations": self.violations,
                "errors": self.errors,
                "exit": self.exit_status,
                "lines": self.lines,
                **self.data,
            }
            return json.dumps(obj, indent=2, sort_keys=True)
        trailer = (
            f"# summary checked={self.checked} violations={self.violations} "
            f"errors={self.errors} exit={self.exit_status}"
        )
        return "\n".join(self.lines + [trailer])


def _outs(outs) -> str:
    return "(" + ",".join(format_outcome(o) for o in outs) + ")"


def _seq(seq) -> str:
    return "[" + ",".join(m.name for m in seq) + "]"


# -- pairwise -----------------------------------------------------------------


def _load_state(args) -> pairwise.PairwiseState:
    if args.pr_box:
        return pairwise.pr_box_state()
    if not args.state:
        raise ParseError("give a state file or --pr-box")
    return pairwise.require_valid(load_pairwise(args.state))


def cmd_chsh(args) -> Report:
    s = _load_state(args)
    res = pairwise.chsh(s)
    rep = Report("chsh", checked=1)
    for (a, b), e in res.correlators.items():
        rep.lines.append(f"E({a},{b}) = {format_rational(e)}")
    rep.lines.append(f"pattern {res.pattern_str()}")
    rep.lines.append(f"CHSH value {format_rational(res.value)}")
    rep.lines.append(f"exceeds 2: {'yes' if res.violates else 'no'}")
    rep.data = {
        "value": format_rational(res.value),
        "pattern": res.pattern_str(),
        "correlators": {f"{a},{b}": format_rational(e) for (a, b), e in res.correlators.items()},
        "exceeds_classical_bound": res.violates,
    }
    return rep


def cmd_lhv(args) -> Report:
    s = _load_state(args)
    verdict = pairwise.lhv_feasibility(s)
    rep = Report("lhv", checked=1, lines=[verdict.describe()])
    if verdict.feasible:
        rep.lines.append("witness over assignments (a1,a2,b1,b2):")
        for v in pairwise.ASSIGNMENTS:
            p = verdict.witness[v]
            if p:
                rep.lines.append(f"  {_outs(v)}: {format_rational(p)}")
    if args.expect_feasible and not verdict.feasible:
        rep.violations = 1
    rep.data = {
        "feasible": verdict.feasible,
        "witness": (
            {_outs(v): format_rational(p) for v, p in verdict.witness.items()} if verdict.feasible else None
        ),
        "chsh_witness": (
            format_rational(verdict.chsh_witness.value) if verdict.chsh_witness is not None else None
        ),
    }
    return rep


# -- sequential ---------------------------------------------------------------


def _table_lines(title: str, d) -> list[str]:
    lines = [title]
    for op in OUTCOME_PAIRS:
        lines.append(f"  {_outs(op)}: {format_rational(d[op])}")
    return lines


def cmd_verify(args) -> Report:
    rules = MUTATIONS[args.mutation]
    modes = [args.nondisturbance, args.no_signaling, args.correlations]
    if sum(modes) != 1:
        raise ParseError("choose exactly one of --nondisturbance, --no-signaling, --correlations")
    if args.mutation != "none":
        lines = [f"mutation: {args.mutation}"]
    else:
        lines = []
    if args.nondisturbance:
        if args.depth < 2:
            raise ParseError("--depth must be at least 2")
        vr = sequential.check_nondisturbance(args.depth, rules)
    elif args.no_signaling:
        if args.bob < 1 or args.alice < 1:
            raise ParseError("--bob and --alice must be at least 1")
        vr = sequential.check_no_signaling(args.bob, args.alice, rules)
    else:
        return _verify_correlations(rules, lines)
    rep = Report("verify", lines=lines + vr.render().splitlines()[:-1])
    rep.checked, rep.violations = vr.checked, vr.violations
    return rep


def _verify_correlations(rules, lines) -> Report:
    rep = Report("verify", lines=lines + ["== PR-box correlations from the fresh state =="])
    for a, b in CROSS_PAIRS:
        for order in ("AB", "BA"):
            d = sequential.fresh_pair_table(a, b, order, rules)
            first = f"{a} then {b}" if order == "AB" else f"{b} then {a}"
            rep.lines += _table_lines(f"P({a},{b}) measured {first}:", d)
            rep.checked += 1
            if any(d[op] != pairwise.PR_BOX_TABLES[(a, b)][op] for op in OUTCOME_PAIRS):
                rep.violations += 1
                rep.lines.append("  ^ differs from the PR box")
    return rep


def cmd_simulate(args) -> Report:
    sc = parse_scenario(Path(args.scenario).read_text())
    if sc.theory != "sequential":
        raise ParseError(f"simulate needs a sequential scenario, got {sc.theory}")
    rules = MUTATIONS[args.mutation]
    res = sequential.run_sequence(sc.initial, sc.sequence, rules)
    exact = res.outcome_distribution()
    all_outs = list(itertools.product((-1, 1), repeat=len(sc.sequence)))
    rep = Report("simulate", lines=[f"sequence {_seq(sc.sequence)}"])
    if args.sample is None:
        rep.lines.append("outcome distribution:")
        for outs in all_outs:
            rep.lines.append(f"  {_outs(outs)}: {format_rational(exact[outs])}")
        rep.lines.append("branches (outcomes, final state):")
        for (outs, st), p in sorted(res.branches.items(), key=lambda kv: (kv[0][0], str(kv[0][1]))):
            rep.lines.append(f"  {_outs(outs)} [{st}]: {format_rational(p)}")
        rep.checked = len(all_outs)
        rep.data = {"exact": {_outs(o): format_rational(exact[o]) for o in all_outs}}
        return rep

    n = args.sample
    if n < 1:
        raise ParseError("--sample must be positive")
    stream = SeedStream(args.seed)
    counts = {o: 0 for o in all_outs}
    for _ in range(n):
        outs, _ = sequential.sample_sequence(sc.initial, sc.sequence, stream, rules)
        counts[outs] += 1
    rep.lines.append(f"{n} rollouts, seed {args.seed}")
    rep.lines.append("outcomes: empirical exact deviation sigmas")
    for o in all_outs:
        p = exact[o]
        emp = counts[o] / n
        dev = emp - float(p)
        sigma = math.sqrt(float(p) * (1 - float(p)) / n)
        z = abs(dev) / sigma if sigma else (0.0 if counts[o] == int(p) * n else math.inf)
        rep.checked += 1
        if z > 5:
            rep.violations += 1
        rep.lines.append(f"  {_outs(o)}: {emp:.6f} {format_rational(p)} {dev:+.6f} {z:.2f}")
    rep.data = {"counts": {_outs(o): c for o, c in counts.items()}, "seed": args.seed, "rollouts": n}
    return rep


def cmd_compare_models(args) -> Report:
    if args.depth < 1:
        raise ParseError("--depth must be at least 1")
    cmp = memorybox.compare_models(args.depth)
    lines = cmp.render().splitlines()[:-1]
    # Divergences are a computed finding, not a failure of either model.
    return Report(
        "compare-models", lines=lines, checked=cmp.compared,
        data={"divergences": [_seq(s) for s, _, _ in cmp.divergences]},
    )


# -- quantum ------------------------------------------------------------------

NAMED_PAIRS = ("pauli-xz", "random-commuting", "random-generic")


def _load_matrices(args) -> tuple[np.ndarray, np.ndarray]:
    inputs = args.inputs
    if len(inputs) == 1 and inputs[0] in NAMED_PAIRS:
        name = inputs[0]
        if name == "pauli-xz":
            return quantum.pauli_xz()
        rng = np.random.default_rng(args.seed)
        if name == "random-commuting":
            return quantum.random_commuting_pair(rng, args.dim)
        return quantum.random_generic_pair(rng, args.dim)
    mats = []
    for path in inputs:
        text = Path(path).read_text()
        if text.lstrip().startswith("{"):
            sc = parse_scenario(text)
            if sc.theory != "quantum":
                raise ParseError(f"expected a quantum scenario, got {sc.theory}")
            mats.extend(sc.matrices)
        else:
            mats.extend(matrices_from_text(text))
    if len(mats) != 2:
        raise ParseError(f"expected two matrices, got {len(mats)}")
    return mats[0], mats[1]


def cmd_lemma1(args) -> Report:
    A, B = _load_matrices(args)
    rep = Report("lemma1", checked=1)
    try:
        lr = quantum.lemma1_report(A, B, args.tol)
    except quantum.EquivalenceViolation as e:
        rep.violations = 1
        rep.lines = str(e).splitlines()
        return rep
    rep.lines = lr.render().splitlines()
    rep.data = {
        "commutes": lr.commutes,
        "property_a": lr.property_a,
        "property_b": lr.property_b,
        "property_c": lr.property_c,
        "residuals": {k: float(f"{v:.6e}") for k, v in lr.residuals.items()},
    }
    return rep


# -- entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "machine"), default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)

    p = argparse.ArgumentParser(prog="nonlocal-toys", description=__doc__.splitlines()[0])
    p.add_argument("--format", choices=("text", "machine"), default="text")
    p.add_argument("--seed", type=int, default=0)
    sub = p.add_subparsers(dest="command", required=True)

    for name, fn, helptext in (
        ("chsh", cmd_chsh, "CHSH value of a pairwise state"),
        ("lhv", cmd_lhv, "local-hidden-variable feasibility of a pairwise state"),
    ):
        sp = sub.add_parser(name, parents=[common], help=helptext)
        sp.add_argument("state", nargs="?", help="pairwise state or scenario JSON")
        sp.add_argument("--pr-box", action="store_true")
        if name == "lhv":
            sp.add_argument("--expect-feasible", action="store_true",
                            help="exit 1 when the state has no LHV model")
        sp.set_defaults(func=fn)

    sp = sub.add_parser("verify", parents=[common], help="exhaustive checks of the sequential theory")
    sp.add_argument("--nondisturbance", action="store_true")
    sp.add_argument("--no-signaling", action="store_true")
    sp.add_argument("--correlations", action="store_true")
    sp.add_argument("--depth", type=int, default=4)
    sp.add_argument("--bob", type=int, default=2)
    sp.add_argument("--alice", type=int, default=2)
    sp.add_argument("--mutation", choices=tuple(MUTATIONS), default="none")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("simulate", parents=[common], help="run a sequential scenario")
    sp.add_argument("scenario")
    mode = sp.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", help="exact branch distribution (default)")
    mode.add_argument("--sample", type=int, metavar="N", help="N Monte Carlo rollouts")
    sp.add_argument("--mutation", choices=tuple(MUTATIONS), default="none")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("lemma1", parents=[common], help="commutativity equivalences for two observables")
    sp.add_argument("inputs", nargs="+", metavar="INPUT",
                    help=f"matrix file(s) or one of {', '.join(NAMED_PAIRS)}")
    sp.add_argument("--dim", type=int, default=3)
    sp.add_argument("--tol", type=float, default=quantum.TOL)
    sp.set_defaults(func=cmd_lemma1)

    sp = sub.add_parser("compare-models", parents=[common],
                        help="automaton vs. PR box with memory bits")
    sp.add_argument("--depth", type=int, default=3)
    sp.set_defaults(func=cmd_compare_models)
    return p


def run(argv: list[str] | None = None) -> tuple[Report, str]:
    """Parse ``argv`` and execute; returns the report and the output format."""
    args = build_parser().parse_args(argv)
    try:
        report = args.func(args)
    except InvalidState as e:
        report = Report(args.command, lines=["invalid state", *e.report.summary().splitlines()], errors=1)
    except (ParseError, quantum.QuantumError, OSError) as e:
        report = Report(args.command, lines=[f"input error: {e}"], errors=1)
    return report, args.format


def main(argv: list[str] | None = None) -> int:
    report, fmt = run(argv)
    print(report.render(fmt))
    return report.exit_status


if __name__ == "__main__":
    sys.exit(main())

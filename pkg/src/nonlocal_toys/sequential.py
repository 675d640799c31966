"""The mutually-nondisturbing toy theory: a five-valued hidden-state automaton.

Each of the four observables carries a hidden value: undetermined, potential
-1/+1, or actual -1/+1. Measuring reads the value (a fair coin when
undetermined), makes it actual, and re-randomizes a potential value held by
the same party's other observable. The all-undetermined state is special and
prepares PR-box correlated potential values on the other party.
"""

from __future__ import annotations

import enum
import functools
import itertools
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

from .pairwise import (
    ALICE_OBS,
    BOB_OBS,
    CROSS_PAIRS,
    OUTCOMES,
    Obs,
    PairwiseState,
    PR_BOX_TABLES,
    UNIFORM_PAIR,
    format_outcome,
)
from .prob import Dist, SeedStream, format_rational, sample

HALF = Fraction(1, 2)


class HiddenValue(enum.Enum):
    UNDETERMINED = "0"
    POTENTIAL_MINUS = "-"
    POTENTIAL_PLUS = "+"
    ACTUAL_MINUS = "--"
    ACTUAL_PLUS = "++"

    @property
    def is_undetermined(self) -> bool:
        return self is HiddenValue.UNDETERMINED

    @property
    def is_potential(self) -> bool:
        return self in (HiddenValue.POTENTIAL_MINUS, HiddenValue.POTENTIAL_PLUS)

    @property
    def is_actual(self) -> bool:
        return self in (HiddenValue.ACTUAL_MINUS, HiddenValue.ACTUAL_PLUS)

    @property
    def sign(self) -> int | None:
        if self.is_undetermined:
            return None
        return -1 if self in (HiddenValue.POTENTIAL_MINUS, HiddenValue.ACTUAL_MINUS) else 1

    @staticmethod
    def potential(sign: int) -> HiddenValue:
        return HiddenValue.POTENTIAL_PLUS if sign > 0 else HiddenValue.POTENTIAL_MINUS

    @staticmethod
    def actual(sign: int) -> HiddenValue:
        return HiddenValue.ACTUAL_PLUS if sign > 0 else HiddenValue.ACTUAL_MINUS

    def flipped(self) -> HiddenValue:
        assert self.is_potential
        return HiddenValue.potential(-self.sign)

    @property
    def symbol(self) -> str:
        return _SYMBOLS[self]


_SYMBOLS = {
    HiddenValue.UNDETERMINED: "∅",
    HiddenValue.POTENTIAL_MINUS: "-",
    HiddenValue.POTENTIAL_PLUS: "+",
    HiddenValue.ACTUAL_MINUS: "⊖",
    HiddenValue.ACTUAL_PLUS: "⊕",
}
_TOKENS = {v.value: v for v in HiddenValue}


class PureState(NamedTuple):
    a1: HiddenValue
    a2: HiddenValue
    b1: HiddenValue
    b2: HiddenValue

    def value(self, m: Obs) -> HiddenValue:
        return self[m.value]

    def with_value(self, m: Obs, v: HiddenValue) -> PureState:
        vals = list(self)
        vals[m.value] = v
        return PureState(*vals)

    def __str__(self) -> str:
        return " ".join(f"{o.name.lower()}:{v.value}" for o, v in zip(Obs, self))

    def pretty(self) -> str:
        return "".join(f"{o.name.lower()}^{v.symbol}" for o, v in zip(Obs, self))

    @classmethod
    def parse(cls, text: str) -> PureState:
        """Parse ``"a1:+ a2:0 b1:-- b2:-"``; tokens may come in any order."""
        vals: dict[Obs, HiddenValue] = {}
        for tok in text.split():
            name, _, val = tok.partition(":")
            try:
                o = Obs[name.upper()]
                v = _TOKENS[val]
            except KeyError:
                raise ValueError(f"bad hidden-value token {tok!r}") from None
            if o in vals:
                raise ValueError(f"observable {o} given twice in {text!r}")
            vals[o] = v
        if len(vals) != 4:
            raise ValueError(f"pure state needs all four observables: {text!r}")
        return cls(*(vals[o] for o in Obs))


U, PM, PP, AM, AP = (
    HiddenValue.UNDETERMINED,
    HiddenValue.POTENTIAL_MINUS,
    HiddenValue.POTENTIAL_PLUS,
    HiddenValue.ACTUAL_MINUS,
    HiddenValue.ACTUAL_PLUS,
)

FRESH = PureState(U, U, U, U)
ALL_STATES: tuple[PureState, ...] = tuple(
    PureState(*vals) for vals in itertools.product(HiddenValue, repeat=4)
)

# Post-measurement states of FRESH, indexed by observable then outcome.
FRESH_POST: dict[Obs, dict[int, PureState]] = {
    Obs.A1: {-1: PureState(AM, U, PM, PM), +1: PureState(AP, U, PP, PP)},
    Obs.A2: {-1: PureState(U, AM, PM, PP), +1: PureState(U, AP, PP, PM)},
    Obs.B1: {-1: PureState(PM, PM, AM, U), +1: PureState(PP, PP, AP, U)},
    Obs.B2: {-1: PureState(PM, PP, U, AM), +1: PureState(PP, PM, U, AP)},
}


@dataclass(frozen=True)
class Rules:
    """Switches for the measurement rules; anything but the default is a
    deliberately broken model used to check that the verifiers catch bugs."""

    actualize: bool = True
    flip_potentials: bool = True
    fresh_table: bool = True


DEFAULT_RULES = Rules()
SKIP_ACTUALIZATION = Rules(actualize=False)
NEVER_FLIP = Rules(flip_potentials=False)


def outcome_distribution(s: PureState, m: Obs) -> Dist[int]:
    sign = s.value(m).sign
    if sign is None:
        return Dist({-1: HALF, +1: HALF})
    return Dist.point(sign)


@functools.lru_cache(maxsize=None)
def measure(s: PureState, m: Obs, rules: Rules = DEFAULT_RULES) -> Dist[tuple[int, PureState]]:
    """Joint distribution of outcome and post-measurement state."""
    if rules.fresh_table and s == FRESH:
        return Dist({(o, FRESH_POST[m][o]): HALF for o in OUTCOMES})
    out: dict[tuple[int, PureState], Fraction] = {}
    partner = m.partner
    for o, p in outcome_distribution(s, m).items():
        post = s.with_value(m, HiddenValue.actual(o)) if rules.actualize else s
        pv = post.value(partner)
        if rules.flip_potentials and pv.is_potential:
            branches = [(post, p * HALF), (post.with_value(partner, pv.flipped()), p * HALF)]
        else:
            branches = [(post, p)]
        for st, q in branches:
            out[(o, st)] = out.get((o, st), Fraction(0)) + q
    return Dist(out)


def measure_ensemble(
    e: Dist[PureState], m: Obs, rules: Rules = DEFAULT_RULES
) -> dict[int, tuple[Fraction, Dist[PureState]]]:
    """Outcome probabilities with the conditioned post-measurement ensembles.

    Outcomes of probability zero are omitted.
    """
    joint: dict[int, dict[PureState, Fraction]] = {}
    for s, p in e.items():
        for (o, post), q in measure(s, m, rules).items():
            bucket = joint.setdefault(o, {})
            bucket[post] = bucket.get(post, Fraction(0)) + p * q
    result = {}
    for o in OUTCOMES:
        if o in joint:
            total = sum(joint[o].values(), Fraction(0))
            result[o] = (total, Dist({s: q / total for s, q in joint[o].items()}))
    return result


# -- sequences ----------------------------------------------------------------

Branches = dict[tuple[tuple[int, ...], PureState], Fraction]


def _step(branches: Branches, m: Obs, rules: Rules) -> Branches:
    out: Branches = {}
    for (outs, s), p in branches.items():
        for (o, post), q in measure(s, m, rules).items():
            key = (outs + (o,), post)
            out[key] = out.get(key, Fraction(0)) + p * q
    return out


def _initial_branches(e0: Dist[PureState] | PureState) -> Branches:
    if isinstance(e0, PureState):
        return {((), e0): Fraction(1)}
    return {((), s): p for s, p in e0.items()}


@dataclass(frozen=True)
class SequenceResult:
    sequence: tuple[Obs, ...]
    branches: Dist[tuple[tuple[int, ...], PureState]]

    def outcome_distribution(self) -> Dist[tuple[int, ...]]:
        return self.branches.map(lambda b: b[0])

    def final_ensemble(self) -> Dist[PureState]:
        return self.branches.map(lambda b: b[1])

    def marginal(self, positions: Sequence[int]) -> Dist[tuple[int, ...]]:
        return self.branches.map(lambda b: tuple(b[0][i] for i in positions))


def run_sequence(
    e0: Dist[PureState] | PureState, seq: Iterable[Obs], rules: Rules = DEFAULT_RULES
) -> SequenceResult:
    """Exact branch distribution over (outcome tuple, final pure state).

    Identical leaves are merged, so the width stays below 2**len(seq) * 625.
    """
    seq = tuple(seq)
    branches = _initial_branches(e0)
    for m in seq:
        branches = _step(branches, m, rules)
    return SequenceResult(seq, Dist(branches))


def expand_paths(
    s0: PureState, seq: Sequence[Obs], rules: Rules = DEFAULT_RULES
) -> list[tuple[Fraction, list[tuple[Obs, int, PureState]]]]:
    """Unmerged tree of every path with its intermediate states, for traces."""
    paths = [(Fraction(1), s0, [])]
    for m in seq:
        nxt = []
        for p, s, hist in paths:
            for (o, post), q in measure(s, m, rules).items():
                nxt.append((p * q, post, hist + [(m, o, post)]))
        paths = nxt
    return [(p, hist) for p, _, hist in paths]


def sample_sequence(
    e0: Dist[PureState] | PureState,
    seq: Iterable[Obs],
    stream: SeedStream,
    rules: Rules = DEFAULT_RULES,
) -> tuple[tuple[int, ...], PureState]:
    """One Monte Carlo rollout of ``seq``."""
    s = e0 if isinstance(e0, PureState) else sample(e0, stream)
    outs = []
    for m in seq:
        o, s = sample(measure(s, m, rules), stream)
        outs.append(o)
    return tuple(outs), s


# -- verifier reports ---------------------------------------------------------

MAX_COUNTEREXAMPLES = 10


@dataclass
class VerifierReport:
    name: str
    checked: int = 0
    violations: int = 0
    counterexamples: list[str] = field(default_factory=list)
    lines: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def record(self, trace: str) -> None:
        self.violations += 1
        if len(self.counterexamples) < MAX_COUNTEREXAMPLES:
            self.counterexamples.append(trace)

    def merge(self, other: VerifierReport) -> None:
        self.checked += other.checked
        for trace in other.counterexamples:
            if len(self.counterexamples) < MAX_COUNTEREXAMPLES:
                self.counterexamples.append(trace)
        self.violations += other.violations
        self.lines.extend(other.lines)

    def render(self) -> str:
        out = [f"== {self.name} =="]
        out += self.lines
        if self.counterexamples:
            shown = len(self.counterexamples)
            out.append(f"counterexamples (first {shown} of {self.violations}):")
            out += ["  " + line for c in self.counterexamples for line in c.splitlines()]
        out.append(f"# summary checked={self.checked} violations={self.violations}")
        return "\n".join(out)


def _seq_str(seq: Sequence[Obs]) -> str:
    return "[" + ",".join(m.name for m in seq) + "]"


def _outs_str(outs: Sequence[int]) -> str:
    return "(" + ",".join(format_outcome(o) for o in outs) + ")"


def _path_trace(s0: PureState, seq, outs, rules) -> list[str]:
    lines = []
    for p, hist in expand_paths(s0, seq, rules):
        if tuple(o for _, o, _ in hist) == tuple(outs):
            steps = " -> ".join(f"{m.name}={format_outcome(o)} [{st}]" for m, o, st in hist)
            lines.append(f"    p={format_rational(p)}: [{s0}] -> {steps}")
    return lines


def _has_repeat(seq: Sequence[Obs]) -> bool:
    return len(set(seq)) < len(seq)


def _repeats_agree(seq: Sequence[Obs], outs: Sequence[int]) -> bool:
    seen: dict[Obs, int] = {}
    for m, o in zip(seq, outs):
        if seen.setdefault(m, o) != o:
            return False
    return True


def count_sequences_with_repeat(max_len: int) -> int:
    return sum(1 for n in range(2, max_len + 1) for seq in itertools.product(Obs, repeat=n)
               if _has_repeat(seq))


def check_nondisturbance(
    max_len: int,
    rules: Rules = DEFAULT_RULES,
    initial_states: Iterable[PureState] = ALL_STATES,
) -> VerifierReport:
    """Repeated measurements of one observable must agree in every branch.

    Checks every sequence of length 2..max_len that repeats some observable;
    sequences sharing a prefix reuse its branch distribution.
    """
    if max_len < 2:
        raise ValueError("max_len must be at least 2")
    states = list(initial_states)
    report = VerifierReport("nondisturbance")
    n_seq = count_sequences_with_repeat(max_len)
    n_all = sum(4**n for n in range(2, max_len + 1))

    def visit(s0: PureState, seq: tuple[Obs, ...], branches: Branches) -> None:
        if len(seq) >= 2 and _has_repeat(seq):
            report.checked += 1
            for outs, _ in branches:
                if not _repeats_agree(seq, outs):
                    report.record(
                        f"state [{s0}] sequence {_seq_str(seq)} outcomes {_outs_str(outs)}\n"
                        + "\n".join(_path_trace(s0, seq, outs, rules))
                    )
                    break
        if len(seq) < max_len:
            for m in Obs:
                visit(s0, seq + (m,), _step(branches, m, rules))

    for s0 in states:
        visit(s0, (), _initial_branches(s0))
    report.lines.append(
        f"checked {len(states)}x{n_seq} cases "
        f"({n_seq} of the {n_all} sequences of length 2..{max_len} repeat an observable), "
        f"{report.violations} violations"
    )
    return report


def interleavings(own: Sequence[Obs], other: Sequence[Obs]):
    """Every merge of two sequences preserving each one's order.

    Yields ``(merged sequence, positions of own's elements)``.
    """
    n = len(own) + len(other)
    for pos in itertools.combinations(range(n), len(own)):
        pos_set = set(pos)
        it_own, it_other = iter(own), iter(other)
        merged = tuple(next(it_own) if i in pos_set else next(it_other) for i in range(n))
        yield merged, pos


def _party_seqs(obs: Sequence[Obs], lo: int, hi: int):
    for n in range(lo, hi + 1):
        yield from itertools.product(obs, repeat=n)


def check_no_signaling(
    max_bob: int,
    max_alice: int,
    rules: Rules = DEFAULT_RULES,
    initial_states: Iterable[PureState] = ALL_STATES,
) -> VerifierReport:
    """Bob's outcome statistics must not depend on Alice's interleaved
    measurements, and vice versa, compared by exact equality."""
    if max_bob < 1 or max_alice < 1:
        raise ValueError("bounds must be at least 1")
    states = list(initial_states)
    report = VerifierReport("no-signaling")
    roles = [
        ("Bob", BOB_OBS, max_bob, "Alice", ALICE_OBS, max_alice),
        ("Alice", ALICE_OBS, max_alice, "Bob", BOB_OBS, max_bob),
    ]
    for name, own_obs, max_own, other_name, other_obs, max_other in roles:
        phase = VerifierReport(f"{name} vs {other_name}")
        for s0 in states:
            for own in _party_seqs(own_obs, 1, max_own):
                ref = run_sequence(s0, own, rules).outcome_distribution()
                for other in _party_seqs(other_obs, 1, max_other):
                    for merged, pos in interleavings(own, other):
                        phase.checked += 1
                        got = run_sequence(s0, merged, rules).marginal(pos)
                        if got != ref:
                            phase.record(
                                f"state [{s0}] {name} {_seq_str(own)} alone: {_fmt_dist(ref)}\n"
                                f"  with {other_name} interleaved as {_seq_str(merged)}: "
                                f"{_fmt_dist(got)}"
                            )
        report.lines.append(
            f"{name}'s statistics under {other_name}'s interleavings: "
            f"{phase.checked} comparisons, {phase.violations} violations"
        )
        phase.lines.clear()
        report.merge(phase)
    return report


def _fmt_dist(d: Dist[tuple[int, ...]]) -> str:
    keys = sorted(d.support)
    return "{" + ", ".join(f"{_outs_str(k)}: {format_rational(d[k])}" for k in keys) + "}"


# -- PR-box correlations from the fresh state ---------------------------------


class TimeOrderMismatch(AssertionError):
    pass


def fresh_pair_table(a: Obs, b: Obs, order: str = "AB", rules: Rules = DEFAULT_RULES):
    """Joint table of (A_i, B_j) outcomes from the fresh state.

    ``order`` is "AB" to measure Alice first or "BA" for Bob first; the table
    is always keyed as (Alice's outcome, Bob's outcome).
    """
    if order == "AB":
        return run_sequence(FRESH, (a, b), rules).outcome_distribution()
    if order == "BA":
        return run_sequence(FRESH, (b, a), rules).outcome_distribution().map(lambda t: (t[1], t[0]))
    raise ValueError(f"order must be 'AB' or 'BA', not {order!r}")


def fresh_state_correlations(rules: Rules = DEFAULT_RULES) -> dict[tuple[Obs, Obs], Dist]:
    """The four cross-party tables from the fresh state, checked in both time orders."""
    tables = {}
    for a, b in CROSS_PAIRS:
        ab = fresh_pair_table(a, b, "AB", rules)
        ba = fresh_pair_table(a, b, "BA", rules)
        if ab != ba:
            raise TimeOrderMismatch(f"{a},{b}: {ab} != {ba}")
        tables[(a, b)] = ab
    return tables


def fresh_state_as_pairwise(rules: Rules = DEFAULT_RULES) -> PairwiseState:
    """Cross tables from the fresh state plus uniform local joints."""
    tables = {k: {op: d[op] for op in UNIFORM_PAIR} for k, d in fresh_state_correlations(rules).items()}
    tables[ALICE_OBS] = dict(UNIFORM_PAIR)
    tables[BOB_OBS] = dict(UNIFORM_PAIR)
    return PairwiseState(tables)


def matches_pr_box(tables: dict[tuple[Obs, Obs], Dist]) -> bool:
    return all(tables[k][op] == PR_BOX_TABLES[k][op] for k in CROSS_PAIRS for op in UNIFORM_PAIR)


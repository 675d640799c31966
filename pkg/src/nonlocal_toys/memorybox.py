"""A shared PR box plus two bits of memory per party.

The first measurement on each side queries the PR box and stores the answer;
the party's other bit is filled with a fair coin. Later measurements just
replay the stored bits. This is a point of comparison for the hidden-value
automaton in :mod:`nonlocal_toys.sequential`.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .pairwise import OUTCOMES, Obs, Party, format_outcome
from .prob import Dist, SeedStream, format_rational, sample
from .sequential import FRESH, run_sequence

HALF = Fraction(1, 2)

Bits = tuple[int | None, int | None]


@dataclass(frozen=True)
class MemoryBoxState:
    """Local bits for each party and the record of each side's PR-box query.

    ``alice_query`` / ``bob_query`` hold the (observable, outcome) used on the
    box; the other side's first answer is conditioned on it.
    """

    alice: Bits = (None, None)
    bob: Bits = (None, None)
    alice_query: tuple[Obs, int] | None = None
    bob_query: tuple[Obs, int] | None = None

    def bits(self, party: Party) -> Bits:
        return self.alice if party is Party.ALICE else self.bob

    def query(self, party: Party) -> tuple[Obs, int] | None:
        return self.alice_query if party is Party.ALICE else self.bob_query

    def __str__(self) -> str:
        def fmt(bits: Bits) -> str:
            return ",".join("_" if b is None else format_outcome(b) for b in bits)

        return f"alice=({fmt(self.alice)}) bob=({fmt(self.bob)})"


FRESH_BOX = MemoryBoxState()


def _pr_answer(m: Obs, other: tuple[Obs, int] | None) -> Dist[int]:
    """PR-box output for input ``m`` given the other side's query, if any."""
    if other is None:
        return Dist({-1: HALF, +1: HALF})
    other_obs, other_out = other
    anti = {m, other_obs} == {Obs.A2, Obs.B2}
    return Dist.point(-other_out if anti else other_out)


def memory_box_transition(s: MemoryBoxState, m: Obs) -> Dist[tuple[int, MemoryBoxState]]:
    party = m.party
    idx = m.value & 1
    bits = s.bits(party)
    if bits[idx] is not None:
        return Dist.point((bits[idx], s))
    if bits != (None, None):
        raise AssertionError(f"half-initialized memory {s}")
    other_party = Party.BOB if party is Party.ALICE else Party.ALICE
    out: dict[tuple[int, MemoryBoxState], Fraction] = {}
    for o, p in _pr_answer(m, s.query(other_party)).items():
        for r in OUTCOMES:
            new_bits = (o, r) if idx == 0 else (r, o)
            if party is Party.ALICE:
                post = MemoryBoxState(new_bits, s.bob, (m, o), s.bob_query)
            else:
                post = MemoryBoxState(s.alice, new_bits, s.alice_query, (m, o))
            out[(o, post)] = p * HALF
    return Dist(out)


def memory_box_measure(
    s: MemoryBoxState, m: Obs, stream: SeedStream
) -> tuple[int, MemoryBoxState]:
    return sample(memory_box_transition(s, m), stream)


def memory_box_sequence(seq, s0: MemoryBoxState = FRESH_BOX) -> Dist[tuple[int, ...]]:
    """Exact outcome-tuple distribution of a measurement sequence."""
    branches: dict[tuple[tuple[int, ...], MemoryBoxState], Fraction] = {((), s0): Fraction(1)}
    for m in seq:
        nxt: dict = {}
        for (outs, s), p in branches.items():
            for (o, post), q in memory_box_transition(s, m).items():
                key = (outs + (o,), post)
                nxt[key] = nxt.get(key, Fraction(0)) + p * q
        branches = nxt
    return Dist(branches).map(lambda b: b[0])


def _fmt(d: Dist[tuple[int, ...]]) -> str:
    keys = sorted(d.support)
    return "{" + ", ".join(
        "(" + ",".join(format_outcome(o) for o in k) + f"): {format_rational(d[k])}" for k in keys
    ) + "}"


@dataclass
class ModelComparison:
    max_len: int
    compared: int
    divergences: list[tuple[tuple[Obs, ...], Dist, Dist]]

    def render(self) -> str:
        lines = [
            "== compare-models ==",
            f"sequences of length 1..{self.max_len} from the fresh states: {self.compared}",
            f"sequences where the automaton and the memory-box model differ: {len(self.divergences)}",
        ]
        for seq, toy, box in self.divergences:
            lines.append(f"[{','.join(m.name for m in seq)}]")
            lines.append(f"  automaton:  {_fmt(toy)}")
            lines.append(f"  memory box: {_fmt(box)}")
        lines.append(f"# summary checked={self.compared} divergences={len(self.divergences)}")
        return "\n".join(lines)


def compare_models(max_len: int) -> ModelComparison:
    """Exact outcome statistics of both models on every sequence up to ``max_len``."""
    divergences = []
    compared = 0
    for n in range(1, max_len + 1):
        for seq in itertools.product(Obs, repeat=n):
            compared += 1
            toy = run_sequence(FRESH, seq).outcome_distribution()
            box = memory_box_sequence(seq)
            if toy != box:
                divergences.append((seq, toy, box))
    return ModelComparison(max_len, compared, divergences)


"""Corpora of pairwise states for the tests."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from nonlocal_toys.pairwise import (
    ASSIGNMENTS,
    CROSS_PAIRS,
    OUTCOME_PAIRS,
    UNIFORM_PAIR,
    Obs,
    PairwiseState,
    deterministic_state,
    mix_states,
)

HALF = Fraction(1, 2)


def correlated(sign: int) -> dict:
    """Uniform marginals, outcomes equal (sign=+1) or opposite (sign=-1)."""
    return {(a, b): HALF if a * b == sign else Fraction(0) for a, b in OUTCOME_PAIRS}


def box_state(cross_signs: dict, alice_local=None, bob_local=None) -> PairwiseState:
    """Uniform marginals with cross tables set by correlation sign (0 = independent)."""
    tables = {}
    for k in CROSS_PAIRS:
        s = cross_signs.get(k, 0)
        tables[k] = dict(UNIFORM_PAIR) if s == 0 else correlated(s)
    tables[(Obs.A1, Obs.A2)] = dict(alice_local or UNIFORM_PAIR)
    tables[(Obs.B1, Obs.B2)] = dict(bob_local or UNIFORM_PAIR)
    return PairwiseState(tables)


def pr_variants() -> list[PairwiseState]:
    """The eight PR boxes: an odd number of anticorrelated cross pairs."""
    out = []
    for signs in itertools.product((1, -1), repeat=4):
        if signs.count(-1) % 2 == 1:
            out.append(box_state(dict(zip(CROSS_PAIRS, signs))))
    return out


def frustrated_state() -> PairwiseState:
    """A1 = B1 and A2 = B1 but A1 = -A2: no joint model, yet CHSH is only 2."""
    return box_state(
        {(Obs.A1, Obs.B1): 1, (Obs.A2, Obs.B1): 1},
        alice_local=correlated(-1),
    )


VERTEX_STATES = [deterministic_state(v) for v in ASSIGNMENTS]
EXTRA_STATES = pr_variants() + [frustrated_state()]


def random_state(rng: random.Random, max_parts: int = 4, denom: int = 12) -> PairwiseState:
    """Random rational mixture of deterministic, PR and frustrated states."""
    pool = VERTEX_STATES + EXTRA_STATES
    k = rng.randint(1, max_parts)
    parts = rng.sample(pool, k)
    raw = [rng.randint(1, denom) for _ in parts]
    total = sum(raw)
    return mix_states([(Fraction(r, total), s) for r, s in zip(raw, parts)])

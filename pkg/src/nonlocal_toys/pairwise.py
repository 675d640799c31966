"""The jointly-measurable toy theory: states as six consistent pairwise tables.

A state assigns a joint distribution to every pair of the four +-1 valued
observables A1, A2, B1, B2, with all single-observable marginals agreeing.
Alice's and Bob's local pairs are measurable jointly through the four-outcome
observables C_A and C_B, yet the cross-party tables can be those of a PR box.
"""

from __future__ import annotations

import enum
import itertools
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from fractions import Fraction

from .lp import find_feasible_point
from .prob import BadWeights, Dist, as_rational, format_rational

OUTCOMES = (-1, +1)
OUTCOME_PAIRS = tuple(itertools.product(OUTCOMES, repeat=2))


class Party(enum.Enum):
    ALICE = "Alice"
    BOB = "Bob"


class Obs(enum.Enum):
    """The four basic observables, in canonical order A1 < A2 < B1 < B2."""

    A1 = 0
    A2 = 1
    B1 = 2
    B2 = 3

    @property
    def party(self) -> Party:
        return Party.ALICE if self.value < 2 else Party.BOB

    @property
    def partner(self) -> Obs:
        """The other observable of the same party."""
        return Obs(self.value ^ 1)

    def __lt__(self, other: Obs) -> bool:
        return self.value < other.value

    def __str__(self) -> str:
        return self.name

    def __repr__(self) -> str:
        return self.name


ALICE_OBS = (Obs.A1, Obs.A2)
BOB_OBS = (Obs.B1, Obs.B2)
PAIRS: tuple[tuple[Obs, Obs], ...] = tuple(itertools.combinations(Obs, 2))
CROSS_PAIRS = tuple((a, b) for a in ALICE_OBS for b in BOB_OBS)
# All 16 deterministic assignments (a1, a2, b1, b2).
ASSIGNMENTS = tuple(itertools.product(OUTCOMES, repeat=4))


class InconsistentState(ValueError):
    pass


class InvalidState(ValueError):
    def __init__(self, report: ValidationReport):
        super().__init__(report.summary())
        self.report = report


def pair_key(x: Obs, y: Obs) -> tuple[Obs, Obs]:
    if x == y:
        raise ValueError(f"pair needs two distinct observables, got {x} twice")
    return (x, y) if x < y else (y, x)


def format_outcome(x: int) -> str:
    return "+1" if x > 0 else "-1"


class PairwiseState:
    """Six joint tables keyed by canonically ordered observable pairs.

    Construction only checks shape and exactness; use :func:`validate` to check
    normalization and marginal conditions. Missing cells are zero.
    """

    def __init__(self, tables: Mapping[tuple[Obs, Obs], Mapping[tuple[int, int], Fraction]]):
        norm: dict[tuple[Obs, Obs], dict[tuple[int, int], Fraction]] = {}
        for key, table in tables.items():
            k = pair_key(*key)
            if k != tuple(key):
                # Reorder the table's outcome pairs to follow the canonical key.
                table = {(y, x): p for (x, y), p in table.items()}
            cells = {op: Fraction(0) for op in OUTCOME_PAIRS}
            for op, p in table.items():
                if op not in cells:
                    raise ValueError(f"bad outcome pair {op!r} for {k}")
                cells[op] = as_rational(p)
            norm[k] = cells
        missing = [k for k in PAIRS if k not in norm]
        if missing:
            raise ValueError(f"missing tables for pairs {missing}")
        self._tables = norm

    def table(self, x: Obs, y: Obs) -> dict[tuple[int, int], Fraction]:
        """Copy of the table for ``(x, y)`` with outcomes ordered as ``(x, y)``."""
        k = pair_key(x, y)
        t = self._tables[k]
        if k == (x, y):
            return dict(t)
        return {(b, a): p for (a, b), p in t.items()}

    def dist(self, x: Obs, y: Obs) -> Dist[tuple[int, int]]:
        return Dist(self.table(x, y))

    def prob(self, x: Obs, y: Obs, ox: int, oy: int) -> Fraction:
        return self.table(x, y)[(ox, oy)]

    @property
    def tables(self) -> dict[tuple[Obs, Obs], dict[tuple[int, int], Fraction]]:
        return {k: dict(v) for k, v in self._tables.items()}

    def __eq__(self, other) -> bool:
        if not isinstance(other, PairwiseState):
            return NotImplemented
        return self._tables == other._tables

    def __hash__(self) -> int:
        return hash(tuple(tuple(self._tables[k].items()) for k in PAIRS))

    def __repr__(self) -> str:
        parts = []
        for k in PAIRS:
            cells = ", ".join(
                f"({format_outcome(a)},{format_outcome(b)}): {format_rational(p)}"
                for (a, b), p in self._tables[k].items()
            )
            parts.append(f"{k[0]},{k[1]}: {{{cells}}}")
        return "PairwiseState(" + "; ".join(parts) + ")"


# -- validation ---------------------------------------------------------------


@dataclass(frozen=True)
class Check:
    kind: str  # "normalization" | "nonnegativity" | "no-signaling" | "local-marginal"
    subject: str
    ok: bool
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.ok]

    def summary(self) -> str:
        fails = self.failures
        if not fails:
            return f"valid: {len(self.checks)} checks passed"
        lines = [f"invalid: {len(fails)} of {len(self.checks)} checks failed"]
        lines += [f"  [{c.kind}] {c.subject}: {c.detail}" for c in fails]
        return "\n".join(lines)


def _marginal_from(table: Mapping[tuple[int, int], Fraction], position: int) -> dict[int, Fraction]:
    out = {x: Fraction(0) for x in OUTCOMES}
    for op, p in table.items():
        out[op[position]] += p
    return out


def validate(s: PairwiseState) -> ValidationReport:
    """Check every table and every marginal condition; never raises."""
    report = ValidationReport()
    for k in PAIRS:
        t = s.table(*k)
        name = f"{k[0]},{k[1]}"
        neg = [op for op, p in t.items() if p < 0]
        report.checks.append(
            Check("nonnegativity", name, not neg, f"negative cells {neg}" if neg else "")
        )
        total = sum(t.values(), Fraction(0))
        report.checks.append(
            Check("normalization", name, total == 1, "" if total == 1 else f"sums to {total}")
        )
    for x in Obs:
        containing = [pair_key(x, y) for y in Obs if y != x]
        margs = {k: _marginal_from(s.table(*k), k.index(x)) for k in containing}
        for k1, k2 in itertools.combinations(containing, 2):
            y1 = k1[1 - k1.index(x)]
            y2 = k2[1 - k2.index(x)]
            no_sig = y1.party == y2.party != x.party
            kind = "no-signaling" if no_sig else "local-marginal"
            for o in OUTCOMES:
                p1, p2 = margs[k1][o], margs[k2][o]
                report.checks.append(
                    Check(
                        kind,
                        f"P({x}={format_outcome(o)}) via {y1} vs via {y2}",
                        p1 == p2,
                        "" if p1 == p2 else f"{format_rational(p1)} != {format_rational(p2)}",
                    )
                )
    return report


def require_valid(s: PairwiseState) -> PairwiseState:
    report = validate(s)
    if not report.ok:
        raise InvalidState(report)
    return s


# -- basic quantities ---------------------------------------------------------


def marginal(s: PairwiseState, x: Obs) -> Dist[int]:
    """The single-observable distribution of ``x``, identical from every pair."""
    found = None
    for y in Obs:
        if y == x:
            continue
        k = pair_key(x, y)
        m = _marginal_from(s.table(*k), k.index(x))
        if found is None:
            found = m
        elif m != found:
            raise InconsistentState(f"marginals of {x} disagree: {found} vs {m}")
    return Dist(found)


def correlator(s: PairwiseState, x: Obs, y: Obs) -> Fraction:
    """E(XY) = sum of a*b*P(a, b)."""
    return sum((a * b * p for (a, b), p in s.table(x, y).items()), Fraction(0))


# Sign tuples for (A1B1, A1B2, A2B1, A2B2): the four with one minus sign,
# then the four with three; (+,+,+,-) comes first.
CHSH_PATTERNS: tuple[tuple[int, int, int, int], ...] = tuple(
    tuple(-1 if (i == k) == (n == 1) else 1 for i in range(4))
    for n in (1, 3)
    for k in (3, 2, 1, 0)
)


@dataclass(frozen=True)
class ChshResult:
    value: Fraction
    pattern: tuple[int, int, int, int]
    correlators: dict[tuple[Obs, Obs], Fraction]

    @property
    def violates(self) -> bool:
        return self.value > 2

    def pattern_str(self) -> str:
        return "(" + ",".join("+" if v > 0 else "-" for v in self.pattern) + ")"


def chsh(s: PairwiseState) -> ChshResult:
    """Maximum of |S| over the eight CHSH sign patterns.

    Ties keep the first pattern in :data:`CHSH_PATTERNS` order.
    """
    corr = {k: correlator(s, *k) for k in CROSS_PAIRS}
    es = [corr[k] for k in CROSS_PAIRS]
    best_val, best_pat = None, None
    for pat in CHSH_PATTERNS:
        val = abs(sum((sg * e for sg, e in zip(pat, es)), Fraction(0)))
        if best_val is None or val > best_val:
            best_val, best_pat = val, pat
    return ChshResult(best_val, best_pat, corr)


# -- constructors -------------------------------------------------------------

# Cross-party PR-box tables: perfectly correlated except for (A2, B2).
PR_BOX_TABLES: dict[tuple[Obs, Obs], dict[tuple[int, int], Fraction]] = {
    (a, b): {
        (x, y): Fraction(1, 2) if (x == y) != (a == Obs.A2 and b == Obs.B2) else Fraction(0)
        for x, y in OUTCOME_PAIRS
    }
    for a, b in CROSS_PAIRS
}

UNIFORM_PAIR = {op: Fraction(1, 4) for op in OUTCOME_PAIRS}


def pr_box_state(
    alice_local: Mapping[tuple[int, int], Fraction] | None = None,
    bob_local: Mapping[tuple[int, int], Fraction] | None = None,
) -> PairwiseState:
    """PR-box correlations across parties; local joints default to uniform.

    Any local joint with uniform marginals may be supplied instead.
    """
    tables = dict(PR_BOX_TABLES)
    tables[(Obs.A1, Obs.A2)] = dict(alice_local or UNIFORM_PAIR)
    tables[(Obs.B1, Obs.B2)] = dict(bob_local or UNIFORM_PAIR)
    return require_valid(PairwiseState(tables))


def from_global(g: Dist[tuple[int, int, int, int]] | Mapping) -> PairwiseState:
    """Push a distribution over assignments (a1, a2, b1, b2) forward to all pairs."""
    items = g.items()
    tables = {}
    for x, y in PAIRS:
        t = {op: Fraction(0) for op in OUTCOME_PAIRS}
        for v, p in items:
            t[(v[x.value], v[y.value])] += p
        tables[(x, y)] = t
    return PairwiseState(tables)


def deterministic_state(assignment: tuple[int, int, int, int]) -> PairwiseState:
    return from_global(Dist.point(tuple(assignment)))


def product_state(plus_probs: Mapping[Obs, Fraction] | None = None) -> PairwiseState:
    """Independent observables with the given probabilities of +1 (default 1/2)."""
    plus = {o: Fraction(1, 2) for o in Obs}
    plus.update({o: as_rational(p) for o, p in (plus_probs or {}).items()})

    def p(o: Obs, v: int) -> Fraction:
        return plus[o] if v > 0 else 1 - plus[o]

    tables = {
        (x, y): {(a, b): p(x, a) * p(y, b) for a, b in OUTCOME_PAIRS} for x, y in PAIRS
    }
    return PairwiseState(tables)


def fully_correlated_state() -> PairwiseState:
    """All four observables equal, +1 or -1 with probability 1/2 each."""
    return from_global(Dist({(1, 1, 1, 1): Fraction(1, 2), (-1, -1, -1, -1): Fraction(1, 2)}))


def mix_states(components: Iterable[tuple[Fraction, PairwiseState]]) -> PairwiseState:
    components = [(as_rational(w), s) for w, s in components]
    if any(w < 0 for w, _ in components) or sum((w for w, _ in components), Fraction(0)) != 1:
        raise BadWeights("mixture weights must be nonnegative and sum to 1")
    tables = {}
    for k in PAIRS:
        t = {op: Fraction(0) for op in OUTCOME_PAIRS}
        for w, s in components:
            for op, p in s.table(*k).items():
                t[op] += w * p
        tables[k] = t
    return PairwiseState(tables)


# -- joint observables C_A / C_B ----------------------------------------------


def _bit(x: int) -> int:
    return 1 if x > 0 else 0


def joint_symbol(a: int, b: int) -> int:
    """Fixed injection of an outcome pair into {0, 1, 2, 3}, with -1 -> bit 0."""
    return 2 * _bit(a) + _bit(b)


def joint_symbol_inverse(k: int) -> tuple[int, int]:
    return (1 if k & 2 else -1, 1 if k & 1 else -1)


def joint_observable(s: PairwiseState, party: Party) -> Dist[int]:
    """Outcome distribution of C_A (or C_B): the party's local joint, relabeled."""
    x, y = ALICE_OBS if party is Party.ALICE else BOB_OBS
    return s.dist(x, y).map(lambda op: joint_symbol(*op))


def joint_observable_marginals(c: Dist[int]) -> tuple[Dist[int], Dist[int]]:
    """Decode both single-observable marginals from a C outcome distribution."""
    return (
        c.map(lambda k: joint_symbol_inverse(k)[0]),
        c.map(lambda k: joint_symbol_inverse(k)[1]),
    )


# -- local hidden variables ---------------------------------------------------


@dataclass(frozen=True)
class LhvVerdict:
    feasible: bool
    witness: Dist[tuple[int, int, int, int]] | None = None
    chsh_witness: ChshResult | None = None

    def describe(self) -> str:
        if self.feasible:
            return "FEASIBLE"
        if self.chsh_witness is not None:
            return f"INFEASIBLE; CHSH witness {format_rational(self.chsh_witness.value)} > 2"
        return "INFEASIBLE; no CHSH witness"


def lhv_constraints(s: PairwiseState) -> tuple[list[list[Fraction]], list[Fraction]]:
    """Equality system over the 16 assignment weights: 24 pair cells plus total mass."""
    A, b = [], []
    for x, y in PAIRS:
        t = s.table(x, y)
        for op in OUTCOME_PAIRS:
            A.append([Fraction(int((v[x.value], v[y.value]) == op)) for v in ASSIGNMENTS])
            b.append(t[op])
    A.append([Fraction(1)] * len(ASSIGNMENTS))
    b.append(Fraction(1))
    return A, b


def _product_witness(s: PairwiseState) -> Dist[tuple[int, int, int, int]]:
    margs = [marginal(s, o) for o in Obs]
    weights = {}
    for v in ASSIGNMENTS:
        p = Fraction(1)
        for m, x in zip(margs, v):
            p *= m[x]
        weights[v] = p
    return Dist(weights)


def lhv_feasibility(s: PairwiseState) -> LhvVerdict:
    """Decide exactly whether one joint distribution of all four observables
    reproduces every pairwise table of ``s``."""
    require_valid(s)
    A, b = lhv_constraints(s)
    x = find_feasible_point(A, b)
    if x is not None:
        # Prefer the product of the marginals when it already fits; it is the
        # canonical witness for independent observables.
        witness = _product_witness(s)
        if from_global(witness) != s:
            witness = Dist({v: p for v, p in zip(ASSIGNMENTS, x)})
        if from_global(witness) != s:
            raise AssertionError("LP witness does not reproduce the state")
        return LhvVerdict(True, witness=witness)
    c = chsh(s)
    return LhvVerdict(False, chsh_witness=c if c.violates else None)

"""Exact finite probability distributions and reproducible sampling.

Probabilities are :class:`fractions.Fraction` values throughout; nothing in
this module touches floating point.
"""

from __future__ import annotations

import math
from collections.abc import Hashable, Iterable, Iterator, Mapping
from fractions import Fraction
from typing import Generic, TypeVar

import numpy as np

Rational = Fraction

T = TypeVar("T", bound=Hashable)


class ProbabilityError(ValueError):
    pass


class AllZero(ProbabilityError):
    pass


class NegativeWeight(ProbabilityError):
    pass


class BadWeights(ProbabilityError):
    pass


def as_rational(x) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings; floats are rejected."""
    if isinstance(x, float):
        raise TypeError(f"refusing float probability {x!r}; use a Fraction or 'p/q'")
    return Fraction(x)


def format_rational(x: Fraction) -> str:
    """Serialize as ``"p/q"`` in lowest terms, always with a denominator."""
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_rational(text: str) -> Fraction:
    text = text.strip()
    if "." in text or "e" in text.lower():
        raise ValueError(f"not an exact rational: {text!r}")
    return Fraction(text)


class Dist(Generic[T]):
    """An immutable distribution over a finite set of hashable outcomes.

    Zero-weight outcomes are dropped on construction, so two distributions are
    equal exactly when they assign the same probability to every outcome.
    """

    __slots__ = ("_w", "_hash")

    def __init__(self, weights: Mapping[T, Fraction] | Iterable[tuple[T, Fraction]]):
        items = weights.items() if isinstance(weights, Mapping) else weights
        w: dict[T, Fraction] = {}
        for outcome, p in items:
            p = as_rational(p)
            if p < 0:
                raise NegativeWeight(f"weight {p} < 0 for outcome {outcome!r}")
            if outcome in w:
                raise ProbabilityError(f"duplicate outcome {outcome!r}")
            if p:
                w[outcome] = p
        total = sum(w.values(), Fraction(0))
        if total != 1:
            raise BadWeights(f"weights sum to {total}, not 1")
        self._w = w
        self._hash = None

    @classmethod
    def point(cls, outcome: T) -> Dist[T]:
        return cls({outcome: Fraction(1)})

    @classmethod
    def uniform(cls, outcomes: Iterable[T]) -> Dist[T]:
        outcomes = list(outcomes)
        return cls({o: Fraction(1, len(outcomes)) for o in outcomes})

    @property
    def support(self) -> tuple[T, ...]:
        return tuple(self._w)

    def prob(self, outcome: T) -> Fraction:
        return self._w.get(outcome, Fraction(0))

    def __getitem__(self, outcome: T) -> Fraction:
        return self.prob(outcome)

    def items(self):
        return self._w.items()

    def __iter__(self) -> Iterator[T]:
        return iter(self._w)

    def __len__(self) -> int:
        return len(self._w)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dist):
            return NotImplemented
        return self._w == other._w

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._w.items()))
        return self._hash

    def __repr__(self) -> str:
        body = ", ".join(f"{o!r}: {format_rational(p)}" for o, p in self._w.items())
        return f"Dist({{{body}}})"

    def map(self, f) -> Dist:
        """Pushforward of the distribution along ``f``."""
        out: dict = {}
        for o, p in self._w.items():
            k = f(o)
            out[k] = out.get(k, Fraction(0)) + p
        return Dist(out)

    def condition(self, pred) -> Dist[T]:
        kept = {o: p for o, p in self._w.items() if pred(o)}
        return normalize(kept)


def normalize(raw: Mapping[T, Fraction]) -> Dist[T]:
    """Divide weights by their sum, dropping zero-weight outcomes."""
    weights = {o: as_rational(p) for o, p in raw.items()}
    for o, p in weights.items():
        if p < 0:
            raise NegativeWeight(f"weight {p} < 0 for outcome {o!r}")
    total = sum(weights.values(), Fraction(0))
    if total == 0:
        raise AllZero("every weight is zero")
    return Dist({o: p / total for o, p in weights.items() if p})


def mix(components: Iterable[tuple[Fraction, Dist[T]]]) -> Dist[T]:
    """Convex combination of distributions with exact weights summing to 1."""
    components = [(as_rational(w), d) for w, d in components]
    if any(w < 0 for w, _ in components):
        raise BadWeights("negative mixture weight")
    total = sum((w for w, _ in components), Fraction(0))
    if total != 1:
        raise BadWeights(f"mixture weights sum to {total}, not 1")
    out: dict = {}
    for w, d in components:
        for o, p in d.items():
            out[o] = out.get(o, Fraction(0)) + w * p
    return Dist(out)


class SeedStream:
    """Reproducible randomness from the counter-based Philox4x64 generator.

    The 64-bit seed is expanded with :class:`numpy.random.SeedSequence`;
    :meth:`split` spawns statistically independent child streams, one per
    worker, so parallel runs stay replayable.
    """

    def __init__(self, seed: int | np.random.SeedSequence):
        if isinstance(seed, np.random.SeedSequence):
            self._seq = seed
        else:
            if not 0 <= seed < 2**64:
                raise ValueError("seed must be a 64-bit unsigned integer")
            self._seq = np.random.SeedSequence(seed)
        self._bitgen = np.random.Philox(self._seq)

    def split(self, n: int) -> list[SeedStream]:
        return [SeedStream(child) for child in self._seq.spawn(n)]

    def _word(self) -> int:
        return int(self._bitgen.random_raw())

    def randbelow(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` by rejection, exact for any ``n``."""
        if n <= 0:
            raise ValueError("n must be positive")
        if n == 1:
            return 0
        bits = (n - 1).bit_length()
        words = -(-bits // 64)
        mask = (1 << bits) - 1
        while True:
            r = 0
            for _ in range(words):
                r = (r << 64) | self._word()
            r &= mask
            if r < n:
                return r


def sample(d: Dist[T], stream: SeedStream) -> T:
    """Draw one outcome with its exact probability.

    Weights are scaled to integers over their common denominator and a
    uniform integer below that denominator is located in the cumulative sums.
    """
    items = list(d.items())
    if len(items) == 1:
        return items[0][0]
    denom = math.lcm(*(p.denominator for _, p in items))
    r = stream.randbelow(denom)
    acc = 0
    for outcome, p in items:
        acc += p.numerator * (denom // p.denominator)
        if r < acc:
            return outcome
    raise AssertionError("cumulative weights did not reach 1")

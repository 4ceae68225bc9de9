"""Enumeration, ranking and symmetry reduction of monomials and multidegrees.

Monomials in n variables are represented by exponent vectors (plain int
tuples).  A single global order is used everywhere: lexicographically
decreasing on the exponent vector.  Multidegrees of the ambient complex are
exponent vectors too, so the same utilities serve both roles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

ExponentVec = tuple[int, ...]

# Ranks must stay machine-word addressable; exceeding the bound is an input
# error, never silent overflow.  Adjustable via the CLI --max-degree flag.
MAX_DEGREE = 64


class DegreeBoundError(ValueError):
    """Requested degree exceeds the configured MAX_DEGREE bound."""


def _check_degree(d: int) -> None:
    if d > MAX_DEGREE:
        raise DegreeBoundError(
            f"degree {d} exceeds the configured bound {MAX_DEGREE} "
            f"(raise it with --max-degree if intended)"
        )


@dataclass(frozen=True)
class RingParams:
    """Ambient polynomial ring in n variables, together with the power c."""

    n: int
    c: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"need at least one variable, got n={self.n}")
        if self.c < 1:
            raise ValueError(f"need a positive power, got c={self.c}")

    @property
    def N(self) -> int:
        """Number of degree-c monomials, binomial(n+c-1, c)."""
        return math.comb(self.n + self.c - 1, self.c)


def monomial_count(n: int, d: int) -> int:
    """Number of degree-d monomials in n variables."""
    if d < 0:
        return 0
    return math.comb(n - 1 + d, n - 1)


def compositions(n: int, d: int) -> Iterator[ExponentVec]:
    """Yield every length-n exponent vector of total d, lex-decreasing."""
    if n < 1:
        raise ValueError("need n >= 1")
    if d < 0:
        return
    _check_degree(d)
    if n == 1:
        yield (d,)
        return
    for head in range(d, -1, -1):
        for tail in compositions(n - 1, d - head):
            yield (head,) + tail


def enumerate_monomials(params: RingParams, d: int) -> list[ExponentVec]:
    """All degree-d monomials of the ring, in the canonical lex-decreasing order."""
    return list(compositions(params.n, d))


def rank_monomial(params: RingParams, m: Sequence[int]) -> int:
    """Index of m within enumerate_monomials(params, sum(m)).

    Computed combinatorially in O(n*d); no table is built.
    """
    n = params.n
    if len(m) != n:
        raise ValueError(f"expected {n} coordinates, got {len(m)}")
    rem = sum(m)
    _check_degree(rem)
    r = 0
    for pos in range(n - 1):
        parts = n - pos - 1  # remaining coordinates after this one
        for head in range(rem, m[pos], -1):
            r += monomial_count(parts, rem - head)
        rem -= m[pos]
    return r


def unrank_monomial(params: RingParams, r: int, d: int) -> ExponentVec:
    """Inverse of rank_monomial at degree d."""
    n = params.n
    _check_degree(d)
    if not 0 <= r < monomial_count(n, d):
        raise ValueError(f"rank {r} out of range for n={n}, d={d}")
    coords = []
    rem = d
    for pos in range(n - 1):
        parts = n - pos - 1
        head = rem
        while True:
            block = monomial_count(parts, rem - head)
            if r < block:
                break
            r -= block
            head -= 1
        coords.append(head)
        rem -= head
    coords.append(rem)
    return tuple(coords)


def vec_add(a: ExponentVec, b: ExponentVec) -> ExponentVec:
    return tuple(x + y for x, y in zip(a, b))


def vec_sub(a: ExponentVec, b: ExponentVec) -> ExponentVec:
    """Componentwise difference; caller guarantees divisibility."""
    return tuple(x - y for x, y in zip(a, b))


def divides(m: ExponentVec, alpha: Sequence[int]) -> bool:
    """True when the monomial m divides X^alpha componentwise."""
    return all(x <= a for x, a in zip(m, alpha))


def unit_vector(n: int, i: int) -> ExponentVec:
    return tuple(1 if k == i else 0 for k in range(n))


@dataclass(frozen=True)
class Orbit:
    """A multidegree orbit under permutation of the variables."""

    representative: ExponentVec  # weakly decreasing
    size: int


def orbit_size(alpha: Sequence[int]) -> int:
    """Number of distinct coordinate permutations of alpha."""
    size = math.factorial(len(alpha))
    counts: dict[int, int] = {}
    for value in alpha:
        counts[value] = counts.get(value, 0) + 1
    for mult in counts.values():
        size //= math.factorial(mult)
    return size


def canonicalize(alpha: Sequence[int]) -> Orbit:
    """Sorted-representative orbit of alpha under coordinate permutations."""
    rep = tuple(sorted(alpha, reverse=True))
    return Orbit(rep, orbit_size(tuple(alpha)))


def partitions_into(d: int, n: int) -> Iterator[ExponentVec]:
    """Weakly decreasing length-n vectors of total d (one per orbit), lex-decreasing."""
    _check_degree(d)

    def rec(remaining: int, slots: int, cap: int):
        if slots == 1:
            if remaining <= cap:
                yield (remaining,)
            return
        for head in range(min(remaining, cap), -1, -1):
            if head * slots < remaining:
                break
            for tail in rec(remaining - head, slots - 1, head):
                yield (head,) + tail

    yield from rec(d, n, d)

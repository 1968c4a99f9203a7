"""Irreducible degrees of symmetric and alternating groups.

Degrees come from the hook length formula over partitions; the alternating
data is derived by the conjugate-pair splitting rule (a pair {l, l'} with
l != l' restricts to one irreducible, a self-conjugate l splits into two of
half the degree).  No characters are computed: degrees and weights are all
the downstream trace calculus consumes.

Two presentations are produced.  Enumerated mode lists every block of
L A_n and checks 1 + sum k^2 = n!/2 exactly; it is limited by partition
growth.  Bounded mode records only |A_n| and the minimal-degree bound
k >= n-1 (valid for n >= 6), which is what the large-|D| inequality chain
needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Sequence

__all__ = [
    "Partition",
    "WedderburnData",
    "partitions",
    "symmetric_degrees",
    "alternating_wedderburn",
    "convex_trace",
    "ENUMERATION_CAP",
]

# Partition counts near n=60 approach 10^6; beyond that enumeration is
# pointless for this artifact's purposes.
ENUMERATION_CAP = 60


@dataclass(frozen=True)
class Partition:
    """Weakly decreasing positive parts."""

    parts: tuple[int, ...]

    def __post_init__(self):
        if any(p <= 0 for p in self.parts):
            raise ValueError(f"nonpositive part in {self.parts}")
        if any(a < b for a, b in zip(self.parts, self.parts[1:])):
            raise ValueError(f"parts not weakly decreasing: {self.parts}")

    @property
    def n(self) -> int:
        return sum(self.parts)

    def conjugate(self) -> "Partition":
        if not self.parts:
            return self
        cols = [sum(1 for p in self.parts if p > j) for j in range(self.parts[0])]
        return Partition(tuple(cols))

    def is_self_conjugate(self) -> bool:
        return self.conjugate() == self

    def hook_product(self) -> int:
        conj = self.conjugate().parts
        prod = 1
        for i, row in enumerate(self.parts):
            for j in range(row):
                prod *= row - j + conj[j] - i - 1
        return prod

    def degree(self) -> int:
        """Dimension of the associated symmetric-group irreducible."""
        fact = math.factorial(self.n)
        hooks = self.hook_product()
        deg, rem = divmod(fact, hooks)
        if rem:
            raise AssertionError(f"hook product does not divide {self.n}! for {self}")
        return deg


def partitions(n: int) -> Iterator[Partition]:
    """All partitions of n, largest first part first."""
    if n < 0:
        raise ValueError("n must be nonnegative")

    def rec(remaining: int, cap: int, prefix: tuple[int, ...]):
        if remaining == 0:
            yield Partition(prefix)
            return
        for part in range(min(cap, remaining), 0, -1):
            yield from rec(remaining - part, part, prefix + (part,))

    yield from rec(n, n, ())


def symmetric_degrees(n: int) -> tuple[int, ...]:
    """Multiset (sorted) of irreducible degrees of S_n; sum of squares = n!."""
    if not 1 <= n <= ENUMERATION_CAP:
        raise ValueError(f"n={n} outside enumeration range 1..{ENUMERATION_CAP}")
    degrees = sorted(p.degree() for p in partitions(n))
    if sum(d * d for d in degrees) != math.factorial(n):
        raise AssertionError(f"degree squares do not sum to {n}!")
    return tuple(degrees)


@dataclass(frozen=True)
class WedderburnData:
    """Matrix-block data of L A_n: sizes and convex trace weights.

    blocks is None in bounded mode; there only the order and the degree
    bound k_min are meaningful.
    """

    n: int
    order: int  # |A_n| = n!/2
    mode: str
    blocks: tuple[tuple[int, Fraction], ...] | None
    k_min: int

    @property
    def trivial_weight(self) -> Fraction:
        return Fraction(1, self.order)

    @property
    def nontrivial_weight_total(self) -> Fraction:
        return 1 - Fraction(1, self.order)

    def min_nontrivial_degree(self) -> int:
        if self.blocks is None:
            return self.k_min
        return min(k for k, _ in self.blocks)

    def degrees(self) -> tuple[int, ...]:
        if self.blocks is None:
            raise ValueError("bounded mode has no degree list")
        return tuple(sorted(k for k, _ in self.blocks))


def alternating_wedderburn(n: int, mode: str = "enumerated") -> WedderburnData:
    """Wedderburn data of the alternating group algebra, n >= 5."""
    if n < 5:
        raise ValueError(
            "n < 5 is outside the supported regime (orbits of size >= 5 only)"
        )
    if mode == "bounded":
        order = math.factorial(n) // 2
        return WedderburnData(n=n, order=order, mode=mode, blocks=None, k_min=n - 1)
    if mode != "enumerated":
        raise ValueError(f"unknown mode {mode!r}")
    if n > ENUMERATION_CAP:
        raise ValueError(f"enumerated mode capped at n={ENUMERATION_CAP}")
    order = math.factorial(n) // 2
    seen: set[tuple[int, ...]] = set()
    degrees: list[int] = []
    trivial_seen = False
    for lam in partitions(n):
        if lam.parts in seen:
            continue
        conj = lam.conjugate()
        if conj.parts == lam.parts:
            seen.add(lam.parts)
            d = lam.degree()
            if d % 2:
                raise AssertionError(
                    f"self-conjugate partition {lam} with odd degree {d}"
                )
            degrees.extend([d // 2, d // 2])
        else:
            seen.add(lam.parts)
            seen.add(conj.parts)
            d = lam.degree()
            if d == 1:
                # the pair {(n), (1^n)} restricts to the trivial summand
                trivial_seen = True
                continue
            degrees.append(d)
    if not trivial_seen:
        raise AssertionError("trivial pair not found among partitions")
    blocks = tuple(
        (k, Fraction(k * k, order)) for k in sorted(degrees)
    )
    total = Fraction(1, order) + sum(w for _, w in blocks)
    if total != 1:
        raise AssertionError(f"weights sum to {total}, not 1")
    if 1 + sum(k * k for k, _ in blocks) != order:
        raise AssertionError("degree squares plus trivial do not sum to |A_n|")
    return WedderburnData(
        n=n, order=order, mode=mode, blocks=blocks, k_min=min(degrees)
    )


def convex_trace(
    data: WedderburnData, trivial_value: Fraction, block_values: Sequence[Fraction]
) -> Fraction:
    """Convex combination b/|A_n| + sum_l lambda_l * tr_l of block traces."""
    if data.blocks is None:
        raise ValueError("need enumerated blocks for a convex trace")
    if len(block_values) != len(data.blocks):
        raise ValueError("one trace value per block required")
    total = Fraction(trivial_value, data.order)
    for (k, weight), value in zip(data.blocks, block_values):
        total += weight * Fraction(value)
    return total


@lru_cache(maxsize=None)
def _cached_wedderburn(n: int) -> WedderburnData:
    return alternating_wedderburn(n, "enumerated")


def enumerated(n: int) -> WedderburnData:
    """Cached enumerated data (the acceptance sweeps reuse small n heavily)."""
    return _cached_wedderburn(n)

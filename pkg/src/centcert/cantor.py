"""Substitution subshifts over Z, their clopen algebra and full group,
and the extraction of tower data for the alternating-group embedding.

The ambient space is the orbit closure of a two-sided fixed point of a
primitive substitution.  The fixed point is built from a seed pair (l, r)
with tau^k(r) starting in r and tau^k(l) ending in l; windows of the point
are evaluated lazily by iterating the substitution.  Clopen sets are
finite unions of cylinders, normalized over a common coordinate span as a
set of admissible span-words, so boolean operations and partition checks
are finite word-set computations.

Tower extraction follows the pigeonhole pattern: positions t + d carry a
partition-member vector depending only on a bounded window of the point,
linear factor complexity forces repeats among spaced candidates d, and a
long cylinder around the base point then witnesses every required
containment and disjointness by plain word comparisons.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .groups import SearchExhausted

__all__ = [
    "Substitution",
    "Subshift",
    "ClopenSet",
    "OrbitPoint",
    "FullGroupElement",
    "TowerData",
    "TowerReport",
    "PeriodicPointError",
    "fibonacci",
    "thue_morse",
    "refine_partition",
    "find_tower",
    "verify_tower",
    "SPAN_CAP",
]

# Clopen normalization enumerates admissible words of the span length;
# linear-complexity subshifts keep this cheap, but cap it anyway.
SPAN_CAP = 256


class PeriodicPointError(RuntimeError):
    """The reference point failed an aperiodicity check."""


class Substitution:
    """Primitive substitution rule on a finite alphabet."""

    def __init__(self, rules: Mapping[str, str]):
        if not rules:
            raise ValueError("empty rule set")
        for a, image in rules.items():
            if len(a) != 1:
                raise ValueError(f"alphabet symbols are single characters: {a!r}")
            if not image:
                raise ValueError(f"empty image for {a!r}")
            for c in image:
                if c not in rules:
                    raise ValueError(f"image letter {c!r} lacks a rule")
        self.rules = dict(rules)
        self.alphabet = tuple(sorted(rules))
        if not self._is_primitive():
            raise ValueError("substitution matrix is not primitive")

    def _is_primitive(self) -> bool:
        n = len(self.alphabet)
        pos = {a: i for i, a in enumerate(self.alphabet)}
        M = [[0] * n for _ in range(n)]
        for a, image in self.rules.items():
            for c in image:
                M[pos[a]][pos[c]] += 1
        # Wielandt: a primitive matrix has a positive power by (n-1)^2 + 1
        limit = (n - 1) ** 2 + 1
        P = M
        for _ in range(limit):
            if all(all(v > 0 for v in row) for row in P):
                return True
            P = [
                [sum(P[i][k] * M[k][j] for k in range(n)) for j in range(n)]
                for i in range(n)
            ]
        return False

    def apply(self, word: str) -> str:
        return "".join(self.rules[c] for c in word)

    def iterate(self, word: str, n: int) -> str:
        for _ in range(n):
            word = self.apply(word)
        return word


def fibonacci() -> "Subshift":
    return Subshift(Substitution({"a": "ab", "b": "a"}))


def thue_morse() -> "Subshift":
    return Subshift(Substitution({"a": "ab", "b": "ba"}))


class Subshift:
    """Orbit closure data of a two-sided substitution fixed point."""

    def __init__(self, substitution: Substitution, seed: tuple[str, str] | None = None,
                 power: int | None = None):
        self.substitution = substitution
        if seed is None or power is None:
            seed, power = self._find_seed()
        self.left_seed, self.right_seed = seed
        self.power = power
        self._left = self.left_seed
        self._right = self.right_seed
        self._factor_cache: dict[int, frozenset[str]] = {}
        self._aperiodic_up_to = 0
        self._check_seed()

    def _find_seed(self) -> tuple[tuple[str, str], int]:
        sub = self.substitution
        two = self._letter_pairs()
        for k in range(1, 9):
            lefts = [a for a in sub.alphabet if sub.iterate(a, k).endswith(a)]
            rights = [a for a in sub.alphabet if sub.iterate(a, k).startswith(a)]
            for l in lefts:
                for r in rights:
                    if l + r in two:
                        return (l, r), k
        raise ValueError("no admissible two-sided seed pair found")

    def _letter_pairs(self) -> set[str]:
        sub = self.substitution
        word = sub.alphabet[0]
        for _ in range(4 * len(sub.alphabet) + 8):
            word = sub.apply(word)
        pairs = {word[i : i + 2] for i in range(len(word) - 1)}
        prev = None
        while pairs != prev:
            prev = set(pairs)
            for p in prev:
                image = sub.apply(p)
                pairs |= {image[i : i + 2] for i in range(len(image) - 1)}
        return pairs

    def _check_seed(self):
        sub = self.substitution
        if not sub.iterate(self.right_seed, self.power).startswith(self.right_seed):
            raise ValueError("right seed is not extended forward")
        if not sub.iterate(self.left_seed, self.power).endswith(self.left_seed):
            raise ValueError("left seed is not extended backward")
        if self.left_seed + self.right_seed not in self._letter_pairs():
            raise ValueError("seed junction is not an admissible pair")

    # -- the reference point -------------------------------------------

    def _grow(self, lo: int, hi: int) -> None:
        while len(self._right) < hi:
            self._right = self.substitution.iterate(self._right, self.power)
        while len(self._left) < -lo:
            self._left = self.substitution.iterate(self._left, self.power)

    def window(self, lo: int, hi: int) -> str:
        """Letters of the reference point on [lo, hi)."""
        if hi <= lo:
            return ""
        self._grow(min(lo, 0), max(hi, 0))
        left_part = ""
        if lo < 0:
            left_part = self._left[len(self._left) + lo : len(self._left) + min(hi, 0)]
        right_part = self._right[max(lo, 0) : max(hi, 0)]
        return left_part + right_part

    def letter(self, i: int) -> str:
        return self.window(i, i + 1)

    def point(self, offset: int = 0) -> "OrbitPoint":
        return OrbitPoint(self, offset)

    # -- language -------------------------------------------------------

    def factors(self, length: int) -> frozenset[str]:
        """All admissible words of the given length."""
        if length < 0:
            raise ValueError("length must be nonnegative")
        if length == 0:
            return frozenset({""})
        cached = self._factor_cache.get(length)
        if cached is not None:
            return cached
        sub = self.substitution
        word = sub.alphabet[0]
        prev: frozenset[str] | None = None
        stable = 0
        while True:
            word = sub.apply(word)
            if len(word) < 4 * length:
                continue
            current = frozenset(
                word[i : i + length] for i in range(len(word) - length + 1)
            )
            if current == prev:
                stable += 1
                if stable >= 2:
                    break
            else:
                stable = 0
            prev = current
            if len(word) > 10_000_000:
                raise SearchExhausted("factor enumeration did not stabilize")
        # the fixed point also carries junction factors; primitivity puts
        # them inside the single-letter language, checked here
        junction = self.window(-2 * length, 2 * length)
        for i in range(len(junction) - length + 1):
            if junction[i : i + length] not in prev:
                raise AssertionError("junction factor escaped the language")
        self._factor_cache[length] = prev
        return prev

    def assert_aperiodic(self, max_period: int) -> None:
        """Fail unless every period <= max_period has a witness mismatch."""
        if max_period <= self._aperiodic_up_to:
            return
        data = self.window(0, 3 * max_period + 64).encode()
        for p in range(1, max_period + 1):
            if data[p:] == data[:-p]:
                raise PeriodicPointError(
                    f"no mismatch for period {p} within window {len(data)}"
                )
        self._aperiodic_up_to = max_period

    def __repr__(self):
        rules = ",".join(f"{a}->{w}" for a, w in sorted(self.substitution.rules.items()))
        return f"Subshift({rules})"


@dataclass(frozen=True)
class OrbitPoint:
    """The reference point shifted by `offset` (positive = left shift)."""

    subshift: Subshift
    offset: int

    def shifted(self, n: int) -> "OrbitPoint":
        return OrbitPoint(self.subshift, self.offset + n)

    def window(self, lo: int, hi: int) -> str:
        return self.subshift.window(self.offset + lo, self.offset + hi)


class ClopenSet:
    """Union of cylinders, normalized as admissible words over one span."""

    __slots__ = ("subshift", "lo", "hi", "words")

    def __init__(self, subshift: Subshift, lo: int, hi: int, words: Iterable[str]):
        if hi < lo:
            raise ValueError("empty span must have hi == lo")
        length = hi - lo
        wordset = frozenset(words)
        for w in wordset:
            if len(w) != length:
                raise ValueError(f"word {w!r} does not fill span [{lo},{hi})")
        object.__setattr__(self, "subshift", subshift)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "words", wordset)

    def __setattr__(self, *args):
        raise AttributeError("ClopenSet is immutable")

    @classmethod
    def cylinder(cls, subshift: Subshift, word: str, anchor: int) -> "ClopenSet":
        return cls(subshift, anchor, anchor + len(word), [word])

    @classmethod
    def whole(cls, subshift: Subshift) -> "ClopenSet":
        return cls(subshift, 0, 0, [""])

    @classmethod
    def empty(cls, subshift: Subshift) -> "ClopenSet":
        return cls(subshift, 0, 0, [])

    def is_empty(self) -> bool:
        return not self.words

    def span_length(self) -> int:
        return self.hi - self.lo

    def with_span(self, lo: int, hi: int) -> "ClopenSet":
        """Re-express over a containing span via admissible completions.

        An empty set and the unconstrained set (span length 0) move to any
        span; a genuine constraint requires the target span to contain it.
        """
        if hi - lo > SPAN_CAP:
            raise SearchExhausted(f"span {hi - lo} exceeds cap {SPAN_CAP}")
        if (lo, hi) == (self.lo, self.hi):
            return self
        if not self.words:
            return ClopenSet(self.subshift, lo, hi, [])
        if self.span_length() == 0:
            return ClopenSet(self.subshift, lo, hi, self.subshift.factors(hi - lo))
        if lo > self.lo or hi < self.hi:
            raise ValueError("target span must contain the current span")
        universe = self.subshift.factors(hi - lo)
        a, b = self.lo - lo, self.hi - lo
        words = [w for w in universe if w[a:b] in self.words]
        return ClopenSet(self.subshift, lo, hi, words)

    def _common(self, other: "ClopenSet") -> tuple["ClopenSet", "ClopenSet"]:
        if self.subshift is not other.subshift:
            raise ValueError("sets over different subshifts")
        lo = min(self.lo, other.lo)
        hi = max(self.hi, other.hi)
        return self.with_span(lo, hi), other.with_span(lo, hi)

    def union(self, other: "ClopenSet") -> "ClopenSet":
        a, b = self._common(other)
        return ClopenSet(self.subshift, a.lo, a.hi, a.words | b.words)

    def intersect(self, other: "ClopenSet") -> "ClopenSet":
        a, b = self._common(other)
        return ClopenSet(self.subshift, a.lo, a.hi, a.words & b.words)

    def complement(self) -> "ClopenSet":
        if self.is_empty():
            return ClopenSet.whole(self.subshift)
        universe = self.subshift.factors(self.span_length())
        return ClopenSet(self.subshift, self.lo, self.hi, universe - self.words)

    def shift(self, n: int) -> "ClopenSet":
        """Image under the shift by n: y[i] -> y[i+n] moves anchors by -n."""
        return ClopenSet(self.subshift, self.lo - n, self.hi - n, self.words)

    def contains(self, point: OrbitPoint) -> bool:
        if self.is_empty():
            return False
        return point.window(self.lo, self.hi) in self.words

    def __eq__(self, other):
        if isinstance(other, ClopenSet):
            if self.subshift is not other.subshift:
                return False
            if self.is_empty() and other.is_empty():
                return True
            a, b = self._common(other)
            return a.words == b.words
        return NotImplemented

    def __repr__(self):
        return f"ClopenSet([{self.lo},{self.hi}), {len(self.words)} words)"


class FullGroupElement:
    """Piecewise shift along a clopen partition; bijectivity is validated."""

    __slots__ = ("subshift", "pieces")

    def __init__(self, subshift: Subshift, pieces: Sequence[tuple[ClopenSet, int]]):
        if not pieces:
            raise ValueError("need at least one piece")
        object.__setattr__(self, "subshift", subshift)
        object.__setattr__(self, "pieces", tuple(pieces))
        self._validate()

    def __setattr__(self, *args):
        raise AttributeError("FullGroupElement is immutable")

    @classmethod
    def identity(cls, subshift: Subshift) -> "FullGroupElement":
        return cls(subshift, [(ClopenSet.whole(subshift), 0)])

    @classmethod
    def cylinder_swap(
        cls, subshift: Subshift, word: str, anchor: int, k: int
    ) -> "FullGroupElement":
        """Swap the cylinder [word]@anchor with its k-shifted copy, identity
        elsewhere; requires the two cylinders to be disjoint."""
        c1 = ClopenSet.cylinder(subshift, word, anchor)
        c2 = c1.shift(k)
        if not c1.intersect(c2).is_empty():
            raise ValueError("cylinder overlaps its shifted copy")
        rest = c1.union(c2).complement()
        return cls(subshift, [(c1, k), (c2, -k), (rest, 0)])

    def _partition(self, sets: Sequence[ClopenSet]) -> None:
        lo = min(c.lo for c in sets)
        hi = max(c.hi for c in sets)
        fitted = [c.with_span(lo, hi) for c in sets]
        universe = self.subshift.factors(hi - lo)
        seen: set[str] = set()
        for c in fitted:
            if c.words & seen:
                raise ValueError("pieces overlap")
            seen |= c.words
        if seen != universe:
            raise ValueError("pieces do not cover the space")

    def _validate(self) -> None:
        self._partition([c for c, _ in self.pieces])
        self._partition([c.shift(n) for c, n in self.pieces])

    def shift_at(self, point: OrbitPoint) -> int:
        for c, n in self.pieces:
            if c.contains(point):
                return n
        raise AssertionError("partition failed to cover a point")

    def apply(self, point: OrbitPoint) -> OrbitPoint:
        return point.shifted(self.shift_at(point))

    def inverse(self) -> "FullGroupElement":
        return FullGroupElement(
            self.subshift, [(c.shift(n), -n) for c, n in self.pieces]
        )

    def shifts(self) -> tuple[int, ...]:
        return tuple(sorted({n for _, n in self.pieces}))


# -- partition refinement -----------------------------------------------


def refine_partition(
    subshift: Subshift, omega: Sequence[FullGroupElement]
) -> tuple[list[ClopenSet], list[int]]:
    """Common refinement on which every element of omega is a single shift.

    Words over the union span are grouped by their shift vector; the
    constant set K collects all shifts together with 0.
    """
    if not omega:
        raise ValueError("omega must be nonempty")
    los = [c.lo for h in omega for c, _ in h.pieces]
    his = [c.hi for h in omega for c, _ in h.pieces]
    lo, hi = min(los), max(his)
    if hi - lo > SPAN_CAP:
        raise SearchExhausted("refinement span exceeds cap")
    fitted: list[list[tuple[frozenset[str], int]]] = []
    for h in omega:
        fitted.append([(c.with_span(lo, hi).words, n) for c, n in h.pieces])
    universe = subshift.factors(hi - lo) if hi > lo else frozenset({""})
    groups: dict[tuple[int, ...], set[str]] = {}
    for w in universe:
        vector = []
        for piece_list in fitted:
            for words, n in piece_list:
                if w in words:
                    vector.append(n)
                    break
            else:
                raise AssertionError("word not covered by a validated partition")
        groups.setdefault(tuple(vector), set()).add(w)
    P = [
        ClopenSet(subshift, lo, hi, words)
        for _, words in sorted(groups.items(), key=lambda kv: kv[0])
    ]
    K = sorted({n for vec in groups for n in vec} | {0})
    return P, K


# -- towers --------------------------------------------------------------


@dataclass(frozen=True)
class TowerData:
    subshift: Subshift
    omega: tuple[FullGroupElement, ...]
    P: tuple[ClopenSet, ...]
    K: tuple[int, ...]
    T: tuple[int, ...]
    core: tuple[int, ...]
    B: ClopenSet
    D: tuple[int, ...]
    theta: dict  # (omega index, t) -> element of K
    sigma: dict  # omega index -> {t -> t'}, a permutation of T


@dataclass(frozen=True)
class TowerReport:
    passed: bool
    point_checks: int
    set_checks: int
    failures: tuple[str, ...]


def _member_index(P: Sequence[ClopenSet], point: OrbitPoint) -> int:
    for i, member in enumerate(P):
        if member.contains(point):
            return i
    raise AssertionError("partition member lookup failed")


def find_tower(
    subshift: Subshift,
    omega: Sequence[FullGroupElement],
    P: Sequence[ClopenSet],
    K: Sequence[int],
    T: Iterable[int],
    d_target: int = 3,
    search_bound: int = 500_000,
    delta=None,
) -> TowerData:
    """Spaced levels D and a base cylinder B around the reference point
    with all t+d translates of B pairwise disjoint and lying inside fixed
    partition members; theta and sigma are read off from the members.
    """
    T = tuple(sorted(set(T)))
    if not T:
        raise ValueError("T must be nonempty")
    K = tuple(sorted(set(K)))
    if 0 not in K:
        raise ValueError("K must contain 0")
    if d_target < 1:
        raise ValueError("d_target must be positive")
    if delta is not None:
        defect = _interval_defect(T, K)
        if defect > Fraction(delta):
            raise ValueError(f"T has invariance defect {defect} > {delta}")
    core = tuple(t for t in T if all(t + s in T for s in K))
    lo_p = min(c.lo for c in P)
    hi_p = max(c.hi for c in P)
    P = tuple(c.with_span(lo_p, hi_p) for c in P)

    spread = (T[-1] - T[0]) + (hi_p - lo_p) + 1
    buckets: dict[tuple[int, ...], list[int]] = {}
    D: tuple[int, ...] | None = None
    d = 0
    while d + T[-1] + hi_p <= search_bound:
        vector = tuple(
            _member_index(P, subshift.point(t + d)) for t in T
        )
        found = buckets.setdefault(vector, [])
        found.append(d)
        if len(found) >= d_target:
            D = tuple(found[:d_target])
            break
        d += spread
    if D is None:
        raise SearchExhausted(
            f"no {d_target} levels with one member vector within {search_bound}"
        )

    sums = sorted(t + dd for t in T for dd in D)
    if len(set(sums)) != len(sums):
        raise AssertionError("level spacing failed to separate translates")
    max_diff = sums[-1] - sums[0]
    subshift.assert_aperiodic(max_diff)

    # the base word covers the partition span at every t+d, so translate
    # membership is pinned; the extra margin keeps every pairwise distance
    # strictly inside the word, and disjointness then needs the word to be
    # aperiodic at each distance, extending until a witness appears
    lo_b = lo_p + sums[0]
    hi_b = hi_p + sums[-1] + 64
    distances = sorted({b - a for a in sums for b in sums if b > a})
    while True:
        data = subshift.window(lo_b, hi_b).encode()
        if not any(data[j:] == data[:-j] for j in distances):
            break
        hi_b += max_diff + 64
        if hi_b - lo_b > search_bound:
            raise SearchExhausted("no aperiodicity witness for the base cylinder")
    B = ClopenSet.cylinder(subshift, subshift.window(lo_b, hi_b), lo_b)

    base = subshift.point(0)
    theta: dict[tuple[int, int], int] = {}
    for hi_idx, h in enumerate(omega):
        for t in T:
            values = {h.shift_at(base.shifted(t + dd)) for dd in D}
            if len(values) != 1:
                raise AssertionError(
                    f"member vector equality did not pin theta at t={t}"
                )
            value = values.pop()
            if value not in K:
                raise AssertionError(f"shift {value} escaped the constant set K")
            theta[(hi_idx, t)] = value

    sigma: dict[int, dict[int, int]] = {}
    for hi_idx in range(len(omega)):
        mapping: dict[int, int] = {}
        for t in core:
            image = t + theta[(hi_idx, t)]
            if image not in T:
                raise AssertionError("core point left T under theta")
            mapping[t] = image
        if len(set(mapping.values())) != len(mapping):
            raise AssertionError("theta-translation is not injective on the core")
        loose_sources = sorted(t for t in T if t not in mapping)
        taken = set(mapping.values())
        loose_targets = sorted(t for t in T if t not in taken)
        # any completion works off the core; index order keeps it canonical
        mapping.update(zip(loose_sources, loose_targets))
        sigma[hi_idx] = mapping

    tower = TowerData(
        subshift=subshift,
        omega=tuple(omega),
        P=P,
        K=K,
        T=T,
        core=core,
        B=B,
        D=D,
        theta=theta,
        sigma=sigma,
    )
    report = verify_tower(tower, samples=1)
    if not report.passed:
        raise AssertionError(f"freshly built tower failed checks: {report.failures}")
    return tower


def _interval_defect(T: Sequence[int], K: Sequence[int]) -> Fraction:
    T_set = set(T)
    core = [t for t in T if all(t + s in T_set for s in K)]
    return 1 - Fraction(len(core), len(T))


def _sample_points_in(B: ClopenSet, count: int, search_bound: int) -> list[OrbitPoint]:
    """Orbit points inside B, found by scanning the base word's recurrences."""
    subshift = B.subshift
    if len(B.words) != 1:
        raise ValueError("sampling expects a single-cylinder base")
    (word,) = B.words
    length = max(4 * len(word), 4096)
    while True:
        window = subshift.window(B.lo, B.lo + length)
        points: list[OrbitPoint] = []
        start = 0
        while len(points) < count:
            i = window.find(word, start)
            if i == -1:
                break
            points.append(subshift.point(i))
            start = i + 1
        if len(points) >= count:
            return points
        if length > search_bound:
            raise SearchExhausted("not enough recurrences of the base word")
        length *= 2


def verify_tower(tower: TowerData, samples: int = 10) -> TowerReport:
    """Re-check the tower on sampled points and at the set level.

    Point checks: h(t d x) = theta(h,t) t d x for sampled x in B and all
    (h, t, d).  Set checks: translates of B pairwise disjoint, each inside
    a single partition member per t, and sigma_h a permutation agreeing
    with theta on the core.
    """
    failures: list[str] = []
    subshift = tower.subshift
    point_checks = 0
    set_checks = 0

    sums = sorted(t + d for t in tower.T for d in tower.D)
    (word,) = tower.B.words
    data = word.encode()
    for idx, a in enumerate(sums):
        for b in sums[idx + 1 :]:
            j = b - a
            set_checks += 1
            if j < len(data):
                if data[j:] == data[:-j]:
                    failures.append(f"translates at distance {j} may intersect")
            else:
                failures.append(f"distance {j} exceeds the base word")

    base = subshift.point(0)
    for t in tower.T:
        members = {_member_index(tower.P, base.shifted(t + d)) for d in tower.D}
        set_checks += 1
        if len(members) != 1:
            failures.append(f"levels of t={t} straddle partition members")
    for hi_idx in range(len(tower.omega)):
        mapping = tower.sigma[hi_idx]
        set_checks += 1
        if sorted(mapping) != list(tower.T) or sorted(mapping.values()) != list(tower.T):
            failures.append(f"sigma[{hi_idx}] is not a permutation of T")
        for t in tower.core:
            set_checks += 1
            if mapping[t] != t + tower.theta[(hi_idx, t)]:
                failures.append(f"sigma[{hi_idx}] disagrees with theta at t={t}")

    if samples > 0:
        points = _sample_points_in(tower.B, samples, search_bound=10_000_000)
        for x in points:
            for hi_idx, h in enumerate(tower.omega):
                for t in tower.T:
                    for d in tower.D:
                        point_checks += 1
                        moved = h.shift_at(x.shifted(t + d))
                        expected = tower.theta[(hi_idx, t)]
                        if moved != expected:
                            failures.append(
                                f"h{hi_idx} shifts t={t},d={d},x@{x.offset} "
                                f"by {moved}, expected {expected}"
                            )
    return TowerReport(
        passed=not failures,
        point_checks=point_checks,
        set_checks=set_checks,
        failures=tuple(failures),
    )

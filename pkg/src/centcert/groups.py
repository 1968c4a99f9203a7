"""Countable groups, actions on countable sets, and Følner machinery.

Supported families: free-abelian groups of finite rank (integer vectors,
rank 1 stored as plain ints), finite symmetric and alternating groups
(permutations as image tuples), free groups (reduced words over signed
generator indices), and finite direct products of these.  Group-ring
elements carry Gaussian-rational coefficients, which is enough to evaluate
every commutator norm that comes up exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterable, Mapping, Sequence

from .exact import ExactScalar, GaussianRational, NotRepresentable, RootScalar, _gauss

__all__ = [
    "Group",
    "FreeAbelian",
    "Symmetric",
    "Alternating",
    "FreeGroup",
    "DirectProduct",
    "ActionSpec",
    "translation_action",
    "FolnerCertificate",
    "GroupRingElement",
    "SearchExhausted",
    "invariance_defect",
    "folner_search",
    "ring_commutator_two_norm",
]


class SearchExhausted(RuntimeError):
    """A bounded search ended before meeting its target."""


class Group:
    """Base class: subclasses fix an element encoding and the operations."""

    def identity(self):
        raise NotImplementedError

    def multiply(self, a, b):
        raise NotImplementedError

    def inverse(self, a):
        raise NotImplementedError

    def validate(self, a) -> None:
        """Raise ValueError when `a` is not an element of this group."""
        raise NotImplementedError

    def commutator(self, g, h):
        """h^-1 g^-1 h g."""
        return self.multiply(
            self.multiply(self.inverse(h), self.inverse(g)), self.multiply(h, g)
        )

    def power(self, g, n: int):
        if n < 0:
            return self.power(self.inverse(g), -n)
        out = self.identity()
        base = g
        while n:
            if n & 1:
                out = self.multiply(out, base)
            base = self.multiply(base, base)
            n >>= 1
        return out


@dataclass(frozen=True)
class FreeAbelian(Group):
    """Z^rank; rank-1 elements are ints, higher ranks use int tuples."""

    rank: int

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("rank must be positive")

    def identity(self):
        return 0 if self.rank == 1 else (0,) * self.rank

    def multiply(self, a, b):
        if self.rank == 1:
            return a + b
        return tuple(x + y for x, y in zip(a, b))

    def inverse(self, a):
        if self.rank == 1:
            return -a
        return tuple(-x for x in a)

    def validate(self, a) -> None:
        if self.rank == 1:
            if not isinstance(a, int):
                raise ValueError(f"rank-1 elements are ints, got {a!r}")
        elif not (
            isinstance(a, tuple)
            and len(a) == self.rank
            and all(isinstance(x, int) for x in a)
        ):
            raise ValueError(f"expected int {self.rank}-tuple, got {a!r}")


def _perm_parity(p: Sequence[int]) -> int:
    """0 for even, 1 for odd."""
    seen = [False] * len(p)
    parity = 0
    for i in range(len(p)):
        if seen[i]:
            continue
        j = i
        length = 0
        while not seen[j]:
            seen[j] = True
            j = p[j]
            length += 1
        parity ^= (length - 1) & 1
    return parity


@dataclass(frozen=True)
class Symmetric(Group):
    """Permutations of {0..n-1} as image tuples; (pq)(i) = p(q(i))."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")

    def identity(self):
        return tuple(range(self.n))

    def multiply(self, a, b):
        return tuple(a[b[i]] for i in range(self.n))

    def inverse(self, a):
        out = [0] * self.n
        for i, img in enumerate(a):
            out[img] = i
        return tuple(out)

    def validate(self, a) -> None:
        if not (isinstance(a, tuple) and sorted(a) == list(range(self.n))):
            raise ValueError(f"not a permutation of 0..{self.n - 1}: {a!r}")


@dataclass(frozen=True)
class Alternating(Symmetric):
    def validate(self, a) -> None:
        super().validate(a)
        if _perm_parity(a):
            raise ValueError(f"odd permutation excluded: {a!r}")


def _reduce_word(letters: Iterable[int]) -> tuple[int, ...]:
    out: list[int] = []
    for x in letters:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


@dataclass(frozen=True)
class FreeGroup(Group):
    """Reduced words over generators 1..rank; negative index = inverse letter."""

    rank: int

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("rank must be positive")

    def identity(self):
        return ()

    def generator(self, i: int) -> tuple[int, ...]:
        if not 1 <= i <= self.rank:
            raise ValueError(f"generator index out of range: {i}")
        return (i,)

    def multiply(self, a, b):
        return _reduce_word(tuple(a) + tuple(b))

    def inverse(self, a):
        return tuple(-x for x in reversed(a))

    def validate(self, a) -> None:
        if not isinstance(a, tuple):
            raise ValueError(f"free-group element must be a tuple, got {a!r}")
        for x in a:
            if not isinstance(x, int) or x == 0 or abs(x) > self.rank:
                raise ValueError(f"bad letter {x!r} in {a!r}")
        if _reduce_word(a) != a:
            raise ValueError(f"word not reduced: {a!r}")


@dataclass(frozen=True)
class DirectProduct(Group):
    factors: tuple[Group, ...]

    def __init__(self, factors: Sequence[Group]):
        object.__setattr__(self, "factors", tuple(factors))
        if not self.factors:
            raise ValueError("need at least one factor")

    def identity(self):
        return tuple(g.identity() for g in self.factors)

    def multiply(self, a, b):
        return tuple(g.multiply(x, y) for g, x, y in zip(self.factors, a, b))

    def inverse(self, a):
        return tuple(g.inverse(x) for g, x in zip(self.factors, a))

    def validate(self, a) -> None:
        if not (isinstance(a, tuple) and len(a) == len(self.factors)):
            raise ValueError(f"expected {len(self.factors)}-tuple, got {a!r}")
        for g, x in zip(self.factors, a):
            g.validate(x)


# -- actions -------------------------------------------------------------


@dataclass(frozen=True)
class ActionSpec:
    """A group action on a countable set with decidable equality.

    box_rank marks translation actions of Z^d on itself, unlocking the
    box exhaustion used by folner_search.
    """

    group: Group
    act: Callable[[Any, Any], Any]
    name: str = ""
    box_rank: int | None = None


def translation_action(rank: int) -> ActionSpec:
    group = FreeAbelian(rank)
    return ActionSpec(
        group=group,
        act=group.multiply,
        name=f"Z^{rank} translation",
        box_rank=rank,
    )


@dataclass(frozen=True)
class FolnerCertificate:
    T: tuple
    K: tuple
    core: tuple
    defect: Fraction

    def __post_init__(self):
        if not self.T:
            raise ValueError("empty T")
        if not 0 <= self.defect <= 1:
            raise ValueError(f"defect out of range: {self.defect}")


def invariance_defect(action: ActionSpec, T: Iterable, K: Iterable) -> Fraction:
    """1 - |{x in T : s.x in T for all s in K}| / |T|, exactly."""
    T = list(T)
    K = list(K)
    if not T:
        raise ValueError("T must be nonempty")
    e = action.group.identity()
    if e not in K:
        raise ValueError("K must contain the identity")
    T_set = set(T)
    if len(T_set) != len(T):
        raise ValueError("T has repeated points")
    core = _invariance_core(action, T, T_set, K)
    return 1 - Fraction(len(core), len(T))


def _invariance_core(action: ActionSpec, T: list, T_set: set, K: list) -> list:
    # x lies in s^-1 T for all s exactly when every s.x stays in T
    act = action.act
    return [x for x in T if all(act(s, x) in T_set for s in K)]


def _box(rank: int, n: int, offset: int = 0) -> list:
    if rank == 1:
        return list(range(offset, offset + n))
    points: list[tuple[int, ...]] = [()]
    for _ in range(rank):
        points = [p + (c,) for p in points for c in range(offset, offset + n)]
    return points


def folner_search(
    action: ActionSpec,
    K: Iterable,
    delta,
    size_cap: int,
    disjoint_from: Iterable = (),
) -> FolnerCertificate:
    """Smallest box [0,n)^d with invariance defect <= delta, translated past
    `disjoint_from` when that finite set is given (the defect is invariant
    under translation, so the shifted box is an equally good witness)."""
    if action.box_rank is None:
        raise ValueError("action has no searchable exhaustion")
    delta = Fraction(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")
    K = list(K)
    forbidden = list(disjoint_from)
    rank = action.box_rank
    n = 1
    while n ** rank <= size_cap:
        T = _box(rank, n)
        defect = invariance_defect(action, T, K)
        if defect <= delta:
            offset = 0
            if forbidden:
                coords: list[int] = []
                for y in forbidden:
                    coords.extend([abs(y)] if rank == 1 else [abs(c) for c in y])
                offset = max(coords) + 1
                T = _box(rank, n, offset)
                shifted_defect = invariance_defect(action, T, K)
                if shifted_defect != defect:
                    raise AssertionError("translation changed the defect")
                if set(T) & set(forbidden):
                    raise AssertionError("shifted box still meets forbidden set")
            T_set = set(T)
            core = _invariance_core(action, T, T_set, K)
            return FolnerCertificate(tuple(T), tuple(K), tuple(core), defect)
        n += 1
    raise SearchExhausted(
        f"no box of size <= {size_cap} reaches defect {delta} for K of size {len(K)}"
    )


# -- group rings ---------------------------------------------------------


class GroupRingElement:
    """Finitely supported map from group elements to Gaussian rationals."""

    __slots__ = ("group", "coeffs")

    def __init__(self, group: Group, coeffs: Mapping[Any, Any] = ()):
        cleaned: dict[Any, GaussianRational] = {}
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        for g, c in items:
            group.validate(g)
            c = _gauss(c)
            if c.is_zero():
                continue
            prev = cleaned.get(g)
            total = c if prev is None else prev + c
            if total.is_zero():
                cleaned.pop(g, None)
            else:
                cleaned[g] = total
        object.__setattr__(self, "group", group)
        object.__setattr__(self, "coeffs", cleaned)

    def __setattr__(self, *args):
        raise AttributeError("GroupRingElement is immutable")

    @classmethod
    def unitary(cls, group: Group, g) -> "GroupRingElement":
        return cls(group, {g: GaussianRational(1, 0)})

    def __add__(self, other: "GroupRingElement") -> "GroupRingElement":
        self._check(other)
        merged = dict(self.coeffs)
        pairs = list(merged.items()) + list(other.coeffs.items())
        return GroupRingElement(self.group, pairs)

    def __sub__(self, other: "GroupRingElement") -> "GroupRingElement":
        return self + (-other)

    def __neg__(self) -> "GroupRingElement":
        return GroupRingElement(self.group, [(g, -c) for g, c in self.coeffs.items()])

    def __mul__(self, other: "GroupRingElement") -> "GroupRingElement":
        self._check(other)
        out: list[tuple] = []
        for g, c in self.coeffs.items():
            for g2, c2 in other.coeffs.items():
                out.append((self.group.multiply(g, g2), c * c2))
        return GroupRingElement(self.group, out)

    def adjoint(self) -> "GroupRingElement":
        return GroupRingElement(
            self.group,
            [(self.group.inverse(g), c.conj()) for g, c in self.coeffs.items()],
        )

    def trace(self) -> GaussianRational:
        """Coefficient of the identity (the canonical group trace)."""
        return self.coeffs.get(self.group.identity(), GaussianRational(0, 0))

    def two_norm_squared(self) -> ExactScalar:
        total = Fraction(0)
        for c in self.coeffs.values():
            a = c.abs2()
            total += Fraction(int(a.numerator), int(a.denominator))
        return ExactScalar.from_rational(total)

    def two_norm(self):
        sq = self.two_norm_squared()
        try:
            return sq.sqrt()
        except NotRepresentable:
            return RootScalar(sq)

    def _check(self, other: "GroupRingElement") -> None:
        if self.group != other.group:
            raise ValueError("elements of different group rings")

    def __eq__(self, other):
        if isinstance(other, GroupRingElement):
            return self.group == other.group and self.coeffs == other.coeffs
        return NotImplemented

    def __repr__(self):
        body = " + ".join(f"({c})u[{g}]" for g, c in self.coeffs.items()) or "0"
        return f"GroupRingElement({body})"


def ring_commutator_two_norm(group: Group, g, h) -> ExactScalar:
    """||u_g u_h - u_h u_g||_2 in the group ring under the canonical trace.

    The value is sqrt(2) when g and h do not commute and 0 when they do;
    both the direct norm computation and the trace identity
    ||.||^2 = 2 - 2 Re tau(u_{h^-1 g^-1 h g}) are evaluated and compared.
    """
    group.validate(g)
    group.validate(h)
    gh = group.multiply(g, h)
    hg = group.multiply(h, g)
    x = GroupRingElement(group, [(gh, GaussianRational(1, 0)), (hg, GaussianRational(-1, 0))])
    norm_sq = (x.adjoint() * x).trace()
    if not norm_sq.im == 0:
        raise AssertionError("norm square came out non-real")
    comm = group.commutator(g, h)
    comm_trace = 1 if comm == group.identity() else 0
    expected = Fraction(2 - 2 * comm_trace)
    got = Fraction(int(norm_sq.re.numerator), int(norm_sq.re.denominator))
    if got != expected:
        raise AssertionError(f"trace identity violated: {got} vs {expected}")
    return ExactScalar.from_rational(expected).sqrt()

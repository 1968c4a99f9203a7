"""Weighted multi-matrix algebras with exact traces, and the two
projection/partial-isometry constructions the certificates consume.

An algebra is a list of matrix blocks (size, weight) whose weights sum to
one; elements are sparse Gaussian-rational matrices per block.  The trace
is the weight-convex combination of normalized block traces.  On top of
this live the alternating-group construction (floor-scaled diagonal
projections, one per Wedderburn block) and the independent-projection
construction (a four-atom algebra housing p, q and the partial isometry v).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from gmpy2 import mpq, mpz

from .exact import (
    ComplexExact,
    ExactScalar,
    GaussianRational,
    NotRepresentable,
    RootScalar,
    _gauss,
    to_mpq,
)
from .repalg import WedderburnData

__all__ = [
    "TracialAlgebra",
    "AlgebraElement",
    "PqvData",
    "TraceBounds",
    "trace",
    "trace_real",
    "two_norm_squared",
    "two_norm",
    "certified_floor_pow2_scale",
    "build_pqv_alternating",
    "pqv_trace_bounds",
    "build_pqv_independent",
    "algebra_from_wedderburn",
]


@dataclass(frozen=True)
class TracialAlgebra:
    """Blocks (size, weight); weights are exact and sum to one."""

    blocks: tuple[tuple[int, ExactScalar], ...]

    def __init__(self, blocks: Iterable[tuple]):
        normalized = []
        for size, weight in blocks:
            if not (isinstance(size, int) and size >= 1):
                raise ValueError(f"bad block size {size!r}")
            if not isinstance(weight, ExactScalar):
                weight = ExactScalar.from_rational(to_mpq(weight))
            if weight.sign() < 0:
                raise ValueError(f"negative weight {weight}")
            normalized.append((size, weight))
        object.__setattr__(self, "blocks", tuple(normalized))
        total = ExactScalar.zero()
        for _, w in self.blocks:
            total = total + w
        if total != ExactScalar.one():
            raise ValueError(f"weights sum to {total}, not 1")

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(k for k, _ in self.blocks)

    def total_dimension(self) -> int:
        return sum(k for k, _ in self.blocks)


class AlgebraElement:
    """Sparse per-block matrix with Gaussian-rational entries."""

    __slots__ = ("algebra", "blocks")

    def __init__(self, algebra: TracialAlgebra, blocks: Sequence[Mapping] | None = None):
        data = []
        src = blocks if blocks is not None else [{} for _ in algebra.blocks]
        if len(src) != len(algebra.blocks):
            raise ValueError("one matrix per block required")
        for (size, _), mat in zip(algebra.blocks, src):
            cleaned: dict[tuple[int, int], GaussianRational] = {}
            for (i, j), value in mat.items():
                if not (0 <= i < size and 0 <= j < size):
                    raise ValueError(f"entry ({i},{j}) outside {size}x{size} block")
                v = _gauss(value)
                if not v.is_zero():
                    cleaned[(i, j)] = v
            data.append(cleaned)
        object.__setattr__(self, "algebra", algebra)
        object.__setattr__(self, "blocks", tuple(data))

    def __setattr__(self, *args):
        raise AttributeError("AlgebraElement is immutable")

    # -- constructors ---------------------------------------------------

    @classmethod
    def zero(cls, algebra: TracialAlgebra) -> "AlgebraElement":
        return cls(algebra)

    @classmethod
    def identity(cls, algebra: TracialAlgebra) -> "AlgebraElement":
        return cls(
            algebra,
            [
                {(i, i): GaussianRational(1, 0) for i in range(size)}
                for size, _ in algebra.blocks
            ],
        )

    @classmethod
    def matrix_unit(
        cls, algebra: TracialAlgebra, block: int, i: int, j: int
    ) -> "AlgebraElement":
        mats: list[dict] = [{} for _ in algebra.blocks]
        mats[block] = {(i, j): GaussianRational(1, 0)}
        return cls(algebra, mats)

    @classmethod
    def block_diagonal(
        cls, algebra: TracialAlgebra, block: int, indices: Iterable[int]
    ) -> "AlgebraElement":
        """Diagonal 0/1 projection supported on one block."""
        mats: list[dict] = [{} for _ in algebra.blocks]
        mats[block] = {(i, i): GaussianRational(1, 0) for i in indices}
        return cls(algebra, mats)

    # -- arithmetic -----------------------------------------------------

    def _check(self, other: "AlgebraElement") -> None:
        if self.algebra != other.algebra:
            raise ValueError("elements of different algebras")

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        out = []
        for a, b in zip(self.blocks, other.blocks):
            merged = dict(a)
            for key, v in b.items():
                s = merged.get(key)
                s = v if s is None else s + v
                if s.is_zero():
                    merged.pop(key, None)
                else:
                    merged[key] = s
            out.append(merged)
        return AlgebraElement(self.algebra, out)

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement(
            self.algebra, [{k: -v for k, v in mat.items()} for mat in self.blocks]
        )

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        return self + (-other)

    def __mul__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        out = []
        for a, b in zip(self.blocks, other.blocks):
            by_row: dict[int, list[tuple[int, GaussianRational]]] = {}
            for (j, k), v in b.items():
                by_row.setdefault(j, []).append((k, v))
            acc: dict[tuple[int, int], GaussianRational] = {}
            for (i, j), va in a.items():
                for k, vb in by_row.get(j, ()):
                    key = (i, k)
                    s = acc.get(key)
                    prod = va * vb
                    s = prod if s is None else s + prod
                    acc[key] = s
            out.append({k: v for k, v in acc.items() if not v.is_zero()})
        return AlgebraElement(self.algebra, out)

    def scale(self, c) -> "AlgebraElement":
        c = _gauss(c)
        return AlgebraElement(
            self.algebra, [{k: c * v for k, v in mat.items()} for mat in self.blocks]
        )

    def adjoint(self) -> "AlgebraElement":
        return AlgebraElement(
            self.algebra,
            [{(j, i): v.conj() for (i, j), v in mat.items()} for mat in self.blocks],
        )

    def is_zero(self) -> bool:
        return all(not mat for mat in self.blocks)

    def __eq__(self, other):
        if isinstance(other, AlgebraElement):
            return self.algebra == other.algebra and self.blocks == other.blocks
        return NotImplemented

    def __repr__(self):
        nz = sum(len(m) for m in self.blocks)
        return f"AlgebraElement({len(self.blocks)} blocks, {nz} entries)"


def trace(algebra: TracialAlgebra, a: AlgebraElement) -> ComplexExact:
    """Weight-convex combination of normalized block traces."""
    if a.algebra != algebra:
        raise ValueError("element does not belong to the algebra")
    re = ExactScalar.zero()
    im = ExactScalar.zero()
    for (size, weight), mat in zip(algebra.blocks, a.blocks):
        tr = GaussianRational(0, 0)
        for i in range(size):
            v = mat.get((i, i))
            if v is not None:
                tr = tr + v
        if tr.is_zero():
            continue
        re = re + weight.scale(tr.re / size)
        im = im + weight.scale(tr.im / size)
    return ComplexExact(re, im)


def trace_real(algebra: TracialAlgebra, a: AlgebraElement) -> ExactScalar:
    value = trace(algebra, a)
    return value.real_part()


def two_norm_squared(algebra: TracialAlgebra, a: AlgebraElement) -> ExactScalar:
    """tau(a* a), computed entrywise: per block (1/k) sum |a_ij|^2."""
    total = ExactScalar.zero()
    for (size, weight), mat in zip(algebra.blocks, a.blocks):
        s = mpq(0)
        for v in mat.values():
            s += v.abs2()
        if s:
            total = total + weight.scale(s / size)
    return total


def two_norm(algebra: TracialAlgebra, a: AlgebraElement):
    sq = two_norm_squared(algebra, a)
    try:
        return sq.sqrt()
    except NotRepresentable:
        return RootScalar(sq)


# -- floor of 2^-r * k, certified ---------------------------------------


def certified_floor_pow2_scale(r, k: int) -> int:
    """floor(2^(-r) * k) for rational r > 0 and integer k >= 1, decided by
    big-integer cross powers: d <= 2^(-a/b) k iff d^b 2^a <= k^b."""
    r = to_mpq(r)
    if r <= 0 or k < 1:
        raise ValueError("need r > 0 and k >= 1")
    a, b = int(r.numerator), int(r.denominator)
    if b == 1:
        return int(mpz(k) >> a) if a < k.bit_length() else 0
    kb = mpz(k) ** b
    # float seed, then certify; 2^(-r) < 1 so d < k keeps powers modest
    d = int(k * 2.0 ** (-a / b))
    while d >= 1 and mpz(d) ** b << a > kb:
        d -= 1
    while (mpz(d + 1) ** b << a) <= kb:
        # equality cannot occur: 2^(a/b) is irrational for b > 1
        d += 1
    if mpz(d + 1) ** b << a == kb or (d >= 1 and mpz(d) ** b << a == kb):
        raise AssertionError("irrational power compared equal to a rational")
    return d


# -- alternating construction -------------------------------------------


@dataclass(frozen=True)
class PqvData:
    algebra: TracialAlgebra
    p: AlgebraElement
    q: AlgebraElement
    v: AlgebraElement
    tau_p: ExactScalar
    tau_pq: ExactScalar


def algebra_from_wedderburn(W: WedderburnData) -> TracialAlgebra:
    """Trivial line plus one matrix block per Wedderburn degree."""
    if W.blocks is None:
        raise ValueError("enumerated Wedderburn data required")
    blocks = [(1, ExactScalar.from_rational(Fraction(1, W.order)))]
    blocks += [(k, ExactScalar.from_rational(w)) for k, w in W.blocks]
    return TracialAlgebra(blocks)


def build_pqv_alternating(W: WedderburnData, delta, T_size: int) -> PqvData:
    """Diagonal projections p, q of trace ~2^(-1/((1-delta)|T|)) with a
    partial isometry v moving p to q while fixing pq.

    Per Wedderburn block of size k: d = floor(2^(-1/((1-delta)|T|)) k),
    p covers rows [0, d), q covers [0, 2d-k) and [d, k), and v shifts the
    [d, k) rows down onto [2d-k, d).  The identities v*v = p, vv* = q,
    v p q = p q are verified exactly before returning.
    """
    delta = Fraction(delta)
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0,1)")
    if T_size < 1:
        raise ValueError("T_size must be positive")
    exponent = 1 / (to_mpq(1 - delta) * T_size)  # x = 2^(-exponent)
    if to_mpq(1 - delta) * T_size < 1:
        raise ValueError("(1-delta)|T| must be at least 1")
    algebra = algebra_from_wedderburn(W)
    p_mats: list[dict] = [{}]
    q_mats: list[dict] = [{}]
    v_mats: list[dict] = [{}]
    one = GaussianRational(1, 0)
    tau_p = Fraction(0)
    tau_pq = Fraction(0)
    for k, weight in W.blocks:
        d = certified_floor_pow2_scale(exponent, k)
        overlap = 2 * d - k
        if overlap < 0:
            raise ValueError(
                f"block of size {k} has 2d-k = {overlap} < 0; "
                "increase |D| or decrease |T|"
            )
        p_mats.append({(i, i): one for i in range(d)})
        q_mats.append(
            {(i, i): one for i in range(overlap)}
            | {(i, i): one for i in range(d, k)}
        )
        v_mats.append(
            {(i, i): one for i in range(overlap)}
            | {(i, i - (k - d)): one for i in range(d, k)}
        )
        tau_p += weight * Fraction(d, k)
        tau_pq += weight * Fraction(overlap, k)
    p = AlgebraElement(algebra, p_mats)
    q = AlgebraElement(algebra, q_mats)
    v = AlgebraElement(algebra, v_mats)
    _certify_pqv(algebra, p, q, v)
    data = PqvData(
        algebra=algebra,
        p=p,
        q=q,
        v=v,
        tau_p=ExactScalar.from_rational(tau_p),
        tau_pq=ExactScalar.from_rational(tau_pq),
    )
    if trace_real(algebra, p) != data.tau_p:
        raise AssertionError("closed-form tau(p) disagrees with the matrix trace")
    if trace_real(algebra, p * q) != data.tau_pq:
        raise AssertionError("closed-form tau(pq) disagrees with the matrix trace")
    return data


def _certify_pqv(algebra, p, q, v) -> None:
    for name, lhs, rhs in (
        ("p idempotent", p * p, p),
        ("q idempotent", q * q, q),
        ("p selfadjoint", p.adjoint(), p),
        ("q selfadjoint", q.adjoint(), q),
        ("v*v = p", v.adjoint() * v, p),
        ("vv* = q", v * v.adjoint(), q),
        ("vpq = pq", v * p * q, p * q),
    ):
        if lhs != rhs:
            raise AssertionError(f"identity failed: {name}")


@dataclass(frozen=True)
class TraceBounds:
    """Certified enclosures for tau(p), tau(pq) in the large-|D| regime."""

    tau_p_lower: ExactScalar
    tau_p_upper: ExactScalar
    tau_pq_lower: ExactScalar
    tau_pq_upper: ExactScalar


def pqv_trace_bounds(n: int, delta, T_size: int) -> TraceBounds:
    """Bounds from d/k in [x - 1/k, x], k >= n-1, total nontrivial weight
    1 - 2/n!; x = 2^(-1/((1-delta)|T|))."""
    if n < 6:
        raise ValueError("degree bound k >= n-1 needs n >= 6")
    delta = Fraction(delta)
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0,1)")
    exponent = 1 / (to_mpq(1 - delta) * T_size)
    x = ExactScalar.pow2(-exponent)
    order = math.factorial(n) // 2
    slack = mpq(1) - mpq(1, order)  # total nontrivial weight
    inv_deg = mpq(1, n - 1)
    one = ExactScalar.one()
    tau_p_lower = (x - ExactScalar.from_rational(inv_deg)).scale(slack)
    tau_pq_lower = (
        x.scale(2) - one - ExactScalar.from_rational(2 * inv_deg)
    ).scale(slack)
    tau_pq_upper = x.scale(2) - one
    return TraceBounds(
        tau_p_lower=tau_p_lower,
        tau_p_upper=x,
        tau_pq_lower=tau_pq_lower,
        tau_pq_upper=tau_pq_upper,
    )


# -- independent construction -------------------------------------------


def build_pqv_independent(m: int) -> PqvData:
    """Two independent projections of trace t = 2^(-1/m) with a partial
    isometry between them fixing their product.

    The minimal model has four spectral atoms: the product pq (weight t^2),
    a 2x2 block between p - pq and q - pq (weight 2t(1-t)), and the
    complement (weight (1-t)^2); p and q are diagonal there, and v is the
    off-diagonal matrix unit plus the identity on the pq atom.
    """
    if m < 1:
        raise ValueError("m must be positive")
    t = ExactScalar.pow2(mpq(-1, m))
    one = ExactScalar.one()
    w_pq = t * t
    w_mid = (t - t * t).scale(2)
    w_out = (one - t) * (one - t)
    algebra = TracialAlgebra([(1, w_pq), (2, w_mid), (1, w_out)])
    g1 = GaussianRational(1, 0)
    p = AlgebraElement(algebra, [{(0, 0): g1}, {(0, 0): g1}, {}])
    q = AlgebraElement(algebra, [{(0, 0): g1}, {(1, 1): g1}, {}])
    v = AlgebraElement(algebra, [{(0, 0): g1}, {(1, 0): g1}, {}])
    _certify_pqv(algebra, p, q, v)
    if trace(algebra, p * q) != trace(algebra, p) * trace(algebra, q):
        raise AssertionError("independence tau(pq) = tau(p)tau(q) failed")
    if trace(algebra, v) != trace(algebra, p * q):
        raise AssertionError("tau(v) = tau(pq) failed")
    tau_p = trace_real(algebra, p)
    if tau_p != t:
        raise AssertionError("tau(p) is not 2^(-1/m)")
    return PqvData(
        algebra=algebra, p=p, q=q, v=v, tau_p=t, tau_pq=t * t
    )

"""Elementary tensors over a finite index set with factorizing trace.

A word assigns an algebra element to each index, defaulting to the
identity; its trace is the product of coordinate traces.  Sums of words
with exact scalar coefficients are enough to express every commutator and
displacement difference the certificates evaluate, and small instances can
be cross-checked against a dense Kronecker expansion that shares no code
with the factorized path.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

from gmpy2 import mpq

from .exact import ComplexExact, ExactScalar, GaussianRational
from .blockop import AlgebraElement, TracialAlgebra, trace as block_trace
from .blockop import PqvData

__all__ = [
    "TensorWord",
    "TensorSum",
    "elementary",
    "permute",
    "displacement",
    "noncommutation_defect",
    "noncommutation_defect_words",
    "centrality_defect",
    "centrality_defect_words",
    "dense_oracle",
    "DENSE_DIMENSION_CAP",
]

DENSE_DIMENSION_CAP = 10_000
_DENSE_INDEX_CAP = 3


class TensorWord:
    """Finitely supported assignment index -> element, identity elsewhere."""

    __slots__ = ("algebra", "indices", "factors")

    def __init__(
        self,
        algebra: TracialAlgebra,
        indices: Iterable,
        factors: Mapping | None = None,
    ):
        idx = frozenset(indices)
        ident = AlgebraElement.identity(algebra)
        kept: dict = {}
        for t, a in (factors or {}).items():
            if t not in idx:
                raise ValueError(f"index {t!r} outside the index set")
            if a.algebra != algebra:
                raise ValueError("factor from a different algebra")
            if a != ident:
                kept[t] = a
        object.__setattr__(self, "algebra", algebra)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "factors", kept)

    def __setattr__(self, *args):
        raise AttributeError("TensorWord is immutable")

    def _check(self, other: "TensorWord") -> None:
        if self.algebra != other.algebra or self.indices != other.indices:
            raise ValueError("words over different tensor frames")

    def __mul__(self, other: "TensorWord") -> "TensorWord":
        self._check(other)
        ident = AlgebraElement.identity(self.algebra)
        out = {}
        for t in self.factors.keys() | other.factors.keys():
            a = self.factors.get(t, ident)
            b = other.factors.get(t, ident)
            out[t] = a * b
        return TensorWord(self.algebra, self.indices, out)

    def adjoint(self) -> "TensorWord":
        return TensorWord(
            self.algebra, self.indices, {t: a.adjoint() for t, a in self.factors.items()}
        )

    def trace(self) -> ComplexExact:
        total = ComplexExact.one()
        for a in self.factors.values():
            total = total * block_trace(self.algebra, a)
        return total

    def __eq__(self, other):
        if isinstance(other, TensorWord):
            return (
                self.algebra == other.algebra
                and self.indices == other.indices
                and self.factors == other.factors
            )
        return NotImplemented

    def __repr__(self):
        return f"TensorWord(support={sorted(map(repr, self.factors))})"


def elementary(
    algebra: TracialAlgebra, indices: Iterable, a: AlgebraElement, R: Iterable
) -> TensorWord:
    """The word with `a` at every index of R and identity elsewhere."""
    idx = frozenset(indices)
    R = frozenset(R)
    if not R <= idx:
        raise ValueError("R must be contained in the index set")
    return TensorWord(algebra, idx, {t: a for t in R})


def permute(word: TensorWord, sigma: Mapping) -> TensorWord:
    """Relabel coordinates along a bijection of the index set."""
    if set(sigma.keys()) != word.indices or set(sigma.values()) != word.indices:
        raise ValueError("sigma is not a bijection of the index set")
    return TensorWord(
        word.algebra, word.indices, {sigma[t]: a for t, a in word.factors.items()}
    )


def displacement(S: Iterable, sigma: Mapping) -> int:
    """|sigma(S) \\ S|."""
    S = frozenset(S)
    return len({sigma[t] for t in S} - S)


class TensorSum:
    """Linear combination of words with exact scalar coefficients."""

    __slots__ = ("algebra", "indices", "terms")

    def __init__(
        self,
        algebra: TracialAlgebra,
        indices: Iterable,
        terms: Sequence[tuple[ExactScalar, TensorWord]] = (),
    ):
        idx = frozenset(indices)
        merged: list[tuple[ExactScalar, TensorWord]] = []
        for coeff, word in terms:
            if word.algebra != algebra or word.indices != idx:
                raise ValueError("word over a different tensor frame")
            if coeff.is_zero():
                continue
            for pos, (c0, w0) in enumerate(merged):
                if w0 == word:
                    c = c0 + coeff
                    if c.is_zero():
                        merged.pop(pos)
                    else:
                        merged[pos] = (c, w0)
                    break
            else:
                merged.append((coeff, word))
        object.__setattr__(self, "algebra", algebra)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "terms", tuple(merged))

    def __setattr__(self, *args):
        raise AttributeError("TensorSum is immutable")

    @classmethod
    def from_word(cls, word: TensorWord, coeff: ExactScalar | None = None) -> "TensorSum":
        return cls(
            word.algebra,
            word.indices,
            [(coeff if coeff is not None else ExactScalar.one(), word)],
        )

    def _check(self, other: "TensorSum") -> None:
        if self.algebra != other.algebra or self.indices != other.indices:
            raise ValueError("sums over different tensor frames")

    def __add__(self, other: "TensorSum") -> "TensorSum":
        self._check(other)
        return TensorSum(self.algebra, self.indices, self.terms + other.terms)

    def __neg__(self) -> "TensorSum":
        return TensorSum(
            self.algebra, self.indices, [(-c, w) for c, w in self.terms]
        )

    def __sub__(self, other: "TensorSum") -> "TensorSum":
        return self + (-other)

    def scale(self, s: ExactScalar) -> "TensorSum":
        return TensorSum(
            self.algebra, self.indices, [(c * s, w) for c, w in self.terms]
        )

    def __mul__(self, other: "TensorSum") -> "TensorSum":
        self._check(other)
        out = []
        for c1, w1 in self.terms:
            for c2, w2 in other.terms:
                out.append((c1 * c2, w1 * w2))
        return TensorSum(self.algebra, self.indices, out)

    def adjoint(self) -> "TensorSum":
        return TensorSum(
            self.algebra, self.indices, [(c, w.adjoint()) for c, w in self.terms]
        )

    def trace(self) -> ComplexExact:
        total = ComplexExact.zero()
        for c, w in self.terms:
            total = total + w.trace().scale(c)
        return total

    def two_norm_squared(self) -> ExactScalar:
        value = (self.adjoint() * self).trace()
        # tau(x*x) is real for any element of a tracial *-algebra
        return value.real_part()

    def is_zero(self) -> bool:
        return not self.terms


# -- closed-form defect values ------------------------------------------


def _require_trace_order(tau_p: ExactScalar, tau_pq: ExactScalar) -> None:
    if tau_pq.sign() < 0 or tau_pq.compare(tau_p) > 0 or tau_p.compare(ExactScalar.one()) > 0:
        raise ValueError("need 0 <= tau(pq) <= tau(p) <= 1")


def noncommutation_defect(tau_p: ExactScalar, tau_pq: ExactScalar, s: int) -> ExactScalar:
    """||[v~, v~*]||_2^2 = 2 (tau(p)^s - tau(pq)^s) over |S| = s coordinates."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    _require_trace_order(tau_p, tau_pq)
    return (tau_p ** s - tau_pq ** s).scale(2)


def noncommutation_defect_words(pqv: PqvData, indices: Iterable, S: Iterable) -> ExactScalar:
    """The same value computed through actual word arithmetic."""
    idx = frozenset(indices)
    v_word = TensorSum.from_word(elementary(pqv.algebra, idx, pqv.v, S))
    commutator = v_word * v_word.adjoint() - v_word.adjoint() * v_word
    return commutator.two_norm_squared()


def centrality_defect(
    tau_p: ExactScalar, tau_pq: ExactScalar, s: int, moved: int
) -> ExactScalar:
    """||v~_{sigma S} - v~_S||_2^2 = 2 (tau(p)^s - tau(p)^(s-m) tau(pq)^(2m)).

    The cross term factorizes coordinatewise: v*v = p on the s - m common
    coordinates and a bare v or v* (each of trace tau(pq)) on the 2m moved
    ones; tau(v) real is assumed and holds for both constructions.
    """
    if not 0 <= moved <= s:
        raise ValueError("need 0 <= moved <= s")
    _require_trace_order(tau_p, tau_pq)
    cross = tau_p ** (s - moved) * tau_pq ** (2 * moved)
    return (tau_p ** s - cross).scale(2)


def centrality_defect_words(
    pqv: PqvData, indices: Iterable, S: Iterable, sigma: Mapping
) -> ExactScalar:
    idx = frozenset(indices)
    word = elementary(pqv.algebra, idx, pqv.v, S)
    moved_word = permute(word, sigma)
    diff = TensorSum.from_word(moved_word) - TensorSum.from_word(word)
    return diff.two_norm_squared()


def centrality_bound(tau_pq: ExactScalar, moved: int) -> ExactScalar:
    """The coarser estimate 8 (1 - tau(pq)^m) dominating centrality_defect."""
    return (ExactScalar.one() - tau_pq ** moved).scale(8)


# -- dense Kronecker oracle ---------------------------------------------


def _dense_block(a: AlgebraElement, block: int, size: int) -> list[list]:
    out = [[GaussianRational(0, 0)] * size for _ in range(size)]
    for (i, j), v in a.blocks[block].items():
        out[i][j] = v
    return out


def dense_oracle(x: TensorSum) -> tuple[ComplexExact, ExactScalar]:
    """Trace and squared norm via full Kronecker expansion.

    Expands every word into one dense matrix per tuple of block choices
    (one block per coordinate), with the product weight; shares nothing
    with the factorized trace code path.
    """
    order = sorted(x.indices, key=repr)
    if len(order) > _DENSE_INDEX_CAP:
        raise ValueError(f"dense oracle limited to {_DENSE_INDEX_CAP} coordinates")
    alg = x.algebra
    nblocks = len(alg.blocks)
    total_dim = sum(alg.sizes) ** max(len(order), 1)
    if total_dim > DENSE_DIMENSION_CAP:
        raise ValueError("dense dimension cap exceeded")
    ident = AlgebraElement.identity(alg)

    tuples = [()]
    for _ in order:
        tuples = [t + (b,) for t in tuples for b in range(nblocks)]

    trace_total = ComplexExact.zero()
    norm_total = ExactScalar.zero()
    for choice in tuples:
        sizes = [alg.blocks[b][0] for b in choice]
        dim = 1
        for s in sizes:
            dim *= s
        weight = ExactScalar.one()
        for b in choice:
            weight = weight * alg.blocks[b][1]
        if weight.is_zero():
            continue
        # dense complex accumulator for this block tuple
        acc = [[ComplexExact.zero() for _ in range(dim)] for _ in range(dim)]
        for coeff, word in x.terms:
            dense_factors = []
            for t, b, size in zip(order, choice, sizes):
                a = word.factors.get(t, ident)
                dense_factors.append(_dense_block(a, b, size))
            for i in range(dim):
                for j in range(dim):
                    ii, jj = i, j
                    entry = GaussianRational(1, 0)
                    # peel mixed-radix digits, least significant factor last
                    for mat, size in zip(reversed(dense_factors), reversed(sizes)):
                        entry = entry * mat[ii % size][jj % size]
                        if entry.is_zero():
                            break
                        ii //= size
                        jj //= size
                    if entry.is_zero():
                        continue
                    add = ComplexExact(coeff.scale(entry.re), coeff.scale(entry.im))
                    acc[i][j] = acc[i][j] + add
        block_tr = ComplexExact.zero()
        block_norm = ExactScalar.zero()
        for i in range(dim):
            block_tr = block_tr + acc[i][i]
            for j in range(dim):
                block_norm = block_norm + acc[i][j].abs2()
        scale = mpq(1, dim)
        trace_total = trace_total + ComplexExact(
            block_tr.re.scale(scale) * weight, block_tr.im.scale(scale) * weight
        )
        norm_total = norm_total + block_norm.scale(scale) * weight
    return trace_total, norm_total

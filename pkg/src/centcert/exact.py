"""Exact arithmetic over rational combinations of dyadic powers.

The scalars handled here are finite sums  sum_i q_i * 2^(r_i)  with rational
q_i and rational exponents r_i.  Every trace, weight and bound in this package
lives in that ring, so equality can be decided structurally and order can be
decided soundly: single-difference comparisons reduce to big-integer
cross-exponentiation, and everything else goes through adaptive-precision
interval evaluation with directed rounding (MPFR via gmpy2).

Canonical form: each term is stored as (q, f) with q a nonzero rational and
f a rational in [0, 1); integer parts of exponents are absorbed into q as
powers of two.  Powers 2^f with distinct f in [0, 1) are linearly independent
over the rationals, so the representation is unique and `==` is exact.
"""

from __future__ import annotations

import re as _re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import gmpy2
from gmpy2 import mpfr, mpq, mpz

__all__ = [
    "ExactScalar",
    "RootScalar",
    "GaussianRational",
    "ComplexExact",
    "PrecisionExhausted",
    "NotRepresentable",
    "certified_sign",
    "to_mpq",
    "to_fraction",
    "parse_scalar",
    "parse_decimal",
    "DEFAULT_MAX_SIGN_BITS",
    "ORACLE_BITS",
]

# Adaptive sign resolution gives up beyond this precision unless overridden.
DEFAULT_MAX_SIGN_BITS = 1 << 14
# Cross-exponentiation is abandoned (in favor of intervals) past this size.
_CROSS_EXP_BIT_LIMIT = 1_000_000
_FIRST_SIGN_BITS = 128
# Precision of the floating sanity oracle used by the test-suite.
ORACLE_BITS = 256

_RationalLike = "int | str | Fraction | mpq"


class PrecisionExhausted(ArithmeticError):
    """The interval engine could not separate a quantity from zero."""

    def __init__(self, message: str, lo: float | None = None, hi: float | None = None):
        super().__init__(message)
        self.lo = lo
        self.hi = hi


class NotRepresentable(ValueError):
    """The requested result lies outside the dyadic-power ring."""


def to_mpq(value) -> mpq:
    """Coerce int/str/Fraction/mpq/mpz to mpq."""
    if isinstance(value, mpq):
        return value
    if isinstance(value, (int, mpz)):
        return mpq(value)
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, str):
        return mpq(value)
    raise TypeError(f"cannot interpret {value!r} as a rational")


def to_fraction(value) -> Fraction:
    q = to_mpq(value)
    return Fraction(int(q.numerator), int(q.denominator))


def _split_exponent(r: mpq) -> tuple[mpz, mpq]:
    """Return (m, f) with r = m + f, m integer and 0 <= f < 1."""
    m = r.numerator // r.denominator
    return m, r - m


def _pow2_mpq(m) -> mpq:
    """2^m for integer m, exact."""
    m = int(m)
    if m >= 0:
        return mpq(mpz(2) ** m)
    return mpq(1, mpz(2) ** (-m))


def _mpq_to_mpfr_directed(q: mpq, prec: int, up: bool) -> mpfr:
    """Directed conversion; converts numerator and denominator separately so
    huge rationals never trigger a full-precision big-integer division."""
    num, den = q.numerator, q.denominator
    if num.bit_length() + den.bit_length() <= 4 * prec:
        with gmpy2.context(precision=prec, round=gmpy2.RoundUp if up else gmpy2.RoundDown):
            return mpfr(q)
    neg = num < 0
    if neg:
        num = -num
        up = not up
    with gmpy2.context(precision=prec, round=gmpy2.RoundUp if up else gmpy2.RoundDown):
        n = mpfr(num)
    with gmpy2.context(precision=prec, round=gmpy2.RoundDown if up else gmpy2.RoundUp):
        d = mpfr(den)
    with gmpy2.context(precision=prec, round=gmpy2.RoundUp if up else gmpy2.RoundDown):
        out = n / d
    return -out if neg else out


def _exp2_directed(f: mpq, prec: int, up: bool) -> mpfr:
    # 2^f is increasing in f, so round the exponent in the same direction.
    rnd = gmpy2.RoundUp if up else gmpy2.RoundDown
    with gmpy2.context(precision=prec, round=rnd):
        x = mpfr(f)
        return gmpy2.exp2(x)


def _term_interval(q: mpq, f: mpq, prec: int) -> tuple[mpfr, mpfr]:
    p_lo = _exp2_directed(f, prec, up=False)
    p_hi = _exp2_directed(f, prec, up=True)
    if q > 0:
        with gmpy2.context(precision=prec, round=gmpy2.RoundDown):
            lo = _mpq_to_mpfr_directed(q, prec, up=False) * p_lo
        with gmpy2.context(precision=prec, round=gmpy2.RoundUp):
            hi = _mpq_to_mpfr_directed(q, prec, up=True) * p_hi
    else:
        with gmpy2.context(precision=prec, round=gmpy2.RoundDown):
            lo = _mpq_to_mpfr_directed(q, prec, up=False) * p_hi
        with gmpy2.context(precision=prec, round=gmpy2.RoundUp):
            hi = _mpq_to_mpfr_directed(q, prec, up=True) * p_lo
    return lo, hi


class ExactScalar:
    """Immutable element of the ring Q[2^r : r rational]."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Iterable[tuple] = ()):
        merged: dict[mpq, mpq] = {}
        for coeff, exponent in terms:
            q = to_mpq(coeff)
            if q == 0:
                continue
            m, f = _split_exponent(to_mpq(exponent))
            q = q * _pow2_mpq(m)
            acc = merged.get(f)
            acc = q if acc is None else acc + q
            if acc == 0:
                merged.pop(f, None)
            else:
                merged[f] = acc
        ordered = sorted(merged.items(), key=lambda item: item[0])
        object.__setattr__(self, "_terms", tuple((q, f) for f, q in ordered))

    # -- constructors ---------------------------------------------------

    @classmethod
    def from_rational(cls, q) -> "ExactScalar":
        return cls([(to_mpq(q), mpq(0))])

    @classmethod
    def pow2(cls, r) -> "ExactScalar":
        """The pure dyadic power 2^r."""
        return cls([(mpq(1), to_mpq(r))])

    @classmethod
    def zero(cls) -> "ExactScalar":
        return cls()

    @classmethod
    def one(cls) -> "ExactScalar":
        return cls.from_rational(1)

    # -- structure ------------------------------------------------------

    @property
    def terms(self) -> tuple[tuple[mpq, mpq], ...]:
        """Canonical (coefficient, exponent) pairs, exponents in [0,1)."""
        return self._terms

    def is_zero(self) -> bool:
        return not self._terms

    def is_rational(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and self._terms[0][1] == 0)

    def as_mpq(self) -> mpq:
        if not self._terms:
            return mpq(0)
        if not self.is_rational():
            raise NotRepresentable(f"{self} is irrational")
        return self._terms[0][0]

    def as_fraction(self) -> Fraction:
        q = self.as_mpq()
        return Fraction(int(q.numerator), int(q.denominator))

    def is_single_dyadic(self) -> bool:
        """True when the value is +/- q * 2^f with a single term."""
        return len(self._terms) == 1

    def __eq__(self, other) -> bool:
        if isinstance(other, ExactScalar):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction, mpq, mpz)):
            return self == ExactScalar.from_rational(other)
        return NotImplemented

    def __hash__(self):
        return hash(self._terms)

    # -- arithmetic -----------------------------------------------------

    def __add__(self, other) -> "ExactScalar":
        other = _coerce(other)
        return ExactScalar(self._terms + other._terms)

    __radd__ = __add__

    def __neg__(self) -> "ExactScalar":
        return ExactScalar([(-q, f) for q, f in self._terms])

    def __sub__(self, other) -> "ExactScalar":
        return self + (-_coerce(other))

    def __rsub__(self, other) -> "ExactScalar":
        return _coerce(other) - self

    def __mul__(self, other) -> "ExactScalar":
        other = _coerce(other)
        out: list[tuple] = []
        for q1, f1 in self._terms:
            for q2, f2 in other._terms:
                out.append((q1 * q2, f1 + f2))
        return ExactScalar(out)

    __rmul__ = __mul__

    def scale(self, q) -> "ExactScalar":
        q = to_mpq(q)
        return ExactScalar([(c * q, f) for c, f in self._terms])

    def __pow__(self, n: int) -> "ExactScalar":
        if not isinstance(n, int) or n < 0:
            raise ValueError("integer power must be a nonnegative int")
        if n == 0:
            return ExactScalar.one()
        if len(self._terms) == 1:
            q, f = self._terms[0]
            return ExactScalar([(q ** n, f * n)])
        if len(self._terms) == 2:
            (q1, f1), (q2, f2) = self._terms
            out = []
            binom = mpz(1)
            for k in range(n + 1):
                out.append((binom * q1 ** k * q2 ** (n - k), f1 * k + f2 * (n - k)))
                binom = binom * (n - k) // (k + 1)
            return ExactScalar(out)
        result = ExactScalar.one()
        base = self
        e = n
        while e:
            if e & 1:
                result = result * base
            base = base * base if e > 1 else base
            e >>= 1
        return result

    def rational_content(self) -> tuple[mpq, "ExactScalar"]:
        """Write self = c * primitive with integer, gcd-1 primitive coefficients.

        Powering the primitive part keeps binomial expansions small even when
        the true coefficients carry enormous rationals; the content is powered
        separately as a single big rational.
        """
        if not self._terms:
            return mpq(1), self
        dens = [q.denominator for q, _ in self._terms]
        lcm = dens[0]
        for d in dens[1:]:
            lcm = gmpy2.lcm(lcm, d)
        nums = [q.numerator * (lcm // q.denominator) for q, _ in self._terms]
        g = nums[0]
        for v in nums[1:]:
            g = gmpy2.gcd(g, v)
        content = mpq(g, lcm)
        prim = ExactScalar([(mpq(nv // g), f) for nv, (_, f) in zip(nums, self._terms)])
        return content, prim

    def rational_pow(self, r) -> "ExactScalar":
        """Exact r-th power for rational r; defined for single-term positive
        values whose odd part is a perfect power of the required order."""
        r = to_mpq(r)
        if r.denominator == 1:
            n = int(r)
            if n >= 0:
                return self ** n
            return self.inverse() ** (-n)
        if len(self._terms) != 1:
            raise NotRepresentable("rational powers need a single-term value")
        q, f = self._terms[0]
        if q < 0:
            raise NotRepresentable("rational power of a negative value")
        num, den = q.numerator, q.denominator
        v2 = _val2(num) - _val2(den)
        odd_num = num >> max(_val2(num), 0)
        odd_den = den >> max(_val2(den), 0)
        b = int(r.denominator)
        rn, exact_n = gmpy2.iroot(odd_num, b)
        rd, exact_d = gmpy2.iroot(odd_den, b)
        if not (exact_n and exact_d):
            raise NotRepresentable(f"{self} has no exact power {r}")
        a = int(r.numerator)
        root = mpq(rn, rd)
        if a >= 0:
            coeff = root ** a
        else:
            coeff = mpq(1) / root ** (-a)
        return ExactScalar([(coeff, (f + v2) * r)])

    def inverse(self) -> "ExactScalar":
        if len(self._terms) != 1:
            raise NotRepresentable("only single-term values have ring inverses")
        q, f = self._terms[0]
        return ExactScalar([(1 / q, -f)])

    def sqrt(self) -> "ExactScalar":
        """Exact square root, or NotRepresentable."""
        if self.is_zero():
            return self
        return self.rational_pow(mpq(1, 2))

    # -- order ----------------------------------------------------------

    def sign(self, max_bits: int | None = None) -> int:
        """Certified sign in {-1, 0, +1}."""
        if not self._terms:
            return 0
        signs = {1 if q > 0 else -1 for q, _ in self._terms}
        if len(signs) == 1:
            return signs.pop()
        if len(self._terms) == 2:
            s = self._cross_exp_sign()
            if s is not None:
                return s
        return self._interval_sign(max_bits)

    def _cross_exp_sign(self) -> int | None:
        (q1, f1), (q2, f2) = self._terms  # f1 < f2, opposite signs
        a1, a2 = abs(q1), abs(q2)
        delta = f2 - f1
        b = int(delta.denominator)
        a = int(delta.numerator)
        ratio = a1 / a2
        u, v = ratio.numerator, ratio.denominator
        cost = b * max(u.bit_length(), v.bit_length()) + a
        if cost > _CROSS_EXP_BIT_LIMIT:
            return None
        lhs = u ** b
        rhs = v ** b << a
        if lhs == rhs:
            # |q1| 2^f1 == |q2| 2^f2 contradicts canonical uniqueness
            raise AssertionError("canonical form admitted equal magnitudes")
        big_is_first = lhs > rhs
        if big_is_first:
            return 1 if q1 > 0 else -1
        return 1 if q2 > 0 else -1

    def _interval_sign(self, max_bits: int | None) -> int:
        cap = max_bits or DEFAULT_MAX_SIGN_BITS
        prec = _FIRST_SIGN_BITS
        lo = hi = None
        while prec <= cap:
            lo, hi = self.interval(prec)
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            prec *= 2
        raise PrecisionExhausted(
            f"sign undecided at {cap} bits; interval [{lo}, {hi}]",
            float(lo) if lo is not None else None,
            float(hi) if hi is not None else None,
        )

    def compare(self, other, max_bits: int | None = None) -> int:
        return (self - _coerce(other)).sign(max_bits)

    def __lt__(self, other):
        return self.compare(other) < 0

    def __le__(self, other):
        return self.compare(other) <= 0

    def __gt__(self, other):
        return self.compare(other) > 0

    def __ge__(self, other):
        return self.compare(other) >= 0

    # -- evaluation -----------------------------------------------------

    def interval(self, prec: int) -> tuple[mpfr, mpfr]:
        """Enclosing interval at the given working precision."""
        with gmpy2.context(precision=prec):
            lo = mpfr(0)
            hi = mpfr(0)
        for q, f in self._terms:
            t_lo, t_hi = _term_interval(q, f, prec)
            with gmpy2.context(precision=prec, round=gmpy2.RoundDown):
                lo = lo + t_lo
            with gmpy2.context(precision=prec, round=gmpy2.RoundUp):
                hi = hi + t_hi
        return lo, hi

    def approx(self, prec: int = 128) -> mpfr:
        with gmpy2.context(precision=prec):
            total = mpfr(0)
            for q, f in self._terms:
                total += mpfr(q) * gmpy2.exp2(mpfr(f))
        return total

    def __float__(self) -> float:
        return float(self.approx(96))

    def to_decimal(self, digits: int = 12) -> str:
        """Round-to-nearest decimal rendering; approximate, for display only."""
        if not self._terms:
            return "0"
        return format(self.approx(max(96, 4 * digits)), f".{digits}g")

    # -- rendering ------------------------------------------------------

    def canonical_str(self) -> str:
        if not self._terms:
            return "0"
        parts: list[str] = []
        for i, (q, f) in enumerate(self._terms):
            mag = abs(q)
            body = str(mag) if f == 0 else f"{mag}*2^({f})"
            if i == 0:
                parts.append(body if q > 0 else f"-{body}")
            else:
                parts.append(f"+ {body}" if q > 0 else f"- {body}")
        return " ".join(parts)

    def __str__(self) -> str:
        return self.canonical_str()

    def __repr__(self) -> str:
        return f"ExactScalar({self.canonical_str()!r})"


def _coerce(value) -> ExactScalar:
    if isinstance(value, ExactScalar):
        return value
    if isinstance(value, (int, Fraction, mpq, mpz)):
        return ExactScalar.from_rational(value)
    raise TypeError(f"cannot coerce {value!r} to ExactScalar")


def _val2(n: mpz) -> int:
    """2-adic valuation of a nonzero integer."""
    n = mpz(n)
    if n == 0:
        raise ValueError("valuation of zero")
    return int(gmpy2.bit_scan1(abs(n)))


_TERM_RE = _re.compile(
    r"\s*(?P<sign>[+-])?\s*(?P<coeff>\d+(?:/\d+)?)(?:\*2\^\((?P<exp>-?\d+(?:/\d+)?)\))?\s*"
)


def parse_scalar(text: str) -> ExactScalar:
    """Inverse of ExactScalar.canonical_str (accepts any term order/signs)."""
    s = text.strip()
    if s == "0":
        return ExactScalar.zero()
    terms = []
    pos = 0
    first = True
    while pos < len(s):
        m = _TERM_RE.match(s, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse scalar {text!r} at offset {pos}")
        sign = m.group("sign")
        if sign is None and not first:
            raise ValueError(f"missing +/- between terms in {text!r}")
        q = mpq(m.group("coeff"))
        if sign == "-":
            q = -q
        f = mpq(m.group("exp")) if m.group("exp") else mpq(0)
        terms.append((q, f))
        pos = m.end()
        first = False
    return ExactScalar(terms)


def parse_decimal(text: str) -> Fraction:
    """Exact rational value of a plain decimal string."""
    return Fraction(text)


# -- certified linear combinations --------------------------------------


def certified_sign(
    pairs: Sequence[tuple], max_bits: int | None = None
) -> tuple[int, str]:
    """Sign of sum(factor_i * scalar_i) for rational factors and ExactScalars.

    Factors may be enormous rationals (powered bound prefactors); they are
    never multiplied into the term lists.  Returns (sign, method) where method
    is "exact" or "interval@<bits>".  Raises PrecisionExhausted when the
    interval engine cannot separate the sum from zero.
    """
    norm: list[tuple[mpq, ExactScalar]] = []
    for factor, scalar in pairs:
        f = to_mpq(factor)
        s = _coerce(scalar)
        if f == 0 or s.is_zero():
            continue
        norm.append((f, s))
    if not norm:
        return 0, "exact"
    if all(s.is_rational() for _, s in norm):
        total = mpq(0)
        for f, s in norm:
            total += f * s.as_mpq()
        return (0 if total == 0 else (1 if total > 0 else -1)), "exact"
    if len(norm) == 1 and abs(norm[0][0]) == 1:
        f, s = norm[0]
        sgn = s.sign(max_bits)
        return (sgn if f > 0 else -sgn), "exact"
    small = sum(
        f.numerator.bit_length() + f.denominator.bit_length() for f, _ in norm
    ) <= 4096 and sum(len(s.terms) for _, s in norm) <= 64
    if small:
        total = ExactScalar.zero()
        for f, s in norm:
            total = total + s.scale(f)
        return total.sign(max_bits), "exact"
    cap = max_bits or DEFAULT_MAX_SIGN_BITS
    prec = _FIRST_SIGN_BITS
    lo = hi = None
    while prec <= cap:
        with gmpy2.context(precision=prec):
            lo = mpfr(0)
            hi = mpfr(0)
        for f, s in norm:
            s_lo, s_hi = s.interval(prec)
            f_lo = _mpq_to_mpfr_directed(f, prec, up=False)
            f_hi = _mpq_to_mpfr_directed(f, prec, up=True)
            with gmpy2.context(precision=prec, round=gmpy2.RoundDown):
                t_lo = min(f_lo * s_lo, f_lo * s_hi, f_hi * s_lo, f_hi * s_hi)
                lo = lo + t_lo
            with gmpy2.context(precision=prec, round=gmpy2.RoundUp):
                t_hi = max(f_lo * s_lo, f_lo * s_hi, f_hi * s_lo, f_hi * s_hi)
                hi = hi + t_hi
        if lo > 0:
            return 1, f"interval@{prec}"
        if hi < 0:
            return -1, f"interval@{prec}"
        prec *= 2
    raise PrecisionExhausted(
        f"combination sign undecided at {cap} bits; interval [{lo}, {hi}]",
        float(lo) if lo is not None else None,
        float(hi) if hi is not None else None,
    )


# -- tagged square roots -------------------------------------------------


@dataclass(frozen=True)
class RootScalar:
    """sqrt(square) for values whose root leaves the dyadic-power ring."""

    square: ExactScalar

    def approx(self, prec: int = 128) -> mpfr:
        with gmpy2.context(precision=prec):
            return gmpy2.sqrt(self.square.approx(prec))

    def __float__(self) -> float:
        return float(self.approx(96))

    def to_decimal(self, digits: int = 12) -> str:
        return format(self.approx(max(96, 4 * digits)), f".{digits}g")

    def __str__(self) -> str:
        return f"sqrt({self.square.canonical_str()})"

    def compare(self, other) -> int:
        """Order against a nonnegative ExactScalar or RootScalar, via squares."""
        if isinstance(other, RootScalar):
            return self.square.compare(other.square)
        other = _coerce(other)
        if other.sign() < 0:
            return 1
        return self.square.compare(other * other)


# -- Gaussian rationals (matrix entries) ---------------------------------


class GaussianRational:
    """Complex number with rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", to_mpq(re))
        object.__setattr__(self, "im", to_mpq(im))

    def __setattr__(self, *args):
        raise AttributeError("GaussianRational is immutable")

    def __add__(self, other):
        other = _gauss(other)
        return GaussianRational(self.re + other.re, self.im + other.im)

    def __sub__(self, other):
        other = _gauss(other)
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, other):
        other = _gauss(other)
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __radd__ = __add__
    __rmul__ = __mul__

    def conj(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def abs2(self) -> mpq:
        return self.re * self.re + self.im * self.im

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __eq__(self, other):
        if isinstance(other, (GaussianRational, int, Fraction, mpq, mpz)):
            other = _gauss(other)
            return self.re == other.re and self.im == other.im
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"


def _gauss(value) -> GaussianRational:
    if isinstance(value, GaussianRational):
        return value
    if isinstance(value, (int, Fraction, mpq, mpz)):
        return GaussianRational(value, 0)
    raise TypeError(f"cannot coerce {value!r} to GaussianRational")


GAUSS_ZERO = GaussianRational(0, 0)
GAUSS_ONE = GaussianRational(1, 0)


# -- complex combinations of exact scalars -------------------------------


@dataclass(frozen=True)
class ComplexExact:
    """Complex value with ExactScalar real and imaginary parts."""

    re: ExactScalar
    im: ExactScalar

    @classmethod
    def from_gaussian(cls, g: GaussianRational) -> "ComplexExact":
        return cls(ExactScalar.from_rational(g.re), ExactScalar.from_rational(g.im))

    @classmethod
    def from_real(cls, s) -> "ComplexExact":
        return cls(_coerce(s), ExactScalar.zero())

    @classmethod
    def zero(cls) -> "ComplexExact":
        return cls(ExactScalar.zero(), ExactScalar.zero())

    @classmethod
    def one(cls) -> "ComplexExact":
        return cls(ExactScalar.one(), ExactScalar.zero())

    def __add__(self, other: "ComplexExact") -> "ComplexExact":
        return ComplexExact(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "ComplexExact") -> "ComplexExact":
        return ComplexExact(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "ComplexExact":
        return ComplexExact(-self.re, -self.im)

    def __mul__(self, other: "ComplexExact") -> "ComplexExact":
        return ComplexExact(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def scale(self, s: ExactScalar) -> "ComplexExact":
        return ComplexExact(self.re * s, self.im * s)

    def conj(self) -> "ComplexExact":
        return ComplexExact(self.re, -self.im)

    def abs2(self) -> ExactScalar:
        return self.re * self.re + self.im * self.im

    def is_zero(self) -> bool:
        return self.re.is_zero() and self.im.is_zero()

    def is_real(self) -> bool:
        return self.im.is_zero()

    def real_part(self) -> ExactScalar:
        if not self.is_real():
            raise NotRepresentable(f"{self} has a nonzero imaginary part")
        return self.re

    def __str__(self):
        if self.im.is_zero():
            return str(self.re)
        return f"({self.re}) + ({self.im})i"

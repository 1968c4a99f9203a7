"""Stability certificates for generalized wreath-product actions.

The model: a group H = <h> (infinite cyclic or Z/m) indexes the coordinates
of a line [0,1]^H, and a base space X = Z carries one line per point.  The
product measure nu on ([0,1]^H)^X is Lebesgue in every coordinate.  A finite
family F of transformations acts by twisting lines and permuting X:

    (alpha_f y)_x = gamma_{htilde(x)} y_{g^-1 x},   f = (htilde, g),

where the shift gamma acts on a line on the right, (gamma_g u)_s = u_{s g}.

The witness is a box E of lines, almost invariant for every g occurring in
F, together with the cutoff t = 2^(-1/|E|) splitting each coordinate into
U0 = [0,t] and U1 = (t,1].  The local map T0 twists the line at each x in E
by h on Z = {u_0 in U0, u_h in U1}, by h^-1 on gamma_h Z, and fixes it
elsewhere; T0 is an involution and preserves nu.

Everything measurable here is a finite union of rectangles, i.e. events
constrained on finitely many coordinates (s, x) by a bucket U0 or U1, so
all measures are evaluated exactly in ExactScalar arithmetic.  Monte Carlo
estimates with seeded counter-based streams cross-check the exact values.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from hashlib import blake2s
from typing import Any, Iterable, Mapping

import numpy as np

from .exact import DEFAULT_MAX_SIGN_BITS, ExactScalar
from .groups import ActionSpec, SearchExhausted, invariance_defect, folner_search, translation_action
from .certificate import Certificate

__all__ = [
    "EpsChoice",
    "FElement",
    "WreathModel",
    "StabilityWitness",
    "RectangleEvent",
    "McTally",
    "standard_model",
    "choose_eps_js",
    "build_witness",
    "exact_measure",
    "pullback_tzero",
    "mc_estimate",
    "stability_report",
    "tallies_csv",
]

# caps keeping the rectangle calculus finite
MAX_DNF_TERMS = 4096
MAX_IE_TERMS = 16

MIN_SAMPLES = 1000
# two-sided 99% normal quantile
Z99 = 2.5758293035489004

_STRUCT_TAG = 0x9E3779B97F4A7C15


# -- model ---------------------------------------------------------------


@dataclass(frozen=True)
class FElement:
    """One transformation (htilde, g): a finitely supported twist and a shift.

    htilde is stored as a sorted tuple of (x, value) pairs with values in
    H written as integers, nonzero after reduction mod the order of h.
    """

    htilde: tuple
    g: Any

    @property
    def support(self) -> frozenset:
        return frozenset(x for x, _ in self.htilde)

    def twist(self, x) -> int:
        for y, v in self.htilde:
            if y == x:
                return v
        return 0


def _canon_h(modulus: int, s: int) -> int:
    return s % modulus if modulus else s


@dataclass(frozen=True)
class WreathModel:
    """H = <h> acting on lines indexed by X = Z, with a finite family F.

    h_modulus is the order of h (0 means infinite).  Lines are indexed by
    integers; the shift part of every f acts by translation.
    """

    F: tuple = ()
    h: int = 1
    h_modulus: int = 0
    action: ActionSpec = field(default_factory=lambda: translation_action(1))

    def __post_init__(self):
        if self.h_modulus < 0 or self.h_modulus == 1:
            raise ValueError(f"invalid order for h: {self.h_modulus}")
        if self.action.box_rank != 1:
            raise ValueError("lines must be indexed by Z (rank-1 translation)")
        h = _canon_h(self.h_modulus, self.h)
        if h == 0:
            raise ValueError("h must be a nontrivial element")
        object.__setattr__(self, "h", h)
        if not self.F:
            raise ValueError("F must be nonempty")
        fixed = []
        for f in self.F:
            if not isinstance(f, FElement):
                twist, g = f
                items = twist.items() if isinstance(twist, Mapping) else twist
                cleaned = {}
                for x, v in items:
                    if not isinstance(x, int):
                        raise ValueError(f"twist support point must be an int, got {x!r}")
                    v = _canon_h(self.h_modulus, v)
                    if v:
                        cleaned[x] = v
                f = FElement(tuple(sorted(cleaned.items())), g)
            self.action.group.validate(f.g)
            fixed.append(f)
        object.__setattr__(self, "F", tuple(fixed))

    @property
    def h_inv(self) -> int:
        return _canon_h(self.h_modulus, -self.h)

    def canon(self, s: int) -> int:
        return _canon_h(self.h_modulus, s)

    @property
    def W(self) -> frozenset:
        out: set = set()
        for f in self.F:
            out |= f.support
        return frozenset(out)

    def forbidden_lines(self) -> frozenset:
        """W together with every g_i^-1 W; the witness box must avoid it."""
        group, act = self.action.group, self.action.act
        out = set(self.W)
        for f in self.F:
            ginv = group.inverse(f.g)
            out |= {act(ginv, w) for w in self.W}
        return frozenset(out)


def standard_model(f_size: int = 3, h_modulus: int = 0, h: int = 1) -> WreathModel:
    """f_size - 1 plain translations plus one twist by h at the origin."""
    if f_size < 1:
        raise ValueError("f_size must be at least 1")
    shifts = []
    k = 1
    while len(shifts) < f_size - 1:
        shifts.extend([k, -k][: f_size - 1 - len(shifts)])
        k += 1
    F = [((), g) for g in shifts]
    F.append(({0: h}, 0))
    return WreathModel(F=tuple(F), h=h, h_modulus=h_modulus)


# -- epsilon selection ---------------------------------------------------


class EpsChoice(tuple):
    """Pair of unit fractions: the literal threshold and the safe one."""

    __slots__ = ()

    def __new__(cls, literal: Fraction, safe: Fraction):
        return super().__new__(cls, (literal, safe))

    @property
    def literal(self) -> Fraction:
        return self[0]

    @property
    def safe(self) -> Fraction:
        return self[1]


def _smallest_unit_exponent(c: int, d: int, factor: int) -> Fraction:
    # smallest b >= 1 with d^b > factor * c^b, i.e. 2^(-log2(factor)/b) > c/d
    b = 1
    cb, db = c, d
    while db <= factor * cb:
        b += 1
        cb *= c
        db *= d
        if b > 10**6:
            raise SearchExhausted("no admissible unit fraction below 1e-6")
    return Fraction(1, b)


def choose_eps_js(f_size: int) -> EpsChoice:
    """Largest unit fractions eps with 2^(-3 eps) (resp. 2^(-6 eps))
    exceeding 1 - 1/f_size.  The safe variant absorbs the loss from the
    symmetric difference being twice the one-sided defect."""
    if f_size < 1:
        raise ValueError("f_size must be at least 1")
    c, d = f_size - 1, f_size
    return EpsChoice(
        _smallest_unit_exponent(c, d, 8),
        _smallest_unit_exponent(c, d, 64),
    )


# -- witness -------------------------------------------------------------


@dataclass(frozen=True)
class StabilityWitness:
    """Almost invariant box E with cutoff t = 2^(-1/|E|)."""

    model: WreathModel
    E: tuple
    epsilon: Fraction
    eps_literal: Fraction
    t: ExactScalar
    defect: Fraction

    def image_lines(self, i: int) -> tuple:
        act = self.model.action.act
        g = self.model.F[i].g
        return tuple(sorted(act(g, x) for x in self.E))

    def preimage_lines(self, i: int) -> tuple:
        group, act = self.model.action.group, self.model.action.act
        ginv = group.inverse(self.model.F[i].g)
        return tuple(sorted(act(ginv, x) for x in self.E))

    def delta_lines(self, i: int) -> tuple:
        """Lines where equivariance of the local map can fail: E delta g^-1 E."""
        return tuple(sorted(set(self.E) ^ set(self.preimage_lines(i))))

    def moved_out(self, i: int) -> int:
        return len(set(self.image_lines(i)) - set(self.E))

    def active_lines(self) -> tuple:
        out: set = set()
        for i in range(len(self.model.F)):
            out |= set(self.delta_lines(i))
        return tuple(sorted(out))


def build_witness(
    model: WreathModel,
    size_cap: int = 100_000,
    E_override: Iterable | None = None,
) -> StabilityWitness:
    """Search a box of lines avoiding the twisted region, almost invariant
    under every shift of F at the safe threshold.

    E_override skips the search; the override must still avoid the twisted
    region, but its invariance defect is taken as found, so a bad override
    produces a failing certificate rather than an exception.
    """
    eps = choose_eps_js(len(model.F))
    group = model.action.group
    K = {group.identity()}
    for f in model.F:
        K.add(f.g)
        K.add(group.inverse(f.g))
    K = sorted(K)
    forbidden = model.forbidden_lines()
    if E_override is not None:
        E = tuple(sorted(set(E_override)))
        if not E:
            raise ValueError("override box is empty")
        bad = set(E) & forbidden
        if bad:
            raise ValueError(f"override box meets the twisted region: {sorted(bad)}")
        defect = invariance_defect(model.action, E, K)
    else:
        cert = folner_search(model.action, K, eps.safe, size_cap, disjoint_from=sorted(forbidden))
        E = tuple(sorted(cert.T))
        defect = cert.defect
    t = ExactScalar.pow2(Fraction(-1, len(E)))
    return StabilityWitness(
        model=model,
        E=E,
        epsilon=eps.safe,
        eps_literal=eps.literal,
        t=t,
        defect=defect,
    )


# -- rectangle events ----------------------------------------------------


def _merge_atoms(base: dict, atoms: Iterable) -> dict | None:
    out = dict(base)
    for coord, bucket in atoms:
        old = out.get(coord)
        if old is None:
            out[coord] = bucket
        elif old != bucket:
            return None
    return out


class RectangleEvent:
    """Finite union of rectangles in ([0,1]^H)^X.

    A term is a conjunction of atoms ((s, x), bucket) meaning coordinate
    (s, x) lies in U0 (bucket 0) or U1 (bucket 1).  Contradictory terms
    are dropped on construction.  The disjoint flag records that the terms
    are known pairwise disjoint, so the measure is a plain sum; without it
    the measure falls back to inclusion-exclusion, capped at MAX_IE_TERMS
    terms.
    """

    __slots__ = ("terms", "disjoint")

    def __init__(self, terms: Iterable = (), disjoint: bool = False):
        cleaned = []
        for term in terms:
            merged = _merge_atoms({}, term)
            if merged is None:
                continue
            cleaned.append(tuple(sorted(merged.items())))
        if len(cleaned) > MAX_DNF_TERMS:
            raise SearchExhausted(f"event with {len(cleaned)} terms exceeds cap {MAX_DNF_TERMS}")
        object.__setattr__(self, "terms", tuple(dict.fromkeys(cleaned)))
        object.__setattr__(self, "disjoint", bool(disjoint) or len(self.terms) <= 1)

    def __setattr__(self, *args):
        raise AttributeError("RectangleEvent is immutable")

    @classmethod
    def conjunction(cls, atoms: Iterable) -> "RectangleEvent":
        return cls([tuple(atoms)], disjoint=True)

    @classmethod
    def empty(cls) -> "RectangleEvent":
        return cls([], disjoint=True)

    @classmethod
    def full(cls) -> "RectangleEvent":
        return cls([()], disjoint=True)

    def is_empty(self) -> bool:
        return not self.terms

    def footprint(self) -> frozenset:
        return frozenset(coord for term in self.terms for coord, _ in term)

    def lines(self) -> frozenset:
        return frozenset(x for _, x in self.footprint())

    def __eq__(self, other) -> bool:
        if not isinstance(other, RectangleEvent):
            return NotImplemented
        return frozenset(self.terms) == frozenset(other.terms)

    def __hash__(self):
        return hash(frozenset(self.terms))

    def __repr__(self):
        return f"RectangleEvent({len(self.terms)} terms, disjoint={self.disjoint})"

    def intersect(self, other: "RectangleEvent") -> "RectangleEvent":
        out = []
        for a in self.terms:
            base = dict(a)
            for b in other.terms:
                merged = _merge_atoms(base, b)
                if merged is not None:
                    out.append(tuple(merged.items()))
        return RectangleEvent(out, disjoint=self.disjoint and other.disjoint)

    def union(self, other: "RectangleEvent") -> "RectangleEvent":
        return RectangleEvent(self.terms + other.terms, disjoint=False)

    def disjoint_union(self, other: "RectangleEvent") -> "RectangleEvent":
        """The caller asserts the two events are disjoint as sets."""
        if not (self.disjoint and other.disjoint):
            return self.union(other)
        return RectangleEvent(self.terms + other.terms, disjoint=True)

    @staticmethod
    def _neg_pieces(term) -> list:
        # ordered expansion of the complement of one conjunction; the
        # pieces are pairwise disjoint by the first flipped atom
        pieces = []
        for i, (coord, bucket) in enumerate(term):
            pieces.append(term[:i] + ((coord, 1 - bucket),))
        return pieces

    def minus(self, other: "RectangleEvent") -> "RectangleEvent":
        work = [dict(t) for t in self.terms]
        for term in other.terms:
            nxt = []
            for w in work:
                for piece in self._neg_pieces(term):
                    merged = _merge_atoms(w, piece)
                    if merged is not None:
                        nxt.append(merged)
            if len(nxt) > MAX_DNF_TERMS:
                raise SearchExhausted("difference exceeded the term cap")
            work = nxt
        return RectangleEvent([tuple(w.items()) for w in work], disjoint=self.disjoint)

    def delta(self, other: "RectangleEvent") -> "RectangleEvent":
        a = self.minus(other)
        b = other.minus(self)
        return RectangleEvent(a.terms + b.terms, disjoint=a.disjoint and b.disjoint)

    def measure(self, t: ExactScalar) -> ExactScalar:
        one_minus = ExactScalar.one() - t
        if self.disjoint:
            total = ExactScalar.zero()
            for term in self.terms:
                total = total + _term_measure(term, t, one_minus)
            return total
        if len(self.terms) > MAX_IE_TERMS:
            raise SearchExhausted(
                f"inclusion-exclusion over {len(self.terms)} terms exceeds cap {MAX_IE_TERMS}"
            )
        total = ExactScalar.zero()
        for r in range(1, len(self.terms) + 1):
            sign = 1 if r % 2 else -1
            for combo in itertools.combinations(self.terms, r):
                merged: dict | None = {}
                for term in combo:
                    merged = _merge_atoms(merged, term)
                    if merged is None:
                        break
                if merged is None:
                    continue
                m = _term_measure(tuple(merged.items()), t, one_minus)
                total = total + (m if sign > 0 else -m)
        return total

    def equivalent(self, other: "RectangleEvent", t: ExactScalar) -> bool:
        """Equality as sets: every nonempty rectangle has positive measure,
        so a measure-zero symmetric difference is empty."""
        return self.delta(other).measure(t).is_zero()


def _term_measure(term, t: ExactScalar, one_minus: ExactScalar) -> ExactScalar:
    n0 = sum(1 for _, b in term if b == 0)
    n1 = len(term) - n0
    return (t**n0) * (one_minus**n1)


def exact_measure(event: RectangleEvent, t: ExactScalar) -> ExactScalar:
    return event.measure(t)


# -- the local map T0 ----------------------------------------------------


def _tzero_cases(model: WreathModel) -> list:
    """Disjoint cover of one line by membership in Z, gamma_h Z, neither.

    Each case is (local region atoms, shift): on the region, the line image
    under T0 reads coordinate s + shift.  The neither-region is expanded
    into ordered complement pieces so the cases stay pairwise disjoint.
    """
    h, hm = model.h, model.h_inv
    z_atoms = ((0, 0), (h, 1))
    g_atoms = ((hm, 0), (0, 1))
    cases = [(z_atoms, h), (g_atoms, hm)]
    for nz in RectangleEvent._neg_pieces(z_atoms):
        for ng in RectangleEvent._neg_pieces(g_atoms):
            merged = _merge_atoms(dict(nz), ng)
            if merged is not None:
                cases.append((tuple(merged.items()), 0))
    return cases


def pullback_tzero(event: RectangleEvent, witness: StabilityWitness) -> RectangleEvent:
    """The preimage {y : T0 y in event}; T0 is an involution, so this is
    also the forward image.

    Atoms on lines outside E pass through unchanged.  On a line in E the
    term splits along the membership cases of that line, each case shifting
    the s-coordinates it reads.
    """
    model = witness.model
    E_set = set(witness.E)
    cases = _tzero_cases(model)
    out = []
    for term in event.terms:
        passthrough = []
        by_line: dict = {}
        for (s, x), bucket in term:
            if x in E_set:
                by_line.setdefault(x, []).append((s, bucket))
            else:
                passthrough.append(((s, x), bucket))
        options = []
        for x, local in sorted(by_line.items()):
            opts = []
            for region, shift in cases:
                merged = _merge_atoms(
                    dict(region),
                    [(model.canon(s + shift), b) for s, b in local],
                )
                if merged is not None:
                    opts.append([((s, x), b) for s, b in merged.items()])
            options.append(opts)
        count = 1
        for opts in options:
            count *= len(opts)
        if len(out) + count > MAX_DNF_TERMS:
            raise SearchExhausted("pullback exceeded the term cap")
        for combo in itertools.product(*options):
            atoms = list(passthrough)
            for local_atoms in combo:
                atoms.extend(local_atoms)
            out.append(atoms)
    return RectangleEvent(out, disjoint=event.disjoint)


# -- exact condition values ----------------------------------------------


def _cyl(lines: Iterable) -> RectangleEvent:
    return RectangleEvent.conjunction((((0, x), 0) for x in lines))


def base_event(witness: StabilityWitness) -> RectangleEvent:
    """A = all lines of E read U0 at the identity coordinate; nu(A) = 1/2."""
    return _cyl(witness.E)


def shifted_base_event(witness: StabilityWitness, i: int) -> RectangleEvent:
    return _cyl(witness.image_lines(i))


def omega_trivial_event(witness: StabilityWitness, lines: Iterable) -> RectangleEvent:
    """The twist is trivial on every given line: neither Z nor gamma_h Z."""
    model = witness.model
    pieces = [
        (atoms, 0)
        for atoms, shift in _tzero_cases(model)
        if shift == 0
    ]
    event = RectangleEvent.full()
    for x in lines:
        local = RectangleEvent(
            [[((s, x), b) for s, b in atoms] for atoms, _ in pieces],
            disjoint=True,
        )
        event = event.intersect(local)
    return event


def nu_sym_diff_shift(witness: StabilityWitness, i: int) -> ExactScalar:
    """nu(alpha_f A delta A), evaluated by the rectangle calculus."""
    A = base_event(witness)
    B = shifted_base_event(witness, i)
    return A.delta(B).measure(witness.t)


def nu_sym_diff_shift_closed(witness: StabilityWitness, i: int) -> ExactScalar:
    # 2 t^|E| (1 - t^m) with m the lines pushed out of E
    t = witness.t
    m = witness.moved_out(i)
    lead = t ** len(witness.E)
    return (lead * (ExactScalar.one() - t**m)).scale(2)


def nu_equivariance(witness: StabilityWitness, i: int) -> ExactScalar:
    """nu(Y_f) for the event that the local map commutes with alpha_f.

    With E clear of the twisted region, commutation holds exactly when the
    twist is trivial on every line of E delta g^-1 E, an event of measure
    (1 - 2t(1-t))^|delta|.
    """
    t = witness.t
    base = ExactScalar.one() - (t * (ExactScalar.one() - t)).scale(2)
    return base ** len(witness.delta_lines(i))


def nu_good_set(witness: StabilityWitness, i: int) -> ExactScalar:
    """nu(C_f): the witness rectangle inside Y_f pinning U0 at e, h, h^2."""
    model = witness.model
    stencil = {model.canon(0), model.canon(model.h), model.canon(2 * model.h)}
    return witness.t ** (len(stencil) * len(witness.delta_lines(i)))


def good_set_event(witness: StabilityWitness, i: int) -> RectangleEvent:
    model = witness.model
    stencil = sorted({model.canon(0), model.canon(model.h), model.canon(2 * model.h)})
    atoms = [((s, x), 0) for x in witness.delta_lines(i) for s in stencil]
    return RectangleEvent.conjunction(atoms)


def _overlap_factor(witness: StabilityWitness, x) -> ExactScalar:
    loc = _cyl([x])
    return loc.intersect(pullback_tzero(loc, witness)).measure(witness.t)


def nu_tzero_sym_diff(witness: StabilityWitness) -> ExactScalar:
    """nu(T0 A delta A), exactly.

    T0 acts line by line and A is a product of one-line events, so the
    overlap nu(A meet T0^-1 A) is the product over E of one-line overlap
    factors; expanding the full pullback of A would blow up instead.
    """
    t = witness.t
    E = witness.E
    first = _overlap_factor(witness, E[0])
    if len(E) > 1:
        if _overlap_factor(witness, E[-1]) != first:
            raise AssertionError("one-line overlap factors disagree")
    overlap = first ** len(E)
    nu_a = base_event(witness).measure(t)
    loc = _cyl([E[0]])
    nu_t0a = pullback_tzero(loc, witness).measure(t) ** len(E)
    return nu_a + nu_t0a - overlap.scale(2)


# -- Monte Carlo ---------------------------------------------------------


@dataclass(frozen=True)
class McTally:
    condition: str
    samples: int
    successes: int
    seed: int

    @property
    def estimate(self) -> float:
        return self.successes / self.samples

    @property
    def half_width(self) -> float:
        p = self.estimate
        return Z99 * (p * (1 - p) / self.samples) ** 0.5

    def covers(self, target: float) -> bool:
        return abs(self.estimate - target) <= self.half_width


def _coord_key(seed: int, coord) -> int:
    digest = blake2s(repr(coord).encode(), digest_size=8).digest()
    return ((seed & (2**64 - 1)) << 64) | int.from_bytes(digest, "big")


class _Sampler:
    """One independent uniform stream per coordinate, keyed by seed and
    coordinate so every condition sees the same configuration marginals."""

    def __init__(self, model: WreathModel, samples: int, seed: int):
        self.model = model
        self.samples = samples
        self.seed = seed
        self._cache: dict = {}

    def u(self, s: int, x: int) -> np.ndarray:
        coord = (self.model.canon(s), x)
        arr = self._cache.get(coord)
        if arr is None:
            rng = np.random.Generator(np.random.Philox(key=_coord_key(self.seed, coord)))
            arr = rng.random(self.samples)
            self._cache[coord] = arr
        return arr

    def masks(self, x: int, tf: float) -> tuple:
        model = self.model
        u0 = self.u(0, x)
        uh = self.u(model.h, x)
        um = self.u(model.h_inv, x)
        in_z = (u0 <= tf) & (uh > tf)
        in_g = (um <= tf) & (u0 > tf)
        return in_z, in_g

    def tzero_val(self, s: int, x: int, in_E: bool, tf: float) -> np.ndarray:
        if not in_E:
            return self.u(s, x)
        in_z, in_g = self.masks(x, tf)
        model = self.model
        return np.where(
            in_z,
            self.u(s + model.h, x),
            np.where(in_g, self.u(s + model.h_inv, x), self.u(s, x)),
        )


def _mask_cond1(witness: StabilityWitness, smp: _Sampler, tf: float) -> np.ndarray:
    ok = np.ones(smp.samples, dtype=bool)
    for x in witness.active_lines():
        in_z, in_g = smp.masks(x, tf)
        ok &= ~(in_z | in_g)
    return ok


def _mask_cond3(witness: StabilityWitness, smp: _Sampler, tf: float, i: int) -> np.ndarray:
    in_a = np.ones(smp.samples, dtype=bool)
    for x in witness.E:
        in_a &= smp.u(0, x) <= tf
    in_b = np.ones(smp.samples, dtype=bool)
    for x in witness.image_lines(i):
        in_b &= smp.u(0, x) <= tf
    return in_a ^ in_b


def _mask_cond4(witness: StabilityWitness, smp: _Sampler, tf: float) -> np.ndarray:
    in_a = np.ones(smp.samples, dtype=bool)
    in_t0a = np.ones(smp.samples, dtype=bool)
    for x in witness.E:
        in_a &= smp.u(0, x) <= tf
        in_t0a &= smp.tzero_val(0, x, True, tf) <= tf
    return in_a ^ in_t0a


def _mask_cond2(witness: StabilityWitness, smp: _Sampler, tf: float) -> np.ndarray:
    """Invariance of rectangles clear of E, plus involution probes.

    Twenty seeded rectangles away from E must agree with their T0 pullback
    sample by sample, and applying the local map twice on a few lines of E
    must restore the identity coordinate exactly.
    """
    model = witness.model
    E = witness.E
    rng = np.random.Generator(np.random.Philox(key=_coord_key(smp.seed, ("struct", _STRUCT_TAG))))
    pool = [x for x in range(min(E) - 6, max(E) + 7) if x not in set(E)]
    svals = sorted({model.canon(0), model.canon(model.h), model.canon(model.h_inv), model.canon(2 * model.h)})
    grid = [(s, x) for x in pool for s in svals]
    ok = np.ones(smp.samples, dtype=bool)
    for _ in range(20):
        natoms = int(rng.integers(1, 4))
        idx = rng.choice(len(grid), size=natoms, replace=False)
        atoms = [(grid[int(j)], int(rng.integers(0, 2))) for j in idx]
        memb = np.ones(smp.samples, dtype=bool)
        memb_img = np.ones(smp.samples, dtype=bool)
        for (s, x), bucket in atoms:
            vals = smp.u(s, x)
            img = smp.tzero_val(s, x, x in set(E), tf)
            if bucket == 0:
                memb &= vals <= tf
                memb_img &= img <= tf
            else:
                memb &= vals > tf
                memb_img &= img > tf
        ok &= ~(memb ^ memb_img)
    probes = [E[0], E[len(E) // 2], E[-1]]
    h, hm = model.h, model.h_inv
    for x in probes:
        w0 = smp.tzero_val(0, x, True, tf)
        wh = smp.tzero_val(h, x, True, tf)
        wm = smp.tzero_val(hm, x, True, tf)
        in_z2 = (w0 <= tf) & (wh > tf)
        in_g2 = (wm <= tf) & (w0 > tf)
        back = np.where(in_z2, wh, np.where(in_g2, wm, w0))
        ok &= back == smp.u(0, x)
    return ok


def mc_estimate(
    model: WreathModel,
    witness: StabilityWitness,
    condition: int,
    samples: int,
    seed: int,
    f_index: int | None = None,
) -> McTally:
    """Estimate one of the four stability conditions by direct sampling.

    1: all equivariance events Y_f hold;  2: rectangles clear of E are
    invariant and the local map squares to the identity;  3: the sampled
    point separates A from alpha_f A (f_index, default the worst shift);
    4: it separates A from T0 A.
    """
    if samples < MIN_SAMPLES:
        raise ValueError(f"samples must be at least {MIN_SAMPLES}")
    if witness.model != model:
        raise ValueError("witness was built for a different model")
    tf = float(witness.t)
    smp = _Sampler(model, samples, seed)
    if condition == 1:
        mask = _mask_cond1(witness, smp, tf)
    elif condition == 2:
        mask = _mask_cond2(witness, smp, tf)
    elif condition == 3:
        if f_index is None:
            f_index = max(range(len(model.F)), key=witness.moved_out)
        mask = _mask_cond3(witness, smp, tf, f_index)
    elif condition == 4:
        mask = _mask_cond4(witness, smp, tf)
    else:
        raise ValueError(f"unknown condition {condition}")
    return McTally(
        condition=f"cond{condition}",
        samples=samples,
        successes=int(mask.sum()),
        seed=seed,
    )


def tallies_csv(tallies: Iterable[McTally]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["condition", "samples", "successes", "seed"])
    for t in tallies:
        writer.writerow([t.condition, t.samples, t.successes, t.seed])
    return buf.getvalue()


# -- the certificate -----------------------------------------------------


def _cmp(a: ExactScalar, b: ExactScalar) -> int:
    return a.compare(b, DEFAULT_MAX_SIGN_BITS)


def stability_report(
    model: WreathModel,
    samples: int = 100_000,
    seed: int = 1,
    size_cap: int = 100_000,
    E_override: Iterable | None = None,
) -> Certificate:
    """Full stability certificate: exact rectangle measures for the four
    conditions with Monte Carlo cross-checks at a 99% confidence radius."""
    witness = build_witness(model, size_cap=size_cap, E_override=E_override)
    t = witness.t
    one = ExactScalar.one()
    nf = len(model.F)
    target = ExactScalar.from_rational(Fraction(nf - 1, nf))
    cert = Certificate(
        theorem="wreath-js-stability",
        params={
            "f_size": nf,
            "h": model.h,
            "h_order": model.h_modulus,
            "E_size": len(witness.E),
            "E_min": min(witness.E),
            "E_max": max(witness.E),
            "epsilon": witness.epsilon,
            "epsilon_literal": witness.eps_literal,
            "folner_defect": witness.defect,
            "t": t.canonical_str(),
            "twisted_lines": sorted(model.forbidden_lines()),
            "literal_bound_holds": all(
                len(witness.delta_lines(i)) <= witness.eps_literal * len(witness.E)
                for i in range(nf)
            ),
        },
        items=[],
        engine={
            "mode": "exact+mc",
            "precision_bits": DEFAULT_MAX_SIGN_BITS,
            "seed": seed,
        },
    )

    gap = ExactScalar.pow2(-6 * witness.epsilon)
    cert.add("eps-admissible", gap, ">=", target, _cmp(gap, target) > 0,
             note="strict inequality certified")
    cert.add("folner-defect", witness.defect, "<=", witness.epsilon,
             witness.defect <= witness.epsilon)
    clear = not (set(witness.E) & model.forbidden_lines())
    cert.add("box-clear-of-twists", clear, "true", True, clear)

    nu_a = base_event(witness).measure(t)
    half = ExactScalar.from_rational(Fraction(1, 2))
    cert.add("nu-base", nu_a, "==", half, nu_a == half)

    eps_cap = one - ExactScalar.pow2(-witness.epsilon)
    worst = ExactScalar.zero()
    inv_f = ExactScalar.from_rational(Fraction(1, nf))
    for i in range(nf):
        moved = witness.moved_out(i)
        cert.add(
            f"moved-lines-f{i}",
            Fraction(moved),
            "<=",
            witness.epsilon * len(witness.E),
            Fraction(moved) <= witness.epsilon * len(witness.E),
        )
        val = nu_sym_diff_shift(witness, i)
        if _cmp(val, worst) > 0:
            worst = val
        cert.add(f"nu-shift-diff-f{i}", val, "<=", inv_f, _cmp(val, inv_f) <= 0,
                 note=f"exact, {moved} lines moved out")
    cert.add("nu-shift-diff-eps", worst, "<=", eps_cap, _cmp(worst, eps_cap) <= 0,
             note="worst shift against the epsilon cap")

    for i in range(nf):
        c_val = nu_good_set(witness, i)
        y_val = nu_equivariance(witness, i)
        cert.add(f"nu-good-set-f{i}", c_val, ">=", target, _cmp(c_val, target) >= 0,
                 note=f"{len(witness.delta_lines(i))} boundary lines")
        cert.add(f"nu-equivariance-f{i}", y_val, ">=", c_val, _cmp(y_val, c_val) >= 0,
                 note="contains the good set")

    probes = _roundtrip_events(witness)
    inv_ok = sum(
        1
        for ev in probes
        if pullback_tzero(pullback_tzero(ev, witness), witness).equivalent(ev, t)
    )
    cert.add("tzero-involution", f"{inv_ok}/{len(probes)}", "==",
             f"{len(probes)}/{len(probes)}", inv_ok == len(probes))
    mp_ok = sum(
        1 for ev in probes
        if pullback_tzero(ev, witness).measure(t) == ev.measure(t)
    )
    cert.add("tzero-preserves-measure", f"{mp_ok}/{len(probes)}", "==",
             f"{len(probes)}/{len(probes)}", mp_ok == len(probes))

    cond4 = nu_tzero_sym_diff(witness)
    cert.add("nu-tzero-diff", cond4, "==", half, cond4 == half)

    base = one - (t * (one - t)).scale(2)
    exact1 = base ** len(witness.active_lines())
    worst_idx = max(range(nf), key=witness.moved_out)
    references = {
        1: float(exact1),
        2: 1.0,
        3: float(nu_sym_diff_shift(witness, worst_idx)),
        4: float(cond4),
    }
    for cond in (1, 2, 3, 4):
        tally = mc_estimate(model, witness, cond, samples, seed)
        ref = references[cond]
        if cond == 2:
            passed = tally.successes == samples
            cert.add("mc-cond2", f"{tally.successes}/{samples}", "==",
                     f"{samples}/{samples}", passed,
                     note="pointwise invariance and involution probes")
        else:
            passed = tally.covers(ref)
            cert.add(
                f"mc-cond{cond}",
                f"{tally.estimate:.6f}",
                "in",
                f"{ref:.6f} +/- {tally.half_width:.6f}",
                passed,
                note=f"n={samples}, 99% confidence radius",
            )
    return cert


def _roundtrip_events(witness: StabilityWitness) -> list:
    """Small events, on and off E, probing the involution and measure
    preservation of the pullback."""
    model = witness.model
    E = witness.E
    mid = E[len(E) // 2]
    out_line = min(E) - 3
    h = model.h
    events = [
        _cyl([E[0]]),
        _cyl([E[0], E[-1]]),
        RectangleEvent.conjunction([((0, mid), 1)]),
        RectangleEvent.conjunction([((h, E[0]), 0), ((0, out_line), 1)]),
        RectangleEvent.conjunction([((model.canon(2 * h), mid), 1), ((0, mid), 0)]),
        RectangleEvent.conjunction([((0, out_line), 0)]),
        _cyl([E[0]]).union(RectangleEvent.conjunction([((h, mid), 1)])),
    ]
    return events

"""End-to-end certificates for the central-sequence constructions.

Three drivers share one Certificate format.  The alternating-group driver
checks the full inequality chain from the threshold gap through the final
noncommutation and centrality defects, exactly in enumerated mode or with
certified trace enclosures in bounded mode.  The shift driver picks its own
threshold, searches an invariant window, and certifies the commutator norm
and per-shift centrality defects of the independent projection model.  The
marker driver verifies the free-product commutation relations in a finite
truncation of an infinite direct sum.

All decisions route through ExactScalar comparisons; fractional exponents
are eliminated by cross-exponentiation, X^(a/b) vs c becoming X^a vs c^b.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Mapping

from gmpy2 import mpfr, mpz

import gmpy2

from .exact import DEFAULT_MAX_SIGN_BITS, ExactScalar, parse_scalar
from .certificate import Certificate, CertItem
from .groups import (
    ActionSpec,
    DirectProduct,
    FreeGroup,
    GroupRingElement,
    SearchExhausted,
    folner_search,
)
from .repalg import alternating_wedderburn
from .blockop import PqvData, build_pqv_alternating, build_pqv_independent, pqv_trace_bounds
from .tensortrace import centrality_bound, centrality_defect, noncommutation_defect
from .cantor import TowerData

__all__ = [
    "Certificate",
    "CertItem",
    "McDuffParams",
    "choose_delta",
    "check_size_conditions",
    "mcduff_certificate",
    "shift_certificate",
    "free_example_check",
    "recheck_items_float",
]

UNIT_FRACTION_CAP = 10**6


def _exact_engine() -> dict:
    return {"mode": "exact", "precision_bits": DEFAULT_MAX_SIGN_BITS, "seed": 0}


# -- threshold selection -------------------------------------------------


def _largest_unit_fraction(c: int, d: int) -> Fraction:
    """Largest delta = 1/b with 4^(delta/(1-delta)) <= d/c, i.e. the
    smallest b >= 2 with 4 c^(b-1) <= d^(b-1), by binary search on the
    monotone integer predicate."""
    if c <= 0:
        return Fraction(1, 2)
    if c >= d:
        raise ValueError("threshold ratio must be below 1")

    def ok(b: int) -> bool:
        k = b - 1
        return mpz(d) ** k >= 4 * mpz(c) ** k

    if not ok(UNIT_FRACTION_CAP):
        raise SearchExhausted(
            f"no unit fraction with denominator <= {UNIT_FRACTION_CAP} fits"
        )
    lo, hi = 2, UNIT_FRACTION_CAP
    while lo < hi:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid + 1
    return Fraction(1, lo)


def choose_delta(eps) -> Fraction:
    """Largest unit fraction delta with 4^(-delta/(1-delta)) >= 1 - eps/32."""
    eps = Fraction(eps)
    if not 0 < eps < 32:
        raise ValueError("eps must lie in (0, 32)")
    ratio = 1 - eps / 32
    return _largest_unit_fraction(ratio.numerator, ratio.denominator)


def _gap_value(delta: Fraction) -> ExactScalar:
    # 4^(-delta/(1-delta)), exact as a dyadic power
    return ExactScalar.pow2(-2 * delta / (1 - delta))


def _dyadic_floor(x: ExactScalar, bits: int = 256) -> ExactScalar:
    lo, _ = x.interval(bits)
    return ExactScalar.from_rational(gmpy2.mpq(lo))


def _dyadic_ceil(x: ExactScalar, bits: int = 256) -> ExactScalar:
    _, hi = x.interval(bits)
    return ExactScalar.from_rational(gmpy2.mpq(hi))


# -- fractional-power comparisons ----------------------------------------


def _pow_frac_compare(base: ExactScalar, exponent: Fraction, bound: ExactScalar) -> int:
    """Sign of base^exponent - bound for base >= 0 and positive exponent."""
    if exponent <= 0:
        raise ValueError("exponent must be positive")
    bsign = bound.sign(DEFAULT_MAX_SIGN_BITS)
    if bsign < 0:
        return 1
    if bsign == 0:
        return base.sign(DEFAULT_MAX_SIGN_BITS)
    a, b = exponent.numerator, exponent.denominator
    return (base**a).compare(bound**b, DEFAULT_MAX_SIGN_BITS)


def _approx_pow(base: ExactScalar, exponent: Fraction, digits: int = 12) -> str:
    with gmpy2.context(precision=96):
        x = mpfr(base.approx(96)) ** (mpfr(exponent.numerator) / exponent.denominator)
    return f"{float(x):.{digits}f}"


def _display(x: ExactScalar) -> str:
    """Canonical form when compact, a 15-digit decimal otherwise; the
    comparisons always run on the exact value."""
    text = x.canonical_str()
    return text if len(text) <= 96 else x.to_decimal(15)


# -- size conditions -----------------------------------------------------


def check_size_conditions(T_size: int, delta, eps) -> list[CertItem]:
    """The two power-limit approximations at r = T_size and the ceiling
    loss, each decided exactly."""
    delta, eps = Fraction(delta), Fraction(eps)
    if T_size < 1:
        raise ValueError("T_size must be positive")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0,1)")
    if eps <= 0:
        raise ValueError("eps must be positive")
    r = T_size
    tol = eps / 32
    base = ExactScalar.pow2(Fraction(-1, r)).scale(2) - ExactScalar.one()
    items = []

    for label, theta in (("one", Fraction(1)), ("ratio", delta / (1 - delta))):
        target = ExactScalar.pow2(-2 * theta)
        exponent = theta * r
        above = _pow_frac_compare(base, exponent, target - ExactScalar.from_rational(tol))
        below = _pow_frac_compare(base, exponent, target + ExactScalar.from_rational(tol))
        items.append(
            CertItem.check(
                f"theta-limit-{label}",
                _approx_pow(base, exponent),
                "in",
                f"{_approx_pow(ExactScalar.pow2(Fraction(-2)), theta)} +/- {tol}",
                above >= 0 and below <= 0,
                note=f"r={r}, exponent {exponent}; display approximate, comparison exact",
            )
        )

    m = (1 - delta) * T_size
    s = math.ceil(m)
    lhs = ExactScalar.pow2(Fraction(-s) / m)
    floor_bound = Fraction(1, 2) - eps / 8
    items.append(
        CertItem.check(
            "ceiling-loss",
            lhs,
            ">=",
            floor_bound,
            lhs.compare(ExactScalar.from_rational(floor_bound), DEFAULT_MAX_SIGN_BITS) >= 0,
            note=f"ceil((1-delta)|T|) = {s}",
        )
    )
    return items


# -- the alternating-group driver ----------------------------------------


@dataclass(frozen=True)
class McDuffParams:
    """Parameters for one certified instance over Alt(D).

    Displacement data comes either from a verified tower (sigma maps on
    the core) or as an abstract profile mapping labels to |sigma_h S \\ S|.
    """

    eps: Fraction
    delta: Fraction
    T_size: int
    D_size: int
    mode: str = "enumerated"
    tower: TowerData | None = None
    displacements: Mapping[Any, int] | None = None

    def __post_init__(self):
        object.__setattr__(self, "eps", Fraction(self.eps))
        object.__setattr__(self, "delta", Fraction(self.delta))
        if not 0 < self.eps < 32:
            raise ValueError("eps must lie in (0, 32)")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.T_size < 1:
            raise ValueError("T_size must be positive")
        if self.D_size < 5:
            raise ValueError("alternating blocks need degree at least 5")
        if self.mode not in ("enumerated", "bounded"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if (self.tower is None) == (self.displacements is None):
            raise ValueError("provide exactly one of tower or displacements")
        if self.displacements is not None:
            for label, moved in self.displacements.items():
                if not isinstance(moved, int) or moved < 0:
                    raise ValueError(f"bad displacement for {label!r}: {moved!r}")

    @property
    def s_size(self) -> int:
        return math.ceil((1 - self.delta) * self.T_size)

    def resolved_displacements(self) -> dict:
        if self.displacements is not None:
            return dict(self.displacements)
        tower = self.tower
        if len(tower.T) != self.T_size:
            raise ValueError(
                f"tower has |T| = {len(tower.T)}, params say {self.T_size}"
            )
        core = sorted(tower.core)
        if self.s_size > len(core):
            raise ValueError(
                f"requested |S| = {self.s_size} exceeds the tower core ({len(core)})"
            )
        S = set(core[: self.s_size])
        out = {}
        for h_idx in sorted(tower.sigma):
            mapping = tower.sigma[h_idx]
            out[f"h{h_idx}"] = sum(1 for x in S if mapping[x] not in S)
        return out


def mcduff_certificate(params: McDuffParams) -> Certificate:
    """The full inequality chain for one Alt(D) instance.

    Failed inequalities come back as failing items; only structurally
    inconsistent parameters raise.
    """
    eps, delta = params.eps, params.delta
    s = params.s_size
    displacements = params.resolved_displacements()
    cert = Certificate(
        theorem="alternating-mcduff",
        params={
            "eps": eps,
            "delta": delta,
            "T_size": params.T_size,
            "D_size": params.D_size,
            "mode": params.mode,
            "s_size": s,
            "displacements": {str(k): v for k, v in sorted(displacements.items(), key=lambda kv: str(kv[0]))},
            "displacement_source": "tower" if params.tower is not None else "abstract",
        },
        items=[],
        engine=_exact_engine() | {"mode": params.mode},
    )

    gap = _gap_value(delta)
    gap_bound = 1 - eps / 32
    cert.add(
        "delta-gap",
        gap,
        ">=",
        gap_bound,
        gap.compare(ExactScalar.from_rational(gap_bound), DEFAULT_MAX_SIGN_BITS) >= 0,
    )
    cert.items.extend(check_size_conditions(params.T_size, delta, eps))

    if params.mode == "enumerated":
        W = alternating_wedderburn(params.D_size, mode="enumerated")
        pqv = build_pqv_alternating(W, delta, params.T_size)
        tau_p_lo = tau_p_hi = pqv.tau_p
        tau_pq_lo = tau_pq_hi = pqv.tau_pq
        identities_ok = (
            pqv.v.adjoint() * pqv.v == pqv.p and pqv.v * pqv.v.adjoint() == pqv.q
        )
        cert.add("pqv-identities", identities_ok, "true", True, identities_ok,
                 note="idempotence, adjoints, v*v = p, vv* = q checked exactly")
        trace_note = "exact enumerated traces"
    else:
        # the raw enclosures drag a 1 - 2/|D|! factor through every power;
        # round them outward to dyadic rationals so the powers stay small
        tb = pqv_trace_bounds(params.D_size, delta, params.T_size)
        tau_p_lo, tau_p_hi = _dyadic_floor(tb.tau_p_lower), _dyadic_ceil(tb.tau_p_upper)
        tau_pq_lo, tau_pq_hi = _dyadic_floor(tb.tau_pq_lower), _dyadic_ceil(tb.tau_pq_upper)
        trace_note = "trace enclosures rounded outward at 256 bits"

    one_bound = Fraction(1, 2) - eps / 4
    val = tau_p_lo**s
    cert.add(
        "tau-p-floor",
        _display(val),
        ">=",
        one_bound,
        val.compare(ExactScalar.from_rational(one_bound), DEFAULT_MAX_SIGN_BITS) >= 0,
        note=f"tau(p)^{s}; {trace_note}",
    )

    two_bound = 1 - eps / 8
    two_exp = delta * params.T_size
    cert.add(
        "tau-pq-floor",
        _approx_pow(tau_pq_lo, two_exp),
        ">=",
        two_bound,
        _pow_frac_compare(
            tau_pq_lo, two_exp, ExactScalar.from_rational(two_bound)
        ) >= 0,
        note=f"tau(pq)^({two_exp}); display approximate, comparison exact",
    )

    three_bound = Fraction(1, 4) + eps / 4
    three_exp = (1 - delta) * params.T_size
    cert.add(
        "tau-pq-ceiling",
        _approx_pow(tau_pq_hi, three_exp),
        "<=",
        three_bound,
        _pow_frac_compare(
            tau_pq_hi, three_exp, ExactScalar.from_rational(three_bound)
        ) <= 0,
        note=f"tau(pq)^({three_exp}); display approximate, comparison exact",
    )

    nc_bound = Fraction(1, 2) - eps
    if params.mode == "enumerated":
        nc_val = noncommutation_defect(tau_p_lo, tau_pq_hi, s)
        nc_note = "exact commutator norm over |S| coordinates"
    else:
        nc_val = (tau_p_lo**s - tau_pq_hi**s).scale(2)
        nc_note = "lower bound from the trace enclosures"
    cert.add(
        "noncommutation",
        _display(nc_val),
        ">=",
        nc_bound,
        nc_val.compare(ExactScalar.from_rational(nc_bound), DEFAULT_MAX_SIGN_BITS) >= 0,
        note=nc_note,
    )

    cap = delta * params.T_size
    max_moved = max(displacements.values(), default=0)
    cert.add("displacement-cap", Fraction(max_moved), "<=", cap, max_moved <= cap)

    eps_scalar = ExactScalar.from_rational(eps)
    for label in sorted(displacements, key=str):
        moved = displacements[label]
        if params.mode == "enumerated":
            c_val = centrality_defect(tau_p_lo, tau_pq_lo, s, moved)
            c_note = f"exact, moved = {moved}"
        else:
            c_val = centrality_bound(tau_pq_lo, moved)
            c_note = f"coarse bound 8(1 - tau(pq)^{moved}) from the lower enclosure"
        cert.add(
            f"centrality-{label}",
            _display(c_val),
            "<=",
            eps,
            c_val.compare(eps_scalar, DEFAULT_MAX_SIGN_BITS) <= 0,
            note=c_note,
        )
    return cert


# -- the shift driver ----------------------------------------------------


def shift_certificate(
    action: ActionSpec,
    supports_Y: Iterable,
    F: Iterable,
    eps,
    size_cap: int = 10**6,
) -> Certificate:
    """Certify the independent-model commutator and centrality defects for
    a window invariant under F and clear of the given supports."""
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    F = list(F)
    identity = action.group.identity()
    if identity not in F:
        raise ValueError("F must contain the identity")
    Y = sorted(set(supports_Y))

    ratio = 1 - eps / 8
    delta = _largest_unit_fraction(ratio.numerator, ratio.denominator)
    fol = folner_search(action, F, delta, size_cap, disjoint_from=Y)
    T = fol.T
    S = tuple(sorted(fol.core))
    m = len(S)
    if m == 0:
        raise SearchExhausted("the invariant window has an empty core")

    pqv = build_pqv_independent(m)
    tau_p, tau_pq = pqv.tau_p, pqv.tau_pq
    cert = Certificate(
        theorem="shift-crossed-product",
        params={
            "eps": eps,
            "delta": delta,
            "T_size": len(T),
            "S_size": m,
            "F_size": len(F),
            "Y_size": len(Y),
        },
        items=[],
        engine=_exact_engine(),
    )

    one = ExactScalar.one()
    gap = one - _gap_value(delta)
    cert.add(
        "delta-choice",
        gap,
        "<=",
        eps / 8,
        gap.compare(ExactScalar.from_rational(eps / 8), DEFAULT_MAX_SIGN_BITS) <= 0,
        note="1 - 2^(-2 delta/(1-delta)) against eps/8",
    )
    cert.add("folner-defect", fol.defect, "<=", delta, fol.defect <= delta)
    clear = not (set(T) & set(Y))
    cert.add("window-clear", clear, "true", True, clear)
    cert.add(
        "core-fraction",
        Fraction(m),
        ">=",
        (1 - delta) * len(T),
        Fraction(m) >= (1 - delta) * len(T),
    )

    comm = noncommutation_defect(tau_p, tau_pq, m)
    half = ExactScalar.from_rational(Fraction(1, 2))
    cert.add("commutator-norm", comm, "==", half, comm == half,
             note=f"2(tau(p)^{m} - tau(pq)^{m}) with independent projections")

    envelope = (one - ExactScalar.pow2(-2 * delta * len(T) / Fraction(m))).scale(8)
    S_set = set(S)
    act = action.act
    for i, g in enumerate(F):
        moved = sum(1 for x in S if act(g, x) not in S_set)
        defect = centrality_defect(tau_p, tau_pq, m, moved)
        cert.add(
            f"centrality-f{i}",
            defect,
            "<=",
            envelope,
            defect.compare(envelope, DEFAULT_MAX_SIGN_BITS) <= 0,
            note=f"g={g!r}, {moved} of {m} core points moved out",
        )
    cert.add(
        "centrality-envelope",
        envelope,
        "<=",
        eps,
        envelope.compare(ExactScalar.from_rational(eps), DEFAULT_MAX_SIGN_BITS) <= 0,
        note="8(1 - 2^(-2 delta |T| / |S|))",
    )
    return cert


# -- the free marker driver ----------------------------------------------


def _embed(coords: list, base, twist: Mapping) -> tuple:
    entry = [tuple(base)]
    for c in coords:
        entry.append(tuple(twist.get(c, ())))
    return tuple(entry)


def free_example_check(n: int, Omega1_supports: Iterable, F: Iterable) -> Certificate:
    """Markers at a fresh coordinate commute with everything previously
    used and keep a commutator of squared norm exactly 2 between their two
    letters.

    Elements of the product group are (s, (t_k)) with s and every t_k
    reduced words in two letters; the action on pairs (r, k) sends r to
    s r t_k^(-1).  The infinite sum is truncated to the coordinates that
    the supports, F, and n touch.
    """
    if n < 0:
        raise ValueError("coordinate index must be nonnegative")
    supports = [(tuple(r), int(k)) for r, k in Omega1_supports]
    family = [(tuple(s), dict(t)) for s, t in F]
    K1 = {k for _, k in supports}
    K2 = {k for _, twist in family for k in twist}
    K = K1 | K2
    if n in K:
        raise ValueError(f"coordinate {n} is already used by the supports or F")

    coords = sorted(K | {n})
    f2 = FreeGroup(2)
    group = DirectProduct([f2] + [f2] * len(coords))
    markers = {
        "a": _embed(coords, (), {n: f2.generator(1)}),
        "b": _embed(coords, (), {n: f2.generator(2)}),
    }
    family_elems = [_embed(coords, s, twist) for s, twist in family]

    cert = Certificate(
        theorem="free-group-markers",
        params={
            "n": n,
            "support_coords": sorted(K1),
            "twist_coords": sorted(K2),
            "truncated_coords": coords,
            "F_size": len(family),
        },
        items=[],
        engine=_exact_engine(),
    )

    for i, g in enumerate(family_elems):
        ginv = group.inverse(g)
        fixed = all(
            group.multiply(group.multiply(g, mk), ginv) == mk
            for mk in markers.values()
        )
        cert.add(f"conjugation-f{i}", fixed, "true", True, fixed,
                 note="both markers fixed under conjugation")

    def act_on(elem, point):
        r, k = point
        word = elem[1 + coords.index(k)] if k in coords else ()
        return (f2.multiply(f2.multiply(elem[0], r), f2.inverse(word)), k)

    fixed_pts = sum(
        1
        for pt in supports
        for mk in markers.values()
        if act_on(mk, pt) == pt
    )
    total_pts = 2 * len(supports)
    cert.add(
        "markers-fix-supports",
        f"{fixed_pts}/{total_pts}",
        "==",
        f"{total_pts}/{total_pts}",
        fixed_pts == total_pts,
    )

    probes = [_embed(coords, f2.generator(1), {})]
    probes += [_embed(coords, (), {c: f2.generator(1)}) for c in sorted(K)]
    commuting = sum(
        1
        for p in probes
        for mk in markers.values()
        if group.multiply(mk, p) == group.multiply(p, mk)
    )
    total_probes = 2 * len(probes)
    cert.add(
        "commutes-off-coordinate",
        f"{commuting}/{total_probes}",
        "==",
        f"{total_probes}/{total_probes}",
        commuting == total_probes,
        note="base letter and one twist per used coordinate",
    )

    u_a = GroupRingElement(group, {markers["a"]: 1})
    u_b = GroupRingElement(group, {markers["b"]: 1})
    comm = u_a * u_b - u_b * u_a
    norm2 = comm.two_norm_squared()
    two = ExactScalar.from_rational(2)
    cert.add("commutator-norm", norm2, "==", two, norm2 == two)

    self_comm = (u_a * u_a - u_a * u_a).two_norm_squared()
    cert.add("self-commutator", self_comm, "==", ExactScalar.zero(),
             self_comm.is_zero())
    return cert


# -- floating sanity recheck ---------------------------------------------


def recheck_items_float(cert: Certificate, bits: int = 256) -> tuple[int, list]:
    """Re-evaluate every passing numeric item at the given float precision.

    The exact path is authoritative; this is an independent sanity pass.
    Returns the number of items checked and the names that failed.
    """
    # values shown as truncated decimals are only good to ~15 digits
    tol = max(mpfr(2) ** (-(bits // 2)), mpfr(10) ** -12)
    checked, failures = 0, []
    for item in cert.items:
        if not item.passed or item.relation in ("true", "in"):
            continue
        value = _to_mpfr(item.value, bits)
        bound = _to_mpfr(item.bound, bits)
        if value is None or bound is None:
            continue
        checked += 1
        with gmpy2.context(precision=bits):
            diff = value - bound
        ok = {
            "<=": diff <= tol,
            ">=": diff >= -tol,
            "==": abs(diff) <= tol,
            "!=": abs(diff) > tol,
        }[item.relation]
        if not ok:
            failures.append(item.name)
    return checked, failures


def _to_mpfr(text: str, bits: int):
    try:
        q = Fraction(text)
        with gmpy2.context(precision=bits):
            return mpfr(q.numerator) / q.denominator
    except (ValueError, ZeroDivisionError):
        pass
    try:
        return parse_scalar(text).approx(bits)
    except Exception:
        return None

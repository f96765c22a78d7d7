"""Certification harness for the dilation families of scheduled products.

A dilation rule turns the radius ladder into integer dilation factors.  The
three stock rules:

* ratio-plus:  j_k = floor(a_k / r + 1), which parks j_k * r just above
  a_k, so the k-th ring of zeros collapses onto the circle of radius r;
* geometric-mean:  j_k = floor(L * sqrt(a_k * a_{k+1})), which leaves every
  ring ratio divergent, so nothing clusters anywhere away from the origin;
* sector:  j_k = floor(a^(k)_t / r + 1) against the sector layout, pinning
  sector t's rings onto radius r.

All dilation factors are exact big integers obtained by certified interval
floors.  Clustering certificates measure the exact distance from a target
point to the nearest scheduled zero of the dilated function; for ratio-plus
and sector rules the distance also has the exact rational majorant r/j_k.
Classification and certificates feed an order report that attaches the
symbolic rank profile of the claimed set of convergence failures;
those rank facts come straight from the tree descriptors and are
independent of every floating-point computation here.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from mpmath import iv, mp

from .evaluator import LogPolar, default_precision, spherical_derivative
from .ordinal import Ordinal, as_ordinal, predecessor
from .pointset import RankProfile, rank_profile
from .schedule import RadiiSequence, ZeroSchedule, triangular

__all__ = [
    "DilationRule",
    "Classification",
    "Certificate",
    "SweepRow",
    "ProbeReport",
    "dilation_factor",
    "dilation_factors",
    "classify",
    "non_c0_certificate",
    "condition_m_sweep",
    "sweep_passes",
    "order_report",
    "report_to_json",
    "InconclusiveProbe",
]

_GUARD = 30


class InconclusiveProbe(RuntimeError):
    """A probe whose certificates failed; reports carry the details."""


@dataclass(frozen=True)
class DilationRule:
    """Recipe for the integer dilation factors j_k.

    kind is one of ratio_plus, geometric_mean, sector, explicit.  Explicit
    rules carry either literal integers or exact log-domain values (used
    for degenerate calibration cases where j_k should sit exactly on a
    radius, which no integer can do).
    """

    kind: str
    r: Optional[Fraction] = None
    L: Optional[Fraction] = None
    t: Optional[int] = None
    values: Optional[Tuple[int, ...]] = None
    exact_logs: Optional[Tuple[Fraction, ...]] = None

    @staticmethod
    def ratio_plus(r: Fraction) -> "DilationRule":
        r = Fraction(r)
        if not 0 < r < 1:
            raise ValueError("ratio-plus needs 0 < r < 1")
        return DilationRule("ratio_plus", r=r)

    @staticmethod
    def geometric_mean(L: Fraction) -> "DilationRule":
        L = Fraction(L)
        if L <= 0:
            raise ValueError("geometric-mean needs L > 0")
        return DilationRule("geometric_mean", L=L)

    @staticmethod
    def sector(r: Fraction, t: int) -> "DilationRule":
        r = Fraction(r)
        if not 0 < r < 1:
            raise ValueError("sector rule needs 0 < r < 1")
        if t < 1:
            raise ValueError("sector index must be >= 1")
        return DilationRule("sector", r=r, t=t)

    @staticmethod
    def explicit(values: Sequence[int] = (), exact_logs: Sequence[Fraction] = (),
                 r: Optional[Fraction] = None) -> "DilationRule":
        if bool(values) == bool(exact_logs):
            raise ValueError("explicit rules take integers or exact logs, not both")
        return DilationRule(
            "explicit",
            r=Fraction(r) if r is not None else None,
            values=tuple(int(v) for v in values) or None,
            exact_logs=tuple(Fraction(x) for x in exact_logs) or None,
        )

    def radius_index(self, k: int) -> int:
        """Global ring index whose radius drives j_k."""
        if self.kind == "sector":
            assert self.t is not None
            if k < self.t:
                raise ValueError(f"sector rule needs k >= t = {self.t}")
            return triangular(k - 1) + self.t
        return k

    def describe(self) -> str:
        if self.kind == "ratio_plus":
            return f"ratio-plus:r={self.r}"
        if self.kind == "geometric_mean":
            return f"geometric-mean:L={self.L}"
        if self.kind == "sector":
            return f"sector:r={self.r},t={self.t}"
        return "explicit"


def _iv_fraction(f: Fraction):
    return iv.mpf(f.numerator) / iv.mpf(f.denominator)


def _certified_floor(expr, start_prec: int) -> int:
    """floor of expr() evaluated in interval arithmetic, escalating the
    precision until both endpoints agree.

    The endpoint floors must also be taken at the escalated precision: at
    the ambient default they would be rounded to 53 bits, which silently
    corrupts values past 2^53.
    """
    prec = start_prec
    old = iv.prec
    try:
        for _ in range(8):
            iv.prec = prec
            x = expr()
            with mp.workprec(prec + 20):
                lo, hi = int(mp.floor(x.a)), int(mp.floor(x.b))
            if lo == hi:
                return lo
            prec *= 2
        raise ArithmeticError(f"floor undecidable below {prec} bits")
    finally:
        iv.prec = old


def _magnitude_bits(log_value: Fraction) -> int:
    """Bits needed for the integer part of e^log_value, with headroom."""
    return max(0, int(log_value * 1.4427)) + 80


def dilation_factor(rule: DilationRule, radii: RadiiSequence, k: int) -> int:
    """Exact j_k for the rule (arbitrary-precision integer)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if rule.kind == "explicit":
        if rule.values is None:
            raise ValueError(
                "exact-log explicit rules describe non-integer dilation sizes; "
                "they support classification only"
            )
        return rule.values[k - 1]
    if rule.kind == "geometric_mean":
        assert rule.L is not None
        half = (radii.log_radius(k) + radii.log_radius(k + 1)) / 2
        prec = max(default_precision() + _GUARD, _magnitude_bits(half))
        return _certified_floor(
            lambda: _iv_fraction(rule.L) * iv.exp(_iv_fraction(half)), prec
        )
    # ratio_plus and sector share the floor(a / r + 1) shape
    assert rule.r is not None
    idx = rule.radius_index(k)
    lr = radii.log_radius(idx)
    prec = max(default_precision() + _GUARD, _magnitude_bits(lr))
    return _certified_floor(
        lambda: iv.exp(_iv_fraction(lr)) / _iv_fraction(rule.r) + 1,
        prec,
    )


def dilation_factors(rule: DilationRule, radii: RadiiSequence,
                     k_range: Sequence[int]) -> List[Tuple[int, int]]:
    out = []
    prev = None
    for k in k_range:
        j = dilation_factor(rule, radii, k)
        if prev is not None and j <= prev:
            raise ValueError(f"dilation factors not strictly increasing at k={k}")
        out.append((k, j))
        prev = j
    return out


# -- dichotomy classification ---------------------------------------------------


@dataclass(frozen=True)
class Classification:
    branch: str  # "toward-lower" | "toward-upper" | "neither"
    trail: Tuple[Tuple[int, float, float], ...]  # (k, lower gap, upper gap)


def classify(
    rule: DilationRule,
    radii: RadiiSequence,
    k_range: Sequence[int],
    eta0: Optional[Fraction] = None,
) -> Classification:
    """Which side of the radius ladder j_k * eta0 collapses onto.

    The lower gap is log(j_k * eta0) - log a_n with n the largest index
    whose radius does not exceed j_k * eta0; the upper gap is the distance
    to the next radius.  One gap shrinking to zero monotonically marks the
    branch; anything else is neither (both gaps diverge for the
    geometric-mean rule).
    """
    if eta0 is None:
        eta0 = rule.r if rule.r is not None else Fraction(1, 2)
    eta0 = Fraction(eta0)
    if eta0 <= 0:
        raise ValueError("eta0 must be positive")
    exact = rule.exact_logs is not None and eta0 == 1
    xs: List = []
    if exact:
        # degenerate calibration path: the dilated modulus is known in
        # closed log form, so the gaps are exact rationals
        xs = [rule.exact_logs[k - 1] for k in k_range]
    elif rule.exact_logs is not None:
        with mp.workprec(default_precision() + _GUARD):
            log_eta = mp.log(mp.mpf(eta0.numerator)) - mp.log(mp.mpf(eta0.denominator))
            for k in k_range:
                f = rule.exact_logs[k - 1]
                xs.append(mp.mpf(f.numerator) / f.denominator + log_eta)
    else:
        # the lower gap shrinks like 1/j, so resolving it takes precision
        # past the bit length of j itself
        for k, j in dilation_factors(rule, radii, k_range):
            with mp.workprec(max(default_precision(), j.bit_length() + 120)):
                log_eta = mp.log(mp.mpf(eta0.numerator)) - mp.log(
                    mp.mpf(eta0.denominator)
                )
                xs.append(mp.log(mp.mpf(j)) + log_eta)
    trail = []
    lows, highs = [], []
    for k, x in zip(k_range, xs):
        n = 1
        while _bracket_le(radii.log_radius(n + 1), x, exact):
            n += 1
        if exact:
            gl = x - radii.log_radius(n)
            gu = radii.log_radius(n + 1) - x
        else:
            with mp.workprec(mp.prec + 2 * _magnitude_bits(radii.log_radius(n + 1))):
                gl = x - _log_radius_mpf(radii, n)
                gu = _log_radius_mpf(radii, n + 1) - x
        lows.append(gl)
        highs.append(gu)
        trail.append((k, float(gl), float(gu)))
    branch = "neither"
    if _shrinks(lows):
        branch = "toward-lower"
    elif _shrinks(highs):
        branch = "toward-upper"
    return Classification(branch, tuple(trail))


def _log_radius_mpf(radii: RadiiSequence, n: int):
    f = radii.log_radius(n)
    return mp.mpf(f.numerator) / f.denominator


def _bracket_le(log_radius: Fraction, x, exact: bool) -> bool:
    if exact:
        return log_radius <= x
    return mp.mpf(log_radius.numerator) / log_radius.denominator <= x


def _shrinks(gaps: List) -> bool:
    if any(g < 0 for g in gaps):
        return False
    nonincreasing = all(b <= a for a, b in zip(gaps, gaps[1:]))
    return nonincreasing and (gaps[-1] == 0 or gaps[-1] < gaps[0])


# -- clustering certificates ----------------------------------------------------


@dataclass(frozen=True)
class CertificateEntry:
    k: int
    j: int
    dist_low: object  # mpf endpoints of the certified distance interval;
    dist_high: object  # floats would underflow far before e^-2584
    rational_bound: Optional[Fraction]  # r/j_k when the rule guarantees it


@dataclass(frozen=True)
class Certificate:
    target_turn: Optional[Fraction]  # None marks the origin
    entries: Tuple[CertificateEntry, ...]
    passed: bool
    reason: str


def _zero_distance(schedule: ZeroSchedule, j: int, point) -> Tuple[object, object]:
    """Certified interval of min |b/j - point| over all scheduled zeros b."""
    best = None
    for z in schedule.zeros:
        b = iv.exp(_iv_fraction(z.log_r)) * _cis(z.turn)
        d = _cnorm(b / iv.mpf(j) - point)
        if best is None or d.b < best.b:
            best = d
    assert best is not None
    return best.a, best.b


def _cis(turn: Fraction):
    two_pi = 2 * iv.pi
    ang = two_pi * _iv_fraction(turn)
    return iv.mpc(iv.cos(ang), iv.sin(ang))


def _cnorm(c):
    return iv.sqrt(c.real**2 + c.imag**2)


def non_c0_certificate(
    schedule: ZeroSchedule,
    rule: DilationRule,
    target_turn: Optional[Fraction],
    delta: Fraction,
    k_range: Sequence[int],
    strict: bool = True,
) -> Certificate:
    """Zero-clustering certificate at the point r * e^(2 pi i target).

    Passes when the certified distance from the target to the nearest
    dilated zero decreases strictly across k_range and finishes below
    r * delta.  target_turn None certifies clustering at the origin, where
    the distance is simply the smallest dilated zero modulus.  With strict
    set, a target outside the source enumeration is rejected; otherwise it
    produces a (failing) certificate, which is how off-set immunity is
    demonstrated.
    """
    delta = Fraction(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")
    r = rule.r if rule.r is not None else Fraction(1, 2)
    sector = rule.t if rule.kind == "sector" else 0
    known = set()
    for angs in schedule.angles.values():
        known.update(angs)
    if target_turn is not None:
        target_turn = Fraction(target_turn) % 1
        if strict and target_turn not in known:
            raise ValueError(
                f"target turn {target_turn} is not an enumerated source angle"
            )
    old = iv.prec
    try:
        entries: List[CertificateEntry] = []
        for k, j in dilation_factors(rule, schedule.radii, k_range):
            # distances shrink like 1/j, so the interval resolution must
            # scale with the bit length of j
            iv.prec = max(default_precision() + _GUARD, j.bit_length() + 160)
            if target_turn is None:
                lo_lr = min(z.log_r for z in schedule.zeros)
                d = iv.exp(_iv_fraction(lo_lr)) / iv.mpf(j)
                dl, dh = mp.mpf(d.a), mp.mpf(d.b)
                bound = None
            else:
                point = _iv_fraction(r) * _cis(target_turn)
                dl, dh = _zero_distance(schedule, j, point)
                dl, dh = mp.mpf(dl), mp.mpf(dh)
                bound = None
                if rule.kind in ("ratio_plus", "sector"):
                    ring = rule.radius_index(k)
                    ring_angles = {z.turn for z in schedule.zeros_in_ring(ring)}
                    if target_turn in ring_angles:
                        bound = Fraction(r, j)
            entries.append(CertificateEntry(k, j, dl, dh, bound))
        decreasing = all(
            b.dist_high < a.dist_low for a, b in zip(entries, entries[1:])
        )
        threshold = r * delta
        final_ok = bool(entries) and bool(
            entries[-1].dist_high * threshold.denominator < threshold.numerator
        )
        passed = bool(entries) and decreasing and final_ok
        if passed:
            reason = "distances decrease strictly and finish below r*delta"
        elif not decreasing:
            reason = "distances do not decrease monotonically"
        else:
            reason = "final distance not below r*delta"
        return Certificate(target_turn, tuple(entries), passed, reason)
    finally:
        iv.prec = old


# -- condition (M) sweep ---------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    n: int
    point_index: int
    max_spherical: object
    valid: bool


def _mesh(center, radius, schedule: ZeroSchedule, j: int):
    """Deterministic disk mesh: the center, three rings of 8k points, and
    the preimages of every scheduled zero landing inside the disk.  The
    preimages carry exact tags, so a zero hit is recognized exactly and the
    spike of the spherical derivative cannot be missed."""
    pts = [LogPolar.from_complex(center)]
    for k in range(1, 4):
        rho = radius * mp.mpf(k) / 3
        for m in range(8 * k):
            ang = 2 * mp.pi * m / (8 * k)
            pts.append(LogPolar.from_complex(center + rho * mp.exp(mp.mpc(0, 1) * ang)))
    for z in schedule.zeros:
        lm = mp.mpf(z.log_r.numerator) / z.log_r.denominator - mp.log(mp.mpf(j))
        pre = mp.exp(
            mp.mpc(lm, 2 * mp.pi * mp.mpf(z.turn.numerator) / z.turn.denominator)
        )
        if abs(pre - center) <= radius:
            pts.append(LogPolar.from_exact(z.log_r, z.turn, num=1, den=j))
    return pts


def condition_m_sweep(
    schedule: ZeroSchedule,
    points: Sequence[Tuple[Fraction, Fraction]],
    rule: DilationRule,
    n_range: Sequence[int],
    rows_used: Optional[int] = None,
) -> List[SweepRow]:
    """Sample the dilated family's spherical derivative on closed disks of
    radius 1/n around each point (given as (turn, modulus) pairs).

    Row (n, i) reports max over the mesh of j_n * f#(j_n z), the spherical
    derivative of the n-th family member.  The Marty-style surrogate at
    level n holds when every point with index at most n exceeds n.
    """
    rows = schedule.n_rings if rows_used is None else rows_used
    out: List[SweepRow] = []
    with mp.workprec(default_precision() + _GUARD):
        for n in n_range:
            j = dilation_factor(rule, schedule.radii, n)
            radius = mp.mpf(1) / n
            for i, (turn, modulus) in enumerate(points, start=1):
                turn, modulus = Fraction(turn), Fraction(modulus)
                center = (
                    mp.mpf(modulus.numerator) / modulus.denominator
                ) * mp.exp(mp.mpc(0, 2 * mp.pi * mp.mpf(turn.numerator) / turn.denominator))
                top_log = mp.log(mp.mpf(j)) + mp.log(abs(center) + radius)
                valid = rows >= 3 and top_log <= _log_radius_mpf(
                    schedule.radii, rows - 2
                )
                best = mp.mpf(0)
                for z in _mesh(center, radius, schedule, j):
                    sd = mp.mpf(j) * spherical_derivative(schedule, j, z, rows)
                    if sd > best:
                        best = sd
                out.append(SweepRow(n, i, best, bool(valid)))
    return out


def sweep_passes(rows: List[SweepRow], n: int) -> bool:
    """The level-n surrogate: every sampled point with index <= n beat n."""
    relevant = [r for r in rows if r.n == n and r.point_index <= n]
    return bool(relevant) and all(r.max_spherical > n for r in relevant)


# -- order report ----------------------------------------------------------------


@dataclass(frozen=True)
class ProbeReport:
    rule_description: str
    branch: str
    certificates: Tuple[Certificate, ...]
    claimed: str
    rank_conclusion: RankProfile
    inconclusive: bool
    failing_targets: Tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {
            "rule": self.rule_description,
            "branch": self.branch,
            "claimed": self.claimed,
            "rank_profile": self.rank_conclusion.as_dict(),
            "inconclusive": self.inconclusive,
            "failing_targets": list(self.failing_targets),
            "certificates": [
                {
                    "target": "origin" if c.target_turn is None else str(c.target_turn),
                    "passed": c.passed,
                    "reason": c.reason,
                    "entries": [
                        {
                            "k": e.k,
                            "j": str(e.j),
                            "dist_low": mp.nstr(e.dist_low, 12),
                            "dist_high": mp.nstr(e.dist_high, 12),
                            "rational_bound": (
                                str(e.rational_bound) if e.rational_bound else None
                            ),
                        }
                        for e in c.entries
                    ],
                }
                for c in self.certificates
            ],
        }


def _profile_stages(alpha: Ordinal) -> List[Ordinal]:
    one = as_ordinal(1)
    stages = [as_ordinal(0), one]
    p = predecessor(alpha)
    if p is not None:
        stages.extend([p, alpha])
    else:
        from .ordinal import successor

        stages.extend([alpha, successor(alpha)])
    return stages


def order_report(
    schedule: ZeroSchedule,
    rule: DilationRule,
    depth: int = 3,
    k_range: Optional[Sequence[int]] = None,
    delta: Fraction = Fraction(1, 100),
) -> ProbeReport:
    """Assemble certificates plus the exact symbolic rank profile of the
    claimed set of convergence failures.

    Ratio-plus rules claim the origin together with r times the closure of
    the source set; sector rules restrict to their sector; geometric-mean
    rules claim the origin alone.  Certificates cover the origin and the
    first `depth` enumerated angles; any failure marks the report
    inconclusive and lists the failing targets.
    """
    if k_range is None:
        hi = schedule.n_rings if rule.kind != "sector" else _sector_k_cap(schedule)
        lo = max(depth + 1, hi - 4)
        if rule.kind == "sector":
            assert rule.t is not None
            lo = max(lo, rule.t)
        if lo > hi:
            raise ValueError("schedule too small for the requested probe depth")
        k_range = range(lo, hi + 1)
    sector = rule.t if rule.kind == "sector" else 0
    r = rule.r if rule.r is not None else Fraction(1, 2)

    certs: List[Certificate] = [
        non_c0_certificate(schedule, rule, None, delta, k_range)
    ]
    targets: List[Fraction] = []
    if rule.kind in ("ratio_plus", "sector"):
        targets = list(schedule.enumeration(sector)[:depth])
        for turn in targets:
            certs.append(non_c0_certificate(schedule, rule, turn, delta, k_range))

    branch = classify(rule, schedule.radii, k_range)
    failing = tuple(
        "origin" if c.target_turn is None else str(c.target_turn)
        for c in certs
        if not c.passed
    )

    if rule.kind == "geometric_mean":
        claimed = "{0}"
        profile = RankProfile(((as_ordinal(0), 1), (as_ordinal(1), 0)))
    else:
        tree = schedule.source_tree(sector)
        alpha = schedule.alpha
        if schedule.variant == "limit" and rule.kind == "sector":
            from .ordinal import enumerate_below, successor

            alpha = successor(enumerate_below(schedule.alpha, sector)[sector - 1])
        label = "closure of the source set" if sector == 0 else f"closure of sector {sector}"
        claimed = f"{{0}} union {r} * {label}"
        profile = rank_profile(tree, _profile_stages(alpha), extra_isolated=1)

    return ProbeReport(
        rule.describe(),
        branch.branch,
        tuple(certs),
        claimed,
        profile,
        bool(failing),
        failing,
    )


def _sector_k_cap(schedule: ZeroSchedule) -> int:
    # sector rules index super-rows; the last complete super-row n satisfies
    # n(n+1)/2 <= n_rings
    n = 1
    while triangular(n + 1) <= schedule.n_rings:
        n += 1
    return n


def report_to_json(report: ProbeReport) -> str:
    return json.dumps(report.as_dict(), sort_keys=True, indent=1)

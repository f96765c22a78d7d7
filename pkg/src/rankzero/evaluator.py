"""Certified log-domain evaluation of the scheduled infinite products.

The products have zeros at moduli e^1, e^2, e^3, e^5, e^8, ..., so values
and arguments routinely live at moduli far beyond hardware floats.  Complex
numbers are therefore carried as (log of modulus, phase); the only kernel
that ever matters is log(1 - e^s) for a complex s, which is evaluated on
three documented branches:

* Re s >= +40:  1 - e^s = -e^s (1 - e^-s); the tiny correction is kept,
* Re s <= -40:  direct log(1 - e^s), no cancellation possible,
* otherwise:    direct evaluation, switching to an expm1-based path when
  1 - e^s suffers cancellation (|1 - e^s| < 1/2).

The truncation tail of a product evaluation is certified: with q_j the
ratio of |z| to the j-th radius, the dropped rings j contribute at most
sum of j * q_j / (1 - q_j), a convergent majorant whenever |z| does not
exceed the radius two rings below the truncation.

No certified tail is claimed for the logarithmic derivative; its consumers
only use self-consistency and monotone comparisons.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import List, Optional, Tuple

from mpmath import iv, mp

from .schedule import Zero, ZeroSchedule

__all__ = [
    "LogPolar",
    "EvalResult",
    "SectorBoundReport",
    "default_precision",
    "log_eval",
    "family_eval",
    "log_derivative",
    "spherical_derivative",
    "sector_bound_check",
    "small_product_constant",
]

_ENV_BITS = "RANKZERO_BITS"
_GUARD = 30


def default_precision() -> int:
    """Working precision in bits; override with the RANKZERO_BITS variable."""
    try:
        bits = int(os.environ.get(_ENV_BITS, "200"))
    except ValueError:
        bits = 200
    return max(64, bits)


def _mpf_fraction(f: Fraction):
    return mp.mpf(f.numerator) / mp.mpf(f.denominator)


@dataclass(frozen=True)
class ExactScale:
    """Exact modulus e^log_rat * num / den with an exact turn angle; lets a
    dilated sample land on a scheduled zero and be recognized exactly."""

    log_rat: Fraction
    num: int
    den: int
    turn: Fraction

    def scaled(self, j: int) -> "ExactScale":
        num, den = self.num * j, self.den
        g = gcd(num, den)
        return ExactScale(self.log_rat, num // g, den // g, self.turn)

    def hits(self, zero: Zero) -> bool:
        return (
            self.num == self.den
            and self.log_rat == zero.log_r
            and (self.turn - zero.turn) % 1 == 0
        )


@dataclass(frozen=True)
class LogPolar:
    """A complex value as (natural log of modulus, phase in (-pi, pi]).

    log_mag is -inf exactly when the value is zero.  The optional exact tag
    preserves rational provenance through dilations.
    """

    log_mag: object
    phase: object
    exact: Optional[ExactScale] = None

    @staticmethod
    def origin() -> "LogPolar":
        return LogPolar(mp.ninf, mp.mpf(0))

    @staticmethod
    def from_exact(log_rat: Fraction, turn: Fraction, num: int = 1, den: int = 1) -> "LogPolar":
        log_rat, turn = Fraction(log_rat), Fraction(turn) % 1
        if num < 1 or den < 1:
            raise ValueError("num and den must be positive")
        g = gcd(num, den)
        num, den = num // g, den // g
        with mp.workprec(default_precision() + _GUARD):
            lm = _mpf_fraction(log_rat) + mp.log(num) - mp.log(den)
            ph = _norm_phase(2 * mp.pi * _mpf_fraction(turn))
        return LogPolar(lm, ph, ExactScale(log_rat, num, den, turn))

    @staticmethod
    def from_complex(value) -> "LogPolar":
        value = mp.mpc(value)
        if value == 0:
            return LogPolar.origin()
        return LogPolar(mp.log(abs(value)), mp.arg(value))

    @property
    def is_zero(self) -> bool:
        return self.log_mag == mp.ninf

    def to_complex(self):
        if self.is_zero:
            return mp.mpc(0)
        return mp.exp(mp.mpc(self.log_mag, self.phase))

    def scaled_by_int(self, j: int) -> "LogPolar":
        if j < 1:
            raise ValueError("dilation factors are positive integers")
        if self.is_zero:
            return self
        lm = self.log_mag + mp.log(mp.mpf(j))
        return LogPolar(lm, self.phase, self.exact.scaled(j) if self.exact else None)


def _norm_phase(x):
    two_pi = 2 * mp.pi
    x = mp.fmod(x, two_pi)
    if x > mp.pi:
        x -= two_pi
    elif x <= -mp.pi:
        x += two_pi
    return x


# -- the kernel ---------------------------------------------------------------

_BRANCH = 40


def _log_one_minus_exp(s) -> Tuple[object, object]:
    """(log|1 - e^s|, arg(1 - e^s)); (-inf, 0) when e^s is exactly 1."""
    re = mp.re(s)
    if re >= _BRANCH:
        # 1 - e^s = -e^s (1 - e^-s); e^-s is tiny but its effect is kept
        u = mp.exp(-s)
        rest = mp.log(1 - u)
        mag = re + mp.re(rest)
        ph = _norm_phase(mp.pi + mp.im(s) + mp.im(rest))
        return mag, ph
    if re <= -_BRANCH:
        v = mp.log(1 - mp.exp(s))
        return mp.re(v), _norm_phase(mp.im(v))
    w = mp.exp(s)
    d = 1 - w
    if d == 0:
        return mp.ninf, mp.mpf(0)
    if abs(d) < mp.mpf(1) / 2:
        d = -mp.expm1(s)  # cancellation zone: expm1 keeps full precision
        if d == 0:
            return mp.ninf, mp.mpf(0)
    return mp.log(abs(d)), mp.arg(d)


@dataclass(frozen=True)
class EvalResult:
    """Truncated product value with a certified bound on the dropped tail."""

    value: LogPolar
    rows_used: int
    tail_log_bound: object
    valid: bool


def _zeros_through(schedule: ZeroSchedule, rows_used: int) -> List[Zero]:
    return [z for z in schedule.zeros if z.ring <= rows_used]


def _zero_hit(schedule: ZeroSchedule, z: LogPolar, rows_used: int) -> bool:
    if z.exact is None:
        return False
    return any(z.exact.hits(zz) for zz in _zeros_through(schedule, rows_used))


def _tail_bound(schedule: ZeroSchedule, log_mag, rows_used: int):
    """Strict majorant of |log f - log f_truncated| at modulus e^log_mag.

    Ring j holds at most j zeros, each factor obeys
    |log(1 - w)| <= |w| / (1 - |w|), and the ring ratios q_j collapse
    superexponentially, so the series is summed until it is negligible and
    the rest is closed off geometrically.
    """
    old = iv.prec
    iv.prec = mp.prec + _GUARD
    try:
        x = iv.mpf(mp.nstr(log_mag, 40)) if log_mag != mp.ninf else None
        if x is None:
            return mp.mpf(0)
        total = iv.mpf(0)
        j = rows_used + 1
        last_term = None
        for _ in range(400):
            lr = schedule.radii.log_radius(j)
            q = iv.exp(x - iv.mpf(lr.numerator) / iv.mpf(lr.denominator))
            if q.b >= 1:
                raise ArithmeticError("tail hypothesis violated in bound computation")
            term = iv.mpf(j) * q / (1 - q)
            total += term
            last_term = term
            if term.b < mp.mpf(2) ** (-mp.prec - 10):
                break
            j += 1
        else:  # pragma: no cover
            raise ArithmeticError("tail bound did not converge")
        # remaining terms decay at least geometrically with ratio 2/e
        ratio = iv.mpf(2) / iv.exp(iv.mpf(1))
        total += last_term * ratio / (1 - ratio)
        return mp.mpf(total.b)
    finally:
        iv.prec = old


def log_eval(schedule: ZeroSchedule, z: LogPolar, rows_used: Optional[int] = None) -> EvalResult:
    """Product of (1 - z/b) over the zeros b of the first rows_used rings.

    The certified tail hypothesis requires |z| at most the radius two rings
    below the truncation; outside it the value is still returned with
    valid=False.  An exact hit on a scheduled zero gives log_mag = -inf.
    """
    rows = schedule.n_rings if rows_used is None else rows_used
    if rows > schedule.n_rings:
        raise ValueError(f"rows_used {rows} exceeds schedule rings {schedule.n_rings}")
    with mp.workprec(default_precision() + _GUARD):
        if z.is_zero:
            return EvalResult(LogPolar(mp.mpf(0), mp.mpf(0)), rows, mp.mpf(0), True)
        if _zero_hit(schedule, z, rows):
            return EvalResult(LogPolar(mp.ninf, mp.mpf(0)), rows, mp.mpf(0), True)
        mag = mp.mpf(0)
        ph = mp.mpf(0)
        for zero in _zeros_through(schedule, rows):
            s = mp.mpc(
                z.log_mag - _mpf_fraction(zero.log_r),
                _norm_phase(z.phase - 2 * mp.pi * _mpf_fraction(zero.turn)),
            )
            m, p = _log_one_minus_exp(s)
            if m == mp.ninf:
                return EvalResult(LogPolar(mp.ninf, mp.mpf(0)), rows, mp.mpf(0), True)
            mag += m
            ph += p
        hypothesis = rows >= 3 and z.log_mag <= _mpf_fraction(
            schedule.radii.log_radius(rows - 2)
        )
        if hypothesis:
            tail = _tail_bound(schedule, z.log_mag, rows)
            valid = True
        else:
            tail = mp.inf
            valid = False
        return EvalResult(LogPolar(mag, _norm_phase(ph)), rows, tail, valid)


def family_eval(
    schedule: ZeroSchedule, j: int, z: LogPolar, rows_used: Optional[int] = None
) -> EvalResult:
    """Evaluate the j-th dilation: the product at j*z."""
    with mp.workprec(default_precision() + _GUARD):
        return log_eval(schedule, z.scaled_by_int(j), rows_used)


def log_derivative(
    schedule: ZeroSchedule, z: LogPolar, rows_used: Optional[int] = None
) -> LogPolar:
    """Truncated logarithmic derivative: sum of 1/(z - b) over included
    zeros.  Carries no certified tail; use it only for self-consistency and
    monotone comparisons."""
    rows = schedule.n_rings if rows_used is None else rows_used
    with mp.workprec(default_precision() + _GUARD):
        if _zero_hit(schedule, z, rows):
            raise ValueError("logarithmic derivative has a pole at a scheduled zero")
        zc = z.to_complex()
        total = mp.mpc(0)
        for zero in _zeros_through(schedule, rows):
            bc = mp.exp(
                mp.mpc(_mpf_fraction(zero.log_r), 2 * mp.pi * _mpf_fraction(zero.turn))
            )
            total += 1 / (zc - bc)
        return LogPolar.from_complex(total)


def _derivative_at_zero(schedule: ZeroSchedule, hit: Zero, rows: int):
    """log |f'(b)| at a scheduled zero b: the product over the other zeros
    of |1 - b/b'|, divided by |b|."""
    mag = -_mpf_fraction(hit.log_r)
    for zero in _zeros_through(schedule, rows):
        if zero == hit:
            continue
        s = mp.mpc(
            _mpf_fraction(hit.log_r - zero.log_r),
            _norm_phase(2 * mp.pi * _mpf_fraction(hit.turn - zero.turn)),
        )
        m, _ = _log_one_minus_exp(s)
        mag += m
    return mag


def spherical_derivative(
    schedule: ZeroSchedule, j: int, z: LogPolar, rows_used: Optional[int] = None
) -> object:
    """|f'(w)| / (1 + |f(w)|^2) at w = j*z, in overflow-safe log arithmetic.

    At a scheduled zero this is |f'(w)| exactly.  The dilation chain factor
    j belongs to the family member, not to this quantity; sweeps that need
    the family's derivative multiply by j themselves.
    """
    rows = schedule.n_rings if rows_used is None else rows_used
    with mp.workprec(default_precision() + _GUARD):
        w = z.scaled_by_int(j) if j != 1 else z
        if w.is_zero:
            w = LogPolar.origin()
        if w.exact is not None:
            for zero in _zeros_through(schedule, rows):
                if w.exact.hits(zero):
                    return mp.exp(_derivative_at_zero(schedule, zero, rows))
        fv = log_eval(schedule, w, rows)
        if fv.value.is_zero:  # numeric zero without exact tag
            return mp.inf
        lf = fv.value.log_mag
        ld = log_derivative(schedule, w, rows)
        if ld.is_zero:
            return mp.mpf(0)
        log_fprime = ld.log_mag + lf
        two_lf = 2 * lf
        if two_lf > 0:
            log_denom = two_lf + mp.log1p(mp.exp(-two_lf))
        else:
            log_denom = mp.log1p(mp.exp(two_lf))
        return mp.exp(log_fprime - log_denom)


# -- sector lower bound ---------------------------------------------------------


def small_product_constant(prec: Optional[int] = None):
    """Certified lower bound of prod(1 - 2^-j) over j >= 1 (about 0.288788)."""
    old = iv.prec
    iv.prec = (prec or default_precision()) + _GUARD
    try:
        terms = iv.prec + 10
        prod = iv.mpf(1)
        for j in range(1, terms + 1):
            prod *= 1 - iv.mpf(1) / iv.mpf(2) ** j
        # log of the remaining factors is at least -2^(1-terms)
        lower = prod.a * mp.mpf(1 - mp.mpf(2) ** (1 - terms))
        return mp.mpf(lower), mp.mpf(prod.b)
    finally:
        iv.prec = old


@dataclass(frozen=True)
class SectorBoundReport:
    ring: int
    lhs: object  # computed log |f_truncated(z)|
    certified_lhs: object  # lhs minus the truncation tail bound
    rhs: object  # divergence bound for this ring at the given angular gap
    passed: bool


def sector_bound_check(
    schedule: ZeroSchedule,
    z: LogPolar,
    alpha0,
    rows_used: Optional[int] = None,
) -> SectorBoundReport:
    """Check the off-ray divergence bound at z.

    With n the ring index satisfying a_n < |z| <= a_{n+1} and the ray of z
    at angular distance at least alpha0 from every zero ray, the product is
    at least 2^(n(n-1)/2) * sin(alpha0/2)^(3(n+1)) times the small-product
    constant; the comparison concedes the truncation tail on the right.
    """
    rows = schedule.n_rings if rows_used is None else rows_used
    with mp.workprec(default_precision() + _GUARD):
        alpha0 = mp.mpf(alpha0)
        if alpha0 <= 0:
            raise ValueError("alpha0 must be positive")
        if z.is_zero or z.log_mag <= _mpf_fraction(schedule.radii.log_radius(1)):
            raise ValueError("modulus must exceed the first radius")
        n = 1
        while z.log_mag > _mpf_fraction(schedule.radii.log_radius(n + 1)):
            n += 1
        # angular gap against every zero ray of the full (untruncated) set:
        # all its angles lie in the source hull arcs
        turn = z.phase / (2 * mp.pi)
        for zero in schedule.zeros:
            gap = _turn_gap(turn, _mpf_fraction(zero.turn))
            if 2 * mp.pi * gap < alpha0:
                raise ValueError(
                    f"ray too close to the zero ray at turn {zero.turn}"
                )
        for sector, tree in sorted(schedule.sources.items()):
            if tree is None:
                continue
            pieces = tree.members if hasattr(tree, "members") else (tree,)
            for piece in pieces:
                if hasattr(piece, "arc"):
                    c = _mpf_fraction(piece.arc.center)
                    hw = _mpf_fraction(piece.arc.half_width)
                else:
                    c = _mpf_fraction(piece.angle)
                    hw = mp.mpf(0)
                gap = _turn_gap(turn, c) - hw
                if 2 * mp.pi * gap < alpha0:
                    raise ValueError(
                        f"ray within alpha0 of the zero arc at sector {sector}"
                    )
        res = log_eval(schedule, z, rows)
        if not res.valid:
            raise ValueError("tail hypothesis fails: raise rows_used")
        k0_low, _ = small_product_constant()
        rhs = (
            mp.mpf(n * (n - 1)) / 2 * mp.log(2)
            + 3 * (n + 1) * mp.log(mp.sin(alpha0 / 2))
            + mp.log(k0_low)
            - res.tail_log_bound
        )
        lhs = res.value.log_mag
        certified = lhs - res.tail_log_bound
        return SectorBoundReport(n, lhs, certified, rhs, bool(lhs >= rhs))


def _turn_gap(a, b):
    d = mp.fmod(abs(a - b), 1)
    return min(d, 1 - d)

from fractions import Fraction as F

import pytest
from mpmath import mp

from rankzero.evaluator import (
    LogPolar,
    family_eval,
    log_derivative,
    log_eval,
    sector_bound_check,
    small_product_constant,
    spherical_derivative,
)
from rankzero.evaluator import _log_one_minus_exp
from rankzero.ordinal import as_ordinal
from rankzero.schedule import Zero, ZeroSchedule, build_radii, build_row_schedule


def make_schedule(zeros, n_rings=6):
    radii = build_radii(max(3, n_rings))
    return ZeroSchedule(
        "rows", as_ordinal(1), 1, radii, tuple(zeros),
        {0: tuple(sorted({z.turn for z in zeros}))}, {0: None},
    )


@pytest.fixture(scope="module")
def sched():
    return build_row_schedule(3, 1, 12)


class TestKernel:
    def brute(self, s):
        with mp.workprec(400):
            v = 1 - mp.exp(s)
            return (mp.log(abs(v)), mp.arg(v))

    @pytest.mark.parametrize(
        "re,im",
        [(39.999, 0.3), (40.001, 0.3), (-39.999, -0.7), (-40.001, -0.7),
         (0.2, 0.1), (1e-9, 1e-9), (-0.3, 3.0), (5.0, -2.0), (200.0, 1.0),
         (-500.0, 0.5)],
    )
    def test_matches_brute_force_across_seams(self, re, im):
        with mp.workprec(230):
            s = mp.mpc(re, im)
            mag, ph = _log_one_minus_exp(s)
        bm, bp = self.brute(s)
        assert abs(mag - bm) < mp.mpf("1e-55")
        assert abs(ph - bp) < mp.mpf("1e-55")

    def test_exact_unit(self):
        with mp.workprec(230):
            mag, ph = _log_one_minus_exp(mp.mpc(0, 0))
        assert mag == mp.ninf


class TestLogEval:
    def test_value_at_origin_is_one(self, sched):
        res = log_eval(sched, LogPolar.origin(), 8)
        assert res.value.log_mag == 0 and res.value.phase == 0
        assert res.valid and res.tail_log_bound == 0

    def test_exact_zero_hit(self, sched):
        z = LogPolar.from_exact(F(1), sched.enumeration()[0])
        res = log_eval(sched, z, 12)
        assert res.value.is_zero

    def test_zero_outside_truncation_not_hit(self, sched):
        z = LogPolar.from_exact(F(55), sched.enumeration()[0])  # ring 9 zero
        res = log_eval(sched, z, 8)
        assert not res.value.is_zero
        assert not res.valid  # modulus breaks the tail hypothesis for 8 rings

    def test_matches_direct_product(self, sched):
        with mp.workprec(300):
            w = mp.exp(mp.mpc("2.5", 0)) * mp.exp(mp.mpc(0, 1) * mp.pi / 5)
            prod = mp.mpc(1)
            for z in sched.zeros:
                if z.ring <= 8:
                    b = mp.exp(mp.mpc(int(z.log_r), 0)) * mp.exp(
                        mp.mpc(0, 2) * mp.pi * mp.mpf(z.turn.numerator) / z.turn.denominator
                    )
                    prod *= 1 - w / b
            expect_mag = mp.log(abs(prod))
            got = log_eval(sched, LogPolar(mp.mpf("2.5"), mp.pi / 5), 8)
            assert abs(got.value.log_mag - expect_mag) < mp.mpf("1e-50")

    def test_truncation_consistency(self, sched):
        z = LogPolar(mp.mpf("2.5"), mp.pi / 5)
        r8 = log_eval(sched, z, 8)
        r12 = log_eval(sched, z, 12)
        assert r8.valid
        assert abs(r8.value.log_mag - r12.value.log_mag) <= r8.tail_log_bound

    def test_conjugate_symmetry(self):
        zeros = (
            Zero(1, F(1), F(1, 8)), Zero(1, F(1), F(7, 8)),
            Zero(2, F(2), F(1, 8)), Zero(2, F(2), F(7, 8)),
        )
        s = make_schedule(zeros)
        a = log_eval(s, LogPolar(mp.mpf("1.5"), mp.mpf("0.9")), 2)
        b = log_eval(s, LogPolar(mp.mpf("1.5"), -mp.mpf("0.9")), 2)
        assert abs(a.value.log_mag - b.value.log_mag) < mp.mpf("1e-50")
        assert abs(a.value.phase + b.value.phase) < mp.mpf("1e-50")

    def test_rows_beyond_schedule_rejected(self, sched):
        with pytest.raises(ValueError):
            log_eval(sched, LogPolar.origin(), 13)


class TestFamily:
    def test_unit_dilation_is_identity(self, sched):
        z = LogPolar(mp.mpf("2.5"), mp.pi / 5)
        assert family_eval(sched, 1, z, 8).value.log_mag == log_eval(sched, z, 8).value.log_mag

    def test_zero_fidelity_through_dilation(self, sched):
        c1 = sched.enumeration()[0]
        j = 5962
        z = LogPolar.from_exact(F(8), c1, num=1, den=j)  # a_5 c_1 / j
        assert family_eval(sched, j, z, 12).value.is_zero

    def test_rejects_bad_factor(self, sched):
        with pytest.raises(ValueError):
            LogPolar.origin().scaled_by_int(0)


class TestLogDerivative:
    def test_single_zero(self):
        s = make_schedule([Zero(1, F(1), F(0))])
        with mp.workprec(300):
            z = LogPolar(mp.mpf("0.5"), mp.mpf("1.0"))
            got = log_derivative(s, z, 1).to_complex()
            expect = 1 / (z.to_complex() - mp.exp(mp.mpc(1, 0)))
            assert abs(got - expect) < mp.mpf("1e-50")

    def test_antipodal_pair_cancels_at_origin(self):
        s = make_schedule([Zero(1, F(1), F(0)), Zero(1, F(1), F(1, 2))])
        got = log_derivative(s, LogPolar.origin(), 1)
        assert got.is_zero or got.log_mag < -100

    def test_pole_at_zero_rejected(self, sched):
        z = LogPolar.from_exact(F(1), sched.enumeration()[0])
        with pytest.raises(ValueError):
            log_derivative(sched, z, 12)

    def test_truncation_stability(self, sched):
        z = LogPolar(mp.mpf(7), mp.mpf("2.0"))
        d8 = log_derivative(sched, z, 8).to_complex()
        d12 = log_derivative(sched, z, 12).to_complex()
        assert abs(d8 - d12) / abs(d12) < mp.mpf("1e-6")


class TestSpherical:
    def test_empty_schedule_is_flat(self):
        s = make_schedule([])
        assert spherical_derivative(s, 1, LogPolar(mp.mpf(1), mp.mpf(0)), 0) == 0

    def test_value_at_simple_zero_is_derivative_modulus(self, sched):
        c1 = sched.enumeration()[0]
        z = LogPolar.from_exact(F(1), c1)
        got = spherical_derivative(sched, 1, z, 12)
        # brute force: product over the other zeros, divided by |b|
        with mp.workprec(300):
            b0 = mp.exp(mp.mpc(1, 0)) * mp.exp(mp.mpc(0, 2) * mp.pi * mp.mpf(c1.numerator) / c1.denominator)
            prod = mp.mpc(1)
            for z2 in sched.zeros:
                b = mp.exp(mp.mpc(int(z2.log_r), 0)) * mp.exp(
                    mp.mpc(0, 2) * mp.pi * mp.mpf(z2.turn.numerator) / z2.turn.denominator
                )
                if abs(b - b0) < mp.mpf("1e-40"):
                    continue
                prod *= 1 - b0 / b
            expect = abs(prod) / abs(b0)
        assert abs(got - expect) / expect < mp.mpf("1e-40")

    def test_near_zero_dominates_far_on_sparse_schedule(self):
        s = make_schedule([Zero(3, F(3), F(0))])
        near = spherical_derivative(s, 1, LogPolar(mp.mpf(3) + mp.log(mp.mpf("1.001")), mp.mpf(0)), 3)
        far = spherical_derivative(s, 1, LogPolar(mp.mpf(3) + mp.log(mp.mpf("1.5")), mp.mpf(0)), 3)
        assert near > far


class TestSectorBound:
    def test_passes_off_ray(self, sched):
        rep = sector_bound_check(sched, LogPolar(mp.mpf(4), mp.pi), 0.3, 12)
        assert rep.ring == 3
        assert rep.passed

    def test_rejects_small_modulus(self, sched):
        with pytest.raises(ValueError):
            sector_bound_check(sched, LogPolar(mp.mpf("0.5"), mp.pi), 0.3, 12)

    def test_rejects_on_ray(self, sched):
        c1 = sched.enumeration()[0]
        z = LogPolar(mp.mpf(4), 2 * mp.pi * mp.mpf(c1.numerator) / c1.denominator)
        with pytest.raises(ValueError, match="ray"):
            sector_bound_check(sched, z, 0.3, 12)

    def test_small_product_constant(self):
        lo, hi = small_product_constant()
        assert lo <= hi
        assert abs(lo - mp.mpf("0.288788095086602")) < mp.mpf("1e-12")

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from skewentropy import distributions as ds
from skewentropy import entropy as en
from skewentropy import oracle as orc
from skewentropy.errors import Unsupported

from conftest import random_skew_matrix, random_spd

H_STD_NORMAL = 1.4189385332046727  # (1 + ln 2 pi) / 2
# E[ln(2 Phi(X0))] for X0 skewed with alpha = 1: a 30-digit quadrature gives
# 0.19314718055994530942, i.e. ln 2 - 1/2 to full precision.
CORRECTION_ALPHA_ONE = math.log(2.0) - 0.5


def canonical_loc(n):
    return ds.LocationScale.from_values(np.zeros(n), np.eye(n))


class TestEntropyClosed:
    def test_normal_is_mu_free(self):
        assert en.entropy_closed(ds.Normal(5.0, 1.0)) == pytest.approx(
            H_STD_NORMAL, abs=1e-15
        )
        assert en.entropy_closed(ds.Normal(5.0, 1.0)) == en.entropy_closed(
            ds.Normal(-3.0, 1.0)
        )

    def test_lognormal_adds_mu(self):
        assert en.entropy_closed(ds.LogNormal(1.0, 1.0)) == pytest.approx(
            H_STD_NORMAL + 1.0, abs=1e-15
        )

    def test_multivariate_normal(self):
        spec = ds.MultivariateNormal(
            ds.LocationScale.from_values([0.0, 0.0], np.diag([4.0, 1.0]))
        )
        assert en.entropy_closed(spec) == pytest.approx(
            2 * H_STD_NORMAL + 0.5 * math.log(4.0), abs=1e-14
        )

    def test_skew_families_unsupported(self):
        with pytest.raises(Unsupported):
            en.entropy_closed(ds.SkewNormal(0, 1, 1))


class TestSkewCorrection:
    def test_zero_skew_is_exactly_zero(self):
        skew = ds.SkewnessMatrix.from_matrix(np.zeros((2, 2)))
        est = en.skew_correction(skew, 0, 5_000)
        assert est.value == 0.0
        assert est.std_error == 0.0
        assert est.mc_part == 0.0

    def test_alpha_one_matches_quadrature_oracle(self):
        skew = ds.SkewnessMatrix.from_matrix([[ds.alpha_to_delta(1.0)]])
        est = en.skew_correction(skew, 123, 100_000)
        assert abs(est.value - CORRECTION_ALPHA_ONE) <= 3 * est.std_error

    def test_large_alpha_approaches_log_two(self):
        skew = ds.SkewnessMatrix.from_matrix([[ds.alpha_to_delta(1e4)]])
        est = en.skew_correction(skew, 5, 100_000)
        assert abs(est.value - math.log(2.0)) <= 3 * est.std_error + 1e-3

    def test_std_error_scales_inverse_sqrt(self):
        skew = ds.SkewnessMatrix.from_matrix([[ds.alpha_to_delta(1.5)]])
        ses = [en.skew_correction(skew, 9, n).std_error for n in (1_000, 10_000, 100_000)]
        for a, b in zip(ses, ses[1:]):
            assert a / b == pytest.approx(math.sqrt(10.0), rel=0.35)


class TestEntropyMc:
    def test_sn_alpha_zero_exact(self):
        est = en.entropy_mc(ds.SkewNormal(0.7, 1.0, 0.0), 1, 10_000)
        assert est.value == en.entropy_closed(ds.Normal(0.7, 1.0))
        assert est.std_error == 0.0 and est.mc_part == 0.0

    def test_lsn_alpha_zero_equals_lognormal(self):
        est = en.entropy_mc(ds.LogSkewNormal(0.4, 1.0, 0.0), 1, 10_000)
        assert est.value == en.entropy_closed(ds.LogNormal(0.4, 1.0))

    def test_lsn_equals_sn_plus_mean(self):
        sn = ds.SkewNormal(0.2, 1.3, 1.7)
        lsn = ds.LogSkewNormal(0.2, 1.3, 1.7)
        a = en.entropy_mc(sn, 4, 20_000)
        b = en.entropy_mc(lsn, 4, 20_000)
        assert b.mc_part == a.mc_part
        assert b.value - a.value == pytest.approx(float(ds.mean(sn)[0]), abs=1e-12)

    def test_value_is_exact_sum_of_parts(self):
        est = en.entropy_mc(ds.SkewNormal(0.0, 2.0, -1.1), 3, 20_000)
        assert est.value == est.closed_form_part + est.mc_part

    def test_identical_seed_bitwise_determinism(self):
        spec = ds.Cfusn(canonical_loc(2), ds.SkewnessMatrix.from_matrix([[0.4], [0.3]]))
        a = en.entropy_mc(spec, 17, 30_000)
        b = en.entropy_mc(spec, 17, 30_000)
        assert (a.value, a.std_error) == (b.value, b.std_error)

    def test_mu_invariance_is_bitwise(self, rng):
        sigma = random_spd(rng, 2)
        skew = random_skew_matrix(rng, 2, 2)
        a = en.entropy_mc(
            ds.Cfusn(ds.LocationScale.from_values([0.0, 0.0], sigma), skew), 23, 20_000
        )
        b = en.entropy_mc(
            ds.Cfusn(ds.LocationScale.from_values([4.0, -2.0], sigma), skew), 23, 20_000
        )
        assert a.value == b.value
        sn_a = en.entropy_mc(ds.SkewNormal(0.0, 1.5, 2.0), 24, 20_000)
        sn_b = en.entropy_mc(ds.SkewNormal(9.0, 1.5, 2.0), 24, 20_000)
        assert sn_a.value == sn_b.value

    def test_worker_count_does_not_change_bits(self):
        spec = ds.Cfusn(canonical_loc(2), ds.SkewnessMatrix.from_matrix([[0.4], [0.3]]))
        one = en.entropy_mc(spec, 42, 50_000, n_workers=1)
        four = en.entropy_mc(spec, 42, 50_000, n_workers=4)
        assert one.value == four.value
        assert one.std_error == four.std_error

    def test_diagonal_cfusn_matches_sn_pair(self):
        delta = 0.6
        alpha = ds.delta_to_alpha(delta)  # 0.75
        joint = ds.Cfusn(
            canonical_loc(2), ds.SkewnessMatrix.from_matrix(np.diag([delta, delta]))
        )
        est_joint = en.entropy_mc(joint, 31, 100_000)
        est_sn = en.entropy_mc(ds.SkewNormal(0.0, 1.0, alpha), 32, 100_000)
        combined = 3 * math.hypot(est_joint.std_error, 2 * est_sn.std_error)
        assert abs(est_joint.value - 2 * est_sn.value) <= combined

    @given(st.integers(0, 10_000))
    def test_log_shift_law(self, seed):
        rng = np.random.default_rng(seed)
        n, m = int(rng.integers(1, 5)), int(rng.integers(1, 4))
        loc = ds.LocationScale.from_values(rng.standard_normal(n), random_spd(rng, n))
        skew = random_skew_matrix(rng, n, m)
        cfusn = ds.Cfusn(loc, skew)
        a = en.entropy_mc(cfusn, 7, 512)
        b = en.entropy_mc(ds.Lcfusn(loc, skew), 7, 512)
        assert b.mc_part == a.mc_part
        assert b.value - a.value == pytest.approx(float(ds.mean(cfusn).sum()), abs=1e-12)


class TestEntropyExpanded:
    def test_orthogonal_columns_bracket_vanishes_bitwise(self):
        skew = ds.SkewnessMatrix.from_matrix([[0.5, 0.5], [0.5, -0.5]])
        assert abs(en.delta_bracket(skew)) < 1e-12
        sigma = np.eye(2)
        a = en.entropy_mc(ds.Cfusn(canonical_loc(2), skew), 8, 20_000)
        b = en.entropy_expanded_cfusn(skew, sigma, 8, 20_000)
        assert a.value == b.value

    def test_zero_skew_gives_normal_entropy(self, rng):
        sigma = random_spd(rng, 2)
        skew = ds.SkewnessMatrix.from_matrix(np.zeros((2, 2)))
        est = en.entropy_expanded_cfusn(skew, sigma, 2, 5_000)
        expected = en.entropy_closed(
            ds.MultivariateNormal(ds.LocationScale.from_values(np.zeros(2), sigma))
        )
        assert est.value == pytest.approx(expected, abs=1e-12)
        assert est.std_error == 0.0

    def test_hand_expanded_bracket_1x2(self):
        skew = ds.SkewnessMatrix.from_matrix([[0.3, 0.4]])
        assert en.delta_bracket(skew) == pytest.approx(-0.25 + 0.49, abs=1e-15)
        est = en.entropy_expanded_cfusn(skew, np.eye(1), 6, 20_000)
        ref = en.entropy_mc(ds.Cfusn(canonical_loc(1), skew), 6, 20_000)
        assert abs(est.value - ref.value) <= 1e-10

    @given(st.integers(0, 10_000), st.integers(1, 4), st.integers(1, 3))
    def test_moment_sum_matches_per_component_route(self, seed, n, m):
        # independent derivation: 0.5 * sum_i (Var_i + mean_i^2) at (0, I)
        skew = random_skew_matrix(np.random.default_rng(seed), n, m)
        spec = ds.canonical_cfusn(skew)
        per_component = 0.5 * float(
            np.trace(ds.variance(spec)) + (ds.mean(spec) ** 2).sum()
        )
        assert en.cfusn_moment_half_sum(skew) == pytest.approx(
            per_component, rel=1e-12, abs=1e-12
        )


class TestOracleAgreement:
    def test_sn_vs_quadrature(self):
        spec = ds.SkewNormal(0.3, 1.2, 1.5)
        est = en.entropy_mc(spec, 4, 100_000)
        ref = orc.entropy_quadrature(spec)
        assert abs(est.value - ref) <= 3 * est.std_error + 1e-5

    def test_lsn_vs_quadrature(self):
        spec = ds.LogSkewNormal(0.3, 1.2, -1.5)
        est = en.entropy_mc(spec, 4, 100_000)
        ref = orc.entropy_quadrature(spec)
        assert abs(est.value - ref) <= 3 * est.std_error + 1e-5

    def test_cfusn_1_2_vs_quadrature(self):
        spec = ds.Cfusn(canonical_loc(1), ds.SkewnessMatrix.from_matrix([[0.5, -0.4]]))
        est = en.entropy_mc(spec, 4, 100_000)
        ref = orc.entropy_quadrature(spec)
        assert abs(est.value - ref) <= 3 * est.std_error + 1e-5


class TestEntropyEstimate:
    def test_closed_families_have_zero_error(self):
        est = en.entropy_estimate(ds.Normal(0.0, 2.0), 0, 1_000)
        assert est.std_error == 0.0
        assert est.mc_part == 0.0
        assert est.value == en.entropy_closed(ds.Normal(0.0, 2.0))

    def test_skew_families_route_to_mc(self):
        est = en.entropy_estimate(ds.SkewNormal(0.0, 1.0, 2.0), 0, 10_000)
        assert est.std_error > 0.0


class TestEntropyCurve:
    def test_sn_curve_monotone_nonincreasing(self):
        points = en.entropy_curve("sn", np.arange(0.0, 10.5, 1.0), None, 13, 30_000)
        values = [est.value for _, est in points]
        errs = [est.std_error for _, est in points]
        for i in range(len(values) - 1):
            slack = 3 * math.hypot(errs[i], errs[i + 1])
            assert values[i + 1] <= values[i] + slack

    def test_scale_shift_is_exact_under_shared_seed(self):
        grid = np.arange(0.0, 5.0, 1.0)
        base = en.entropy_curve("sn", grid, {"sigma": 1.0}, 14, 10_000)
        wide = en.entropy_curve("sn", grid, {"sigma": math.sqrt(3.0)}, 14, 10_000)
        for (_, a), (_, b) in zip(base, wide):
            assert b.value - a.value == pytest.approx(0.5 * math.log(3.0), abs=1e-12)
            assert b.mc_part == a.mc_part

    def test_lsn_curve_has_interior_maximum(self):
        grid = np.arange(0.0, 10.5, 0.5)
        points = en.entropy_curve("lsn", grid, None, 15, 30_000)
        values = np.array([est.value for _, est in points])
        errs = np.array([est.std_error for _, est in points])
        top = int(np.argmax(values))
        assert 0 < top < len(values) - 1
        assert values[top] > values[0] + 3 * math.hypot(errs[top], errs[0])
        assert values[top] > values[-1] + 3 * math.hypot(errs[top], errs[-1])

    def test_cfusn12_grid_center_value(self):
        pairs = [(-0.5, -0.5), (0.0, 0.0), (0.5, 0.5)]
        points = en.entropy_curve("cfusn12", pairs, None, 16, 10_000)
        center = points[1][2]
        assert center.value == pytest.approx(H_STD_NORMAL, abs=1e-12)
        assert center.std_error == 0.0

    def test_unknown_family_rejected(self):
        with pytest.raises(Unsupported):
            en.entropy_curve("weird", [0.0], None, 0, 100)

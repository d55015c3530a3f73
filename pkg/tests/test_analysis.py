"""Closed forms, retention kernels, and the interference quadrature."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rtscts.analysis import (
    QuadratureConfig,
    QuadratureConvergenceError,
    ThinningType,
    intensity_type1,
    intensity_type2,
    interference_tail_bound,
    mean_interference,
    optimal_lambda_p_type1,
    ordered_pair_retention,
    pair_retention_kernel,
    path_loss,
    retained_intensity,
)
from rtscts.geometry import (
    NetworkParams,
    PairConfiguration,
    exclusion_zone_area,
    pair_union_area,
    zone_reach,
)

from _oracles import ordered_retention_dblquad, small_density_interference_slope

# frozen by the geometry suite
V_O_DEFAULT = 14.304896828263226

DEFAULT_PARAMS = NetworkParams.make(0.05)

# fast but honest quadrature settings for unit tests; acceptance runs the
# production defaults
FAST_QUAD = QuadratureConfig(r_max=12.0, rel_tol=2e-2, base_grid=(8, 16, 16),
                             max_levels=5)


class TestThinningType:
    def test_parse_labels(self):
        assert ThinningType.parse("type1") is ThinningType.TYPE_I
        assert ThinningType.parse("type2") is ThinningType.TYPE_II

    def test_parse_rejects_unknown(self):
        with pytest.raises(ValueError, match="unknown thinning"):
            ThinningType.parse("type3")


class TestPathLoss:
    def test_scalar_returns_float(self):
        model = DEFAULT_PARAMS.path_loss
        out = path_loss(2.0, model)
        assert isinstance(out, float)
        assert out == pytest.approx(model.amplitude / 16.0)

    def test_clamps_below_cutoff(self):
        model = DEFAULT_PARAMS.path_loss
        assert path_loss(0.0, model) == path_loss(model.near_field_cutoff, model)
        assert math.isfinite(path_loss(0.0, model))

    def test_array_shape_and_monotone(self):
        model = DEFAULT_PARAMS.path_loss
        dist = np.linspace(model.near_field_cutoff, 50.0, 64)
        out = path_loss(dist, model)
        assert out.shape == dist.shape
        assert (np.diff(out) <= 0).all()


class TestIntensities:
    def test_type1_matches_closed_form(self, default_params):
        lam = default_params.lambda_p
        expected = lam * math.exp(-lam * V_O_DEFAULT)
        assert intensity_type1(default_params) == pytest.approx(expected, rel=1e-14)

    def test_type2_matches_closed_form(self, default_params):
        lam = default_params.lambda_p
        expected = (1.0 - math.exp(-lam * V_O_DEFAULT)) / V_O_DEFAULT
        assert intensity_type2(default_params) == pytest.approx(expected, rel=1e-12)

    def test_small_density_both_approach_lambda_p(self):
        params = NetworkParams.make(1e-9)
        assert intensity_type1(params) == pytest.approx(1e-9, rel=1e-6)
        assert intensity_type2(params) == pytest.approx(1e-9, rel=1e-6)

    def test_type1_peaks_at_reciprocal_zone_area(self, default_params):
        peak = optimal_lambda_p_type1(default_params)
        assert peak == pytest.approx(1.0 / V_O_DEFAULT, rel=1e-14)
        best = intensity_type1(NetworkParams.make(peak))
        assert best == pytest.approx(1.0 / (math.e * V_O_DEFAULT), rel=1e-14)
        for bump in (0.9, 0.99, 1.01, 1.1):
            assert intensity_type1(NetworkParams.make(peak * bump)) < best

    def test_type2_saturates_at_reciprocal_zone_area(self):
        dense = NetworkParams.make(50.0)
        assert intensity_type2(dense) == pytest.approx(1.0 / V_O_DEFAULT, rel=1e-12)

    @given(st.floats(min_value=1e-6, max_value=20.0))
    def test_type2_dominates_type1(self, lambda_p):
        params = NetworkParams.make(lambda_p)
        assert intensity_type2(params) >= intensity_type1(params)

    def test_type2_monotone_in_density(self):
        lams = np.linspace(0.01, 10.0, 40)
        vals = [intensity_type2(NetworkParams.make(l)) for l in lams]
        # saturates to 1/v_o; strict growth is lost to rounding up there
        assert (np.diff(vals) >= 0).all()
        low = [intensity_type2(NetworkParams.make(l))
               for l in np.linspace(0.01, 1.0, 20)]
        assert (np.diff(low) > 0).all()

    def test_dispatch(self, default_params):
        assert retained_intensity(default_params, ThinningType.TYPE_I) == \
            intensity_type1(default_params)
        assert retained_intensity(default_params, ThinningType.TYPE_II) == \
            intensity_type2(default_params)

    def test_zero_density(self):
        params = NetworkParams.make(0.0)
        assert intensity_type1(params) == 0.0
        assert intensity_type2(params) == 0.0


class TestOrderedPairRetention:
    def test_against_double_integral(self):
        # same integrand, generic quadrature; covers both branches
        for lambda_p in (1e-4, 0.02, 0.3, 1.0, 5.0):
            params = NetworkParams.make(lambda_p)
            v_o = exclusion_zone_area(params).v_o
            grid = np.concatenate([
                np.linspace(v_o, 2.2 * v_o, 20),
                [v_o * (1.0 + 1e-9), 2.0 * v_o]])
            for v in grid:
                expected = ordered_retention_dblquad(float(v), params)
                got = ordered_pair_retention(float(v), params)
                assert got == pytest.approx(expected, abs=1e-12)

    def test_zero_density_is_half(self):
        params = NetworkParams.make(0.0)
        assert ordered_pair_retention(V_O_DEFAULT, params) == 0.5
        arr = ordered_pair_retention(np.array([14.0, 20.0, 30.0]), params)
        assert (arr == 0.5).all()

    def test_shared_zone_closed_form(self, default_params):
        # v = v_o: the lower mark clears nothing extra
        b = default_params.lambda_p * V_O_DEFAULT
        expected = (1.0 - math.exp(-b) * (1.0 + b)) / (b * b)
        got = ordered_pair_retention(V_O_DEFAULT, default_params)
        assert got == pytest.approx(expected, rel=1e-12)

    def test_disjoint_zones_closed_form(self, default_params):
        b = default_params.lambda_p * V_O_DEFAULT
        expected = (1.0 - math.exp(-b)) ** 2 / (2.0 * b * b)
        got = ordered_pair_retention(2.0 * V_O_DEFAULT, default_params)
        assert got == pytest.approx(expected, rel=1e-12)

    def test_values_below_zone_area_clamp(self, default_params):
        at_floor = ordered_pair_retention(V_O_DEFAULT, default_params)
        assert ordered_pair_retention(0.5 * V_O_DEFAULT, default_params) == at_floor

    def test_branch_crossover_continuous(self):
        lambda_p = 0.37
        params = NetworkParams.make(lambda_p)
        v_o = exclusion_zone_area(params).v_o
        below = ordered_pair_retention(v_o + (1.0 - 1e-9) / lambda_p, params)
        above = ordered_pair_retention(v_o + (1.0 + 1e-9) / lambda_p, params)
        assert above == pytest.approx(below, rel=1e-9)

    def test_monotone_nonincreasing_in_area(self, default_params):
        vals = ordered_pair_retention(
            np.linspace(V_O_DEFAULT, 5.0 * V_O_DEFAULT, 50), default_params)
        assert (np.diff(vals) <= 1e-15).all()

    @given(st.floats(min_value=0.0, max_value=6.0),
           st.floats(min_value=1.0, max_value=4.0))
    def test_bounds(self, lambda_p, v_factor):
        params = NetworkParams.make(lambda_p)
        v = v_factor * exclusion_zone_area(params).v_o
        got = ordered_pair_retention(v, params)
        assert 0.0 <= got <= 0.5

    def test_scalar_and_array_agree(self, default_params):
        grid = np.linspace(V_O_DEFAULT, 3.0 * V_O_DEFAULT, 7)
        arr = ordered_pair_retention(grid, default_params)
        for v, a in zip(grid, arr):
            assert ordered_pair_retention(float(v), default_params) == a


class TestPairRetentionKernel:
    # placements picked against the default geometry d=2, r_cs=2, r_tx=1
    INSIDE_CS = (1.5, 0.3, 1.0)           # within carrier sense
    AT_THEIR_RX = (2.5, 0.0, 0.0)         # in the reference pair's receiver disk
    BOTH_RX = (2.5, 0.0, math.pi)         # both receiver conflicts at once
    CLEAR = (2.5, math.pi, math.pi)       # no conflict

    def test_zero_inside_carrier_sense(self, default_params):
        for thinning in ThinningType:
            assert pair_retention_kernel(*self.INSIDE_CS, default_params,
                                         thinning) == 0.0

    def test_one_sided_receiver_conflict(self, default_params):
        r, phi, theta = self.AT_THEIR_RX
        assert pair_retention_kernel(r, phi, theta, default_params,
                                     ThinningType.TYPE_I) == 0.0
        v = pair_union_area(PairConfiguration(r, phi, theta), default_params)
        expected = ordered_pair_retention(v, default_params)
        got = pair_retention_kernel(r, phi, theta, default_params,
                                    ThinningType.TYPE_II)
        assert got == pytest.approx(expected, rel=1e-14)

    def test_two_sided_receiver_conflict(self, default_params):
        for thinning in ThinningType:
            assert pair_retention_kernel(*self.BOTH_RX, default_params,
                                         thinning) == 0.0

    def test_clear_placement(self, default_params):
        r, phi, theta = self.CLEAR
        v = pair_union_area(PairConfiguration(r, phi, theta), default_params)
        got1 = pair_retention_kernel(r, phi, theta, default_params,
                                     ThinningType.TYPE_I)
        assert got1 == pytest.approx(
            math.exp(-default_params.lambda_p * v), rel=1e-14)
        got2 = pair_retention_kernel(r, phi, theta, default_params,
                                     ThinningType.TYPE_II)
        assert got2 == pytest.approx(
            2.0 * ordered_pair_retention(v, default_params), rel=1e-14)

    def test_far_placement_constants(self, default_params):
        r = 2.0 * zone_reach(default_params)
        k1 = pair_retention_kernel(r, 1.0, 2.0, default_params,
                                   ThinningType.TYPE_I)
        assert k1 == pytest.approx(
            math.exp(-2.0 * default_params.lambda_p * V_O_DEFAULT), rel=1e-14)
        k2 = pair_retention_kernel(r, 1.0, 2.0, default_params,
                                   ThinningType.TYPE_II)
        assert k2 == pytest.approx(
            2.0 * ordered_pair_retention(2.0 * V_O_DEFAULT, default_params),
            rel=1e-14)

    @given(st.floats(min_value=0.0, max_value=10.0),
           st.floats(min_value=0.0, max_value=2.0 * math.pi),
           st.floats(min_value=0.0, max_value=2.0 * math.pi),
           st.floats(min_value=0.0, max_value=3.0))
    def test_first_rule_never_exceeds_second(self, r, phi, theta, lambda_p):
        params = NetworkParams.make(lambda_p)
        k1 = pair_retention_kernel(r, phi, theta, params, ThinningType.TYPE_I)
        k2 = pair_retention_kernel(r, phi, theta, params, ThinningType.TYPE_II)
        assert 0.0 <= k1 <= 1.0
        assert 0.0 <= k2 <= 1.0
        assert k1 <= k2 + 1e-15

    def test_broadcasting(self, default_params):
        r = np.linspace(0.5, 8.0, 5).reshape(5, 1)
        phi = np.linspace(0.0, 2.0 * math.pi, 7).reshape(1, 7)
        out = pair_retention_kernel(r, phi, 0.0, default_params,
                                    ThinningType.TYPE_I)
        assert out.shape == (5, 7)
        assert isinstance(
            pair_retention_kernel(3.0, 0.1, 0.2, default_params,
                                  ThinningType.TYPE_I), float)


class TestTailBound:
    def test_positive_and_decreasing(self, default_params):
        bounds = [interference_tail_bound(default_params, ThinningType.TYPE_I, rm)
                  for rm in (10.0, 20.0, 40.0, 80.0)]
        assert all(b > 0.0 for b in bounds)
        assert (np.diff(bounds) < 0).all()

    def test_requires_radius_beyond_receiver(self, default_params):
        with pytest.raises(ValueError, match="r_max"):
            interference_tail_bound(default_params, ThinningType.TYPE_I,
                                    default_params.d)

    def test_zero_density(self):
        params = NetworkParams.make(0.0)
        assert interference_tail_bound(params, ThinningType.TYPE_I, 20.0) == 0.0
        assert interference_tail_bound(params, ThinningType.TYPE_II, 20.0) == 0.0


class TestQuadratureConfig:
    def test_defaults_valid(self):
        cfg = QuadratureConfig()
        assert cfg.r_max == 70.0

    @pytest.mark.parametrize("kwargs", [
        {"r_max": 0.0},
        {"r_max": math.inf},
        {"rel_tol": 0.0},
        {"rel_tol": 1.5},
        {"base_grid": (4, 8)},
        {"base_grid": (1, 8, 8)},
        {"max_levels": 0},
    ])
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ValueError):
            QuadratureConfig(**kwargs)


class TestMeanInterference:
    def test_zero_density_is_zero(self):
        params = NetworkParams.make(0.0)
        result = mean_interference(params, ThinningType.TYPE_I, FAST_QUAD)
        assert result.value == 0.0
        assert result.tail_bound == 0.0

    def test_first_rule_converges(self):
        params = NetworkParams.make(0.02)
        result = mean_interference(params, ThinningType.TYPE_I, FAST_QUAD)
        assert result.value > 0.0
        assert len(result.history) >= 2
        assert abs(result.history[-1] - result.history[-2]) <= \
            FAST_QUAD.rel_tol * abs(result.value)
        assert result.tail_bound == interference_tail_bound(
            params, ThinningType.TYPE_I, FAST_QUAD.r_max)

    def test_second_rule_converges_with_wide_carrier_sense(self):
        # retained interferers stay r_cs - d away from the receiver, so the
        # mean is finite once r_cs exceeds d
        params = NetworkParams.make(0.02, r_cs=2.8)
        result = mean_interference(params, ThinningType.TYPE_II, FAST_QUAD)
        assert result.value > 0.0

    def test_second_rule_default_geometry_diverges(self):
        # with r_cs = d the second rule keeps interferers arbitrarily close
        # to the receiver and the mean blows up; the quadrature must say so
        params = NetworkParams.make(0.02)
        cfg = QuadratureConfig(r_max=12.0, rel_tol=5e-3, base_grid=(8, 16, 16),
                               max_levels=3)
        with pytest.raises(QuadratureConvergenceError) as exc_info:
            mean_interference(params, ThinningType.TYPE_II, cfg)
        history = exc_info.value.history
        assert len(history) == 3
        for older, newer in zip(history, history[1:]):
            assert newer > 2.0 * older

    def test_deterministic(self):
        params = NetworkParams.make(0.05)
        a = mean_interference(params, ThinningType.TYPE_I, FAST_QUAD)
        b = mean_interference(params, ThinningType.TYPE_I, FAST_QUAD)
        assert a.value == b.value
        assert a.history == b.history

    def test_rejects_radius_inside_carrier_sense(self, default_params):
        with pytest.raises(ValueError, match="r_max"):
            mean_interference(default_params, ThinningType.TYPE_I,
                              QuadratureConfig(r_max=1.5))

    def test_small_density_slope_matches_reference(self):
        # as lambda_p -> 0 the mean grows linearly; the slope has an
        # independent two-dimensional quadrature
        lambda_p = 1e-4
        params = NetworkParams.make(lambda_p)
        quad = QuadratureConfig(r_max=12.0, rel_tol=5e-3, base_grid=(8, 16, 16),
                                max_levels=6)
        result = mean_interference(params, ThinningType.TYPE_I, quad)
        slope = small_density_interference_slope(params, quad.r_max)
        assert result.value / lambda_p == pytest.approx(slope, rel=0.02)

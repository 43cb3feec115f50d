import numpy as np
import pytest
from dataclasses import replace

from taxkinetics import (
    ConfigError,
    ContractError,
    FitError,
    IntegrationOptions,
    ModelConfig,
    SweepError,
    build_initial_state,
    compare_compliance_vs_evasion,
    evasion_sweep,
    fit_quadratic_through_origin,
    run_scenario,
    spread_comparison,
    total_evasion_level,
    InitialConditionSpec,
)

from helpers import random_profile

# loose tolerance keeps full integrations affordable in unit tests; the
# acceptance suite runs everything at the production tolerance
FAST = IntegrationOptions(stationarity_tol=1e-6)


class TestInitialConditions:
    def test_uniform_mean_income(self, baseline_config):
        x0 = build_initial_state(InitialConditionSpec(), baseline_config)
        assert x0.shape == (9, 3)
        assert abs(x0.sum() - 1.0) <= 1e-12
        mu = float(baseline_config.incomes @ x0.sum(axis=1))
        assert mu == pytest.approx(50.0, abs=1e-12)

    def test_explicit_accepts_valid_state(self, baseline_config):
        x = np.outer(np.full(9, 1.0 / 9.0), baseline_config.sector_shares)
        spec = InitialConditionSpec(mode="explicit", x0=x)
        assert np.array_equal(build_initial_state(spec, baseline_config), x)

    def test_explicit_rejects_bad_states(self, baseline_config):
        w = baseline_config.sector_shares
        with pytest.raises(ConfigError, match="sum to 1"):
            build_initial_state(
                InitialConditionSpec(mode="explicit", x0=np.outer(np.full(9, 1.0), w)),
                baseline_config)
        lopsided = np.zeros((9, 3))
        lopsided[:, 0] = 1.0 / 9.0  # everything honest: violates sector shares
        with pytest.raises(ConfigError, match="sector_shares proportions"):
            build_initial_state(
                InitialConditionSpec(mode="explicit", x0=lopsided), baseline_config)
        with pytest.raises(ConfigError, match="shape"):
            build_initial_state(
                InitialConditionSpec(mode="explicit", x0=np.full((3, 9), 1 / 27)),
                baseline_config)

    def test_profile_is_normalised_and_spread(self, baseline_config, rng):
        u = 3.0 * random_profile(rng, 9)
        x0 = build_initial_state(
            InitialConditionSpec(mode="class-profile", profile=u), baseline_config)
        assert abs(x0.sum() - 1.0) <= 1e-12
        np.testing.assert_allclose(x0.sum(axis=0), baseline_config.sector_shares,
                                   rtol=0, atol=1e-12)
        per_class_split = x0 / x0.sum(axis=1, keepdims=True)
        expected = np.broadcast_to(baseline_config.sector_shares, (9, 3))
        np.testing.assert_allclose(per_class_split, expected, rtol=0, atol=1e-12)

    @pytest.mark.parametrize("target", [25.0, 50.0, 75.0])
    def test_profile_tilt_hits_target_mean(self, baseline_config, rng, target):
        u = random_profile(rng, 9)
        x0 = build_initial_state(
            InitialConditionSpec(mode="class-profile", profile=u, target_mu=target),
            baseline_config)
        mu = float(baseline_config.incomes @ x0.sum(axis=1))
        assert mu == pytest.approx(target, abs=1e-9)

    def test_unreachable_target_mean(self, baseline_config, rng):
        u = random_profile(rng, 9)
        with pytest.raises(ConfigError, match="not attainable"):
            build_initial_state(
                InitialConditionSpec(mode="class-profile", profile=u, target_mu=95.0),
                baseline_config)

    def test_spec_validation(self):
        with pytest.raises(ConfigError, match="mode"):
            InitialConditionSpec(mode="bogus")
        with pytest.raises(ConfigError, match="requires x0"):
            InitialConditionSpec(mode="explicit")
        with pytest.raises(ConfigError, match="requires a profile"):
            InitialConditionSpec(mode="class-profile")


class TestRunScenario:
    def test_deterministic_repetition(self, baseline_config):
        res1, rep1 = run_scenario(baseline_config, opts=FAST)
        res2, rep2 = run_scenario(baseline_config, opts=FAST)
        assert np.array_equal(res1.state, res2.state)
        assert rep1.gini_total == rep2.gini_total
        assert rep1.income_gap == rep2.income_gap

    def test_stationary_mu_matches_initial(self, baseline_config):
        result, report = run_scenario(baseline_config, opts=FAST)
        assert result.converged
        assert report.mu_total == pytest.approx(50.0, abs=1e-8)


class TestQuadraticFit:
    def test_exact_model_recovery(self):
        etas = np.array([0.05, 0.1, 0.2, 0.3, 0.5])
        pts = [(e, 0.42 * e**2 + 0.62 * e) for e in etas]
        a, b = fit_quadratic_through_origin(pts)
        assert a == pytest.approx(0.42, abs=1e-10)
        assert b == pytest.approx(0.62, abs=1e-10)

    def test_all_zero_gaps(self):
        a, b = fit_quadratic_through_origin([(0.1, 0.0), (0.2, 0.0), (0.3, 0.0)])
        assert a == 0.0 and b == 0.0

    def test_two_points_solve_exactly(self):
        a, b = fit_quadratic_through_origin([(0.1, 0.072), (0.4, 0.45)])
        for e, d in [(0.1, 0.072), (0.4, 0.45)]:
            assert a * e**2 + b * e == pytest.approx(d, abs=1e-12)

    def test_underdetermined(self):
        with pytest.raises(FitError, match="distinct positive"):
            fit_quadratic_through_origin([(0.1, 0.05)])
        with pytest.raises(FitError, match="distinct positive"):
            fit_quadratic_through_origin([(0.1, 0.05), (0.1, 0.06), (0.0, 0.0)])

    def test_invalid_points(self):
        with pytest.raises(ContractError, match="nonnegative"):
            fit_quadratic_through_origin([(-0.1, 0.05), (0.2, 0.1)])
        with pytest.raises(ContractError, match="finite"):
            fit_quadratic_through_origin([(0.1, float("nan")), (0.2, 0.1)])


class TestEvasionSweep:
    def test_zero_level_matches_compliance(self, baseline_config):
        rows = evasion_sweep(baseline_config, [0.0], opts=FAST)
        assert len(rows) == 1 and rows[0].eta == 0.0
        assert rows[0].converged
        assert abs(rows[0].income_gap) <= 1e-6
        compliant = replace(baseline_config, theta_ev=np.ones(3))
        _, rep = run_scenario(compliant, opts=FAST)
        assert rows[0].gini_total == pytest.approx(rep.gini_total, abs=1e-12)

    def test_rows_sorted_and_profiles_graded(self, baseline_config):
        rows = evasion_sweep(baseline_config, [0.3, 0.1], opts=FAST)
        assert [r.eta for r in rows] == [0.1, 0.3]
        assert rows[0].theta_ev == (1.0, 0.9, 0.8)
        assert rows[1].theta_ev == (1.0, 0.7, 0.4)
        for r in rows:
            assert total_evasion_level([1 / 3] * 3, r.theta_ev) == pytest.approx(
                r.eta, abs=1e-12)

    def test_invalid_levels(self, baseline_config):
        with pytest.raises(SweepError, match=r"\[0, 0.5\]"):
            evasion_sweep(baseline_config, [0.6])
        with pytest.raises(SweepError, match=r"\[0, 0.5\]"):
            evasion_sweep(baseline_config, [-0.1])

    def test_requires_three_equal_sectors(self):
        cfg = ModelConfig(incomes=10.0 * np.arange(1, 10), theta_ev=[1.0, 0.5],
                          sector_shares=[0.5, 0.5], tau_min=0.1, tau_max=0.45)
        with pytest.raises(SweepError, match="3 sectors"):
            evasion_sweep(cfg, [0.1])
        skew = ModelConfig(incomes=10.0 * np.arange(1, 10),
                           theta_ev=[1.0, 0.5, 0.25],
                           sector_shares=[0.5, 0.25, 0.25],
                           tau_min=0.1, tau_max=0.45)
        with pytest.raises(SweepError, match="one-third"):
            evasion_sweep(skew, [0.1])


class TestComparisons:
    def test_compliance_against_itself_is_null(self, baseline_config):
        cfg = replace(baseline_config, theta_ev=np.ones(3))
        delta = compare_compliance_vs_evasion(cfg, opts=FAST)
        assert np.array_equal(delta, np.zeros(9))

    def test_differences_sum_to_zero(self, baseline_config):
        delta = compare_compliance_vs_evasion(baseline_config, opts=FAST)
        assert abs(delta.sum()) <= 1e-10
        assert delta.shape == (9,)

    def test_spread_comparison_levels_match(self, baseline_config):
        cmp = spread_comparison(baseline_config, opts=FAST)
        assert cmp.evasion_level == pytest.approx(1.0 / 6.0, abs=1e-12)
        assert total_evasion_level(baseline_config.sector_shares,
                                   cmp.widespread_theta) == pytest.approx(
            total_evasion_level(baseline_config.sector_shares, cmp.concentrated_theta),
            abs=1e-15)
        assert np.isfinite(cmp.widespread_gini) and np.isfinite(cmp.concentrated_gini)
        assert cmp.widespread_sector_gini.shape == (3,)

import numpy as np
import pytest

from taxkinetics import (
    ConfigError,
    ContractError,
    ModelConfig,
    build_effective_tax_table,
    build_payment_matrix,
    build_tables,
    build_tax_rates,
    coefficient_tensor_via_increments,
    default_config,
    direct_coefficient,
    direct_coefficient_tensor,
    payment_increments,
    resolve_tax_rates,
)

from helpers import random_config


class TestTaxRates:
    def test_baseline_endpoints_and_midpoint(self, baseline_config):
        tau = build_tax_rates(baseline_config)
        assert tau[0] == pytest.approx(0.10, abs=1e-15)
        assert tau[-1] == pytest.approx(0.45, abs=1e-15)
        assert tau[4] == pytest.approx(0.275, abs=1e-15)  # class 5 of 9
        assert np.all(np.diff(tau) >= 0)

    def test_flat_tax_degenerate(self):
        cfg = ModelConfig(incomes=[10.0, 20.0, 30.0], theta_ev=[1.0],
                          sector_shares=[1.0], tau_min=0.2, tau_max=0.2)
        assert np.all(build_tax_rates(cfg) == 0.2)

    def test_explicit_mode_bypasses(self):
        tau = np.linspace(0.0, 0.3, 4)
        cfg = ModelConfig(incomes=[10.0, 20, 30, 40], theta_ev=[1.0],
                          sector_shares=[1.0], tax_rates=tau)
        with pytest.raises(ConfigError):
            build_tax_rates(cfg)
        assert np.array_equal(resolve_tax_rates(cfg), tau)


class TestPaymentMatrix:
    def test_baseline_values(self, baseline_config):
        p = build_payment_matrix(baseline_config)
        # poorest never pays, richest never gets paid
        assert np.all(p[0, :] == 0.0)
        assert np.all(p[:, -1] == 0.0)
        assert p[1, 4] == pytest.approx(20.0 / 360.0, abs=1e-15)   # base rule
        assert p[2, 2] == pytest.approx(1.0 / 6.0, abs=1e-15)      # diagonal rule
        assert p[8, 3] == pytest.approx(2.0 / 9.0, abs=1e-15)      # last-row rule

    def test_overlapping_corner_cell(self, baseline_config):
        # richest paying poorest: the pays-the-poorest and richest-pays rules
        # prescribe the same value
        p = build_payment_matrix(baseline_config)
        r = baseline_config.incomes
        assert p[8, 0] == r[0] / (2.0 * r[-1])

    @pytest.mark.parametrize("seed", range(5))
    def test_probability_bounds(self, seed):
        cfg = random_config(np.random.default_rng(seed))
        p = build_payment_matrix(cfg)
        assert p.min() >= 0.0 and p.max() <= 1.0
        assert (p + p.T).max() <= 1.0 + 1e-15


class TestEffectiveTax:
    def test_honest_sector_pays_full_rate(self, baseline_config):
        tau = build_tax_rates(baseline_config)
        theta = build_effective_tax_table(baseline_config, tau)
        assert np.array_equal(theta[:, 0], tau)

    def test_quarter_payer_top_class(self, baseline_config):
        tau = build_tax_rates(baseline_config)
        theta = build_effective_tax_table(baseline_config, tau)
        assert theta[8, 2] == pytest.approx(0.1125, abs=1e-15)

    def test_columns_scale_tau(self, baseline_config):
        tau = build_tax_rates(baseline_config)
        theta = build_effective_tax_table(baseline_config, tau)
        for a, scale in enumerate([1.0, 0.5, 0.25]):
            np.testing.assert_allclose(theta[:, a], scale * tau, rtol=0, atol=1e-15)


class TestDirectCoefficient:
    def test_hand_computed_entry(self, baseline_tables):
        # poorest-class target, source one class above, counterpart in class 2
        # of the honest sector
        val = direct_coefficient(0, 0, 1, 0, 1, 0, baseline_tables)
        expected = (1.0 / 9.0) * (1.0 - 0.14375) / 10.0
        assert val == pytest.approx(expected, abs=1e-15)
        assert val == pytest.approx(0.0095139, abs=1e-7)

    def test_zero_outside_adjacent_classes(self, baseline_tables):
        assert direct_coefficient(0, 0, 3, 0, 1, 0, baseline_tables) == 0.0
        assert direct_coefficient(5, 0, 2, 0, 1, 0, baseline_tables) == 0.0

    def test_zero_across_sectors(self, baseline_tables):
        assert direct_coefficient(2, 0, 3, 1, 1, 0, baseline_tables) == 0.0

    def test_index_validation(self, baseline_tables):
        with pytest.raises(ContractError, match="class index"):
            direct_coefficient(9, 0, 1, 0, 1, 0, baseline_tables)
        with pytest.raises(ContractError, match="sector index"):
            direct_coefficient(0, 3, 1, 0, 1, 0, baseline_tables)

    def test_target_sums_to_one(self, baseline_tables, rng):
        # summing over all target groups for a fixed (source, counterpart)
        # must give exactly 1: only the three adjacent classes contribute
        n, m = baseline_tables.n, baseline_tables.m
        for _ in range(50):
            h, k = rng.integers(0, n, size=2)
            b, g = rng.integers(0, m, size=2)
            total = sum(
                direct_coefficient(j, b, h, b, k, g, baseline_tables)
                for j in range(max(0, h - 1), min(n, h + 2)))
            assert total == pytest.approx(1.0, abs=1e-12)

    def test_values_within_unit_interval(self, baseline_tables):
        tensor = direct_coefficient_tensor(baseline_tables)
        assert tensor.min() >= 0.0 and tensor.max() <= 1.0


class TestTensorRoutes:
    def test_tensor_matches_scalar_exhaustively(self, baseline_tables):
        tensor = direct_coefficient_tensor(baseline_tables)
        n, m = baseline_tables.n, baseline_tables.m
        for j in range(n):
            for a in range(m):
                for h in range(n):
                    for k in range(n):
                        for g in range(m):
                            # only the matching-sector slice can be nonzero
                            expected = direct_coefficient(j, a, h, a, k, g, baseline_tables)
                            assert tensor[j, a, h, a, k, g] == pytest.approx(
                                expected, abs=1e-15)

    def test_cross_sector_entries_vanish(self, baseline_tables):
        tensor = direct_coefficient_tensor(baseline_tables)
        m = baseline_tables.m
        for a in range(m):
            for b in range(m):
                if a != b:
                    assert np.all(tensor[:, a, :, b] == 0.0)

    @pytest.mark.parametrize("seed", range(4))
    def test_increment_route_agrees(self, seed):
        cfg = random_config(np.random.default_rng(seed), n=5, m=2)
        tables = build_tables(cfg)
        a = direct_coefficient_tensor(tables)
        b = coefficient_tensor_via_increments(tables)
        np.testing.assert_allclose(a, b, rtol=0, atol=1e-15)

    def test_increment_route_agrees_baseline(self, baseline_tables):
        a = direct_coefficient_tensor(baseline_tables)
        b = coefficient_tensor_via_increments(baseline_tables)
        np.testing.assert_allclose(a, b, rtol=0, atol=1e-15)

    @pytest.mark.parametrize("seed", range(20))
    def test_row_sums_random_configs(self, seed):
        cfg = random_config(np.random.default_rng(100 + seed))
        tensor = direct_coefficient_tensor(build_tables(cfg))
        sums = tensor.sum(axis=(0, 1))
        np.testing.assert_allclose(sums, 1.0, rtol=0, atol=1e-12)


class TestPaymentIncrements:
    def test_increments_sum_to_zero(self, baseline_tables, rng):
        n, m = baseline_tables.n, baseline_tables.m
        for _ in range(50):
            pc, rc = rng.integers(0, n, size=2)
            ps, rs = rng.integers(0, m, size=2)
            inc = payment_increments(int(pc), int(ps), int(rc), int(rs), baseline_tables)
            assert abs(sum(v for *_, v in inc)) <= 1e-18

    def test_no_increments_when_payer_probability_zero(self, baseline_tables):
        assert payment_increments(0, 0, 3, 0, baseline_tables) == []
        assert payment_increments(2, 0, 8, 0, baseline_tables) == []

    def test_interior_payment_touches_four_groups(self, baseline_tables):
        inc = payment_increments(3, 0, 5, 1, baseline_tables)
        assert len(inc) == 4
        targets = {t for t, *_ in inc}
        assert targets == {(2, 0), (3, 0), (6, 1), (5, 1)}

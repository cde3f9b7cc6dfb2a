import math

import numpy as np
import pytest

from oracles import single_relay_ridge
from relayplace.channel import Exponential, ModifiedPowerLaw, PowerLaw, awgn_capacity
from relayplace.single_relay import (
    LOG2,
    LOG4,
    _link_gains,
    alpha_threshold,
    exponential_branch,
    grid_maximize,
    powerlaw_f1,
    powerlaw_f2,
    powerlaw_root,
    rate_arguments,
    single_relay_rate,
    solve_exponential_node_power,
    solve_modified_powerlaw_node_power,
    solve_powerlaw_node_power,
)

# roots from an independent 4001 x 4001 brute force, kept for regression
FROZEN_ROOTS = {1.5: 0.20429417685566942, 2.0: 0.3611030805286468, 4.0: 0.4844625993315015, 8.0: 0.4995126760961582}


class TestRateFormula:
    def test_relay_at_source_full_split(self):
        assert single_relay_rate(1.0, 0.0, Exponential(0.5)) == pytest.approx(awgn_capacity(1.0))

    def test_no_source_power_to_relay(self):
        assert single_relay_rate(0.0, 0.4, Exponential(1.0), snr=3.0) == 0.0

    def test_equal_terms_at_log4(self):
        lam = math.log(4.0)
        relay, sink = rate_arguments(0.75, *_link_gains(0.0, Exponential(lam), 1.0))
        assert relay == pytest.approx(sink, rel=1e-14)
        assert single_relay_rate(0.75, 0.0, Exponential(lam), snr=2.0) == pytest.approx(awgn_capacity(1.5))

    @pytest.mark.parametrize("alpha, r", [(-0.1, 0.5), (1.1, 0.5), (0.5, -0.1), (0.5, 1.5)])
    def test_range_checks(self, alpha, r):
        with pytest.raises(ValueError):
            single_relay_rate(alpha, r, Exponential(1.0))


class TestExponential:
    def test_low_attenuation(self):
        s = solve_exponential_node_power(0.5)
        assert (s.regime, s.x_star, s.alpha_star, s.R_star) == ("ii", 0.0, 1.0, 0.5)

    def test_log4_split(self):
        s = solve_exponential_node_power(LOG4)
        assert s.x_star == 0.0
        assert s.alpha_star == pytest.approx(0.75, abs=1e-15)

    def test_high_attenuation_location(self):
        s = solve_exponential_node_power(3.0)
        assert s.x_star == pytest.approx(-math.log(2 * math.exp(-3) + math.exp(-1.5)) / 3, rel=1e-15)

    def test_lambda_validation(self):
        with pytest.raises(ValueError):
            solve_exponential_node_power(0.0)

    @pytest.mark.parametrize("lam", [0.2, 0.6, 1.0, 1.3, 1.386, 2.0, 3.0, 6.0, 9.5])
    def test_matches_exact_split_ridge(self, lam):
        x, a, v = single_relay_ridge(lambda r: math.exp(-lam * r), n_x=2001, x_hi=0.5)
        s = solve_exponential_node_power(lam)
        assert s.x_star == pytest.approx(x, abs=1e-3)
        assert s.R_star == pytest.approx(float(awgn_capacity(v)), abs=1e-7)

    def test_grid_oracle_high_attenuation(self):
        x, a, R = grid_maximize(Exponential(3.0), 2001, 2001)
        s = solve_exponential_node_power(3.0)
        assert abs(s.x_star - x) < 2e-3
        assert abs(s.R_star - R) < 1e-3

    @pytest.mark.parametrize("lam", np.linspace(0.05, 10, 40))
    def test_terms_balance_when_split_below_one(self, lam):
        s = solve_exponential_node_power(lam)
        relay, sink = rate_arguments(s.alpha_star, *_link_gains(s.x_star, Exponential(lam), 1.0))
        if s.alpha_star < 1:
            assert relay == pytest.approx(sink, rel=1e-8)
        else:
            assert relay <= sink

    @pytest.mark.parametrize("lam", np.linspace(LOG4 + 1e-3, 10, 30))
    def test_high_branch_split_equals_threshold(self, lam):
        s = solve_exponential_node_power(lam)
        g = _link_gains(s.x_star, Exponential(lam), 1.0)
        assert s.alpha_star == pytest.approx(alpha_threshold(*g), rel=1e-10)

    def test_regime_boundaries_continuous(self):
        for lam, lo, hi in [(LOG2, "ii", "iii"), (LOG4, "iii", "iv")]:
            a, b = exponential_branch(lam, lo), exponential_branch(lam, hi)
            assert abs(a.R_star - b.R_star) <= 1e-10
            assert solve_exponential_node_power(lam).regime == lo

    def test_location_and_split_trends(self):
        lams = np.linspace(LOG4, 10, 100)
        xs = [solve_exponential_node_power(v).x_star for v in lams]
        assert np.all(np.diff(xs) >= 0)
        assert 0.49 < xs[-1] <= 0.5
        a_mid = [solve_exponential_node_power(v).alpha_star for v in np.linspace(LOG2 + 1e-9, LOG4, 100)]
        assert np.all(np.diff(a_mid) < 0)
        a_hi = [solve_exponential_node_power(v).alpha_star for v in lams]
        assert np.all(np.diff(a_hi) > 0)

    def test_location_never_past_midpoint(self):
        for lam in np.linspace(0.01, 30, 300):
            s = solve_exponential_node_power(lam)
            assert 0 <= s.x_star <= 0.5
            assert 0 <= s.alpha_star <= 1


class TestPowerLaw:
    # past eta ~ 8 both sides exceed 1e3 near x = 1/2 and roundoff alone tops 1e-10
    @pytest.mark.parametrize("eta", [1.05, 1.2, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0])
    def test_root_in_interval_with_small_residual(self, eta):
        r = powerlaw_root(eta)
        assert 0 < r.root < 0.5
        assert abs(powerlaw_f1(r.root, eta) - powerlaw_f2(r.root, eta)) < 1e-10

    @pytest.mark.parametrize("eta", sorted(FROZEN_ROOTS))
    def test_frozen_roots(self, eta):
        assert powerlaw_root(eta).root == pytest.approx(FROZEN_ROOTS[eta], abs=1e-12)

    def test_grid_oracle_eta2(self):
        x, a, v = single_relay_ridge(lambda r: r**-2.0, n_x=10001, x_lo=1e-4, x_hi=0.5)
        assert solve_powerlaw_node_power(2.0).x_star == pytest.approx(x, abs=1e-4)

    def test_large_eta_acts_as_repeater(self):
        s = solve_powerlaw_node_power(8.0)
        assert s.x_star > 0.499 and s.alpha_star > 0.99
        prev = solve_powerlaw_node_power(4.0)
        assert s.x_star > prev.x_star and s.alpha_star > prev.alpha_star

    @pytest.mark.parametrize("eta", [1.1, 1.5, 2.0, 4.0, 8.0])
    def test_bracketing_at_every_iterate(self, eta):
        r = powerlaw_root(eta)
        for x in r.iterates:
            h = 1e-7 * min(x, 0.5 - x)
            assert powerlaw_f1(x + h, eta) < powerlaw_f1(x - h, eta)
            assert powerlaw_f2(x + h, eta) > powerlaw_f2(x - h, eta)

    @pytest.mark.parametrize("eta", [12.0, 16.0])
    def test_root_relative_residual_for_steep_laws(self, eta):
        r = powerlaw_root(eta)
        assert 0 < r.root < 0.5
        assert r.residual <= 1e-10 * powerlaw_f2(r.root, eta)

    def test_unresolvable_root_is_reported(self):
        with pytest.raises(RuntimeError):
            powerlaw_root(60.0)

    def test_eta_validation(self):
        with pytest.raises(ValueError):
            solve_powerlaw_node_power(1.0)

    def test_split_balances_terms(self):
        s = solve_powerlaw_node_power(3.0)
        relay, sink = rate_arguments(s.alpha_star, *_link_gains(s.x_star, PowerLaw(3.0), 1.0))
        assert relay == pytest.approx(sink, rel=1e-10)


class TestModifiedPowerLaw:
    def test_floor_when_root_is_small(self):
        assert powerlaw_root(1.2).root < 0.1
        s = solve_modified_powerlaw_node_power(1.2, 0.1)
        assert s.x_star == 0.1

    def test_root_when_past_floor(self):
        s = solve_modified_powerlaw_node_power(3.0, 0.1)
        assert s.x_star == pytest.approx(solve_powerlaw_node_power(3.0).x_star)

    @pytest.mark.parametrize("eta", [1.2, 2.0])
    def test_grid_oracle(self, eta):
        m = ModifiedPowerLaw(eta, 0.1)
        x, a, v = single_relay_ridge(lambda r: float(m.gain(r)), n_x=5001, x_hi=0.5)
        s = solve_modified_powerlaw_node_power(eta, 0.1)
        assert s.x_star == pytest.approx(x, abs=2e-4)
        assert s.R_star == pytest.approx(float(awgn_capacity(v)), abs=1e-6)

    @pytest.mark.parametrize("b", [0.0, 0.5, 0.7])
    def test_b_validation(self, b):
        with pytest.raises(ValueError):
            solve_modified_powerlaw_node_power(2.0, b)

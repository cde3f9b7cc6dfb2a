import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import exp_gain_matrix, gamma_by_products, naive_rate, placement_objective
from relayplace.channel import Exponential, LinePlacement, achievable_rate, awgn_capacity, gain_matrix, received_snr_terms
from relayplace.sum_power import (
    allocate_sum_power,
    dual_certificate,
    net_attenuation,
    relaying_gain,
    single_relay_sum_power,
    split_by_link_gain,
    uniform_attenuation,
    uniform_placement_rate,
)


def random_instance(rng):
    N = int(rng.integers(1, 7))
    lam = float(rng.uniform(0.01, 8.0))
    y = np.sort(rng.uniform(0, 1, N))
    P_T = float(rng.uniform(0.1, 10.0))
    return lam, y, P_T, gain_matrix(LinePlacement(1.0, tuple(y)), Exponential(lam))


@pytest.fixture(scope="module")
def instances():
    rng = np.random.default_rng(2024)
    return [random_instance(rng) for _ in range(200)]


class TestEqualization:
    def test_all_constraints_bind(self, instances):
        for lam, y, P_T, g in instances:
            al = allocate_sum_power(g, P_T)
            terms = received_snr_terms(g, al.P)
            np.testing.assert_allclose(terms, terms[0], rtol=1e-9)
            assert al.gamma.sum() == pytest.approx(P_T, rel=1e-9)
            assert np.all(al.gamma >= 0)

    def test_rate_matches_achievable_rate(self, instances):
        for lam, y, P_T, g in instances[:50]:
            al = allocate_sum_power(g, P_T, 0.3)
            assert al.rate == pytest.approx(achievable_rate(g, al.P, 0.3), rel=1e-10)
            assert al.rate == pytest.approx(naive_rate(g, al.P, 0.3), rel=1e-10)

    def test_link_powers_sum_to_stage_power(self, instances):
        for lam, y, P_T, g in instances[:50]:
            al = allocate_sum_power(g, P_T)
            np.testing.assert_allclose(al.P.sum(axis=0)[1:], al.gamma, rtol=1e-12)

    def test_source_normalized_split_equals_link_gain_split(self, instances):
        for lam, y, P_T, g in instances:
            al = allocate_sum_power(g, P_T)
            np.testing.assert_allclose(split_by_link_gain(g, al.gamma), al.P, rtol=1e-12, atol=1e-15)

    def test_nearer_transmitters_get_more_power(self, instances):
        for lam, y, P_T, g in instances[:50]:
            P = allocate_sum_power(g, P_T).P
            for j in range(1, len(P)):
                assert np.all(np.diff(P[:j, j]) >= -1e-15)

    def test_product_form_oracle(self):
        rng = np.random.default_rng(5)
        for _ in range(40):
            lam, y, P_T, g = random_instance(rng)
            np.testing.assert_allclose(allocate_sum_power(g, P_T).gamma, gamma_by_products(g[0], P_T), rtol=1e-10, atol=1e-14)

    def test_colocated_relay_gets_exactly_zero(self):
        for lam in (0.5, 2.0, 7.0):
            g = gain_matrix(LinePlacement(1.0, (0.3, 0.3, 0.7)), Exponential(lam))
            gamma = allocate_sum_power(g, 1.0).gamma
            # stage 2 decodes at the copy of node 1
            assert gamma[1] == 0.0
            assert gamma[0] > 0 and gamma[2] > 0

    def test_relay_at_sink_makes_last_stage_free(self):
        g = gain_matrix(LinePlacement(1.0, (0.4, 1.0)), Exponential(3.0))
        assert allocate_sum_power(g, 2.0).gamma[-1] == 0.0

    def test_unordered_gains_rejected(self):
        g = np.array(exp_gain_matrix([0.6, 0.2], 1.0, 2.0))
        with pytest.raises(ValueError):
            allocate_sum_power(g, 1.0)

    @pytest.mark.parametrize("P_T, s2", [(0.0, 1.0), (1.0, 0.0)])
    def test_budget_validation(self, P_T, s2):
        g = gain_matrix(LinePlacement(1.0, (0.5,)), Exponential(1.0))
        with pytest.raises(ValueError):
            allocate_sum_power(g, P_T, s2)


class TestDuality:
    def test_zero_gap(self, instances):
        for lam, y, P_T, g in instances:
            c = dual_certificate(g, P_T)
            assert c.zeta == pytest.approx(P_T * c.theta, rel=1e-9)
            np.testing.assert_allclose(c.gamma, allocate_sum_power(g, P_T).gamma, rtol=1e-9, atol=1e-15)

    def test_theta_is_inverse_attenuation(self, instances):
        for lam, y, P_T, g in instances[:50]:
            assert dual_certificate(g, P_T).theta == pytest.approx(1.0 / net_attenuation(g), rel=1e-10)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(0, 1), min_size=1, max_size=6), st.floats(0.05, 8), st.floats(0.1, 10))
    def test_certificate_always_closes(self, ys, lam, P_T):
        g = gain_matrix(LinePlacement(1.0, tuple(sorted(ys))), Exponential(lam))
        c = dual_certificate(g, P_T)
        assert np.all(c.mu >= 0) and np.all(c.gamma >= 0)


class TestNetAttenuation:
    @settings(max_examples=80)
    @given(st.lists(st.floats(0, 1), min_size=1, max_size=6), st.floats(0.05, 8))
    def test_matches_placement_objective(self, ys, lam):
        y = sorted(ys)
        g = gain_matrix(LinePlacement(1.0, tuple(y)), Exponential(lam))
        assert net_attenuation(g) == pytest.approx(placement_objective(y, lam), rel=1e-12)

    def test_no_relay_gain_is_one(self):
        pl = LinePlacement(1.0, ())
        assert relaying_gain(pl, 2.0) == pytest.approx(1.0)

    @pytest.mark.parametrize("lam", [0.1, 1.0, 4.0])
    def test_gain_bounded_by_direct_path(self, lam):
        for y in ([0.5], [0.2, 0.6], [0.1, 0.4, 0.8]):
            G = relaying_gain(LinePlacement(1.0, tuple(y)), lam)
            assert 1.0 <= G <= math.exp(lam)


class TestSingleRelayClosedForm:
    @pytest.mark.parametrize("lam", [0.2, math.log(3.0), 2.0, 5.0])
    def test_rate_consistent_with_allocation(self, lam):
        x, al, rate = single_relay_sum_power(lam, 1.5, 0.5)
        assert rate == pytest.approx(al.rate, rel=1e-12)

    def test_relay_at_source_below_log3(self):
        assert single_relay_sum_power(1.0)[0] == 0.0

    @pytest.mark.parametrize("lam", [0.1, 1.0, 5.0])
    def test_beats_direct_link(self, lam):
        rate = single_relay_sum_power(lam)[2]
        assert rate > awgn_capacity(math.exp(-lam))

    @pytest.mark.parametrize("lam", [1.5, 3.0, 6.0])
    def test_stationary_in_location(self, lam):
        x = single_relay_sum_power(lam)[0]
        for dx in (-1e-3, 1e-3):
            assert placement_objective([x], lam) <= placement_objective([x + dx], lam)


class TestUniformSpacing:
    def test_direct_formula_small_N(self):
        for N in range(0, 5):
            y = [k / (N + 1) for k in range(1, N + 1)]
            assert uniform_attenuation(N, 2.0) == pytest.approx(placement_objective(y, 2.0), rel=1e-12)

    def test_many_relays_bound(self):
        f = uniform_attenuation(2000, 2.0)
        assert 1.0 <= f <= 2.0 - math.exp(-2.0) + 0.01
        R = uniform_placement_rate(2000, 2.0)
        assert awgn_capacity(1.0 / (2.0 - math.exp(-2.0))) - 1e-3 <= R <= awgn_capacity(1.0)

    def test_rate_increases_with_relays(self):
        rates = [uniform_placement_rate(N, 3.0) for N in range(0, 8)]
        assert np.all(np.diff(rates) > 0)

import math

import numpy as np
import pytest

from anchorvote.density import DensityModel, exact_measure_m3, level_set_measure, sample_profile
from anchorvote.errors import InvalidInputError, ResourceLimitError
from anchorvote.rules import RULES, compositions, make_rule, winners
from anchorvote.simplex import AnchorParams, SimplexPoint, anchor_menu
from anchorvote.welfare import (anchored_outcome_distribution, decrease_probability,
                                expected_delta_exact, expected_delta_sw, inc_dec,
                                increase_condition, outcome_distribution, simulate_outcomes,
                                social_welfare)

DIR321 = DensityModel.dirichlet((3, 2, 1))


def brute_nu(rule, p, n):
    """Independent oracle: multinomial sum over all histograms, ties split evenly."""
    nu = np.zeros(rule.m)
    for h in compositions(n, len(p)):
        w = math.factorial(n)
        for x, pr in zip(h, p):
            w = w / math.factorial(x) * pr ** x
        win = winners(rule, h)
        for a in win:
            nu[a] += w / len(win)
    return nu


class TestSocialWelfare:
    def test_examples(self):
        assert social_welfare(0, [(1, 0, 0)]) == 1
        assert social_welfare(1, [(0.5, 0.3, 0.2), (0.1, 0.6, 0.3)]) == pytest.approx(0.9)

    def test_uniform_expectation(self):
        x = sample_profile(DensityModel.uniform(3), 200_000, 3)
        totals = x.reshape(-1, 4, 3).sum(axis=1)[:, 2]
        se = totals.std(ddof=1) / math.sqrt(len(totals))
        assert abs(totals.mean() - 4 / 3) <= 3 * se

    def test_invalid(self):
        with pytest.raises(InvalidInputError):
            social_welfare(5, [(1, 0, 0)])


class TestOutcomeDistribution:
    def test_m2_example(self):
        nu = outcome_distribution(make_rule("plurality", 2), [0.5, 0.5], 2).probs
        assert np.allclose(nu, [0.5, 0.5])

    def test_m3_example(self):
        nu = outcome_distribution(make_rule("plurality", 3), [0.5, 0.3, 0.2], 2).probs
        assert np.allclose(nu, [0.5, 0.3, 0.2], atol=1e-15)

    def test_point_mass(self):
        rule = make_rule("borda", 3)
        p = np.zeros(6)
        p[rule.menu.index("bca")] = 1
        assert np.array_equal(outcome_distribution(rule, p, 5).probs, [0, 1, 0])

    @pytest.mark.parametrize("kind", RULES)
    @pytest.mark.parametrize("n", [1, 4, 7])
    def test_matches_oracle(self, kind, n):
        rule = make_rule(kind, 3)
        p = np.random.default_rng(n).dirichlet(np.ones(len(rule.menu)))
        nu = outcome_distribution(rule, p, n).probs
        assert np.allclose(nu, brute_nu(rule, p, n), atol=1e-12)
        assert nu.sum() == pytest.approx(1, abs=1e-12)

    def test_budget(self):
        with pytest.raises(ResourceLimitError):
            outcome_distribution(make_rule("borda", 4), np.ones(24) / 24, 30, budget=10_000)

    def test_simulation_is_unbiased(self):
        # z-scores of simulated vs exact nu over many seeds: mean ~0, sd ~1
        rule = make_rule("copeland", 3)
        p = np.random.default_rng(1).dirichlet(np.ones(6))
        exact = outcome_distribution(rule, p, 6).probs
        N = 50_000
        sd = np.sqrt(exact * (1 - exact) / N)
        z = np.array([(simulate_outcomes(rule, p, 6, N, s).probs - exact) / sd
                      for s in range(40)])
        assert abs(z.mean()) < 3 / math.sqrt(z.size)
        assert 0.75 < z.std() < 1.25


class TestAnchoredOutcome:
    def test_alpha_zero(self):
        rule = make_rule("plurality", 3)
        params = AnchorParams(SimplexPoint((1, 0, 0)), 0)
        nu = outcome_distribution(rule, exact_measure_m3(rule.menu), 5).probs
        got = anchored_outcome_distribution(rule, DensityModel.uniform(3), params, 5).probs
        assert np.array_equal(nu, got)

    def test_anchor_helps_favourite(self):
        rule = make_rule("plurality", 3)
        params = AnchorParams(SimplexPoint((1, 0, 0)), 0.2)
        got = anchored_outcome_distribution(rule, DensityModel.uniform(3), params, 5).probs
        assert got[0] > 1 / 3

    def test_central_anchor_changes_nothing(self):
        rule = make_rule("borda", 3)
        centre = AnchorParams(SimplexPoint((1 / 3, 1 / 3, 1 / 3)), 0.4)
        got = anchored_outcome_distribution(rule, DensityModel.uniform(3), centre, 5).probs
        assert np.allclose(got, 1 / 3, atol=1e-12)


class TestExpectedDelta:
    def test_alpha_zero(self):
        params = AnchorParams(SimplexPoint((0.5, 0.3, 0.2)), 0)
        for mode in ("exact", "monte-carlo"):
            st = expected_delta_sw(DIR321, make_rule("plurality", 3), params, 5, mode,
                                   samples=20_000, seed=1)
            assert st.expected_delta == 0.0

    def test_uniform_v_is_exactly_zero(self):
        rng = np.random.default_rng(2)
        for _ in range(5):
            w = SimplexPoint(tuple(rng.dirichlet(np.ones(3))))
            st = expected_delta_sw(DensityModel.uniform(3), make_rule("plurality", 3),
                                   AnchorParams(w, 0.3), 5)
            assert st.expected_delta == 0.0

    def test_v_ordered_anchor(self):
        params = AnchorParams(SimplexPoint((0.5, 0.3, 0.2)), 0.2)
        st = expected_delta_sw(DIR321, make_rule("plurality", 3), params, 5,
                               samples=200_000, seed=4)
        assert st.condition
        assert st.expected_delta >= 0

    def test_reversed_anchor(self):
        params = AnchorParams(SimplexPoint((0.2, 0.3, 0.5)), 0.3)
        st = expected_delta_sw(DIR321, make_rule("plurality", 3), params, 5,
                               samples=200_000, seed=4)
        assert st.expected_delta <= 0

    def test_zero_sum(self):
        rng = np.random.default_rng(5)
        for kind in RULES:
            rule = make_rule(kind, 3)
            p = rng.dirichlet(np.ones(len(rule.menu)))
            q = rng.dirichlet(np.ones(len(rule.menu)))
            st = expected_delta_exact(rule, p, q, (0.5, 0.3, 0.2), 5)
            assert abs(st.extra["zero_sum_residual"]) <= 1e-9

    def test_inc_dec_and_flag(self):
        inc, dec = inc_dec([0.3, 0.3, 0.4], [0.5, 0.2, 0.3])
        assert inc == (0,) and dec == (1, 2)
        assert increase_condition((0.5, 0.3, 0.2), inc, dec)
        assert not increase_condition((0.2, 0.3, 0.5), inc, dec)

    def test_exact_identity_differs_from_realised_change(self):
        # n<v, nu_soc - nu> ignores that votes depend on utilities
        params = AnchorParams(SimplexPoint((1, 0, 0)), 0.2)
        rule = make_rule("plurality", 3)
        uniform = DensityModel.uniform(3)
        exact = expected_delta_sw(uniform, rule, params, 5, "exact")
        mc = expected_delta_sw(uniform, rule, params, 5, "monte-carlo", samples=100_000, seed=3)
        assert exact.expected_delta == 0.0
        assert mc.expected_delta < -10 * mc.expected_delta_stderr

    def test_tie_modes_agree(self):
        params = AnchorParams(SimplexPoint((0.5, 0.3, 0.2)), 0.3)
        rule = make_rule("borda", 3)
        a = expected_delta_sw(DIR321, rule, params, 4, "monte-carlo", 60_000, 7)
        b = expected_delta_sw(DIR321, rule, params, 4, "monte-carlo", 60_000, 8,
                              tie_mode="sampled")
        assert abs(a.expected_delta - b.expected_delta) <= 3 * math.hypot(
            a.expected_delta_stderr, b.expected_delta_stderr)

    def test_unknown_mode(self):
        with pytest.raises(InvalidInputError):
            expected_delta_sw(DIR321, make_rule("plurality", 3),
                              AnchorParams(SimplexPoint((1, 0, 0)), 0.1), 3, "magic")


class TestDecreaseProbability:
    def test_alpha_zero(self):
        params = AnchorParams(SimplexPoint((0.5, 0.3, 0.2)), 0)
        st = decrease_probability(DIR321, make_rule("plurality", 3), params, 5, 5000, 1)
        assert st.decrease_probability == 0.0
        assert st.chernoff_bound == 1.0

    @pytest.mark.slow
    def test_reference_configuration(self):
        params = AnchorParams(SimplexPoint((0.5, 0.3, 0.2)), 0.3)
        rule = make_rule("plurality", 3)
        st = decrease_probability(DIR321, rule, params, 7, 100_000, 11)
        ref = decrease_probability(DIR321, rule, params, 7, 1_000_000, 12)
        for est, err in (("decrease_probability", "decrease_stderr"),
                         ("chernoff_bound", "chernoff_stderr")):
            se = math.hypot(getattr(st, err), getattr(ref, err))
            assert abs(getattr(st, est) - getattr(ref, est)) <= 3 * se
        assert st.decrease_probability <= st.chernoff_bound

    def test_vacuous_flag(self):
        params = AnchorParams(SimplexPoint((0.1, 0.1, 0.8)), 0.5)
        st = decrease_probability(DIR321, make_rule("plurality", 3), params, 7, 20_000, 2)
        assert st.vacuous == (st.chernoff_bound >= 1)

    def test_bad_samples(self):
        with pytest.raises(InvalidInputError):
            decrease_probability(DIR321, make_rule("plurality", 3),
                                 AnchorParams(SimplexPoint((1, 0, 0)), 0.1), 3, 0, 0)


class TestEpsUniformOrder:
    def test_order_of_anchored_cells_under_near_uniform(self):
        # for an eps-uniform mixture, cell masses keep the uniform order wherever the
        # uniform gap exceeds 2 eps plus sampling noise
        rng = np.random.default_rng(6)
        mix = DensityModel.mixture([(0.95, DensityModel.uniform(3)),
                                    (0.05, DensityModel.dirichlet((4, 1, 2)))])
        eps = mix.tv_upper_bound()
        menu = make_rule("plurality", 3).menu
        compared = 0
        for _ in range(10):
            w = SimplexPoint(tuple(rng.dirichlet(np.ones(3))))
            img = anchor_menu(menu, AnchorParams(w, float(rng.uniform(0.05, 0.4))))
            unif = exact_measure_m3(img).probs
            mu = level_set_measure(mix, img, 200_000, int(rng.integers(1 << 30)))
            for s in range(3):
                for t in range(3):
                    if unif[s] - unif[t] > 2 * eps + 3 * (mu.stderr[s] + mu.stderr[t]):
                        compared += 1
                        assert w[s] > w[t]
                        assert mu.probs[s] > mu.probs[t]
        assert compared > 5

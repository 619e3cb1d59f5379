from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from anchorvote.errors import InvalidInputError
from anchorvote.simplex import (AnchorParams, SimplexPoint, alignment_predicate, anchor_menu,
                                anchored_utility, distances, nearest_margin, nearest_report,
                                ordinal_menu, phi, plurality_menu, unanchor_menu, veto_menu)


def simplex_points(m):
    return (st.lists(st.integers(0, 1000), min_size=m, max_size=m)
            .filter(lambda xs: sum(xs) > 0)
            .map(lambda xs: SimplexPoint(tuple(F(x, sum(xs)) for x in xs))))


class TestSimplexPoint:
    def test_rejects_bad_sum(self):
        with pytest.raises(InvalidInputError, match="sum"):
            SimplexPoint((0.5, 0.3, 0.1))

    def test_rejects_negative(self):
        with pytest.raises(InvalidInputError):
            SimplexPoint((1.2, -0.2, 0.0))

    def test_rejects_nan(self):
        with pytest.raises(InvalidInputError):
            SimplexPoint((float("nan"), 0.5, 0.5))

    def test_alpha_range(self):
        w = SimplexPoint((1, 0, 0))
        for bad in (-0.1, 1.0, 1.5):
            with pytest.raises(InvalidInputError):
                AnchorParams(w, bad)


class TestMenus:
    def test_ordinal_order_and_normalisation(self):
        menu = ordinal_menu(3)
        assert menu.labels == ("abc", "acb", "bac", "bca", "cab", "cba")
        assert menu.reports[0] == (F(2, 3), F(1, 3), F(0))
        assert menu.scores[0] == (2, 1, 0)

    def test_raw_scores_flag(self):
        assert ordinal_menu(3, normalize=False).reports[0] == (2, 1, 0)

    def test_veto(self):
        menu = veto_menu(3)
        assert menu.labels[0] == "veto-a"
        assert menu.reports[0] == (F(0), F(1, 2), F(1, 2))

    def test_sizes(self):
        assert len(ordinal_menu(4)) == 24
        assert len(plurality_menu(5)) == 5


class TestNearestReport:
    def test_plurality_example(self):
        assert nearest_report((F(1, 5), F(1, 2), F(3, 10)), plurality_menu(3)) == {1}

    def test_on_report(self):
        assert nearest_report((1, 0, 0), plurality_menu(3)) == {0}

    def test_centre_is_three_way_tie(self):
        assert nearest_report((F(1, 3),) * 3, plurality_menu(3)) == {0, 1, 2}

    def test_borda_example_against_hand_distances(self):
        menu = ordinal_menu(3)
        u = (0.5, 0.3, 0.2)
        # independent distance computation
        d = {lab: sum((x - y) ** 2 for x, y in zip(u, np.array(r, float) / 3))
             for lab, r in zip(menu.labels, [(2, 1, 0), (2, 0, 1), (1, 2, 0),
                                             (0, 2, 1), (1, 0, 2), (0, 1, 2)])}
        assert min(d, key=d.get) == "abc"
        assert nearest_report(u, menu) == {menu.index("abc")}

    @settings(max_examples=200, deadline=None)
    @given(simplex_points(3))
    def test_result_attains_minimum(self, u):
        for menu in (plurality_menu(3), ordinal_menu(3), veto_menu(3)):
            d = distances(u, menu)
            best = nearest_report(u, menu)
            assert best
            assert all(abs(d[i] - min(d)) <= 1e-10 for i in best)

    def test_margin(self):
        idx, gap = nearest_margin((0.6, 0.3, 0.1), plurality_menu(3))
        assert idx == 0 and gap > 0


class TestAnchoring:
    def test_worked_example_exact(self):
        u = (F(1, 2), F(9, 20), F(1, 20))
        params = AnchorParams(SimplexPoint((F(0), F(1, 2), F(1, 2))), F(1, 10))
        au = anchored_utility(u, params)
        assert au.coords == (F(45, 100), F(455, 1000), F(95, 1000))
        menu = plurality_menu(3)
        assert nearest_report(u, menu) == {0}
        assert nearest_report(au, menu) == {1}

    def test_alpha_zero_identity(self):
        u = SimplexPoint((0.2, 0.5, 0.3))
        params = AnchorParams(SimplexPoint((1, 0, 0)), 0)
        assert anchored_utility(u, params).coords == u.coords
        menu = ordinal_menu(3)
        assert anchor_menu(menu, params).reports == menu.reports

    def test_fixed_point(self):
        w = SimplexPoint((F(1, 5), F(3, 10), F(1, 2)))
        for a in (F(1, 10), F(1, 2), F(9, 10)):
            assert anchored_utility(w, AnchorParams(w, a)).coords == w.coords

    def test_phi_example(self):
        params = AnchorParams(SimplexPoint((F(0), F(1, 2), F(1, 2))), F(1, 10))
        assert phi((1, 0, 0), params) == (F(10, 9), F(-1, 18), F(-1, 18))

    def test_images_may_leave_simplex(self):
        params = AnchorParams(SimplexPoint((F(0), F(1, 2), F(1, 2))), F(1, 10))
        img = anchor_menu(plurality_menu(3), params)
        assert min(img.reports[0]) < 0
        assert img.scores == plurality_menu(3).scores

    @settings(max_examples=100, deadline=None)
    @given(simplex_points(3), st.fractions(0, F(19, 20)))
    def test_phi_bijective_exact(self, w, alpha):
        params = AnchorParams(w, alpha)
        menu = ordinal_menu(3)
        assert unanchor_menu(anchor_menu(menu, params)).reports == menu.reports

    @settings(max_examples=200, deadline=None)
    @given(simplex_points(4), simplex_points(4), st.fractions(0, F(19, 20)))
    def test_anchored_utility_stays_on_simplex(self, u, w, alpha):
        out = anchored_utility(u, AnchorParams(w, alpha))
        assert isinstance(out, SimplexPoint)
        assert sum(out) == 1

    @settings(max_examples=300, deadline=None)
    @given(simplex_points(3), simplex_points(3), st.floats(0, 0.95),
           st.sampled_from(["plurality", "ordinal", "veto"]))
    def test_equivalence_property(self, u, w, alpha, kind):
        menu = {"plurality": plurality_menu, "ordinal": ordinal_menu, "veto": veto_menu}[kind](3)
        params = AnchorParams(w, alpha)
        i1, g1 = nearest_margin(anchored_utility(u, params), menu)
        i2, g2 = nearest_margin(u, anchor_menu(menu, params))
        assume(g1 > 1e-8 and g2 > 1e-8)
        assert i1 == i2


class TestAlignment:
    def test_true_case(self):
        params = AnchorParams(SimplexPoint((1, 0, 0)), 0.3)
        assert alignment_predicate((1, 0, 0), (0, 1, 0), (0.6, 0.4, 0), params)

    def test_false_case(self):
        params = AnchorParams(SimplexPoint((1, 0, 0)), 0.3)
        assert not alignment_predicate((1, 0, 0), (0, 1, 0), (0.4, 0.6, 0), params)

    @settings(max_examples=300, deadline=None)
    @given(simplex_points(3), simplex_points(3), st.fractions(F(1, 100), F(9, 10)),
           st.integers(0, 5), st.integers(0, 5))
    def test_move_up_exact(self, u, w, alpha, i, j):
        menu = ordinal_menu(3)
        s, t = menu.reports[i], menu.reports[j]
        params = AnchorParams(w, alpha)
        assume(alignment_predicate(s, t, u, params))
        ds = sum((x - y) ** 2 for x, y in zip(u, phi(s, params)))
        dt = sum((x - y) ** 2 for x, y in zip(u, phi(t, params)))
        assert ds <= dt

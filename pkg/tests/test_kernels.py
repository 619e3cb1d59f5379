import os
import subprocess
import sys

import numpy as np
import pytest

from anchorvote import kernels
from anchorvote.rules import make_rule
from anchorvote.simplex import TIE_TOL, AnchorParams, SimplexPoint, anchor_menu, ordinal_menu

BACKENDS = kernels.backends()
needs_ext = pytest.mark.skipif("cython" not in BACKENDS, reason="extension not built")


@needs_ext
class TestBackendsAgree:
    @pytest.mark.parametrize("kind", ["plurality", "borda", "veto"])
    @pytest.mark.parametrize("n", [1, 2, 5, 9])
    def test_positional_outcome(self, kind, n):
        rule = make_rule(kind, 3)
        p = np.random.default_rng(n).dirichlet(np.ones(len(rule.menu)))
        p[0] = 0.0
        p /= p.sum()
        a, la = BACKENDS["cython"].positional_outcome(rule.menu.score_matrix, p, n)
        b, lb = BACKENDS["python"].positional_outcome(rule.menu.score_matrix, p, n)
        assert la == lb
        assert np.allclose(a, b, atol=1e-14)

    def test_level_set_counts(self):
        rng = np.random.default_rng(0)
        U = rng.dirichlet(np.ones(3), size=20_000)
        # add exact ties: points on the centre are equidistant from every ordinal report
        U[:50] = 1 / 3
        menu = anchor_menu(ordinal_menu(3), AnchorParams(SimplexPoint((0.5, 0.3, 0.2)), 0.2))
        a = BACKENDS["cython"].level_set_counts(U, menu.array, TIE_TOL)
        b = BACKENDS["python"].level_set_counts(U, menu.array, TIE_TOL)
        for x, y in zip(a, b):
            assert np.allclose(x, y, atol=1e-9)
        assert a[0].sum() == pytest.approx(len(U))

    def test_nearest_index(self):
        rng = np.random.default_rng(1)
        U = rng.dirichlet(np.ones(4), size=10_000)
        U[:20] = 0.25
        reports = ordinal_menu(4).array
        v = rng.random(len(U))
        a = BACKENDS["cython"].nearest_index(U, reports, TIE_TOL, v)
        b = BACKENDS["python"].nearest_index(U, reports, TIE_TOL, v)
        assert np.array_equal(a, b)


class TestPythonBackend:
    def test_tie_credit_is_fractional(self):
        U = np.full((1, 3), 1 / 3)
        reports = make_rule("plurality", 3).menu.array
        s1, s2 = BACKENDS["python"].level_set_counts(U, reports, TIE_TOL)
        assert np.allclose(s1, 1 / 3) and np.allclose(s2, 1 / 9)

    def test_tie_uniform_picks_each(self):
        U = np.full((3, 3), 1 / 3)
        reports = make_rule("plurality", 3).menu.array
        got = BACKENDS["python"].nearest_index(U, reports, TIE_TOL, np.array([0.1, 0.5, 0.9]))
        assert list(got) == [0, 1, 2]

    def test_env_forces_fallback(self):
        env = dict(os.environ, ANCHORVOTE_PURE_PYTHON="1")
        out = subprocess.run([sys.executable, "-c",
                              "from anchorvote import kernels; print(kernels.BACKEND)"],
                             env=env, capture_output=True, text=True, check=True)
        assert out.stdout.strip() == "python"


def test_selected_backend_is_known():
    assert kernels.BACKEND in BACKENDS

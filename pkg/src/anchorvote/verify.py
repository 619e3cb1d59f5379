"""Numerical checks of the model's claims, shared by the CLI and the test suite.

Every check is deterministic given ``seed`` and returns a :class:`CheckResult`
whose ``detail`` holds only reproducible numbers (no timings), so two runs with
the same seed serialise to identical JSON.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable

import numpy as np

from anchorvote.bounds import binom_tails, rule_bounds, tightening_report, topk_slack, w_topk_condition
from anchorvote.density import DensityModel, exact_measure_m3, level_set_measure, report_distribution
from anchorvote.rules import make_rule, q_set, winners
from anchorvote.simplex import (AnchorParams, ReportMenu, SimplexPoint, alignment_predicate,
                                anchor_menu, anchored_utility, inner, nearest_margin,
                                nearest_report, ordinal_menu, phi, plurality_menu, veto_menu)
from anchorvote.welfare import (decrease_probability, expected_delta_exact, outcome_distribution,
                                simulate_outcomes)


@dataclass(frozen=True)
class Scale:
    name: str
    equivalence_tuples: int = 10_000
    alignment_tuples: int = 100_000
    symmetry_samples: int = 1_000_000
    order_draws: int = 20
    sandwich_ns: tuple = (3, 5, 7, 9)
    sandwich_draws: int = 10
    binom_max_n: int = 50
    grid_m3: int = 140
    grid_m4: int = 40
    simulation_elections: int = 100_000
    simulation_draws: int = 3
    welfare_configs: int = 10
    welfare_samples: int = 200_000
    decrease_configs: int = 10
    decrease_samples: int = 100_000
    property_draws: int = 200


FULL = Scale("full")
QUICK = Scale("quick", equivalence_tuples=2_000, alignment_tuples=10_000,
              symmetry_samples=200_000, order_draws=10, sandwich_ns=(3, 5),
              sandwich_draws=3, binom_max_n=20, grid_m3=140, grid_m4=20,
              simulation_elections=20_000, simulation_draws=1, welfare_configs=3,
              welfare_samples=50_000, decrease_configs=3, decrease_samples=20_000,
              property_draws=50)


@dataclass
class CheckResult:
    name: str
    criterion: str
    passed: bool
    detail: dict = field(default_factory=dict)
    witness: dict | None = None

    def to_dict(self) -> dict:
        return {"name": self.name, "criterion": self.criterion, "passed": self.passed,
                "detail": self.detail, "witness": self.witness}


def _float_menu(menu: ReportMenu) -> ReportMenu:
    return replace(menu, reports=tuple(tuple(float(x) for x in r) for r in menu.reports))


def _menus(m: int) -> list:
    out = [plurality_menu(m), veto_menu(m)]
    if m <= 4:
        out.append(ordinal_menu(m))
    return [_float_menu(x) for x in out]


def _simplex(rng, m):
    return rng.dirichlet(np.ones(m))


def check_equivalence(scale: Scale = FULL, seed: int = 0,
                      transform: Callable = anchor_menu) -> CheckResult:
    """Anchored voting under R agrees with standard voting under phi(R)."""
    rng = np.random.default_rng(seed)
    menus = {m: _menus(m) for m in (3, 4, 5)}
    checked = skipped = 0
    while checked < scale.equivalence_tuples:
        m = int(rng.integers(3, 6))
        menu = menus[m][int(rng.integers(len(menus[m])))]
        u = _simplex(rng, m)
        params = AnchorParams(SimplexPoint(tuple(_simplex(rng, m))), float(rng.uniform(0, 0.95)))
        i1, gap1 = nearest_margin(anchored_utility(u, params), menu)
        i2, gap2 = nearest_margin(u, transform(menu, params))
        if gap1 <= 1e-8 or gap2 <= 1e-8:
            skipped += 1
            continue
        checked += 1
        if menu.labels[i1] != transform(menu, params).labels[i2]:
            return CheckResult("theorem1_equivalence", "1", False,
                               {"checked": checked, "skipped": skipped},
                               {"u": list(map(float, u)), "w": list(map(float, params.w)),
                                "alpha": params.alpha, "menu": menu.kind, "m": m,
                                "anchored_vote": menu.labels[i1],
                                "transformed_vote": menu.labels[i2]})
    return CheckResult("theorem1_equivalence", "1", True,
                       {"checked": checked, "skipped_small_margin": skipped, "agreement": 1.0})


def check_worked_example(scale: Scale = FULL, seed: int = 0) -> CheckResult:
    u = SimplexPoint((Fraction(1, 2), Fraction(9, 20), Fraction(1, 20)))
    params = AnchorParams((Fraction(0), Fraction(1, 2), Fraction(1, 2)), Fraction(1, 10))
    shifted = anchored_utility(u, params)
    menu = plurality_menu(3)
    before = nearest_report(u, menu)
    after = nearest_report(shifted, menu)
    ok = (shifted.coords == (Fraction(45, 100), Fraction(455, 1000), Fraction(95, 1000))
          and before == {0} and after == {1})
    return CheckResult("worked_example", "2", ok,
                       {"anchored": [str(x) for x in shifted.coords],
                        "vote_before": sorted(menu.labels[i] for i in before),
                        "vote_after": sorted(menu.labels[i] for i in after)})


def check_alignment(scale: Scale = FULL, seed: int = 0) -> CheckResult:
    """If u and w both weakly prefer s to t, phi keeps u closer to phi(s)."""
    rng = np.random.default_rng(seed)
    menus = {m: _menus(m) for m in (3, 4, 5)}
    held = drawn = 0
    worst = -math.inf
    while held < scale.alignment_tuples:
        drawn += 1
        m = int(rng.integers(3, 6))
        menu = menus[m][int(rng.integers(len(menus[m])))]
        i, j = rng.choice(len(menu), size=2, replace=False)
        s, t = menu.reports[i], menu.reports[j]
        u = tuple(_simplex(rng, m))
        params = AnchorParams(SimplexPoint(tuple(_simplex(rng, m))), float(rng.uniform(0, 0.95)))
        if not alignment_predicate(s, t, u, params):
            continue
        held += 1
        gap = math.dist(u, phi(s, params)) - math.dist(u, phi(t, params))
        worst = max(worst, gap)
        if gap > 1e-12:
            return CheckResult("move_up_alignment", "3", False, {"held": held},
                               {"s": list(s), "t": list(t), "u": list(u),
                                "w": list(params.w), "alpha": params.alpha, "excess": gap})
    return CheckResult("move_up_alignment", "3", True,
                       {"hypothesis_held": held, "drawn": drawn, "violations": 0,
                        "max_excess": worst})


def check_symmetry(scale: Scale = FULL, seed: int = 0) -> CheckResult:
    uniform = DensityModel.uniform(3)
    detail = {}
    ok = True
    for menu, target in ((plurality_menu(3), Fraction(1, 3)), (ordinal_menu(3), Fraction(1, 6))):
        exact = exact_measure_m3(menu)
        exact_ok = all(abs(float(x) - float(target)) <= 1e-12 for x in exact.exact)
        mc = level_set_measure(uniform, menu, scale.symmetry_samples, seed)
        z = np.abs(mc.probs - float(target)) / mc.stderr
        mc_ok = bool(np.all(z <= 3))
        ok &= exact_ok and mc_ok
        detail[menu.kind] = {"exact": [str(x) for x in exact.exact],
                             "monte_carlo": [float(x) for x in mc.probs],
                             "max_z": float(z.max())}
    return CheckResult("level_set_symmetry", "4", ok, detail)


def check_preserve_order(scale: Scale = FULL, seed: int = 0) -> CheckResult:
    """The cell of argmax_r <w, r> grows strictly under anchoring (m = 3, uniform)."""
    rng = np.random.default_rng(seed)
    margins = []
    for menu in (plurality_menu(3), ordinal_menu(3)):
        base = exact_measure_m3(menu).probs
        done = 0
        while done < scale.order_draws:
            w = SimplexPoint(tuple(_simplex(rng, 3)))
            dots = [inner(w, r) for r in menu.reports]
            best = max(dots)
            if sum(abs(d - best) < 1e-9 for d in dots) > 1:
                continue
            star = dots.index(best)
            params = AnchorParams(w, float(rng.uniform(0.01, 0.9)))
            grown = exact_measure_m3(anchor_menu(menu, params)).probs[star]
            margin = float(grown - base[star])
            margins.append(margin)
            done += 1
            if margin <= 0:
                return CheckResult("preserve_order_w", "5", False, {"draws": len(margins)},
                                   {"menu": menu.kind, "w": list(w), "alpha": params.alpha,
                                    "margin": margin})
    return CheckResult("preserve_order_w", "5", True,
                       {"draws": len(margins), "min_margin": min(margins)})


def check_sandwich(scale: Scale = FULL, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    count = 0
    tightest = math.inf
    for kind in ("plurality", "borda"):
        rule = make_rule(kind, 3)
        for n in scale.sandwich_ns:
            for _ in range(scale.sandwich_draws):
                p = rng.dirichlet(np.ones(len(rule.menu)))
                nu = outcome_distribution(rule, p, n).probs
                for a in range(3):
                    b = rule_bounds(rule, p, n, a)
                    count += 1
                    slack = min(nu[a] - b.lower, b.upper - nu[a])
                    tightest = min(tightest, slack)
                    if slack < -1e-12:
                        return CheckResult("bound_sandwich", "6", False, {"checked": count},
                                           {"rule": kind, "n": n, "p": list(map(float, p)),
                                            "a": a, "lower": b.lower, "nu": float(nu[a]),
                                            "upper": b.upper})
    return CheckResult("bound_sandwich", "6", True,
                       {"checked": count, "violations": 0, "min_slack": float(tightest)})


def check_binom_monotone(scale: Scale = FULL, seed: int = 0) -> CheckResult:
    grid = [Fraction(i, 20) for i in range(21)]
    pairs = 0
    for n in range(1, scale.binom_max_n + 1):
        tails = [binom_tails(n, p) for p in grid]
        for i, j in itertools.combinations(range(len(grid)), 2):
            for k in range(1, n + 1):
                pairs += 1
                if tails[i][k] > tails[j][k]:
                    return CheckResult("binom_monotonicity", "7", False, {"compared": pairs},
                                       {"n": n, "p": str(grid[i]), "q": str(grid[j]), "k": k})
    return CheckResult("binom_monotonicity", "7", True, {"compared": pairs, "violations": 0})


def barycentric_grid(m: int, denom: int):
    """All integer vectors of length ``m`` summing to ``denom``."""
    if m == 1:
        yield (denom,)
        return
    for first in range(denom, -1, -1):
        for rest in barycentric_grid(m - 1, denom - first):
            yield (first,) + rest


def brute_topk(w, menu: ReportMenu) -> bool:
    """Sort reports by <w, r> and compare the top (m-1)! with those topped by argmax w."""
    m = menu.m
    a = max(range(m), key=lambda i: (w[i], -i))
    k = math.factorial(m - 1)
    order = sorted(range(len(menu)), key=lambda i: -inner(w, menu.scores[i]))
    q = {i for i, r in enumerate(menu.rankings) if r[0] == a}
    return set(order[:k]) == q


def check_topk(scale: Scale = FULL, seed: int = 0) -> CheckResult:
    detail = {}
    for m, denom in ((3, scale.grid_m3), (4, scale.grid_m4)):
        menu = ordinal_menu(m, normalize=False)
        total = agree = 0
        for counts in barycentric_grid(m, denom):
            w = SimplexPoint(tuple(Fraction(c, denom) for c in counts))
            if abs(topk_slack(w)) <= 1e-9:
                continue
            total += 1
            if w_topk_condition(w) == brute_topk(w, menu):
                agree += 1
            else:
                return CheckResult("topk_condition", "8", False, detail,
                                   {"m": m, "w": [str(x) for x in w]})
        detail[f"m{m}"] = {"grid_points": math.comb(denom + m - 1, m - 1),
                           "off_boundary": total, "agree": agree}
    # at m = 3 the condition reduces to w_[2] <= 1/3
    edge_ok = True
    for counts in barycentric_grid(3, scale.grid_m3):
        w = SimplexPoint(tuple(Fraction(c, scale.grid_m3) for c in counts))
        second = sorted(w, reverse=True)[1]
        if w_topk_condition(w) != (second <= Fraction(1, 3)):
            edge_ok = False
            break
    detail["m3_matches_second_le_third"] = edge_ok
    return CheckResult("topk_condition", "8", edge_ok, detail)


def check_tighten(scale: Scale = FULL, seed: int = 0) -> CheckResult:
    rule = make_rule("plurality", 3)
    w = (1.0, 0.0, 0.0)
    p = exact_measure_m3(rule.menu)
    rows = []
    ok = True
    for alpha in (0.05, 0.1, 0.2):
        q = exact_measure_m3(anchor_menu(rule.menu, AnchorParams(w, alpha)))
        for n in (3, 5, 9, 15):
            rep = tightening_report(p, q, rule, n, w)
            strict = rep.anchored.lower > rep.standard.lower
            ok &= strict
            rows.append({"alpha": alpha, "n": n, "lower_p": rep.standard.lower,
                         "lower_q": rep.anchored.lower, "q_a": float(q.probs[0])})
    return CheckResult("tighten_lower_bound", "9", bool(ok), {"rows": rows})


def check_simulation(scale: Scale = FULL, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    n = 6
    for kind in ("plurality", "borda", "veto", "copeland", "irv"):
        rule = make_rule(kind, 3)
        for d in range(scale.simulation_draws):
            p = rng.dirichlet(np.ones(len(rule.menu)))
            exact = outcome_distribution(rule, p, n).probs
            sim = simulate_outcomes(rule, p, n, scale.simulation_elections,
                                    int(rng.integers(2 ** 31)))
            sigma = np.sqrt(exact * (1 - exact) / scale.simulation_elections)
            z = np.abs(sim.probs - exact) / np.where(sigma > 0, sigma, 1)
            worst = max(worst, float(z.max()))
            if np.any(z > 3):
                return CheckResult("exact_vs_simulation", "10", False, {"max_z": worst},
                                   {"rule": kind, "p": list(map(float, p)),
                                    "exact": list(map(float, exact)),
                                    "simulated": list(map(float, sim.probs))})
    return CheckResult("exact_vs_simulation", "10", True, {"max_z": worst})


def _ordered_like(rng, v):
    w = np.sort(rng.dirichlet(np.ones(len(v))))
    out = np.empty_like(w)
    out[np.argsort(v)] = w
    return out


def check_welfare_increase(scale: Scale = FULL, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    rows = []
    tried = 0
    while len(rows) < scale.welfare_configs:
        tried += 1
        theta = rng.uniform(0.5, 5.0, size=3)
        density = DensityModel.dirichlet(theta)
        v = density.mean()
        w = _ordered_like(rng, v)
        params = AnchorParams(SimplexPoint(tuple(w / w.sum())), float(rng.uniform(0.05, 0.5)))
        rule = make_rule(("plurality", "borda")[tried % 2], 3)
        n = int(rng.choice([3, 5, 7]))
        sub = int(rng.integers(2 ** 31))
        p = level_set_measure(density, rule.menu, scale.welfare_samples, sub)
        q = level_set_measure(density, anchor_menu(rule.menu, params), scale.welfare_samples, sub)
        stats = expected_delta_exact(rule, p, q, v, n)
        if not stats.condition:
            continue
        rows.append({"rule": rule.kind, "n": n, "theta": list(map(float, theta)),
                     "alpha": params.alpha, "expected_delta": stats.expected_delta})
        if stats.expected_delta < -1e-9:
            return CheckResult("welfare_increase", "11", False, {"rows": rows}, rows[-1])
    rule = make_rule("plurality", 3)
    uniform = DensityModel.uniform(3)
    params = AnchorParams(SimplexPoint(tuple(_simplex(rng, 3))), 0.3)
    p = exact_measure_m3(rule.menu)
    q = exact_measure_m3(anchor_menu(rule.menu, params))
    zero = expected_delta_exact(rule, p, q, uniform.mean(), 5).expected_delta
    return CheckResult("welfare_increase", "11", zero == 0.0,
                       {"rows": rows, "tried": tried, "uniform_v_delta": zero})


def check_decrease_bound(scale: Scale = FULL, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(scale.decrease_configs):
        density = DensityModel.dirichlet(rng.uniform(0.5, 5.0, size=3))
        rule = make_rule(str(rng.choice(["plurality", "borda", "veto", "copeland", "irv"])), 3)
        params = AnchorParams(SimplexPoint(tuple(_simplex(rng, 3))), float(rng.uniform(0.05, 0.6)))
        st = decrease_probability(density, rule, params, 7, scale.decrease_samples,
                                  int(rng.integers(2 ** 31)))
        pooled = math.hypot(st.decrease_stderr, st.chernoff_stderr)
        row = {"rule": rule.kind, "alpha": params.alpha,
               "pr_decrease": st.decrease_probability, "bound": st.chernoff_bound,
               "pooled_se": pooled}
        rows.append(row)
        if st.decrease_probability > st.chernoff_bound + 3 * pooled:
            return CheckResult("decrease_bound", "12", False, {"rows": rows}, row)
    return CheckResult("decrease_bound", "12", True, {"rows": rows, "violations": 0})


def check_zero_sum(scale: Scale = FULL, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(scale.property_draws // 10 + 1):
        rule = make_rule(str(rng.choice(["plurality", "borda", "veto", "copeland", "irv"])), 3)
        p = rng.dirichlet(np.ones(len(rule.menu)))
        q = rng.dirichlet(np.ones(len(rule.menu)))
        n = int(rng.integers(1, 7))
        diff = outcome_distribution(rule, q, n).probs - outcome_distribution(rule, p, n).probs
        worst = max(worst, abs(float(diff.sum())))
    return CheckResult("zero_sum_shift", "invariant", worst <= 1e-9, {"max_residual": worst})


def check_majority(scale: Scale = FULL, seed: int = 0) -> CheckResult:
    rng = np.random.default_rng(seed)
    checked = 0
    for _ in range(scale.property_draws * 5):
        kind = str(rng.choice(["plurality", "copeland", "irv"]))
        m = int(rng.integers(2, 5))
        rule = make_rule(kind, m)
        h = rng.integers(0, 5, size=len(rule.menu))
        n = int(h.sum())
        if n == 0:
            continue
        for a in range(m):
            if 2 * sum(h[i] for i in q_set(rule, a)) > n:
                checked += 1
                if winners(rule, h) != {a}:
                    return CheckResult("majority_criterion", "invariant", False, {},
                                       {"rule": kind, "h": h.tolist(), "a": a})
    return CheckResult("majority_criterion", "invariant", True, {"majority_histograms": checked})


def check_order_uniform(scale: Scale = FULL, seed: int = 0) -> CheckResult:
    """Plurality under uniform mu: anchored cell sizes follow the order of <w, r>.

    Checked as ``<w,s> >= <w,t>  =>  m(cell_s) >= m(cell_t)``; the converse
    fails when large alpha empties both cells.
    """
    rng = np.random.default_rng(seed)
    menu = plurality_menu(3)
    empty_ties = 0
    for _ in range(scale.property_draws // 5 + 1):
        w = SimplexPoint(tuple(_simplex(rng, 3)))
        params = AnchorParams(w, float(rng.uniform(0.01, 0.9)))
        areas = exact_measure_m3(anchor_menu(menu, params)).probs
        for s, t in itertools.permutations(range(3), 2):
            if inner(w, menu.reports[s]) >= inner(w, menu.reports[t]):
                if areas[s] < areas[t] - 1e-12:
                    return CheckResult("preserve_order_uniform", "invariant", False, {},
                                       {"w": [float(x) for x in w], "alpha": params.alpha,
                                        "s": s, "t": t})
            elif areas[s] == areas[t] == 0:
                empty_ties += 1
    return CheckResult("preserve_order_uniform", "invariant", True,
                       {"draws": scale.property_draws // 5 + 1, "menu": "plurality",
                        "empty_cell_ties": empty_ties})


def check_borda_mass(scale: Scale = FULL, seed: int = 0) -> CheckResult:
    """Rankings topped by argmax w gain mass whenever the top-k condition holds."""
    rng = np.random.default_rng(seed)
    rule = make_rule("borda", 3)
    p = exact_measure_m3(rule.menu)
    held = 0
    for _ in range(scale.property_draws):
        w = SimplexPoint(tuple(_simplex(rng, 3)))
        if not w_topk_condition(w):
            continue
        held += 1
        a = int(np.argmax(w.array))
        q = exact_measure_m3(anchor_menu(rule.menu, AnchorParams(w, float(rng.uniform(0.01, 0.9)))))
        idx = q_set(rule, a)
        if q.mass(idx) < p.mass(idx) - 1e-12:
            return CheckResult("borda_top_mass", "invariant", False, {},
                               {"w": list(w), "q": q.mass(idx), "p": p.mass(idx)})
    return CheckResult("borda_top_mass", "invariant", True, {"condition_held": held})


CHECKS = {
    "theorem1_equivalence": check_equivalence,
    "worked_example": check_worked_example,
    "move_up_alignment": check_alignment,
    "level_set_symmetry": check_symmetry,
    "preserve_order_w": check_preserve_order,
    "bound_sandwich": check_sandwich,
    "binom_monotonicity": check_binom_monotone,
    "topk_condition": check_topk,
    "tighten_lower_bound": check_tighten,
    "exact_vs_simulation": check_simulation,
    "welfare_increase": check_welfare_increase,
    "decrease_bound": check_decrease_bound,
    "zero_sum_shift": check_zero_sum,
    "majority_criterion": check_majority,
    "preserve_order_uniform": check_order_uniform,
    "borda_top_mass": check_borda_mass,
}


def run_all(scale: Scale = FULL, seed: int = 0, only=None, log=None,
            overrides: dict | None = None) -> list:
    """Run every check; ``overrides`` swaps in replacement callables by name."""
    results = []
    for k, (name, fn) in enumerate(CHECKS.items()):
        if only and name not in only:
            continue
        fn = (overrides or {}).get(name, fn)
        res = fn(scale, seed + 1000 * k)
        if log:
            log(res)
        results.append(res)
    return results


def sign_flipped_anchor_menu(menu: ReportMenu, params: AnchorParams) -> ReportMenu:
    """Deliberately wrong transform ``(r + alpha w) / (1 - alpha)``, for harness tests."""
    a = params.alpha
    images = tuple(tuple((x + a * y) / (1 - a) for x, y in zip(r, params.w))
                   for r in menu.reports)
    return replace(menu, reports=images, anchor=params)

"""Outcome distributions and social-welfare change under anchoring."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from anchorvote import kernels
from anchorvote.density import DensityModel, ReportDistribution, report_distribution
from anchorvote.errors import InvalidInputError
from anchorvote.rules import (DEFAULT_BUDGET, VotingRule, check_budget, compositions,
                              winner_masks, winners)
from anchorvote.simplex import TIE_TOL, AnchorParams, anchor_menu

DEFAULT_SAMPLES = 200_000
PROFILE_CHUNK = 20_000


@dataclass
class OutcomeDistribution:
    """Probability that each alternative is selected, ties split evenly."""

    probs: np.ndarray
    provenance: str
    samples: int | None = None
    stderr: np.ndarray | None = None

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)
        if np.any(self.probs < -1e-12):
            raise InvalidInputError("negative outcome probability")
        if self.provenance == "exact-enumeration" and abs(self.probs.sum() - 1) > 1e-9:
            raise InvalidInputError(f"outcome probabilities sum to {self.probs.sum()}")

    def __getitem__(self, a):
        return self.probs[a]

    def to_dict(self) -> dict:
        d = {"provenance": self.provenance, "samples": self.samples,
             "probs": [float(x) for x in self.probs]}
        if self.stderr is not None:
            d["stderr"] = [float(x) for x in self.stderr]
        return d


@dataclass
class WelfareStats:
    expected_delta: float
    expected_delta_stderr: float = 0.0
    decrease_probability: float | None = None
    decrease_stderr: float | None = None
    chernoff_bound: float | None = None
    chernoff_stderr: float | None = None
    inc: tuple = ()
    dec: tuple = ()
    condition: bool | None = None
    vacuous: bool | None = None
    mode: str = "exact"
    v: tuple = ()
    nu: tuple = ()
    nu_soc: tuple = ()
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {}
        for k, val in self.__dict__.items():
            if isinstance(val, tuple):
                val = [float(x) if not isinstance(x, (int, np.integer)) else int(x) for x in val]
            elif isinstance(val, (np.floating, np.bool_)):
                val = val.item()
            out[k] = val
        return out


def social_welfare(a: int, profile) -> float:
    """Total utility ``sum_i u_i[a]`` of alternative ``a``."""
    U = np.asarray(profile, dtype=float)
    if U.ndim != 2 or U.shape[0] == 0:
        raise InvalidInputError("profile must be a non-empty (n, m) array")
    if not 0 <= a < U.shape[1]:
        raise InvalidInputError(f"alternative {a} out of range")
    return math.fsum(U[:, a])


def _probs(p):
    return np.asarray(p.probs if isinstance(p, ReportDistribution) else p, dtype=float)


def _multinomial_weight(h, p) -> float:
    coef = math.factorial(sum(h))
    for x in h:
        coef //= math.factorial(x)
    w = float(coef)
    for x, pr in zip(h, p):
        if x:
            w *= pr ** x
    return w


def outcome_distribution(rule: VotingRule, p, n: int,
                         budget: int = DEFAULT_BUDGET) -> OutcomeDistribution:
    """Exact win probabilities for ``n`` i.i.d. votes distributed as ``p``."""
    probs = _probs(p)
    if len(probs) != len(rule.menu):
        raise InvalidInputError("p must have one entry per menu report")
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    check_budget(n, len(probs), budget)
    if rule.positional:
        nu, _ = kernels.positional_outcome(rule.menu.score_matrix, probs, n)
    else:
        acc = [[] for _ in range(rule.m)]
        support = [i for i, x in enumerate(probs) if x > 0]
        for hs in compositions(n, len(support)):
            h = [0] * len(probs)
            for i, x in zip(support, hs):
                h[i] = x
            wt = _multinomial_weight(h, probs)
            win = winners(rule, h)
            for a in win:
                acc[a].append(wt / len(win))
        nu = np.array([math.fsum(x) for x in acc])
    return OutcomeDistribution(nu, "exact-enumeration")


def simulate_outcomes(rule: VotingRule, p, n: int, elections: int,
                      seed: int) -> OutcomeDistribution:
    """Monte Carlo win frequencies: draw histograms, pick a random tied winner."""
    probs = _probs(p)
    rng = np.random.default_rng(seed)
    H = rng.multinomial(n, probs / probs.sum(), size=elections)
    masks = winner_masks(rule, H)
    ties = masks.sum(axis=1)
    pick = np.minimum((rng.random(elections) * ties).astype(np.int64), ties - 1)
    rank = np.cumsum(masks, axis=1) - 1
    chosen = (masks & (rank == pick[:, None])).argmax(axis=1)
    freq = np.bincount(chosen, minlength=rule.m) / elections
    return OutcomeDistribution(freq, "monte-carlo", elections,
                               np.sqrt(freq * (1 - freq) / elections))


def anchored_distributions(rule: VotingRule, density: DensityModel, params: AnchorParams,
                           samples: int, seed: int, method: str = "auto"):
    """``(p, q)`` estimated with common random numbers (same seed)."""
    p = report_distribution(density, rule.menu, samples, seed, method)
    q = report_distribution(density, anchor_menu(rule.menu, params), samples, seed, method)
    return p, q


def anchored_outcome_distribution(rule: VotingRule, density: DensityModel,
                                  params: AnchorParams, n: int,
                                  samples: int = DEFAULT_SAMPLES, seed: int = 0,
                                  method: str = "auto",
                                  budget: int = DEFAULT_BUDGET) -> OutcomeDistribution:
    """Win probabilities when every voter votes with anchored preferences."""
    q = report_distribution(density, anchor_menu(rule.menu, params), samples, seed, method)
    return outcome_distribution(rule, q, n, budget)


def _centered_gain(v, diff) -> float:
    # both outcome distributions sum to one, so shifting v by its mean is free
    vc = np.asarray(v, dtype=float) - np.mean(v)
    return math.fsum(vc * diff)


def inc_dec(nu, nu_soc):
    diff = np.asarray(nu_soc) - np.asarray(nu)
    inc = tuple(int(a) for a in np.flatnonzero(diff >= 0))
    dec = tuple(int(a) for a in np.flatnonzero(diff < 0))
    return inc, dec


def increase_condition(v, inc, dec) -> bool:
    if not inc or not dec:
        return True
    return max(v[a] for a in dec) <= min(v[a] for a in inc)


def expected_delta_exact(rule: VotingRule, p, q, v, n: int,
                         budget: int = DEFAULT_BUDGET) -> WelfareStats:
    nu = outcome_distribution(rule, p, n, budget).probs
    nu_soc = outcome_distribution(rule, q, n, budget).probs
    inc, dec = inc_dec(nu, nu_soc)
    v = np.asarray(v, dtype=float)
    delta = n * _centered_gain(v, nu_soc - nu)
    return WelfareStats(delta, 0.0, inc=inc, dec=dec,
                        condition=increase_condition(v, inc, dec), mode="exact",
                        v=tuple(v), nu=tuple(nu), nu_soc=tuple(nu_soc),
                        extra={"zero_sum_residual": float(np.sum(nu_soc - nu))})


def _profile_deltas(rule: VotingRule, density: DensityModel, params: AnchorParams,
                    n: int, profiles: int, seed: int, tie_mode: str = "expected"):
    """Per-profile welfare change; generator of chunk arrays."""
    rng = np.random.default_rng(seed)
    reports = rule.menu.array
    w = params.w.array
    R = len(rule.menu)
    done = 0
    while done < profiles:
        k = min(PROFILE_CHUNK, profiles - done)
        U = density.sample(k * n, rng)
        A = (1 - params.alpha) * U + params.alpha * w
        votes = kernels.nearest_index(U, reports, TIE_TOL, rng.random(k * n))
        avotes = kernels.nearest_index(A, reports, TIE_TOL, rng.random(k * n))
        offsets = np.repeat(np.arange(k) * R, n)
        H = np.bincount(votes + offsets, minlength=k * R).reshape(k, R)
        Ha = np.bincount(avotes + offsets, minlength=k * R).reshape(k, R)
        totals = U.reshape(k, n, -1).sum(axis=1)
        sw = _welfare(winner_masks(rule, H), totals, tie_mode, rng)
        swa = _welfare(winner_masks(rule, Ha), totals, tie_mode, rng)
        done += k
        yield swa - sw


def _welfare(masks, totals, tie_mode, rng):
    if tie_mode == "expected":
        return (masks * totals).sum(axis=1) / masks.sum(axis=1)
    if tie_mode != "sampled":
        raise InvalidInputError(f"unknown tie mode {tie_mode!r}")
    ties = masks.sum(axis=1)
    pick = np.minimum((rng.random(len(masks)) * ties).astype(np.int64), ties - 1)
    rank = np.cumsum(masks, axis=1) - 1
    chosen = (masks & (rank == pick[:, None])).argmax(axis=1)
    return totals[np.arange(len(masks)), chosen]


def _mean_se(chunks):
    x = np.concatenate(list(chunks))
    mean = math.fsum(x) / len(x)
    se = float(np.std(x, ddof=1) / math.sqrt(len(x))) if len(x) > 1 else 0.0
    return mean, se, x


def expected_delta_sw(density: DensityModel, rule: VotingRule, params: AnchorParams, n: int,
                      mode: str = "exact", samples: int = DEFAULT_SAMPLES, seed: int = 0,
                      method: str = "auto", budget: int = DEFAULT_BUDGET,
                      tie_mode: str = "expected") -> WelfareStats:
    """Expected change in total welfare when voters anchor towards ``w``.

    ``exact`` enumerates histograms under estimated report distributions and
    returns ``n <v, nu_soc - nu>``; ``monte-carlo`` simulates whole elections.

    The two are different quantities. ``n <v, nu>`` treats each voter's
    utility as independent of the winner, but votes are functions of
    utilities, so ``E[sw]`` generally differs from it (uniform density,
    plurality, m=3, n=5: about 2.13 against 5/3). Use ``monte-carlo`` for the
    realised welfare change.
    """
    v = density.mean()
    if mode == "exact":
        p, q = anchored_distributions(rule, density, params, samples, seed, method)
        stats = expected_delta_exact(rule, p, q, v, n, budget)
        stats.extra["report_provenance"] = p.provenance
        return stats
    if mode != "monte-carlo":
        raise InvalidInputError(f"unknown mode {mode!r}")
    mean, se, _ = _mean_se(_profile_deltas(rule, density, params, n, samples, seed, tie_mode))
    return WelfareStats(mean, se, mode="monte-carlo", v=tuple(v),
                        extra={"profiles": samples, "tie_mode": tie_mode})


def decrease_probability(density: DensityModel, rule: VotingRule, params: AnchorParams,
                         n: int, samples: int = 100_000, seed: int = 0,
                         tie_mode: str = "expected") -> WelfareStats:
    """Monte Carlo ``Pr[delta_sw < 0]`` alongside the bound ``E[exp(-delta_sw)]``."""
    if samples < 1:
        raise InvalidInputError("samples must be >= 1")
    mean, se, x = _mean_se(_profile_deltas(rule, density, params, n, samples, seed, tie_mode))
    neg = (x < 0).astype(float)
    ex = np.exp(-x)
    k = len(x)
    p_dec = float(neg.mean())
    bound = math.fsum(ex) / k
    p_se = float(neg.std(ddof=1) / math.sqrt(k)) if k > 1 else 0.0
    b_se = float(ex.std(ddof=1) / math.sqrt(k)) if k > 1 else 0.0
    return WelfareStats(mean, se, decrease_probability=p_dec, decrease_stderr=p_se,
                        chernoff_bound=bound, chernoff_stderr=b_se,
                        vacuous=bool(bound >= 1), mode="monte-carlo", v=tuple(density.mean()),
                        extra={"profiles": k, "tie_mode": tie_mode})

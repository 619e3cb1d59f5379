"""Binomial win-probability bounds and how anchoring moves them.

Thresholds such as ``n/2`` or ``n(m-1)/m`` are compared against integer
success counts exactly. ``Fraction`` probabilities give exact ``Fraction``
results; floats are summed with ``math.fsum`` (log-space terms above
``LOG_SPACE_N`` trials).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

from anchorvote.density import ReportDistribution
from anchorvote.errors import InvalidInputError, UnsupportedError
from anchorvote.rules import VotingRule, majority_threshold, q_set
from anchorvote.simplex import AnchorParams, as_point

LOG_SPACE_N = 1000
MODES = (">", ">=", "=")


@lru_cache(maxsize=4096)
def binom_pmf(n: int, p) -> tuple:
    if not 0 <= p <= 1:
        raise InvalidInputError(f"probability must be in [0, 1], got {p}")
    if isinstance(p, Rational):
        p = Fraction(p)
        return tuple(math.comb(n, j) * p ** j * (1 - p) ** (n - j) for j in range(n + 1))
    p = float(p)
    if p == 0.0 or p == 1.0:
        hit = 0 if p == 0.0 else n
        return tuple(1.0 if j == hit else 0.0 for j in range(n + 1))
    if n <= LOG_SPACE_N:
        return tuple(math.comb(n, j) * p ** j * (1 - p) ** (n - j) for j in range(n + 1))
    lp, lq, lf = math.log(p), math.log1p(-p), math.lgamma(n + 1)
    return tuple(math.exp(lf - math.lgamma(j + 1) - math.lgamma(n - j + 1) + j * lp + (n - j) * lq)
                 for j in range(n + 1))


def _first_index(n: int, k, mode: str) -> tuple[int, int]:
    """Range ``[lo, hi]`` of success counts selected by ``mode`` against ``k``."""
    k = Fraction(k)
    if mode == ">":
        return math.floor(k) + 1, n
    if mode == ">=":
        return math.ceil(k), n
    if mode == "=":
        if k.denominator != 1:
            return 1, 0
        return int(k), int(k)
    raise InvalidInputError(f"mode must be one of {MODES}, got {mode!r}")


def _total(terms, exact):
    if exact:
        return sum(terms, Fraction(0))
    return min(max(math.fsum(terms), 0.0), 1.0)


def binom_tail(n: int, p, k, mode: str = ">"):
    """``Pr[Binom(n, p) > k]`` (or ``>= k`` / ``= k``) by exact summation."""
    if n < 0:
        raise InvalidInputError("n must be >= 0")
    pmf = binom_pmf(n, p)
    lo, hi = _first_index(n, k, mode)
    lo = max(lo, 0)
    return _total(pmf[lo:hi + 1], isinstance(p, Rational))


def binom_tails(n: int, p) -> list:
    """``[Pr[Binom(n, p) >= k] for k in 0..n]`` from one pmf pass."""
    pmf = binom_pmf(n, p)
    exact = isinstance(p, Rational)
    out = []
    for k in range(n + 1):
        out.append(_total(pmf[k:], exact))
    return out


@dataclass
class BoundReport:
    alternative: int
    lower: float
    upper: float
    regime: str
    n: int
    threshold: Fraction
    probs: dict = field(default_factory=dict)
    notes: tuple = ()

    def __post_init__(self):
        self.upper = min(self.upper, 1.0)
        if not (-1e-12 <= self.lower <= self.upper + 1e-12):
            raise InvalidInputError(f"inconsistent bounds {self.lower} > {self.upper}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lower"] = float(self.lower)
        d["upper"] = float(self.upper)
        d["threshold"] = str(self.threshold)
        d["probs"] = {k: float(v) for k, v in self.probs.items()}
        d["notes"] = list(self.notes)
        return d


def _probs(p):
    if isinstance(p, ReportDistribution):
        return list(p.probs)
    return list(p)


def plurality_bounds(p, n: int, a: int, regime: str = "standard",
                     variant: str = "proof") -> BoundReport:
    """Win-probability bounds for plurality.

    ``variant="proof"`` uses ``Pr[X > n/2] + Pr[X = n/2]/2`` as the lower
    bound; ``"statement"`` uses ``Pr[X >= n/2]``. The first upper-bound term
    is ``C(n, ceil(n/m)) p_a^ceil(n/m)``: the winner needs at least
    ``ceil(n/m)`` votes.
    """
    probs = _probs(p)
    m = len(probs)
    if not 0 <= a < m:
        raise InvalidInputError(f"alternative {a} out of range")
    half = Fraction(n, 2)
    pa = probs[a]
    if variant == "proof":
        lower = binom_tail(n, pa, half, ">") + binom_tail(n, pa, half, "=") / 2
    elif variant == "statement":
        lower = binom_tail(n, pa, half, ">=")
    else:
        raise InvalidInputError(f"unknown variant {variant!r}")
    k = math.ceil(Fraction(n, m))
    union = math.comb(n, k) * pa ** k
    others = 1 - sum(binom_tail(n, probs[b], half, ">") for b in range(m) if b != a)
    upper = min(union, others, 1)
    notes = ("p_a^{n/m} term read as C(n, ceil(n/m)) * p_a**ceil(n/m)",)
    return BoundReport(a, float(lower), float(upper), regime, n, half,
                       {"p_a": float(pa)}, notes)


def q_mass(rule: VotingRule, p, a: int):
    probs = _probs(p)
    idx = q_set(rule, a)
    if all(isinstance(probs[i], Rational) for i in idx):
        return sum((Fraction(probs[i]) for i in idx), Fraction(0))
    return math.fsum(float(probs[i]) for i in idx)


def borda_bounds(p, n: int, m: int, a: int, rule: VotingRule | None = None,
                 regime: str = "standard") -> BoundReport:
    """Borda bounds from the mass of rankings that put ``a`` first."""
    from anchorvote.rules import make_rule

    rule = rule or make_rule("borda", m)
    if rule.kind != "borda":
        raise InvalidInputError("borda_bounds needs a Borda rule")
    c = majority_threshold(rule, n)
    masses = [q_mass(rule, p, b) for b in range(m)]
    lower = binom_tail(n, masses[a], c, ">")
    upper = 1 - sum(binom_tail(n, masses[b], c, ">") for b in range(m) if b != a)
    notes = ("||sum_{r in Q_a} p_r||_{c(n)} read as the scalar sum",)
    return BoundReport(a, float(lower), float(max(upper, 0)), regime, n, c,
                       {"p_Q_a": float(masses[a])}, notes)


def majority_bounds(rule: VotingRule, p, n: int, a: int,
                    regime: str = "standard") -> BoundReport:
    """Copeland/IRV: plurality-style bounds on first-preference mass, ``c(n) = n/2``.

    Only the majority-criterion terms are used; the ``ceil(n/m)`` upper-bound
    term does not carry over to these rules.
    """
    if rule.kind not in ("copeland", "irv"):
        raise InvalidInputError("majority_bounds handles copeland and irv")
    c = majority_threshold(rule, n)
    masses = [q_mass(rule, p, b) for b in range(rule.m)]
    lower = binom_tail(n, masses[a], c, ">")
    upper = 1 - sum(binom_tail(n, masses[b], c, ">") for b in range(rule.m) if b != a)
    return BoundReport(a, float(lower), float(max(upper, 0)), regime, n, c,
                       {"p_Q_a": float(masses[a])}, ("extension of the majority-criterion bound",))


def rule_bounds(rule: VotingRule, p, n: int, a: int, regime: str = "standard") -> BoundReport:
    if rule.kind == "plurality":
        return plurality_bounds(p, n, a, regime)
    if rule.kind == "borda":
        return borda_bounds(p, n, rule.m, a, rule, regime)
    if rule.kind in ("copeland", "irv"):
        return majority_bounds(rule, p, n, a, regime)
    raise UnsupportedError(
        "veto does not lend itself to (nontrivial) sufficient conditions; no bounds available")


def topk_slack(w) -> float:
    """``w_[1] - (m-1) w_[2] - sum_{i>=3} (m - 2i + 2) w_[i]`` (sorted descending)."""
    ws = sorted(as_point(w), reverse=True)
    m = len(ws)
    rhs = (m - 1) * ws[1] + sum((m - 2 * i + 2) * ws[i - 1] for i in range(3, m + 1))
    return ws[0] - rhs


def w_topk_condition(w, m: int | None = None) -> bool:
    """Does ``w`` favour its top alternative enough for Borda's bound to tighten?

    When true, the rankings topped by ``argmax w`` are exactly the ``(m-1)!``
    reports with the largest ``<w, r>``.
    """
    w = as_point(w)
    if m is not None and m != w.m:
        raise InvalidInputError("m does not match w")
    return topk_slack(w) >= 0


def _verdict(before, after, up_word, down_word, tol=1e-12):
    if abs(after - before) <= tol:
        return "unchanged"
    return up_word if after > before else down_word


@dataclass
class TighteningReport:
    rule: str
    alternative: int
    n: int
    standard: BoundReport
    anchored: BoundReport
    assumption_holds: bool
    others_decrease: bool
    lower_verdict: str
    upper_verdict: str

    def to_dict(self) -> dict:
        return {
            "rule": self.rule,
            "alternative": self.alternative,
            "n": self.n,
            "lower_p": self.standard.lower,
            "lower_q": self.anchored.lower,
            "upper_p": self.standard.upper,
            "upper_q": self.anchored.upper,
            "assumption_holds": self.assumption_holds,
            "others_decrease": self.others_decrease,
            "lower_verdict": self.lower_verdict,
            "upper_verdict": self.upper_verdict,
        }


def tightening_report(p, q, rule: VotingRule, n: int, w) -> TighteningReport:
    """Compare bounds for ``argmax w`` under standard (p) and anchored (q) reports."""
    a = AnchorParams(as_point(w), 0).top_alternative
    std = rule_bounds(rule, p, n, a, "standard")
    anc = rule_bounds(rule, q, n, a, "anchored")
    assumption = w_topk_condition(w) if rule.kind == "borda" else True
    others = all(q_mass(rule, p, b) >= q_mass(rule, q, b) - 1e-15
                 for b in range(rule.m) if b != a)
    lower_v = _verdict(std.lower, anc.lower, "tightened", "weakened")
    upper_v = _verdict(std.upper, anc.upper, "loosened", "tightened")
    if not assumption:
        lower_v = "hypothesis-not-met"
    if not others:
        upper_v = "hypothesis-not-met"
    return TighteningReport(rule.kind, a, n, std, anc, assumption, others, lower_v, upper_v)

"""Voting rules over report histograms.

A histogram is a sequence of non-negative vote counts, one per menu report.
Rules return the full set of tied winners; random tie-breaking only happens
downstream, as a ``1/|f(h)|`` weight.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from anchorvote.errors import InvalidInputError, ResourceLimitError, UnsupportedError
from anchorvote.simplex import ReportMenu, ordinal_menu, plurality_menu, veto_menu

POSITIONAL = ("plurality", "borda", "veto")
MAJORITARIAN = ("plurality", "copeland", "irv")
RULES = ("plurality", "borda", "veto", "copeland", "irv")
DEFAULT_BUDGET = 10 ** 7

Histogram = tuple


@dataclass(frozen=True)
class VotingRule:
    kind: str
    menu: ReportMenu

    def __post_init__(self):
        if self.kind not in RULES:
            raise InvalidInputError(f"unknown rule {self.kind!r}")
        expected = {"plurality": "plurality", "veto": "veto"}.get(self.kind, "ordinal")
        if self.menu.kind != expected:
            raise InvalidInputError(f"rule {self.kind} needs a {expected} menu, got {self.menu.kind}")

    @property
    def m(self) -> int:
        return self.menu.m

    @property
    def positional(self) -> bool:
        return self.kind in POSITIONAL

    def with_menu(self, menu: ReportMenu) -> "VotingRule":
        return VotingRule(self.kind, menu)


def make_rule(kind: str, m: int, normalize: bool = True) -> VotingRule:
    if kind not in RULES:
        raise InvalidInputError(f"unknown rule {kind!r}; choose from {', '.join(RULES)}")
    if m < 2:
        raise InvalidInputError("need at least two alternatives")
    if kind == "plurality":
        return VotingRule(kind, plurality_menu(m))
    if kind == "veto":
        return VotingRule(kind, veto_menu(m, normalize))
    return VotingRule(kind, ordinal_menu(m, normalize))


def _check_histogram(rule: VotingRule, h: Sequence[int]) -> tuple:
    h = tuple(int(x) for x in h)
    if len(h) != len(rule.menu):
        raise InvalidInputError(f"histogram has {len(h)} entries, menu has {len(rule.menu)}")
    if any(x < 0 for x in h):
        raise InvalidInputError("histogram counts must be non-negative")
    if sum(h) == 0:
        raise InvalidInputError("histogram is empty")
    return h


def _argmax_set(values) -> frozenset:
    best = max(values)
    return frozenset(a for a, v in enumerate(values) if v == best)


def positional_scores(rule: VotingRule, h) -> list:
    m = rule.m
    return [sum(c * s[a] for c, s in zip(h, rule.menu.scores)) for a in range(m)]


def copeland_scores(rankings, h, m) -> list:
    pos = [[0] * m for _ in rankings]
    for k, ranking in enumerate(rankings):
        for p, alt in enumerate(ranking):
            pos[k][alt] = p
    score = [Fraction(0)] * m
    for a in range(m):
        for b in range(a + 1, m):
            a_over_b = sum(c for c, pk in zip(h, pos) if pk[a] < pk[b])
            b_over_a = sum(h) - a_over_b
            if a_over_b > b_over_a:
                score[a] += 1
            elif b_over_a > a_over_b:
                score[b] += 1
            else:
                score[a] += Fraction(1, 2)
                score[b] += Fraction(1, 2)
    return score


def irv_winners(rankings, h, m) -> frozenset:
    """Instant runoff; elimination ties drop the lowest-indexed alternative.

    When every surviving alternative has the same first-preference count the
    survivors are returned as a tie.
    """
    alive = set(range(m))
    n = sum(h)
    while True:
        tally = {a: 0 for a in alive}
        for c, ranking in zip(h, rankings):
            if c:
                top = next(a for a in ranking if a in alive)
                tally[top] += c
        for a, t in tally.items():
            if 2 * t > n:
                return frozenset({a})
        if len(set(tally.values())) == 1:
            return frozenset(alive)
        low = min(tally.values())
        alive.remove(min(a for a in alive if tally[a] == low))


def winners(rule: VotingRule, h: Sequence[int]) -> frozenset:
    """Set of winning alternatives (0-based) for histogram ``h``."""
    h = _check_histogram(rule, h)
    if rule.positional:
        return _argmax_set(positional_scores(rule, h))
    if rule.kind == "copeland":
        return _argmax_set(copeland_scores(rule.menu.rankings, h, rule.m))
    return irv_winners(rule.menu.rankings, h, rule.m)


def q_set(rule: VotingRule, a: int) -> frozenset:
    """Reports whose submission counts towards ``a``'s sufficient condition."""
    if not 0 <= a < rule.m:
        raise InvalidInputError(f"alternative {a} out of range")
    if rule.kind == "veto":
        raise UnsupportedError("veto has no non-trivial sufficient condition on a report set")
    if rule.kind == "plurality":
        return frozenset({a})
    return frozenset(i for i, r in enumerate(rule.menu.rankings) if r[0] == a)


def majority_threshold(rule: VotingRule, n: int) -> Fraction:
    """``c(n)``: more than this many votes in ``q_set`` forces a unique win."""
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    if rule.kind in MAJORITARIAN:
        return Fraction(n, 2)
    if rule.kind == "borda":
        return Fraction(n * (rule.m - 1), rule.m)
    raise UnsupportedError("veto has no majority-style threshold")


def count_compositions(n: int, parts: int) -> int:
    return math.comb(n + parts - 1, parts - 1)


def check_budget(n: int, parts: int, budget: int = DEFAULT_BUDGET) -> int:
    count = count_compositions(n, parts)
    if count > budget:
        raise ResourceLimitError(
            f"{count} histograms of {n} votes over {parts} reports exceed the budget of {budget}",
            count=count, budget=budget)
    return count


def compositions(n: int, parts: int) -> Iterator[tuple]:
    """All tuples of ``parts`` non-negative integers summing to ``n``."""
    if parts == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in compositions(n - first, parts - 1):
            yield (first,) + rest


def selecting_histograms(rule: VotingRule, n: int, a: int,
                         budget: int = DEFAULT_BUDGET) -> Iterator[tuple]:
    """Yield ``(h, |f(h)|)`` for every histogram of ``n`` votes that ``a`` wins."""
    check_budget(n, len(rule.menu), budget)
    for h in compositions(n, len(rule.menu)):
        w = winners(rule, h)
        if a in w:
            yield h, len(w)


def winner_masks(rule: VotingRule, H: np.ndarray) -> np.ndarray:
    """Boolean ``(N, m)`` array marking the winners of each histogram row."""
    H = np.asarray(H, dtype=np.int64)
    if rule.positional:
        totals = H @ rule.menu.score_matrix
        return totals == totals.max(axis=1, keepdims=True)
    uniq, inverse = np.unique(H, axis=0, return_inverse=True)
    masks = np.zeros((len(uniq), rule.m), dtype=bool)
    for k, row in enumerate(uniq):
        masks[k, list(winners(rule, row))] = True
    return masks[inverse.reshape(-1)]

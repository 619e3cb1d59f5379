"""Simplex points, report menus and the nearest-report map.

Coordinates are kept as plain Python numbers so that ``fractions.Fraction``
inputs stay exact through :func:`anchored_utility` and :func:`anchor_menu`.
Vectorised code paths use :attr:`ReportMenu.array` instead.
"""
from __future__ import annotations

import itertools
import math
import string
from dataclasses import dataclass, field, replace
from fractions import Fraction
from numbers import Real
from typing import Sequence

import numpy as np

from anchorvote.errors import InvalidInputError

SIMPLEX_TOL = 1e-12
TIE_TOL = 1e-10


def alternative_label(a: int) -> str:
    return string.ascii_lowercase[a] if a < 26 else f"x{a}"


@dataclass(frozen=True)
class SimplexPoint:
    """A point of the probability simplex (utility, anchor or mean utility)."""

    coords: tuple

    def __post_init__(self):
        coords = tuple(self.coords)
        if len(coords) < 1:
            raise InvalidInputError("simplex point needs at least one coordinate")
        for c in coords:
            if not isinstance(c, Real) or not math.isfinite(c):
                raise InvalidInputError(f"non-finite or non-real coordinate {c!r}")
            if c < -SIMPLEX_TOL:
                raise InvalidInputError(f"negative coordinate {c} in {coords}")
        total = sum(coords)
        if abs(total - 1) > SIMPLEX_TOL:
            raise InvalidInputError(f"coordinates sum to {float(total)!r}, not 1")
        object.__setattr__(self, "coords", coords)

    def __len__(self):
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    @property
    def m(self) -> int:
        return len(self.coords)

    @property
    def array(self) -> np.ndarray:
        return np.array([float(c) for c in self.coords])


def as_point(u) -> SimplexPoint:
    return u if isinstance(u, SimplexPoint) else SimplexPoint(tuple(u))


@dataclass(frozen=True)
class AnchorParams:
    """Anchoring point ``w`` and the weight ``alpha`` voters move towards it."""

    w: SimplexPoint
    alpha: Real

    def __post_init__(self):
        object.__setattr__(self, "w", as_point(self.w))
        if not (0 <= self.alpha < 1):
            raise InvalidInputError(f"alpha must lie in [0, 1), got {self.alpha}")

    @property
    def m(self) -> int:
        return self.w.m

    @property
    def top_alternative(self) -> int:
        """Unique argmax of ``w``; raises if the maximum is shared."""
        best = max(self.w)
        tops = [a for a, x in enumerate(self.w) if x == best]
        if len(tops) != 1:
            raise InvalidInputError(f"argmax of w={self.w.coords} is not unique")
        return tops[0]


@dataclass(frozen=True)
class ReportMenu:
    """A finite set of score vectors voters choose between.

    ``reports`` are the vectors used for distances (normalised to the simplex
    for the built-in menus). ``scores`` are the raw positional scores a rule
    tallies; anchoring changes ``reports`` but never ``scores``.
    """

    reports: tuple
    labels: tuple
    scores: tuple
    kind: str = "custom"
    normalized: bool = True
    rankings: tuple | None = None
    anchor: AnchorParams | None = None
    _array: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        reports = tuple(tuple(r) for r in self.reports)
        if not reports:
            raise InvalidInputError("report menu is empty")
        m = len(reports[0])
        if any(len(r) != m for r in reports):
            raise InvalidInputError("reports have inconsistent dimension")
        if len(set(reports)) != len(reports):
            raise InvalidInputError("reports must be distinct")
        if len(self.labels) != len(reports) or len(self.scores) != len(reports):
            raise InvalidInputError("labels/scores must have one entry per report")
        object.__setattr__(self, "reports", reports)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "scores", tuple(tuple(s) for s in self.scores))
        arr = np.array([[float(x) for x in r] for r in reports])
        arr.setflags(write=False)
        object.__setattr__(self, "_array", arr)

    def __len__(self):
        return len(self.reports)

    @property
    def m(self) -> int:
        return len(self.reports[0])

    @property
    def array(self) -> np.ndarray:
        return self._array

    @property
    def score_matrix(self) -> np.ndarray:
        return np.array(self.scores, dtype=np.int64)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def is_permutation_closed(self) -> bool:
        present = set(self.reports)
        return all(
            tuple(r[i] for i in perm) in present
            for r in self.reports
            for perm in itertools.permutations(range(self.m))
        )

    @classmethod
    def from_scores(cls, scores: Sequence[Sequence[int]], labels=None,
                    normalize=True, kind="custom", rankings=None) -> "ReportMenu":
        scores = [tuple(int(x) for x in s) for s in scores]
        if normalize:
            reports = []
            for s in scores:
                total = sum(s)
                if total <= 0:
                    raise InvalidInputError(f"cannot normalise score vector {s}")
                reports.append(tuple(Fraction(x, total) for x in s))
        else:
            reports = [tuple(Fraction(x) for x in s) for s in scores]
        if labels is None:
            labels = [str(i) for i in range(len(scores))]
        return cls(tuple(reports), tuple(labels), tuple(scores), kind=kind,
                   normalized=normalize, rankings=rankings)


def plurality_menu(m: int) -> ReportMenu:
    scores = [tuple(int(i == j) for j in range(m)) for i in range(m)]
    labels = [alternative_label(i) for i in range(m)]
    return ReportMenu.from_scores(scores, labels, normalize=True, kind="plurality")


def ordinal_menu(m: int, normalize: bool = True) -> ReportMenu:
    """All ``m!`` rankings, scored by position with ``{m-1, ..., 0}``.

    Reports are listed in lexicographic ranking order, so for ``m = 3`` the
    order is abc, acb, bac, bca, cab, cba.
    """
    rankings = tuple(itertools.permutations(range(m)))
    scores = []
    for ranking in rankings:
        s = [0] * m
        for pos, alt in enumerate(ranking):
            s[alt] = m - 1 - pos
        scores.append(tuple(s))
    labels = ["".join(alternative_label(a) for a in r) for r in rankings]
    return ReportMenu.from_scores(scores, labels, normalize=normalize,
                                  kind="ordinal", rankings=rankings)


def veto_menu(m: int, normalize: bool = True) -> ReportMenu:
    scores = [tuple(int(i != j) for j in range(m)) for i in range(m)]
    labels = [f"veto-{alternative_label(i)}" for i in range(m)]
    return ReportMenu.from_scores(scores, labels, normalize=normalize, kind="veto")


def _sq_dist(u, r):
    return sum((a - b) * (a - b) for a, b in zip(u, r))


def distances(u, menu: ReportMenu) -> list[float]:
    """Euclidean distance from ``u`` to every report (squared terms exact)."""
    return [math.sqrt(float(_sq_dist(u, r))) for r in menu.reports]


def nearest_report(u, menu: ReportMenu, tol: float = TIE_TOL) -> frozenset:
    """Indices of all reports within ``tol`` of the minimal distance to ``u``."""
    if menu is None or len(menu) == 0:
        raise InvalidInputError("empty menu")
    u = as_point(u)
    if u.m != menu.m:
        raise InvalidInputError(f"point has {u.m} coordinates, menu has {menu.m}")
    d = distances(u, menu)
    best = min(d)
    return frozenset(i for i, x in enumerate(d) if x <= best + tol)


def nearest_margin(u, menu: ReportMenu) -> tuple[int, float]:
    """Closest report and its distance gap to the runner-up."""
    d = distances(u, menu)
    order = sorted(range(len(d)), key=d.__getitem__)
    gap = d[order[1]] - d[order[0]] if len(d) > 1 else math.inf
    return order[0], gap


def anchored_utility(u, params: AnchorParams) -> SimplexPoint:
    """The shifted utility ``(1 - alpha) u + alpha w``."""
    u = as_point(u)
    a = params.alpha
    return SimplexPoint(tuple((1 - a) * x + a * y for x, y in zip(u, params.w)))


def phi(r, params: AnchorParams) -> tuple:
    a = params.alpha
    return tuple((x - a * y) / (1 - a) for x, y in zip(r, params.w))


def phi_inverse(s, params: AnchorParams) -> tuple:
    a = params.alpha
    return tuple((1 - a) * x + a * y for x, y in zip(s, params.w))


def anchor_menu(menu: ReportMenu, params: AnchorParams) -> ReportMenu:
    """Map every report through ``r -> (r - alpha w) / (1 - alpha)``.

    Voting with utility ``u`` against the returned menu selects the same label
    as voting with the anchored utility against ``menu``. The images may leave
    the simplex; nothing is clamped.
    """
    if not (0 <= params.alpha < 1):
        raise InvalidInputError(f"alpha must lie in [0, 1), got {params.alpha}")
    if params.m != menu.m:
        raise InvalidInputError("anchor dimension does not match menu")
    if params.alpha == 0:
        return replace(menu, anchor=params)
    images = tuple(phi(r, params) for r in menu.reports)
    return replace(menu, reports=images, anchor=params)


def unanchor_menu(menu: ReportMenu) -> ReportMenu:
    if menu.anchor is None:
        return menu
    base = tuple(phi_inverse(s, menu.anchor) for s in menu.reports)
    return replace(menu, reports=base, anchor=None)


def inner(x, y):
    return sum(a * b for a, b in zip(x, y))


def alignment_predicate(s, t, u, params: AnchorParams) -> bool:
    """True when ``u`` weakly prefers ``s`` to ``t`` and so does ``w``.

    Under that hypothesis the anchored images keep the order:
    ``d(u, phi(s)) <= d(u, phi(t))``.
    """
    return _sq_dist(u, s) <= _sq_dist(u, t) and inner(params.w, s) >= inner(params.w, t)

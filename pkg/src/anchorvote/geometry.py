"""Planar geometry of nearest-report cells on the 2-simplex.

Cells are clipped in the affine chart ``u -> (u_1, u_2)`` (with
``u_3 = 1 - u_1 - u_2``). Affine maps preserve area ratios, and the chart only
needs field operations, so ``Fraction`` inputs give exact areas.
:func:`to_planar` converts chart points to an isometric embedding for plotting.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

from anchorvote.errors import UnsupportedError
from anchorvote.simplex import ReportMenu

Point = tuple
TRIANGLE = ((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1)), (Fraction(0), Fraction(0)))


def clip_halfplane(poly: Sequence[Point], a, b, c) -> list:
    """Sutherland-Hodgman step: keep the part of ``poly`` with ``a x + b y <= c``."""
    out = []
    n = len(poly)
    for i in range(n):
        P = poly[i]
        Q = poly[(i + 1) % n]
        fp = a * P[0] + b * P[1] - c
        fq = a * Q[0] + b * Q[1] - c
        if fp <= 0:
            out.append(P)
        if (fp < 0 < fq) or (fq < 0 < fp):
            t = fp / (fp - fq)
            out.append((P[0] + t * (Q[0] - P[0]), P[1] + t * (Q[1] - P[1])))
    return out


def polygon_area(poly: Sequence[Point]):
    """Signed shoelace area (positive for counter-clockwise vertex order)."""
    n = len(poly)
    if n < 3:
        return 0
    s = 0
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return s / 2


def bisector(r, s):
    """Chart half-plane ``{u : |u - r| <= |u - s|}`` as coefficients ``(a, b, c)``.

    ``|u-r|^2 <= |u-s|^2`` is ``2 <u, s - r> <= |s|^2 - |r|^2``, linear in u.
    """
    d = [si - ri for ri, si in zip(r, s)]
    rhs = sum(x * x for x in s) - sum(x * x for x in r)
    return 2 * (d[0] - d[2]), 2 * (d[1] - d[2]), rhs - 2 * d[2]


def nearest_cells_m3(menu: ReportMenu) -> list:
    """Chart polygon of every report's nearest-point cell within the simplex."""
    if menu.m != 3:
        raise UnsupportedError(f"exact cell geometry needs m = 3, menu has m = {menu.m}")
    cells = []
    for i, r in enumerate(menu.reports):
        poly = list(TRIANGLE)
        for j, s in enumerate(menu.reports):
            if j == i or not poly:
                continue
            poly = clip_halfplane(poly, *bisector(r, s))
        cells.append(poly)
    return cells


def cell_fractions_m3(menu: ReportMenu) -> list:
    """Uniform measure of each cell, relative to the whole simplex."""
    total = abs(polygon_area(TRIANGLE))
    return [polygon_area(c) / total if len(c) >= 3 else 0 * total
            for c in nearest_cells_m3(menu)]


_SQ2 = math.sqrt(2.0)
_SQ6 = math.sqrt(6.0)


def to_planar(pt: Point) -> tuple[float, float]:
    """Isometric planar coordinates: e_a -> (0,0), e_b -> (sqrt2,0), e_c on top."""
    u1, u2 = float(pt[0]), float(pt[1])
    u3 = 1.0 - u1 - u2
    return u2 * _SQ2 + u3 * _SQ2 / 2, u3 * _SQ6 / 2


def point_in_convex(poly: Sequence[Point], pt: Point, tol: float = 1e-12) -> bool:
    """Membership in a counter-clockwise convex polygon."""
    n = len(poly)
    for i in range(n):
        (x0, y0), (x1, y1) = poly[i], poly[(i + 1) % n]
        cross = (x1 - x0) * (pt[1] - y0) - (y1 - y0) * (pt[0] - x0)
        if cross < -tol:
            return False
    return True

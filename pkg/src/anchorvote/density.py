"""Utility densities on the simplex and the measure of nearest-report cells."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from anchorvote import kernels
from anchorvote.errors import InvalidInputError, UnsupportedError
from anchorvote.geometry import cell_fractions_m3
from anchorvote.simplex import TIE_TOL, ReportMenu

CHUNK = 1 << 16


@dataclass(frozen=True)
class DensityModel:
    """Uniform, Dirichlet, or a finite mixture of those.

    ``uniform`` is sampled exactly like ``dirichlet(1, ..., 1)``, so both give
    identical draws for the same seed.
    """

    kind: str
    theta: tuple = ()
    components: tuple = ()

    def __post_init__(self):
        if self.kind in ("uniform", "dirichlet"):
            theta = tuple(float(t) for t in self.theta)
            if len(theta) < 2:
                raise InvalidInputError("density needs m >= 2 parameters")
            if any(not (t > 0) or not math.isfinite(t) for t in theta):
                raise InvalidInputError(f"Dirichlet parameters must be > 0, got {theta}")
            object.__setattr__(self, "theta", theta)
        elif self.kind == "mixture":
            comps = tuple((float(wt), d) for wt, d in self.components)
            if not comps:
                raise InvalidInputError("mixture needs at least one component")
            if any(wt < 0 for wt, _ in comps) or abs(sum(wt for wt, _ in comps) - 1) > 1e-12:
                raise InvalidInputError("mixture weights must be >= 0 and sum to 1")
            if len({d.m for _, d in comps}) != 1:
                raise InvalidInputError("mixture components differ in dimension")
            object.__setattr__(self, "components", comps)
        else:
            raise InvalidInputError(f"unknown density kind {self.kind!r}")

    @classmethod
    def uniform(cls, m: int) -> "DensityModel":
        return cls("uniform", (1.0,) * m)

    @classmethod
    def dirichlet(cls, theta) -> "DensityModel":
        return cls("dirichlet", tuple(theta))

    @classmethod
    def mixture(cls, parts) -> "DensityModel":
        return cls("mixture", components=tuple(parts))

    @property
    def m(self) -> int:
        if self.kind == "mixture":
            return self.components[0][1].m
        return len(self.theta)

    @property
    def is_uniform(self) -> bool:
        if self.kind == "mixture":
            return all(d.is_uniform for wt, d in self.components if wt > 0)
        return all(t == 1.0 for t in self.theta)

    def mean(self) -> np.ndarray:
        """Closed-form ``E[u]``."""
        if self.kind == "mixture":
            return sum(wt * d.mean() for wt, d in self.components)
        theta = np.array(self.theta)
        return theta / theta.sum()

    def tv_upper_bound(self) -> float:
        """Upper bound on total variation distance to the uniform density.

        Exact (zero) for uniform, the non-uniform mixture weight for mixtures,
        and the trivial bound 1 otherwise.
        """
        if self.is_uniform:
            return 0.0
        if self.kind == "mixture":
            return sum(wt * d.tv_upper_bound() for wt, d in self.components)
        return 1.0

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == "mixture":
            weights = np.array([wt for wt, _ in self.components])
            which = rng.choice(len(weights), size=n, p=weights / weights.sum())
            out = np.empty((n, self.m))
            for k, (_, d) in enumerate(self.components):
                idx = np.flatnonzero(which == k)
                if idx.size:
                    out[idx] = d.sample(idx.size, rng)
            return out
        g = rng.standard_gamma(np.array(self.theta), size=(n, self.m))
        return g / g.sum(axis=1, keepdims=True)

    def to_dict(self) -> dict:
        if self.kind == "mixture":
            return {"kind": "mixture", "components": [
                {"weight": wt, "density": d.to_dict()} for wt, d in self.components]}
        if self.kind == "uniform":
            return {"kind": "uniform", "m": self.m}
        return {"kind": "dirichlet", "theta": list(self.theta)}

    @classmethod
    def from_dict(cls, spec: dict, m: int | None = None) -> "DensityModel":
        kind = spec.get("kind")
        if kind == "uniform":
            dim = spec.get("m", m)
            if dim is None:
                raise InvalidInputError("uniform density needs m")
            return cls.uniform(int(dim))
        if kind == "dirichlet":
            return cls.dirichlet(spec["theta"])
        if kind == "mixture":
            return cls.mixture(
                (c["weight"], cls.from_dict(c["density"], m)) for c in spec["components"])
        raise InvalidInputError(f"unknown density kind {kind!r}")


@dataclass
class ReportDistribution:
    """Probability of each menu report being submitted, with standard errors."""

    probs: np.ndarray
    stderr: np.ndarray
    provenance: str
    labels: tuple = ()
    samples: int | None = None
    exact: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)
        self.stderr = np.asarray(self.stderr, dtype=float)
        if np.any(self.probs < -1e-12):
            raise InvalidInputError("negative report probability")
        if self.provenance != "monte-carlo" and abs(self.probs.sum() - 1) > 1e-9:
            raise InvalidInputError(f"report probabilities sum to {self.probs.sum()}")

    def __len__(self):
        return len(self.probs)

    def mass(self, indices) -> float:
        return math.fsum(self.probs[i] for i in indices)

    def to_dict(self) -> dict:
        return {
            "provenance": self.provenance,
            "samples": self.samples,
            "labels": list(self.labels),
            "probs": [float(x) for x in self.probs],
            "stderr": [float(x) for x in self.stderr],
        }


def sample_profile(density: DensityModel, n: int, seed: int) -> np.ndarray:
    """``n`` i.i.d. utilities from ``density`` as an ``(n, m)`` array."""
    if n < 1:
        raise InvalidInputError("profile size must be >= 1")
    return density.sample(n, np.random.default_rng(seed))


def level_set_measure(density: DensityModel, menu: ReportMenu, samples: int,
                      seed: int, tol: float = TIE_TOL) -> ReportDistribution:
    """Monte Carlo estimate of ``mu(cell_r)`` for every report ``r``.

    Samples tied between cells give each tied report an equal fraction.
    """
    if samples < 1:
        raise InvalidInputError("samples must be >= 1")
    if density.m != menu.m:
        raise InvalidInputError(f"density has m={density.m}, menu has m={menu.m}")
    rng = np.random.default_rng(seed)
    s1_parts, s2_parts = [], []
    done = 0
    while done < samples:
        k = min(CHUNK, samples - done)
        s1, s2 = kernels.level_set_counts(density.sample(k, rng), menu.array, tol)
        s1_parts.append(s1)
        s2_parts.append(s2)
        done += k
    s1 = np.array([math.fsum(col) for col in zip(*s1_parts)])
    s2 = np.array([math.fsum(col) for col in zip(*s2_parts)])
    probs = s1 / samples
    if samples > 1:
        var = np.maximum(s2 / samples - probs ** 2, 0.0) * samples / (samples - 1)
    else:
        var = np.zeros_like(probs)
    return ReportDistribution(probs, np.sqrt(var / samples), "monte-carlo",
                              labels=menu.labels, samples=samples)


def exact_measure_m3(menu: ReportMenu, density: DensityModel | None = None) -> ReportDistribution:
    """Exact uniform measure of every cell for ``m = 3`` by polygon clipping."""
    if menu.m != 3:
        raise UnsupportedError(f"exact geometry is only available for m = 3 (got m = {menu.m})")
    if density is not None and not density.is_uniform:
        raise UnsupportedError("exact geometry supports the uniform density only")
    fracs = cell_fractions_m3(menu)
    probs = np.array([float(f) for f in fracs])
    exact = tuple(fracs) if all(isinstance(f, Fraction) for f in fracs) else None
    return ReportDistribution(probs, np.zeros(len(probs)), "exact-geometry",
                              labels=menu.labels, exact=exact)


def report_distribution(density: DensityModel, menu: ReportMenu, samples: int,
                        seed: int, method: str = "auto") -> ReportDistribution:
    """Best available estimate of the report distribution.

    ``auto`` uses exact geometry for uniform densities at ``m = 3``, mixes
    per-component results for mixtures, and falls back to Monte Carlo.
    """
    if method == "exact":
        return exact_measure_m3(menu, density)
    if method == "monte-carlo":
        return level_set_measure(density, menu, samples, seed)
    if method != "auto":
        raise InvalidInputError(f"unknown measure method {method!r}")
    if menu.m == 3 and density.is_uniform:
        return exact_measure_m3(menu)
    if density.kind == "mixture" and menu.m == 3 and any(d.is_uniform for _, d in density.components):
        probs = np.zeros(len(menu))
        var = np.zeros(len(menu))
        total = 0
        for k, (wt, d) in enumerate(density.components):
            if wt == 0:
                continue
            part = report_distribution(d, menu, samples, seed + 7919 * (k + 1), "auto")
            probs += wt * part.probs
            var += (wt * part.stderr) ** 2
            total += part.samples or 0
        return ReportDistribution(probs, np.sqrt(var), "stratified", labels=menu.labels,
                                  samples=total or None)
    return level_set_measure(density, menu, samples, seed)


def tv_distance_bound(density: DensityModel, menu: ReportMenu, samples: int = 200_000,
                      seed: int = 0) -> float:
    """``max_r |mu(cell_r) - uniform(cell_r)|`` over the menu's cells.

    This is a lower bound on the total variation distance restricted to one
    partition, not the supremum over all Borel sets. Uniform mixture
    components contribute exactly zero.
    """
    if density.is_uniform:
        return 0.0
    if menu.m == 3:
        base = exact_measure_m3(menu).probs
    else:
        base = level_set_measure(DensityModel.uniform(menu.m), menu, samples, seed + 1).probs
    if density.kind == "mixture":
        diff = np.zeros(len(menu))
        for k, (wt, d) in enumerate(density.components):
            if wt == 0 or d.is_uniform:
                continue
            diff += wt * (level_set_measure(d, menu, samples, seed + k).probs - base)
    else:
        diff = level_set_measure(density, menu, samples, seed).probs - base
    return float(np.max(np.abs(diff)))

"""Experiment configuration: JSON file plus command-line overrides.

Schema (all keys optional except where a command needs them)::

    {
      "density": {"kind": "uniform"} | {"kind": "dirichlet", "theta": [3, 2, 1]}
                 | {"kind": "mixture", "components": [{"weight": 0.9, "density": {...}}, ...]},
      "rule": "plurality" | "borda" | "veto" | "copeland" | "irv",
      "m": 3, "n": 5,
      "anchor": {"w": [1, 0, 0], "alpha": 0.2},
      "alphas": [0.0, 0.1, 0.2],          # sweep; overrides anchor.alpha
      "samples": 200000, "welfare_samples": 100000,
      "seed": 0, "budget": 10000000,
      "mode": "exact" | "monte-carlo", "method": "auto" | "exact" | "monte-carlo",
      "out": "results"
    }
"""
from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field

from anchorvote.density import DensityModel
from anchorvote.errors import AnchorVoteError, InvalidInputError
from anchorvote.rules import DEFAULT_BUDGET, RULES
from anchorvote.simplex import SimplexPoint


class ConfigError(InvalidInputError):
    def __init__(self, message, key=None, line=None):
        where = f" (line {line}, key '{key}')" if line else (f" (key '{key}')" if key else "")
        super().__init__(message + where)
        self.key = key
        self.line = line


def _locate(text: str | None, key: str) -> int | None:
    if not text:
        return None
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


@dataclass
class ExperimentConfig:
    density: DensityModel
    rule: str = "plurality"
    m: int = 3
    n: int = 5
    w: tuple | None = None
    alphas: tuple = (0.0,)
    samples: int = 200_000
    welfare_samples: int = 100_000
    seed: int = 0
    seed_derived: bool = False
    budget: int = DEFAULT_BUDGET
    mode: str = "exact"
    method: str = "auto"
    out: str = "results"
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def config_hash(self) -> str:
        canon = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]

    @property
    def has_anchor(self) -> bool:
        return self.w is not None


def parse_config(data: dict, text: str | None = None) -> ExperimentConfig:
    """Validate a config mapping; ``text`` (the raw JSON) is used for line numbers."""

    def fail(msg, key):
        raise ConfigError(msg, key, _locate(text, key))

    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    m = data.get("m")
    if m is None:
        m = _infer_m(data)
    if not isinstance(m, int) or m < 2:
        fail(f"m must be an integer >= 2, got {m!r}", "m")
    n = data.get("n", 5)
    if not isinstance(n, int) or n < 1:
        fail(f"n must be an integer >= 1, got {n!r}", "n")
    rule = data.get("rule", "plurality")
    if rule not in RULES:
        fail(f"unknown rule {rule!r}; choose from {', '.join(RULES)}", "rule")
    try:
        density = DensityModel.from_dict(data.get("density", {"kind": "uniform"}), m)
    except (AnchorVoteError, KeyError, TypeError) as exc:
        fail(f"invalid density: {exc}", "density")
    if density.m != m:
        fail(f"density dimension {density.m} does not match m={m}", "density")
    w = None
    alphas = (0.0,)
    anchor = data.get("anchor")
    if anchor is not None:
        if not isinstance(anchor, dict) or "w" not in anchor:
            fail("anchor must be an object with 'w' (and 'alpha')", "anchor")
        try:
            w = SimplexPoint(tuple(float(x) for x in anchor["w"])).coords
        except (AnchorVoteError, TypeError, ValueError) as exc:
            fail(f"invalid anchoring point: {exc}", "w")
        if len(w) != m:
            fail(f"w has {len(w)} coordinates, expected m={m}", "w")
        alphas = (anchor.get("alpha", 0.0),)
    if "alphas" in data:
        alphas = tuple(data["alphas"])
        if not alphas:
            fail("alphas sweep is empty", "alphas")
    for a in alphas:
        if not isinstance(a, (int, float)) or not 0 <= a < 1:
            fail(f"alpha must lie in [0, 1), got {a!r}", "alphas" if "alphas" in data else "alpha")
    if any(a > 0 for a in alphas) and w is None:
        fail("a positive alpha needs an anchor point w", "anchor")
    ints = {}
    for key, default, lo in (("samples", 200_000, 1), ("welfare_samples", 100_000, 1),
                             ("budget", DEFAULT_BUDGET, 1)):
        val = data.get(key, default)
        if not isinstance(val, int) or val < lo:
            fail(f"{key} must be an integer >= {lo}, got {val!r}", key)
        ints[key] = val
    mode = data.get("mode", "exact")
    if mode not in ("exact", "monte-carlo"):
        fail(f"mode must be 'exact' or 'monte-carlo', got {mode!r}", "mode")
    method = data.get("method", "auto")
    if method not in ("auto", "exact", "monte-carlo"):
        fail(f"method must be auto, exact or monte-carlo, got {method!r}", "method")
    raw = dict(data)
    raw.pop("out", None)
    seed = data.get("seed")
    derived = seed is None
    if derived:
        canon = json.dumps(raw, sort_keys=True, separators=(",", ":"))
        seed = int(hashlib.sha256(canon.encode()).hexdigest()[:8], 16)
    elif not isinstance(seed, int) or seed < 0:
        fail(f"seed must be a non-negative integer, got {seed!r}", "seed")
    raw["seed"] = seed
    return ExperimentConfig(density, rule, m, n, w, tuple(float(a) for a in alphas),
                            ints["samples"], ints["welfare_samples"], seed, derived,
                            ints["budget"], mode, method, data.get("out", "results"), raw)


def _infer_m(data: dict) -> int:
    anchor = data.get("anchor")
    if isinstance(anchor, dict) and isinstance(anchor.get("w"), list):
        return len(anchor["w"])
    dens = data.get("density", {})
    if isinstance(dens, dict) and isinstance(dens.get("theta"), list):
        return len(dens["theta"])
    return 3


def load_config(path: str | None, overrides: dict | None = None) -> ExperimentConfig:
    data, text = {}, None
    if path:
        with open(path) as fh:
            text = fh.read()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    for k, v in (overrides or {}).items():
        if v is None:
            continue
        if isinstance(v, dict) and isinstance(data.get(k), dict):
            data[k] = {**data[k], **v}
        else:
            data[k] = v
    return parse_config(data, text)

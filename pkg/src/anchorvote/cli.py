"""Command-line runner: ``anchorvote {measure,bounds,welfare,figures,verify}``.

Exit codes: 0 success, 1 validation error, 2 invariant failure, 3 resource limit.
Every CSV starts with a ``# config_hash=... seed=...`` comment line; every JSON
file carries the same information under ``_meta``.
"""
from __future__ import annotations

import argparse
import csv
import functools
import io
import json
import os
import sys
import time
from fractions import Fraction

from anchorvote import geometry, verify
from anchorvote.bounds import topk_slack, tightening_report, w_topk_condition
from anchorvote.config import ExperimentConfig, load_config
from anchorvote.errors import InvalidInputError, ResourceLimitError, UnsupportedError
from anchorvote.rules import check_budget, make_rule
from anchorvote.simplex import AnchorParams, SimplexPoint, alternative_label, anchor_menu
from anchorvote.welfare import anchored_distributions, decrease_probability, expected_delta_sw

EXIT_OK, EXIT_INVALID, EXIT_INVARIANT, EXIT_RESOURCE = 0, 1, 2, 3
QUICK_SAMPLES = 20_000


def _meta(cfg: ExperimentConfig, command: str) -> dict:
    return {"command": command, "config_hash": cfg.config_hash, "seed": cfg.seed}


def _write_json(path: str, meta: dict, payload: dict) -> None:
    with open(path, "w") as fh:
        fh.write(json.dumps({"_meta": meta, **payload}, indent=2, sort_keys=True) + "\n")


def _write_csv(path: str, meta: dict, fields: list, rows: list) -> None:
    buf = io.StringIO()
    buf.write(f"# config_hash={meta['config_hash']} seed={meta['seed']} "
              f"command={meta['command']}\n")
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _cell(row.get(k)) for k in fields})
    with open(path, "w") as fh:
        fh.write(buf.getvalue())


def _cell(x):
    if x is None:
        return ""
    if isinstance(x, (list, tuple)):
        return " ".join(str(_cell(v)) for v in x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        return repr(x)
    return x


def _menu_for(cfg: ExperimentConfig):
    return make_rule(cfg.rule, cfg.m)


def _params(cfg: ExperimentConfig, alpha: float) -> AnchorParams:
    w = cfg.w if cfg.w is not None else tuple([1.0 / cfg.m] * cfg.m)
    return AnchorParams(SimplexPoint(tuple(w)), alpha)


def _require_anchor(cfg: ExperimentConfig, command: str) -> None:
    if cfg.w is None:
        raise InvalidInputError(f"{command} needs an anchor point: set anchor.w in the config "
                                "or pass --w")


def cmd_measure(cfg: ExperimentConfig) -> dict:
    """Standard and anchored report distributions as JSON + CSV."""
    rule = _menu_for(cfg)
    menu = rule.menu
    meta = _meta(cfg, "measure")
    records, rows = [], []
    for alpha in cfg.alphas:
        params = _params(cfg, alpha)
        p, q = anchored_distributions(rule, cfg.density, params, cfg.samples, cfg.seed,
                                      cfg.method)
        records.append({"alpha": alpha, "w": list(params.w.coords),
                        "p": p.to_dict(), "q": q.to_dict()})
        for name, dist in (("p", p), ("q", q)):
            for i, label in enumerate(menu.labels):
                rows.append({"alpha": alpha, "distribution": name, "report": i, "label": label,
                             "prob": float(dist.probs[i]),
                             "stderr": float(dist.stderr[i]) if dist.stderr is not None else 0.0,
                             "provenance": dist.provenance, "samples": dist.samples})
    payload = {"rule": cfg.rule, "menu": menu.kind, "m": cfg.m,
               "density": cfg.density.to_dict(), "results": records}
    _write_json(os.path.join(cfg.out, "measure.json"), meta, payload)
    _write_csv(os.path.join(cfg.out, "measure.csv"), meta,
               ["alpha", "distribution", "report", "label", "prob", "stderr", "provenance",
                "samples"], rows)
    return payload


def cmd_bounds(cfg: ExperimentConfig) -> list:
    """Per-alpha bounds on the anchor's favourite under p and q, with verdicts."""
    if cfg.rule == "veto":
        raise UnsupportedError(
            "veto: this rule does not lend itself to (nontrivial) sufficient conditions "
            "for winning, so no win-probability bounds are implemented")
    _require_anchor(cfg, "bounds")
    rule = _menu_for(cfg)
    rows = []
    for alpha in cfg.alphas:
        params = _params(cfg, alpha)
        p, q = anchored_distributions(rule, cfg.density, params, cfg.samples, cfg.seed,
                                      cfg.method)
        rep = tightening_report(p, q, rule, cfg.n, params.w)
        row = {"alpha": alpha, "rule": cfg.rule, "n": cfg.n,
               "alternative": alternative_label(rep.alternative)}
        row.update({k: v for k, v in rep.to_dict().items() if k not in row})
        row["alternative"] = alternative_label(rep.alternative)
        row["provenance"] = p.provenance
        rows.append(row)
    fields = ["alpha", "rule", "n", "alternative", "lower_p", "lower_q", "upper_p", "upper_q",
              "assumption_holds", "others_decrease", "lower_verdict", "upper_verdict",
              "provenance"]
    _write_csv(os.path.join(cfg.out, "bounds.csv"), _meta(cfg, "bounds"), fields, rows)
    return rows


WELFARE_FIELDS = ["density", "rule", "w", "alpha", "n", "expected_delta",
                  "expected_delta_stderr", "decrease_probability", "decrease_stderr",
                  "chernoff_bound", "chernoff_stderr", "inc", "dec", "condition", "vacuous",
                  "mode", "v", "nu", "nu_soc"]


def cmd_welfare(cfg: ExperimentConfig) -> list:
    """Expected welfare change plus the decrease probability and its bound, per alpha."""
    rule = _menu_for(cfg)
    if cfg.mode == "exact":
        try:
            check_budget(cfg.n, len(rule.menu), cfg.budget)
        except ResourceLimitError as exc:
            raise ResourceLimitError(f"{exc}; rerun with --mode monte-carlo", exc.count,
                                     exc.budget) from exc
    rows = []
    for alpha in cfg.alphas:
        params = _params(cfg, alpha)
        stats = expected_delta_sw(cfg.density, rule, params, cfg.n, cfg.mode, cfg.samples,
                                  cfg.seed, cfg.method, cfg.budget)
        dec = decrease_probability(cfg.density, rule, params, cfg.n, cfg.welfare_samples,
                                   cfg.seed + 1)
        row = stats.to_dict()
        for key in ("decrease_probability", "decrease_stderr", "chernoff_bound",
                    "chernoff_stderr", "vacuous"):
            row[key] = getattr(dec, key)
        row.update({"density": json.dumps(cfg.density.to_dict(), sort_keys=True),
                    "rule": cfg.rule, "w": list(params.w.coords), "alpha": alpha, "n": cfg.n})
        row["inc"] = [alternative_label(a) for a in stats.inc]
        row["dec"] = [alternative_label(a) for a in stats.dec]
        rows.append(row)
    meta = _meta(cfg, "welfare")
    _write_csv(os.path.join(cfg.out, "welfare.csv"), meta, WELFARE_FIELDS, rows)
    _write_json(os.path.join(cfg.out, "welfare.json"), meta,
                {"rows": [{k: r.get(k) for k in WELFARE_FIELDS} for r in rows]})
    return rows


def _cell_rows(menu, which: str, alpha: float) -> list:
    rows = []
    cells = geometry.nearest_cells_m3(menu)
    fractions = geometry.cell_fractions_m3(menu)
    for i, poly in enumerate(cells):
        for k, pt in enumerate(poly):
            x, y = geometry.to_planar(pt)
            rows.append({"menu": which, "alpha": alpha, "report": i, "label": menu.labels[i],
                         "vertex": k, "x": round(x, 15) + 0.0, "y": round(y, 15) + 0.0,
                         "area_fraction": float(fractions[i])})
    return rows


def condition_grid(denom: int = 60) -> list:
    """Barycentric grid on the 3-simplex with the Borda top-k condition flag."""
    rows = []
    for counts in verify.barycentric_grid(3, denom):
        w = SimplexPoint(tuple(Fraction(c, denom) for c in counts))
        x, y = geometry.to_planar(w)
        rows.append({"w_a": float(w[0]), "w_b": float(w[1]), "w_c": float(w[2]),
                     "x": round(x, 15) + 0.0, "y": round(y, 15) + 0.0, "slack": float(topk_slack(w)),
                     "condition": w_topk_condition(w)})
    return rows


def condition_boundary() -> list:
    """At m = 3 the slack is ``1 - 3 w_[2]``: the boundary is the three lines w_j = 1/3."""
    third = Fraction(1, 3)
    rows = []
    for j in range(3):
        others = [i for i in range(3) if i != j]
        for k, free in enumerate(others):
            w = [Fraction(0)] * 3
            w[j] = third
            w[free] = 1 - third
            x, y = geometry.to_planar((w[0], w[1]))
            rows.append({"segment": j, "point": k, "w_a": str(w[0]), "w_b": str(w[1]),
                         "w_c": str(w[2]), "x": round(x, 15) + 0.0, "y": round(y, 15) + 0.0})
    return rows


def cmd_figures(cfg: ExperimentConfig) -> dict:
    """Cell polygons (standard and anchored) plus the condition region, as CSV."""
    if cfg.m != 3:
        raise UnsupportedError(f"figure data needs m = 3, got m = {cfg.m}")
    rule = _menu_for(cfg)
    rows = _cell_rows(rule.menu, "standard", 0.0)
    if cfg.w is not None:
        for alpha in cfg.alphas:
            if alpha > 0:
                rows += _cell_rows(anchor_menu(rule.menu, _params(cfg, alpha)), "anchored",
                                   alpha)
    meta = _meta(cfg, "figures")
    _write_csv(os.path.join(cfg.out, "cells.csv"), meta,
               ["menu", "alpha", "report", "label", "vertex", "x", "y", "area_fraction"], rows)
    grid = condition_grid()
    _write_csv(os.path.join(cfg.out, "condition_grid.csv"), meta,
               ["w_a", "w_b", "w_c", "x", "y", "slack", "condition"], grid)
    boundary = condition_boundary()
    _write_csv(os.path.join(cfg.out, "condition_boundary.csv"), meta,
               ["segment", "point", "w_a", "w_b", "w_c", "x", "y"], boundary)
    return {"cells": rows, "grid": grid, "boundary": boundary}


def cmd_verify(cfg: ExperimentConfig, quick: bool = False, inject: str | None = None,
               log=None) -> dict:
    """Run the invariant suite; the summary holds no timings so reruns are identical."""
    scale = verify.QUICK if quick else verify.FULL
    overrides = {}
    if inject == "phi-sign":
        overrides["theorem1_equivalence"] = functools.partial(
            verify.check_equivalence, transform=verify.sign_flipped_anchor_menu)
    results = verify.run_all(scale, cfg.seed, log=log, overrides=overrides)
    summary = {"_meta": {**_meta(cfg, "verify"), "scale": scale.name},
               "passed": all(r.passed for r in results),
               "failed": [r.name for r in results if not r.passed],
               "checks": [r.to_dict() for r in results]}
    text = json.dumps(summary, indent=2, sort_keys=True) + "\n"
    with open(os.path.join(cfg.out, "verify.json"), "w") as fh:
        fh.write(text)
    summary["_text"] = text
    return summary


def _parse_floats(text: str | None):
    if text is None:
        return None
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError as exc:
        raise InvalidInputError(f"expected a list of numbers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON experiment config")
    common.add_argument("--seed", type=int, help="random seed (overrides the config)")
    common.add_argument("--samples", type=int, help="Monte Carlo sample count")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--quick", action="store_true", help="reduced scale")
    common.add_argument("--rule", help="plurality, borda, veto, copeland or irv")
    common.add_argument("--m", type=int, help="number of alternatives")
    common.add_argument("--n", type=int, help="number of voters")
    common.add_argument("--w", help="anchoring point, e.g. '1,0,0'")
    common.add_argument("--alpha", type=float, help="anchoring weight")
    common.add_argument("--alphas", help="sweep of anchoring weights, e.g. '0,0.1,0.2'")
    common.add_argument("--mode", choices=("exact", "monte-carlo"), help="welfare mode")
    common.add_argument("--budget", type=int, help="enumeration budget")
    common.add_argument("--inject-bug", choices=("phi-sign",), help=argparse.SUPPRESS)
    parser = argparse.ArgumentParser(prog="anchorvote",
                                     description="Anchored nearest-report voting experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (("measure", "report distributions p and q"),
                           ("bounds", "win-probability bounds over an alpha sweep"),
                           ("welfare", "expected welfare change and decrease probability"),
                           ("figures", "cell polygons and condition region (m = 3)"),
                           ("verify", "run the invariant suite")):
        sub.add_parser(name, parents=[common], help=helptext)
    return parser


def _overrides(args) -> dict:
    out = {"seed": args.seed, "samples": args.samples, "rule": args.rule, "m": args.m,
           "n": args.n, "mode": args.mode, "budget": args.budget}
    if args.alphas is not None:
        out["alphas"] = _parse_floats(args.alphas)
    return out


def _cli_overrides(args) -> dict:
    """Flag values to merge over the config file; ``None`` means not given."""
    extra = _overrides(args)
    anchor = {}
    if args.w is not None:
        anchor["w"] = _parse_floats(args.w)
    if args.alpha is not None:
        anchor["alpha"] = args.alpha
    if anchor:
        extra["anchor"] = anchor
    if args.quick and args.samples is None and args.command != "verify":
        extra["samples"] = QUICK_SAMPLES
        extra["welfare_samples"] = QUICK_SAMPLES
    return extra


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    err = sys.stderr
    try:
        cfg = load_config(args.config, _cli_overrides(args))
        if cfg.seed_derived:
            print(f"seed not given; derived seed={cfg.seed} from the config hash", file=err)
        if args.out:
            cfg.out = args.out
        os.makedirs(cfg.out, exist_ok=True)
        if args.command == "measure":
            cmd_measure(cfg)
        elif args.command == "bounds":
            cmd_bounds(cfg)
        elif args.command == "welfare":
            cmd_welfare(cfg)
        elif args.command == "figures":
            cmd_figures(cfg)
        else:
            t0 = time.perf_counter()

            def log(res):
                status = "PASS" if res.passed else "FAIL"
                print(f"[{status}] {res.name} ({time.perf_counter() - t0:.1f}s)", file=err)

            summary = cmd_verify(cfg, args.quick, args.inject_bug, log)
            sys.stdout.write(summary["_text"])
            if not summary["passed"]:
                for chk in summary["checks"]:
                    if not chk["passed"]:
                        print(f"invariant failed: {chk['name']} witness="
                              f"{json.dumps(chk['witness'], sort_keys=True)}", file=err)
                return EXIT_INVARIANT
        print(f"wrote {args.command} outputs to {cfg.out} (seed={cfg.seed})", file=err)
        return EXIT_OK
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=err)
        return EXIT_RESOURCE
    except (UnsupportedError, InvalidInputError, OSError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

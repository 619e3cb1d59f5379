"""Acceptance suite: each criterion at its stated scale and tolerance, seed fixed at 0."""
import time

import pytest

from anchorvote import verify
from anchorvote.cli import cmd_verify
from anchorvote.config import parse_config

SEED = 0


def _run(accept, criterion, check, limit=None):
    t0 = time.perf_counter()
    res = check(verify.FULL, SEED)
    elapsed = time.perf_counter() - t0
    in_time = limit is None or elapsed < limit
    text = f"{res.name} {elapsed:.1f}s"
    if limit is not None:
        text += f" (limit {limit}s)"
    summary = {k: v for k, v in res.detail.items() if not isinstance(v, (list, dict))}
    if summary:
        text += " " + " ".join(f"{k}={v}" for k, v in sorted(summary.items()))
    if res.witness:
        text += f" witness={res.witness}"
    accept(criterion, res.passed and in_time, text)
    assert res.passed, res.witness or res.detail
    assert in_time, f"took {elapsed:.1f}s, limit {limit}s"
    return res


class TestAcceptance:
    def test_c01_anchored_equivalence(self, accept):
        _run(accept, 1, verify.check_equivalence, limit=10)

    def test_c02_worked_example(self, accept):
        _run(accept, 2, verify.check_worked_example)

    def test_c03_move_up_alignment(self, accept):
        res = _run(accept, 3, verify.check_alignment)
        assert res.detail["hypothesis_held"] >= 100_000

    def test_c04_level_set_symmetry(self, accept):
        _run(accept, 4, verify.check_symmetry, limit=30)

    def test_c05_anchored_cell_grows(self, accept):
        _run(accept, 5, verify.check_preserve_order)

    def test_c06_bound_sandwich(self, accept):
        _run(accept, 6, verify.check_sandwich, limit=120)

    def test_c07_binomial_monotone(self, accept):
        _run(accept, 7, verify.check_binom_monotone)

    def test_c08_topk_condition(self, accept):
        _run(accept, 8, verify.check_topk)

    def test_c09_lower_bound_tightens(self, accept):
        _run(accept, 9, verify.check_tighten)

    def test_c10_exact_vs_simulation(self, accept):
        _run(accept, 10, verify.check_simulation)

    def test_c11_welfare_increase(self, accept):
        _run(accept, 11, verify.check_welfare_increase, limit=120)

    def test_c12_decrease_bound(self, accept):
        _run(accept, 12, verify.check_decrease_bound)

    def test_c13_verify_reproducible(self, accept, tmp_path):
        blobs = []
        t0 = time.perf_counter()
        for name in ("a", "b"):
            out = tmp_path / name
            out.mkdir()
            cfg = parse_config({"seed": SEED, "out": str(out)})
            summary = cmd_verify(cfg)
            blobs.append((summary["_text"], (out / "verify.json").read_bytes()))
        same = blobs[0] == blobs[1]
        accept(13, same, f"cmd_verify x2 {time.perf_counter() - t0:.1f}s "
                         f"identical={same} bytes={len(blobs[0][1])}")
        assert same

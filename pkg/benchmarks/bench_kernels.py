"""Time the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from anchorvote import kernels
from anchorvote.rules import make_rule
from anchorvote.simplex import TIE_TOL, ordinal_menu


def cases():
    rng = np.random.default_rng(0)
    borda = make_rule("borda", 3)
    p = rng.dirichlet(np.ones(len(borda.menu)))
    U3 = rng.dirichlet(np.ones(3), size=200_000)
    U4 = rng.dirichlet(np.ones(4), size=200_000)
    rep3 = ordinal_menu(3).array
    rep4 = ordinal_menu(4).array
    v = rng.random(len(U4))
    return {
        "positional_outcome borda m=3 n=30": lambda k: k.positional_outcome(
            borda.menu.score_matrix, p, 30),
        "level_set_counts m=3 200k pts": lambda k: k.level_set_counts(U3, rep3, TIE_TOL),
        "nearest_index m=4 200k pts": lambda k: k.nearest_index(U4, rep4, TIE_TOL, v),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    found = kernels.backends()
    names = sorted(found)
    print(f"{'case':38s}" + "".join(f"{n:>12s}" for n in names) + "     speedup")
    for label, fn in cases().items():
        times = {n: min(timeit.repeat(lambda: fn(found[n]), number=1, repeat=args.repeat))
                 for n in names}
        row = f"{label:38s}" + "".join(f"{times[n]:11.4f}s" for n in names)
        if "cython" in times:
            row += f"  {times['python'] / times['cython']:9.1f}x"
        print(row)


if __name__ == "__main__":
    main()

"""Truncated Perron reconstruction of the divisor error term against H.

For random half-integers x, prints |perron - Delta(x)| for a ladder of
truncation heights and the median ratio of successive errors.
"""

import argparse

import numpy as np

from oscillab import DeltaFunction, application, closed_form_main_term, delta_at, perron_truncated, prefix_table


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--heights", type=float, nargs="+", default=[250, 500, 1000, 2000])
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--seed", type=int, default=7)
    args = p.parse_args()
    app = application("divisor")
    d = DeltaFunction(prefix_table(app.kind, 1000), closed_form_main_term(app))
    rng = np.random.default_rng(args.seed)
    xs = rng.integers(50, 500, args.points) + 0.5
    truth = np.array([delta_at(d, x) for x in xs])
    errs = []
    print("H,median_error,max_error")
    for H in args.heights:
        e = np.abs([perron_truncated(app, x, 0.5, H) for x in xs] - truth)
        errs.append(e)
        print(f"{H:.17g},{np.median(e):.6g},{e.max():.6g}")
    for (h0, e0), (h1, e1) in zip(zip(args.heights, errs), zip(args.heights[1:], errs[1:])):
        print(f"# median ratio H {h0:g} -> {h1:g}: {np.median(e1 / e0):.3f}")


if __name__ == "__main__":
    main()

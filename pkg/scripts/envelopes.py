"""Scaled envelopes |Delta(x)| x^-beta over half-integers x up to n_max.

For each application, prints the maximum of the scaled error in every dyadic
window, the global maximum and the least-squares slope of the log window
maxima (a negative slope means the envelope stays bounded on this range).
"""

import argparse
import math

import numpy as np

from oscillab import DeltaFunction, application, closed_form_main_term, prefix_table

DEFAULT_BETA = {"divisor": 0.25, "twisted": 0.55, "abelian": 0.315, "squarefree": 0.5, "von_mangoldt": 0.5}


def envelope(d, beta, n_max, kmin=10):
    n = np.arange(1, n_max, dtype=np.int64)
    x = n + 0.5
    v = np.abs(d.on_piece(n, x)) * x**-beta
    starts = 2.0 ** np.arange(kmin, int(math.log2(n_max)) + 1)
    peaks = np.array([v[(x >= lo) & (x < 2 * lo)].max() for lo in starts])
    slope = np.polyfit(np.log(starts), np.log(peaks), 1)[0]
    return starts, peaks, slope, float(v.max()), float(x[np.argmax(v)])


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--apps", nargs="+", default=sorted(DEFAULT_BETA))
    p.add_argument("--nmax", type=int, default=1_000_000)
    p.add_argument("--beta", type=float, help="override the per-application exponent")
    args = p.parse_args()
    print("app,beta,window_start,window_max")
    summary = []
    for name in args.apps:
        app = application(name)
        beta = DEFAULT_BETA[name] if args.beta is None else args.beta
        d = DeltaFunction(prefix_table(app.kind, args.nmax), closed_form_main_term(app))
        starts, peaks, slope, peak, where = envelope(d, beta, args.nmax)
        for lo, pk in zip(starts, peaks):
            print(f"{name},{beta},{lo:.17g},{pk:.17g}")
        summary.append(f"# {name}: max {peak:.6g} at x = {where}, slope {slope:.4f}")
    print("\n".join(summary))


if __name__ == "__main__":
    main()

"""Second and fourth moments of the divisor error term over dyadic windows.

Prints one CSV row per window and the least-squares slopes of log moment
against log T (expected near 3/2 and 2).
"""

import argparse

import numpy as np

from oscillab import DeltaFunction, application, closed_form_main_term, moment_integral, prefix_table


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--kmin", type=int, default=10)
    p.add_argument("--kmax", type=int, default=17)
    args = p.parse_args()
    app = application("divisor")
    Ts = 2.0 ** np.arange(args.kmin, args.kmax + 1)
    d = DeltaFunction(prefix_table(app.kind, int(2 * Ts[-1])), closed_form_main_term(app))
    m2, m4 = [], []
    print("T,moment2,moment4")
    for T in Ts:
        m2.append(moment_integral(d, T, 2))
        m4.append(moment_integral(d, T, 4))
        print(f"{T:.17g},{m2[-1]:.17g},{m4[-1]:.17g}")
    s2 = np.polyfit(np.log(Ts), np.log(m2), 1)[0]
    s4 = np.polyfit(np.log(Ts), np.log(m4), 1)[0]
    print(f"# slopes: second {s2:.4f}, fourth {s4:.4f}")


if __name__ == "__main__":
    main()

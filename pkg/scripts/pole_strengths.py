"""Pole strengths of the Mellin transform at the first zeta-zero images.

For the twisted divisor problem (theta = 1) the probe point is s0 with 2 s0
the first zero; for the von Mangoldt function it is the zero itself.  Each
line compares the extrapolated strength with |Res D| / |point|.  With
--diagnostics the per-probe rows are printed as well.
"""

import argparse

from oscillab import Contour, application, pole_strength, zeta_constants


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--H", type=float, default=1000.0)
    p.add_argument("--diagnostics", action="store_true")
    args = p.parse_args()
    rho = zeta_constants().two_s0
    cases = [("twisted", rho / 2, 8.0), ("von_mangoldt", rho, 16.0)]
    print("app,point,strength,residue_estimate,spread")
    for name, point, T0 in cases:
        app = application(name)
        c = Contour(app.sigma1, app.sigma3, T0, args.H)
        r = pole_strength(app, c, point.real, point.imag)
        print(f"{name},{point:.10g},{r.value:.12g},{r.residue_estimate:.12g},{r.spread:.3g}")
        if args.diagnostics:
            print(r.diagnostics_csv(), end="")


if __name__ == "__main__":
    main()

"""FEM lambda_1 on thin tubes around an ellipse and a circle as the half-width shrinks.

Prints the curve limit, the tube lower bound and successive gap ratios.
"""
import argparse
import math

import numpy as np

from magspec import bounds as bd
from magspec import geometry as geo
from magspec.closedform import curve_lambda1
from magspec.eigensolve import fem_spectrum


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--widths", default="0.2,0.1,0.05")
    p.add_argument("--mesh-div", type=int, default=4, help="mesh size = half-width / div")
    a = p.parse_args()
    widths = [float(v) for v in a.widths.split(",")]

    curves = {"ellipse": geo.CurveSpec("ellipse", {"a": 1.0, "b": 0.5}),
              "circle": geo.CurveSpec("circle", {"R": math.sqrt(2.0)})}
    for name, curve in curves.items():
        L, S = geo.curve_invariants(curve)
        lam_g = curve_lambda1(L, S, a.beta)
        gaps = []
        print(f"{name}: curve lambda_1 = {lam_g:.6f}")
        for hw in widths:
            lam = fem_spectrum(geo.tube_domain(curve, hw), a.beta, hw / a.mesh_div, 1).eigenvalues[0]
            lb = bd.tube_lb(lam_g, abs(a.beta), hw, S).value
            gaps.append(abs(lam - lam_g))
            print(f"  h={hw:<6g} lambda_1={lam:.6f}  |gap|={gaps[-1]:.3e}  tube lb={lb:.6f}")
        ratios = np.array(gaps[:-1]) / np.array(gaps[1:])
        print(f"  gap ratios per halving: {np.round(ratios, 2)}")


if __name__ == "__main__":
    main()

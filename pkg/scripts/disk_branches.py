"""Lowest eigenvalue of each angular branch on B_R, plus the disk lambda_1, over an R grid.

Writes a CSV (n, R, lambda1_n, lambda1_disk) and, if matplotlib is installed, a PNG of the branch curves.
"""
import argparse
import csv

import numpy as np

from magspec.closedform import disk_branch_eigens, disk_spectrum


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--r-min", type=float, default=0.2)
    p.add_argument("--r-max", type=float, default=6.0)
    p.add_argument("--step", type=float, default=0.05)
    p.add_argument("--n-max", type=int, default=16)
    p.add_argument("--out", default="disk_branches.csv")
    p.add_argument("--lam-cap", type=float, default=1.3, help="branch window, in units of beta")
    p.add_argument("--png", default=None)
    a = p.parse_args()

    Rs = np.arange(a.r_min, a.r_max + 0.5 * a.step, a.step)
    branches = np.full((a.n_max + 1, Rs.size), np.nan)
    lam1 = np.empty(Rs.size)
    for i, R in enumerate(Rs):
        lam1[i] = disk_spectrum(float(R), a.beta, 1).eigenvalues[0]
        for n in range(a.n_max + 1):
            # branches whose minimum lies above the window stay NaN
            pts = disk_branch_eigens(n, a.beta, float(R), a.lam_cap * a.beta)
            if pts:
                branches[n, i] = pts[0].lam
    with open(a.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "R", "lambda1_n", "lambda1_disk"])
        for n in range(a.n_max + 1):
            for i, R in enumerate(Rs):
                w.writerow([n, repr(float(R)), repr(branches[n, i]), repr(lam1[i])])
    print(f"wrote {a.out}: {Rs.size} radii, {a.n_max + 1} branches")

    if a.png:
        try:
            import matplotlib.pyplot as plt
        except ImportError:
            print("matplotlib not installed; skipping plot")
            return
        fig, ax = plt.subplots(figsize=(7, 4))
        for n in range(a.n_max + 1):
            ax.plot(Rs, branches[n], lw=0.8)
        ax.plot(Rs, lam1, "k", lw=2)
        ax.axhline(a.beta, ls=":", c="gray")
        ax.set_ylim(0, a.lam_cap * a.beta)
        ax.set_xlabel("R")
        ax.set_ylabel("lambda")
        fig.savefig(a.png, dpi=150, bbox_inches="tight")


if __name__ == "__main__":
    main()

"""Dirichlet and Neumann lambda_1 on disks of several radii: closed form and FEM side by side."""
import argparse

from magspec import fem
from magspec import geometry as geo
from magspec import mesh as msh
from magspec.closedform import dirichlet_disk_lambda1, disk_spectrum
from magspec.eigensolve import smallest


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--radii", default="0.5,1,2,4")
    p.add_argument("--h-per-R", type=float, default=0.04, help="mesh size as a fraction of R")
    a = p.parse_args()

    print("R,dirichlet_exact,dirichlet_fem,neumann_exact,neumann_fem")
    for R in (float(v) for v in a.radii.split(",")):
        m = msh.generate(geo.disk(R), a.h_per_R * R)
        A = fem.standard_potential(a.beta)
        d_fem = smallest(fem.assemble_dirichlet(m, A), 1).eigenvalues[0]
        n_fem = smallest(fem.assemble_magnetic(m, A), 1).eigenvalues[0]
        d = dirichlet_disk_lambda1(R, a.beta)
        n = disk_spectrum(R, a.beta, 1).eigenvalues[0]
        print(f"{R},{d:.6f},{d_fem:.6f},{n:.6f},{n_fem:.6f}")


if __name__ == "__main__":
    main()

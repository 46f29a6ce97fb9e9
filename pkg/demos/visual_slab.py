"""Covering numbers: the visual inequality on grids, and why delta^(-beta) is needed.

Dropping k of the d coordinate-line projectors leaves a k-dimensional slab
that every remaining projection collapses to a point, so the covering number
of the slab, about delta^(-k), has to be paid for by delta^(-beta) with beta = k.
"""
from blbounds import catalog
from blbounds.visual import grid_cloud, slab_experiment, visual_check


def main():
    lines = catalog.coordinate_lines(2)
    print("n     N(A)    N(pi_1 A) N(pi_2 A) ratio")
    for n in (16, 64, 256):
        r = visual_check(lines, grid_cloud(n, 2), 1 / n, 0.5)
        print(f"{n:<5d} {r.lhs:<7d} {r.projected[0]:<9d} {r.projected[1]:<9d} {r.ratio:.4g}")
    print(f"allowed ratio: {r.allowance * r.constant_estimate:g}\n")
    print("d k  fitted slope")
    for d, k in ((2, 1), (3, 1), (3, 2), (4, 2), (4, 3)):
        slope, _ = slab_experiment(d, k)
        print(f"{d} {k}  {slope:.4f}")


if __name__ == "__main__":
    main()

"""Young's convolution inequality on R^2: lower bound, oracle and upper bound side by side.

At equal weights 2/3 the constant is sqrt(3)/2. The upper bound needs the
three lines to be alpha-perceptive, which holds exactly for alpha < 1/sqrt(5);
the script scans alpha to show the bound blowing up at that threshold.
"""
import math

from blbounds import catalog
from blbounds.bounds import lower_bound_global, upper_bound_global
from blbounds.lieb_oracle import bl_limit
from blbounds.perceptivity import check_perceptivity


def main():
    y = catalog.young()
    est, trace = bl_limit(y)
    print(f"closed form        {catalog.young_constant(y.weights):.10f}")
    print(f"oracle             {est:.10f}  ({len(trace)} schedule points)")
    print(f"lower (alpha = 1)  {lower_bound_global(y, 1.0).value:.10f}")
    print()
    print("alpha     perceptivity  upper bound")
    for a in (0.2, 0.3, 0.4, 0.44, 0.447, 1 / math.sqrt(5) - 1e-9, 0.45, 0.5):
        v = check_perceptivity(y, a)
        print(f"{a:.7f}  {v.status.value:12s}  {upper_bound_global(y, a, v).value:.6g}")


if __name__ == "__main__":
    main()

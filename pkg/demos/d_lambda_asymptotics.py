"""How the bounds track BL(D_lambda) = lambda^(-1/2) as lambda -> 0.

The third map of D_lambda shrinks by lambda. The global bound only stays
finite if its threshold shrinks too and then grows like 1/lambda, while the
projector variant absorbs the shrinkage into the distortion factor and keeps
the correct rate. For very small lambda the Grassmannian cover cannot resolve
the tiny third threshold within its cell budget and perceptivity comes back
UNKNOWN, so the global bound is reported as infinite.
"""
from blbounds import catalog
from blbounds.bounds import upper_bound_global, upper_bound_variant
from blbounds.lieb_oracle import bl_limit


def main():
    print("lambda   oracle       variant      variant/oracle  global(0.5,0.5,0.5 lambda)")
    for lam in (1.0, 0.5, 0.1, 0.01, 0.001):
        d = catalog.d_lambda(lam)
        est, _ = bl_limit(d, t_values=(1e3, 1e6), eps_values=(1e-3, 1e-6))
        var = upper_bound_variant(d, 0.577).value
        glob = upper_bound_global(d, (0.5, 0.5, 0.5 * lam))
        shown = f"{glob.value:.6g}" if glob.finite else f"inf (perceptivity {dict(glob.hypotheses)['perceptivity']})"
        print(f"{lam:<8g} {est:<12.6g} {var:<12.6g} {var / est:<15.6g} {shown}")


if __name__ == "__main__":
    main()

"""Two of the three Loomis-Whitney planes: a datum with infinite constant.

The plane span(e2, e3) is seen with total weight 1 but has dimension 2, so the
datum is only (alpha, 1)-perceptive. The localized upper bound therefore
grows like t^(-1/2) as the localisation T = t I shrinks, and the oracle
follows the same rate.
"""
import numpy as np

from blbounds import catalog
from blbounds.bounds import lower_bound_localized, upper_bound_localized
from blbounds.datum import LocalizedRegularizedDatum
from blbounds.lieb_oracle import maximize_gaussian
from blbounds.perceptivity import beta_min_estimate, check_perceptivity
from blbounds.visual import fit_slope


def main():
    pair = catalog.loomis_whitney_pair()
    beta, w = beta_min_estimate(pair)
    print(f"largest algebraic defect {beta:g} on a subspace of dimension {w.dim}")
    for b in (0.5, 1.0):
        print(f"(0.5, {b})-perceptive: {check_perceptivity(pair, 0.5, b).status.value}")
    ts = 10.0 ** -np.arange(0, 7)
    rows = []
    for t in ts:
        lrd = LocalizedRegularizedDatum.isotropic(pair, 1.0, t)
        rows.append(
            (
                lower_bound_localized(pair, t, np.sqrt(t), w).value,
                maximize_gaussian(lrd).value,
                upper_bound_localized(lrd, 0.5, beta).value,
            )
        )
    print("\nt         lower        oracle       upper")
    for t, (lo, est, up) in zip(ts, rows):
        print(f"{t:<9g} {lo:<12.6g} {est:<12.6g} {up:.6g}")
    for name, col in zip(("lower", "oracle", "upper"), zip(*rows)):
        print(f"log-log slope of {name}: {fit_slope(ts, col):+.4f}")


if __name__ == "__main__":
    main()

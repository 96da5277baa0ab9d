"""Smoke test for the hecke_py extension module.

Build and install it first, e.g. ``maturin develop -m crates/py/Cargo.toml``.
"""

import math
import sys

import hecke_py as h


def main() -> int:
    t = h.CoefficientTable(10_000)
    assert [t.tau(n) for n in range(1, 8)] == [1, -24, 252, -1472, 4830, -6048, -16744]
    assert t.tau(10_000) == h.CoefficientTable(10_000, "oracle").tau(10_000)

    lam2, theta2 = t.prime_local_data(2)
    assert math.isclose(lam2, 2 * math.cos(theta2), abs_tol=1e-14)

    ks, hist = t.sato_tate(20)
    assert sum(hist) == 1229 and ks < 0.1

    row = h.exponents(0.5)
    assert round(row["rho_minus"], 4) == -0.2113
    assert round(row["theta"], 4) == -0.1512

    kappa, eta, _ = h.optimize_parameters(0.5, "minus", 0.01)
    assert abs(kappa - 0.25) < 0.011 and abs(eta - 0.75) < 0.011

    series = t.power_sum(1.0)
    print(f"S*(x;1) at x={series[-1][0]}: {series[-1][1]:.3f}")
    print(f"Sato-Tate KS distance over primes <= 10^4: {ks:.4f}")
    print("ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())

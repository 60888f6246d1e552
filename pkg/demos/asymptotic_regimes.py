"""Small-time and large-time forms next to the closed form.

    python demos/asymptotic_regimes.py
"""

import numpy as np

import bagley_torvik as bt
from bagley_torvik import asymptotics as asy


def main():
    coeffs = bt.BTCoefficients(1.3, 2.6, 3.4)
    rs = bt.RootSystem.from_coefficients(coeffs)
    ics = bt.InitialConditions(1.0, 1.0)
    terms = [(1.0, 0.0), (1.0, 0.5)]

    print("initial-condition response y_c")
    print(f"{'t':>8} {'closed':>14} {'small-t':>14} {'large-t':>14}")
    for t in (0.01, 0.1, 1.0, 10.0, 100.0, 1000.0):
        print(f"{t:8.2f} {bt.yc(rs, ics, t):14.8f} "
              f"{asy.yc_asymptotic(coeffs, ics, asy.SMALL_T, t):14.8f} "
              f"{asy.yc_asymptotic(coeffs, ics, asy.LARGE_T, t):14.8f}")

    print("\nresponse to f(t) = 1 + sqrt(t)")
    print(f"{'t':>8} {'closed':>14} {'small-t':>14} {'large-t':>14}")
    for t in (1e-4, 0.01, 1.0, 100.0, 1e4):
        print(f"{t:8.4g} {bt.yf_power(rs, terms, t):14.8g} "
              f"{asy.yf_power_asymptotic(rs, terms, asy.SMALL_T, t):14.8g} "
              f"{asy.yf_power_asymptotic(rs, terms, asy.LARGE_T, t):14.8g}")

    print("\nresponse to sin(2.5 t): closed form minus steady state")
    for t in (25.0, 50.0, 100.0, 400.0):
        diff = bt.yf_sinusoid(rs, 1.0, 2.5, t) - asy.yf_sinusoid_asymptotic(rs, 1.0, 2.5, t)
        print(f"  t={t:6.1f}  {diff:+.3e}  (x sqrt(t): {diff * np.sqrt(t):+.3e})")


if __name__ == "__main__":
    main()

"""Solve a damped fractional oscillator and print the response.

    python demos/quickstart.py
"""

import numpy as np

import bagley_torvik as bt


def main():
    coeffs = bt.BTCoefficients(a=1.3, b=2.6, c=3.4)
    rs = bt.RootSystem.from_coefficients(coeffs)
    print("characteristic roots of a r^4 + b r^3 + c:")
    for r in rs.roots:
        print(f"  {r.real:+.12f} {r.imag:+.12f}i")
    print(f"A_1 = {bt.weight_A(rs, 1):.15f} (1/a = {1 / coeffs.a:.15f})")
    print(f"A_-3 = {bt.weight_A(rs, -3):.15f} (-1/c = {-1 / coeffs.c:.15f})")

    problem = bt.BTProblem(coeffs, bt.InitialConditions(y0=1.0, v0=1.0), bt.Sinusoid(1.0, 2.5))
    t = np.linspace(0.0, 10.0, 11)
    sol = bt.solve(problem, t)
    print()
    print(f"{'t':>6} {'y':>14} {'yc':>14} {'yf':>14}")
    for row in zip(t, sol.y, sol.yc, sol.yf):
        print("{:6.2f} {:14.10f} {:14.10f} {:14.10f}".format(*row))


if __name__ == "__main__":
    main()

"""Closed form against the literature methods on the canonical problem.

Prints the largest deviation of each reference method from the closed form
on (0, 10], and shows where the series methods break down.

    python demos/method_comparison.py
"""

import time

import numpy as np

import bagley_torvik as bt
from bagley_torvik import reference as ref


def main():
    coeffs = bt.BTCoefficients(1.3, 2.6, 3.4)
    ics = bt.InitialConditions(1.0, 1.0)
    force = bt.PowerSum(((1.0, 0.0), (1.0, 0.5)))  # f(t) = 1 + sqrt(t)
    problem = bt.BTProblem(coeffs, ics, force)
    t = np.linspace(0.25, 10.0, 40)

    start = time.perf_counter()
    closed = bt.solve(problem, t).y
    t_closed = time.perf_counter() - start

    start = time.perf_counter()
    series = ref.podlubny_solve(problem, t, ref.SeriesControls(on_failure="nan"))
    t_series = time.perf_counter() - start

    half = np.array([ref.arora_series(coeffs, ics, [(1.0, 0), (1.0, 1)], ti) for ti in t])
    fd = ref.finite_difference_solve(problem, ref.FDGrid.over(10.0, 200), caputo_correction=True)
    fd_on_t = np.interp(t, fd.t, fd.y)

    print(f"closed form: {t_closed * 1e3:.1f} ms, Mittag-Leffler series: {t_series:.2f} s")
    print(f"{'t':>6} {'closed form':>14} {'|series|':>10} {'|half-pow|':>10} {'|FD|':>10}")
    for ti, y, s, h, f in zip(t, closed, series.y, half, fd_on_t):
        print(f"{ti:6.2f} {y:14.10f} {abs(s - y):10.1e} {abs(h - y):10.1e} {abs(f - y):10.1e}")
    for t_fail, why in series.failures:
        print(f"series gave up at t={t_fail:.2f}: {why}")


if __name__ == "__main__":
    main()

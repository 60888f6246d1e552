"""Closed-form solution of the Bagley-Torvik equation.

``a y''(t) + b D^{3/2} y(t) + c y(t) = f(t)`` with Caputo initial data
``y(0)``, ``y'(0)``.  The solution is a finite sum over the four roots of
``a r**4 + b r**3 + c`` of scaled complementary error functions, with
specialised force responses for constant, power, sinusoidal, pulse and
Bessel forcing and a quadrature convolution for anything else.

Modules
-------
special
    ``W(z) = exp(z**2) erfc(-z)``, Mittag-Leffler functions and derivatives,
    Fresnel integrals, alternating-series acceleration.
roots
    Characteristic roots and the root-sum weights ``A_l`` and ``B_m``.
closed_form
    Problem types and the closed-form solution.
reference
    Independent literature methods: Mittag-Leffler series, the half-power
    series and a Grunwald-Letnikov finite-difference scheme.
asymptotics
    Small-time and large-time expansions.
cli
    The ``bagley-torvik`` command-line tool.
"""

from .closed_form import (
    BesselJ0,
    BTProblem,
    CallableForcing,
    Constant,
    GeneralizedKernelSpec,
    InitialConditions,
    PowerSum,
    Pulse,
    Sinusoid,
    Solution,
    Zero,
    discrete_residual,
    inverse_laplace_general,
    kernel,
    solve,
    yc,
    yf,
    yf_constant,
    yf_convolution,
    yf_power,
    yf_pulse,
    yf_sinusoid,
)
from .errors import (
    BagleyTorvikError,
    DegenerateRoots,
    ImaginaryResidue,
    NonConvergence,
    QuadratureFailure,
    ResonantDenominator,
    UnsupportedParameter,
    ZeroLeadingCoefficient,
)
from .roots import BTCoefficients, RootSystem, weight_A, weight_B
from .solution import Method, SolutionSeries

__version__ = "0.1.0"

__all__ = [
    "BTCoefficients",
    "BTProblem",
    "BagleyTorvikError",
    "BesselJ0",
    "CallableForcing",
    "Constant",
    "DegenerateRoots",
    "GeneralizedKernelSpec",
    "ImaginaryResidue",
    "InitialConditions",
    "Method",
    "NonConvergence",
    "PowerSum",
    "Pulse",
    "QuadratureFailure",
    "ResonantDenominator",
    "RootSystem",
    "Sinusoid",
    "Solution",
    "SolutionSeries",
    "UnsupportedParameter",
    "Zero",
    "ZeroLeadingCoefficient",
    "discrete_residual",
    "inverse_laplace_general",
    "kernel",
    "solve",
    "weight_A",
    "weight_B",
    "yc",
    "yf",
    "yf_constant",
    "yf_convolution",
    "yf_power",
    "yf_pulse",
    "yf_sinusoid",
]

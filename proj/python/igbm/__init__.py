"""Interacting geometric Brownian motion market model."""

import numpy as np

from ._igbm import (
    ConvergenceError,
    CouplingSpec,
    Error,
    GridOptions,
    KappaDistribution,
    ModelParams,
    NumericalError,
    OrderParameters,
    ParameterError,
    critical_J0,
    interacting_pricing_pdf,
    market_pricing_pdf,
    pricing_pdf_closed,
    pricing_pdf_quadrature,
    qs_return_pdf,
    qs_return_pdf_asymptotic,
    qs_return_variance,
    simulate,
    solve_fixed_point,
)

__version__ = "0.1.0"


def model(**kwargs):
    """ModelParams with the given fields set.

    Coupling fields (N, mean_degree, J0, J, alpha, hebbian_p) may be passed
    directly; kappa0 and nu set a Gamma rate law, kappa a fixed rate.
    """
    p = ModelParams()
    c = p.coupling
    kappa0 = kwargs.pop("kappa0", None)
    nu = kwargs.pop("nu", None)
    kappa = kwargs.pop("kappa", None)
    for key, value in kwargs.items():
        if hasattr(c, key):
            setattr(c, key, value)
        elif hasattr(p, key):
            setattr(p, key, value)
        else:
            raise TypeError(f"unknown parameter {key!r}")
    p.coupling = c
    if kappa is not None:
        p.kappa_dist = KappaDistribution.fixed(kappa)
    elif kappa0 is not None or nu is not None:
        d = p.kappa_dist
        p.kappa_dist = KappaDistribution.gamma(
            d.kappa0 if kappa0 is None else kappa0, d.nu if nu is None else nu
        )
    p.validate()
    return p


def trapezoid(x, y):
    """Integral of y over the grid x."""
    return float(np.trapezoid(y, x))

import math

import numpy as np
import pytest

import igbm


def test_model_helper_sets_fields():
    p = igbm.model(J0=0.3, sigma0=0.2, kappa0=0.7, nu=2.0)
    assert p.coupling.J0 == 0.3
    assert p.sigma0 == 0.2
    assert p.kappa_dist.kappa0 == 0.7 and p.kappa_dist.nu == 2.0
    with pytest.raises(TypeError):
        igbm.model(bogus=1)


def test_invalid_parameters_raise_value_error():
    with pytest.raises(ValueError):
        igbm.model(sigma=-1.0)
    with pytest.raises(ValueError):
        igbm.model(kappa0=-1.0)


def test_quasi_stationary_returns_normalized_with_closed_variance():
    p = igbm.model(kappa0=0.2, nu=1.0)
    x = np.linspace(-3.0, 3.0, 4001)
    tau = 5.0
    f = igbm.qs_return_pdf(x, tau, p)
    assert f.shape == x.shape
    assert np.all(f >= 0)
    # Tails beyond the grid are thin for this variance.
    assert igbm.trapezoid(x, f) == pytest.approx(1.0, abs=2e-3)
    var = igbm.trapezoid(x, x * x * f)
    assert var == pytest.approx(igbm.qs_return_variance(tau, p), rel=2e-2)


def test_asymptotic_tail_slope():
    p = igbm.model(kappa0=0.2, nu=1.0)
    x = np.array([20.0, 40.0])
    f = igbm.qs_return_pdf_asymptotic(x, p)
    slope = math.log(f[1] / f[0]) / math.log(2.0)
    assert slope == pytest.approx(-3.0, abs=0.05)


def test_meanfield_solution_and_critical_coupling():
    p = igbm.model(I0=0.0, J0=0.5, kappa0=0.2)
    g = igbm.GridOptions()
    g.n_z, g.n_kappa = 48, 24
    op = igbm.solve_fixed_point(p, 1.0, g)
    assert 0.0 < op.m < 1.0
    assert op.q >= op.m * op.m - 1e-12
    assert op.chi > 0.0
    j0c = igbm.critical_J0(p, g)
    assert 0.0 < j0c < 5.0


def test_pricing_closed_matches_quadrature():
    p = igbm.model(kappa0=0.2, nu=1.5)
    x = np.linspace(-3.0, 3.0, 61)
    a = igbm.pricing_pdf_closed(x, p, 0.1)
    b = igbm.pricing_pdf_quadrature(x, p, 0.1)
    assert np.max(np.abs(a - b)) < 1e-6


def test_interacting_and_market_pricing():
    p = igbm.model(kappa=0.2)
    g = igbm.GridOptions()
    g.n_z, g.n_kappa = 48, 1
    op = igbm.solve_fixed_point(p, 1.0, g)
    x = np.linspace(-20.0, 20.0, 801)
    f, renorm, gap = igbm.interacting_pricing_pdf(x, op, p, 1.0, 0.2)
    assert f.shape == x.shape
    assert renorm > 0.0
    assert gap is None or gap[0] < gap[1]
    assert igbm.trapezoid(x, f) == pytest.approx(1.0, abs=1e-2)
    m = igbm.market_pricing_pdf(np.linspace(-5.0, 5.0, 101), igbm.model(kappa0=0.2), 0.5)
    assert np.all(np.isfinite(m)) and np.all(m >= 0)


def test_simulate_is_deterministic():
    p = igbm.model(N=20, hebbian_p=2, kappa0=0.5)
    a = igbm.simulate(p, seed=7, dt=0.05, t_max=20.0, record_stride=5, t_warmup=5.0)
    b = igbm.simulate(p, seed=7, dt=0.05, t_max=20.0, record_stride=5, t_warmup=5.0)
    assert set(a) == {"t", "u0", "index", "m", "overlaps"}
    assert a["overlaps"].shape == (a["t"].size, 2)
    for k in a:
        np.testing.assert_array_equal(a[k], b[k])
    c = igbm.simulate(p, seed=8, dt=0.05, t_max=20.0, record_stride=5, t_warmup=5.0)
    assert not np.array_equal(a["index"], c["index"])

"""Taylor arithmetic, series inversion, finite differences, power fits."""

import math

import numpy as np
import pytest

from billiardlab.errors import IndistinguishableError
from billiardlab.jets import (
    MPoly,
    Taylor1D,
    dyadic_grid,
    fd_derivative,
    fit_power_law,
    graph_jet_from_parametric,
    stencil_weights,
    taylor_from_derivatives,
)


def test_arithmetic_against_closed_forms():
    t = Taylor1D.variable(0.3, 6)
    s = (t * t + 1.0).sqrt()
    x = 0.3
    val = math.sqrt(x * x + 1)
    assert abs(s.value - val) < 1e-14
    # derivative of sqrt(x^2+1) is x/sqrt(x^2+1)
    assert abs(s.derivative_values()[1] - x / val) < 1e-14


def test_sin_cos_jets():
    t = Taylor1D.variable(0.7, 5)
    sn = t.sin()
    cs = t.cos()
    d_sn = sn.derivative_values()
    d_cs = cs.derivative_values()
    assert abs(d_sn[0] - math.sin(0.7)) < 1e-15
    assert abs(d_sn[1] - math.cos(0.7)) < 1e-15
    assert abs(d_sn[3] + math.cos(0.7)) < 1e-14
    assert abs(d_cs[2] + math.cos(0.7)) < 1e-14


def test_recip_and_division():
    t = Taylor1D.variable(0.0, 5)
    g = (1.0 + t * 0.37).recip()
    # 1/(1+ct) = 1 - ct + c^2 t^2 - ...
    expect = [(-0.37) ** k for k in range(6)]
    assert np.allclose(g.c, expect, atol=1e-15)


def test_compose_and_invert():
    f = Taylor1D([0.0, 2.0, -0.5, 0.25, 0.0, 0.125])
    finv = f.invert()
    comp = f.compose(finv)
    expect = np.zeros(6)
    expect[1] = 1.0
    assert np.allclose(comp.c, expect, atol=1e-12)


def test_graph_jet_from_parametric_circle():
    # unit circle at angle 0: tangent frame jets of the graph are the
    # Taylor coefficients of 1 - sqrt(1 - x^2)
    t = Taylor1D.variable(0.0, 6)
    x = t.sin()
    y = 1.0 - t.cos()
    k = graph_jet_from_parametric(x, y)
    assert np.allclose(k[:6], [0, 0, 0.5, 0, 1.0 / 8, 0], atol=1e-13)


def test_taylor_from_derivatives_round_trip():
    derivs = [1.0, 2.0, -3.0, 4.0]
    jet = taylor_from_derivatives(derivs)
    assert np.allclose(jet.derivative_values(), derivs)


def test_mpoly_mul_partial_eval():
    p = MPoly(2, {(1, 0): 2.0, (0, 1): 1.0}, max_degree=5)
    q = p * p
    assert q.coeff((2, 0)) == 4.0
    assert q.coeff((1, 1)) == 4.0
    assert q.coeff((0, 2)) == 1.0
    dp = q.partial(0)
    assert dp.coeff((1, 0)) == 8.0
    assert abs(q.eval([0.5, 2.0]) - (2 * 0.5 + 2.0) ** 2) < 1e-14


def test_mpoly_truncation():
    p = MPoly(2, {(3, 0): 1.0, (0, 3): 1.0}, max_degree=5)
    q = p * p  # all products have degree 6 > 5
    assert not q.terms


def test_stencil_weights_reproduce_derivatives():
    nodes = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
    w = stencil_weights(nodes, 2)
    # exact for cubics: f = x^3 has zero second derivative at 0
    assert abs(np.dot(w, nodes ** 3)) < 1e-12
    assert abs(np.dot(w, nodes ** 2) - 2.0) < 1e-12


def test_fd_derivative_matches_exact():
    val, err = fd_derivative(math.sin, 0.4, order=3, h=1e-2)
    assert abs(val + math.cos(0.4)) < 1e-8
    assert err < 1e-6


def test_fit_power_law_recovers_exponent():
    ts = dyadic_grid(4, 12)
    ys = -2.5 * ts ** 3
    k, c = fit_power_law(ts, ys)
    assert abs(k - 3.0) < 1e-12
    assert abs(c + 2.5) < 1e-12


def test_fit_power_law_indistinguishable():
    ts = dyadic_grid(4, 8)
    with pytest.raises(IndistinguishableError):
        fit_power_law(ts, np.zeros_like(ts))

"""Scale-function evaluators against closed-form references."""

import math

import numpy as np
import pytest

from refracted_levy import DomainError, ExpSum, LevyModel, build_scale


def _bm_scale(x, q):
    """sinh(sqrt(q) x)/sqrt(q): the scale function for psi(theta) = theta^2."""
    a = math.sqrt(q)
    return math.sinh(a * x) / a


def test_brownian_scale_matches_sinh(std_bm):
    model, _ = std_bm
    ev = build_scale(model, 1.0)
    for x in (0.1, 0.5, 1.0, 2.0, 5.0):
        assert ev.W(x) == pytest.approx(_bm_scale(x, 1.0), rel=1e-13)
        assert ev.W_prime(x) == pytest.approx(math.cosh(x), rel=1e-13)


def test_brownian_tilted_scale(std_bm):
    # psi_Y(theta) = theta^2 - theta/2 factors through its two real roots
    model, params = std_bm
    ev = build_scale(model, 1.0, params.delta)
    disc = math.sqrt(0.25 + 4.0)
    r_plus, r_minus = (0.5 + disc) / 2.0, (0.5 - disc) / 2.0
    for x in (0.3, 1.0, 3.0):
        expect = (math.exp(r_plus * x) - math.exp(r_minus * x)) / (r_plus - r_minus)
        assert ev.W(x) == pytest.approx(expect, rel=1e-13)
    assert ev.leading_root == pytest.approx(r_plus, abs=1e-14)


def test_cramer_lundberg_scale_partial_fractions(cl_exp):
    # 1/(psi(s) - 1) = (1+s)/(2 s^2 - 1) expands over s = +/- 1/sqrt(2)
    model, _ = cl_exp
    ev = build_scale(model, 1.0)
    a = 1.0 / math.sqrt(2.0)
    for x in (0.0, 0.4, 1.0, 3.0):
        expect = ((1.0 + a) * math.exp(a * x) - (1.0 - a) * math.exp(-a * x)) / (4 * a)
        assert ev.W(x) == pytest.approx(expect, rel=1e-13)
    assert ev.value_at_zero == 0.5


def test_value_at_zero_branches(std_bm, cl_exp):
    assert build_scale(std_bm[0], 1.0).value_at_zero == 0.0
    assert build_scale(cl_exp[0], 1.0).value_at_zero == 0.5
    # tilting reduces the drift, so the atom grows
    assert build_scale(cl_exp[0], 1.0, 0.5).value_at_zero == pytest.approx(1.0 / 1.5)


def test_zero_on_negative_half_line(std_bm):
    ev = build_scale(std_bm[0], 1.0)
    assert ev.W(-1.0) == 0.0
    assert np.all(ev.W(np.array([-3.0, -0.1])) == 0.0)
    with pytest.raises(DomainError):
        ev.W_prime(-1.0)


def test_laplace_roundtrip_closed_form(std_bm, cl_exp):
    for model, params in (std_bm, cl_exp):
        for tilt in (0.0, params.delta):
            ev = build_scale(model, 1.0, tilt)
            for s in ev.leading_root + np.array([0.3, 1.0, 4.0]):
                num, ana = ev.laplace_roundtrip(s)
                assert num == pytest.approx(ana, rel=1e-10)
                num, ana = ev.laplace_roundtrip_measure(s)
                assert num == pytest.approx(ana, rel=1e-9)


def test_tail_transform_consistency(cl_exp):
    ev = build_scale(cl_exp[0], 1.0)
    s = ev.leading_root + 1.0
    whole = ev.tail_transform_W(s, 0.0)
    split = ev.tail_transform_W(s, 2.0)
    from refracted_levy.quadrature import adaptive_simpson

    body = adaptive_simpson(lambda u: np.exp(-s * u) * ev.W(u), 0.0, 2.0, tol=1e-12)
    assert body + split == pytest.approx(whole, rel=1e-11)


def test_inversion_backend_matches_closed_form(general_exp_model, cl_exp):
    ev_g = build_scale(general_exp_model, 1.0)
    ev_c = build_scale(cl_exp[0], 1.0)
    assert ev_g.backend == "laplace-inversion"
    assert ev_c.backend == "closed-form"
    # the inversion contour resolves the transform to roughly 1e-5; the
    # differenced derivative loses one more digit near the origin
    for x in (0.25, 1.0, 3.0, 7.0):
        assert ev_g.W(x) == pytest.approx(ev_c.W(x), rel=1e-5)
        assert ev_g.W_prime(x) == pytest.approx(ev_c.W_prime(x), rel=1e-3)
    assert ev_g.value_at_zero == pytest.approx(0.5, rel=1e-12)


def test_exp_sum_algebra():
    es = ExpSum(np.array([-1.0, -2.0]), np.array([1.0, 0.5]))
    assert es(0.0) == pytest.approx(1.5)
    assert es.derivative()(0.0) == pytest.approx(-2.0)
    assert es.integral(0.0, 50.0) == pytest.approx(1.0 + 0.25, rel=1e-12)
    assert es.tail_transform(1.0, 0.0) == pytest.approx(1.0 / 2.0 + 0.5 / 3.0)
    with pytest.raises(DomainError):
        es.tail_transform(-3.0, 0.0)


def test_exp_sum_cleaned_drops_cancelled_terms():
    es = ExpSum(np.array([1.0, -1.0]), np.array([1e-18, 1.0]))
    cleaned = es.cleaned()
    assert len(cleaned.rates) == 1
    assert cleaned.rates[0] == -1.0

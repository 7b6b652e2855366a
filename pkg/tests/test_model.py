"""Model construction, Laplace exponents, and config parsing."""

import math

import numpy as np
import pytest

from refracted_levy import (
    LevyModel,
    ModelValidationError,
    RefractionParams,
    load_model_file,
    validate,
)


def test_brownian_exponent_is_quadratic():
    model = LevyModel.brownian(math.sqrt(2.0), 0.0)
    for theta in (0.0, 0.3, 1.0, 4.0):
        assert model.psi(theta) == pytest.approx(theta**2, abs=1e-14)


def test_hyperexponential_exponent_closed_form():
    # psi(theta) = 2 theta - theta / (1 + theta) for drift 2, Exp(1) jumps
    model = LevyModel.with_drift(2.0, [(1.0, 1.0)])
    for theta in (0.1, 1.0, 5.0):
        expect = 2.0 * theta - theta / (1.0 + theta)
        assert model.psi(theta) == pytest.approx(expect, rel=1e-14)
    assert model.psi(0.0) == 0.0


def test_hyperexponential_constructor_compensates_small_jumps():
    # building from the raw triplet or from the drift form must give the
    # same exponent when the compensation is accounted for by hand
    lam, rho = 1.5, 2.0
    comp = lam * ((1.0 - math.exp(-rho)) / rho - math.exp(-rho))
    a = LevyModel.hyperexponential(0.0, 2.0, [(lam, rho)])
    b = LevyModel.with_drift(2.0 + comp, [(lam, rho)])
    for theta in (0.2, 1.0, 3.0):
        assert a.psi(theta) == pytest.approx(b.psi(theta), rel=1e-13)


def test_general_tail_matches_rational_exponent(general_exp_model):
    rational = LevyModel.with_drift(2.0, [(1.0, 1.0)])
    for theta in (0.2, 1.0, 3.0, 8.0):
        assert general_exp_model.psi(theta) == pytest.approx(
            rational.psi(theta), rel=1e-9
        )


def test_psi_prime_matches_difference_quotient():
    model = LevyModel.hyperexponential(1.0, 0.5, [(2.0, 3.0)])
    for theta in (0.5, 1.0, 2.0):
        h = 1e-6
        fd = (model.psi(theta + h) - model.psi(theta - h)) / (2 * h)
        assert model.psi_prime(theta) == pytest.approx(fd, rel=1e-7)


def test_psi_rejects_negative_argument():
    model = LevyModel.brownian(1.0, 0.0)
    with pytest.raises(Exception):
        model.psi(-0.5)


def test_drift_d_branches():
    assert LevyModel.with_drift(2.0, [(1.0, 1.0)]).drift_d() == 2.0
    assert LevyModel.brownian(1.0, 0.0).drift_d() is None


def test_validate_requires_positive_delta():
    model = LevyModel.brownian(1.0, 0.0)
    report = validate(model, RefractionParams(delta=0.0, b=0.0))
    assert not report.ok
    with pytest.raises(ModelValidationError):
        report.raise_if_invalid()


def test_validate_requires_drift_above_delta():
    model = LevyModel.with_drift(1.0, [(1.0, 1.0)])
    assert not validate(model, RefractionParams(delta=1.5, b=0.0)).ok
    assert validate(model, RefractionParams(delta=0.5, b=0.0)).ok


def test_sigma_must_be_nonnegative():
    with pytest.raises(ModelValidationError):
        LevyModel.brownian(-1.0, 0.0)


def test_presets_load(std_bm, cl_exp):
    model, params = std_bm
    assert model.sigma == pytest.approx(math.sqrt(2.0))
    assert params.delta == 0.5 and params.b == 0.0
    model, params = cl_exp
    assert model.drift_d() == 2.0
    assert model.jumps == ((1.0, 1.0),)


def test_config_rejects_unknown_field():
    with pytest.raises(ModelValidationError):
        load_model_file({"sigma": 1.0, "gamma": 0.0, "delta": 0.5, "b": 0.0,
                         "bogus": 1})


def test_config_rejects_gamma_and_drift_together():
    with pytest.raises(ModelValidationError):
        load_model_file({"sigma": 0.0, "gamma": 1.0, "drift": 2.0,
                         "jumps": [{"lambda": 1.0, "rho": 1.0}],
                         "delta": 0.5, "b": 0.0})


def test_config_rejects_bad_jump_entries():
    with pytest.raises(ModelValidationError):
        load_model_file({"sigma": 1.0, "gamma": 0.0,
                         "jumps": [{"lambda": -1.0, "rho": 1.0}],
                         "delta": 0.5, "b": 0.0})


def test_config_missing_file():
    with pytest.raises(ModelValidationError):
        load_model_file("/no/such/model.json")


def test_general_tail_must_decrease():
    model = LevyModel.general(1.0, 0.0, lambda x: np.asarray(x))
    assert not validate(model, RefractionParams(0.5, 0.0)).ok

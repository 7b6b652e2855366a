import math

import numpy as np
import pytest

from refracted_levy import LevyModel, Resolvent, load_model_file


@pytest.fixture(scope="session")
def std_bm():
    return load_model_file("std-bm")


@pytest.fixture(scope="session")
def cl_exp():
    return load_model_file("cl-exp")


@pytest.fixture(scope="session")
def res_std(std_bm):
    model, params = std_bm
    return Resolvent(model, params, 1.0)


@pytest.fixture(scope="session")
def res_cl(cl_exp):
    model, params = cl_exp
    return Resolvent(model, params, 1.0)


@pytest.fixture(scope="session")
def general_exp_model():
    """The cl-exp law written as a general jump tail.

    Forces the Laplace-inversion backend everywhere, so comparisons
    against the closed-form cl-exp preset exercise the generic code path.
    """
    comp = (1.0 - math.exp(-1.0)) - math.exp(-1.0)
    return LevyModel.general(0.0, 2.0 - comp, lambda x: np.exp(-np.asarray(x)))

"""Monte Carlo path simulator: exact distributional facts and reproducibility."""

import numpy as np
import pytest

from refracted_levy import (
    CapabilityError,
    DomainError,
    LevyModel,
    RefractionParams,
    SimConfig,
    build_histogram,
    compare_to_density,
    sample_terminal,
    simulate_path,
)


def test_config_validation():
    with pytest.raises(DomainError):
        SimConfig(step_h=0.5)
    with pytest.raises(DomainError):
        SimConfig(n_paths=0)
    with pytest.raises(DomainError):
        SimConfig(bin_width=-1.0)


def test_general_tail_rejected(general_exp_model):
    cfg = SimConfig(n_paths=10)
    with pytest.raises(CapabilityError):
        sample_terminal(general_exp_model, RefractionParams(0.5, 0.0), 0.0, 1.0, cfg)


def test_pure_drift_paths_are_exact():
    # no noise: below b the path moves at drift 2, above at 2 - delta
    model = LevyModel.with_drift(2.0, [])
    params = RefractionParams(delta=0.5, b=0.0)
    rng = np.random.default_rng(0)
    cfg = SimConfig(step_h=1e-3, n_paths=1)
    # start far below b: pure drift 2 for the whole unit horizon
    val = simulate_path(model, params, -10.0, 1.0, cfg, rng)
    assert val == pytest.approx(-8.0, abs=1e-9)
    # start above b: refracted drift 1.5 throughout
    val = simulate_path(model, params, 5.0, 1.0, cfg, rng)
    assert val == pytest.approx(6.5, abs=1e-9)


def test_terminal_mean_matches_brownian_oracle(std_bm):
    # without refraction the terminal value at e(q) is x plus a centred
    # Gaussian mixture; with gamma = 0 and delta acting only above b the
    # empirical mean must fall between the two extreme drift answers
    model, params = std_bm
    cfg = SimConfig(step_h=5e-3, n_paths=20_000, seed=7)
    samples = sample_terminal(model, params, 0.0, 1.0, cfg)
    mean = float(np.mean(samples))
    # delta pushes mass downward: strictly negative mean, bounded by the
    # always-refracted drift -delta/q
    assert -params.delta / 1.0 - 0.1 < mean < 0.0


def test_reproducibility_is_bitwise(cl_exp):
    model, params = cl_exp
    cfg = SimConfig(step_h=5e-3, n_paths=500, seed=42)
    a = sample_terminal(model, params, 0.0, 1.0, cfg)
    b = sample_terminal(model, params, 0.0, 1.0, cfg)
    assert np.array_equal(a, b)
    c = sample_terminal(model, params, 0.0, 1.0,
                        SimConfig(step_h=5e-3, n_paths=500, seed=43))
    assert not np.array_equal(a, c)


def test_histogram_conserves_paths():
    samples = np.array([-10.0, -0.3, 0.1, 0.4, 12.0])
    edges = np.arange(-1.0, 1.0 + 1e-12, 0.5)
    emp = build_histogram(samples, edges)
    assert emp.counts.sum() == len(samples)
    assert emp.bin_probability.sum() == pytest.approx(1.0)


def test_zscores_against_analytic_density(res_std, std_bm):
    # cheap version of the full validation: fewer paths, wider tolerance
    model, params = std_bm
    cfg = SimConfig(step_h=2e-3, n_paths=30_000, seed=1)
    samples = sample_terminal(model, params, 0.0, 1.0, cfg)
    edges = np.arange(-6.0, 6.0 + 1e-12, 0.5)
    emp = build_histogram(samples, edges)
    ys = np.arange(-6.0, 6.0 + 1e-12, 0.05)
    dens = np.array([res_std.density_scale(0.0, y) for y in ys])
    rep = compare_to_density(emp, ys, dens)
    assert rep.frac_within_4 >= 0.9


def test_unrefracted_region_matches_brownian_law(std_bm):
    # with the threshold far above the start the refraction never fires,
    # so the terminal value is X at e(q): mean 0, variance sigma^2/q = 2
    model, _ = std_bm
    params = RefractionParams(delta=0.5, b=1e6)
    cfg = SimConfig(step_h=2e-3, n_paths=40_000, seed=11)
    samples = sample_terminal(model, params, 0.0, 1.0, cfg)
    se_mean = float(np.std(samples)) / np.sqrt(len(samples))
    assert abs(np.mean(samples)) <= 4 * se_mean
    assert np.var(samples) == pytest.approx(2.0, rel=0.05)

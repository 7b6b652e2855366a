"""Acceptance gate: ten quantitative criteria, one printed verdict each.

Every test prints a single ``[PASS]``/``[FAIL]`` line for its criterion
before asserting, so a full run reads as a checklist.  The tolerances are
fixed; loosening them is not an option.
"""

import math
import time

import numpy as np
import pytest

from refracted_levy import (
    ExpSum,
    LevyModel,
    SimConfig,
    build_histogram,
    compare_to_density,
    root_pair,
    sample_terminal,
)
from refracted_levy.quadrature import adaptive_simpson

Y_GRID = np.linspace(-6.0, 6.0, 241)  # step 0.05
X_SET = (-2.0, -1.0, 0.0, 0.5, 1.0, 2.0)  # includes the threshold b = 0


def verdict(capsys, num, description, value, tol, passed):
    status = "PASS" if passed else "FAIL"
    with capsys.disabled():
        print(f"[{status}] criterion {num}: {description} "
              f"(value {value:.3e}, tol {tol:.0e})")
    assert passed, f"criterion {num}: {value} exceeds {tol}"


@pytest.fixture(scope="module")
def grids(res_std, res_cl):
    """Full dual-route grids for every (preset, x) pair, with wall time."""
    out = {}
    t0 = time.time()
    for name, res in (("std-bm", res_std), ("cl-exp", res_cl)):
        for x in X_SET:
            out[(name, x)] = res.density_grid(x, Y_GRID, route="both")
    out["elapsed"] = time.time() - t0
    return out


def test_criterion_1_route_agreement(capsys, grids):
    gap = max(g.route_gap for k, g in grids.items() if k != "elapsed")
    ok = gap <= 1e-6 and grids["elapsed"] <= 60.0
    verdict(capsys, 1, f"route agreement on all grids ({grids['elapsed']:.1f} s)",
            gap, 1e-6, ok)


def test_criterion_2_spot_value(capsys, res_std):
    a = res_std.density_scale(-1.0, 1.0)
    b = res_std.density_wh(-1.0, 1.0)
    err = max(abs(a - 0.057394), abs(b - 0.057394))
    verdict(capsys, 2, "spot density at x=-1, y=1 by both routes", err, 1e-4, err <= 1e-4)


def test_criterion_3_normalization(capsys, grids):
    defect = max(g.normalization_defect for k, g in grids.items() if k != "elapsed")
    verdict(capsys, 3, "density mass on every (preset, x) grid", defect, 1e-3,
            defect <= 1e-3)


def test_criterion_4_scale_roundtrips(capsys, res_std, res_cl):
    worst = 0.0
    for res in (res_std, res_cl):
        for ev in (res.scale_X, res.scale_Y):
            ss = ev.leading_root + np.geomspace(0.1, 10.0, 20) * max(
                1.0, ev.leading_root)
            for s in ss:
                num, ana = ev.laplace_roundtrip(s)
                worst = max(worst, abs(num - ana) / abs(ana))
    exact = (res_std.scale_X.value_at_zero == 0.0
             and res_cl.scale_X.value_at_zero == 0.5)
    verdict(capsys, 4, "Laplace round-trips at 20 points per evaluator, W(0) exact",
            worst, 1e-8, worst <= 1e-8 and exact)


def test_criterion_5_derivative_transform(capsys, res_std):
    # int_{-inf}^0 e^{varphi z} W'(-z) dz = 1/delta - W(0) = 2 by quadrature
    ev = res_std.scale_X
    var = res_std.varphi
    span = ev.x_max
    num = adaptive_simpson(lambda u: np.exp(-var * u) * ev.W_prime(u),
                           1e-12, span, tol=1e-12)
    a, eta = ev.dominant
    num += a * eta * math.exp((eta - var) * span) / (var - eta)
    err = abs(num - 2.0)
    verdict(capsys, 5, "tilted-root transform of the scale derivative equals 2",
            err, 1e-8, err <= 1e-8)


def test_criterion_6_kernel_exchange(capsys, res_std, res_cl):
    worst = 0.0
    for res in (res_std, res_cl):
        fs = res.factors
        for x in (-0.5, -1.0, -2.0):
            lhs = adaptive_simpson(
                lambda z: np.exp(-fs.varphi * (x - z)) * fs.f_aux(z), x, 0.0,
                tol=1e-11)
            rhs = adaptive_simpson(
                lambda z: np.exp(-fs.phi * (x - z)) * fs.scale_Y.W(-z), x, 0.0,
                tol=1e-11)
            worst = max(worst, abs(lhs - rhs))
    verdict(capsys, 6, "kernel exchange identity at three depths, both presets",
            worst, 1e-8, worst <= 1e-8)


def test_criterion_7_factor_transforms(capsys, res_std, res_cl):
    worst_f1 = worst_f2 = 0.0
    for res in (res_std, res_cl):
        fs = res.factors
        span = 40.0 / fs.varphi
        for s in np.geomspace(0.2, 20.0, 10):
            num = adaptive_simpson(lambda x: np.exp(-s * x) * fs.F1(x), 0.0,
                                   span, tol=1e-13)
            sup_x, inf_x, sup_y, inf_y = fs.wh_transforms(s)
            worst_f1 = max(worst_f1, abs(num - (sup_y / sup_x - 1.0) / s))
            body = adaptive_simpson(lambda u: np.exp(-s * u) * fs.F2(-u), 0.0,
                                    span, tol=1e-13)
            reflected = ExpSum(-fs._f2_sum.rates, fs._f2_sum.coeffs)
            num2 = body + reflected.tail_transform(s, span)
            worst_f2 = max(worst_f2, abs(num2 - (inf_x / inf_y - 1.0) / s))
    ok = worst_f1 <= 1e-9 and worst_f2 <= 1e-6
    verdict(capsys, 7, f"factor transforms F1 ({worst_f1:.1e}) and F2 at 10 points each",
            worst_f2, 1e-6, ok)


def test_criterion_8_kernel_mass(capsys, res_std, res_cl):
    err = max(abs(res_std.factors.kq_total_mass() - 1.0),
              abs(res_cl.factors.kq_total_mass() - 1.0))
    verdict(capsys, 8, "total mass of the convolution kernel, both presets", err, 1e-6,
            err <= 1e-6)


def test_criterion_9_monte_carlo(capsys, res_std, res_cl, std_bm, cl_exp):
    t0 = time.time()
    worst = 1.0
    for (model, params), res in ((std_bm, res_std), (cl_exp, res_cl)):
        cfg = SimConfig(step_h=1e-3, n_paths=200_000, seed=0)
        samples = sample_terminal(model, params, 0.0, 1.0, cfg)
        edges = np.arange(-6.0, 6.0 + 1e-12, 0.25)
        emp = build_histogram(samples, edges)
        dens = np.array([res.density_scale(0.0, y) for y in Y_GRID])
        rep = compare_to_density(emp, Y_GRID, dens)
        worst = min(worst, rep.frac_within_4)
    elapsed = time.time() - t0
    ok = worst >= 0.95 and elapsed <= 300.0
    verdict(capsys, 9, f"Monte Carlo bins within 4 SE at x=0 ({elapsed:.0f} s)",
            worst, 0.95, ok)


def test_criterion_10_root_properties(capsys):
    rng = np.random.default_rng(1)
    models = (
        LevyModel.brownian(math.sqrt(2.0), 0.0),
        LevyModel.with_drift(2.0, [(1.0, 1.0)]),
    )
    worst_res = 0.0
    ordered = True
    for i in range(1000):
        model = models[i % 2]
        q = float(rng.uniform(0.05, 20.0))
        if model.drift_d() is None:
            delta = float(rng.uniform(0.01, 10.0))
        else:
            delta = float(rng.uniform(0.01, 0.99)) * model.drift_d()
        rp = root_pair(model, delta, q)
        ordered = ordered and rp.varphi > rp.phi
        worst_res = max(worst_res, max(rp.residuals) / max(1.0, q))
    ok = ordered and worst_res <= 1e-12
    verdict(capsys, 10, "root ordering and residuals on 1000 random (q, delta) draws",
            worst_res, 1e-12, ok)

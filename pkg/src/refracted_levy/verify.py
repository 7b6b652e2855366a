"""End-to-end identity suite.

Runs every cross-check the package supports for one (model, params, q)
triple: root residuals, Laplace round-trips of both scale functions, the
value-at-zero branch, the factor transform identities, the two
infimum-law transforms, three convolution identities that tie the factor
functions back to the scale functions, the kernel mass, and the
agreement of the two density routes.  Any check that raises is reported
failed with the exception text; the suite always runs to the end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .factors import FactorSet
from .model import LevyModel, RefractionParams
from .quadrature import adaptive_simpson
from .resolvent import Resolvent
from .roots import root_pair
from .scale import ExpSum


@dataclass(frozen=True)
class Check:
    name: str
    description: str
    value: float
    tolerance: float
    passed: bool
    note: str = ""

    def as_dict(self) -> dict:
        out = {
            "name": self.name,
            "description": self.description,
            "value": self.value,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }
        if self.note:
            out["note"] = self.note
        return out


@dataclass(frozen=True)
class VerifyReport:
    checks: tuple[Check, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {"ok": self.ok, "checks": [c.as_dict() for c in self.checks]}

    def summary_lines(self):
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            yield (
                f"[{status}] {c.name}: {c.description} "
                f"(value {c.value:.3e}, tol {c.tolerance:.0e})"
            )


def run_verify(model: LevyModel, params: RefractionParams, q: float) -> VerifyReport:
    checks: list[Check] = []

    def add(name, description, value, tolerance, note=""):
        checks.append(
            Check(name, description, float(value), tolerance, abs(value) <= tolerance, note)
        )

    def guard(name, description, tolerance, fn):
        try:
            value, note = fn()
        except Exception as exc:  # report and continue
            checks.append(Check(name, description, math.inf, tolerance, False,
                                f"{type(exc).__name__}: {exc}"))
        else:
            add(name, description, value, tolerance, note)

    rp = root_pair(model, params.delta, q)
    add("root-residual-untilted", "defining equation residual of the X root",
        rp.residuals[0], 1e-12 * max(1.0, q))
    add("root-residual-tilted", "defining equation residual of the Y root",
        rp.residuals[1], 1e-12 * max(1.0, q))
    add("root-ordering", "tilted root exceeds untilted root (gap must be > 0)",
        min(rp.varphi - rp.phi, 0.0), 0.0)

    fs = FactorSet(model, params, q)
    closed = fs.closed_form
    rt_tol = 1e-8 if closed else 1e-5

    for ev, tag in ((fs.scale_X, "X"), (fs.scale_Y, "Y")):
        def roundtrips(ev=ev):
            ss = ev.leading_root + np.geomspace(0.1, 10.0, 20) * max(
                1.0, ev.leading_root
            )
            worst = 0.0
            for s in ss:
                num, ana = ev.laplace_roundtrip(s)
                worst = max(worst, abs(num - ana) / abs(ana))
            return worst, ""

        def roundtrips_measure(ev=ev):
            ss = ev.leading_root + np.geomspace(0.2, 5.0, 8) * max(
                1.0, ev.leading_root
            )
            worst = 0.0
            for s in ss:
                num, ana = ev.laplace_roundtrip_measure(s)
                worst = max(worst, abs(num - ana) / abs(ana))
            return worst, ""

        guard(f"scale-roundtrip-{tag}",
              f"max relative Laplace round-trip error, scale function {tag}",
              rt_tol, roundtrips)
        guard(f"scale-roundtrip-measure-{tag}",
              f"round-trip in measure form (atom plus derivative), {tag}",
              10 * rt_tol, roundtrips_measure)

    d = model.drift_d()
    expect0 = 1.0 / d if d is not None else 0.0
    add("scale-at-zero-branch",
        "value at zero equals 1/drift (bounded variation) or 0",
        fs.scale_X.value_at_zero - expect0, 0.0)

    def f1_identity():
        worst = 0.0
        span = -math.log(1e-15) / fs.varphi
        for s in np.geomspace(0.2, 20.0, 10):
            num = adaptive_simpson(
                lambda x: np.exp(-s * x) * fs.F1(x), 0.0, span, tol=1e-12
            )
            sup_x, _, sup_y, _ = fs.wh_transforms(s)
            worst = max(worst, abs(num - (sup_y / sup_x - 1.0) / s))
        return worst, ""

    guard("factor-transform-F1",
          "transform of F1 against the supremum-factor ratio", 1e-9, f1_identity)

    def f2_identity():
        worst = 0.0
        for s in np.geomspace(0.2, 20.0, 10):
            num = _left_transform(fs, fs.F2, s)
            _, inf_x, _, inf_y = fs.wh_transforms(s)
            worst = max(worst, abs(num - (inf_x / inf_y - 1.0) / s))
        return worst, ""

    guard("factor-transform-F2",
          "transform of F2 against the infimum-factor ratio",
          1e-6 if closed else 1e-4, f2_identity)

    for tag in ("X", "Y"):
        def inf_laws(tag=tag):
            worst = 0.0
            for s in (0.5, 1.0, 2.0, 5.0):
                num, ana = fs.inf_law_check(s, tag)
                worst = max(worst, abs(num - ana) / abs(ana))
            return worst, ""

        guard(f"infimum-law-{tag}",
              f"running-infimum law transform vs analytic factor, process {tag}",
              1e-9 if closed else 1e-3, inf_laws)

    def conv_exchange():
        # int_x^0 e^{-varphi(x-z)} f(z) dz == int_x^0 e^{-Phi(x-z)} W_Y(-z) dz
        worst = 0.0
        for x in (-0.5, -1.0, -2.0):
            tol = 1e-11 if closed else 1e-7
            lhs = adaptive_simpson(
                lambda z: np.exp(-fs.varphi * (x - z)) * fs.f_aux(z), x, 0.0,
                tol=tol,
            )
            rhs = adaptive_simpson(
                lambda z: np.exp(-fs.phi * (x - z)) * fs.scale_Y.W(-z), x, 0.0,
                tol=tol,
            )
            worst = max(worst, abs(lhs - rhs))
        return worst, ""

    guard("kernel-exchange",
          "exponential smoothing of f equals the same smoothing of the tilted scale",
          1e-8 if closed else 1e-4, conv_exchange)

    def tail_mass():
        # int_0^inf e^{-varphi u} W'(u) du == 1/delta - W(0)
        span = fs.scale_X.x_max
        num = adaptive_simpson(
            lambda u: np.exp(-fs.varphi * u) * fs.scale_X.W_prime(np.maximum(u, 1e-12)),
            0.0,
            span,
            tol=1e-11 if closed else 1e-7,
        )
        a, eta = fs.scale_X.dominant
        num += a * eta * math.exp((eta - fs.varphi) * span) / (fs.varphi - eta)
        return num - (1.0 / params.delta - fs.scale_X.value_at_zero), ""

    guard("derivative-tail-transform",
          "tilted-root transform of the scale derivative equals 1/delta - W(0)",
          1e-8 if closed else 1e-4, tail_mass)

    def conv_factor():
        # int_{w}^0 F2'(w - z) f(z) dz for w < 0 against its closed form
        worst = 0.0
        c = (fs.varphi / fs.phi) * (1.0 - params.delta * fs.scale_X.value_at_zero)
        for w in (-0.5, -1.5):
            lhs = adaptive_simpson(
                lambda z: fs.F2_prime(w - z) * fs.f_aux(z), w, 0.0,
                tol=1e-11 if closed else 1e-7,
            )
            rhs = c * fs.f_aux(w) - (fs.varphi / fs.phi) * fs.scale_X.W(-w)
            worst = max(worst, abs(lhs - rhs))
        return worst, ""

    guard("kernel-convolution",
          "convolution of F2' with f against its scale-function reduction",
          1e-8 if closed else 1e-4, conv_factor)

    guard("kernel-total-mass", "total mass of the convolution kernel density",
          1e-6 if closed else 1e-4, lambda: (fs.kq_total_mass() - 1.0, ""))

    res = Resolvent(model, params, q, factors=fs)
    ys = np.arange(-6.0, 6.0 + 1e-9, 0.1)

    def routes():
        worst_gap = 0.0
        worst_defect = 0.0
        for x in (-1.0, 0.5):
            grid = res.density_grid(x, ys, route="both")
            worst_gap = max(worst_gap, grid.route_gap)
            worst_defect = max(worst_defect, grid.normalization_defect)
        return worst_gap, f"normalization defect {worst_defect:.2e}"

    guard("route-agreement",
          "max gap between the scale and convolution density routes",
          1e-6 if closed else 1e-4, routes)

    def normalization():
        worst = 0.0
        for x in (-1.0, 0.5):
            grid = res.density_grid(x, ys, route="scale")
            worst = max(worst, grid.normalization_defect)
        return worst, ""

    guard("density-normalization",
          "total probability mass of the density with tail corrections",
          1e-3, normalization)

    return VerifyReport(tuple(checks))


def _left_transform(fs: FactorSet, func, s: float) -> float:
    """int_{-infty}^0 e^{s x} func(x) dx by quadrature plus analytic tail."""
    if fs.closed_form:
        sum_x = fs._f2_sum if func is fs.F2 else None
        span = 40.0 / max(s, 1.0)
        body = adaptive_simpson(lambda u: np.exp(-s * u) * func(-u), 0.0, span,
                                tol=1e-12)
        if sum_x is not None:
            reflected = ExpSum(-sum_x.rates, sum_x.coeffs)
            return body + reflected.tail_transform(s, span)
        return body
    span = fs._table_span
    return adaptive_simpson(lambda u: np.exp(-s * u) * func(-u), 0.0, span,
                            tol=1e-9)

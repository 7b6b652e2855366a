"""Density of the refracted process at an independent exponential time.

Two independent routes compute the same function:

* the scale route combines W, its tilted twin and their derivatives with
  exponential weights in the two roots;
* the convolution route convolves the explicit kernel density ``K_q``
  with the auxiliary functions F1 / F2 of the factorisation module.

Their agreement is the central cross-check of the package: the routes
share only the root finder and the scale evaluators, and the second one
exercises the Wiener-Hopf side end to end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InternalConsistencyError
from .factors import FactorSet
from .model import LevyModel, RefractionParams
from .quadrature import adaptive_simpson

#: absolute tolerance for every finite convolution integral
QUAD_TOL = 1e-9


@dataclass(frozen=True)
class ResolventQuery:
    """One starting point and route selection for a density computation."""

    model: LevyModel
    params: RefractionParams
    q: float
    x: float
    route: str = "both"

    def __post_init__(self):
        if self.route not in ("scale", "wiener-hopf", "both"):
            raise DomainError(f"unknown route {self.route!r}")


@dataclass
class DensityGrid:
    """Density values on an ascending y grid, with route diagnostics."""

    y_values: np.ndarray
    density_scale: np.ndarray | None
    density_wh: np.ndarray | None
    route_gap: float | None
    normalization_defect: float
    threshold_gap: float

    @property
    def density(self) -> np.ndarray:
        if self.density_scale is not None:
            return self.density_scale
        return self.density_wh


class Resolvent:
    """Density evaluator for one (model, params, q) triple.

    Holds the scale evaluators and factor set; evaluation methods are
    read-only and may be called concurrently.
    """

    def __init__(
        self,
        model: LevyModel,
        params: RefractionParams,
        q: float,
        *,
        factors: FactorSet | None = None,
    ):
        self.model = model
        self.params = params
        self.q = q
        self.factors = factors if factors is not None else FactorSet(model, params, q)
        self.scale_X = self.factors.scale_X
        self.scale_Y = self.factors.scale_Y
        self.phi = self.factors.phi
        self.varphi = self.factors.varphi
        self._j_cache: dict[float, float] = {}
        self._clip_floor = -1e-10 if self.factors.closed_form else -1e-6
        self._tail_wp_table = None

    # -- scale route -------------------------------------------------------

    def _j_integral(self, x: float) -> float:
        """int_0^{x-b} e^{-Phi u} W_Y(u) du, shared by every y at fixed x."""
        top = x - self.params.b
        if top <= 0:
            return 0.0
        cached = self._j_cache.get(x)
        if cached is None:
            cached = adaptive_simpson(
                lambda u: np.exp(-self.phi * u) * self.scale_Y.W(u),
                0.0,
                top,
                tol=QUAD_TOL,
            )
            self._j_cache[x] = cached
        return cached

    def _tail_wp(self, c: float) -> float:
        """int_c^inf e^{-varphi u} W'(u) du, cached for the spline backend.

        The closed form is exact.  For the inversion backend the value is
        read off one cumulative Simpson table instead of a fresh
        quadrature per call: the table is smoother than adaptive panels
        over spline knots, and the y << b density path multiplies this
        transform by e^{varphi (b - y)}, which would amplify any
        panel-level noise.
        """
        ev = self.scale_X
        if self.factors.closed_form:
            return ev.tail_transform_W_prime(self.varphi, c)
        a, eta = ev.dominant
        if c >= ev.x_max:
            return a * eta * math.exp((eta - self.varphi) * c) / (self.varphi - eta)
        if self._tail_wp_table is None:
            from scipy import integrate
            from scipy.interpolate import CubicSpline

            grid = np.linspace(0.0, ev.x_max, 8193)
            vals = np.exp(-self.varphi * grid) * ev.W_prime(
                np.maximum(grid, 1e-9)
            )
            cum = integrate.cumulative_simpson(vals, x=grid, initial=0.0)
            tail_past = (
                a * eta * math.exp((eta - self.varphi) * ev.x_max)
                / (self.varphi - eta)
            )
            self._tail_wp_table = CubicSpline(grid, (cum[-1] - cum) + tail_past)
        return float(self._tail_wp_table(c))

    def density_scale(self, x: float, y: float) -> float:
        """Density at y via the scale-function formulas."""
        b, q, delta = self.params.b, self.q, self.params.delta
        phi, var = self.phi, self.varphi
        growth = math.exp(phi * (x - b)) * (1.0 + delta * phi * self._j_integral(x))
        if y >= b:
            out = (
                q * (var - phi) / (delta * phi) * math.exp(-var * (y - b)) * growth
                - q * self.scale_Y.W(x - y)
            )
        else:
            # int_b^x W_Y(x-z) W'(z-y) dz, empty unless x > b
            body = 0.0
            if x > b:
                body = adaptive_simpson(
                    lambda u: self.scale_Y.W(u) * self.scale_X.W_prime(x - y - u),
                    0.0,
                    x - b,
                    tol=QUAD_TOL,
                )
            tail = math.exp(var * (b - y)) * self._tail_wp(b - y)
            out = (
                -delta * q * body
                - q * self.scale_X.W(x - y)
                + q * (var - phi) / phi * tail * growth
            )
        return self._clip(out, x, y)

    # -- convolution route -------------------------------------------------

    def density_wh(self, x: float, y: float) -> float:
        """Density at y via the Wiener-Hopf convolution formula."""
        b = self.params.b
        fs = self.factors
        w = y - x
        kq_w = fs.Kq_density(w)
        if w == 0.0:
            # the kernel density jumps at the origin for bounded-variation
            # models; take its left limit there so both routes resolve the
            # point y == x the same way as the scale formulas do
            kq_w -= self.q * (self.phi / self.varphi) * self.scale_Y.value_at_zero
        lo, hi = b - x, y - x
        if y >= b:
            head = (self.varphi / self.phi) * kq_w
            if hi > lo:
                conv = adaptive_simpson(
                    lambda z: fs.F1_prime(w - z) * fs.Kq_density(z),
                    lo,
                    hi,
                    tol=QUAD_TOL,
                    points=(0.0,),
                )
            else:
                conv = 0.0
            out = head + conv
        else:
            w0 = self.scale_X.value_at_zero
            head = (
                (self.varphi / self.phi)
                * (1.0 - self.params.delta * w0)
                * kq_w
            )
            lo, hi = y - x, b - x
            if hi > lo:
                conv = adaptive_simpson(
                    lambda z: fs.F2_prime(w - z) * fs.Kq_density(z),
                    lo,
                    hi,
                    tol=QUAD_TOL,
                    points=(0.0,),
                )
            else:
                conv = 0.0
            out = head - conv
        return self._clip(out, x, y)

    def _clip(self, value: float, x: float, y: float) -> float:
        if value < self._clip_floor:
            raise InternalConsistencyError(
                f"negative density {value:.3e} at x={x}, y={y}"
            )
        return max(value, 0.0)

    # -- grids -------------------------------------------------------------

    def density_grid(self, x: float, y_values, route: str = "both") -> DensityGrid:
        ys = np.asarray(y_values, dtype=float)
        if ys.ndim != 1 or len(ys) < 2 or np.any(np.diff(ys) <= 0):
            raise DomainError("y_values must be a strictly increasing 1-d grid")
        dens_a = dens_b = None
        if route in ("scale", "both"):
            dens_a = np.array([self.density_scale(x, y) for y in ys])
        if route in ("wiener-hopf", "both"):
            dens_b = np.array([self.density_wh(x, y) for y in ys])
        gap = None
        if dens_a is not None and dens_b is not None:
            gap = float(np.max(np.abs(dens_a - dens_b)))
        ref = dens_a if dens_a is not None else dens_b
        fn = self.density_scale if dens_a is not None else self.density_wh
        defect = abs(self._grid_mass(x, ys, ref, fn) - 1.0)
        b = self.params.b
        left_limit = self._left_limit_at_threshold(x)
        right_limit = self.density_scale(x, b) if dens_a is not None else self.density_wh(x, b)
        return DensityGrid(
            y_values=ys,
            density_scale=dens_a,
            density_wh=dens_b,
            route_gap=gap,
            normalization_defect=defect,
            threshold_gap=abs(right_limit - left_limit),
        )

    def _left_limit_at_threshold(self, x: float) -> float:
        """y -> b- limit of the density (the y < b branch evaluated at b)."""
        b, q, delta = self.params.b, self.q, self.params.delta
        phi, var = self.phi, self.varphi
        growth = math.exp(phi * (x - b)) * (1.0 + delta * phi * self._j_integral(x))
        body = 0.0
        if x > b:
            # W' evaluated at its right limit at the endpoint u = x - b
            body = adaptive_simpson(
                lambda u: self.scale_Y.W(u)
                * self.scale_X.W_prime(np.maximum(x - b - u, 1e-12)),
                0.0,
                x - b,
                tol=QUAD_TOL,
            )
        tail = self._tail_wp(0.0)
        out = (
            -delta * q * body
            - q * self.scale_X.W(x - b)
            + q * (var - phi) / phi * tail * growth
        )
        return max(out, 0.0)

    def _grid_mass(self, x: float, ys: np.ndarray, dens: np.ndarray, fn) -> float:
        """Quadrature mass over the grid span plus exponential tails.

        Integration splits at y = x and y = b, where bounded-variation
        models have genuine density jumps.  The right tail decays at the
        known rate varphi; the left rate is not stated analytically, so
        it is fitted over the last decade of the grid.
        """
        mass = adaptive_simpson(
            lambda yv: np.array([fn(x, y) for y in np.atleast_1d(yv)]),
            float(ys[0]),
            float(ys[-1]),
            # the spline backend carries ~1e-6 noise per point; asking the
            # outer quadrature for more than ~1e-5 would chase that noise
            tol=1e-6 if self.factors.closed_form else 3e-5,
            points=(x, self.params.b),
        )
        if dens[-1] > 0:
            mass += dens[-1] / self.varphi
        left_rate = self._fit_left_rate(ys, dens)
        if dens[0] > 0 and left_rate is not None:
            mass += dens[0] / left_rate
        return mass

    @staticmethod
    def _fit_left_rate(ys: np.ndarray, dens: np.ndarray):
        head = dens[: max(8, len(dens) // 20)]
        ys_head = ys[: len(head)]
        positive = head > 0
        if positive.sum() < 4:
            return None
        slope = np.polyfit(ys_head[positive], np.log(head[positive]), 1)[0]
        if slope <= 0:
            return None
        return float(slope)

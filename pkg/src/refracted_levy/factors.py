"""Wiener-Hopf factor transforms and the explicit auxiliary functions.

Everything here lives on the factorisation side of the resolvent
computation: the four extremum transforms at an independent exponential
time, the convolution kernel density ``K_q``, and the auxiliary functions
``F1``, ``F2`` (with derivatives) and ``f``.

With closed-form scale functions all of these reduce to finite
exponential sums whose leading growth terms cancel algebraically, so they
are assembled symbolically from the pole expansions (no catastrophic
cancellation in the tails).  For general models each function is
recovered by numerically inverting its own one-sided Laplace transform,
written in terms of the extremum factors, and cached on a spline grid.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from .errors import DomainError, InternalConsistencyError
from .model import LevyModel, RefractionParams, validate
from .quadrature import adaptive_simpson
from .scale import ExpSum, ScaleEvaluator, build_scale, euler_inversion, _psi_complex_general

TABLE_NODES = 2048


class FactorSet:
    """Precomputed factorisation data for one (model, delta, q) triple.

    Immutable after construction; safe for concurrent reads.
    """

    def __init__(
        self,
        model: LevyModel,
        params: RefractionParams,
        q: float,
        *,
        scale_X: ScaleEvaluator | None = None,
        scale_Y: ScaleEvaluator | None = None,
    ):
        validate(model, params).raise_if_invalid()
        if q <= 0:
            raise DomainError(f"q must be positive (got {q})")
        self.model = model
        self.params = params
        self.q = q
        self.delta = params.delta
        self.scale_X = scale_X if scale_X is not None else build_scale(model, q, 0.0)
        self.scale_Y = (
            scale_Y if scale_Y is not None else build_scale(model, q, params.delta)
        )
        self.phi = self.scale_X.leading_root
        self.varphi = self.scale_Y.leading_root
        self.closed_form = (
            self.scale_X.exp_sum is not None and self.scale_Y.exp_sum is not None
        )
        #: coefficient of the growing part of f:  f(x) ~ A * e^{-phi x}, x -> -inf
        self._f_growth = (self.varphi - self.phi) / (self.delta * self.phi)
        #: K_q density on [0, inf):  C * e^{-phi x}
        self._kq_pos = self.q * (self.varphi - self.phi) / (self.varphi * self.delta)
        if self.closed_form:
            self._build_exp_sums()
        else:
            self._build_tables()

    # -- construction -----------------------------------------------------

    def _build_exp_sums(self):
        phi, var = self.phi, self.varphi
        sx, sy = self.scale_X.exp_sum, self.scale_Y.exp_sum
        a, s = sx.coeffs, sx.rates
        b, t = sy.coeffs, sy.rates
        # F2(x) = -(delta*var/phi) sum_j a_j (s_j - phi)/(s_j - var) e^{-s_j x}
        # after the e^{-var x} growth cancels against the integral term.
        f2_coeffs = -(self.delta * var / phi) * a * (s - phi) / (s - var)
        self._f2_sum = ExpSum(-s, f2_coeffs).cleaned()
        self._f2_prime_sum = self._f2_sum.derivative()
        # decaying part of f: rates -t_j, the t_1 = varphi term vanishes
        fr_coeffs = b * (t - var) / (t - phi)
        self._f_rem_sum = ExpSum(-t, fr_coeffs).cleaned()
        # negative side of K_q: growth terms cancel exactly
        self._kq_neg_sum = ExpSum(-t, -(self.q * phi / var) * fr_coeffs).cleaned()

    def _build_tables(self):
        """Generic backend: invert the one-sided transforms numerically.

        All transforms below are analytic on Re s > 0 once the known
        growth terms are removed, so the half-plane inversion contour is
        valid; removable singularities at the leading roots are defused
        by subtracting the numerically computed residual numerator.
        """
        phi, var, q = self.phi, self.varphi, self.q
        f2_at_0 = (var / phi) * (1.0 - self.delta * self.scale_X.value_at_zero) - 1.0
        growth = self._f_growth
        kq_c = self._kq_pos

        def u_x(s):  # E[exp(s * inf X)] continued to complex s
            num = (q / phi) * (phi - s)
            den = q - _psi_complex_general(self.model, s)
            out = num / den
            near = np.abs(s - phi) < 1e-8
            if np.any(near):
                out = np.where(near, q / (phi * self.model.psi_prime(phi)), out)
            return out

        def u_y(s):  # same for the tilted process Y
            num = (q / var) * (var - s)
            den = q - _psi_complex_general(self.model, s) + self.delta * s
            out = num / den
            near = np.abs(s - var) < 1e-8
            if np.any(near):
                out = np.where(
                    near, q / (var * (self.model.psi_prime(var) - self.delta)), out
                )
            return out

        def f2_hat(s):
            return (u_x(s) / u_y(s) - 1.0) / s

        def f2_prime_hat(s):
            return f2_at_0 - s * f2_hat(s)

        # Boundary value of F2' by the initial-value theorem, Richardson
        # extrapolated in 1/s to kill the leading asymptotic corrections.
        sv = np.array([100.0, 200.0, 400.0]) * max(1.0, phi)
        gv = np.real(sv * f2_prime_hat(sv + 0j))
        vand = np.vander(1.0 / sv, 3, increasing=True)
        f2p_at_0 = float(np.linalg.solve(vand, gv)[0])

        r_frem = (var / q) * complex(u_y(np.array([phi + 0j]))[0]) - growth

        def f_rem_hat(s):
            return ((var / q) * u_y(s) - growth - r_frem) / (s - phi)

        r_kq = kq_c - phi * complex(u_y(np.array([phi + 0j]))[0])

        def kq_neg_hat(s):
            return (kq_c - phi * u_y(s) - r_kq) / (s - phi)

        span = max(self.scale_X.x_max, self.scale_Y.x_max)
        u = np.linspace(0.0, span, TABLE_NODES)
        w0_y = self.scale_Y.value_at_zero
        tables = {}
        for name, hat, at0 in (
            ("f2", f2_hat, f2_at_0),
            ("f2p", f2_prime_hat, f2p_at_0),
            ("f_rem", f_rem_hat, w0_y - growth),
            ("kq_neg", kq_neg_hat, kq_c - (q * phi / var) * w0_y),
        ):
            # Subtract the boundary value so the inverted function is
            # continuous at the origin, then add it back on the grid.
            def smoothed(s, hat=hat, at0=at0):
                return hat(s) - at0 / (s + 1.0)

            # fewer Euler terms than the scale build: these transforms are
            # O(1), so the roundoff amplification 10^{m/3} dominates sooner
            vals = np.empty(TABLE_NODES)
            vals[1:] = euler_inversion(smoothed, u[1:], terms=18) + at0 * np.exp(
                -u[1:]
            )
            vals[0] = at0
            tables[name] = CubicSpline(u, vals)
        self._tables = tables
        self._table_span = span
        # values at the table edge are ~1e-14 of the peak; the rate only
        # shapes the negligible extrapolated remainder
        self._table_rate = phi

    # -- extremum transforms ----------------------------------------------

    def wh_transforms(self, s: float):
        """The four extremum transforms at an exponential time, at real s > 0.

        Returns (E[e^{-s sup X}], E[e^{s inf X}], E[e^{-s sup Y}],
        E[e^{s inf Y}]); the infimum factors take their limiting values at
        the removable points s = phi, s = varphi.
        """
        if s <= 0:
            raise DomainError(f"transform argument must be positive (got {s})")
        phi, var, q = self.phi, self.varphi, self.q
        sup_x = phi / (phi + s)
        sup_y = var / (var + s)
        if abs(s - phi) < 1e-9 * max(1.0, phi):
            inf_x = q / (phi * self.model.psi_prime(phi))
        else:
            inf_x = (q / phi) * (phi - s) / (q - self.model.psi(s))
        if abs(s - var) < 1e-9 * max(1.0, var):
            inf_y = q / (var * (self.model.psi_prime(var) - self.delta))
        else:
            inf_y = (q / var) * (var - s) / (q - self.model.psi(s) + self.delta * s)
        return sup_x, inf_x, sup_y, inf_y

    # -- auxiliary functions ----------------------------------------------

    def F1(self, x):
        """((varphi - phi)/phi) e^{-varphi x} on [0, inf)."""
        x_arr = np.asarray(x, dtype=float)
        if np.any(x_arr < 0):
            raise DomainError("F1 is defined on [0, inf)")
        out = (self.varphi - self.phi) / self.phi * np.exp(-self.varphi * x_arr)
        return out if np.ndim(x) else float(out)

    def F1_prime(self, x):
        x_arr = np.asarray(x, dtype=float)
        if np.any(x_arr < 0):
            raise DomainError("F1_prime is defined on (0, inf)")
        out = -self.varphi * self.F1(x_arr)
        return out if np.ndim(x) else float(out)

    def F2(self, x):
        x_arr = np.asarray(x, dtype=float)
        if np.any(x_arr > 0):
            raise DomainError("F2 is defined on (-inf, 0]")
        if self.closed_form:
            out = self._f2_sum(x_arr)
        else:
            out = self._table_eval("f2", x_arr)
        return out if np.ndim(x) else float(out)

    def F2_prime(self, x):
        """Derivative of F2; at a kink of W' this is the right limit."""
        x_arr = np.asarray(x, dtype=float)
        if np.any(x_arr > 0):
            raise DomainError("F2_prime is defined on (-inf, 0]")
        if self.closed_form:
            out = self._f2_prime_sum(x_arr)
        else:
            out = self._table_eval("f2p", x_arr)
        return out if np.ndim(x) else float(out)

    def f_aux(self, x):
        """The kernel f of the negative K_q branch, on (-inf, 0]."""
        x_arr = np.asarray(x, dtype=float)
        if np.any(x_arr > 0):
            raise DomainError("f is defined on (-inf, 0]")
        grow = self._f_growth * np.exp(-self.phi * x_arr)
        if self.closed_form:
            out = grow + self._f_rem_sum(x_arr)
        else:
            out = grow + self._table_eval("f_rem", x_arr)
        return out if np.ndim(x) else float(out)

    def Kq_density(self, x):
        """Density of the convolution law K_q on the whole line."""
        x_arr = np.asarray(x, dtype=float)
        out = np.empty(x_arr.shape)
        pos = x_arr >= 0
        out[pos] = self._kq_pos * np.exp(-self.phi * x_arr[pos])
        neg = ~pos
        if np.any(neg):
            if self.closed_form:
                out[neg] = self._kq_neg_sum(x_arr[neg])
            else:
                out[neg] = self._table_eval("kq_neg", x_arr[neg])
        floor = np.min(out) if out.size else 0.0
        # the numerically inverted tables carry an intrinsic noise floor
        allowed = -1e-10 if self.closed_form else -1e-5 * self._kq_pos
        if floor < allowed:
            raise InternalConsistencyError(
                f"K_q density came out negative ({floor:.3e}); "
                "scale/quadrature inputs are inconsistent"
            )
        np.clip(out, 0.0, None, out=out)
        return out if np.ndim(x) else float(out)

    def _table_eval(self, name, x):
        u = -np.asarray(x, dtype=float)
        spline = self._tables[name]
        out = np.empty(u.shape)
        inside = u <= self._table_span
        out[inside] = spline(u[inside])
        far = ~inside
        if np.any(far):
            edge = float(spline(self._table_span))
            out[far] = edge * np.exp(-self._table_rate * (u[far] - self._table_span))
        return out

    # -- verification-side quantities -------------------------------------

    def kq_total_mass(self) -> float:
        """Numeric total mass of K_q (should be 1: it is a probability law)."""
        phi = self.phi
        tol = 1e-10 if self.closed_form else 3e-8
        span_pos = -math.log(1e-12) / phi
        pos = adaptive_simpson(
            lambda u: self.Kq_density(u), 0.0, span_pos, tol=tol
        )
        pos += self._kq_pos * math.exp(-phi * span_pos) / phi
        if self.closed_form:
            rates = np.real(self._kq_neg_sum.rates)  # decay rates towards -inf
            span_neg = -math.log(1e-12) / np.min(rates)
        else:
            span_neg = self._table_span
        neg = adaptive_simpson(
            lambda u: self.Kq_density(-u), 0.0, span_neg, tol=tol
        )
        if self.closed_form:
            r, c = self._kq_neg_sum.rates, self._kq_neg_sum.coeffs
            # int_{-inf}^{-span} sum c e^{r x} dx with Re r > 0
            neg += float(np.real(np.sum(c * np.exp(-r * span_neg) / r)))
        return pos + neg

    def inf_law_check(self, s: float, process: str = "X"):
        """Transform of the infimum law computed two ways.

        Numeric side: atom at 0 plus quadrature of the density combination
        of the running-infimum measure; analytic side: the corresponding
        Wiener-Hopf factor.  Returns (numeric, analytic).
        """
        if s <= 0:
            raise DomainError(f"transform argument must be positive (got {s})")
        ev = self.scale_X if process == "X" else self.scale_Y
        root = self.phi if process == "X" else self.varphi
        q = self.q

        if ev.exp_sum is not None:
            combo = ExpSum(
                ev.exp_sum.rates, ev.exp_sum.coeffs * (q * ev.exp_sum.rates / root - q)
            ).cleaned()
            decay = s - np.max(np.real(combo.rates)) if combo.rates.size else s
            span = -math.log(1e-13) / max(decay, 1e-2)
            body = adaptive_simpson(
                lambda u: np.exp(-s * u) * combo(u), 0.0, span, tol=1e-12
            )
            if combo.rates.size:
                body += combo.tail_transform(s, span)
        else:
            # fixed composite rule: adaptive refinement would chase the
            # spline-knot roughness of the numerically inverted backend
            span = ev.x_max
            if s < root:
                # the integrand decays only through cancellation of the
                # leading e^{root*u} growth; past this point backend noise
                # would dominate the true (subdominant) remainder
                span = min(span, 5.0 / max(root - s, 5.0 / span))
            us = np.linspace(1e-6, span, 20001)
            vals = np.exp(-s * us) * (q / root * ev.W_prime(us) - q * ev.W(us))
            body = integrate.simpson(vals, x=us)
        numeric = (q / root) * ev.value_at_zero + body
        wh = self.wh_transforms(s)
        analytic = wh[1] if process == "X" else wh[3]
        return numeric, analytic

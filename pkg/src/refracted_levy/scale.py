"""q-scale functions for the driving process X and the tilted process Y.

For a rational Laplace exponent (no jumps, or hyperexponential jumps) the
transform 1/(psi(s) - tilt*s - q) is a proper rational function with
simple poles, so the scale function is a finite sum of exponentials: that
is the closed-form backend, exact up to root finding.  Otherwise the
transform is inverted numerically on a fixed contour after tilting away
the exponential growth, and the result cached on a cubic-spline grid.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ConvergenceError, DomainError
from .model import LevyModel
from .quadrature import adaptive_simpson
from .roots import _largest_root

GRID_NODES = 4096
NEAR_ROOT_GAP = 1e-6
#: e^{-leading_root * x_max} below this ends the cached grid
TAIL_CUTOFF = 1e-14


@dataclass(frozen=True)
class ExpSum:
    """Finite sum  x -> Re sum_j c_j exp(r_j x)  with complex pairs."""

    rates: np.ndarray
    coeffs: np.ndarray

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.real(np.exp(np.multiply.outer(x, self.rates)) @ self.coeffs)
        return out if out.ndim else float(out)

    def derivative(self) -> "ExpSum":
        return ExpSum(self.rates, self.coeffs * self.rates)

    def cleaned(self, rel_tol=1e-9) -> "ExpSum":
        """Drop terms whose coefficients vanished analytically."""
        scale = np.max(np.abs(self.coeffs)) if len(self.coeffs) else 0.0
        keep = np.abs(self.coeffs) > rel_tol * scale
        return ExpSum(self.rates[keep], self.coeffs[keep])

    def integral(self, a, b):
        """Exact integral over [a, b]."""
        r, c = self.rates, self.coeffs
        return float(np.real(np.sum(c * (np.exp(r * b) - np.exp(r * a)) / r)))

    def tail_transform(self, s, c):
        """Exact  int_c^inf exp(-s x) * self(x) dx  for s > max Re rate."""
        r = self.rates
        if np.max(np.real(r)) >= s:
            raise DomainError(f"tail transform diverges for s={s}")
        return float(np.real(np.sum(self.coeffs * np.exp((r - s) * c) / (s - r))))


def euler_inversion(transform, t, terms=32):
    """Abate-Whitt Euler-summation inversion of a Laplace transform.

    ``transform`` must accept a complex numpy array.  All evaluation
    points have positive real part, so transforms defined only on a right
    half-plane are safe.  ``t`` may be an array.
    """
    m = terms
    xi = np.ones(2 * m + 1)
    xi[0] = 0.5
    xi[2 * m] = 2.0**-m
    for k in range(1, m):
        xi[2 * m - k] = xi[2 * m - k + 1] + 2.0**-m * math.comb(m, k)
    k = np.arange(2 * m + 1)
    eta = (-1.0) ** k * xi
    beta = m * math.log(10.0) / 3.0 + 1j * math.pi * k

    t = np.asarray(t, dtype=float)
    svals = beta[None, :] / t[..., None]
    gvals = np.real(transform(svals.ravel()).reshape(svals.shape))
    return 10.0 ** (m / 3.0) / t * (gvals @ eta)


class ScaleEvaluator:
    """Callable table for one scale function W (X) or its tilted twin (Y).

    Built by :func:`build_scale`.  Immutable after construction; safe for
    concurrent reads.
    """

    def __init__(self, model: LevyModel, q: float, tilt: float):
        self.model = model
        self.q = q
        self.tilt = tilt
        self.process_tag = "Y" if tilt != 0.0 else "X"
        self.leading_root = None  # set by build
        self.backend = None
        self.exp_sum = None
        self.exp_sum_deriv = None
        self._spline = None
        self._dominant_coeff = None
        self.x_max = None
        if model.sigma == 0.0 and model.has_bounded_variation:
            self.value_at_zero = 1.0 / (model.gamma_eff - tilt)
        else:
            self.value_at_zero = 0.0

    # -- evaluation -------------------------------------------------------

    def W(self, x):
        """Scale function value; identically 0 on (-inf, 0)."""
        x_arr = np.asarray(x, dtype=float)
        out = np.zeros(x_arr.shape)
        pos = x_arr > 0
        if np.any(pos):
            out[pos] = self._eval_positive(x_arr[pos])
        out[x_arr == 0.0] = self.value_at_zero
        return out if np.ndim(x) else float(out)

    def _eval_positive(self, x):
        if self.exp_sum is not None:
            return self.exp_sum(x)
        inside = x <= self.x_max
        out = np.empty_like(x)
        out[inside] = np.exp(self.leading_root * x[inside]) * self._spline(x[inside])
        far = ~inside
        if np.any(far):
            out[far] = self._dominant_coeff * np.exp(self.leading_root * x[far])
        return out

    def W_prime(self, x):
        """Derivative on (0, inf), the density of the measure W(dx)."""
        x_arr = np.asarray(x, dtype=float)
        if np.any(x_arr <= 0):
            raise DomainError("W_prime requires x > 0")
        if self.exp_sum_deriv is not None:
            out = self.exp_sum_deriv(x_arr)
        else:
            h = 1e-6 * np.maximum(1.0, x_arr)
            h = np.minimum(h, 0.5 * x_arr)
            out = (self._eval_positive(x_arr + h) - self._eval_positive(x_arr - h)) / (
                2 * h
            )
        return out if np.ndim(x) else float(out)

    @property
    def _quad_rtol(self):
        # transform quadrature cannot out-resolve the backend itself
        return 1e-12 if self.exp_sum is not None else 1e-8

    @property
    def dominant(self):
        """(coefficient, rate) of the leading exponential term."""
        if self.exp_sum is not None:
            j = int(np.argmax(np.real(self.exp_sum.rates)))
            return float(np.real(self.exp_sum.coeffs[j])), self.leading_root
        return self._dominant_coeff, self.leading_root

    # -- transforms -------------------------------------------------------

    def _analytic_transform(self, s):
        denom = self.model.psi(s) - self.tilt * s - self.q
        return 1.0 / denom

    def tail_transform_W(self, s, c=0.0):
        """int_c^inf exp(-s x) W(x) dx, analytic tail past the cache."""
        if s <= self.leading_root:
            raise DomainError(f"transform diverges for s={s} <= {self.leading_root}")
        if self.exp_sum is not None:
            return self.exp_sum.tail_transform(s, c)
        a, eta = self.dominant
        if c >= self.x_max:
            return a * math.exp((eta - s) * c) / (s - eta)
        body = adaptive_simpson(
            lambda u: np.exp(-s * u) * self._eval_positive(u),
            c,
            self.x_max,
            tol=self._quad_rtol * max(1.0, a / (s - eta)),
        )
        return body + a * math.exp((eta - s) * self.x_max) / (s - eta)

    def tail_transform_W_prime(self, s, c=0.0):
        """int_c^inf exp(-s x) W'(x) dx with the same tail scheme."""
        if s <= self.leading_root:
            raise DomainError(f"transform diverges for s={s} <= {self.leading_root}")
        if self.exp_sum_deriv is not None:
            return self.exp_sum_deriv.tail_transform(s, c)
        a, eta = self.dominant
        lo = max(c, 1e-9)
        tail = a * eta * math.exp((eta - s) * self.x_max) / (s - eta)
        if lo >= self.x_max:
            return a * eta * math.exp((eta - s) * lo) / (s - eta)
        body = adaptive_simpson(
            lambda u: np.exp(-s * u) * self.W_prime(u),
            lo,
            self.x_max,
            tol=self._quad_rtol * max(1.0, abs(a * eta) / (s - eta)),
        )
        return body + tail

    def laplace_roundtrip(self, s):
        """(numeric transform, analytic 1/(psi_tilt(s) - q)) at s."""
        numeric = self.tail_transform_W_numeric(s)
        return numeric, self._analytic_transform(s)

    def tail_transform_W_numeric(self, s):
        """Quadrature of the transform over the cache plus analytic tail.

        Kept independent of the closed form so the round-trip check pits
        genuine integration against the rational expression.
        """
        if s <= self.leading_root:
            raise DomainError(f"transform diverges for s={s} <= {self.leading_root}")
        a, eta = self.dominant
        x_hi = self.x_max
        scale = max(1.0, abs(a) / (s - eta))
        body = adaptive_simpson(
            lambda u: np.exp(-s * u) * self.W(u), 0.0, x_hi, tol=self._quad_rtol * scale
        )
        return body + a * math.exp((eta - s) * x_hi) / (s - eta)

    def laplace_roundtrip_measure(self, s):
        """Measure form: (W(0) + int e^{-sx} W'(x) dx, s/(psi_tilt(s) - q))."""
        if s <= self.leading_root:
            raise DomainError(f"transform diverges for s={s} <= {self.leading_root}")
        a, eta = self.dominant
        scale = max(1.0, abs(a * eta) / (s - eta))
        body = adaptive_simpson(
            lambda u: np.exp(-s * u) * self.W_prime(u),
            1e-12,
            self.x_max,
            tol=self._quad_rtol * scale,
        )
        numeric = self.value_at_zero + body + a * eta * math.exp(
            (eta - s) * self.x_max
        ) / (s - eta)
        return numeric, s * self._analytic_transform(s)


def build_scale(model: LevyModel, q: float, tilt_delta: float = 0.0) -> ScaleEvaluator:
    """Build the scale evaluator for X (tilt_delta = 0) or Y (tilt_delta = delta)."""
    if q <= 0:
        raise DomainError(f"q must be positive (got {q})")
    if tilt_delta < 0:
        raise DomainError(f"tilt must be nonnegative (got {tilt_delta})")
    ev = ScaleEvaluator(model, q, tilt_delta)
    if model.is_rational:
        ok = _build_closed_form(ev)
        if ok:
            return ev
        warnings.warn(
            "near-repeated roots in the rational exponent; "
            "falling back to numerical inversion",
            RuntimeWarning,
        )
    _build_inversion(ev)
    return ev


def _tilted_poly(model: LevyModel, q: float, tilt: float) -> np.poly1d:
    """Polynomial whose roots are the poles of 1/(psi(s) - tilt*s - q)."""
    base = np.poly1d([0.5 * model.sigma**2, model.gamma_eff - tilt, -q])
    prod = np.poly1d([1.0])
    for _, rho in model.jumps:
        prod *= np.poly1d([1.0, rho])
    total = base * prod
    for i, (lam, rho) in enumerate(model.jumps):
        others = np.poly1d([1.0])
        for j, (_, rho_j) in enumerate(model.jumps):
            if j != i:
                others *= np.poly1d([1.0, rho_j])
        total -= lam * np.poly1d([1.0, 0.0]) * others
    return total


def _build_closed_form(ev: ScaleEvaluator) -> bool:
    model, q, tilt = ev.model, ev.q, ev.tilt
    poly = _tilted_poly(model, q, tilt)
    roots = np.roots(poly)

    def f(s):
        return model.psi_complex(s) - tilt * s - q

    def fprime(s):
        out = model.sigma**2 * s + model.gamma_eff - tilt
        for lam, rho in model.jumps:
            out = out - lam * rho / (rho + s) ** 2
        return out

    for _ in range(3):
        roots = roots - f(roots) / fprime(roots)

    scale = max(1.0, np.max(np.abs(roots)))
    if len(roots) > 1:
        gaps = np.abs(roots[:, None] - roots[None, :])
        np.fill_diagonal(gaps, np.inf)
        if gaps.min() < NEAR_ROOT_GAP * scale:
            return False

    lead = int(np.argmax(np.real(roots)))
    if abs(np.imag(roots[lead])) > 1e-9 * scale:
        raise ConvergenceError("leading root of the tilted exponent is not real")

    coeffs = 1.0 / fprime(roots)
    ev.exp_sum = ExpSum(np.asarray(roots), np.asarray(coeffs))
    ev.exp_sum_deriv = ev.exp_sum.derivative()
    ev.leading_root = float(np.real(roots[lead]))
    ev.backend = "closed-form"
    ev.x_max = -math.log(TAIL_CUTOFF) / ev.leading_root
    return True


def _laplace_tail_integral(model: LevyModel, s: np.ndarray) -> np.ndarray:
    """int_0^inf exp(-s x) tail(x) dx for Re s > 0, vectorised over s.

    Panels are scaled by 1/Re(s): in the scaled variable the integrand
    decays like e^{-v} while the oscillation rate |Im s|/Re s is bounded
    along the inversion contour, so a fixed panel layout resolves it.
    """
    nodes, weights = np.polynomial.legendre.leggauss(16)
    r = np.real(s)
    v_edges = np.concatenate([np.linspace(0.0, 12.0, 25), np.geomspace(12.0, 46.0, 7)[1:]])
    acc = np.zeros(s.shape, dtype=complex)
    for a, b in zip(v_edges[:-1], v_edges[1:]):
        v = 0.5 * (b - a) * nodes + 0.5 * (a + b)
        w = 0.5 * (b - a) * weights
        x = np.multiply.outer(1.0 / r, v)
        tx = np.asarray(model.tail(x), dtype=float)
        acc += np.sum(np.exp(-s[..., None] * x) * tx * w, axis=-1) / r
    return acc


def _psi_complex_general(model: LevyModel, s: np.ndarray) -> np.ndarray:
    """psi on complex s with Re s > 0 for general-tail models.

    Accuracy here anchors only the softly-toleranced inversion backend.
    """
    if model.is_rational:
        return model.psi_complex(s)
    s = np.asarray(s, dtype=complex)
    out = 0.5 * model.sigma**2 * s**2
    if not math.isnan(model.gamma_eff):
        return out + model.gamma_eff * s - s * _laplace_tail_integral(model, s)
    # compensated form with the original linear coefficient
    nodes, weights = np.polynomial.legendre.leggauss(48)
    t1 = float(model.tail(1.0))
    near = np.zeros_like(s)
    for a, b in zip(np.linspace(0.0, 1.0, 5)[:-1], np.linspace(0.0, 1.0, 5)[1:]):
        x = 0.5 * (b - a) * nodes + 0.5 * (a + b)
        tx = np.asarray(model.tail(x), dtype=float)
        near += 0.5 * (b - a) * (
            (np.exp(-np.multiply.outer(s, x)) - 1.0) @ (weights * tx)
        )
    far = np.zeros_like(s)
    for a, b in zip(np.geomspace(1.0, 60.0, 13)[:-1], np.geomspace(1.0, 60.0, 13)[1:]):
        x = 0.5 * (b - a) * nodes + 0.5 * (a + b)
        tx = np.asarray(model.tail(x), dtype=float)
        far += 0.5 * (b - a) * (np.exp(-np.multiply.outer(s, x)) @ (weights * tx))
    return out + model.gamma_raw * s - s * (t1 + far + near)


def _build_inversion(ev: ScaleEvaluator):
    model, q, tilt = ev.model, ev.q, ev.tilt
    eta = _largest_root(model, tilt, q)
    ev.leading_root = eta
    ev.backend = "laplace-inversion"
    ev.x_max = -math.log(TAIL_CUTOFF) / eta

    # Subtract the jump of e^{-eta x} W(x) at the origin (bounded-variation
    # models) so the inverted function is continuous; add it back on the grid.
    w0 = ev.value_at_zero

    def shifted_transform(s):
        arg = s + eta
        return 1.0 / (_psi_complex_general(model, arg) - tilt * arg - q) - w0 / (
            s + 1.0
        )

    xs = np.linspace(0.0, ev.x_max, GRID_NODES)
    g = np.empty(GRID_NODES)
    g[0] = 0.0
    chunk = 256
    for lo in range(1, GRID_NODES, chunk):
        hi = min(lo + chunk, GRID_NODES)
        g[lo:hi] = euler_inversion(shifted_transform, xs[lo:hi])
    probe = xs[GRID_NODES // 2 : GRID_NODES // 2 + 4]
    ref = euler_inversion(shifted_transform, probe, terms=18)
    ev.inversion_error_estimate = float(
        np.max(np.abs(ref - g[GRID_NODES // 2 : GRID_NODES // 2 + 4]))
    )
    g += w0 * np.exp(-xs)
    if not np.all(np.isfinite(g)):
        raise ConvergenceError(
            f"transform inversion produced non-finite values (abscissa {eta})"
        )
    ev._spline = CubicSpline(xs, g)
    ev._dominant_coeff = float(np.mean(g[-64:]))

"""Largest nonnegative roots of psi(theta) = q and psi(theta) - delta*theta = q.

Both target functions are convex with value -q < 0 at the origin, so the
largest root is the unique positive crossing: bracket it by doubling, run
Brent's method, then polish with safeguarded Newton steps.
"""

from __future__ import annotations

from dataclasses import dataclass

from scipy import optimize

from .errors import ConvergenceError, DomainError
from .model import LevyModel

MAX_DOUBLINGS = 200
REL_TOL = 1e-13


@dataclass(frozen=True)
class RootPair:
    """Phi(q) and varphi(q) with the achieved residuals."""

    q: float
    phi: float
    varphi: float
    residuals: tuple[float, float]

    def as_dict(self) -> dict:
        return {
            "q": self.q,
            "phi": self.phi,
            "varphi": self.varphi,
            "residuals": list(self.residuals),
        }


def _largest_root(model: LevyModel, tilt: float, q: float) -> float:
    if q <= 0:
        raise DomainError(f"q must be positive (got {q})")

    def f(theta):
        return model.psi(theta) - tilt * theta - q

    hi = 1.0
    for _ in range(MAX_DOUBLINGS):
        if f(hi) > 0:
            break
        hi *= 2.0
    else:
        raise ConvergenceError(
            f"no bracket for the root of psi - {tilt}*theta = {q} after "
            f"{MAX_DOUBLINGS} doublings"
        )
    root = optimize.brentq(f, 0.0, hi, xtol=1e-300, rtol=8.9e-16, maxiter=200)

    # Newton polish with the analytic (or differenced) derivative.
    for _ in range(3):
        deriv = model.psi_prime(root) - tilt
        if deriv <= 0:
            break
        step = f(root) / deriv
        candidate = root - step
        if candidate <= 0 or abs(step) > REL_TOL * max(1.0, root) * 1e3:
            break
        root = candidate
        if abs(step) <= REL_TOL * max(1.0, root):
            break
    return root


def phi_root(model: LevyModel, q: float) -> float:
    """Phi(q), the largest root of psi(theta) = q."""
    return _largest_root(model, 0.0, q)


def varphi_root(model: LevyModel, delta: float, q: float) -> float:
    """varphi(q), the largest root of psi(theta) - delta*theta = q."""
    if delta <= 0:
        raise DomainError(f"delta must be positive (got {delta})")
    return _largest_root(model, delta, q)


def root_pair(model: LevyModel, delta: float, q: float) -> RootPair:
    phi = phi_root(model, q)
    varphi = varphi_root(model, delta, q)
    res = (
        abs(model.psi(phi) - q),
        abs(model.psi(varphi) - delta * varphi - q),
    )
    return RootPair(q=q, phi=phi, varphi=varphi, residuals=res)

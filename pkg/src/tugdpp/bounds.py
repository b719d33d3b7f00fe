"""Quantitative boundedness: iteration estimates for scalar and layered sequences.

The layered recursion is

    a_0^{k+1} <= Lambda
    a_alpha^{k+1} <= mu * a_d^k + (1 - mu) * a_{alpha-1}^k + Lambda,   alpha = 1..d

where ``a_alpha^k`` is the sup of the k-th iterate over the points at most
``alpha`` ball-steps from the boundary.  It is controlled through the
weighted sum ``b = sum_alpha lambda_alpha a_alpha`` which satisfies
``b^{k+1} <= theta b^k + C_0`` with ``theta < 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .setups import validate


class InvalidTheta(ValueError):
    pass


class SingularSystem(ArithmeticError):
    pass


def standard_iteration_limit(theta: float, Lambda: float) -> float:
    """limsup bound ``Lambda / (1 - theta)`` for ``a^{k+1} <= theta a^k + Lambda``."""
    if not 0.0 < theta < 1.0:
        raise InvalidTheta(f"theta must lie in (0, 1), got {theta}")
    return Lambda / (1.0 - theta)


@dataclass(frozen=True)
class SystemWeights:
    d: int
    mu: float
    tau: float
    lambdas: tuple[float, ...]  # lambda_1 .. lambda_d
    theta_mass: float  # mu * (1 + sum_{beta<d} lambda_beta / lambda_d)
    theta_shift: float  # max_alpha (1 - mu) lambda_{alpha+1} / lambda_alpha; 0 if d == 1

    @property
    def theta(self) -> float:
        return max(self.theta_mass, self.theta_shift)

    def drift(self, Lambda: float) -> float:
        """Additive constant ``C_0`` of the weighted recursion."""
        if self.d == 1:
            return (2.0 - self.mu) * Lambda
        return Lambda * ((1.0 - self.mu) * self.lambdas[0] + sum(self.lambdas))


def tau_upper(d: int, mu: float) -> float:
    """Supremum of admissible ``tau^{d-1}``: ``1 / (mu * sum_{beta=0}^{d-2} (1-mu)^beta)``."""
    return 1.0 / (mu * sum((1.0 - mu) ** b for b in range(d - 1)))


def system_weights(d: int, mu: float) -> SystemWeights:
    """Weights ``lambda_alpha = (tau (1 - mu))^{d - alpha}``.

    ``tau^{d-1}`` is the geometric midpoint of ``(1, tau_upper)``.  For
    ``d = 1`` the system is scalar with ``theta = mu``.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    if not 0.0 < mu < 1.0:
        raise ValueError("mu must lie in (0, 1)")
    if d == 1:
        return SystemWeights(1, mu, 1.0, (1.0,), mu, 0.0)
    tau = math.sqrt(tau_upper(d, mu)) ** (1.0 / (d - 1))
    lambdas = tuple((tau * (1.0 - mu)) ** (d - a) for a in range(1, d + 1))
    lam_d = lambdas[-1]
    theta_mass = mu * (1.0 + sum(lambdas[:-1]) / lam_d)
    theta_shift = max((1.0 - mu) * lambdas[a + 1] / lambdas[a] for a in range(d - 1))
    w = SystemWeights(d, mu, tau, lambdas, theta_mass, theta_shift)
    if not w.theta < 1.0:
        # 1 - theta is of order (1 - mu)^(d - 1) and can drop below machine epsilon
        raise InvalidTheta(f"theta rounds to 1 for d={d}, mu={mu}")
    return w


def system_fixed_point(d: int, mu: float, Lambda: float) -> np.ndarray:
    """Fixed point ``(a_0, ..., a_d)`` of the equality recursion.

    Solves ``a_0 = Lambda`` and ``a_alpha = mu a_d + (1 - mu) a_{alpha-1} + Lambda``.
    This is the exact limit of the worst case, so any valid bound dominates it.
    """
    if d < 1:
        raise ValueError("d must be >= 1")
    A = np.eye(d + 1)
    rhs = np.full(d + 1, float(Lambda))
    for a in range(1, d + 1):
        A[a, d] -= mu
        A[a, a - 1] -= 1.0 - mu
    try:
        return np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc


def simulate_system(d: int, mu: float, Lambda: float, a0, steps: int) -> np.ndarray:
    """Run the equality recursion; returns the ``(steps + 1, d + 1)`` history."""
    a = np.broadcast_to(np.asarray(a0, dtype=float), (d + 1,)).copy()
    hist = np.empty((steps + 1, d + 1))
    hist[0] = a
    for k in range(steps):
        nxt = np.empty_like(a)
        nxt[0] = Lambda
        nxt[1:] = mu * a[d] + (1.0 - mu) * a[:-1] + Lambda
        a = nxt
        hist[k + 1] = a
    return hist


def boundedness_constant(d: int, mu: float, Lambda: float) -> float:
    """``C = C_0 / ((1 - theta) * min_alpha lambda_alpha)``.

    ``C_0 / (1 - theta)`` bounds ``limsup b^k`` and each ``a_alpha`` is at most
    ``b / lambda_alpha``.  Not tuned for tightness.
    """
    w = system_weights(d, mu)
    return w.drift(Lambda) / ((1.0 - w.theta) * min(w.lambdas))


def bounds_report(d: int, mu: float, Lambda: float) -> dict:
    w = system_weights(d, mu)
    return {
        "d": d,
        "mu": mu,
        "Lambda": Lambda,
        "tau": w.tau,
        "lambdas": list(w.lambdas),
        "theta": w.theta,
        "C": boundedness_constant(d, mu, Lambda),
        "worst_case": system_fixed_point(d, mu, Lambda).tolist(),
    }


def _barrier_data(setup, problem):
    layers = np.asarray(validate(setup).layer_of)
    # one unit of slack so the barrier inequalities survive rounding
    lam = float(np.max(np.abs(problem.F)) + np.max(np.abs(problem.f))) + 1.0
    return layers, lam


def barrier_supersolution(setup, problem, shift: float = 0.0) -> np.ndarray:
    """Supersolution built from the worst-case layer recursion.

    Interior points in layer ``alpha`` get ``a_alpha + shift`` where ``a``
    solves the equality recursion with ``Lambda' = sup|F| + sup|f| + 1``;
    boundary points get ``F``.  Uses that every interior ball meets the
    previous layer.  ``shift`` must be non-negative.
    """
    if shift < 0:
        raise ValueError("shift must be non-negative")
    layers, lam = _barrier_data(setup, problem)
    a = system_fixed_point(max(int(layers.max()), 1), problem.mu, lam)
    return np.where(setup.boundary_mask, problem.F, a[layers] + shift)


def barrier_subsolution(setup, problem, shift: float = 0.0) -> np.ndarray:
    """Mirror image of :func:`barrier_supersolution` with ``mu`` and ``1 - mu`` swapped."""
    if shift < 0:
        raise ValueError("shift must be non-negative")
    layers, lam = _barrier_data(setup, problem)
    b = system_fixed_point(max(int(layers.max()), 1), 1.0 - problem.mu, lam)
    return np.where(setup.boundary_mask, problem.F, -b[layers] - shift)

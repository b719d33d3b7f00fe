"""Builders for verifiable instances.

* :func:`example_1_1` -- the discontinuous one-dimensional example, reduced to
  an exact five-cell quotient.
* :func:`grid_1d` -- closed epsilon-ball stencils on a uniform grid, the
  discretisation of ``Delta_inf u + beta |u'| = f~`` on ``(0, 1)``.
* :func:`random_admissible` -- seeded random graphs, admissible by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .dpp import DppProblem, make_problem, solve
from .setups import AdmissibleSetup, compute_layers

# cell order of the five-cell example
EXAMPLE_CELLS = ("L", "A", "M", "B", "R")

_EXAMPLE_SOLUTIONS = {
    0: (0.0, 4.0, 6.0, 8.0, 12.0),
    1: (0.0, 6.0, 9.0, 10.0, 12.0),
}


def example_1_1(f_const: int = 1) -> tuple[AdmissibleSetup, DppProblem, np.ndarray]:
    """Exact five-cell quotient of the example on ``X = R``, ``Y = (0, 2)``.

    Here ``eps = 1``, ``mu = 1/2``, ``F = 0`` on ``(-inf, 0]`` and ``F = 12``
    on ``[2, inf)``.  The cells are

        L = (-inf, 0],  A = (0, 1),  M = {1},  B = (1, 2),  R = [2, inf).

    The open interval ``(x - 1, x + 1)`` meets the same cells for every ``x``
    in a given cell:

        x in A:  x - 1 < 0 and 1 < x + 1 < 2   ->  {L, A, M, B}
        x = 1:   (0, 2)                         ->  {A, M, B}
        x in B:  0 < x - 1 < 1 and x + 1 > 2   ->  {A, M, B, R}

    so for functions constant on cells, sup and inf over the interval are max
    and min over these cell lists and the quotient DPP is exact.

    The boundary value on R is 12.  With it the returned cell values are
    fixed points, e.g. for f = 1:

        A: (10 + 0)/2 + 1 = 6,   M: (10 + 6)/2 + 1 = 9,   B: (12 + 6)/2 + 1 = 10,

    and for f = 0:  A: (8 + 0)/2 = 4,  M: (8 + 4)/2 = 6,  B: (12 + 4)/2 = 8.
    A boundary value of 1 on R admits neither.
    """
    if f_const not in _EXAMPLE_SOLUTIONS:
        raise ValueError("f_const must be 0 or 1")
    L, A, M, B, R = range(5)
    setup = AdmissibleSetup.from_lists(
        5,
        boundary=[L, R],
        balls={A: [L, A, M, B], M: [A, M, B], B: [A, M, B, R]},
        diam=3,
    )
    F = np.array([0.0, 0.0, 0.0, 0.0, 12.0])
    problem = make_problem(setup, 0.5, float(f_const), F)
    return setup, problem, np.array(_EXAMPLE_SOLUTIONS[f_const])


@dataclass(frozen=True)
class GridSpec1D:
    """Uniform grid on ``(0, 1)`` with closed ``eps``-balls.

    ``eps`` must be an integer multiple of ``h``; boundary points pad the
    domain on ``[-eps, 0]`` and ``[1, 1 + eps]``.  ``f_tilde`` and
    ``boundary`` take an array of abscissae.
    """

    h: float
    eps: float
    f_tilde: Callable[[np.ndarray], np.ndarray]
    boundary: Callable[[np.ndarray], np.ndarray]
    beta: float = 0.0

    @property
    def n_cells(self) -> int:
        n = round(1.0 / self.h)
        if n < 2 or not np.isclose(n * self.h, 1.0, rtol=0, atol=1e-12):
            raise ValueError("1/h must be an integer >= 2")
        return n

    @property
    def radius(self) -> int:
        m = round(self.eps / self.h)
        if m < 1 or not np.isclose(m * self.h, self.eps, rtol=0, atol=1e-12):
            raise ValueError("eps must be a positive integer multiple of h")
        return m

    @property
    def mu(self) -> float:
        return 0.5 - self.beta * self.eps / 4

    def abscissae(self) -> np.ndarray:
        m, n = self.radius, self.n_cells
        return np.arange(-m, n + m + 1) * self.h


def grid_1d(spec: GridSpec1D) -> tuple[AdmissibleSetup, DppProblem]:
    """Point ``k`` sits at ``(k - m) * h``; interior points are those in (0, 1)."""
    if spec.beta < 0:
        raise ValueError("beta must be non-negative")
    if not 0.0 < spec.mu < 1.0:
        raise ValueError(f"invalid mu {spec.mu}: need beta * eps / 4 < 1/2")
    m, n = spec.radius, spec.n_cells
    xs = spec.abscissae()
    total = len(xs)
    interior = range(m + 1, m + n)
    balls = {k: list(range(k - m, k + m + 1)) for k in interior}
    boundary = [k for k in range(total) if k not in balls]
    max_layer = max(-(-min(k - m, m + n - k) // m) for k in interior)
    setup = AdmissibleSetup.from_lists(total, boundary, balls, max_layer + 1)
    f = 0.5 * spec.eps**2 * np.broadcast_to(spec.f_tilde(xs), xs.shape)
    F = np.broadcast_to(spec.boundary(xs), xs.shape)
    return setup, make_problem(setup, spec.mu, f, F)


def parabola(x: np.ndarray) -> np.ndarray:
    """``x (1 - x) / 2``: solves ``u'' = -1`` on (0, 1) with zero boundary values."""
    return 0.5 * x * (1.0 - x)


def pde1d_error(eps: float, h_ratio: int = 4, tol: float = 1e-10, max_sweeps: int = 10**6):
    """Solve the grid DPP with ``f~ = 1`` and parabola boundary data.

    Returns ``(sup-norm error on (0, 1), sweeps, status)``.  With ``mu = 1/2``
    the quadratic identity ``(max + min)/2 - u = eps^2 u''/2`` (away from the
    vertex) makes the limit equation ``u'' = -f~``, whose solution is
    :func:`parabola`.
    """
    spec = GridSpec1D(
        h=eps / h_ratio, eps=eps, f_tilde=lambda x: np.ones_like(x), boundary=parabola
    )
    setup, problem = grid_1d(spec)
    u, trace = solve(setup, problem, problem.F, tol=tol, max_sweeps=max_sweeps)
    xs = spec.abscissae()
    idx = setup.interior
    err = float(np.max(np.abs(u[idx] - parabola(xs[idx]))))
    return err, trace.sweeps, trace.status


def random_admissible(
    n: int,
    n_boundary: int,
    max_ball: int,
    inf_f: float,
    seed: int,
    mu: float = 0.5,
) -> tuple[AdmissibleSetup, DppProblem]:
    """Seeded random admissible setup.

    Interior points are put in a random order; each ball contains one point
    that is either a boundary point or earlier in that order, so every point
    reaches the boundary.  The rest of the ball (up to ``max_ball - 1`` more
    draws, duplicates merged) is arbitrary.  ``f`` is uniform on
    ``[inf_f, inf_f + 1]`` and ``F`` uniform on ``[-1, 1]``.
    """
    if not 1 <= n_boundary < n:
        raise ValueError("InvalidCounts: need 1 <= n_boundary < n")
    if max_ball < 1:
        raise ValueError("InvalidCounts: max_ball must be >= 1")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    boundary = sorted(int(p) for p in perm[:n_boundary])
    order = [int(p) for p in perm[n_boundary:]]
    balls: dict[int, list[int]] = {}
    for i, x in enumerate(order):
        ahead = boundary + order[:i]
        ball = {ahead[rng.integers(len(ahead))]}
        extra = rng.integers(0, max_ball)
        ball.update(int(y) for y in rng.integers(0, n, size=extra))
        balls[x] = sorted(ball)
    layers = compute_layers(AdmissibleSetup.from_lists(n, boundary, balls, n))
    setup = AdmissibleSetup.from_lists(n, boundary, balls, int(max(layers)) + 1)
    f = rng.uniform(inf_f, inf_f + 1.0, size=n)
    F = rng.uniform(-1.0, 1.0, size=n)
    return setup, make_problem(setup, mu, f, F)

"""The DPP operator for biased tug-of-war with running costs, and its fixed-point solver.

On interior points the operator is

    (T u)(x) = mu * max_{B(x)} u + (1 - mu) * min_{B(x)} u + f(x)

and on boundary points ``(T u)(x) = F(x)``.  Solving means iterating ``T``
from an arbitrary finite start (Jacobi sweeps, never in place).
"""

from __future__ import annotations

import csv
import enum
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .setups import AdmissibleSetup

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_SWEEPS = 10**6
NO_UNIQUENESS_GUARANTEE = "NoUniquenessGuarantee"


class NonFiniteValue(ArithmeticError):
    pass


class ProblemError(ValueError):
    pass


@dataclass(frozen=True)
class DppProblem:
    """Parameters of the DPP.

    ``f`` and ``F`` are full-length arrays; ``f`` is zero on the boundary and
    ``F`` is zero on the interior.  ``Lambda`` bounds ``sup|F| + sup|f|``.
    ``lambda_min`` is a positive lower bound strictly below ``inf_Y f``, or
    None when ``inf_Y f <= 0``.
    """

    mu: float
    f: np.ndarray
    F: np.ndarray
    Lambda: float
    lambda_min: float | None = None

    def __post_init__(self):
        if not 0.0 < self.mu < 1.0:
            raise ProblemError(f"mu must lie in (0, 1), got {self.mu}")
        if not math.isfinite(self.Lambda):
            raise ProblemError("Lambda must be finite")
        for arr in (self.f, self.F):
            arr.setflags(write=False)
            if not np.all(np.isfinite(arr)):
                raise ProblemError("f and F must be finite")
        if self.Lambda < np.max(np.abs(self.F)) + np.max(np.abs(self.f)):
            raise ProblemError("Lambda must dominate sup|F| + sup|f|")

    @property
    def n_points(self) -> int:
        return len(self.f)


def make_problem(
    setup: AdmissibleSetup,
    mu: float,
    f,
    F,
    Lambda: float | None = None,
    lambda_min: float | None = None,
) -> DppProblem:
    """Assemble a problem on ``setup``.

    ``f`` and ``F`` may be scalars or per-point sequences; entries at points
    where they do not apply are ignored.  ``Lambda`` defaults to
    ``sup|F| + sup|f|``; ``lambda_min`` defaults to ``inf_Y f / 2`` when that
    infimum is positive.
    """
    mask = setup.boundary_mask
    f_arr = np.where(mask, 0.0, np.broadcast_to(np.asarray(f, dtype=float), mask.shape))
    F_arr = np.where(mask, np.broadcast_to(np.asarray(F, dtype=float), mask.shape), 0.0)
    if Lambda is None:
        Lambda = float(np.max(np.abs(F_arr)) + np.max(np.abs(f_arr)))
    f_min = float(np.min(f_arr[~mask]))
    if lambda_min is None:
        lambda_min = f_min / 2 if f_min > 0 else None
    elif not 0.0 <= lambda_min < f_min:
        raise ProblemError("lambda_min must satisfy 0 <= lambda_min < inf_Y f")
    return DppProblem(float(mu), f_arr, F_arr, float(Lambda), lambda_min)


def _ball_extrema(setup: AdmissibleSetup, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    vals = u[setup._ball_index]
    return (
        np.maximum.reduceat(vals, setup._ball_start),
        np.minimum.reduceat(vals, setup._ball_start),
    )


def dpp_rhs(setup: AdmissibleSetup, problem: DppProblem, u: np.ndarray) -> np.ndarray:
    """Right-hand side of the DPP evaluated at ``u`` (this is ``T u``)."""
    out = problem.F.copy()
    hi, lo = _ball_extrema(setup, u)
    mu = problem.mu
    idx = setup.interior
    out[idx] = mu * hi + (1 - mu) * lo + problem.f[idx]
    return out


def iterate_once(setup: AdmissibleSetup, problem: DppProblem, u) -> np.ndarray:
    """One Jacobi sweep: every point reads only from the input ``u``."""
    u = np.asarray(u, dtype=float)
    if u.shape != (setup.n_points,):
        raise ValueError(f"value function must have shape ({setup.n_points},)")
    if not np.all(np.isfinite(u)):
        raise NonFiniteValue("value function has non-finite entries")
    return dpp_rhs(setup, problem, u)


def residual(setup: AdmissibleSetup, problem: DppProblem, u) -> float:
    """Sup-norm defect ``|u - T u|``; zero exactly at solutions."""
    u = np.asarray(u, dtype=float)
    return float(np.max(np.abs(u - iterate_once(setup, problem, u))))


def _boundary_ok(setup, problem, u, slack):
    b = setup.boundary
    return bool(np.all(np.abs(u[b] - problem.F[b]) <= slack))


def is_subsolution(setup: AdmissibleSetup, problem: DppProblem, u, slack: float = 0.0) -> bool:
    u = np.asarray(u, dtype=float)
    i = setup.interior
    rhs = iterate_once(setup, problem, u)
    return _boundary_ok(setup, problem, u, slack) and bool(np.all(u[i] <= rhs[i] + slack))


def is_supersolution(setup: AdmissibleSetup, problem: DppProblem, u, slack: float = 0.0) -> bool:
    u = np.asarray(u, dtype=float)
    i = setup.interior
    rhs = iterate_once(setup, problem, u)
    return _boundary_ok(setup, problem, u, slack) and bool(np.all(u[i] >= rhs[i] - slack))


class Status(enum.Enum):
    CONVERGED = "Converged"
    MAX_ITERATIONS = "MaxIterations"


@dataclass
class ConvergenceTrace:
    step: list[float] = field(default_factory=list)
    residual: list[float] = field(default_factory=list)
    sup: list[float] = field(default_factory=list)
    inf: list[float] = field(default_factory=list)
    status: Status = Status.MAX_ITERATIONS
    warnings: list[str] = field(default_factory=list)

    @property
    def sweeps(self) -> int:
        return len(self.step)

    def rows(self):
        for k in range(self.sweeps):
            yield k + 1, self.step[k], self.residual[k], self.sup[k], self.inf[k]

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["sweep", "step", "residual", "sup", "inf"])
            for k, s, r, hi, lo in self.rows():
                w.writerow([k, repr(s), repr(r), repr(hi), repr(lo)])


def solve(
    setup: AdmissibleSetup,
    problem: DppProblem,
    u0,
    tol: float = DEFAULT_TOL,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
) -> tuple[np.ndarray, ConvergenceTrace]:
    """Iterate the DPP operator from ``u0``.

    Stops once the last step ``|u_{k+1} - u_k|`` and the residual of
    ``u_{k+1}`` are at most ``tol`` and, in addition, the geometric tail
    estimate ``res * rho / (1 - rho)``, with ``rho`` the worst recent
    step ratio, is at most
    ``tol / 2``.  The tail check keeps the returned iterate within ``tol`` of
    the fixed point when the contraction is slow.  Running out of sweeps is
    reported in the trace status rather than raised.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    trace = ConvergenceTrace()
    if np.min(problem.f[setup.interior]) <= 0:
        trace.warnings.append(NO_UNIQUENESS_GUARANTEE)
        logger.warning("inf_Y f <= 0: the fixed point need not be unique")
    u = np.array(np.broadcast_to(np.asarray(u0, dtype=float), (setup.n_points,)))
    tu = iterate_once(setup, problem, u)
    for _ in range(max_sweeps):
        new = tu
        tu = dpp_rhs(setup, problem, new)
        if not (np.all(np.isfinite(new)) and np.all(np.isfinite(tu))):
            raise NonFiniteValue("iteration overflowed")
        step = float(np.max(np.abs(new - u)))
        res = float(np.max(np.abs(tu - new)))
        trace.step.append(step)
        trace.residual.append(res)
        trace.sup.append(float(np.max(new)))
        trace.inf.append(float(np.min(new)))
        u = new
        if step <= tol and res <= tol and _tail_estimate(trace.step, res) <= tol / 2:
            trace.status = Status.CONVERGED
            break
    return u, trace


def _tail_estimate(steps: list[float], res: float) -> float:
    """Bound on the remaining distance to the fixed point, assuming geometric decay.

    The contraction ratio is the worst one seen over the last few sweeps;
    single-sweep ratios jump when the arg-max/arg-min pattern switches.
    """
    if res == 0.0:
        return 0.0
    window = steps[-_RATE_WINDOW:] + [res]
    if len(window) < 2:
        return math.inf
    rho = max(b / a if a > 0 else math.inf for a, b in zip(window, window[1:]))
    if rho >= 1.0:
        # no observable contraction; only accept residuals far below any tolerance
        return 0.0 if res <= _FLOOR else math.inf
    return res * rho / (1.0 - rho)


_RATE_WINDOW = 8
_FLOOR = 1e-13


def iterate_n(setup: AdmissibleSetup, problem: DppProblem, u, n: int) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    for _ in range(n):
        u = iterate_once(setup, problem, u)
    return u


# -- serialisation -----------------------------------------------------------

def problem_to_json(setup: AdmissibleSetup, problem: DppProblem) -> dict:
    mask = setup.boundary_mask
    return {
        "setup": setup.to_json(),
        "mu": problem.mu,
        "f": [None if b else float(v) for b, v in zip(mask, problem.f)],
        "F": [float(v) if b else None for b, v in zip(mask, problem.F)],
        "Lambda": problem.Lambda,
        "lambda_min": problem.lambda_min,
    }


def problem_from_json(data: dict) -> tuple[AdmissibleSetup, DppProblem]:
    allowed = {"setup", "mu", "f", "F", "Lambda", "lambda_min"}
    unknown = set(data) - allowed
    if unknown:
        raise ProblemError(f"unknown problem fields: {sorted(unknown)}")
    setup = AdmissibleSetup.from_json(data["setup"])
    f = [0.0 if v is None else v for v in data["f"]]
    F = [0.0 if v is None else v for v in data["F"]]
    if len(f) != setup.n_points or len(F) != setup.n_points:
        raise ProblemError("f and F must have one entry per point")
    problem = make_problem(
        setup, data["mu"], f, F, data.get("Lambda"), data.get("lambda_min")
    )
    return setup, problem


def load_problem(path: str | Path) -> tuple[AdmissibleSetup, DppProblem]:
    with open(path) as fh:
        return problem_from_json(json.load(fh))


def dump_problem(setup: AdmissibleSetup, problem: DppProblem, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(problem_to_json(setup, problem), fh, indent=2)
        fh.write("\n")


def load_values(path: str | Path, n_points: int | None = None) -> np.ndarray:
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, list) or any(
        isinstance(v, bool) or not isinstance(v, (int, float)) for v in data
    ):
        raise ValueError("value function file must be a JSON array of numbers")
    u = np.asarray(data, dtype=float)
    if n_points is not None and len(u) != n_points:
        raise ValueError(f"expected {n_points} values, got {len(u)}")
    return u


def dump_values(u: Sequence[float], path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump([float(v) for v in u], fh)
        fh.write("\n")

"""Labeled strategy trees and the game-tree view of the iteration.

A labeled strategy attaches a point ``x_t`` to every node of a strictly
binary tree: the left child of ``t`` is the maximiser's move from ``x_t``, the
right child the minimiser's.  Its value ``w`` collects the running costs of
inner nodes, the boundary data of boundary leaves and a terminal value
function on interior leaves, each weighted by ``mu**l (1-mu)**r``.

``L`` sweeps of the DPP operator equal the nested sup/inf of ``w`` over all
depth-``L`` labelings; :func:`iterated_value_oracle` evaluates that nested
expression by brute-force search and is independent of the sweep code.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .dpp import DppProblem
from .setups import AdmissibleSetup
from .trees import GameTree, MassProfile, _Builder, satisfies_sum_estimate

DEFAULT_NODE_BUDGET = 10**6


class InvalidStrategy(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    pass


class LambdaNotPositive(ValueError):
    pass


@dataclass(frozen=True)
class LabeledStrategy:
    tree: GameTree
    labels: tuple[int, ...]

    @property
    def origin(self) -> int:
        return self.labels[0]

    def to_nested(self) -> dict:
        out: dict[int, dict] = {}
        tree = self.tree
        for t in reversed(range(len(tree))):
            node = {"point": self.labels[t]}
            if tree.left[t] >= 0:
                node["children"] = [out.pop(tree.left[t]), out.pop(tree.right[t])]
            out[t] = node
        return out[0]


def check_strategy(setup: AdmissibleSetup, strategy: LabeledStrategy, L: int) -> None:
    """Raise :class:`InvalidStrategy` unless ``strategy`` is a short admissible strategy of depth <= L."""
    tree, lab = strategy.tree, strategy.labels
    if len(lab) != len(tree):
        raise InvalidStrategy("one label per node required")
    if tree.height > L:
        raise InvalidStrategy(f"tree depth {tree.height} exceeds {L}")
    for t in range(len(tree)):
        x = lab[t]
        if not 0 <= x < setup.n_points:
            raise InvalidStrategy(f"node {t} labeled with unknown point {x}")
        if tree.left[t] >= 0:
            if setup.is_boundary[x]:
                raise InvalidStrategy(f"inner node {t} sits on boundary point {x}")
            ball = setup.balls[x]
            if lab[tree.left[t]] not in ball or lab[tree.right[t]] not in ball:
                raise InvalidStrategy(f"children of node {t} leave the ball of {x}")
        elif tree.depth[t] < L and not setup.is_boundary[x]:
            raise InvalidStrategy(f"leaf {t} ends early at interior point {x}")


def _best(ball, u, maximise: bool) -> int:
    vals = [u[y] for y in ball]
    target = max(vals) if maximise else min(vals)
    return min(y for y, v in zip(ball, vals) if v == target)


def extract_strategy_tree(
    setup: AdmissibleSetup,
    problem: DppProblem,
    u,
    x: int,
    L: int,
    max_nodes: int = DEFAULT_NODE_BUDGET,
) -> LabeledStrategy:
    """Greedy optimal strategy for ``u``, already reduced.

    Every interior node above depth ``L`` gets the arg-max of ``u`` over its
    ball as left child and the arg-min as right child, smallest point index on
    ties.  Branches end at boundary points or at depth ``L``.
    """
    u = np.asarray(u, dtype=float)
    if L < 0:
        raise ValueError("L must be non-negative")
    b = _Builder()
    labels = [int(x)]
    queue = deque([0])
    while queue:
        t = queue.popleft()
        y = labels[t]
        if setup.is_boundary[y] or b.depth[t] >= L:
            continue
        if len(labels) + 2 > max_nodes:
            raise BudgetExceeded(f"strategy tree exceeds {max_nodes} nodes")
        ball = setup.balls[y]
        hi, lo = _best(ball, u, True), _best(ball, u, False)
        lt, rt = b.split(t)
        labels.extend((hi, lo))
        queue.extend((lt, rt))
    return LabeledStrategy(b.freeze(), tuple(labels))


def evaluate_w(
    setup: AdmissibleSetup,
    problem: DppProblem,
    strategy: LabeledStrategy,
    v,
    nested: bool = False,
) -> float:
    """Value ``w`` of a labeled strategy with terminal values ``v``.

    The flat form sums ``weight * f`` over inner nodes (the root contributes
    ``f(x)`` with weight 1), ``weight * F`` over boundary leaves and
    ``weight * v`` over interior leaves.  ``nested=True`` evaluates the same
    quantity bottom-up as ``mu * left + (1 - mu) * right + f``, the operation
    order of one DPP sweep.
    """
    v = np.asarray(v, dtype=float)
    tree, lab = strategy.tree, strategy.labels
    if len(lab) != len(tree):
        raise InvalidStrategy("one label per node required")
    if setup.is_boundary[lab[0]]:
        return float(problem.F[lab[0]])
    mu = problem.mu
    if nested:
        val = [0.0] * len(tree)
        for t in reversed(range(len(tree))):
            y = lab[t]
            if tree.left[t] >= 0:
                val[t] = mu * val[tree.left[t]] + (1 - mu) * val[tree.right[t]] + problem.f[y]
            else:
                val[t] = problem.F[y] if setup.is_boundary[y] else v[y]
        return float(val[0])
    w = tree.weights(mu)
    total = 0.0
    for t in range(len(tree)):
        y = lab[t]
        if tree.left[t] >= 0:
            total += w[t] * problem.f[y]
        elif setup.is_boundary[y]:
            total += w[t] * problem.F[y]
        else:
            total += w[t] * v[y]
    return float(total)


def iterated_value_oracle(
    setup: AdmissibleSetup,
    problem: DppProblem,
    v,
    x: int,
    L: int,
    budget: int = DEFAULT_NODE_BUDGET,
) -> float:
    """Nested sup/inf of ``w`` over all long strategies of depth ``L`` from ``x``.

    The nodes of the full depth-``L`` tree are chosen one at a time in the
    tree's total order (depth first, then left to right); a left node is
    chosen by a sup, a right node by an inf, each ranging over the ball of
    the parent's point.  Successors of boundary points are frozen, which is
    the reduction of a long strategy to its short form.  The search is plain
    minimax with alpha-beta cut-offs, so the result is exact.

    Equals ``L`` DPP sweeps applied to ``v``, evaluated at ``x``, whenever
    ``v`` agrees with ``F`` on the boundary.
    """
    v = np.asarray(v, dtype=float)
    if L < 0:
        raise ValueError("L must be non-negative")
    if setup.is_boundary[x]:
        return float(problem.F[x])
    n_slots = 2 ** (L + 1) - 1
    depth = [(k + 1).bit_length() - 1 for k in range(n_slots)]
    boundary = setup.is_boundary
    balls = setup.balls
    f, F, mu = problem.f, problem.F, problem.mu
    # cheap move ordering; correctness does not depend on it
    guess = np.where(setup.boundary_mask, F, v)
    labels: list[int] = [-1] * n_slots
    labels[0] = int(x)
    expanded = 0

    def leaf_value() -> float:
        val = [0.0] * n_slots
        for k in reversed(range(n_slots)):
            y = labels[k]
            if y < 0:
                continue
            if boundary[y]:
                val[k] = F[y]
            elif depth[k] == L:
                val[k] = v[y]
            else:
                val[k] = mu * val[2 * k + 1] + (1 - mu) * val[2 * k + 2] + f[y]
        return val[0]

    def search(k: int, alpha: float, beta: float) -> float:
        nonlocal expanded
        expanded += 1
        if expanded > budget:
            raise BudgetExceeded(f"oracle expanded more than {budget} nodes")
        while k < n_slots:
            p = labels[(k - 1) // 2]
            if p >= 0 and not boundary[p]:
                break
            labels[k] = -1
            k += 1
        if k == n_slots:
            return leaf_value()
        maximise = k % 2 == 1
        ball = balls[labels[(k - 1) // 2]]
        order = sorted(ball, key=lambda y: guess[y], reverse=maximise)
        best = -np.inf if maximise else np.inf
        for y in order:
            labels[k] = y
            val = search(k + 1, alpha, beta)
            if maximise:
                best = max(best, val)
                alpha = max(alpha, best)
            else:
                best = min(best, val)
                beta = min(beta, best)
            if alpha >= beta:
                break
        labels[k] = -1
        return best

    return float(search(1, -np.inf, np.inf))


def to_long(setup: AdmissibleSetup, strategy: LabeledStrategy, L: int) -> list[int]:
    """Expand a short strategy to a labeling of the full depth-``L`` tree (heap order).

    Below a boundary node every descendant repeats its point.
    """
    tree, lab = strategy.tree, strategy.labels
    n_slots = 2 ** (L + 1) - 1
    out = [-1] * n_slots
    node_of = {0: 0}
    out[0] = lab[0]
    for k in range(1, n_slots):
        p = (k - 1) // 2
        t = node_of.get(p)
        if t is not None and tree.left[t] >= 0:
            c = tree.left[t] if k % 2 == 1 else tree.right[t]
            node_of[k] = c
            out[k] = lab[c]
        else:
            if t is not None and not setup.is_boundary[out[p]]:
                raise InvalidStrategy("interior leaf above depth L")
            out[k] = out[p]
    return out


def reduce_long(setup: AdmissibleSetup, long_labels: list[int], L: int) -> LabeledStrategy:
    """Erase all successors of boundary-labeled nodes of a full depth-``L`` labeling."""
    b = _Builder()
    labels = [long_labels[0]]
    queue = deque([(0, 0)])
    while queue:
        t, k = queue.popleft()
        y = long_labels[k]
        if setup.is_boundary[y] or b.depth[t] >= L:
            continue
        lt, rt = b.split(t)
        labels.extend((long_labels[2 * k + 1], long_labels[2 * k + 2]))
        queue.extend(((lt, 2 * k + 1), (rt, 2 * k + 2)))
    return LabeledStrategy(b.freeze(), tuple(labels))


@dataclass(frozen=True)
class TiterConstant:
    """Constant ``C`` in ``interior weight <= C + C * leaf weight`` for near-optimal trees.

    From ``Lambda + 1 >= lambda + lambda * (non-root inner weight) - 2 Lambda * (leaf weight)``:
    ``C = max((Lambda + 1 - lambda) / lambda, 2 Lambda / lambda)``.
    """

    C_titer: float
    Lambda: float
    lambda_min: float


def titer_bound(Lambda: float, lam: float) -> TiterConstant:
    if lam <= 0:
        raise LambdaNotPositive("need 0 < lambda_min < inf f")
    return TiterConstant(max((Lambda + 1 - lam) / lam, 2 * Lambda / lam), Lambda, lam)


def titer_constant(problem: DppProblem) -> TiterConstant:
    """Constant for ``problem``; its ``Lambda`` must also bound the iterates."""
    if problem.lambda_min is None:
        raise LambdaNotPositive("need 0 < lambda_min < inf f")
    return titer_bound(problem.Lambda, problem.lambda_min)


def verify_titer(strategy: LabeledStrategy | GameTree, mu: float, C_titer: float) -> bool:
    tree = strategy.tree if isinstance(strategy, LabeledStrategy) else strategy
    return satisfies_sum_estimate(tree, mu, C_titer)


def greedy_mass_profile(
    setup: AdmissibleSetup, problem: DppProblem, u, x: int, L: int
) -> MassProfile:
    """Layer masses of the greedy strategy tree without building it.

    Tracks the weight sitting on each point at each depth: the arg-max
    receives ``mu`` of it, the arg-min ``1 - mu``.  Gives the same ``a``/``b``
    as ``mass_profile(extract_strategy_tree(...).tree)``, in time linear in L.
    """
    u = np.asarray(u, dtype=float)
    mu = problem.mu
    n = setup.n_points
    hi = np.zeros(n, dtype=int)
    lo = np.zeros(n, dtype=int)
    for y in setup.interior:
        hi[y] = _best(setup.balls[y], u, True)
        lo[y] = _best(setup.balls[y], u, False)
    bmask = setup.boundary_mask
    m = np.zeros(n)
    m[x] = 1.0
    a, b = [], []
    for i in range(L + 1):
        a.append(m.sum())
        if i == L:
            b.append(m.sum())
            break
        b.append(m[bmask].sum())
        live = np.where(bmask, 0.0, m)
        nxt = np.zeros(n)
        np.add.at(nxt, hi, mu * live)
        np.add.at(nxt, lo, (1 - mu) * live)
        m = nxt
        if not m.any():
            break
    return MassProfile(np.asarray(a), np.asarray(b))

"""Strictly binary game trees with turn-count weights.

Every node has no children or exactly two, an ordered left child (a move of
the maximising player) and right child (minimising player).  A node reached
after ``l`` left turns and ``r`` right turns carries weight
``mu**l * (1 - mu)**r``.

Nodes live in an arena and are numbered in the total order of the tree:
by depth first, then left to right.  The root is node 0.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

MASS_ATOL = 1e-12


class NotStrictlyBinary(ValueError):
    pass


class HypothesisNotSatisfied(ValueError):
    pass


@dataclass(frozen=True)
class GameTree:
    left: tuple[int, ...]  # -1 for leaves
    right: tuple[int, ...]
    parent: tuple[int, ...]  # -1 for the root
    depth: tuple[int, ...]
    lturns: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.left)

    @property
    def rturns(self) -> tuple[int, ...]:
        return tuple(d - l for d, l in zip(self.depth, self.lturns))

    @property
    def height(self) -> int:
        """``d(T)``, the maximal node depth."""
        return max(self.depth)

    def is_leaf(self, t: int) -> bool:
        return self.left[t] < 0

    def leaves(self) -> list[int]:
        return [t for t in range(len(self)) if self.left[t] < 0]

    def weights(self, mu: float) -> np.ndarray:
        l = np.asarray(self.lturns, dtype=float)
        r = np.asarray(self.depth, dtype=float) - l
        return mu**l * (1.0 - mu) ** r

    def bits(self, t: int) -> str:
        """Bit-sequence name of node ``t``: a leading 0, then 0/1 per left/right move."""
        path = []
        while self.parent[t] >= 0:
            p = self.parent[t]
            path.append("0" if self.left[p] == t else "1")
            t = p
        return "0" + "".join(reversed(path))

    def node(self, bits: str) -> int:
        if not bits or bits[0] != "0":
            raise KeyError(bits)
        t = 0
        for b in bits[1:]:
            if self.left[t] < 0:
                raise KeyError(bits)
            t = self.left[t] if b == "0" else self.right[t]
        return t

    def to_nested(self):
        """Inverse of :func:`build_tree`: ``[]`` for a leaf, ``[left, right]`` otherwise."""
        out: dict[int, list] = {}
        for t in reversed(range(len(self))):
            out[t] = [] if self.left[t] < 0 else [out.pop(self.left[t]), out.pop(self.right[t])]
        return out[0]


class _Builder:
    def __init__(self):
        self.left: list[int] = [-1]
        self.right: list[int] = [-1]
        self.parent: list[int] = [-1]
        self.depth: list[int] = [0]
        self.lturns: list[int] = [0]

    def split(self, t: int) -> tuple[int, int]:
        kids = []
        for turn in (1, 0):
            self.left.append(-1)
            self.right.append(-1)
            self.parent.append(t)
            self.depth.append(self.depth[t] + 1)
            self.lturns.append(self.lturns[t] + turn)
            kids.append(len(self.left) - 1)
        self.left[t], self.right[t] = kids
        return kids[0], kids[1]

    def freeze(self) -> GameTree:
        return GameTree(
            tuple(self.left), tuple(self.right), tuple(self.parent),
            tuple(self.depth), tuple(self.lturns),
        )


def build_tree(structure) -> GameTree:
    """Build from nested lists: a leaf is ``[]`` (or None), an inner node ``[left, right]``."""
    b = _Builder()
    queue = deque([(0, structure)])
    while queue:
        t, spec = queue.popleft()
        if spec is None or (isinstance(spec, (list, tuple)) and len(spec) == 0):
            continue
        if not isinstance(spec, (list, tuple)) or len(spec) != 2:
            raise NotStrictlyBinary(f"node {b.depth[t]} levels deep does not have 0 or 2 children")
        lt, rt = b.split(t)
        queue.append((lt, spec[0]))
        queue.append((rt, spec[1]))
    return b.freeze()


def full_tree(depth: int) -> GameTree:
    b = _Builder()
    frontier = [0]
    for _ in range(depth):
        frontier = [c for t in frontier for c in b.split(t)]
    return b.freeze()


def left_comb(depth: int) -> GameTree:
    """Spine of left moves; every right child is a leaf."""
    b = _Builder()
    t = 0
    for _ in range(depth):
        t, _ = b.split(t)
    return b.freeze()


def random_tree(
    rng: np.random.Generator, max_depth: int = 60, max_nodes: int = 4000
) -> GameTree:
    """Random strictly binary tree by level-order leaf splitting.

    Each tree draws a shape: a branching mode where every leaf splits with a
    common probability (shallow when below 1/2, bushy above), or a comb mode
    where only one child of each split may split again, which yields deep
    sparse trees.
    """
    b = _Builder()
    comb = rng.random() < 0.4
    p_split = rng.uniform(0.55, 0.98) if comb else rng.uniform(0.3, 0.7)
    queue = deque([0])
    while queue:
        t = queue.popleft()
        if b.depth[t] >= max_depth or len(b.left) + 2 > max_nodes:
            continue
        if rng.random() >= p_split:
            continue
        lt, rt = b.split(t)
        if comb:
            queue.append(lt if rng.random() < 0.5 else rt)
        else:
            queue.extend((lt, rt))
    return b.freeze()


@dataclass(frozen=True)
class MassProfile:
    """``a[i]`` is the weight of all depth-i nodes, ``b[i]`` of depth-i leaves."""

    a: np.ndarray
    b: np.ndarray

    @property
    def interior_mass(self) -> float:
        return float(np.sum(self.a - self.b))

    @property
    def leaf_mass(self) -> float:
        return float(np.sum(self.b))

    @property
    def top_mass(self) -> float:
        return float(self.a[-1])


def mass_profile(tree: GameTree, mu: float) -> MassProfile:
    if not 0.0 < mu < 1.0:
        raise ValueError("mu must lie in (0, 1)")
    w = tree.weights(mu)
    depth = np.asarray(tree.depth)
    leaf = np.asarray(tree.left) < 0
    size = tree.height + 1
    a = np.bincount(depth, weights=w, minlength=size)
    b = np.bincount(depth[leaf], weights=w[leaf], minlength=size)
    gap = np.max(np.abs(a[1:] - (a[:-1] - b[:-1])), initial=0.0)
    if gap > MASS_ATOL:
        raise AssertionError(f"layer identity a_(i+1) = a_i - b_i violated by {gap}")
    return MassProfile(a, b)


def sparsity_threshold(C: float, delta: float) -> int:
    """``K = ceil(2 C / delta) + 2``."""
    if C <= 0 or delta <= 0:
        raise ValueError("C and delta must be positive")
    return math.ceil(2.0 * C / delta) + 2


def satisfies_sum_estimate(tree: GameTree, mu: float, C: float) -> bool:
    """Interior weight ``<= C + C * leaf weight``.

    The leaf weight of a strictly binary tree is 1, so this is the same as
    interior weight ``<= 2 C``; both forms are evaluated and must agree.
    """
    prof = mass_profile(tree, mu)
    interior = float(np.sum(tree.weights(mu)[np.asarray(tree.left) >= 0]))
    literal = interior <= C + C * prof.leaf_mass
    reduced = prof.interior_mass <= 2.0 * C
    if literal != reduced and abs(interior - 2.0 * C) > 1e-9 * max(1.0, C):
        raise AssertionError("sum estimate forms disagree away from the threshold")
    return literal


def check_sparsity_conclusion(tree: GameTree, mu: float, C: float, delta: float) -> bool:
    """Truth of ``d(T) >= K  =>  top-layer weight <= delta`` for a tree meeting the estimate."""
    if not satisfies_sum_estimate(tree, mu, C):
        raise HypothesisNotSatisfied("tree violates the interior/leaf sum estimate")
    if tree.height < sparsity_threshold(C, delta):
        return True
    return mass_profile(tree, mu).top_mass <= delta

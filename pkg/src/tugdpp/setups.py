"""Admissible setups ``(X, Y, {B(x)})`` and their boundary-distance layers.

A setup is a finite ground set ``X = {0, ..., n_points - 1}`` split into
interior points ``Y`` and boundary points ``X \\ Y``.  Every interior point
``x`` carries a nonempty "ball" ``B(x)``, an arbitrary list of points; no
metric and no symmetry are assumed.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class SetupError(ValueError):
    """Base class for rejected setups."""


class NoBoundary(SetupError):
    pass


class NoInterior(SetupError):
    pass


class EmptyBall(SetupError):
    def __init__(self, point: int):
        super().__init__(f"interior point {point} has an empty ball")
        self.point = point


class NotAdmissible(SetupError):
    def __init__(self, point: int, detail: str = ""):
        msg = f"interior point {point} has no chain to the boundary shorter than diam"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)
        self.point = point


@dataclass(frozen=True)
class AdmissibleSetup:
    """Finite setup.  ``balls[x]`` is empty for boundary points."""

    n_points: int
    is_boundary: tuple[bool, ...]
    balls: tuple[tuple[int, ...], ...]
    diam: int
    # CSR view of the balls, built once for vectorised sweeps
    _ball_index: np.ndarray = field(init=False, repr=False, compare=False)
    _ball_start: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n_points < 1:
            raise SetupError("n_points must be positive")
        if len(self.is_boundary) != self.n_points or len(self.balls) != self.n_points:
            raise SetupError("is_boundary and balls must have one entry per point")
        if self.diam < 1:
            raise SetupError("diam must be a positive integer")
        for x, ball in enumerate(self.balls):
            if self.is_boundary[x] and ball:
                raise SetupError(f"boundary point {x} must not carry a ball")
            for y in ball:
                if not 0 <= y < self.n_points:
                    raise SetupError(f"ball of point {x} references {y}, out of range")
        interior = [x for x in range(self.n_points) if not self.is_boundary[x]]
        flat = [y for x in interior for y in self.balls[x]]
        starts = np.cumsum([0] + [len(self.balls[x]) for x in interior[:-1]])
        object.__setattr__(self, "_ball_index", np.asarray(flat, dtype=np.intp))
        object.__setattr__(self, "_ball_start", np.asarray(starts, dtype=np.intp))

    @classmethod
    def from_lists(
        cls,
        n_points: int,
        boundary: Iterable[int],
        balls: dict[int, Sequence[int]] | Sequence[Sequence[int]],
        diam: int,
    ) -> "AdmissibleSetup":
        """Build from a boundary index list and per-point ball lists.

        ``balls`` is either a mapping ``point -> ball`` for interior points or
        a sequence indexed by point (boundary entries empty).
        """
        bset = set(int(b) for b in boundary)
        if any(not 0 <= b < n_points for b in bset):
            raise SetupError("boundary index out of range")
        if isinstance(balls, dict):
            table = [tuple(int(y) for y in balls.get(x, ())) for x in range(n_points)]
        else:
            if len(balls) != n_points:
                raise SetupError("balls must have one entry per point")
            table = [tuple(int(y) for y in b) for b in balls]
        flags = tuple(x in bset for x in range(n_points))
        return cls(n_points, flags, tuple(table), int(diam))

    @property
    def interior(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary_mask)

    @property
    def boundary(self) -> np.ndarray:
        return np.flatnonzero(self.boundary_mask)

    @property
    def boundary_mask(self) -> np.ndarray:
        return np.asarray(self.is_boundary, dtype=bool)

    def relabel(self, perm: Sequence[int]) -> "AdmissibleSetup":
        """Return the setup with point ``x`` renamed to ``perm[x]``."""
        perm = list(perm)
        inv = [0] * self.n_points
        for old, new in enumerate(perm):
            inv[new] = old
        flags = tuple(self.is_boundary[inv[y]] for y in range(self.n_points))
        balls = tuple(tuple(perm[z] for z in self.balls[inv[y]]) for y in range(self.n_points))
        return AdmissibleSetup(self.n_points, flags, balls, self.diam)

    def to_json(self) -> dict:
        return {
            "n_points": self.n_points,
            "boundary": [int(b) for b in self.boundary],
            "balls": [list(b) for b in self.balls],
            "diam": self.diam,
        }

    @classmethod
    def from_json(cls, data: dict) -> "AdmissibleSetup":
        keys = {"n_points", "boundary", "balls", "diam"}
        unknown = set(data) - keys
        if unknown:
            raise SetupError(f"unknown setup fields: {sorted(unknown)}")
        missing = keys - set(data)
        if missing:
            raise SetupError(f"missing setup fields: {sorted(missing)}")
        n = data["n_points"]
        if not isinstance(n, int) or isinstance(n, bool):
            raise SetupError("n_points must be an integer")
        balls = data["balls"]
        if not isinstance(balls, list) or any(not isinstance(b, list) for b in balls):
            raise SetupError("balls must be an array of arrays")
        return cls.from_lists(n, data["boundary"], balls, data["diam"])


@dataclass(frozen=True)
class LayerDecomposition:
    """``layer_of[x]`` is the length of the shortest ball chain from x to the boundary."""

    layer_of: tuple[int, ...]
    max_layer: int

    def members(self, alpha: int) -> list[int]:
        return [x for x, a in enumerate(self.layer_of) if a == alpha]


def compute_layers(setup: AdmissibleSetup) -> list[float]:
    """Multi-source BFS from the boundary along reversed ball edges.

    Unreachable interior points get ``inf``.
    """
    n = setup.n_points
    preds: list[list[int]] = [[] for _ in range(n)]
    for x, ball in enumerate(setup.balls):
        for y in set(ball):
            preds[y].append(x)
    layer = [float("inf")] * n
    queue: deque[int] = deque()
    for x in range(n):
        if setup.is_boundary[x]:
            layer[x] = 0
            queue.append(x)
    while queue:
        y = queue.popleft()
        for x in preds[y]:
            if layer[x] == float("inf"):
                layer[x] = layer[y] + 1
                queue.append(x)
    return layer


def validate(setup: AdmissibleSetup) -> LayerDecomposition:
    """Check admissibility and return the minimal-chain layers.

    Raises:
        NoBoundary, NoInterior, EmptyBall, NotAdmissible
    """
    if not any(setup.is_boundary):
        raise NoBoundary("setup has no boundary points")
    if all(setup.is_boundary):
        raise NoInterior("setup has no interior points")
    for x in range(setup.n_points):
        if not setup.is_boundary[x] and not setup.balls[x]:
            raise EmptyBall(x)
    layer = compute_layers(setup)
    for x, a in enumerate(layer):
        if a == float("inf"):
            raise NotAdmissible(x, "boundary unreachable")
        if a >= setup.diam:
            raise NotAdmissible(x, f"shortest chain has length {a}, diam is {setup.diam}")
    ints = tuple(int(a) for a in layer)
    return LayerDecomposition(ints, max(ints))


def load_setup(path: str | Path) -> AdmissibleSetup:
    with open(path) as fh:
        return AdmissibleSetup.from_json(json.load(fh))


def dump_setup(setup: AdmissibleSetup, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(setup.to_json(), fh, indent=2)
        fh.write("\n")

"""Metric spaces, agent instances, social cost and the median.

Supported spaces:

* ``Line``: the real line with distance |x - y|.
* ``L1Space(d)``: R^d with the L1 norm; the median is taken coordinate-wise.
* ``Curve(vertices)``: a simple open piecewise-linear curve; agents are curve
  parameters in [0, 1] and distance is arc length along the curve.  The
  parameterization induces a total order, so the median is the point at the
  median parameter.  Injectivity of the polyline is assumed, not checked.
* ``StarTree(n)``: an unweighted star graph with node 0 the hub and one agent
  per node; distance is shortest-path hop count.

For even agent counts the lower median (rank ceil(n/2) in ascending order) is
used throughout; this preserves both strategy-proofness and optimality.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class Line:
    """The metric space (R, |.|)."""

    def __repr__(self) -> str:
        return "Line()"

    def __eq__(self, other) -> bool:
        return isinstance(other, Line)

    def __hash__(self) -> int:
        return hash("Line")

    def validate_point(self, p) -> None:
        if not np.isscalar(p) or isinstance(p, (bool, str)):
            raise ValueError("space mismatch")

    def distance(self, a, b) -> float:
        return abs(float(a) - float(b))


@dataclass(frozen=True)
class L1Space:
    """The metric space (R^d, ||.||_1)."""

    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be positive")

    def validate_point(self, p) -> None:
        if np.isscalar(p) or len(p) != self.d:
            raise ValueError("space mismatch")

    def distance(self, a, b) -> float:
        return float(np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)).sum())


class Curve:
    """A simple open polyline; points are parameters in [0, 1].

    Vertex j sits at parameter j/(V-1); positions interpolate linearly in the
    parameter between vertices, and distance between two parameters is the
    accumulated segment length between them.
    """

    def __init__(self, vertices: Sequence[Sequence[float]]):
        verts = np.asarray(vertices, dtype=float)
        if verts.ndim == 1:
            verts = verts[:, None]
        if len(verts) < 2:
            raise ValueError("curve needs at least 2 vertices")
        self.vertices = verts
        seg = np.linalg.norm(np.diff(verts, axis=0), axis=1)
        self._cum = np.concatenate([[0.0], np.cumsum(seg)])

    def __repr__(self) -> str:
        return f"Curve({len(self.vertices)} vertices, length {self._cum[-1]:g})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Curve) and np.array_equal(self.vertices, other.vertices)

    def validate_point(self, p) -> None:
        if not np.isscalar(p) or not (0.0 <= float(p) <= 1.0):
            raise ValueError("space mismatch")

    def arc_length_at(self, t: float) -> float:
        """Arc length from parameter 0 to parameter t."""
        t = float(t)
        nseg = len(self.vertices) - 1
        x = t * nseg
        j = min(int(x), nseg - 1)
        frac = x - j
        return float(self._cum[j] + frac * (self._cum[j + 1] - self._cum[j]))

    def position(self, t: float) -> np.ndarray:
        """Embedded coordinates of the point at parameter t."""
        t = float(t)
        nseg = len(self.vertices) - 1
        x = t * nseg
        j = min(int(x), nseg - 1)
        frac = x - j
        return self.vertices[j] + frac * (self.vertices[j + 1] - self.vertices[j])

    def distance(self, a, b) -> float:
        return abs(self.arc_length_at(a) - self.arc_length_at(b))


@dataclass(frozen=True)
class StarTree:
    """Unweighted star graph on n nodes; node 0 is the hub."""

    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("star needs at least 2 nodes")

    def validate_point(self, p) -> None:
        if not np.isscalar(p) or int(p) != p or not (0 <= int(p) < self.n):
            raise ValueError("space mismatch")

    def distance(self, a, b) -> float:
        a, b = int(a), int(b)
        if a == b:
            return 0.0
        if a == 0 or b == 0:
            return 1.0
        return 2.0


@dataclass(frozen=True)
class Instance:
    """A population of agent positions on a declared metric space."""

    space: object
    points: tuple

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        if len(self.points) < 1:
            raise ValueError("instance needs at least one agent")
        for p in self.points:
            self.space.validate_point(p)
        if isinstance(self.space, StarTree):
            # one agent per node, ids covering 0..n-1
            if sorted(int(p) for p in self.points) != list(range(self.space.n)):
                raise ValueError("star instance must place exactly one agent per node")

    @property
    def n(self) -> int:
        return len(self.points)

    def to_json(self) -> str:
        if isinstance(self.space, Line):
            obj = {"space": "line", "points": list(self.points)}
        elif isinstance(self.space, L1Space):
            obj = {"space": "l1", "d": self.space.d, "points": [list(p) for p in self.points]}
        elif isinstance(self.space, Curve):
            obj = {
                "space": "curve",
                "vertices": self.space.vertices.tolist(),
                "points": list(self.points),
            }
        elif isinstance(self.space, StarTree):
            obj = {"space": "star", "points": [int(p) for p in self.points]}
        else:
            raise ValueError("space mismatch")
        return json.dumps(obj)

    @staticmethod
    def from_json(text: str) -> "Instance":
        obj = json.loads(text)
        kind = obj["space"]
        if kind == "line":
            return Instance(Line(), obj["points"])
        if kind == "l1":
            return Instance(L1Space(obj["d"]), tuple(tuple(p) for p in obj["points"]))
        if kind == "curve":
            return Instance(Curve(obj["vertices"]), obj["points"])
        if kind == "star":
            pts = obj["points"]
            return Instance(StarTree(len(pts)), pts)
        raise ValueError("space mismatch")


def social_cost(instance: Instance, facilities: Sequence) -> float:
    """Sum over agents of the distance to the nearest facility."""
    facilities = list(facilities)
    if not facilities:
        raise ValueError("no facilities")
    for f in facilities:
        instance.space.validate_point(f)
    space = instance.space
    if isinstance(space, Line):
        pts = np.asarray(instance.points, dtype=float)
        fac = np.asarray(facilities, dtype=float)
        return float(np.abs(pts[:, None] - fac[None, :]).min(axis=1).sum())
    if isinstance(space, L1Space):
        pts = np.asarray(instance.points, dtype=float)
        fac = np.asarray(facilities, dtype=float)
        return float(np.abs(pts[:, None, :] - fac[None, :, :]).sum(axis=2).min(axis=1).sum())
    if isinstance(space, Curve):
        s = np.asarray([space.arc_length_at(t) for t in instance.points])
        fs = np.asarray([space.arc_length_at(t) for t in facilities])
        return float(np.abs(s[:, None] - fs[None, :]).min(axis=1).sum())
    if isinstance(space, StarTree):
        return float(
            sum(min(space.distance(p, f) for f in facilities) for p in instance.points)
        )
    raise ValueError("space mismatch")


def _lower_median(values: Sequence[float]):
    """Rank ceil(n/2) in ascending order; ties kept stable by original index."""
    order = sorted(range(len(values)), key=lambda i: (values[i], i))
    return values[order[(len(values) - 1) // 2]]


def median(instance: Instance):
    """The (generalized) median of an instance.

    Line and L1 use the coordinate-wise lower median; a curve uses the total
    order induced by its parameterization; the star's unique median is the hub.
    """
    space = instance.space
    if isinstance(space, Line):
        return _lower_median(list(instance.points))
    if isinstance(space, L1Space):
        cols = list(zip(*instance.points))
        return tuple(_lower_median(list(col)) for col in cols)
    if isinstance(space, Curve):
        return _lower_median(list(instance.points))
    if isinstance(space, StarTree):
        return 0
    raise ValueError("space mismatch")

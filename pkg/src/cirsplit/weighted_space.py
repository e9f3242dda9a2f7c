"""Polynomial weight functions and weighted supremum norms.

The error metric for every experiment is sup over nodes of
psi(x)^(-1) * |u(x)| with psi_s(x) = (1 + |x|^2)^(s/2).  The sup is taken
over the mesh node set, optionally restricted to a sub-region.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import GridFunction


class DegenerateRegionError(ValueError):
    """Raised when a region contains no mesh nodes."""


@dataclass(frozen=True)
class WeightFunction:
    """psi_s(x) = (1 + |x|^2)^(s/2); psi_0 is identically 1."""

    s: int = 6

    def __post_init__(self):
        if self.s < 0 or int(self.s) != self.s:
            raise ValueError("weight exponent must be a nonnegative integer")

    def values(self, coords: np.ndarray) -> np.ndarray:
        """Weight at each row of an (n, dim) coordinate array."""
        coords = np.atleast_2d(np.asarray(coords, dtype=float))
        r2 = np.sum(coords * coords, axis=1)
        return (1.0 + r2) ** (self.s / 2.0)

    def __call__(self, point) -> float:
        return eval_weight(self, point)


def eval_weight(weight: WeightFunction, point) -> float:
    """Evaluate psi_s at a single point (any dimension)."""
    point = np.atleast_1d(np.asarray(point, dtype=float))
    return float((1.0 + float(point @ point)) ** (weight.s / 2.0))


@dataclass(frozen=True)
class Region:
    """Node-selection region: the full domain, a simplex x+y <= c, or a box."""

    kind: str
    bounds: tuple = ()

    @classmethod
    def full(cls) -> "Region":
        return cls("full")

    @classmethod
    def simplex(cls, c: float) -> "Region":
        """Points with coordinate sum <= c."""
        if c <= 0.0:
            raise ValueError("simplex size must be positive")
        return cls("simplex", (float(c),))

    @classmethod
    def box(cls, *intervals) -> "Region":
        """Axis-aligned box given as (lo, hi) per dimension."""
        bounds = tuple((float(lo), float(hi)) for lo, hi in intervals)
        for lo, hi in bounds:
            if hi < lo:
                raise ValueError("box interval with hi < lo")
        return cls("box", bounds)

    def mask(self, coords: np.ndarray) -> np.ndarray:
        coords = np.atleast_2d(np.asarray(coords, dtype=float))
        if self.kind == "full":
            return np.ones(coords.shape[0], dtype=bool)
        if self.kind == "simplex":
            c = self.bounds[0]
            return coords.sum(axis=1) <= c + 1e-12 * (1.0 + c)
        if self.kind == "box":
            if len(self.bounds) != coords.shape[1]:
                raise ValueError("box dimension does not match coordinates")
            m = np.ones(coords.shape[0], dtype=bool)
            for d, (lo, hi) in enumerate(self.bounds):
                tol = 1e-12 * (1.0 + abs(hi) + abs(lo))
                m &= (coords[:, d] >= lo - tol) & (coords[:, d] <= hi + tol)
            return m
        raise ValueError(f"unknown region kind {self.kind!r}")


def weighted_sup_norm(u: GridFunction, weight: WeightFunction, region: Region | None = None) -> float:
    """max over region nodes of psi(x)^(-1) * |u(x)| (complex modulus).

    A discrete stand-in for the continuum weighted sup norm; refining the
    mesh can only increase it for a fixed continuous function.
    """
    if region is None:
        region = Region.full()
    coords = u.mesh.node_coords()
    m = region.mask(coords)
    if not np.any(m):
        raise DegenerateRegionError(f"region {region.kind!r} contains no mesh nodes")
    return float(np.max(np.abs(u.values[m]) / weight.values(coords[m])))

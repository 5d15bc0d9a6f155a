"""Euclidean primitives: points, balls, nearest-neighbor distances, ball covers.

Points are plain numpy arrays of shape (d,); point sets are arrays of shape
(n, d). Everything here is a pure function, safe to call concurrently.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import ModelViolationError


class Ball(NamedTuple):
    """Closed Euclidean ball."""

    center: np.ndarray
    radius: float


def as_points(points) -> np.ndarray:
    """Coerce to an (n, d) float array; 1-D input is treated as n points in R^1."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2:
        raise ValueError(f"expected an (n, d) point array, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("point coordinates must be finite")
    return pts


def unit_ball_volume(d: int) -> float:
    """Volume of the unit Euclidean ball in R^d (2 for d=1, pi for d=2, ...)."""
    if d < 1:
        raise ValueError("dimension must be >= 1")
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def ball_contains(b: Ball, x) -> bool:
    """Closed-ball membership: true iff ||x - center|| <= radius."""
    x = np.asarray(x, dtype=float)
    return bool(np.linalg.norm(x - b.center) <= b.radius)


def balls_intersect(a: Ball, b: Ball) -> bool:
    """True iff the two closed balls share at least one point."""
    return bool(np.linalg.norm(a.center - b.center) <= a.radius + b.radius)


def ball_contains_ball(outer: Ball, inner: Ball) -> bool:
    """True iff every point of `inner` lies in `outer`."""
    return bool(np.linalg.norm(outer.center - inner.center) + inner.radius <= outer.radius)


def all_nearest_neighbor_distances(points) -> np.ndarray:
    """Distances from each point to its nearest neighbor, by brute-force scan.

    Raises ModelViolationError if two points coincide (the model requires
    strictly positive local feature sizes).
    """
    pts = as_points(points)
    n = pts.shape[0]
    if n < 2:
        raise ValueError("nearest-neighbor distances need at least 2 points")
    diff = pts[:, None, :] - pts[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    np.fill_diagonal(d2, np.inf)
    nn = np.sqrt(d2.min(axis=1))
    if np.any(nn == 0.0):
        raise ModelViolationError("duplicate points: nearest-neighbor distance is 0")
    return nn


def nearest_neighbor_distance(points, i: int) -> float:
    """Distance from points[i] to its nearest neighbor among the others."""
    pts = as_points(points)
    n = pts.shape[0]
    if n < 2:
        raise ValueError("nearest-neighbor distance needs at least 2 points")
    if not 0 <= i < n:
        raise IndexError(f"index {i} out of range for {n} points")
    diff = pts - pts[i]
    d2 = np.einsum("ij,ij->i", diff, diff)
    d2[i] = np.inf
    nn = math.sqrt(float(d2.min()))
    if nn == 0.0:
        raise ModelViolationError("duplicate points: nearest-neighbor distance is 0")
    return nn


def min_pairwise_distance(points) -> float:
    """Minimum over i of nearest_neighbor_distance(points, i)."""
    return float(all_nearest_neighbor_distances(points).min())


def cover_count_bound(radius_ratio: float, d: int) -> int:
    """Guaranteed upper bound on the cover cardinality for a given radius ratio.

    A ball of radius R is covered by at most (2*ceil(R/r)*sqrt(d))^d balls of
    radius r.
    """
    return int(math.floor((2 * math.ceil(radius_ratio) * math.sqrt(d)) ** d))


def cover_ball(b: Ball, target_radius: float) -> list[Ball]:
    """Cover the ball `b` with balls of radius exactly `target_radius`.

    Tiles the enclosing cube of `b` with axis-aligned cells of side
    2*target_radius/sqrt(d); each cell intersecting `b` contributes one ball
    of radius target_radius at the cell center (the cell's circumradius is
    exactly target_radius, so the balls cover every cell they come from).
    The returned list is in lexicographic cell order, its size never exceeds
    cover_count_bound(b.radius/target_radius, d), and every returned ball
    intersects `b`.
    """
    if target_radius <= 0:
        raise ValueError("target_radius must be positive")
    if target_radius > b.radius:
        raise ValueError("target_radius must not exceed the covered ball's radius")
    center = np.asarray(b.center, dtype=float)
    d = center.shape[0]
    side = 2.0 * target_radius / math.sqrt(d)
    per_axis = max(1, math.ceil(2.0 * b.radius / side))
    low = center - b.radius

    if d == 1:
        # Interval tiling: every cell intersects the covered interval.
        centers1 = low[0] + side * (np.arange(per_axis) + 0.5)
        balls = [Ball(np.array([c]), float(target_radius)) for c in centers1]
    else:
        axes = [low[k] + side * (np.arange(per_axis) + 0.5) for k in range(d)]
        grids = np.meshgrid(*axes, indexing="ij")
        cell_centers = np.stack([g.ravel() for g in grids], axis=1)
        # Keep cells whose closest point to b.center is within b.radius.
        half = side / 2.0
        nearest = np.clip(center - cell_centers, -half, half) + cell_centers
        keep = np.einsum("ij,ij->i", nearest - center, nearest - center) <= b.radius**2
        balls = [Ball(c.copy(), float(target_radius)) for c in cell_centers[keep]]
    assert len(balls) <= cover_count_bound(b.radius / target_radius, d)
    return balls

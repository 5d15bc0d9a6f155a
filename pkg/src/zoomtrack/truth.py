"""Hidden ground truth: object centers, local feature sizes, spatial distributions.

Each object i is an independent random point X_i = q_i + l_i * S, where S is
drawn from a base distribution supported on the d-dimensional unit ball and
l_i = beta * N_i is the local feature radius (N_i = nearest-neighbor distance
of q_i). The base distribution is bounded above by a stored constant nu.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import stats

from .errors import ModelViolationError
from .geometry import Ball, all_nearest_neighbor_distances, unit_ball_volume


class UniformBall:
    """Uniform distribution on the unit ball."""

    kind = "uniform-ball"

    def __init__(self, d: int):
        self.d = d
        self.nu = 1.0 / unit_ball_volume(d)

    def sample_unit(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.d == 1:
            return (2.0 * rng.random((size, 1))) - 1.0
        dirs = rng.standard_normal((size, self.d))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        radii = rng.random(size) ** (1.0 / self.d)
        return dirs * radii[:, None]

    def density_unit(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        inside = np.einsum("ij,ij->i", x, x) <= 1.0
        return np.where(inside, self.nu, 0.0)


class _RejectionFamily:
    """Base for truncated families sampled by rejection from the untruncated law."""

    def _sample_base(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError

    def _base_density(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def sample_unit(self, rng: np.random.Generator, size: int) -> np.ndarray:
        out = np.empty((size, self.d))
        filled = 0
        while filled < size:
            batch = self._sample_base(rng, max(size - filled, 64))
            keep = batch[np.einsum("ij,ij->i", batch, batch) <= 1.0]
            take = min(len(keep), size - filled)
            out[filled : filled + take] = keep[:take]
            filled += take
        return out

    def density_unit(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(x)
        inside = np.einsum("ij,ij->i", x, x) <= 1.0
        return np.where(inside, self._base_density(x) / self.normalizer, 0.0)


class TruncatedNormal(_RejectionFamily):
    """Isotropic normal of the given pre-truncation scale, conditioned on the unit ball.

    The normalizer P(||X|| <= 1) equals the chi-square CDF of 1/scale^2 with d
    degrees of freedom; computed analytically and cross-checked by quadrature
    in the test suite.
    """

    kind = "truncated-normal"

    def __init__(self, d: int, scale: float = 0.5):
        if scale <= 0:
            raise ValueError("scale must be positive")
        self.d = d
        self.scale = scale
        self.normalizer = float(stats.chi2.cdf(1.0 / scale**2, df=d))
        self.nu = (2 * math.pi) ** (-d / 2) * scale**-d / self.normalizer

    def _sample_base(self, rng, size):
        return rng.standard_normal((size, self.d)) * self.scale

    def _base_density(self, x):
        r2 = np.einsum("ij,ij->i", np.atleast_2d(x), np.atleast_2d(x))
        norm = (2 * math.pi) ** (-self.d / 2) * self.scale**-self.d
        return norm * np.exp(-r2 / (2 * self.scale**2))


class TruncatedCauchy(_RejectionFamily):
    """Product Cauchy of the given pre-truncation scale, conditioned on the unit ball.

    The normalizer is analytic for d=1; for d>=2 it is the acceptance rate of
    the rejection sampler, computed once by quadrature (d=2) or Monte Carlo
    (d>=3).
    """

    kind = "truncated-cauchy"

    _MC_NORMALIZER_SAMPLES = 10**6

    def __init__(self, d: int, scale: float = 0.5):
        if scale <= 0:
            raise ValueError("scale must be positive")
        self.d = d
        self.scale = scale
        self.normalizer = self._compute_normalizer()
        self.nu = (math.pi * scale) ** -d / self.normalizer

    def _compute_normalizer(self) -> float:
        if self.d == 1:
            return (2.0 / math.pi) * math.atan(1.0 / self.scale)
        if self.d == 2:
            # Polar Gauss-Legendre over the unit disk.
            nodes, weights = np.polynomial.legendre.leggauss(96)
            r = 0.5 * (nodes + 1.0)
            wr = 0.5 * weights
            th = math.pi * (nodes + 1.0)
            wt = math.pi * weights
            rr, tt = np.meshgrid(r, th, indexing="ij")
            pts = np.stack([rr * np.cos(tt), rr * np.sin(tt)], axis=-1).reshape(-1, 2)
            vals = self._base_density(pts).reshape(len(r), len(th))
            return float(np.einsum("i,j,ij->", wr, wt, vals * rr))
        rng = np.random.default_rng(np.random.SeedSequence(entropy=20240601, spawn_key=(self.d,)))
        pts = self._sample_base(rng, self._MC_NORMALIZER_SAMPLES)
        return float(np.mean(np.einsum("ij,ij->i", pts, pts) <= 1.0))

    def _sample_base(self, rng, size):
        return rng.standard_cauchy((size, self.d)) * self.scale

    def _base_density(self, x):
        x = np.atleast_2d(x)
        return (math.pi * self.scale) ** -self.d / np.prod(1.0 + (x / self.scale) ** 2, axis=1)


FAMILY_KINDS = ("uniform-ball", "truncated-normal", "truncated-cauchy")


def make_family(kind: str, d: int, scale: float = 0.5):
    """Construct a base distribution family by name."""
    if kind == "uniform-ball":
        return UniformBall(d)
    if kind == "truncated-normal":
        return TruncatedNormal(d, scale)
    if kind == "truncated-cauchy":
        return TruncatedCauchy(d, scale)
    raise ValueError(f"unknown family {kind!r}; expected one of {FAMILY_KINDS}")


class TruthState:
    """Ground-truth state: centers, motion/scale parameters, bounding ball.

    Mutated only through move_center (the evolver's entry point); everything
    else is read-only. Nearest-neighbor distances are cached and updated
    incrementally on every move.
    """

    def __init__(self, centers, alpha: float, beta: float, family, radius: float):
        self.centers = np.array(centers, dtype=float)
        if self.centers.ndim == 1:
            self.centers = self.centers[:, None]
        self.n, self.d = self.centers.shape
        if self.n < 2:
            raise ValueError("the model needs at least 2 objects")
        if not (0 < alpha < 1 and 0 < beta < 1):
            raise ValueError("alpha and beta must lie in (0, 1)")
        if radius <= 0:
            raise ValueError("bounding radius must be positive")
        if family.d != self.d:
            raise ValueError("family dimension does not match the point set")
        norms = np.linalg.norm(self.centers, axis=1)
        if np.any(norms > radius * (1 + 1e-12)):
            raise ModelViolationError("initial centers must lie in the bounding ball")
        self.alpha = alpha
        self.beta = beta
        self.family = family
        self.radius = float(radius)
        self.nn = all_nearest_neighbor_distances(self.centers)  # raises on duplicates
        self._l = self.beta * self.nn  # cached feature radii, refreshed on moves

    @property
    def bounding_ball(self) -> Ball:
        return Ball(np.zeros(self.d), self.radius)

    @property
    def feature_radii(self) -> np.ndarray:
        """l_i = beta * N_i for every object."""
        return self._l

    def local_feature(self, i: int) -> Ball:
        """The ball supporting object i's distribution."""
        return Ball(self.centers[i].copy(), float(self.beta * self.nn[i]))

    def sample_object(self, i: int, rng: np.random.Generator) -> np.ndarray:
        """One draw of X_i; always lands inside local_feature(i)."""
        s = self.family.sample_unit(rng, 1)[0]
        return self.centers[i] + self._l[i] * s

    def sample_objects(self, indices: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """One joint draw of X_j for the given indices (ascending order)."""
        s = self.family.sample_unit(rng, len(indices))
        return self.centers[indices] + self._l[indices, None] * s

    def density(self, i: int, x) -> float:
        """Density of X_i at x: base density rescaled by the local feature size."""
        li = float(self._l[i])
        u = (np.asarray(x, dtype=float) - self.centers[i]) / li
        return float(self.family.density_unit(u[None, :])[0] / li**self.d)

    def aspect_ratio(self) -> float:
        """Bounding radius over the smallest nearest-neighbor distance."""
        return self.radius / float(self.nn.min())

    def move_center(self, i: int, new_position: np.ndarray) -> list[int]:
        """Relocate q_i and refresh nearest-neighbor caches.

        Returns the indices j != i whose N_j changed. Cost is O(n) plus O(n)
        per object whose nearest neighbor was q_i.
        """
        new_position = np.asarray(new_position, dtype=float)
        old = self.centers[i].copy()
        diff_old = self.centers - old
        d_old = np.sqrt(np.einsum("ij,ij->i", diff_old, diff_old))
        self.centers[i] = new_position
        diff_new = self.centers - new_position
        d_new = np.sqrt(np.einsum("ij,ij->i", diff_new, diff_new))

        d_new[i] = np.inf
        old_nn = self.nn.copy()
        was_nn = d_old == old_nn
        was_nn[i] = False
        for j in np.nonzero(was_nn)[0]:
            # q_i was (one of) j's nearest neighbors; recompute j's row.
            row = self.centers - self.centers[j]
            dj = np.einsum("ij,ij->i", row, row)
            dj[j] = np.inf
            self.nn[j] = math.sqrt(float(dj.min()))
        rest = ~was_nn
        rest[i] = False
        self.nn[rest] = np.minimum(old_nn[rest], d_new[rest])
        self.nn[i] = float(d_new.min())
        if np.any(self.nn == 0.0):
            raise ModelViolationError("move created duplicate centers")
        np.multiply(self.nn, self.beta, out=self._l)
        changed = np.nonzero(self.nn != old_nn)[0]
        return [int(j) for j in changed if j != i]

    def recompute_nn(self) -> np.ndarray:
        """Brute-force recomputation of all N_i (used to audit the cache)."""
        return all_nearest_neighbor_distances(self.centers)


def aspect_ratio(state: TruthState) -> float:
    return state.aspect_ratio()

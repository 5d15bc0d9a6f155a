"""Distance and potential metrics.

The potential of object i is ln(max(s_i, l_i, h_i) / sqrt(l_i h_i)) where
s_i = ||q_i - k_i||, l_i is the local feature radius, and h_i the hypothesis
scale. It is exact, cheap, and bounds the per-object KL divergence up to
explicit constants. The tracked distance is the sum over objects of
KL(P_i || H_i), in nats: exact in closed form for uniform truth in 1-D,
estimated by Monte Carlo (any family, any dimension), or by masked
Gauss-Legendre quadrature in 2-D.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import unit_ball_volume
from .tracker import Hypothesis
from .truth import TruthState


@dataclass
class PotentialBreakdown:
    """Per-object potential components and the system total."""

    s: np.ndarray  # ||q_i - k_i||
    l: np.ndarray  # beta * N_i
    h: np.ndarray  # hypothesis scales
    per_object: np.ndarray
    total: float


def potential_single(s: float, l: float, h: float) -> float:
    """ln(max(s, l, h) / sqrt(l h)); symmetric in l and h, never negative."""
    return math.log(max(s, l, h) / math.sqrt(l * h))


def potential(truth: TruthState, hyp: Hypothesis) -> PotentialBreakdown:
    if truth.n != hyp.n or truth.d != hyp.d:
        raise ValueError("truth and hypothesis shapes disagree")
    diff = truth.centers - hyp.k
    s = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    l = truth.feature_radii
    h = hyp.h
    per_object = np.log(np.maximum(np.maximum(s, l), h) / np.sqrt(l * h))
    return PotentialBreakdown(s, l, h, per_object, float(per_object.sum()))


@dataclass
class KLEstimate:
    value: float  # nats
    stderr: float  # nats; 0 for the exact path
    method: str  # exact-1d | monte-carlo | quadrature
    samples: int


def _cauchy_log_antiderivative(u: np.ndarray) -> np.ndarray:
    """Antiderivative of ln(1 + u^2): u ln(1+u^2) - 2u + 2 arctan(u)."""
    return u * np.log1p(u * u) - 2.0 * u + 2.0 * np.arctan(u)


def kl_exact_1d(q: float, l: float, k: float, h: float) -> float:
    """Closed-form KL from uniform on [q-l, q+l] to Cauchy(k, h), in nats."""
    if l <= 0 or h <= 0:
        raise ValueError("l and h must be positive")
    u1 = (q - l - k) / h
    u2 = (q + l - k) / h
    f = _cauchy_log_antiderivative(np.array([u1, u2]))
    return math.log(math.pi * h / (2.0 * l)) + (h / (2.0 * l)) * float(f[1] - f[0])


def kl_exact_1d_many(q: np.ndarray, l: np.ndarray, k: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Vectorized kl_exact_1d over object arrays."""
    u1 = (q - l - k) / h
    u2 = (q + l - k) / h
    f = _cauchy_log_antiderivative(u2) - _cauchy_log_antiderivative(u1)
    return np.log(math.pi * h / (2.0 * l)) + (h / (2.0 * l)) * f


def kl_monte_carlo(
    truth: TruthState, hyp: Hypothesis, i: int, samples: int, rng: np.random.Generator
) -> KLEstimate:
    """Unbiased estimate of E[ln(P_i(X)/H_i(X))] with X drawn from P_i."""
    if samples < 1:
        raise ValueError("need at least one sample")
    li = float(truth.feature_radii[i])
    s_unit = truth.family.sample_unit(rng, samples)
    x = truth.centers[i] + li * s_unit
    log_p = np.log(truth.family.density_unit(s_unit)) - truth.d * math.log(li)
    log_h = hyp.log_density(i, x)
    vals = log_p - log_h
    value = float(vals.mean())
    stderr = float(vals.std(ddof=1) / math.sqrt(samples)) if samples > 1 else float("inf")
    return KLEstimate(value, stderr, "monte-carlo", samples)


def kl_quadrature_2d(truth: TruthState, hyp: Hypothesis, i: int, nodes: int = 192) -> KLEstimate:
    """Tensor Gauss-Legendre over the bounding square of the feature ball,
    masked to the ball; 2-D only. The reported stderr is the difference from
    a half-resolution evaluation, a crude but serviceable error proxy."""
    if truth.d != 2:
        raise ValueError("quadrature estimator is 2-D only")

    def evaluate(m: int) -> float:
        g, w = np.polynomial.legendre.leggauss(m)
        li = float(truth.feature_radii[i])
        q = truth.centers[i]
        xs = q[0] + li * g
        ys = q[1] + li * g
        xx, yy = np.meshgrid(xs, ys, indexing="ij")
        pts = np.stack([xx.ravel(), yy.ravel()], axis=1)
        u = (pts - q) / li
        p = truth.family.density_unit(u) / li**2
        inside = p > 0
        integrand = np.zeros(len(pts))
        log_h = hyp.log_density(i, pts[inside])
        integrand[inside] = p[inside] * (np.log(p[inside]) - log_h)
        cell = np.outer(w, w).ravel() * li * li
        return float((integrand * cell).sum())

    value = evaluate(nodes)
    coarse = evaluate(nodes // 2)
    return KLEstimate(value, abs(value - coarse), "quadrature", nodes * nodes)


def kl_upper_bound(s: float, l: float, h: float, d: int) -> float:
    """Certified upper bound on KL(P_i || H_i) for uniform-ball truth:
    ln(omega_d * pi^d) + d * ln((h^2 + (s+l)^2) / (l h))."""
    if l <= 0 or h <= 0:
        raise ValueError("l and h must be positive")
    return math.log(unit_ball_volume(d) * math.pi**d) + d * math.log((h * h + (s + l) ** 2) / (l * h))


def kl_upper_bound_from_potential(phi: float, d: int) -> float:
    """Looser potential-form bound: ln(omega_d pi^d) + 2d ln 3 + 2d phi.
    Always >= kl_upper_bound for the same object, since
    h^2 + (s+l)^2 <= 9 max(s,l,h)^2."""
    return math.log(unit_ball_volume(d) * math.pi**d) + 2 * d * math.log(3.0) + 2 * d * phi


def naive_distance_bound(aspect: float, beta: float, d: int) -> float:
    """Per-object distance bound for the no-information hypothesis:
    d * (ln aspect + ln(3/beta))."""
    if aspect < 1:
        raise ValueError("aspect ratio must be >= 1")
    if not 0 < beta < 1 / 3:
        raise ValueError("beta must lie in (0, 1/3)")
    return d * (math.log(aspect) + math.log(3.0 / beta))


def pairwise_ratio(truth: TruthState, hyp: Hypothesis) -> tuple[float, float]:
    """(min, max) over pairs of ||k_i - k_j|| / ||q_i - q_j||."""
    if truth.n < 2:
        raise ValueError("need at least 2 objects")
    iu = np.triu_indices(truth.n, k=1)
    dq = truth.centers[iu[0]] - truth.centers[iu[1]]
    dk = hyp.k[iu[0]] - hyp.k[iu[1]]
    qd = np.sqrt(np.einsum("ij,ij->i", dq, dq))
    kd = np.sqrt(np.einsum("ij,ij->i", dk, dk))
    ratios = kd / qd
    return float(ratios.min()), float(ratios.max())


def pairwise_ratio_bracket(beta: float, phi_bound: float) -> tuple[float, float]:
    """Ratio bracket implied by all per-object potentials being <= phi_bound.

    With c = e^phi_bound both the center offset s_i and the scale h_i are at
    most c^2 * l_i, and l_i <= beta * ||q_i - q_j||, so center distances match
    true distances within 1 +/- 2 beta c^2 (floored at 0 below).
    """
    c2 = math.exp(2.0 * phi_bound)
    spread = 2.0 * beta * c2
    return max(0.0, 1.0 - spread), 1.0 + spread


def distance_estimate(
    truth: TruthState,
    hyp: Hypothesis,
    method: str = "auto",
    mc_samples: int = 4096,
    rng: np.random.Generator | None = None,
    quad_nodes: int = 128,
) -> tuple[np.ndarray, np.ndarray, str]:
    """Per-object KL estimates (values, stderrs, method used).

    method 'auto' picks the exact closed form for uniform truth in 1-D and
    Monte Carlo otherwise.
    """
    if method == "auto":
        method = "exact" if truth.d == 1 and truth.family.kind == "uniform-ball" else "mc"
    if method == "exact":
        if truth.d != 1 or truth.family.kind != "uniform-ball":
            raise ValueError("exact distance needs 1-D uniform-ball truth")
        values = kl_exact_1d_many(
            truth.centers[:, 0], truth.feature_radii, hyp.k[:, 0], hyp.h
        )
        return values, np.zeros_like(values), "exact-1d"
    if method == "mc":
        if rng is None:
            raise ValueError("Monte Carlo estimation needs an rng")
        values = np.empty(truth.n)
        errs = np.empty(truth.n)
        for i in range(truth.n):
            est = kl_monte_carlo(truth, hyp, i, mc_samples, rng)
            values[i], errs[i] = est.value, est.stderr
        return values, errs, "monte-carlo"
    if method == "quadrature":
        values = np.empty(truth.n)
        errs = np.empty(truth.n)
        for i in range(truth.n):
            est = kl_quadrature_2d(truth, hyp, i, quad_nodes)
            values[i], errs[i] = est.value, est.stderr
        return values, errs, "quadrature"
    raise ValueError(f"unknown distance method {method!r}")

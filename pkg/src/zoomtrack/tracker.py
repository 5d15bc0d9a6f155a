"""The zoom tracker: a hypothesis of product-Cauchy distributions, maintained
through two-bit ball queries.

The tracker cycles through the object indices. For each index it alternates
between a zoom-out phase (grow the hypothesis ball geometrically until it
captures the object and its neighborhood) and a zoom-in phase (shrink it by
a constant factor at a time via a constant-size ball cover), accepting the
hypothesis once the object is inside and no other object is nearby.

Every call to step() issues exactly one oracle query, so the speedup factor
counts oracle queries directly. The tracker never sees coordinates of the
truth, only the oracle's two bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .geometry import Ball, cover_ball
from .oracle import Oracle, OracleResponse


class Phase(Enum):
    ZOOM_OUT = "zoom_out"
    ZOOM_IN = "zoom_in"
    COVER_SCAN = "cover_scan"


@dataclass(frozen=True)
class TrackerEvent:
    """Observable state-machine event, reported to the harness for auditing.

    kind is one of:
      expansion_trigger  zoom-out pair matched; h is about to expand
      cover_trigger      zoom-in pair found a crowded neighborhood; scan starts
      cover_hit          a cover ball captured the object; hypothesis recentered
      completion         index accepted and advanced
      reacquire          object escaped its hypothesis ball; back to zoom-out
      zoom_out_double    zoom-out pair did not match; h doubled
      iteration          all n indices completed one full pass
      hypothesis_changed k_i or h_i was modified this step
    """

    kind: str
    index: int
    center: np.ndarray | None = None
    radius: float = 0.0
    pair_span: tuple[int, int] | None = None  # ledger totals of the two paired queries


def expansion_factor(beta: float, numerator: float = 3.0) -> float:
    """Hypothesis-ball expansion applied when a zoom pair matches."""
    return numerator / (1.0 - 2.0 * beta)


def cover_radius_divisor(beta: float, numerator: float = 3.0) -> int:
    """Cover balls have radius h divided by this (twice the ceiled expansion)."""
    return 2 * math.ceil(numerator / (1.0 - 2.0 * beta))


def completion_potential_bound(beta: float) -> float:
    """The constant bound on an object's potential at every completion event."""
    return math.log(3.0 * math.sqrt((1.0 + 2.0 * beta) / (1.0 - beta)))


class Hypothesis:
    """Per-object product-Cauchy parameters: centers k (n, d) and scales h (n,)."""

    def __init__(self, k: np.ndarray, h: np.ndarray):
        self.k = np.array(k, dtype=float)
        self.h = np.array(h, dtype=float)
        if np.any(self.h <= 0):
            raise ValueError("hypothesis scales must be positive")
        self.n, self.d = self.k.shape

    def ball(self, i: int) -> Ball:
        return Ball(self.k[i].copy(), float(self.h[i]))

    def density(self, i: int, x) -> float:
        return float(np.exp(self.log_density(i, np.asarray(x, dtype=float)[None, :])[0]))

    def log_density(self, i: int, x: np.ndarray) -> np.ndarray:
        """Log density of the i-th product-Cauchy at points x of shape (m, d)."""
        u = (x - self.k[i]) / self.h[i]
        return -self.d * math.log(math.pi * self.h[i]) - np.log1p(u * u).sum(axis=1)

    def copy(self) -> "Hypothesis":
        return Hypothesis(self.k.copy(), self.h.copy())

    def snapshot_rows(self):
        """Rows (i, k_1..k_d, h) for CSV export."""
        for i in range(self.n):
            yield (i, *self.k[i].tolist(), float(self.h[i]))


def init_hypothesis(n: int, bounding: Ball) -> Hypothesis:
    """All hypotheses start as the bounding ball: centers at the origin, scale R0."""
    if n < 2:
        raise ValueError("need at least 2 objects")
    d = len(bounding.center)
    return Hypothesis(
        np.tile(np.asarray(bounding.center, dtype=float), (n, 1)),
        np.full(n, float(bounding.radius)),
    )


def hypothesis_density(hyp: Hypothesis, i: int, x) -> float:
    return hyp.density(i, x)


class ZoomTracker:
    """The serialized tracking state machine; one oracle query per step.

    The pseudocode's paired queries (the hypothesis ball, then its
    1/beta-expansion) are issued on consecutive steps; the first response is
    held in `pending` until the second arrives. `expansion_numerator`
    deliberately exists so tests can mis-set the expansion factor as a
    negative control.
    """

    def __init__(self, n: int, beta: float, bounding: Ball, expansion_numerator: float = 3.0):
        if not 0 < beta < 0.5:
            raise ValueError("beta must lie in (0, 1/2) for the expansion factor")
        self.n = n
        self.beta = beta
        self.hyp = init_hypothesis(n, bounding)
        self.expansion = expansion_factor(beta, expansion_numerator)
        self.cover_divisor = cover_radius_divisor(beta, expansion_numerator)
        self.i = 0
        self.phase = Phase.ZOOM_OUT
        self.pending: OracleResponse | None = None
        self.pending_query_no = 0
        self.cover: list[Ball] | None = None
        self.cover_pos = 0
        self.iterations = 0
        self.completions = np.zeros(n, dtype=np.int64)

    def step(self, oracle: Oracle, rng: np.random.Generator) -> list[TrackerEvent]:
        """Advance the machine by exactly one oracle query."""
        if self.phase is Phase.ZOOM_OUT:
            return self._zoom_pair(oracle, rng, self._resolve_zoom_out)
        if self.phase is Phase.ZOOM_IN:
            return self._zoom_pair(oracle, rng, self._resolve_zoom_in)
        return self._cover_step(oracle, rng)

    # -- phase internals ----------------------------------------------------

    def _zoom_pair(self, oracle, rng, resolve) -> list[TrackerEvent]:
        i = self.i
        if self.pending is None:
            self.pending = oracle.query(i, self.hyp.k[i], self.hyp.h[i], rng, self.phase.value)
            self.pending_query_no = oracle.ledger.total
            return []
        star = oracle.query(i, self.hyp.k[i], self.hyp.h[i] / self.beta, rng, self.phase.value)
        first, self.pending = self.pending, None
        span = (self.pending_query_no, oracle.ledger.total)
        return resolve(first, star, span)

    def _resolve_zoom_out(self, first, star, span) -> list[TrackerEvent]:
        i = self.i
        if first.self_in and star.self_in and star.other_in:
            events = [
                TrackerEvent("expansion_trigger", i, self.hyp.k[i].copy(), float(self.hyp.h[i]), span)
            ]
            self.hyp.h[i] *= self.expansion
            self.phase = Phase.ZOOM_IN
            events.append(TrackerEvent("hypothesis_changed", i))
            return events
        self.hyp.h[i] *= 2.0
        return [TrackerEvent("zoom_out_double", i), TrackerEvent("hypothesis_changed", i)]

    def _resolve_zoom_in(self, first, star, span) -> list[TrackerEvent]:
        i = self.i
        if not first.self_in:
            self.phase = Phase.ZOOM_OUT
            return [TrackerEvent("reacquire", i)]
        if star.self_in and not star.other_in:
            events = [TrackerEvent("completion", i, pair_span=span)]
            self.completions[i] += 1
            self.i = (i + 1) % self.n
            self.phase = Phase.ZOOM_OUT
            if self.i == 0:
                self.iterations += 1
                events.append(TrackerEvent("iteration", self.iterations))
            return events
        if star.self_in and star.other_in:
            events = [
                TrackerEvent("cover_trigger", i, self.hyp.k[i].copy(), float(self.hyp.h[i]), span)
            ]
            ball = self.hyp.ball(i)
            self.cover = cover_ball(ball, ball.radius / self.cover_divisor)
            self.cover_pos = 0
            self.phase = Phase.COVER_SCAN
            return events
        # First bit said the object is inside, the starred pair disagreed:
        # fresh samples are independent, so just re-test the zoom-in pair.
        return []

    def _cover_step(self, oracle, rng) -> list[TrackerEvent]:
        i = self.i
        ball = self.cover[self.cover_pos]
        resp = oracle.query(i, ball.center, ball.radius, rng, self.phase.value)
        if resp.self_in:
            self.hyp.k[i] = ball.center
            self.hyp.h[i] = self.expansion * ball.radius
            self.cover = None
            self.phase = Phase.ZOOM_IN
            return [
                TrackerEvent("cover_hit", i, np.array(ball.center), float(ball.radius)),
                TrackerEvent("hypothesis_changed", i),
            ]
        self.cover_pos += 1
        if self.cover_pos >= len(self.cover):
            # Scan exhausted without a hit (samples are fresh per call);
            # fall back to re-testing the zoom-in pair.
            self.cover = None
            self.phase = Phase.ZOOM_IN
        return []

"""Evolver strategies: hidden processes that move one object per time unit.

A step moves q_i by at most alpha * N_i (N_i evaluated before the move) and
must keep the point inside the bounding ball. The lower-bound adversary
realizes the pursuit-game construction: it sleeps until armed, then spends a
short window repeatedly pushing a small set of currently-well-tracked objects
away from their partners, far enough that their local features end up
disjoint from where they started.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ModelViolationError
from .tracker import Hypothesis
from .truth import TruthState


@dataclass(frozen=True)
class EvolverStep:
    index: int
    displacement: np.ndarray


@dataclass(frozen=True)
class AdversaryView:
    """What a strong adversary may read: the public hypothesis, the tracker's
    activity log (when each hypothesis last changed), and the truth it drives.
    Never exposes future oracle randomness."""

    time: int
    truth: TruthState
    hypothesis: Hypothesis
    last_hypothesis_change: np.ndarray  # time of last k/h modification per index


@dataclass
class StepEffect:
    """What applying a step changed: the moved index and every j whose N_j moved."""

    index: int
    changed_neighbors: list[int]
    nn_before: float
    nn_after: float


def apply_step(truth: TruthState, step: EvolverStep) -> StepEffect:
    """Validate a step against the local-motion rules and apply it."""
    i = step.index
    delta = np.asarray(step.displacement, dtype=float)
    magnitude = float(np.linalg.norm(delta))
    budget = truth.alpha * truth.nn[i]
    if magnitude > budget * (1 + 1e-9):
        raise ModelViolationError(
            f"step of size {magnitude:.6g} exceeds alpha*N_i = {budget:.6g} for object {i}"
        )
    new_pos = truth.centers[i] + delta
    if np.linalg.norm(new_pos) > truth.radius * (1 + 1e-9):
        raise ModelViolationError(f"step would move object {i} outside the bounding ball")
    nn_before = float(truth.nn[i])
    changed = truth.move_center(i, new_pos)
    return StepEffect(i, changed, nn_before, float(truth.nn[i]))


def evolver_potential_bound(alpha: float, beta: float, d: int) -> float:
    """Certified upper bound on the potential increase from one evolver step.

    Self term: the moved object's offset grows by at most (alpha/beta) l_i and
    its feature radius shrinks by at most (1-alpha). Neighbor term: at most
    2*3^d other objects see their feature radius change, each by a log-ratio
    of at most ln((1-alpha)/(1-2alpha)), entering the potential twice.
    """
    if not 0 < alpha < 1 / 3 or not 0 < beta < 1 / 3:
        raise ValueError("alpha and beta must lie in (0, 1/3)")
    self_term = math.log((1 + alpha / beta) / math.sqrt(1 - alpha))
    neighbor_term = 2 * 3**d * 2 * math.log((1 - alpha) / (1 - 2 * alpha))
    return self_term + neighbor_term


class DormantStrategy:
    """Never moves anything."""

    def propose(self, view: AdversaryView, rng: np.random.Generator) -> EvolverStep | None:
        return None


class RandomStrategy:
    """Uniform index, uniform direction, magnitude uniform in [0, alpha*N_i].

    Proposals that would exit the bounding ball are truncated along their
    direction to stop at the boundary.
    """

    def propose(self, view: AdversaryView, rng: np.random.Generator) -> EvolverStep | None:
        truth = view.truth
        i = int(rng.integers(truth.n))
        direction = rng.standard_normal(truth.d)
        direction /= np.linalg.norm(direction)
        magnitude = float(rng.random()) * truth.alpha * float(truth.nn[i])
        q = truth.centers[i]
        # Largest travel along `direction` that stays inside the bounding ball.
        proj = float(q @ direction)
        slack = proj * proj + truth.radius**2 - float(q @ q)
        boundary = -proj + math.sqrt(max(slack, 0.0))
        magnitude = min(magnitude, max(boundary, 0.0))
        return EvolverStep(i, magnitude * direction)


class ScriptedStrategy:
    """Replays a fixed list of steps keyed by time."""

    def __init__(self, steps: dict[int, tuple[int, np.ndarray]]):
        self.steps = steps

    def propose(self, view: AdversaryView, rng: np.random.Generator) -> EvolverStep | None:
        entry = self.steps.get(view.time)
        if entry is None:
            return None
        i, delta = entry
        return EvolverStep(i, np.array(delta, dtype=float))


def load_script(path) -> ScriptedStrategy:
    """Load scripted steps from a CSV of rows (t, i, d1..dd)."""
    steps: dict[int, tuple[int, np.ndarray]] = {}
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            t, i = int(row[0]), int(row[1])
            delta = np.array([float(v) for v in row[2:]], dtype=float)
            if t in steps:
                raise ConfigError(f"scripted step time {t} appears twice")
            steps[t] = (i, delta)
    return ScriptedStrategy(steps)


def push_count(alpha: float) -> int:
    """Smallest k with (1+alpha)^k >= 2: pushes needed to double a separation."""
    return math.ceil(math.log(2.0) / math.log(1.0 + alpha))


class LowerBoundAdversary:
    """The pursuit-game evolver for paired 1-axis configurations.

    Dormant until armed at some window start t0 (fixed up front or set by the
    harness when burn-in is detected). Over the window [t0, t0 + n/M) it picks
    n/(kappa*M) pair-leader objects whose hypotheses are currently good and
    were not touched since t0 - preferring the most recently completed, which
    the tracker will not revisit for a while - and pushes each one directly
    away from its partner kappa times, each push of magnitude exactly
    alpha * N_i. After kappa pushes the separation has at least doubled and
    the local feature no longer overlaps its pre-window support.
    """

    def __init__(self, n: int, alpha: float, window_m: int = 8, t0: int | None = None):
        if n % 2 != 0:
            raise ConfigError("the lower-bound adversary needs an even object count")
        self.n = n
        self.kappa = push_count(alpha)
        self.window_m = window_m
        self.window_len = max(1, n // window_m)
        self.quota = max(1, n // (self.kappa * window_m))
        self.window_start = t0
        self._candidates: list[int] | None = None
        self._current: int | None = None
        self._pushes_done = 0
        self._completed: list[int] = []

    def arm(self, t0: int) -> None:
        """Fix the window start; called once, before or at time t0."""
        if self.window_start is None:
            self.window_start = t0

    @property
    def window_end(self) -> int | None:
        return None if self.window_start is None else self.window_start + self.window_len

    @property
    def pushed_indices(self) -> list[int]:
        return list(self._completed)

    def _build_candidates(self, view: AdversaryView) -> list[int]:
        # Pair leaders are the even indices; prefer the most recently updated
        # hypotheses (just completed by the tracker: good now, revisited last).
        leaders = np.arange(0, self.n, 2)
        recency = view.last_hypothesis_change[leaders]
        order = np.argsort(-recency, kind="stable")
        return [int(leaders[j]) for j in order]

    def propose(self, view: AdversaryView, rng: np.random.Generator) -> EvolverStep | None:
        t0 = self.window_start
        if t0 is None or not (t0 <= view.time < t0 + self.window_len):
            return None
        if self._candidates is None:
            self._candidates = self._build_candidates(view)
        while True:
            if len(self._completed) >= self.quota:
                return None
            if self._current is None:
                if not self._candidates:
                    return None
                self._current = self._candidates.pop(0)
                self._pushes_done = 0
            i = self._current
            altered = view.last_hypothesis_change[i] >= t0
            if altered and self._pushes_done == 0:
                self._current = None  # tracker got there first; try the next one
                continue
            break
        truth = view.truth
        partner = i + 1
        direction = truth.centers[i] - truth.centers[partner]
        direction = direction / np.linalg.norm(direction)
        step = EvolverStep(i, truth.alpha * float(truth.nn[i]) * direction)
        self._pushes_done += 1
        if self._pushes_done >= self.kappa:
            self._completed.append(i)
            self._current = None
        return step

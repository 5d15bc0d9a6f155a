"""The two-bit ball-membership oracle.

A query names an object index i and a ball. The oracle draws one fresh joint
sample of the object positions and answers (self_in, other_in): whether X_i
landed in the ball, and whether any X_j with j != i did. Objects whose local
feature ball is disjoint from the query ball cannot contribute and are not
sampled. Successive queries are independent; the oracle is the only component
that draws object-position randomness.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .truth import TruthState


@dataclass(frozen=True)
class OracleResponse:
    self_in: bool  # Y/N bit
    other_in: bool  # +/- bit

    def __str__(self) -> str:
        return f"({'Y' if self.self_in else 'N'},{'+' if self.other_in else '-'})"


@dataclass
class QueryLedger:
    """Monotone query counters, total and split by tracker phase."""

    total: int = 0
    by_phase: dict = field(default_factory=dict)

    def record(self, phase: str | None) -> None:
        self.total += 1
        if phase is not None:
            self.by_phase[phase] = self.by_phase.get(phase, 0) + 1


class Oracle:
    """Binds a TruthState to the query interface and a ledger."""

    def __init__(self, truth: TruthState, ledger: QueryLedger | None = None):
        self.truth = truth
        self.ledger = ledger if ledger is not None else QueryLedger()
        self._buf = np.empty(truth.n)

    def query(
        self,
        i: int,
        center,
        radius: float,
        rng: np.random.Generator,
        phase: str | None = None,
    ) -> OracleResponse:
        if radius <= 0:
            raise ValueError("query radius must be positive")
        truth = self.truth
        if not 0 <= i < truth.n:
            raise IndexError(f"object index {i} out of range")
        self.ledger.record(phase)

        # Candidates: objects whose feature ball can intersect the query ball.
        buf = self._buf
        if truth.d == 1:
            flat = truth.centers[:, 0]
            cx = float(center[0]) if isinstance(center, np.ndarray) else float(np.asarray(center).ravel()[0])
            np.subtract(flat, cx, out=buf)
            np.absolute(buf, out=buf)
            np.subtract(buf, truth._l, out=buf)
            candidates = np.flatnonzero(buf <= radius)
        else:
            center = np.asarray(center, dtype=float)
            diff = truth.centers - center
            dist2 = np.einsum("ij,ij->i", diff, diff)
            reach = truth._l + radius
            candidates = np.flatnonzero(dist2 <= reach * reach)

        self_in = False
        other_in = False
        k = candidates.size
        if k:
            s_unit = truth.family.sample_unit(rng, k)
            samples = truth.centers[candidates] + truth._l[candidates, None] * s_unit
            if truth.d == 1:
                inside = np.abs(samples[:, 0] - cx) <= radius
            else:
                sdiff = samples - center
                inside = np.einsum("ij,ij->i", sdiff, sdiff) <= radius * radius
            hits = int(np.count_nonzero(inside))
            if hits:
                pos = int(np.searchsorted(candidates, i))
                self_in = pos < k and candidates[pos] == i and bool(inside[pos])
                other_in = hits > (1 if self_in else 0)
        return OracleResponse(self_in, other_in)

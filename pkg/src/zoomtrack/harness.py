"""Simulation harness: wires evolver, oracle, tracker and metrics together
under the speedup contract (at most one evolver step and exactly sigma
tracker queries per time unit), runs the runtime assertion battery, detects
burn-in, and drives the experiment suites.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import ExperimentConfig
from .errors import ConfigError, ModelViolationError
from .evolver import (
    AdversaryView,
    DormantStrategy,
    LowerBoundAdversary,
    RandomStrategy,
    apply_step,
    evolver_potential_bound,
    load_script,
)
from .metrics import distance_estimate, kl_exact_1d_many, potential
from .oracle import Oracle
from .tracker import ZoomTracker, completion_potential_bound
from .truth import TruthState, make_family

# ---------------------------------------------------------------------------
# Initial configurations


def _pair_layout(n: int, d: int) -> np.ndarray:
    """Interleaved pairs on the first axis: leaders at 100, 200, ...; each
    partner one unit further out. Leaders sit at even indices."""
    m = n // 2
    base = 100.0 * (np.arange(m) + 1)
    centers = np.zeros((n, d))
    centers[0::2, 0] = base
    centers[1::2, 0] = base + 1.0
    return centers


def _rejection_fill(
    rng: np.random.Generator, n: int, d: int, region_radius: float, min_sep: float,
    around: np.ndarray | None = None,
) -> np.ndarray:
    center = np.zeros(d) if around is None else around
    points = np.empty((n, d))
    count = 0
    attempts = 0
    while count < n:
        attempts += 1
        if attempts > 20000 * n:
            raise ConfigError("layout rejection sampling stalled; lower min_separation")
        dirs = rng.standard_normal(d)
        dirs /= np.linalg.norm(dirs)
        cand = center + dirs * region_radius * rng.random() ** (1.0 / d)
        if count:
            diff = points[:count] - cand
            if np.min(np.einsum("ij,ij->i", diff, diff)) < min_sep**2:
                continue
        points[count] = cand
        count += 1
    return points


def generate_layout(config: ExperimentConfig, rng: np.random.Generator) -> tuple[np.ndarray, float]:
    """Build the initial centers and the bounding radius for a config."""
    n, d, sep = config.n, config.d, config.min_separation
    if config.layout == "pairs":
        centers = _pair_layout(n, d)
        r0 = config.r0 if config.r0 > 0 else 100.0 * (n // 2) + 10.0
    elif config.layout == "grid":
        per_axis = math.ceil(n ** (1.0 / d))
        axes = [sep * (np.arange(per_axis) - (per_axis - 1) / 2.0)] * d
        grids = np.meshgrid(*axes, indexing="ij")
        centers = np.stack([g.ravel() for g in grids], axis=1)[:n]
        r0 = config.r0 if config.r0 > 0 else 2.0 * float(np.linalg.norm(centers, axis=1).max())
    elif config.layout == "clustered":
        k = max(2, int(round(math.sqrt(n))))
        sizes = [n // k + (1 if j < n % k else 0) for j in range(k)]
        small = 4.0 * sep * max(sizes) ** (1.0 / d)
        big = 20.0 * small
        hubs = _rejection_fill(rng, k, d, big * k ** (1.0 / d), big)
        parts = [
            _rejection_fill(rng, size, d, small, sep, around=hub)
            for hub, size in zip(hubs, sizes)
        ]
        centers = np.concatenate(parts, axis=0)
        r0 = config.r0 if config.r0 > 0 else 2.0 * float(np.linalg.norm(centers, axis=1).max())
    else:  # uniform
        if config.r0 > 0:
            region = config.spread * config.r0
        else:
            region = 2.0 * sep * n ** (1.0 / d)
        centers = _rejection_fill(rng, n, d, region, sep)
        r0 = config.r0 if config.r0 > 0 else region / config.spread
    if np.any(np.linalg.norm(centers, axis=1) > r0):
        raise ConfigError("layout does not fit inside the bounding ball; raise r0")
    return centers, float(r0)


def build_strategy(config: ExperimentConfig):
    if config.evolver == "dormant":
        return DormantStrategy()
    if config.evolver == "random":
        return RandomStrategy()
    if config.evolver == "scripted":
        return load_script(config.script_path)
    t0 = None if config.adversary_t0 < 0 else config.adversary_t0
    return LowerBoundAdversary(config.n, config.alpha, config.adversary_m, t0)


# ---------------------------------------------------------------------------
# Runtime assertion battery


@dataclass
class RuntimeChecks:
    """Counters for the continuously-checked invariants.

    With raise_on_violation=False (verify mode, negative controls) violations
    are only counted.
    """

    enabled: bool = True
    raise_on_violation: bool = True

    expansion_events: int = 0
    expansion_violations: int = 0
    expansion_min_margin: float = math.inf
    contaminated_pairs: int = 0

    completion_events: int = 0
    completion_violations: int = 0
    completion_max_phi: float = -math.inf

    evolver_steps_checked: int = 0
    evolver_delta_violations: int = 0
    evolver_max_delta: float = -math.inf
    packing_violations: int = 0
    packing_max_changed: int = 0

    def _fail(self, message: str) -> None:
        if self.raise_on_violation:
            raise AssertionError(message)

    def containment(self, truth: TruthState, i: int, center: np.ndarray, radius: float,
                    factor: float, contaminated: bool) -> None:
        if not self.enabled:
            return
        self.expansion_events += 1
        if contaminated:
            self.contaminated_pairs += 1
        s = float(np.linalg.norm(truth.centers[i] - center))
        margin = factor * radius - (s + float(truth.feature_radii[i]))
        self.expansion_min_margin = min(self.expansion_min_margin, margin)
        if margin < -1e-12 * factor * radius:
            self.expansion_violations += 1
            self._fail(
                f"expansion containment violated for object {i}: margin {margin:.3e}"
            )

    def completion(self, i: int, phi_i: float, bound: float) -> None:
        if not self.enabled:
            return
        self.completion_events += 1
        self.completion_max_phi = max(self.completion_max_phi, phi_i)
        if phi_i > bound + 1e-9:
            self.completion_violations += 1
            self._fail(f"completion potential {phi_i:.6f} exceeds bound {bound:.6f} (object {i})")

    def evolver_step(self, delta: float, changed_neighbors: int, k_bound: float,
                     packing_bound: int) -> None:
        if not self.enabled:
            return
        self.evolver_steps_checked += 1
        self.evolver_max_delta = max(self.evolver_max_delta, delta)
        self.packing_max_changed = max(self.packing_max_changed, changed_neighbors)
        if delta > k_bound + 1e-9:
            self.evolver_delta_violations += 1
            self._fail(f"evolver step raised the potential by {delta:.6f} > bound {k_bound:.6f}")
        if changed_neighbors > packing_bound:
            self.packing_violations += 1
            self._fail(
                f"evolver step changed {changed_neighbors} neighbor features > {packing_bound}"
            )

    def total_violations(self) -> int:
        return (
            self.expansion_violations
            + self.completion_violations
            + self.evolver_delta_violations
            + self.packing_violations
        )

    def summary_lines(self) -> list[str]:
        return [
            f"expansion_containment: events={self.expansion_events} "
            f"violations={self.expansion_violations} min_margin={self.expansion_min_margin:.6g} "
            f"contaminated_pairs={self.contaminated_pairs}",
            f"completion_bound: events={self.completion_events} "
            f"violations={self.completion_violations} max_phi={self.completion_max_phi:.6g}",
            f"evolver_bound: steps={self.evolver_steps_checked} "
            f"violations={self.evolver_delta_violations} max_delta={self.evolver_max_delta:.6g}",
            f"packing: violations={self.packing_violations} "
            f"max_changed={self.packing_max_changed}",
        ]


# ---------------------------------------------------------------------------
# Metrics log


_CSV_COLUMNS = (
    "t",
    "evolver_steps",
    "tracker_queries",
    "phi_total",
    "phi_max_i",
    "d_estimate_nats",
    "d_stderr_nats",
    "completions",
)


@dataclass
class MetricsLog:
    n: int
    t: np.ndarray
    evolver_steps: np.ndarray
    tracker_queries: np.ndarray
    phi_total: np.ndarray
    phi_max_i: np.ndarray
    d_estimate_nats: np.ndarray
    d_stderr_nats: np.ndarray
    completions: np.ndarray

    def to_csv(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            fh.write(",".join(_CSV_COLUMNS) + "\n")
            for row in zip(
                self.t, self.evolver_steps, self.tracker_queries, self.phi_total,
                self.phi_max_i, self.d_estimate_nats, self.d_stderr_nats, self.completions,
            ):
                cells = [str(int(row[0])), str(int(row[1])), str(int(row[2])),
                         repr(float(row[3])), repr(float(row[4]))]
                for v in row[5:7]:
                    cells.append("" if math.isnan(v) else repr(float(v)))
                cells.append(str(int(row[7])))
                fh.write(",".join(cells) + "\n")

    def write_plot_files(self, phi_path, distance_path) -> None:
        with open(phi_path, "w", newline="\n") as fh:
            for t, phi in zip(self.t, self.phi_total):
                fh.write(f"{int(t)} {repr(float(phi) / self.n)}\n")
        with open(distance_path, "w", newline="\n") as fh:
            for t, dval in zip(self.t, self.d_estimate_nats):
                if not math.isnan(dval):
                    fh.write(f"{int(t)} {repr(float(dval) / self.n)}\n")


def detect_burn_in(log: MetricsLog, threshold_per_object: float) -> int | None:
    """Earliest logged t such that phi/n stays at or below the threshold for
    the whole window [t, t + n]; None if never sustained."""
    ok = log.phi_total / log.n <= threshold_per_object
    window = log.n
    run_start = None
    for idx in range(len(ok)):
        if ok[idx]:
            if run_start is None:
                run_start = idx
            if int(log.t[idx]) - int(log.t[run_start]) >= window:
                return int(log.t[run_start])
        else:
            run_start = None
    return None


# ---------------------------------------------------------------------------
# Run summary


@dataclass
class RunSummary:
    n: int
    d: int
    aspect_ratio: float
    burn_in_time: int | None
    steady_mean_phi_per_object: float
    steady_max_phi_per_object: float
    steady_mean_distance_per_object: float
    steady_max_distance_per_object: float
    total_time: int
    total_queries: int
    total_evolver_steps: int
    total_completions: int
    iterations: int
    violations: int
    check_lines: list[str] = field(default_factory=list)

    def to_text(self) -> str:
        lines = [
            f"n = {self.n}",
            f"d = {self.d}",
            f"aspect_ratio = {self.aspect_ratio!r}",
            f"burn_in_time = {self.burn_in_time}",
            f"steady_mean_phi_per_object = {self.steady_mean_phi_per_object!r}",
            f"steady_max_phi_per_object = {self.steady_max_phi_per_object!r}",
            f"steady_mean_distance_per_object = {self.steady_mean_distance_per_object!r}",
            f"steady_max_distance_per_object = {self.steady_max_distance_per_object!r}",
            f"total_time = {self.total_time}",
            f"total_queries = {self.total_queries}",
            f"total_evolver_steps = {self.total_evolver_steps}",
            f"total_completions = {self.total_completions}",
            f"iterations = {self.iterations}",
            f"violations = {self.violations}",
        ]
        lines.extend(self.check_lines)
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# The simulation loop


class Simulation:
    """One experiment: deterministic given (config, seed).

    Per time unit: at most one evolver step, then exactly sigma tracker steps
    (one oracle query each), then one metrics row. Observers are callables
    (sim, t) invoked after each unit's metrics row.
    """

    def __init__(
        self,
        config: ExperimentConfig,
        checks_enabled: bool = True,
        raise_on_violation: bool = True,
        expansion_numerator: float = 3.0,
    ):
        self.config = config
        seeds = np.random.SeedSequence(config.seed).spawn(4)
        self.rng_layout = np.random.default_rng(seeds[0])
        self.rng_evolver = np.random.default_rng(seeds[1])
        self.rng_oracle = np.random.default_rng(seeds[2])
        self.rng_metrics = np.random.default_rng(seeds[3])

        centers, r0 = generate_layout(config, self.rng_layout)
        family = make_family(config.family, config.d, config.family_scale)
        self.truth = TruthState(centers, config.alpha, config.beta, family, r0)
        self.initial_centers = self.truth.centers.copy()
        self.initial_feature_radii = self.truth.feature_radii.copy()
        self.aspect0 = self.truth.aspect_ratio()

        self.tracker = ZoomTracker(
            config.n, config.beta, self.truth.bounding_ball, expansion_numerator
        )
        self.oracle = Oracle(self.truth)
        self.strategy = build_strategy(config)
        self.checks = RuntimeChecks(checks_enabled, raise_on_violation)

        self.sigma = config.effective_sigma
        self.stride = config.effective_metrics_stride()
        self.k_bound = evolver_potential_bound(config.alpha, config.beta, config.d)
        self.phi_bound = completion_potential_bound(config.beta)
        self.packing_bound = 2 * 3**config.d
        self.burn_in_threshold = config.effective_burn_in_threshold

        self.time = 0
        self.evolver_steps = 0
        self.completions_total = 0
        self.phi = potential(self.truth, self.tracker.hyp).per_object
        self.last_hyp_change = np.full(config.n, -1, dtype=np.int64)  # -1 = never
        self.burn_in_time: int | None = None
        self._sustained_since: int | None = None
        self._evolver_query_mark = -1  # ledger total when the last evolver step ran
        self.iteration_marks: list[tuple[int, int, float]] = []  # (z, t, phi_total)
        self.hypothesis_snapshots: list[tuple] = []
        self.observers: list = []

        self._rows: list[tuple] = []
        self._log_row()

    # -- potential maintenance ----------------------------------------------

    def _phi_of(self, i: int) -> float:
        diff = self.truth.centers[i] - self.tracker.hyp.k[i]
        s = math.sqrt(float(diff @ diff))
        l = float(self.truth.feature_radii[i])
        h = float(self.tracker.hyp.h[i])
        return math.log(max(s, l, h) / math.sqrt(l * h))

    def phi_total(self) -> float:
        return float(self.phi.sum())

    def recompute_phi(self) -> np.ndarray:
        """From-scratch potential, for auditing the incremental array."""
        return potential(self.truth, self.tracker.hyp).per_object

    # -- logging --------------------------------------------------------------

    def _log_row(self) -> None:
        t = self.time
        d_val = d_err = math.nan
        if t % self.stride == 0:
            values, errs, _ = distance_estimate(
                self.truth,
                self.tracker.hyp,
                self.config.d_method,
                self.config.mc_samples,
                self.rng_metrics,
            )
            d_val = float(values.sum())
            d_err = float(np.sqrt((errs**2).sum()))
        self._rows.append(
            (
                t,
                self.evolver_steps,
                self.oracle.ledger.total,
                self.phi_total(),
                float(self.phi.max()),
                d_val,
                d_err,
                self.completions_total,
            )
        )
        phi_per = self._rows[-1][3] / self.config.n
        if phi_per <= self.burn_in_threshold:
            if self._sustained_since is None:
                self._sustained_since = t
            if self.burn_in_time is None and t - self._sustained_since >= self.config.n:
                self.burn_in_time = self._sustained_since
        else:
            self._sustained_since = None
        if self.config.hypothesis_stride > 0 and t % self.config.hypothesis_stride == 0:
            for row in self.tracker.hyp.snapshot_rows():
                self.hypothesis_snapshots.append((t, *row))

    # -- event handling -------------------------------------------------------

    def _handle_event(self, ev) -> None:
        kind = ev.kind
        if kind == "hypothesis_changed":
            self.phi[ev.index] = self._phi_of(ev.index)
            self.last_hyp_change[ev.index] = self.time
        elif kind in ("expansion_trigger", "cover_trigger"):
            contaminated = (
                ev.pair_span is not None
                and ev.pair_span[0] <= self._evolver_query_mark < ev.pair_span[1]
            )
            self.checks.containment(
                self.truth, ev.index, ev.center, ev.radius, self.tracker.expansion, contaminated
            )
        elif kind == "completion":
            self.completions_total += 1
            self.checks.completion(ev.index, float(self.phi[ev.index]), self.phi_bound)
        elif kind == "iteration":
            self.iteration_marks.append((ev.index, self.time, self.phi_total()))

    # -- main loop ------------------------------------------------------------

    def _view(self) -> AdversaryView:
        return AdversaryView(self.time, self.truth, self.tracker.hyp, self.last_hyp_change)

    def step_unit(self) -> None:
        step = self.strategy.propose(self._view(), self.rng_evolver)
        if step is not None:
            effect = apply_step(self.truth, step)
            self.evolver_steps += 1
            self._evolver_query_mark = self.oracle.ledger.total
            affected = [effect.index] + effect.changed_neighbors
            delta = 0.0
            for j in affected:
                new_phi = self._phi_of(j)
                delta += new_phi - float(self.phi[j])
                self.phi[j] = new_phi
            self.checks.evolver_step(
                delta, len(effect.changed_neighbors), self.k_bound, self.packing_bound
            )
        for _ in range(self.sigma):
            for ev in self.tracker.step(self.oracle, self.rng_oracle):
                self._handle_event(ev)
        self.time += 1
        self._log_row()
        if (
            isinstance(self.strategy, LowerBoundAdversary)
            and self.strategy.window_start is None
            and self.burn_in_time is not None
            and self.tracker.iterations >= 1
        ):
            # Arm only once every index has been processed at least once, so
            # the window-end distance is not inflated by still-untracked tails.
            self.strategy.arm(self.time)
        for obs in self.observers:
            obs(self, self.time)

    def run(self, max_time: int | None = None, stop=None) -> "RunResult":
        horizon = self.config.max_time if max_time is None else max_time
        while self.time < horizon:
            self.step_unit()
            if stop is not None and stop(self):
                break
        return RunResult(self)

    def build_log(self) -> MetricsLog:
        cols = list(zip(*self._rows))
        return MetricsLog(
            self.config.n,
            np.array(cols[0], dtype=np.int64),
            np.array(cols[1], dtype=np.int64),
            np.array(cols[2], dtype=np.int64),
            np.array(cols[3], dtype=float),
            np.array(cols[4], dtype=float),
            np.array(cols[5], dtype=float),
            np.array(cols[6], dtype=float),
            np.array(cols[7], dtype=np.int64),
        )


class RunResult:
    """Log + summary + live references for post-hoc inspection."""

    def __init__(self, sim: Simulation):
        self.sim = sim
        self.config = sim.config
        self.log = sim.build_log()
        self.checks = sim.checks
        self.summary = self._summarize()

    def _summarize(self) -> RunSummary:
        sim = self.sim
        log = self.log
        t0 = detect_burn_in(log, sim.burn_in_threshold)
        if t0 is not None:
            steady = log.t >= t0
            phi_per = log.phi_total[steady] / log.n
            d_rows = steady & ~np.isnan(log.d_estimate_nats)
            d_per = log.d_estimate_nats[d_rows] / log.n
        else:
            phi_per = np.array([math.nan])
            d_per = np.array([math.nan])
        if d_per.size == 0:
            d_per = np.array([math.nan])
        return RunSummary(
            n=sim.config.n,
            d=sim.config.d,
            aspect_ratio=sim.aspect0,
            burn_in_time=t0,
            steady_mean_phi_per_object=float(phi_per.mean()),
            steady_max_phi_per_object=float(phi_per.max()),
            steady_mean_distance_per_object=float(d_per.mean()),
            steady_max_distance_per_object=float(d_per.max()),
            total_time=sim.time,
            total_queries=sim.oracle.ledger.total,
            total_evolver_steps=sim.evolver_steps,
            total_completions=sim.completions_total,
            iterations=sim.tracker.iterations,
            violations=sim.checks.total_violations(),
            check_lines=sim.checks.summary_lines(),
        )


def run(config: ExperimentConfig, **sim_kwargs) -> RunResult:
    """Run a configured experiment to its horizon."""
    return Simulation(config, **sim_kwargs).run()


# ---------------------------------------------------------------------------
# Verification battery


@dataclass
class VerifyReport:
    lines: list[str] = field(default_factory=list)
    failures: int = 0

    def check(self, name: str, ok: bool, detail: str = "") -> None:
        self.lines.append(f"{'PASS' if ok else 'FAIL'} {name}{': ' + detail if detail else ''}")
        if not ok:
            self.failures += 1

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def to_text(self) -> str:
        status = "PASSED" if self.passed else f"FAILED ({self.failures})"
        return "\n".join(self.lines + [f"verify: {status}"]) + "\n"


def verify(config: ExperimentConfig, expansion_numerator: float = 3.0) -> VerifyReport:
    """Run the full invariant battery on one configured run."""
    report = VerifyReport()
    sim = Simulation(
        config,
        checks_enabled=True,
        raise_on_violation=False,
        expansion_numerator=expansion_numerator,
    )

    coherence_failures = [0]
    mc_exact_failures = [0]
    lemma1_failures = [0]
    exact_possible = config.d == 1 and config.family == "uniform-ball"

    def audit(s: Simulation, t: int) -> None:
        if t % max(1, s.stride) != 0:
            return
        if np.max(np.abs(s.truth.nn - s.truth.recompute_nn())) > 1e-9 * np.max(s.truth.nn):
            coherence_failures[0] += 1
        if np.max(np.abs(s.phi - s.recompute_phi())) > 1e-9:
            coherence_failures[0] += 1
        # Certified inequality: per-object distance below the closed-form bound,
        # and that bound below its potential form.
        from .metrics import kl_upper_bound, kl_upper_bound_from_potential

        breakdown = potential(s.truth, s.tracker.hyp)
        for i in range(s.config.n):
            bound = kl_upper_bound(
                float(breakdown.s[i]), float(breakdown.l[i]), float(breakdown.h[i]), s.config.d
            )
            loose = kl_upper_bound_from_potential(float(breakdown.per_object[i]), s.config.d)
            if bound > loose + 1e-9:
                lemma1_failures[0] += 1
        if exact_possible:
            exact = kl_exact_1d_many(
                s.truth.centers[:, 0], s.truth.feature_radii, s.tracker.hyp.k[:, 0], s.tracker.hyp.h
            )
            bounds = np.array(
                [
                    kl_upper_bound(
                        float(breakdown.s[i]), float(breakdown.l[i]), float(breakdown.h[i]), 1
                    )
                    for i in range(s.config.n)
                ]
            )
            if np.any(exact > bounds + 1e-9):
                lemma1_failures[0] += 1
            # Monte Carlo estimator agrees with the closed form.
            from .metrics import kl_monte_carlo

            i = int(t // max(1, s.stride)) % s.config.n
            est = kl_monte_carlo(s.truth, s.tracker.hyp, i, 4096, s.rng_metrics)
            if abs(est.value - float(exact[i])) > 4.0 * est.stderr:
                mc_exact_failures[0] += 1

    sim.observers.append(audit)
    result = sim.run()

    # Initial potential must match the closed form exactly.
    expected_phi0 = float(
        0.5 * np.sum(np.log(sim.truth.radius / sim.initial_feature_radii))
    )
    pot_zero_err = abs(result.log.phi_total[0] - expected_phi0)
    report.check("initial_potential_exact", pot_zero_err <= 1e-9, f"|err|={pot_zero_err:.3e}")
    report.check(
        "speedup_accounting",
        sim.oracle.ledger.total == sim.sigma * sim.time,
        f"queries={sim.oracle.ledger.total} sigma*t={sim.sigma * sim.time}",
    )
    report.check(
        "evolver_step_budget", sim.evolver_steps <= sim.time,
        f"steps={sim.evolver_steps} time={sim.time}",
    )
    checks = sim.checks
    report.check(
        "expansion_containment",
        checks.expansion_violations == 0,
        f"events={checks.expansion_events} violations={checks.expansion_violations} "
        f"min_margin={checks.expansion_min_margin:.6g}",
    )
    report.check(
        "completion_bound",
        checks.completion_violations == 0,
        f"events={checks.completion_events} max_phi={checks.completion_max_phi:.6g} "
        f"bound={sim.phi_bound:.6g}",
    )
    report.check(
        "evolver_potential_bound",
        checks.evolver_delta_violations == 0,
        f"steps={checks.evolver_steps_checked} max_delta={checks.evolver_max_delta:.6g} "
        f"bound={sim.k_bound:.6g}",
    )
    report.check(
        "packing_bound",
        checks.packing_violations == 0,
        f"max_changed={checks.packing_max_changed} bound={sim.packing_bound}",
    )
    report.check("nn_cache_coherence", coherence_failures[0] == 0,
                 f"failures={coherence_failures[0]}")
    report.check("distance_below_certified_bound", lemma1_failures[0] == 0,
                 f"failures={lemma1_failures[0]}")
    if exact_possible:
        report.check("kl_mc_vs_exact", mc_exact_failures[0] == 0,
                     f"failures={mc_exact_failures[0]}")
    return report


# ---------------------------------------------------------------------------
# Lower-bound experiment


@dataclass
class LowerBoundResult:
    c_lb: float
    window_start: int
    window_end: int
    pushed_indices: list[int]
    distance_per_object_at_end: np.ndarray
    pre_window_features: tuple[np.ndarray, np.ndarray]  # centers, radii at window start
    post_window_features: tuple[np.ndarray, np.ndarray]
    summary: RunSummary


def lower_bound_experiment(config: ExperimentConfig) -> LowerBoundResult:
    """Run the adversarial construction and measure the distance it forces.

    Needs the pairs layout in 1-D with uniform truth so the distance can be
    measured by the exact closed form.
    """
    if config.layout != "pairs" or config.evolver != "adversary":
        raise ConfigError("lower_bound_experiment needs layout=pairs, evolver=adversary")
    if config.d != 1 or config.family != "uniform-ball":
        raise ConfigError("lower_bound_experiment needs d=1 uniform-ball truth (exact KL)")
    sim = Simulation(config)
    state: dict = {}

    def capture(s: Simulation, t: int) -> None:
        adv: LowerBoundAdversary = s.strategy
        if adv.window_start is not None and "pre" not in state:
            state["pre"] = (s.truth.centers.copy(), s.truth.feature_radii.copy())
        if adv.window_end is not None and t == adv.window_end and "end" not in state:
            values = kl_exact_1d_many(
                s.truth.centers[:, 0], s.truth.feature_radii, s.tracker.hyp.k[:, 0],
                s.tracker.hyp.h,
            )
            state["end"] = values
            state["post"] = (s.truth.centers.copy(), s.truth.feature_radii.copy())

    sim.observers.append(capture)

    def stop(s: Simulation) -> bool:
        end = s.strategy.window_end
        return end is not None and s.time >= end + s.config.n

    result = sim.run(stop=stop)
    if "end" not in state:
        raise ModelViolationError(
            "adversary window never completed; raise max_time or check burn-in"
        )
    values = state["end"]
    return LowerBoundResult(
        c_lb=float(values.sum()) / config.n,
        window_start=sim.strategy.window_start,
        window_end=sim.strategy.window_end,
        pushed_indices=sim.strategy.pushed_indices,
        distance_per_object_at_end=values,
        pre_window_features=state["pre"],
        post_window_features=state["post"],
        summary=result.summary,
    )


# ---------------------------------------------------------------------------
# Sweeps


def sweep(config: ExperimentConfig, key: str, values: list) -> list[tuple[object, RunSummary]]:
    """Re-run the config with `key` set to each value; returns (value, summary) pairs."""
    out = []
    for v in values:
        cfg = config.replace(**{key: v})
        out.append((v, run(cfg).summary))
    return out

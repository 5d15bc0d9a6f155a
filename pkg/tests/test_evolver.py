import math

import numpy as np
import pytest

from zoomtrack.errors import ModelViolationError
from zoomtrack.evolver import (
    AdversaryView,
    DormantStrategy,
    EvolverStep,
    LowerBoundAdversary,
    RandomStrategy,
    ScriptedStrategy,
    apply_step,
    evolver_potential_bound,
    load_script,
    push_count,
)
from zoomtrack.geometry import all_nearest_neighbor_distances
from zoomtrack.metrics import potential
from zoomtrack.tracker import init_hypothesis
from zoomtrack.truth import TruthState, make_family


def make_state(centers, alpha=0.1, beta=0.1, radius=None, d=None):
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    if centers.shape[0] == 1:
        centers = centers.T
    if radius is None:
        radius = 2.0 * float(np.linalg.norm(centers, axis=1).max()) + 10.0
    return TruthState(centers, alpha, beta, make_family("uniform-ball", centers.shape[1]), radius)


def make_view(truth, t=0):
    hyp = init_hypothesis(truth.n, truth.bounding_ball)
    return AdversaryView(t, truth, hyp, np.zeros(truth.n, dtype=np.int64))


def test_apply_step_budget():
    state = make_state([0.0, 10.0], alpha=0.1)
    apply_step(state, EvolverStep(0, np.array([0.9])))  # budget is alpha * 10 = 1
    assert state.centers[0, 0] == pytest.approx(0.9)
    assert state.nn[0] == pytest.approx(9.1)
    with pytest.raises(ModelViolationError):
        apply_step(state, EvolverStep(0, np.array([1.1])))


def test_apply_step_bounding_ball():
    state = make_state([0.0, 10.0], alpha=0.1, radius=10.5)
    with pytest.raises(ModelViolationError):
        apply_step(state, EvolverStep(1, np.array([1.0])))


def test_apply_step_cache_coherence_random():
    rng = np.random.default_rng(12)
    centers = rng.uniform(-4, 4, size=(12, 2))
    state = make_state(centers, alpha=0.2, radius=30.0)
    strategy = RandomStrategy()
    view = make_view(state)
    for _ in range(1_000):
        step = strategy.propose(view, rng)
        pre_nn = float(state.nn[step.index])
        assert np.linalg.norm(step.displacement) <= state.alpha * pre_nn * (1 + 1e-9)
        apply_step(state, step)
        assert np.linalg.norm(state.centers[step.index]) <= state.radius * (1 + 1e-9)
    np.testing.assert_allclose(state.nn, all_nearest_neighbor_distances(state.centers), rtol=1e-12)


def test_random_strategy_respects_boundary_clamp():
    rng = np.random.default_rng(3)
    # points close to the boundary of a tight ball
    state = make_state([9.0, -9.0], alpha=0.3, radius=10.0)
    view = make_view(state)
    strategy = RandomStrategy()
    for _ in range(2_000):
        step = strategy.propose(view, rng)
        new = state.centers[step.index] + step.displacement
        assert np.linalg.norm(new) <= state.radius * (1 + 1e-12)


def test_dormant_never_moves():
    state = make_state([0.0, 10.0])
    strategy = DormantStrategy()
    view = make_view(state)
    rng = np.random.default_rng(0)
    assert all(strategy.propose(view, rng) is None for _ in range(100))


def test_scripted_replay(tmp_path):
    path = tmp_path / "steps.csv"
    path.write_text("# t,i,dx\n3,0,0.5\n7,1,-0.25\n")
    strategy = load_script(path)
    state = make_state([0.0, 10.0])
    rng = np.random.default_rng(0)
    assert strategy.propose(make_view(state, t=0), rng) is None
    step = strategy.propose(make_view(state, t=3), rng)
    assert step.index == 0 and step.displacement[0] == pytest.approx(0.5)
    step = strategy.propose(make_view(state, t=7), rng)
    assert step.index == 1 and step.displacement[0] == pytest.approx(-0.25)


def test_potential_bound_value():
    # ln((1 + 0.1/0.2)/sqrt(0.9)) + 2*3 * 2*ln(0.9/0.8)
    expected = math.log(1.5 / math.sqrt(0.9)) + 12.0 * math.log(0.9 / 0.8)
    assert expected == pytest.approx(1.871541793813679, abs=1e-12)
    assert evolver_potential_bound(0.1, 0.2, 1) == pytest.approx(expected, rel=1e-12)
    # vanishing motion budget leaves the potential untouched
    assert evolver_potential_bound(1e-9, 0.2, 1) < 1e-7
    with pytest.raises(ValueError):
        evolver_potential_bound(0.4, 0.2, 1)
    with pytest.raises(ValueError):
        evolver_potential_bound(0.1, 0.5, 1)


@pytest.mark.parametrize("d", [1, 2])
def test_empirical_step_delta_below_bound(d):
    rng = np.random.default_rng(21)
    centers = rng.uniform(-6, 6, size=(24, d))
    state = TruthState(centers, 0.15, 0.2, make_family("uniform-ball", d), 40.0)
    hyp = init_hypothesis(state.n, state.bounding_ball)
    # random but plausible hypothesis parameters
    hyp.k = state.centers + rng.normal(scale=0.3, size=state.centers.shape)
    hyp.h = np.exp(rng.uniform(-2, 2, size=state.n))
    bound = evolver_potential_bound(state.alpha, state.beta, d)
    strategy = RandomStrategy()
    view = AdversaryView(0, state, hyp, np.zeros(state.n, dtype=np.int64))
    packing = 2 * 3**d
    for _ in range(10_000):
        before = potential(state, hyp)
        step = strategy.propose(view, rng)
        effect = apply_step(state, step)
        after = potential(state, hyp)
        assert after.total - before.total <= bound + 1e-9
        assert len(effect.changed_neighbors) <= packing
        # only the moved object and its changed neighbors may shift
        touched = {effect.index, *effect.changed_neighbors}
        same = [j for j in range(state.n) if j not in touched]
        np.testing.assert_array_equal(before.per_object[same], after.per_object[same])


def test_push_count():
    assert push_count(0.1) == 8  # ceil(ln 2 / ln 1.1)
    assert push_count(0.3) == 3
    assert (1.1) ** push_count(0.1) >= 2.0


def pair_state(m=4, alpha=0.1, beta=0.1):
    base = 100.0 * (np.arange(m) + 1)
    centers = np.empty((2 * m, 1))
    centers[0::2, 0] = base
    centers[1::2, 0] = base + 1.0
    return TruthState(centers, alpha, beta, make_family("uniform-ball", 1), 100.0 * m + 10.0)


def test_adversary_pushes_double_the_separation():
    state = pair_state(m=4)
    n = state.n
    adversary = LowerBoundAdversary(n, state.alpha, window_m=4, t0=0)
    assert adversary.kappa == 8
    assert adversary.window_len == 2  # n // M
    rng = np.random.default_rng(0)
    last_change = np.full(n, -1, dtype=np.int64)
    hyp = init_hypothesis(n, state.bounding_ball)
    target = None
    pre_feature = None
    # feed it enough in-window time steps to finish one object
    for t in range(adversary.window_len):
        view = AdversaryView(t, state, hyp, last_change)
        for _ in range(adversary.kappa):
            step = adversary.propose(view, rng)
            if step is None:
                break
            if target is None:
                target = step.index
                ball = state.local_feature(target)
                pre_feature = (float(ball.center[0]), float(ball.radius))
            assert step.index == target
            budget = state.alpha * float(state.nn[step.index])
            assert np.linalg.norm(step.displacement) == pytest.approx(budget, rel=1e-12)
            apply_step(state, step)
    assert target is not None and target % 2 == 0
    partner = target + 1
    separation = abs(float(state.centers[target, 0] - state.centers[partner, 0]))
    assert separation >= 2.0
    # the new local feature is disjoint from the pre-push one
    ball = state.local_feature(target)
    lo_new, hi_new = float(ball.center[0]) - ball.radius, float(ball.center[0]) + ball.radius
    lo_old, hi_old = pre_feature[0] - pre_feature[1], pre_feature[0] + pre_feature[1]
    assert hi_new < lo_old or hi_old < lo_new


def test_adversary_dormant_outside_window():
    state = pair_state(m=4)
    adversary = LowerBoundAdversary(state.n, state.alpha, window_m=4, t0=100)
    rng = np.random.default_rng(0)
    view = AdversaryView(5, state, init_hypothesis(state.n, state.bounding_ball),
                         np.full(state.n, -1, dtype=np.int64))
    assert adversary.propose(view, rng) is None


def test_adversary_skips_indices_touched_by_tracker():
    state = pair_state(m=4)
    n = state.n
    adversary = LowerBoundAdversary(n, state.alpha, window_m=4, t0=10)
    rng = np.random.default_rng(0)
    last_change = np.full(n, -1, dtype=np.int64)
    last_change[0::2] = [9, 5, 11, 3]  # leader 4 (t=11) was altered inside the window
    view = AdversaryView(10, state, init_hypothesis(n, state.bounding_ball), last_change)
    step = adversary.propose(view, rng)
    # most recently completed *before* the window is leader 0 (t=9)
    assert step.index == 0

import numpy as np
import pytest

from zoomtrack.oracle import Oracle, QueryLedger
from zoomtrack.truth import TruthState, make_family


def two_point_state(beta=0.1):
    return TruthState(np.array([[0.0], [10.0]]), 0.1, beta, make_family("uniform-ball", 1), 30.0)


def test_feature_inside_query_and_neighbor_disjoint():
    # object 0's support [-1, 1] sits inside the query interval [-2, 2];
    # object 1's support [9, 11] is disjoint, so the answer is (Y,-) always.
    oracle = Oracle(two_point_state())
    rng = np.random.default_rng(0)
    for _ in range(50):
        resp = oracle.query(0, np.array([0.0]), 2.0, rng)
        assert resp.self_in and not resp.other_in


def test_ball_covering_everything_gives_yes_plus():
    oracle = Oracle(two_point_state())
    rng = np.random.default_rng(1)
    for _ in range(50):
        resp = oracle.query(0, np.array([5.0]), 20.0, rng)
        assert resp.self_in and resp.other_in


def test_self_bit_frequency_half_overlap():
    # uniform on [-1, 1] queried with [-0.5, 0.5]: hit probability one half
    oracle = Oracle(two_point_state())
    rng = np.random.default_rng(2)
    hits = sum(oracle.query(0, np.array([0.0]), 0.5, rng).self_in for _ in range(10_000))
    assert abs(hits / 10_000 - 0.5) < 0.02


def _overlap_fraction(q, l, c, r):
    lo = max(q - l, c - r)
    hi = min(q + l, c + r)
    return max(0.0, hi - lo) / (2 * l)


def test_frequency_calibration_random_geometries():
    state = two_point_state()
    oracle = Oracle(state)
    rng = np.random.default_rng(3)
    geom = np.random.default_rng(4)
    trials = 10_000
    for _ in range(20):
        c = float(geom.uniform(-2.5, 2.5))
        r = float(geom.uniform(0.1, 2.0))
        p = _overlap_fraction(0.0, 1.0, c, r)
        hits = sum(oracle.query(0, np.array([c]), r, rng).self_in for _ in range(trials))
        se = max(np.sqrt(p * (1 - p) / trials), 1.0 / trials)
        assert abs(hits / trials - p) <= 3 * se + 1e-9


def test_disjoint_features_never_flip_other_bit():
    oracle = Oracle(two_point_state())
    rng = np.random.default_rng(5)
    # query around object 0 only: object 1 can never land in it
    for _ in range(2_000):
        assert not oracle.query(0, np.array([0.0]), 3.0, rng).other_in


def test_ledger_counts_queries():
    ledger = QueryLedger()
    oracle = Oracle(two_point_state(), ledger)
    rng = np.random.default_rng(6)
    for k in range(5):
        oracle.query(0, np.array([0.0]), 1.0, rng, phase="zoom_out")
        assert ledger.total == k + 1
    oracle.query(1, np.array([10.0]), 1.0, rng, phase="cover_scan")
    assert ledger.total == 6
    assert ledger.by_phase == {"zoom_out": 5, "cover_scan": 1}


def test_query_validation():
    oracle = Oracle(two_point_state())
    rng = np.random.default_rng(7)
    with pytest.raises(ValueError):
        oracle.query(0, np.array([0.0]), 0.0, rng)
    with pytest.raises(IndexError):
        oracle.query(9, np.array([0.0]), 1.0, rng)


def test_query_2d_matches_1d_semantics():
    centers = np.array([[0.0, 0.0], [10.0, 0.0]])
    state = TruthState(centers, 0.1, 0.1, make_family("uniform-ball", 2), 30.0)
    oracle = Oracle(state)
    rng = np.random.default_rng(8)
    for _ in range(50):
        resp = oracle.query(0, np.array([0.0, 0.0]), 2.0, rng)
        assert resp.self_in and not resp.other_in

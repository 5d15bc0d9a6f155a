import math

import numpy as np
import pytest
from scipy import integrate

from zoomtrack.errors import ModelViolationError
from zoomtrack.geometry import all_nearest_neighbor_distances, unit_ball_volume
from zoomtrack.truth import TruthState, make_family

FAMILIES = ["uniform-ball", "truncated-normal", "truncated-cauchy"]


def simple_state(centers, alpha=0.1, beta=0.1, kind="uniform-ball", radius=None, d=None):
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    if centers.shape[0] == 1:
        centers = centers.T
    if radius is None:
        radius = 2.0 * float(np.linalg.norm(centers, axis=1).max()) + 1.0
    family = make_family(kind, centers.shape[1])
    return TruthState(centers, alpha, beta, family, radius)


@pytest.mark.parametrize("kind", FAMILIES)
def test_family_normalization_1d(kind):
    fam = make_family(kind, 1)
    total, err = integrate.quad(lambda x: float(fam.density_unit(np.array([[x]]))[0]), -1, 1)
    assert 0.999 <= total <= 1.001
    assert err < 1e-6


@pytest.mark.parametrize("kind", FAMILIES)
def test_family_normalization_2d(kind):
    fam = make_family(kind, 2)
    # polar quadrature over the unit disk
    nodes, weights = np.polynomial.legendre.leggauss(80)
    r = 0.5 * (nodes + 1)
    wr = 0.5 * weights
    th = math.pi * (nodes + 1)
    wt = math.pi * weights
    rr, tt = np.meshgrid(r, th, indexing="ij")
    pts = np.stack([rr * np.cos(tt), rr * np.sin(tt)], axis=-1).reshape(-1, 2)
    vals = fam.density_unit(pts).reshape(len(r), len(th))
    total = float(np.einsum("i,j,ij->", wr, wt, vals * rr))
    assert 0.999 <= total <= 1.001


def test_truncated_normal_normalizer_matches_quadrature():
    fam = make_family("truncated-normal", 2, 0.5)
    # radial quadrature of the isotropic base over the unit disk
    mass, err = integrate.quad(
        lambda r: r * math.exp(-r * r / (2 * 0.25)) / 0.25, 0.0, 1.0
    )
    assert err < 1e-10
    assert fam.normalizer == pytest.approx(mass, rel=1e-9)


@pytest.mark.parametrize("kind", FAMILIES)
@pytest.mark.parametrize("d", [1, 2, 3])
def test_density_bounded_by_nu(kind, d):
    fam = make_family(kind, d)
    rng = np.random.default_rng(9)
    probes = rng.uniform(-1.2, 1.2, size=(10_000, d))
    assert np.all(fam.density_unit(probes) <= fam.nu * (1 + 1e-12))


@pytest.mark.parametrize("kind", FAMILIES)
def test_samples_stay_in_support(kind):
    fam = make_family(kind, 2)
    rng = np.random.default_rng(1)
    s = fam.sample_unit(rng, 20_000)
    assert np.all(np.einsum("ij,ij->i", s, s) <= 1.0 + 1e-12)


def test_uniform_density_values():
    state = simple_state([0.0, 10.0], beta=0.1)  # l_0 = 1
    assert state.density(0, [0.0]) == pytest.approx(0.5)
    assert state.density(0, [0.5]) == pytest.approx(0.5)
    assert state.density(0, [1.5]) == 0.0
    # 2-D with l = 2: density 1/(pi * 4) inside
    centers = np.array([[0.0, 0.0], [20.0, 0.0]])
    st2 = TruthState(centers, 0.1, 0.1, make_family("uniform-ball", 2), 50.0)
    assert st2.feature_radii[0] == pytest.approx(2.0)
    assert st2.density(0, [0.3, -0.4]) == pytest.approx(1.0 / (math.pi * 4.0))
    assert st2.density(0, [5.0, 5.0]) == 0.0


def test_uniform_sampling_statistics():
    state = simple_state([0.0, 10.0], beta=0.1)  # object 0 uniform on [-1, 1]
    rng = np.random.default_rng(33)
    xs = np.array([state.sample_object(0, rng)[0] for _ in range(100_000)])
    assert np.all(np.abs(xs) <= 1.0)
    # mean within 3 sigma of 0; sd of the mean is 1/sqrt(3 * 100000)
    assert abs(xs.mean()) < 3.0 / math.sqrt(3 * 100_000)
    assert abs((np.abs(xs) <= 0.5).mean() - 0.5) < 0.005


def test_samples_always_in_local_feature():
    rng = np.random.default_rng(8)
    centers = rng.uniform(-5, 5, size=(6, 2))
    for kind in FAMILIES:
        state = TruthState(centers, 0.1, 0.2, make_family(kind, 2), 20.0)
        for i in range(6):
            ball = state.local_feature(i)
            pts = np.array([state.sample_object(i, rng) for _ in range(2_000)])
            dist = np.linalg.norm(pts - ball.center, axis=1)
            assert np.all(dist <= ball.radius * (1 + 1e-12))


def test_truncated_normal_2d_cell_ratio():
    # empirical mass ratio of two probe cells matches the density ratio
    centers = np.array([[0.0, 0.0], [20.0, 0.0]])
    state = TruthState(centers, 0.1, 0.1, make_family("truncated-normal", 2), 50.0)
    rng = np.random.default_rng(17)
    pts = np.array([state.sample_object(0, rng) for _ in range(200_000)])
    cell = 0.3
    c1 = np.array([0.0, 0.0])
    c2 = np.array([0.9, 0.0])
    in1 = np.all(np.abs(pts - c1) <= cell / 2, axis=1).mean()
    in2 = np.all(np.abs(pts - c2) <= cell / 2, axis=1).mean()
    expected = state.density(0, c1) / state.density(0, c2)
    assert in1 / in2 == pytest.approx(expected, rel=0.05)


def test_local_feature_examples():
    state = simple_state([0.0, 10.0], beta=0.1)
    ball = state.local_feature(0)
    assert float(ball.center[0]) == 0.0 and ball.radius == pytest.approx(1.0)
    state2 = simple_state([0.0, 1.0, 5.0], beta=0.2)
    ball2 = state2.local_feature(2)
    assert ball2.radius == pytest.approx(0.8)


def test_local_feature_after_move_matches_recompute():
    rng = np.random.default_rng(4)
    centers = rng.uniform(-3, 3, size=(10, 2))
    state = TruthState(centers, 0.2, 0.2, make_family("uniform-ball", 2), 30.0)
    for _ in range(50):
        i = int(rng.integers(10))
        delta = rng.normal(size=2)
        delta *= 0.9 * state.alpha * state.nn[i] / np.linalg.norm(delta)
        state.move_center(i, state.centers[i] + delta)
        np.testing.assert_allclose(
            state.nn, all_nearest_neighbor_distances(state.centers), rtol=1e-12
        )


def test_aspect_ratio():
    state = simple_state([0.0, 1.0, 5.0], radius=100.0)
    assert state.aspect_ratio() == pytest.approx(100.0)
    # scaling centers and radius together leaves it unchanged
    scaled = simple_state([0.0, 3.0, 15.0], radius=300.0)
    assert scaled.aspect_ratio() == pytest.approx(state.aspect_ratio())
    # paired layout: R0 = 100 m + 10 over min N = 1
    m = 8
    pts = np.array(sorted([100.0 * (i + 1) for i in range(m)] + [100.0 * (i + 1) + 1 for i in range(m)]))
    paired = simple_state(pts, radius=100.0 * m + 10.0)
    assert paired.aspect_ratio() == pytest.approx(100.0 * m + 10.0)


def test_constructor_rejects_bad_states():
    fam = make_family("uniform-ball", 1)
    with pytest.raises(ModelViolationError):
        TruthState(np.array([[0.0], [0.0]]), 0.1, 0.1, fam, 10.0)
    with pytest.raises(ModelViolationError):
        TruthState(np.array([[0.0], [50.0]]), 0.1, 0.1, fam, 10.0)
    with pytest.raises(ValueError):
        TruthState(np.array([[0.0]]), 0.1, 0.1, fam, 10.0)
    with pytest.raises(ValueError):
        TruthState(np.array([[0.0], [1.0]]), 1.5, 0.1, fam, 10.0)

import numpy as np
import pytest

import dense_oracle as do
import gaussian_sim as gs
import stabilizer_sim as ss
from ghz_checker import random_accessible_state
from majorana_errors import ArgumentError, StateError


def test_from_state_init():
    assert np.array_equal(gs.from_state(ss.init(1)).gamma, [[0, 1], [-1, 0]])
    block = np.array([[0, 1], [-1, 0]])
    expected = np.block([[block, np.zeros((2, 2))], [np.zeros((2, 2)), block]])
    assert np.array_equal(gs.from_state(ss.init(2)).gamma, expected)


def test_pure_states_square_to_minus_one(rng):
    for n_pairs in (1, 2, 3, 4):
        cov = gs.from_state(random_accessible_state(n_pairs, rng))
        assert gs.is_pure(cov)
        assert gs.is_physical(cov)


def test_constructor_checks_antisymmetry():
    with pytest.raises(ArgumentError):
        gs.CovarianceMatrix([[0, 1], [1, 0]])
    with pytest.raises(ArgumentError):
        gs.CovarianceMatrix(np.zeros((3, 3)))


def test_identity_rotation():
    cov = gs.from_state(ss.init(2))
    assert gs.apply_rotation(cov, np.eye(4)) == cov


def test_rotation_must_be_orthogonal():
    with pytest.raises(ArgumentError):
        gs.apply_rotation(gs.from_state(ss.init(1)), 2 * np.eye(2))


def test_braid_matches_stabilizer():
    assert gs.braid(gs.from_state(ss.init(1)), 1, 2) == gs.from_state(ss.init(1))
    assert gs.braid(gs.from_state(ss.init(2)), 2, 3) == gs.from_state(ss.braid(ss.init(2), 2, 3))


def test_random_braid_word_matches_stabilizer(rng):
    state = ss.init(4)
    cov = gs.from_state(state)
    for _ in range(20):
        j, k = (int(x) + 1 for x in rng.choice(8, size=2, replace=False))
        state = ss.braid(state, j, k)
        cov = gs.braid(cov, j, k)
    assert cov == gs.from_state(state)


def test_born_probability():
    assert gs.born_probability(gs.from_state(ss.init(1)), 1, 2) == 1.0
    assert gs.born_probability(gs.from_state(ss.init(2)), 2, 3) == 0.5
    noisy = gs.depolarize(gs.from_state(ss.init(1)), 0.3)
    assert gs.born_probability(noisy, 1, 2) == pytest.approx(0.85)


def test_born_probability_rejects_unphysical():
    doubled = gs.CovarianceMatrix(2 * gs.from_state(ss.init(1)).gamma)
    with pytest.raises(StateError):
        gs.born_probability(doubled, 1, 2)


def test_measuring_a_stabilizer_leaves_the_state():
    cov = gs.from_state(ss.init(2))
    assert gs.conditional_update(cov, 1, 2, 1).allclose(cov)


def test_conditional_update_matches_stabilizer():
    state = ss.init(2)
    _, post = ss.measure_pair(state, 2, 3, outcome=1)
    updated = gs.conditional_update(gs.from_state(state), 2, 3, 1)
    assert updated.allclose(gs.from_state(post))


def test_conditional_update_matches_oracle(rng):
    state = random_accessible_state(3, rng)
    psi = do.state_from_accessible(state)
    cov = gs.from_state(state)
    for j, k in ((1, 4), (2, 6), (3, 5)):
        for (p, m, post), (q, n, dense) in zip(gs.measure_branches(cov, j, k),
                                              do.measurement_branches(psi, j, k)):
            assert m == n
            assert p == pytest.approx(q)
            assert np.allclose(post.gamma, do.covariance_of(dense), atol=1e-9)


def test_zero_probability_conditioning():
    with pytest.raises(ArgumentError):
        gs.conditional_update(gs.from_state(ss.init(1)), 1, 2, -1)


def test_depolarize():
    cov = gs.from_state(ss.init(2))
    assert gs.depolarize(cov, 0.0) == cov
    assert np.array_equal(gs.depolarize(cov, 1.0).gamma, np.zeros((4, 4)))
    contracted = gs.depolarize(cov, 0.4).gamma
    assert np.allclose(-contracted @ contracted, 0.36 * np.eye(4))
    with pytest.raises(ArgumentError):
        gs.depolarize(cov, 1.5)


def test_depolarize_commutes_with_rotation():
    cov = gs.from_state(ss.braid(ss.init(3), 1, 4))
    rotation = gs.braid_rotation(6, 2, 5)
    left = gs.apply_rotation(gs.depolarize(cov, 0.25), rotation)
    right = gs.depolarize(gs.apply_rotation(cov, rotation), 0.25)
    assert left.allclose(right)


def test_is_physical():
    pure = gs.from_state(ss.init(2)).gamma
    assert gs.is_physical(pure)
    assert not gs.is_physical(2 * pure)
    assert gs.is_physical(np.zeros((4, 4)))
    with pytest.raises(ArgumentError):
        gs.is_physical(np.ones((2, 2)))


def test_transcripts_match_stabilizer():
    program = [ss.Instruction(ss.BRAID, 2, 3), ss.Instruction(ss.MEASURE, 1, 4),
               ss.Instruction(ss.MEASURE, 2, 3), ss.Instruction(ss.MEASURE, 1, 2)]
    exact = ss.transcript_distribution(ss.init(2), program)
    floats = gs.transcript_distribution(gs.from_state(ss.init(2)), program)
    assert set(floats) == set(exact)
    for transcript, p in exact.items():
        assert floats[transcript] == pytest.approx(float(p))


def test_json_and_csv(tmp_path):
    cov = gs.depolarize(gs.from_state(ss.braid(ss.init(2), 1, 3)), 0.1)
    assert gs.CovarianceMatrix.from_json(cov.to_json()) == cov
    path = tmp_path / "gamma.csv"
    cov.save_csv(str(path))
    assert gs.CovarianceMatrix.load_csv(str(path)) == cov


def test_reduced_block():
    cov = gs.from_state(ss.shared_pairs(2))
    assert np.array_equal(gs.reduced(cov, [1, 3]), [[0, 1], [-1, 0]])

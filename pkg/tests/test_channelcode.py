import itertools
import math

import numpy as np
import pytest

from collisionlab.asympt import phi_inv
from collisionlab.channelcode import (
    CQChannel,
    Codebook,
    CodingExperiment,
    capacity_and_dispersion,
    corollary1_M,
    expected_success_exact,
    expected_success_mc,
    holevo_information,
    pgm,
    run_experiment,
    second_order_achievable_rate,
    success_probability,
    success_via_collision,
    theorem4_bound,
)
from collisionlab.errors import SizeCapError, ValidationError
from collisionlab.states import random_density
from conftest import rand_state

KET0 = np.diag([1.0, 0.0])
KET1 = np.diag([0.0, 1.0])
HALF = np.eye(2) / 2
ORTH = CQChannel((KET0, KET1))
UNIFORM = np.array([0.5, 0.5])


def bsc(p):
    return CQChannel((np.diag([1 - p, p]), np.diag([p, 1 - p])))


def h2(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def random_channel(rng, k, d):
    return CQChannel(tuple(random_density(d, rng, int(rng.integers(1, d + 1))) for _ in range(k)))


def test_pgm_examples(rng):
    povm = pgm([KET0, KET1])
    assert np.allclose(povm.elements[0], KET0) and np.allclose(povm.elements[1], KET1)
    rho = rand_state(3, rng)
    rho = rho if np.linalg.matrix_rank(rho) < 3 else rho
    povm = pgm([rho, rho])
    from collisionlab.matcore import support_projector
    for e in povm.elements:
        assert np.allclose(e, support_projector(rho) / 2, atol=1e-9)
    with pytest.raises(ValidationError):
        pgm([np.zeros((2, 2))])


def test_success_examples():
    assert success_probability(ORTH, [0, 1]) == pytest.approx(1.0)
    assert success_probability(ORTH, [1, 1]) == pytest.approx(0.5)


def test_success_identity_oracle(rng):
    for _ in range(20):
        ch = random_channel(rng, 3, 2)
        cb = Codebook(tuple(int(x) for x in rng.integers(0, 3, size=3)))
        assert abs(success_probability(ch, cb) - success_via_collision(ch, cb)) <= 1e-9


def _brute_force(channel, probs, M):
    total = 0.0
    for words in itertools.product(range(channel.alphabet_size), repeat=M):
        total += np.prod([probs[w] for w in words]) * success_probability(channel, list(words))
    return total


def test_expected_success_examples(rng):
    assert expected_success_exact(CodingExperiment(ORTH, UNIFORM, 2)) == pytest.approx(0.75, abs=1e-12)
    same = CQChannel((HALF, HALF, HALF))
    assert expected_success_exact(CodingExperiment(same, np.ones(3) / 3, 3)) == pytest.approx(1 / 3)
    for _ in range(5):
        ch = random_channel(rng, 3, 2)
        p = rng.dirichlet(np.ones(3))
        exp = CodingExperiment(ch, p, 3)
        assert expected_success_exact(exp) == pytest.approx(_brute_force(ch, p, 3), abs=1e-12)
        assert expected_success_exact(CodingExperiment(ch, p, 1)) == pytest.approx(1.0, abs=1e-9)


def test_exact_cap():
    with pytest.raises(SizeCapError):
        CodingExperiment(CQChannel((HALF,) * 4), np.ones(4) / 4, 11)


def test_mc_examples():
    same = CQChannel((HALF, HALF))
    mean, err = expected_success_mc(CodingExperiment(same, UNIFORM, 4, "mc", 200, 3))
    assert mean == pytest.approx(0.25) and err == pytest.approx(0.0, abs=1e-15)
    exp = CodingExperiment(ORTH, UNIFORM, 3, "mc", 400, 7)
    a = expected_success_mc(exp, threads=1)
    b = expected_success_mc(exp, threads=4)
    assert a == b
    exact = expected_success_exact(CodingExperiment(ORTH, UNIFORM, 3))
    assert abs(a[0] - exact) <= 4 * a[1]


def test_coding_bound_examples(rng):
    assert theorem4_bound(ORTH, UNIFORM, 2) == pytest.approx(2 / 3, abs=1e-12)
    ch = random_channel(rng, 2, 3)
    assert theorem4_bound(ch, UNIFORM, 1) == pytest.approx(1.0, abs=1e-9)
    for _ in range(20):
        ch = random_channel(rng, 2, 2)
        p = rng.dirichlet(np.ones(2))
        for M in (2, 3):
            exact = expected_success_exact(CodingExperiment(ch, p, M))
            assert exact >= theorem4_bound(ch, p, M) - 1e-8


def test_message_count(rng):
    # D_s^delta of the orthogonal channel: rho_XB <= 2^R rho_X (x) rho_B holds iff R >= 1
    assert corollary1_M(ORTH, UNIFORM, 0.2, 0.1) == math.floor(0.1 / 0.8 * 2 + 1)
    with pytest.raises(ValidationError):
        corollary1_M(ORTH, UNIFORM, 0.1, 0.2)
    ch = CQChannel((KET0, np.full((2, 2), 0.5)))
    for eps, delta in ((0.3, 0.1), (0.45, 0.2)):
        M = corollary1_M(ch, UNIFORM, eps, delta)
        assert 1 - expected_success_exact(CodingExperiment(ch, UNIFORM, M)) <= eps + 1e-12


def test_message_count_arithmetic():
    assert math.floor((0.05 / 0.9) * 2**10 + 1) == 57


def test_holevo_examples():
    assert holevo_information(ORTH, UNIFORM) == pytest.approx(1.0)
    assert holevo_information(CQChannel((HALF, HALF)), UNIFORM) == pytest.approx(0.0, abs=1e-12)
    assert holevo_information(bsc(0.11), UNIFORM) == pytest.approx(1 - h2(0.11), abs=1e-12)
    assert 1 - h2(0.11) == pytest.approx(0.5, abs=1e-3)


def test_capacity_examples():
    res = capacity_and_dispersion(ORTH)
    assert res.capacity == pytest.approx(1.0, abs=1e-9)
    assert res.dispersion == pytest.approx(0.0, abs=1e-9)
    assert any(np.allclose(m, UNIFORM) for m in res.maximizers)
    res = capacity_and_dispersion(CQChannel((HALF, HALF)))
    assert res.capacity == pytest.approx(0.0, abs=1e-12) and res.dispersion == pytest.approx(0.0, abs=1e-12)
    p = 0.11
    res = capacity_and_dispersion(bsc(p))
    assert res.capacity == pytest.approx(1 - h2(p), abs=1e-9)
    assert res.dispersion == pytest.approx(p * (1 - p) * math.log2((1 - p) / p) ** 2, abs=1e-6)
    with pytest.raises(ValidationError):
        capacity_and_dispersion(CQChannel((HALF,) * 5))


def test_second_order_rate():
    p = 0.11
    v = p * (1 - p) * math.log2((1 - p) / p) ** 2
    expected = 1000 * (1 - h2(p)) + math.sqrt(1000 * v) * phi_inv(0.05)
    assert second_order_achievable_rate(bsc(p), 1000, 0.05) == pytest.approx(expected, abs=1e-3)
    assert second_order_achievable_rate(ORTH, 50, 0.1) == pytest.approx(50.0, abs=1e-6)
    with pytest.raises(ValidationError):
        second_order_achievable_rate(ORTH, 10, 0.5)


def test_run_experiment():
    res = run_experiment(CodingExperiment(ORTH, UNIFORM, 2), epsilon=0.2, delta=0.1)
    assert res.bound == pytest.approx(2 / 3) and res.value == pytest.approx(0.75)
    assert res.extras["corollary1_M"] >= 1

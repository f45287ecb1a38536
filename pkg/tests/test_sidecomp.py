import itertools
import math

import numpy as np
import pytest

from collisionlab import matcore
from collisionlab.divergence import collision_divergence_blocks
from collisionlab.errors import SizeCapError, ValidationError
from collisionlab.sidecomp import (
    HashAssignment,
    SWExperiment,
    bob_povm,
    conditional_spectrum,
    corollary2_M,
    run_experiment,
    sw_expected_success_exact,
    sw_expected_success_mc,
    sw_success_probability,
    theorem6_bound,
)
from collisionlab.states import CQState, random_cq_state
from conftest import rand_state

KET0 = np.diag([1.0, 0.0])
KET1 = np.diag([0.0, 1.0])
HALF = np.eye(2) / 2
ORTH = CQState(np.array([0.5, 0.5]), (KET0, KET1))
SAME = CQState(np.array([0.5, 0.5]), (HALF, HALF))


def test_bob_povm_examples(rng):
    rho = rand_state(3, rng)
    src = CQState(np.array([0.4, 0.6]), (rho, rand_state(3, rng)))
    povm = bob_povm(src, HashAssignment((0, 1), 2), 0)
    assert np.allclose(povm.elements[0], matcore.support_projector(rho), atol=1e-9)
    povm = bob_povm(ORTH, HashAssignment((0, 0), 1), 0)
    assert np.allclose(povm.elements[0], KET0) and np.allclose(povm.elements[1], KET1)
    assert bob_povm(ORTH, HashAssignment((0, 0), 2), 1).elements == ()


def test_bob_povm_completeness(rng):
    for _ in range(20):
        src = random_cq_state(3, 2, rng)
        h = HashAssignment(tuple(int(b) for b in rng.integers(0, 2, size=3)), 2)
        for m in set(h.bins):
            povm = bob_povm(src, h, m)
            s = sum(src.probs[x] * src.states[x] for x in povm.labels)
            assert np.max(np.abs(sum(povm.elements) - matcore.support_projector(s))) <= 1e-7


def test_success_examples(rng):
    assert sw_success_probability(ORTH, (0, 0), 1) == pytest.approx(1.0)
    assert sw_success_probability(SAME, (0, 0), 1) == pytest.approx(0.5)
    src = random_cq_state(3, 2, rng)
    assert sw_success_probability(src, (2, 0, 1), 3) == pytest.approx(1.0, abs=1e-9)


def _brute(src, M):
    k = src.alphabet_size
    return sum(sw_success_probability(src, h, M) for h in itertools.product(range(M), repeat=k)) / M**k


def test_expected_success(rng):
    assert sw_expected_success_exact(SWExperiment(ORTH, 2)) == pytest.approx(1.0)
    same3 = CQState(np.ones(3) / 3, (HALF,) * 3)
    assert sw_expected_success_exact(SWExperiment(same3, 1)) == pytest.approx(1 / 3)
    for _ in range(5):
        src = random_cq_state(3, 2, rng)
        assert sw_expected_success_exact(SWExperiment(src, 3)) == pytest.approx(_brute(src, 3), abs=1e-12)


def test_exact_cap():
    src = CQState(np.ones(4) / 4, (HALF,) * 4)
    with pytest.raises(SizeCapError):
        SWExperiment(src, 40)
    with pytest.raises(ValidationError):
        HashAssignment((0, 3), 2)


def test_mc(rng):
    src = random_cq_state(3, 2, rng)
    exp = SWExperiment(src, 2, "mc", 500, 11)
    a = sw_expected_success_mc(exp, 1)
    assert a == sw_expected_success_mc(exp, 3)
    assert abs(a[0] - sw_expected_success_exact(SWExperiment(src, 2))) <= 4 * a[1]


def test_compression_bound_examples(rng):
    assert theorem6_bound(SAME, 1).tight == pytest.approx(0.5, abs=1e-12)
    src = random_cq_state(2, 2, rng)
    assert theorem6_bound(src, 10**9).tight == pytest.approx(1.0, abs=1e-6)
    # block form against the explicit joint matrix
    M = 3
    rho_b = sum(src.blocks())
    pairs = [(p * s, (1 - 1 / M) * p * s + rho_b / M) for p, s in zip(src.probs, src.states)]
    assert theorem6_bound(src, M).tight == pytest.approx(2 ** collision_divergence_blocks(pairs))


def test_compression_bound_chain(rng):
    for _ in range(15):
        src = random_cq_state(int(rng.integers(2, 4)), 2, rng)
        for M in (1, 2, 3):
            b = theorem6_bound(src, M)
            exact = sw_expected_success_exact(SWExperiment(src, M))
            assert exact >= b.tight - 1e-8
            for eps in (0.1, 0.3, 0.5):
                assert b.tight >= b.relaxed(eps) - 1e-8


def test_compression_size(rng):
    assert math.ceil(2 ** (3 + 2)) == 32
    # deterministic source: D_s^delta = 0, so M = ceil(1 / (eps - delta))
    det = CQState(np.array([1.0, 0.0]), (KET0, KET1))
    assert conditional_spectrum(det, 0.05) == pytest.approx(0.0, abs=1e-12)
    assert corollary2_M(det, 0.1, 0.05) == 20
    with pytest.raises(ValidationError):
        corollary2_M(det, 0.05, 0.1)
    src = CQState(np.array([0.5, 0.5]), (KET0, np.full((2, 2), 0.5)))
    for eps, delta in ((0.3, 0.1), (0.5, 0.25)):
        M = corollary2_M(src, eps, delta)
        assert 1 - sw_expected_success_exact(SWExperiment(src, M)) <= eps + 1e-12


def test_run_experiment():
    res = run_experiment(SWExperiment(SAME, 1), epsilon=0.2, delta=0.1)
    assert res.value == pytest.approx(0.5) and res.bound == pytest.approx(0.5)
    assert res.extras["corollary2_M"] >= 1

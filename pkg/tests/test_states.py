import numpy as np
import pytest

from collisionlab import matcore
from collisionlab.channelcode import pgm
from collisionlab.errors import ValidationError
from collisionlab.states import (
    POVM,
    CQState,
    joint_state,
    marginals,
    random_cq_state,
    validate_density,
    validate_povm,
)


def test_validate_density():
    validate_density(np.eye(2) / 2)
    with pytest.raises(ValidationError):
        validate_density(np.eye(2))
    with pytest.raises(ValidationError):
        validate_density(np.diag([1.5, -0.5]))


def test_cq_state_validation():
    with pytest.raises(ValidationError):
        CQState(np.array([0.5, 0.6]), (np.eye(2) / 2, np.eye(2) / 2))
    with pytest.raises(ValidationError):
        CQState(np.array([0.5, 0.5]), (np.eye(2) / 2, np.eye(3) / 3))


def test_joint_state_examples():
    cq = CQState(np.array([0.5, 0.5]), (np.eye(2) / 2, np.eye(2) / 2))
    assert np.allclose(joint_state(cq), np.eye(4) / 4)
    r0 = np.diag([0.3, 0.7])
    cq = CQState(np.array([1.0, 0.0]), (r0, np.eye(2) / 2))
    expected = np.zeros((4, 4))
    expected[:2, :2] = r0
    assert np.allclose(joint_state(cq), expected)


def test_joint_state_marginal_oracle(rng):
    for _ in range(10):
        cq = random_cq_state(3, 2, rng)
        rho_b = matcore.partial_trace(joint_state(cq), [3, 2], [1])
        assert np.allclose(rho_b, sum(p * s for p, s in zip(cq.probs, cq.states)), atol=1e-10)
        rx, rb = marginals(cq)
        assert np.allclose(np.diag(rx), cq.probs)
        assert abs(np.trace(rb) - 1) <= 1e-10
        assert np.allclose(matcore.partial_trace(joint_state(cq), [3, 2], [0]), rx, atol=1e-12)


def test_marginals_examples():
    cq = CQState(np.array([0.5, 0.5]), (np.diag([1.0, 0]), np.diag([0, 1.0])))
    assert np.allclose(marginals(cq)[1], np.eye(2) / 2)
    r0 = np.diag([0.3, 0.7])
    cq = CQState(np.array([1.0, 0.0]), (r0, np.eye(2) / 2))
    assert np.allclose(marginals(cq)[1], r0)


def test_validate_povm():
    ok = POVM((np.diag([1.0, 0]), np.diag([0, 1.0])), np.eye(2))
    assert validate_povm(ok).passed
    bad = POVM((np.eye(2), np.eye(2)), np.eye(2))
    report = validate_povm(bad)
    assert not report.passed and not report.completeness_ok
    neg = POVM((np.diag([1.5, 0]), np.diag([-0.5, 1.0])), np.eye(2))
    assert not validate_povm(neg).psd_ok


def test_pgm_passes_validation(rng):
    for _ in range(20):
        cq = random_cq_state(3, 3, rng)
        assert validate_povm(pgm(list(cq.states))).passed

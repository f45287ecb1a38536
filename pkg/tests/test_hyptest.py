import math

import numpy as np
import pytest

from collisionlab import matcore
from collisionlab.divergence import collision_divergence
from collisionlab.errors import ValidationError
from collisionlab.hyptest import HypothesisInstance, build_ht_povm, error_probabilities, oneshot_ht_bound
from conftest import rand_state

KET0 = np.diag([1.0, 0.0])
KET1 = np.diag([0.0, 1.0])


def test_povm_orthogonal():
    f_rho, f_sigma = build_ht_povm(HypothesisInstance(KET0, KET1, 3.0)).elements
    assert np.allclose(f_rho, KET0) and np.allclose(f_sigma, KET1)
    assert error_probabilities(HypothesisInstance(KET0, KET1, 3.0)) == pytest.approx((0.0, 0.0))


def test_povm_equal_states(rng):
    rho = rand_state(3, rng)
    M = 0.7
    inst = HypothesisInstance(rho, rho, M)
    f_rho, f_sigma = build_ht_povm(inst).elements
    proj = matcore.support_projector(rho)
    assert np.allclose(f_rho, proj / (1 + M), atol=1e-9)
    assert np.allclose(f_sigma, M * proj / (1 + M), atol=1e-9)
    assert error_probabilities(inst) == pytest.approx((M / (1 + M), 1 / (1 + M)), abs=1e-9)


def test_povm_identities(rng):
    for _ in range(50):
        d = int(rng.integers(2, 5))
        rho, sigma = rand_state(d, rng), rand_state(d, rng)
        M = float(rng.uniform(0.1, 10))
        inst = HypothesisInstance(rho, sigma, M)
        povm = build_ht_povm(inst)
        f_rho, f_sigma = povm.elements
        assert np.max(np.abs(f_rho + f_sigma - matcore.support_projector(rho + M * sigma))) <= 1e-7
        t = matcore.power_on_support(rho / M + sigma, -0.5)
        assert np.allclose(f_sigma, t @ sigma @ t, atol=1e-8)
        t1, t2 = error_probabilities(inst, povm)
        assert abs((1 - t1) - 2 ** collision_divergence(rho, rho + M * sigma)) <= 1e-9
        assert 1 - t2 >= 1 / (1 + 1 / M) - 1e-8


def test_instance_validation():
    with pytest.raises(ValidationError):
        HypothesisInstance(KET0, KET1, 0.0)
    with pytest.raises(ValidationError):
        oneshot_ht_bound(KET0, KET1, 1.0)


def test_oneshot_orthogonal_certificate():
    res = oneshot_ht_bound(KET0, KET1, 0.1)
    assert res.perfect and math.isinf(res.M)
    assert (res.typeI, res.typeII) == (0.0, 0.0)
    assert res.typeII_bound == 0.0 and res.holds


def test_oneshot_equal_states():
    rho = np.diag([0.3, 0.7])
    res = oneshot_ht_bound(rho, rho, 0.25)
    assert res.ds == pytest.approx(0.0, abs=1e-12)
    assert res.M == pytest.approx(0.25)
    assert res.typeII == pytest.approx(0.8, abs=1e-9)
    assert res.typeII_bound == pytest.approx(4.0)
    assert res.holds


@pytest.mark.parametrize("eps", [0.05, 0.15, 0.3, 0.45])
def test_oneshot_random_qubits(rng, eps):
    for _ in range(40):
        res = oneshot_ht_bound(rand_state(2, rng), rand_state(2, rng), eps)
        assert res.typeI <= 2 * eps + 1e-8
        assert res.typeII <= res.typeII_bound + 1e-8
        if not res.perfect:
            assert res.M == pytest.approx(2 ** (res.ds + math.log2(eps)))

import numpy as np
import pytest

from twoway_qsdc.channel import ChannelParams, photon_rng, sample_block, transmit_qubit
from twoway_qsdc.quantum import Basis, QuantumStateError, outcome_probabilities, prepare_state, same_up_to_phase

from oracles import binomial_sigma

N = 100_000


def error_rate(basis, p_flip, seed):
    s = prepare_state(basis, 0)
    rng = np.random.default_rng(seed)
    ch = ChannelParams(1.0, p_flip)
    errors = 0
    for _ in range(N):
        out = transmit_qubit(s, ch, rng)
        errors += outcome_probabilities(out, basis)[1] > 0.5
    return errors / N


def test_perfect_channel_is_identity():
    rng = np.random.default_rng(0)
    for basis in Basis:
        for bit in (0, 1):
            s = prepare_state(basis, bit)
            out = transmit_qubit(s, ChannelParams(1.0, 0.0), rng)
            assert same_up_to_phase(out, s)


def test_total_loss():
    rng = np.random.default_rng(1)
    assert all(transmit_qubit(prepare_state(Basis.Z, 0), ChannelParams(0.0, 0.0), rng) is None for _ in range(100))


def test_z_error_rate():
    assert abs(error_rate(Basis.Z, 0.02, 2) - 0.02) <= 3 * binomial_sigma(N, 0.02) / N


def test_bases_see_the_same_error_rate():
    ez = error_rate(Basis.Z, 0.05, 3)
    ex = error_rate(Basis.X, 0.05, 4)
    sigma = np.sqrt(2) * binomial_sigma(N, 0.05) / N
    assert abs(ez - ex) <= 3 * sigma
    assert abs(ex - 0.05) <= 3 * binomial_sigma(N, 0.05) / N


def test_loss_count_binomial():
    rng = np.random.default_rng(5)
    ch = ChannelParams(0.3, 0.0)
    s = prepare_state(Basis.X, 1)
    arrived = sum(transmit_qubit(s, ch, rng) is not None for _ in range(N))
    assert abs(arrived - 0.3 * N) <= 3 * binomial_sigma(N, 0.3)


def test_block_sampler_matches_rates():
    b = sample_block(N, ChannelParams(0.6, 0.1), np.random.default_rng(6))
    assert abs(b.arrived.sum() - 0.6 * N) <= 3 * binomial_sigma(N, 0.6)
    n_arr = int(b.arrived.sum())
    assert abs(b.x_flip.sum() - 0.1 * n_arr) <= 3 * binomial_sigma(n_arr, 0.1)
    assert not np.any(b.x_flip & ~b.arrived)


def test_photon_rng_reproducible():
    a = photon_rng(7, 123).random(4)
    b = photon_rng(7, 123).random(4)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, photon_rng(7, 124).random(4))


@pytest.mark.parametrize("eta, p", [(-0.1, 0.0), (1.1, 0.0), (0.5, 0.6), (0.5, -0.1)])
def test_param_validation(eta, p):
    with pytest.raises(ValueError):
        ChannelParams(eta, p)


def test_rejects_composite_state():
    with pytest.raises(QuantumStateError):
        transmit_qubit(np.array([1, 0, 0, 0]), ChannelParams(), np.random.default_rng(0))

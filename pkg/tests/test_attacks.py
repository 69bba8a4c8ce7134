import math

import numpy as np
import pytest

from twoway_qsdc.attacks import (
    AttackError,
    AttackUnitary,
    bench_attack,
    disturbance,
    encoded_cq_state,
    extract_coefficients,
    forward_joint_state,
    outcome_table,
    random_attack,
    reconstruct_x_coefficients,
    secure_rate_closed_form,
    secure_rate_numeric,
    standard_attack,
)
from twoway_qsdc.quantum import U_FLIP, as_density, density, ket, partial_trace
from twoway_qsdc.rates import binary_entropy

KEYS = ("00", "01", "10", "11", "pp", "pm", "mp", "mm")


def random_attacks(count=100, seed=0):
    rng = np.random.default_rng(seed)
    return [random_attack(int(rng.integers(2, 9)), rng) for _ in range(count)]


class TestStandardAttacks:
    def test_identity_coefficients(self):
        c = extract_coefficients(standard_attack("identity"))
        for k in ("00", "11", "pp", "mm"):
            assert c.c(k) == pytest.approx(1.0, abs=1e-12)
        for k in ("01", "10", "pm", "mp"):
            assert c.c(k) == pytest.approx(0.0, abs=1e-12)
        assert c.undefined == frozenset({"01", "10", "pm", "mp"})

    def test_cnot_coefficients(self):
        c = extract_coefficients(standard_attack("cnot"))
        assert c.c01 == pytest.approx(0.0, abs=1e-12)
        assert c.c10 == pytest.approx(0.0, abs=1e-12)
        assert c.cpm**2 == pytest.approx(0.5, abs=1e-12)
        assert c.cmp**2 == pytest.approx(0.5, abs=1e-12)
        np.testing.assert_allclose(c.ancilla_states["00"], ket(0), atol=1e-12)
        np.testing.assert_allclose(c.ancilla_states["11"], ket(1), atol=1e-12)
        assert abs(np.vdot(c.ancilla_states["00"], c.ancilla_states["11"])) < 1e-12

    def test_phase_covariant_half_pi_matches_cnot(self):
        a = extract_coefficients(standard_attack("phase_covariant", math.pi / 2))
        b = extract_coefficients(standard_attack("cnot"))
        for k in KEYS:
            assert a.c(k) == pytest.approx(b.c(k), abs=1e-12)

    @pytest.mark.parametrize("theta", [0.0, 0.3, 1.0, math.pi / 2])
    def test_phase_covariant_overlap(self, theta):
        a = standard_attack("phase_covariant", theta)
        e0 = a.act(ket(0)).reshape(2, 2)[0]
        e1 = a.act(ket(1)).reshape(2, 2)[1]
        assert np.vdot(e0, e1).real == pytest.approx(math.cos(theta), abs=1e-12)

    def test_invalid_theta(self):
        with pytest.raises(AttackError):
            standard_attack("phase_covariant", 2.0)
        with pytest.raises(AttackError):
            standard_attack("phase_covariant")

    def test_unknown_kind(self):
        with pytest.raises(AttackError):
            standard_attack("photon_number_splitting")

    def test_non_unitary_rejected(self):
        with pytest.raises(AttackError):
            AttackUnitary(np.ones((4, 4)), ket(0))


class TestCoefficients:
    def test_row_normalization_random(self):
        for a in random_attacks(50):
            for norm in extract_coefficients(a).row_norms():
                assert norm == pytest.approx(1.0, abs=1e-10)

    def test_x_rows_reconstructed_by_linearity(self):
        for a in random_attacks(100, seed=1):
            direct = extract_coefficients(a)
            rebuilt = reconstruct_x_coefficients(direct)
            for k in ("pp", "pm", "mp", "mm"):
                assert rebuilt.c(k) == pytest.approx(direct.c(k), abs=1e-10)
                if k not in direct.undefined:
                    np.testing.assert_allclose(rebuilt.ancilla_states[k], direct.ancilla_states[k], atol=1e-10)

    def test_ancilla_states_normalized(self):
        for a in random_attacks(20, seed=2):
            c = extract_coefficients(a)
            for k in KEYS:
                assert np.linalg.norm(c.ancilla_states[k]) == pytest.approx(1.0, abs=1e-12)


class TestDisturbance:
    def test_identity(self):
        d = disturbance(extract_coefficients(standard_attack("identity")))
        assert d.e == 0.0 and d.xi == 0.0

    def test_cnot(self):
        d = disturbance(extract_coefficients(standard_attack("cnot")))
        assert d.e == pytest.approx(0.25, abs=1e-12)
        assert d.xi == pytest.approx(0.5, abs=1e-12)
        assert d.e_Z == pytest.approx(0.0, abs=1e-12)

    def test_in_unit_interval(self):
        for a in random_attacks(100, seed=3):
            d = disturbance(extract_coefficients(a))
            for v in (d.e_Z, d.e_X, d.e, d.xi):
                assert 0 <= v <= 1
            assert d.e == pytest.approx((d.e_Z + d.e_X) / 2)

    def test_flip_attack_exceeds_half(self):
        # Row normalization alone bounds e by 1, not 1/2: U_flip on the qubit flips both bases.
        a = AttackUnitary(np.kron(U_FLIP, np.eye(2)), ket(0), name="flip")
        d = disturbance(extract_coefficients(a))
        assert d.e == pytest.approx(1.0, abs=1e-12)

    def test_outcome_table_matches_coefficients(self):
        for a in random_attacks(20, seed=4):
            c = extract_coefficients(a)
            t = outcome_table(a)
            assert t[0, 0, 0] == pytest.approx(c.c01**2, abs=1e-12)
            assert t[0, 1, 0] == pytest.approx(c.c11**2, abs=1e-12)
            assert t[1, 0, 1] == pytest.approx(c.cpm**2, abs=1e-12)
            assert t[1, 1, 1] == pytest.approx(c.cmm**2, abs=1e-12)


class TestJointStates:
    def test_identity_forward(self):
        rho = forward_joint_state(standard_attack("identity"))
        np.testing.assert_allclose(rho, np.kron(np.eye(2) / 2, density(ket(0))), atol=1e-15)

    def test_cnot_forward(self):
        rho = forward_joint_state(standard_attack("cnot"))
        expected = (density(ket(0, 0)) + density(ket(1, 1))) / 2
        np.testing.assert_allclose(rho, expected, atol=1e-15)

    def test_forward_is_valid_state(self):
        for a in random_attacks(30, seed=5):
            as_density(forward_joint_state(a))

    def test_p0_one(self):
        rho_BE = forward_joint_state(standard_attack("cnot"))
        np.testing.assert_allclose(encoded_cq_state(1.0, rho_BE), np.kron(density(ket(0)), rho_BE), atol=1e-15)

    def test_identity_half_traces_to_mixed(self):
        rho = encoded_cq_state(0.5, forward_joint_state(standard_attack("identity")))
        rho_BE = partial_trace(rho, (2, 4), keep=(1,))
        np.testing.assert_allclose(rho_BE, np.kron(np.eye(2) / 2, density(ket(0))), atol=1e-15)

    def test_block_diagonal(self):
        for a in random_attacks(20, seed=6):
            rho = encoded_cq_state(0.3, forward_joint_state(a))
            h = rho.shape[0] // 2
            assert np.max(np.abs(rho[:h, h:])) == 0.0

    def test_invalid_probability(self):
        with pytest.raises(ValueError):
            encoded_cq_state(1.5, forward_joint_state(standard_attack("identity")))

    def test_attack_after_encoding_reveals_nothing(self):
        # Eve acting only on the backward qubit sees I rho_B I and U rho_B U^dag, identical for rho_B = I/2.
        rho_B = np.eye(2) / 2
        np.testing.assert_allclose(U_FLIP @ rho_B @ U_FLIP.conj().T, rho_B, atol=1e-15)
        for a in random_attacks(20, seed=7):
            E = density(a.initial_ancilla)
            branches = [a.matrix @ np.kron(g @ rho_B @ g.conj().T, E) @ a.matrix.conj().T for g in (np.eye(2), U_FLIP)]
            np.testing.assert_allclose(branches[0], branches[1], atol=1e-12)

    def test_ancilla_marginal_identical_across_branches(self):
        for a in random_attacks(30, seed=8):
            rho = encoded_cq_state(0.5, forward_joint_state(a))
            d_E = a.d_E
            h = rho.shape[0] // 2
            b0 = rho[:h, :h] / 0.5
            b1 = rho[h:, h:] / 0.5
            np.testing.assert_allclose(
                partial_trace(b0, (2, d_E), keep=(1,)), partial_trace(b1, (2, d_E), keep=(1,)), atol=1e-12
            )

    def test_unattacked_branches_have_mixed_qubit(self):
        rho = encoded_cq_state(0.5, forward_joint_state(standard_attack("identity")))
        for block in (rho[:4, :4], rho[4:, 4:]):
            np.testing.assert_allclose(partial_trace(block / 0.5, (2, 2), keep=(0,)), np.eye(2) / 2, atol=1e-12)


class TestRates:
    def test_identity_numeric(self):
        rho = encoded_cq_state(0.5, forward_joint_state(standard_attack("identity")))
        assert secure_rate_numeric(rho) == pytest.approx(1.0, abs=1e-9)

    def test_cnot_numeric(self):
        rho = encoded_cq_state(0.5, forward_joint_state(standard_attack("cnot")))
        assert secure_rate_numeric(rho) == pytest.approx(0.0, abs=1e-9)

    def test_deterministic_register(self):
        for a in random_attacks(10, seed=9):
            assert secure_rate_numeric(encoded_cq_state(1.0, forward_joint_state(a))) == pytest.approx(0.0, abs=1e-9)

    @pytest.mark.parametrize("P0, xi, expected", [(0.5, 0.0, 1.0), (0.5, 0.5, 0.0), (0.5, 0.05, 0.713603)])
    def test_closed_form(self, P0, xi, expected):
        assert secure_rate_closed_form(P0, xi) == pytest.approx(expected, abs=1e-6)

    def test_numeric_between_zero_and_register_entropy(self):
        rng = np.random.default_rng(10)
        for a in random_attacks(50, seed=10):
            P0 = float(rng.uniform(0, 1))
            r = secure_rate_numeric(encoded_cq_state(P0, forward_joint_state(a)))
            assert -1e-9 <= r <= binary_entropy(P0) + 1e-9

    @pytest.mark.parametrize("kind", ["identity", "cnot"])
    def test_fixture_agreement(self, kind):
        b = bench_attack(standard_attack(kind))
        assert b.gap == pytest.approx(0.0, abs=1e-9)

    def test_gap_reported_for_random_attacks(self):
        gaps = [bench_attack(a).gap for a in random_attacks(10, seed=11)]
        assert all(np.isfinite(gaps))

"""Tests for the exact statevector simulator."""

import numpy as np
import pytest
import scipy.linalg

from qpbands.lattice import HubbardSpec, build_hamiltonian, hubbard_integrals, number_operator
from qpbands.operators import FermionOperator, QubitOperator, jordan_wigner
from qpbands.simulator import (
    CompiledOperator,
    Statevector,
    ansatz_state,
    apply_operator,
    apply_pool_exponential,
    energy_and_gradient,
    expectation,
    pool_rotations,
    prepare_hartree_fock,
)

from oracles import central_difference, random_fermion_operator


def random_state(rng, n):
    amps = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return Statevector(amps / np.linalg.norm(amps), n)


class TestApplyOperator:
    def test_identity(self):
        rng = np.random.default_rng(0)
        psi = random_state(rng, 3)
        out = apply_operator(psi, QubitOperator.identity(3))
        np.testing.assert_allclose(out.amplitudes, psi.amplitudes, atol=1e-15)

    def test_annihilation_sign_from_parity(self):
        # a_0 on |...1> clears the bit with a sign from modes below (none here)
        psi = Statevector.basis_state(2, occupied=(0, 1))
        a0 = jordan_wigner(FermionOperator.annihilation(0), 2)
        out = apply_operator(psi, a0)
        expected = Statevector.basis_state(2, occupied=(1,))
        np.testing.assert_allclose(out.amplitudes, expected.amplitudes, atol=1e-15)
        # a_1 on |11> picks up (-1) from occupied mode 0
        a1 = jordan_wigner(FermionOperator.annihilation(1), 2)
        out = apply_operator(psi, a1)
        expected = Statevector.basis_state(2, occupied=(0,))
        np.testing.assert_allclose(out.amplitudes, -expected.amplitudes, atol=1e-15)

    def test_matches_dense_matrix(self):
        rng = np.random.default_rng(1)
        for _ in range(5):
            op = jordan_wigner(random_fermion_operator(rng, 3), 3)
            psi = random_state(rng, 3)
            out = apply_operator(psi, op)
            np.testing.assert_allclose(
                out.amplitudes, op.to_matrix() @ psi.amplitudes, atol=1e-12
            )

    def test_compiled_matches_plain(self):
        rng = np.random.default_rng(2)
        table = hubbard_integrals(HubbardSpec(2, 1.0, 4.0, 2))
        h = build_hamiltonian(table)
        psi = random_state(rng, table.num_modes)
        plain = apply_operator(psi, h)
        fast = apply_operator(psi, CompiledOperator(h))
        np.testing.assert_allclose(fast.amplitudes, plain.amplitudes, atol=1e-12)

    def test_linearity(self):
        rng = np.random.default_rng(3)
        a = jordan_wigner(random_fermion_operator(rng, 3), 3)
        b = jordan_wigner(random_fermion_operator(rng, 3), 3)
        psi = random_state(rng, 3)
        lhs = apply_operator(psi, (2.0 * a + (-0.5j) * b).simplify())
        rhs = 2.0 * apply_operator(psi, a).amplitudes - 0.5j * apply_operator(psi, b).amplitudes
        np.testing.assert_allclose(lhs.amplitudes, rhs, atol=1e-12)

    def test_register_mismatch(self):
        with pytest.raises(ValueError):
            apply_operator(Statevector.basis_state(2), QubitOperator.identity(3))


class TestExpectation:
    def test_identity_norm(self):
        rng = np.random.default_rng(4)
        psi = random_state(rng, 3)
        assert expectation(psi, QubitOperator.identity(3)) == pytest.approx(1.0)

    def test_hermitian_real(self):
        rng = np.random.default_rng(5)
        table = hubbard_integrals(HubbardSpec(2, 1.0, 4.0, 2))
        h = build_hamiltonian(table)
        psi = random_state(rng, table.num_modes)
        assert abs(expectation(psi, h).imag) < 1e-12

    def test_hf_energy_vs_dense(self):
        table = hubbard_integrals(HubbardSpec(2, 1.0, 4.0, 2))
        h = build_hamiltonian(table)
        hf = prepare_hartree_fock(table)
        dense = h.to_matrix()
        idx = int(np.argmax(np.abs(hf.amplitudes)))
        assert expectation(hf, h) == pytest.approx(dense[idx, idx])


class TestHartreeFock:
    def test_basis_state(self):
        table = hubbard_integrals(HubbardSpec(2, 1.0, 4.0, 2))
        hf = prepare_hartree_fock(table)
        # modes 0,1 occupied -> index 0b11 = 3
        assert hf.amplitudes[3] == pytest.approx(1.0)

    def test_particle_count(self):
        table = hubbard_integrals(HubbardSpec(3, 1.0, 4.0, 2))
        hf = prepare_hartree_fock(table)
        n = expectation(hf, number_operator(table.num_modes))
        assert n == pytest.approx(2.0)


class TestPoolExponential:
    def test_theta_zero_is_identity(self):
        rng = np.random.default_rng(6)
        psi = random_state(rng, 2)
        tau = FermionOperator.from_factors(1.0, ((1, True), (0, False)))
        tau = tau - tau.adjoint()
        out = apply_pool_exponential(psi, tau, 0.0)
        np.testing.assert_allclose(out.amplitudes, psi.amplitudes, atol=1e-15)

    def test_single_excitation_rotation(self):
        # e^{theta (adag1 a0 - adag0 a1)} |01> = cos(theta)|01> + sin(theta)|10>
        psi = Statevector.basis_state(2, occupied=(0,))
        tau = FermionOperator.from_factors(1.0, ((1, True), (0, False)))
        tau = tau - tau.adjoint()
        for theta in (0.3, -0.7, 1.2):
            out = apply_pool_exponential(psi, tau, theta)
            dense = scipy.linalg.expm(theta * jordan_wigner(tau, 2).to_matrix())
            np.testing.assert_allclose(out.amplitudes, dense @ psi.amplitudes, atol=1e-12)
            assert out.amplitudes[0b01] == pytest.approx(np.cos(theta))
            assert abs(out.amplitudes[0b10]) == pytest.approx(abs(np.sin(theta)))

    def test_double_excitation_matches_expm(self):
        rng = np.random.default_rng(7)
        psi = random_state(rng, 4)
        t = FermionOperator.from_factors(1.0, ((2, True), (3, True), (1, False), (0, False)))
        for tau in (t - t.adjoint(), 1j * (t + t.adjoint())):
            theta = 0.37
            out = apply_pool_exponential(psi, tau, theta)
            dense = scipy.linalg.expm(theta * jordan_wigner(tau, 4).to_matrix())
            np.testing.assert_allclose(out.amplitudes, dense @ psi.amplitudes, atol=1e-12)
            assert out.norm() == pytest.approx(1.0, abs=1e-10)

    def test_non_antihermitian_rejected(self):
        psi = Statevector.basis_state(2, occupied=(0,))
        bad = FermionOperator.from_factors(1.0, ((1, True), (0, False)))
        with pytest.raises(ValueError):
            apply_pool_exponential(psi, bad, 0.5)

    def test_non_commuting_rejected(self):
        # adag1 a0 - h.c. plus adag1 - h.c. mixes commuting sectors
        psi = Statevector.basis_state(2)
        t1 = FermionOperator.from_factors(1.0, ((1, True), (0, False)))
        t2 = FermionOperator.from_factors(1.0, ((1, True),))
        tau = (t1 - t1.adjoint()) + (t2 - t2.adjoint())
        with pytest.raises(ValueError, match="commute"):
            apply_pool_exponential(psi, tau, 0.5)

    def test_unitarity_over_random_sequences(self):
        rng = np.random.default_rng(8)
        psi = random_state(rng, 4)
        taus = []
        t = FermionOperator.from_factors(1.0, ((2, True), (0, False)))
        taus.append(t - t.adjoint())
        t = FermionOperator.from_factors(1.0, ((3, True), (2, True), (1, False), (0, False)))
        taus.append(1j * (t + t.adjoint()))
        for _ in range(20):
            tau = taus[rng.integers(len(taus))]
            psi = apply_pool_exponential(psi, tau, float(rng.normal()))
        assert psi.norm() == pytest.approx(1.0, abs=1e-10)


class TestGradient:
    def _setup(self, seed=9):
        rng = np.random.default_rng(seed)
        table = hubbard_integrals(HubbardSpec(2, 1.0, 4.0, 2))
        h = build_hamiltonian(table)
        n = table.num_modes
        generators = []
        t = FermionOperator.from_factors(1.0, ((2, True), (0, False)))
        generators.append(t - t.adjoint())
        t = FermionOperator.from_factors(1.0, ((3, True), (2, True), (1, False), (0, False)))
        generators.append(t - t.adjoint())
        generators.append(1j * (t + t.adjoint()))
        rotation_seq = [pool_rotations(g, n) for g in generators]
        images = [jordan_wigner(g, n) for g in generators]
        reference = prepare_hartree_fock(table)
        return rng, h, reference, rotation_seq, images

    def test_gradient_matches_finite_differences(self):
        rng, h, ref, rotations, images = self._setup()
        ch = CompiledOperator(h)

        def energy(thetas):
            psi = ansatz_state(ref, rotations, thetas)
            return expectation(psi, ch).real

        for _ in range(4):
            thetas = rng.normal(scale=0.4, size=len(rotations))
            _, grad = energy_and_gradient(ch, ref, rotations, images, thetas)
            fd = central_difference(energy, thetas, h=1e-5)
            np.testing.assert_allclose(grad, fd, atol=1e-7)

    def test_gradient_at_zero_equals_commutator_expectation(self):
        from qpbands.operators import commutator

        _, h, ref, rotations, images = self._setup()
        _, grad = energy_and_gradient(h, ref, rotations[:1], images[:1], [0.0])
        comm = commutator(h, images[0])
        assert grad[0] == pytest.approx(expectation(ref, comm).real, abs=1e-12)


class TestGuards:
    def test_max_register(self):
        with pytest.raises(ValueError):
            Statevector(np.zeros(2**25), 25)

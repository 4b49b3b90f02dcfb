"""End-to-end checks on a synthetic two-band ring: multi-orbital and multi-k
at the same time, with complex inter-band couplings.

This is the index-bookkeeping stress test: every (orbital, k, spin) mode
combination appears, singles can mix orbitals within one k, and the
interaction couples bands across k while conserving crystal momentum.
"""

import numpy as np
import pytest

from qpbands.adapt import adapt_solve
from qpbands.eom import build_basis, build_qse_problem, solve_qse
from qpbands.fci import exact_ip_ea, fci_sector
from qpbands.lattice import (
    IntegralTable,
    KMesh,
    build_hamiltonian,
    momentum_phase_operator,
    number_operator,
    sz_operator,
)
from qpbands.operators import commutator
from qpbands.simulator import CompiledOperator


def two_band_ring(nk=2, n_electrons=2, seed=3):
    """Two orbitals per cell on a ring; deterministic pseudo-random but
    Hermitian, momentum-conserving integrals."""
    rng = np.random.default_rng(seed)
    mesh = KMesh((1, 1, nk))
    one = {}
    for k in range(nk):
        eps0 = -1.2 - 0.4 * np.cos(2 * np.pi * k / nk)
        eps1 = 0.8 + 0.3 * np.cos(2 * np.pi * k / nk)
        one[(0, k, 0, k)] = complex(eps0)
        one[(1, k, 1, k)] = complex(eps1)
        mix = complex(rng.normal(scale=0.1), rng.normal(scale=0.1))
        one[(0, k, 1, k)] = mix
        one[(1, k, 0, k)] = mix.conjugate()
    two = {}
    orbs = (0, 1)
    for kp in range(nk):
        for kq in range(nk):
            for kr in range(nk):
                ks = (kp + kq - kr) % nk
                for p in orbs:
                    for q in orbs:
                        for r in orbs:
                            for s in orbs:
                                key = (p, kp, q, kq, r, kr, s, ks)
                                partner = (s, ks, r, kr, q, kq, p, kp)
                                if partner in two:
                                    two[key] = two[partner].conjugate()
                                else:
                                    value = complex(
                                        rng.normal(scale=0.15), rng.normal(scale=0.05)
                                    )
                                    if key == partner:
                                        value = complex(value.real)
                                    two[key] = value
    return IntegralTable(mesh, 2, n_electrons, 0.1, one, two)


@pytest.fixture(scope="module")
def ring():
    table = two_band_ring()
    return table, build_hamiltonian(table)


class TestTwoBandRing:
    def test_symmetries(self, ring):
        table, h = ring
        assert h.is_hermitian(1e-10)
        assert commutator(h, number_operator(table.num_modes)).is_zero(1e-10)
        assert commutator(h, sz_operator(table.num_modes)).is_zero(1e-10)
        assert commutator(h, momentum_phase_operator(table)).is_zero(1e-10)

    def test_matrix_matches_occupation_oracle(self, ring):
        from qpbands.lattice import build_fermion_hamiltonian
        from oracles import fermion_matrix

        table, h = ring
        oracle = fermion_matrix(build_fermion_hamiltonian(table), table.num_modes)
        np.testing.assert_allclose(h.to_matrix(), oracle, atol=1e-12)

    def test_adaptive_solve_reaches_fci(self, ring):
        table, h = ring
        exact = fci_sector(h, table.n_electrons, 0.0).ground_energy
        result = adapt_solve(table, h, eps=1e-4, max_iter=60)
        assert result.converged
        assert abs(result.energy - exact) < 1e-6

    def test_eom_union_covers_sectors(self, ring):
        table, h = ring
        ch = CompiledOperator(h)
        ground = fci_sector(h, table.n_electrons, 0.0).ground_vector
        for sector, exact in zip(("ip", "ea"), exact_ip_ea(h, table.n_electrons, 0.0)):
            union = []
            for kt in table.mesh.kpoints():
                sol = solve_qse(
                    build_qse_problem(ground, ch, build_basis(table, sector, kt))
                )
                for e in sol.energies:
                    assert np.min(np.abs(exact - e)) < 1e-8, (sector, kt)
                union.extend(sol.energies)
            for e in exact:
                assert np.min(np.abs(np.asarray(union) - e)) < 1e-8, (sector, e)

    def test_beta_channel_degenerate_with_alpha(self, ring):
        table, h = ring
        ch = CompiledOperator(h)
        ground = fci_sector(h, table.n_electrons, 0.0).ground_vector
        for kt in table.mesh.kpoints():
            a = solve_qse(
                build_qse_problem(ground, ch, build_basis(table, "ip", kt, 0))
            )
            b = solve_qse(
                build_qse_problem(ground, ch, build_basis(table, "ip", kt, 1))
            )
            np.testing.assert_allclose(a.energies, b.energies, atol=1e-8)


class TestGaugeInvarianceOfSolver:
    def test_energy_independent_of_orbital_gauge(self):
        table = two_band_ring(nk=2, seed=5)
        rng = np.random.default_rng(11)
        gauged = table.with_orbital_phases(
            rng.uniform(0, 2 * np.pi, table.num_spatial)
        )
        e_plain = adapt_solve(table, eps=1e-5, max_iter=60).energy
        e_gauged = adapt_solve(gauged, eps=1e-5, max_iter=60).energy
        assert e_plain == pytest.approx(e_gauged, abs=1e-6)

"""Dense-matrix oracle for the excitation functionals.

Every functional variant is re-evaluated here by explicit matrix algebra
(outer-product projector, raw commutators on 16x16 matrices) and compared
against the library's analytic reductions. This is the brute-force check of
the operator identities the reductions rely on.
"""

import numpy as np
import pytest

from qpbands.eom import build_basis, build_np_problem, verify_functional_equivalence
from qpbands.fci import fci_sector, sector_basis
from qpbands.lattice import HubbardSpec, build_hamiltonian, hubbard_integrals
from qpbands.operators import FermionOperator, jordan_wigner
from qpbands.simulator import Statevector


def dense_setup(seed=0):
    table = hubbard_integrals(HubbardSpec(2, 1.0, 4.0, 2))
    h_op = build_hamiltonian(table)
    h = h_op.to_matrix()
    rng = np.random.default_rng(seed)
    idx = sector_basis(table.num_modes, 2, 0.0)
    amps = np.zeros(2**table.num_modes, dtype=complex)
    amps[idx] = rng.normal(size=len(idx)) + 1j * rng.normal(size=len(idx))
    amps /= np.linalg.norm(amps)
    return table, h_op, h, amps


def anticomm(a, b):
    return a @ b + b @ a


def comm(a, b):
    return a @ b - b @ a


def functional_values(h, psi, r):
    """All six functional values by raw matrix algebra."""
    p = np.outer(psi, psi.conj())
    rt = r @ p
    rtd = rt.conj().T
    rd = r.conj().T

    def ev(m):
        return complex(psi.conj() @ m @ psi)

    out = {}
    out["projected_simple"] = ev(rtd @ comm(h, rt)) / ev(rtd @ rt)
    out["projected_commutator"] = ev(anticomm(rtd, comm(h, rt))) / ev(anticomm(rtd, rt))
    double_p = 0.5 * (anticomm(comm(rtd, h), rt) + anticomm(rtd, comm(h, rt)))
    out["projected_double_commutator"] = ev(double_p) / ev(anticomm(rtd, rt))
    out["working_equation"] = ev(rd @ h @ r) / ev(rd @ r) - ev(h)
    out["unprojected_simple"] = ev(rd @ comm(h, r)) / ev(rd @ r)
    out["unprojected_commutator"] = ev(anticomm(rd, comm(h, r))) / ev(anticomm(rd, r))
    double_u = 0.5 * (anticomm(comm(rd, h), r) + anticomm(rd, comm(h, r)))
    out["unprojected_double_commutator"] = ev(double_u) / ev(anticomm(rd, r))
    return out


class TestDenseOracle:
    def test_report_matches_dense_projector_algebra(self):
        table, h_op, h, amps = dense_setup()
        rng = np.random.default_rng(42)
        bases = [
            build_basis(table, s, kt)
            for s in ("ip", "ea")
            for kt in table.mesh.kpoints()
        ]
        psi = Statevector(amps, table.num_modes)
        for trial in range(12):
            basis = bases[trial % len(bases)]
            coeffs = rng.normal(size=len(basis)) + 1j * rng.normal(size=len(basis))
            excitation = FermionOperator.zero()
            for c, op in zip(coeffs, basis.operators):
                excitation = excitation + c * op
            r = jordan_wigner(excitation, table.num_modes).to_matrix()
            want = functional_values(h, amps, r)
            got = verify_functional_equivalence(psi, h_op, excitation)
            assert got.projected_simple == pytest.approx(
                want["projected_simple"], abs=1e-10
            )
            assert got.projected_commutator == pytest.approx(
                want["projected_commutator"], abs=1e-10
            )
            assert got.projected_double_commutator == pytest.approx(
                want["projected_double_commutator"], abs=1e-10
            )
            assert got.working_equation == pytest.approx(
                complex(want["working_equation"]).real, abs=1e-10
            )
            assert got.unprojected_simple == pytest.approx(
                want["unprojected_simple"], abs=1e-10
            )
            assert got.unprojected_commutator == pytest.approx(
                want["unprojected_commutator"], abs=1e-10
            )
            assert got.unprojected_double_commutator == pytest.approx(
                complex(want["unprojected_double_commutator"]).real, abs=1e-10
            )

    def test_report_with_mixed_particle_sectors(self):
        # an R with nonzero <psi|R|psi>: the projected variants then differ
        # from each other exactly as the dense algebra dictates
        table, h_op, h, amps = dense_setup(seed=5)
        psi = Statevector(amps, table.num_modes)
        mixed = FermionOperator.annihilation(0) + 0.7 * FermionOperator.from_factors(
            1.0, ((2, True), (0, False))
        )
        r = jordan_wigner(mixed, table.num_modes).to_matrix()
        want = functional_values(h, amps, r)
        got = verify_functional_equivalence(psi, h_op, mixed)
        assert abs(got.reference_overlap) > 1e-3
        assert got.projected_simple == pytest.approx(want["projected_simple"], abs=1e-10)
        assert got.projected_commutator == pytest.approx(
            want["projected_commutator"], abs=1e-10
        )
        assert got.projected_double_commutator == pytest.approx(
            want["projected_double_commutator"], abs=1e-10
        )

    def test_np_pencil_matches_dense_double_commutator(self):
        table, h_op, h, _ = dense_setup()
        ground = fci_sector(h_op, 2, 0.0).ground_vector
        psi = ground.amplitudes
        basis = build_basis(table, "ip", (0, 0, 0))
        problem = build_np_problem(ground, h_op, basis)
        images = [jordan_wigner(op, table.num_modes).to_matrix() for op in basis.operators]

        def ev(m):
            return complex(psi.conj() @ m @ psi)

        dim = len(images)
        h_want = np.empty((dim, dim), dtype=complex)
        s_want = np.empty((dim, dim), dtype=complex)
        for u in range(dim):
            for v in range(dim):
                rud = images[u].conj().T
                rv = images[v]
                double = 0.5 * (
                    anticomm(comm(rud, h), rv) + anticomm(rud, comm(h, rv))
                )
                h_want[u, v] = ev(double)
                s_want[u, v] = ev(anticomm(rud, rv))
        np.testing.assert_allclose(problem.h_mat, h_want, atol=1e-10)
        np.testing.assert_allclose(problem.s_mat, s_want, atol=1e-10)

"""Electron removal/attachment spectra on top of a correlated ground state.

The excitation operator is expanded in one-hole plus two-hole-one-particle
terms (or the particle mirror) at a target crystal momentum. Projecting the
operator onto the ground state enforces the killer condition and collapses
every candidate functional onto one working equation, which becomes a
generalized Hermitian eigenproblem over the vectors ``rho_v |psi>``:

    H_uv = <psi| rho_u^dag H rho_v |psi>,   S_uv = <psi| rho_u^dag rho_v |psi>

with excitation energies ``eigenvalue - <psi|H|psi>``. The unprojected
double-commutator variant (the "NP" baseline) is kept only for comparison;
it coincides with the projected answer exactly when the reference is the
exact ground state.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .lattice import IntegralTable, KTriple, momentum_allowed
from .operators import FermionOperator, QubitOperator, jordan_wigner
from .simulator import CompiledOperator, Statevector, apply_operator, expectation


@dataclass(frozen=True)
class ExcitationBasis:
    """Fermionic excitation operators spanning one (sector, k, spin) channel."""

    sector: str  # "ip" or "ea"
    k_target: KTriple
    spin_channel: int  # 0 = alpha removal/attachment
    operators: tuple[FermionOperator, ...]
    labels: tuple[str, ...]
    singles_indices: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.operators)


def build_basis(
    table: IntegralTable,
    sector: str,
    k_target: KTriple = (0, 0, 0),
    spin_channel: int = 0,
) -> ExcitationBasis:
    """Enumerate the 1h + 2h1p (IP) or 1p + 2p1h (EA) operators at ``k_target``.

    Orbital indices are general (not restricted to the reference occupation);
    the two same-kind ladder operators are antisymmetry-canonicalized to mode
    order, and index repetitions that would duplicate the singles block
    (creation index equal to an annihilation index) are excluded.
    """
    if sector not in ("ip", "ea"):
        raise ValueError(f"sector must be 'ip' or 'ea', got {sector!r}")
    if spin_channel not in (0, 1):
        raise ValueError(f"spin_channel must be 0 or 1, got {spin_channel}")
    mesh = table.mesh
    k_target = mesh.validate(k_target)
    modes = range(table.num_modes)
    k_of = {m: table.k_of_mode(m) for m in modes}
    spin_of = {m: m % 2 for m in modes}

    operators: list[FermionOperator] = []
    labels: list[str] = []
    singles: list[int] = []

    k_modes = [
        m for m in modes if k_of[m] == k_target and spin_of[m] == spin_channel
    ]
    if sector == "ip":
        for m in k_modes:
            singles.append(len(operators))
            operators.append(FermionOperator.annihilation(m))
            labels.append(f"1h[{m}]")
        # adag_p a_q a_s: remove net momentum k_target, remove net spin_channel
        for p in modes:
            for q in modes:
                for s in modes:
                    if q >= s or p == q or p == s:
                        continue
                    if spin_of[q] + spin_of[s] - spin_of[p] != spin_channel:
                        continue
                    if not momentum_allowed(
                        [k_of[p], k_target], [k_of[q], k_of[s]], mesh
                    ):
                        continue
                    operators.append(
                        FermionOperator.from_factors(
                            1.0, ((p, True), (q, False), (s, False))
                        )
                    )
                    labels.append(f"2h1p[{p};{q},{s}]")
    else:
        for m in k_modes:
            singles.append(len(operators))
            operators.append(FermionOperator.creation(m))
            labels.append(f"1p[{m}]")
        # adag_p adag_q a_s: add net momentum k_target, add net spin_channel
        for p in modes:
            for q in modes:
                for s in modes:
                    if p >= q or s == p or s == q:
                        continue
                    if spin_of[p] + spin_of[q] - spin_of[s] != spin_channel:
                        continue
                    if not momentum_allowed(
                        [k_of[p], k_of[q]], [k_of[s], k_target], mesh
                    ):
                        continue
                    operators.append(
                        FermionOperator.from_factors(
                            1.0, ((p, True), (q, True), (s, False))
                        )
                    )
                    labels.append(f"2p1h[{p},{q};{s}]")
    if not operators:
        raise ValueError(
            f"empty excitation basis for sector={sector}, k={k_target},"
            f" spin={spin_channel}"
        )
    return ExcitationBasis(
        sector, k_target, spin_channel, tuple(operators), tuple(labels), tuple(singles)
    )


@dataclass
class QseProblem:
    """Hermitian matrix pencil (H, S) over an excitation basis."""

    h_mat: np.ndarray
    s_mat: np.ndarray
    ground_energy: float
    basis: ExcitationBasis
    metric: str = "projected"  # or "anticommutator" for the NP baseline

    def validate(self, tol: float = 1e-10):
        for name, m in (("H", self.h_mat), ("S", self.s_mat)):
            if np.max(np.abs(m - m.conj().T)) > tol:
                raise ValueError(f"{name} matrix is not Hermitian within {tol}")
        if np.linalg.eigvalsh(self.s_mat)[0] < -1e-10:
            raise ValueError("S matrix has a significantly negative eigenvalue")


@dataclass
class QseSolution:
    """Eigenpairs of the pencil: sorted excitation energies, S-normalized
    eigenvectors, and the quasiparticle weight of each state."""

    energies: np.ndarray
    vectors: np.ndarray  # columns C with C^dag S C = 1 on the retained space
    qpwt: np.ndarray
    retained_dim: int
    basis: ExcitationBasis
    diagnostic: str = ""


ASYMMETRY_TOL = 1e-8


def build_qse_problem(
    ground: Statevector,
    hamiltonian: QubitOperator | CompiledOperator,
    basis: ExcitationBasis,
) -> QseProblem:
    """Assemble H_uv and S_uv from the vectors rho_v |psi>."""
    if ground.num_qubits < 1:
        raise ValueError("empty register")
    psi = ground.normalized()
    h = (
        hamiltonian
        if isinstance(hamiltonian, CompiledOperator)
        else CompiledOperator(hamiltonian)
    )
    n = psi.num_qubits
    phis = [
        apply_operator(psi, jordan_wigner(op, n)).amplitudes for op in basis.operators
    ]
    hphis = [h.apply(v) for v in phis]
    dim = len(phis)
    s_mat = np.empty((dim, dim), dtype=complex)
    h_mat = np.empty((dim, dim), dtype=complex)
    for u in range(dim):
        for v in range(dim):
            s_mat[u, v] = np.vdot(phis[u], phis[v])
            h_mat[u, v] = np.vdot(phis[u], hphis[v])
    ground_energy = float(expectation(psi, h).real)
    for name, m in (("H", h_mat), ("S", s_mat)):
        asym = float(np.max(np.abs(m - m.conj().T)))
        if asym > ASYMMETRY_TOL:
            raise ValueError(f"{name} asymmetry {asym:.3e} exceeds {ASYMMETRY_TOL}")
    h_mat = 0.5 * (h_mat + h_mat.conj().T)
    s_mat = 0.5 * (s_mat + s_mat.conj().T)
    return QseProblem(h_mat, s_mat, ground_energy, basis, "projected")


def solve_qse(problem: QseProblem, s_tol: float = 1e-8) -> QseSolution:
    """Canonical orthogonalization then Hermitian diagonalization.

    Overlap eigenvalues below ``s_tol`` times the largest are discarded
    (linear dependence removal); excitation energies are the pencil
    eigenvalues minus the stored ground energy, exactly real by construction.
    """
    problem.validate()
    s_eigs, s_vecs = np.linalg.eigh(problem.s_mat)
    s_max = float(s_eigs[-1]) if len(s_eigs) else 0.0
    if s_max <= 0.0:
        return QseSolution(
            np.zeros(0),
            np.zeros((len(problem.basis), 0)),
            np.zeros(0),
            0,
            problem.basis,
            diagnostic="overlap matrix is numerically zero",
        )
    keep = s_eigs > s_tol * s_max
    x = s_vecs[:, keep] / np.sqrt(s_eigs[keep])
    h_red = x.conj().T @ problem.h_mat @ x
    h_red = 0.5 * (h_red + h_red.conj().T)
    evals, evecs = np.linalg.eigh(h_red)
    vectors = x @ evecs
    energies = evals - problem.ground_energy
    qpwt = quasiparticle_weight_from_vectors(vectors, problem.basis)
    return QseSolution(
        energies, vectors, qpwt, int(np.count_nonzero(keep)), problem.basis
    )


def quasiparticle_weight_from_vectors(
    vectors: np.ndarray, basis: ExcitationBasis
) -> np.ndarray:
    """Relative weight of each eigenvector on the singles block.

    The eigenvector direction is renormalized to unit coefficient norm before
    taking the singles sub-norm, so the weight always lies in [0, 1] and is 1
    exactly when the state is a pure single excitation.
    """
    if vectors.size == 0:
        return np.zeros(0)
    singles = np.asarray(basis.singles_indices, dtype=int)
    norms = np.linalg.norm(vectors, axis=0)
    norms = np.where(norms == 0.0, 1.0, norms)
    return np.linalg.norm(vectors[singles, :], axis=0) / norms


def quasiparticle_weight(solution: QseSolution, basis: ExcitationBasis | None = None) -> np.ndarray:
    return quasiparticle_weight_from_vectors(solution.vectors, basis or solution.basis)


# ---------------------------------------------------------------------------
# Functional equivalence report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FunctionalReport:
    """Numerical values of the candidate excitation functionals for one
    (reference state, excitation operator) pair.

    The projected variants apply the ground-state projector analytically;
    they agree with each other and with the working equation whenever
    <psi|R|psi> = 0 (which holds for any particle-number-changing R on a
    fixed-number reference). The unprojected variants generally disagree on
    an approximate reference; that gap is the NP deviation.
    """

    projected_simple: complex
    projected_commutator: complex
    projected_double_commutator: complex
    working_equation: float
    max_projected_spread: float
    unprojected_simple: complex
    unprojected_commutator: complex
    unprojected_double_commutator: float
    reference_overlap: complex  # <psi|R|psi>


def verify_functional_equivalence(
    ground: Statevector,
    hamiltonian: QubitOperator | CompiledOperator,
    excitation: FermionOperator,
) -> FunctionalReport:
    """Evaluate every functional variant for one excitation operator."""
    psi = ground.normalized()
    n = psi.num_qubits
    h = (
        hamiltonian
        if isinstance(hamiltonian, CompiledOperator)
        else CompiledOperator(hamiltonian)
    )
    r_op = jordan_wigner(excitation, n)
    r_dag = r_op.adjoint()

    pv = psi.amplitudes
    r = apply_operator(psi, r_op).amplitudes
    s = apply_operator(psi, r_dag).amplitudes
    hpsi = h.apply(pv)
    hr = h.apply(r)
    hs = h.apply(s)

    d = float(np.vdot(r, r).real)
    if d <= 0.0:
        raise ValueError("excitation annihilates the reference: R|psi> = 0")
    e0 = float(np.vdot(pv, hpsi).real)
    w = complex(np.vdot(pv, r))  # <psi|R|psi>
    rhr = float(np.vdot(r, hr).real)
    psi_h_r = complex(np.vdot(hpsi, r))  # <psi|H|r>

    working = rhr / d - e0

    # projected variants, with the projector reduced analytically
    n22 = rhr - e0 * d
    proj_simple = n22 / d
    n23 = n22 + np.conj(w) * (psi_h_r - w * e0)
    d23 = d + abs(w) ** 2
    proj_comm = n23 / d23
    n24 = n22 + (np.conj(w) * psi_h_r).real - abs(w) ** 2 * e0
    proj_double = n24 / d23

    # unprojected variants
    r_hpsi = apply_operator(Statevector(hpsi, n), r_op).amplitudes  # R H|psi>
    rdag_hpsi = apply_operator(Statevector(hpsi, n), r_dag).amplitudes
    ss = float(np.vdot(s, s).real)
    raw_simple = (rhr - np.vdot(r, r_hpsi)) / d
    raw_comm_n = (
        rhr
        - np.vdot(r, r_hpsi)
        + np.vdot(hpsi, _apply_qop(r_op, s, n))
        - np.vdot(s, hs)
    )
    raw_comm = raw_comm_n / (d + ss)
    raw_double_n = (
        rhr
        - float(np.vdot(r, r_hpsi).real)
        + float(np.vdot(hpsi, _apply_qop(r_op, s, n)).real)
        - float(np.vdot(s, hs).real)
    )
    raw_double = raw_double_n / (d + ss)

    values = [proj_simple, proj_comm, proj_double, working]
    spread = float(
        max(abs(a - b) for i, a in enumerate(values) for b in values[i + 1 :])
    )
    return FunctionalReport(
        projected_simple=complex(proj_simple),
        projected_commutator=complex(proj_comm),
        projected_double_commutator=complex(proj_double),
        working_equation=float(working),
        max_projected_spread=spread,
        unprojected_simple=complex(raw_simple),
        unprojected_commutator=complex(raw_comm),
        unprojected_double_commutator=float(raw_double),
        reference_overlap=w,
    )


def _apply_qop(op: QubitOperator, amplitudes: np.ndarray, n: int) -> np.ndarray:
    return apply_operator(Statevector(amplitudes, n), op).amplitudes


# ---------------------------------------------------------------------------
# Unprojected (NP) baseline
# ---------------------------------------------------------------------------


def build_np_problem(
    ground: Statevector,
    hamiltonian: QubitOperator | CompiledOperator,
    basis: ExcitationBasis,
) -> QseProblem:
    """Matrix pencil of the unprojected symmetric-double-commutator functional:

    H_uv = <psi|[rho_u^dag, H, rho_v]_+|psi>, S_uv = <psi|[rho_u^dag, rho_v]_+|psi>.

    Eigenvalues are excitation energies directly, so ``ground_energy`` is set
    to zero for the downstream solve.
    """
    psi = ground.normalized()
    h = (
        hamiltonian
        if isinstance(hamiltonian, CompiledOperator)
        else CompiledOperator(hamiltonian)
    )
    n = psi.num_qubits
    images = [jordan_wigner(op, n) for op in basis.operators]
    adjoints = [img.adjoint() for img in images]
    pv = psi.amplitudes
    hpsi = h.apply(pv)

    phi = [_apply_qop(img, pv, n) for img in images]  # rho_u |psi>
    chi = [_apply_qop(adj, pv, n) for adj in adjoints]  # rho_u^dag |psi>
    rho_h = [_apply_qop(img, hpsi, n) for img in images]  # rho_u H|psi>
    rhod_h = [_apply_qop(adj, hpsi, n) for adj in adjoints]  # rho_u^dag H|psi>
    h_phi = [h.apply(v) for v in phi]
    h_chi = [h.apply(v) for v in chi]

    dim = len(basis)
    h_mat = np.empty((dim, dim), dtype=complex)
    s_mat = np.empty((dim, dim), dtype=complex)
    for u in range(dim):
        for v in range(dim):
            h_mat[u, v] = (
                np.vdot(phi[u], h_phi[v])
                - 0.5 * (np.vdot(rho_h[u], phi[v]) + np.vdot(phi[u], rho_h[v]))
                + 0.5 * (np.vdot(chi[v], rhod_h[u]) + np.vdot(rhod_h[v], chi[u]))
                - np.vdot(chi[v], h_chi[u])
            )
            s_mat[u, v] = np.vdot(phi[u], phi[v]) + np.vdot(chi[v], chi[u])
    h_mat = 0.5 * (h_mat + h_mat.conj().T)
    s_mat = 0.5 * (s_mat + s_mat.conj().T)
    return QseProblem(h_mat, s_mat, 0.0, basis, "anticommutator")


def eom_np_solve(
    ground: Statevector,
    hamiltonian: QubitOperator | CompiledOperator,
    basis: ExcitationBasis,
    s_tol: float = 1e-8,
) -> QseSolution:
    """Solve the unprojected double-commutator pencil (comparison baseline)."""
    return solve_qse(build_np_problem(ground, hamiltonian, basis), s_tol=s_tol)


# ---------------------------------------------------------------------------
# Dump for offline inspection
# ---------------------------------------------------------------------------


def dump_qse(
    problem: QseProblem, solution: QseSolution, path: str | os.PathLike
):
    """JSON dump of the pencil and its solution for regression diffs."""
    payload = {
        "sector": problem.basis.sector,
        "k_target": list(problem.basis.k_target),
        "spin_channel": problem.basis.spin_channel,
        "metric": problem.metric,
        "labels": list(problem.basis.labels),
        "singles_indices": list(problem.basis.singles_indices),
        "ground_energy": problem.ground_energy,
        "h_matrix": _complex_matrix(problem.h_mat),
        "s_matrix": _complex_matrix(problem.s_mat),
        "energies": [float(e) for e in solution.energies],
        "qpwt": [float(q) for q in solution.qpwt],
        "retained_dim": solution.retained_dim,
        "diagnostic": solution.diagnostic,
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=1, sort_keys=True)
        handle.write("\n")


def _complex_matrix(m: np.ndarray) -> list[list[list[float]]]:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]

"""Exact-diagonalization oracle in fixed particle-number / Sz sectors.

This is deliberately simple: enumerate the occupation bitstrings of a sector,
assemble the dense sector Hamiltonian from the Pauli strings, and call eigh.
Spin follows the global convention that even modes are alpha.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .operators import QubitOperator
from .simulator import Statevector, string_masks

#: sector diagonalization refuses registers larger than this
MAX_FCI_QUBITS = 20


@dataclass(frozen=True)
class SectorSpectrum:
    """Full spectrum of one (N, Sz) sector plus its ground vector embedded in
    the full register."""

    n_electrons: int
    sz: float
    energies: np.ndarray
    ground_vector: Statevector

    @property
    def ground_energy(self) -> float:
        return float(self.energies[0])


def sector_basis(num_qubits: int, n_electrons: int, sz: float | None) -> list[int]:
    """Occupation bitstrings with the given electron count and Sz."""
    if not 0 <= n_electrons <= num_qubits:
        raise ValueError(f"{n_electrons} electrons do not fit {num_qubits} modes")
    states = []
    for bits in itertools.combinations(range(num_qubits), n_electrons):
        if sz is not None:
            n_alpha = sum(1 for b in bits if b % 2 == 0)
            if abs(0.5 * (2 * n_alpha - n_electrons) - sz) > 1e-12:
                continue
        states.append(sum(1 << b for b in bits))
    return sorted(states)


def sector_matrix(
    hamiltonian: QubitOperator, basis: list[int]
) -> np.ndarray:
    """Dense Hamiltonian block on a list of basis bitstrings."""
    index = {b: i for i, b in enumerate(basis)}
    dim = len(basis)
    out = np.zeros((dim, dim), dtype=complex)
    for term in hamiltonian.simplify().terms:
        flip, yz, ny = string_masks(term.letters)
        phase_front = 1j**ny
        for col, b in enumerate(basis):
            target = b ^ flip
            row = index.get(target)
            if row is None:
                continue
            sign = -1.0 if bin(b & yz).count("1") % 2 else 1.0
            out[row, col] += term.coefficient * phase_front * sign
    return out


def fci_sector(
    hamiltonian: QubitOperator, n_electrons: int, sz: float | None = 0.0
) -> SectorSpectrum:
    """Exact spectrum of the (n_electrons, sz) sector.

    Pass ``sz=None`` to diagonalize the whole particle-number sector.
    """
    n = hamiltonian.num_qubits
    if n > MAX_FCI_QUBITS:
        raise ValueError(f"{n} qubits exceed the exact-diagonalization guard")
    basis = sector_basis(n, n_electrons, sz)
    if not basis:
        raise ValueError(f"empty sector: N={n_electrons}, sz={sz}")
    block = sector_matrix(hamiltonian, basis)
    if np.max(np.abs(block - block.conj().T)) > 1e-9:
        raise ValueError("sector Hamiltonian is not Hermitian")
    energies, vectors = np.linalg.eigh(block)
    full = np.zeros(2**n, dtype=complex)
    full[np.asarray(basis)] = vectors[:, 0]
    return SectorSpectrum(
        n_electrons=n_electrons,
        sz=float(sz) if sz is not None else float("nan"),
        energies=energies,
        ground_vector=Statevector(full, n),
    )


def exact_ip_ea(
    hamiltonian: QubitOperator, n_electrons: int, sz: float = 0.0
) -> tuple[np.ndarray, np.ndarray]:
    """Exact removal and attachment energies relative to the N-electron
    ground state: IP list = E(N-1, sz-1/2) - E0, EA list = E(N+1, sz+1/2) - E0
    (alpha channel; the beta channel is degenerate for closed shells)."""
    ground = fci_sector(hamiltonian, n_electrons, sz)
    ip = fci_sector(hamiltonian, n_electrons - 1, sz - 0.5)
    ea = fci_sector(hamiltonian, n_electrons + 1, sz + 0.5)
    return (
        ip.energies - ground.ground_energy,
        ea.energies - ground.ground_energy,
    )

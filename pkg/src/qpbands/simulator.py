"""Exact statevector simulation: reference preparation, operator application,
pool-operator exponentials, expectation values, and analytic energy gradients.

Amplitude layout: basis index bit m is the occupation of fermionic mode m
(little-endian), matching the Jordan-Wigner convention in
:mod:`qpbands.operators`.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .lattice import IntegralTable
from .operators import COEFF_TOL, FermionOperator, PauliTerm, QubitOperator, jordan_wigner

#: dense statevectors refuse registers larger than this
MAX_QUBITS = 24

_INDEX_CACHE: dict[int, np.ndarray] = {}


def _indices(num_qubits: int) -> np.ndarray:
    arr = _INDEX_CACHE.get(num_qubits)
    if arr is None:
        arr = np.arange(2**num_qubits, dtype=np.uint64)
        arr.setflags(write=False)
        _INDEX_CACHE[num_qubits] = arr
    return arr


class Statevector:
    """Immutable 2^n complex amplitude vector."""

    __slots__ = ("amplitudes", "num_qubits")

    def __init__(self, amplitudes: np.ndarray, num_qubits: int | None = None):
        amps = np.asarray(amplitudes, dtype=complex)
        if num_qubits is None:
            num_qubits = int(amps.size).bit_length() - 1
        if amps.shape != (2**num_qubits,):
            raise ValueError(
                f"amplitude vector of shape {amps.shape} does not match"
                f" {num_qubits} qubits"
            )
        if num_qubits > MAX_QUBITS:
            raise ValueError(
                f"register of {num_qubits} qubits exceeds the dense-statevector"
                f" guard ({MAX_QUBITS})"
            )
        amps = amps.copy()
        amps.setflags(write=False)
        self.amplitudes = amps
        self.num_qubits = num_qubits

    @classmethod
    def basis_state(cls, num_qubits: int, occupied: Iterable[int] = ()) -> "Statevector":
        index = 0
        for mode in occupied:
            if not 0 <= mode < num_qubits:
                raise ValueError(f"mode {mode} outside register of {num_qubits}")
            if index >> mode & 1:
                raise ValueError(f"mode {mode} listed twice")
            index |= 1 << mode
        amps = np.zeros(2**num_qubits, dtype=complex)
        amps[index] = 1.0
        return cls(amps, num_qubits)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "Statevector":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return Statevector(self.amplitudes / n, self.num_qubits)

    def inner(self, other: "Statevector") -> complex:
        _check_same_register(self, other)
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def _check_same_register(a: Statevector, b: Statevector):
    if a.num_qubits != b.num_qubits:
        raise ValueError(f"register size mismatch: {a.num_qubits} vs {b.num_qubits}")


# ---------------------------------------------------------------------------
# Pauli-string kernels
# ---------------------------------------------------------------------------


def string_masks(letters: tuple[tuple[int, str], ...]) -> tuple[int, int, int]:
    """(flip mask, Y|Z phase mask, number of Y letters) for a Pauli string."""
    flip = yz = ny = 0
    for q, l in letters:
        if l in ("X", "Y"):
            flip |= 1 << q
        if l in ("Y", "Z"):
            yz |= 1 << q
        if l == "Y":
            ny += 1
    return flip, yz, ny


def _string_phases(letters, num_qubits: int) -> tuple[int, np.ndarray]:
    """Flip mask and per-input-index phase vector of a Pauli string.

    P |j> = phase(j) |j ^ flip| with
    phase(j) = i^{nY} (-1)^{popcount(j & (Ymask | Zmask))}.
    """
    flip, yz, ny = string_masks(letters)
    idx = _indices(num_qubits)
    parity = np.bitwise_count(idx & np.uint64(yz)) & 1
    phases = (1j**ny) * (1.0 - 2.0 * parity)
    return flip, phases


def apply_pauli_string(
    amplitudes: np.ndarray, letters, coefficient: complex, num_qubits: int
) -> np.ndarray:
    flip, phases = _string_phases(letters, num_qubits)
    if flip:
        idx = _indices(num_qubits)
        src = idx ^ np.uint64(flip)
        return coefficient * phases[src] * amplitudes[src]
    return coefficient * phases * amplitudes


class CompiledOperator:
    """A QubitOperator pre-grouped by flip mask for fast repeated application.

    Strings sharing an X/Y pattern differ only by diagonal phases, so the sum
    collapses to one permutation plus one dense diagonal per distinct mask.
    """

    __slots__ = ("num_qubits", "_groups")

    def __init__(self, op: QubitOperator):
        self.num_qubits = op.num_qubits
        diags: dict[int, np.ndarray] = {}
        for t in op.simplify().terms:
            flip, phases = _string_phases(t.letters, op.num_qubits)
            acc = diags.get(flip)
            if acc is None:
                diags[flip] = t.coefficient * phases
            else:
                diags[flip] = acc + t.coefficient * phases
        self._groups = sorted(diags.items())

    def apply(self, amplitudes: np.ndarray) -> np.ndarray:
        out = np.zeros_like(amplitudes)
        idx = _indices(self.num_qubits)
        for flip, diag in self._groups:
            if flip:
                src = idx ^ np.uint64(flip)
                out += diag[src] * amplitudes[src]
            else:
                out += diag * amplitudes
        return out


def _as_compiled(op: QubitOperator | CompiledOperator) -> CompiledOperator:
    return op if isinstance(op, CompiledOperator) else CompiledOperator(op)


def apply_operator(
    state: Statevector, op: QubitOperator | CompiledOperator
) -> Statevector:
    """op|psi>; generally unnormalized (the caller owns normalization)."""
    if op.num_qubits != state.num_qubits:
        raise ValueError(
            f"operator on {op.num_qubits} qubits applied to {state.num_qubits}-qubit state"
        )
    if isinstance(op, CompiledOperator):
        return Statevector(op.apply(state.amplitudes), state.num_qubits)
    out = np.zeros_like(state.amplitudes)
    for t in op.terms:
        out += apply_pauli_string(state.amplitudes, t.letters, t.coefficient, state.num_qubits)
    return Statevector(out, state.num_qubits)


def expectation(
    bra: Statevector,
    op: QubitOperator | CompiledOperator,
    ket: Statevector | None = None,
) -> complex:
    """<bra| op |ket> by statevector contraction (ket defaults to bra)."""
    ket = bra if ket is None else ket
    _check_same_register(bra, ket)
    return complex(np.vdot(bra.amplitudes, apply_operator(ket, op).amplitudes))


# ---------------------------------------------------------------------------
# Reference state and pool exponentials
# ---------------------------------------------------------------------------


def prepare_hartree_fock(table: IntegralTable) -> Statevector:
    """Mean-field reference determinant as a computational basis state."""
    return Statevector.basis_state(table.num_modes, table.hf_occupation())


Rotation = tuple[float, tuple[tuple[int, str], ...]]  # (weight, letters)


def pool_rotations(tau: FermionOperator, num_qubits: int, tol: float = 1e-12) -> tuple[Rotation, ...]:
    """Decompose an anti-Hermitian generator into commuting Pauli rotations.

    Returns (w_j, string_j) with JW(tau) = sum_j i w_j P_j. Raises if tau is
    not anti-Hermitian or if the strings fail to commute pairwise (the
    exponential would silently Trotterize otherwise).
    """
    image = jordan_wigner(tau, num_qubits)
    rotations: list[Rotation] = []
    for t in image.terms:
        if abs(t.coefficient.real) > tol:
            raise ValueError(
                "generator is not anti-Hermitian: Pauli coefficient"
                f" {t.coefficient} has a real part"
            )
        rotations.append((t.coefficient.imag, t.letters))
    terms = image.terms
    for i in range(len(terms)):
        for j in range(i + 1, len(terms)):
            if not terms[i].commutes_with(terms[j]):
                raise ValueError(
                    "generator strings do not commute; exact product formula"
                    " does not apply"
                )
    return tuple(sorted(rotations, key=lambda r: r[1]))


def _rotate(amplitudes: np.ndarray, rotations: Sequence[Rotation], theta: float, num_qubits: int) -> np.ndarray:
    """exp(theta * sum_j i w_j P_j) |psi> as an exact product of rotations."""
    out = amplitudes
    for w, letters in rotations:
        phi = theta * w
        p_out = apply_pauli_string(out, letters, 1.0, num_qubits)
        out = np.cos(phi) * out + 1j * np.sin(phi) * p_out
    return out


def apply_pool_exponential(
    state: Statevector, tau: FermionOperator, theta: float
) -> Statevector:
    """Exact e^{theta tau}|psi> for an anti-Hermitian tau with mutually
    commuting Jordan-Wigner strings; unitary, so the norm is preserved."""
    rotations = pool_rotations(tau, state.num_qubits)
    return Statevector(
        _rotate(state.amplitudes, rotations, float(theta), state.num_qubits),
        state.num_qubits,
    )


def apply_rotations(
    state: Statevector, rotations: Sequence[Rotation], theta: float
) -> Statevector:
    """Fast path for precomputed pool rotations (see :func:`pool_rotations`)."""
    return Statevector(
        _rotate(state.amplitudes, rotations, float(theta), state.num_qubits),
        state.num_qubits,
    )


# ---------------------------------------------------------------------------
# Analytic parameter gradient
# ---------------------------------------------------------------------------


def ansatz_state(
    reference: Statevector,
    rotation_seq: Sequence[Sequence[Rotation]],
    thetas: Sequence[float],
) -> Statevector:
    amps = reference.amplitudes
    for rotations, theta in zip(rotation_seq, thetas):
        amps = _rotate(amps, rotations, float(theta), reference.num_qubits)
    return Statevector(amps, reference.num_qubits)


def energy_and_gradient(
    hamiltonian: QubitOperator | CompiledOperator,
    reference: Statevector,
    rotation_seq: Sequence[Sequence[Rotation]],
    generator_images: Sequence[QubitOperator | CompiledOperator],
    thetas: Sequence[float],
) -> tuple[float, np.ndarray]:
    """Energy and exact gradient of E(theta) = <ref|U^dag H U|ref> where
    U = e^{th_L tau_L} ... e^{th_1 tau_1}.

    Uses a reverse sweep: with |psi> = U|ref> and |lam> = H|psi>,
    dE/dth_l = 2 Re <lam_l| tau_l |psi_l>, unwinding one exponential per step;
    the cost is O(L) operator applications.
    """
    h = _as_compiled(hamiltonian)
    n = reference.num_qubits
    L = len(thetas)
    psi = ansatz_state(reference, rotation_seq, thetas).amplitudes
    lam = h.apply(psi)
    energy = float(np.vdot(psi, lam).real)
    grad = np.zeros(L)
    for l in range(L - 1, -1, -1):
        tau_psi = _apply_raw(generator_images[l], psi, n)
        grad[l] = 2.0 * float(np.vdot(lam, tau_psi).real)
        if l > 0:
            psi = _rotate(psi, rotation_seq[l], -float(thetas[l]), n)
            lam = _rotate(lam, rotation_seq[l], -float(thetas[l]), n)
    return energy, grad


def _apply_raw(
    op: QubitOperator | CompiledOperator, amplitudes: np.ndarray, num_qubits: int
) -> np.ndarray:
    if isinstance(op, CompiledOperator):
        return op.apply(amplitudes)
    out = np.zeros_like(amplitudes)
    for t in op.terms:
        out += apply_pauli_string(amplitudes, t.letters, t.coefficient, num_qubits)
    return out

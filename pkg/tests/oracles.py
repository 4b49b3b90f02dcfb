"""Independent reference implementations used only by the test suite.

Everything here deliberately avoids the library's Jordan-Wigner / Pauli
machinery: fermionic matrices are built straight from the occupation-number
basis with explicit parity counting, so agreement with the library is a real
cross-check rather than a tautology.
"""

from __future__ import annotations

import itertools

import numpy as np

from qpbands.operators import FermionOperator


def fermion_matrix(op: FermionOperator, num_modes: int) -> np.ndarray:
    """Dense matrix of a fermionic operator in the occupation basis.

    Basis index bit m is the occupation of mode m (little-endian), matching
    the library's statevector layout. Signs come from counting occupied
    modes below the acted-on mode.
    """
    dim = 2**num_modes
    out = np.zeros((dim, dim), dtype=complex)
    for term in op.terms:
        for col in range(dim):
            amp = term.coefficient
            state = col
            dead = False
            # factors act right-to-left on the ket
            for mode, dagger in reversed(term.factors):
                occupied = (state >> mode) & 1
                if dagger and occupied or (not dagger and not occupied):
                    dead = True
                    break
                parity = bin(state & ((1 << mode) - 1)).count("1")
                amp *= (-1) ** parity
                state ^= 1 << mode
            if not dead:
                out[state, col] += amp
    return out


def sector_bitstrings(num_modes: int, n_electrons: int, sz: float | None = None):
    """All occupation bitstrings with the given electron count (and Sz,
    counting even modes as spin-up, odd as spin-down)."""
    hits = []
    for bits in itertools.combinations(range(num_modes), n_electrons):
        if sz is not None:
            n_alpha = sum(1 for b in bits if b % 2 == 0)
            n_beta = len(bits) - n_alpha
            if abs(0.5 * (n_alpha - n_beta) - sz) > 1e-12:
                continue
        hits.append(sum(1 << b for b in bits))
    return sorted(hits)


def realspace_hubbard_ring_energy(
    n_sites: int, t: float, u: float, n_electrons: int, sz: float = 0.0
) -> float:
    """Ground energy of the 1D Hubbard ring by exact diagonalization in the
    site basis. Periodic hopping is summed bond-by-bond in both directions,
    so a 2-site ring carries an effective 2t bond and a 1-site ring reduces
    to an on-site -2t shift, consistent with the band dispersion
    -2t cos(2 pi n / N).
    """
    mode = lambda site, spin: 2 * site + spin  # noqa: E731

    h = FermionOperator.zero()
    for i in range(n_sites):
        j = (i + 1) % n_sites
        for s in (0, 1):
            h = h + FermionOperator.from_factors(
                -t, ((mode(i, s), True), (mode(j, s), False))
            )
            h = h + FermionOperator.from_factors(
                -t, ((mode(j, s), True), (mode(i, s), False))
            )
    for i in range(n_sites):
        h = h + FermionOperator.from_factors(
            u,
            (
                (mode(i, 0), True),
                (mode(i, 0), False),
                (mode(i, 1), True),
                (mode(i, 1), False),
            ),
        )
    mat = fermion_matrix(h, 2 * n_sites)
    idx = sector_bitstrings(2 * n_sites, n_electrons, sz)
    block = mat[np.ix_(idx, idx)]
    return float(np.linalg.eigvalsh(block)[0])


def central_difference(fun, x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central finite-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    for i in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp[i] += h
        xm[i] -= h
        grad[i] = (fun(xp) - fun(xm)) / (2 * h)
    return grad


def random_fermion_operator(
    rng: np.random.Generator, num_modes: int, n_terms: int = 4, max_len: int = 3
) -> FermionOperator:
    op = FermionOperator.zero()
    for _ in range(n_terms):
        length = int(rng.integers(1, max_len + 1))
        factors = tuple(
            (int(rng.integers(0, num_modes)), bool(rng.integers(0, 2)))
            for _ in range(length)
        )
        coeff = complex(rng.normal(), rng.normal())
        op = op + FermionOperator.from_factors(coeff, factors)
    return op

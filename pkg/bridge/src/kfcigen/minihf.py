"""Self-contained restricted Hartree-Fock for s-type Gaussian bases.

Closed-form one- and two-electron integrals over contracted s Gaussians
(Boys-function based), an SCF loop, and the MO transform. This covers
hydrogen-only systems in minimal bases; anything heavier needs a real
electronic-structure engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# STO-3G hydrogen 1s: (exponent, contraction) pairs, standard tabulation
STO3G_H = (
    (3.42525091, 0.15432897),
    (0.62391373, 0.53532814),
    (0.16885540, 0.44463454),
)


@dataclass(frozen=True)
class Atom:
    charge: float
    xyz: tuple[float, float, float]  # Bohr


@dataclass(frozen=True)
class SFunction:
    center: tuple[float, float, float]
    primitives: tuple[tuple[float, float], ...]  # (exponent, coefficient)


def hydrogen_molecule(positions: list[tuple[float, float, float]]):
    atoms = [Atom(1.0, tuple(p)) for p in positions]
    basis = [SFunction(tuple(p), STO3G_H) for p in positions]
    return atoms, basis


def _norm(alpha: float) -> float:
    return (2.0 * alpha / math.pi) ** 0.75


def _dist2(a, b) -> float:
    return sum((x - y) ** 2 for x, y in zip(a, b))


def boys0(t: float) -> float:
    if t < 1e-12:
        return 1.0 - t / 3.0
    return 0.5 * math.sqrt(math.pi / t) * math.erf(math.sqrt(t))


def _gaussian_product(alpha, ra, beta, rb):
    p = alpha + beta
    center = tuple((alpha * a + beta * b) / p for a, b in zip(ra, rb))
    pre = math.exp(-alpha * beta / p * _dist2(ra, rb))
    return p, center, pre


def overlap_kinetic(basis: list[SFunction]):
    n = len(basis)
    s = np.zeros((n, n))
    t = np.zeros((n, n))
    for i, bi in enumerate(basis):
        for j, bj in enumerate(basis):
            sij = tij = 0.0
            for alpha, ca in bi.primitives:
                for beta, cb in bj.primitives:
                    p, _, pre = _gaussian_product(alpha, bi.center, beta, bj.center)
                    coeff = ca * cb * _norm(alpha) * _norm(beta)
                    s0 = coeff * (math.pi / p) ** 1.5 * pre
                    sij += s0
                    mu = alpha * beta / p
                    tij += s0 * mu * (3.0 - 2.0 * mu * _dist2(bi.center, bj.center))
            s[i, j] = sij
            t[i, j] = tij
    return s, t


def nuclear_attraction(basis: list[SFunction], atoms: list[Atom]):
    n = len(basis)
    v = np.zeros((n, n))
    for i, bi in enumerate(basis):
        for j, bj in enumerate(basis):
            vij = 0.0
            for alpha, ca in bi.primitives:
                for beta, cb in bj.primitives:
                    p, center, pre = _gaussian_product(alpha, bi.center, beta, bj.center)
                    coeff = ca * cb * _norm(alpha) * _norm(beta)
                    for atom in atoms:
                        vij -= (
                            coeff
                            * atom.charge
                            * 2.0
                            * math.pi
                            / p
                            * pre
                            * boys0(p * _dist2(center, atom.xyz))
                        )
            v[i, j] = vij
    return v


def electron_repulsion(basis: list[SFunction]):
    n = len(basis)
    eri = np.zeros((n, n, n, n))
    for i, bi in enumerate(basis):
        for j, bj in enumerate(basis):
            for k, bk in enumerate(basis):
                for l, bl in enumerate(basis):
                    total = 0.0
                    for alpha, ca in bi.primitives:
                        for beta, cb in bj.primitives:
                            p, rp, pre_p = _gaussian_product(
                                alpha, bi.center, beta, bj.center
                            )
                            for gamma, cc in bk.primitives:
                                for delta, cd in bl.primitives:
                                    q, rq, pre_q = _gaussian_product(
                                        gamma, bk.center, delta, bl.center
                                    )
                                    coeff = (
                                        ca
                                        * cb
                                        * cc
                                        * cd
                                        * _norm(alpha)
                                        * _norm(beta)
                                        * _norm(gamma)
                                        * _norm(delta)
                                    )
                                    t_arg = p * q / (p + q) * _dist2(rp, rq)
                                    total += (
                                        coeff
                                        * 2.0
                                        * math.pi**2.5
                                        / (p * q * math.sqrt(p + q))
                                        * pre_p
                                        * pre_q
                                        * boys0(t_arg)
                                    )
                    eri[i, j, k, l] = total
    return eri


def nuclear_repulsion(atoms: list[Atom]) -> float:
    e = 0.0
    for i, a in enumerate(atoms):
        for b in atoms[i + 1 :]:
            e += a.charge * b.charge / math.sqrt(_dist2(a.xyz, b.xyz))
    return e


@dataclass
class ScfResult:
    energy: float  # total (electronic + nuclear), Hartree
    e_nuc: float
    mo_coeff: np.ndarray
    mo_energy: np.ndarray
    h_mo: np.ndarray  # one-electron integrals, MO basis
    eri_mo: np.ndarray  # chemist-notation (ij|kl), MO basis
    converged: bool


def rhf(atoms: list[Atom], basis: list[SFunction], n_electrons: int,
        max_cycles: int = 200, tol: float = 1e-12) -> ScfResult:
    """Closed-shell SCF with symmetric orthogonalization and density damping."""
    if n_electrons % 2:
        raise ValueError("restricted HF needs an even electron count")
    nocc = n_electrons // 2
    s, t = overlap_kinetic(basis)
    v = nuclear_attraction(basis, atoms)
    eri = electron_repulsion(basis)
    hcore = t + v
    e_nuc = nuclear_repulsion(atoms)

    s_eigs, s_vecs = np.linalg.eigh(s)
    x = s_vecs / np.sqrt(s_eigs)
    density = np.zeros_like(s)
    energy = 0.0
    converged = False
    mo_coeff = None
    mo_energy = None
    for _ in range(max_cycles):
        coulomb = np.einsum("pqrs,rs->pq", eri, density)
        exchange = np.einsum("prqs,rs->pq", eri, density)
        fock = hcore + coulomb - 0.5 * exchange
        f_ortho = x.T @ fock @ x
        mo_energy, c_ortho = np.linalg.eigh(f_ortho)
        mo_coeff = x @ c_ortho
        occ = mo_coeff[:, :nocc]
        new_density = 2.0 * occ @ occ.T
        new_energy = float(0.5 * np.sum(new_density * (hcore + fock)))
        if abs(new_energy - energy) < tol and np.max(np.abs(new_density - density)) < 1e-10:
            density, energy = new_density, new_energy
            converged = True
            break
        density, energy = new_density, new_energy
    h_mo = mo_coeff.T @ hcore @ mo_coeff
    eri_mo = np.einsum(
        "pqrs,pi,qj,rk,sl->ijkl", eri, mo_coeff, mo_coeff, mo_coeff, mo_coeff,
        optimize=True,
    )
    return ScfResult(
        energy=energy + e_nuc,
        e_nuc=e_nuc,
        mo_coeff=mo_coeff,
        mo_energy=np.asarray(mo_energy),
        h_mo=h_mo,
        eri_mo=eri_mo,
        converged=converged,
    )

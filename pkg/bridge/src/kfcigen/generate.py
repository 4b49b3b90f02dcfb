"""Fixture generation: drive an electronic-structure engine (PySCF when
available, a built-in s-Gaussian RHF otherwise) and emit k-FCIDUMP files.

The emitted two-body value g[p kp, q kq, r kr, s ks] multiplies
``adag_{p sigma} adag_{q sigma'} a_{r sigma'} a_{s sigma}`` with a global 1/2
prefactor, i.e. g[p, q, r, s] = (p s | q r) in chemist notation. Entries whose
magnitude falls below ``DROP_TOL`` are dropped (for k-adapted orbitals these
are exactly the momentum-violating ones, which vanish to integration noise).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .minihf import hydrogen_molecule, rhf

DROP_TOL = 1e-10

ANGSTROM_TO_BOHR = 1.8897261246257702

#: experimental lattice constants (Angstrom)
LATTICE_CONSTANTS = {"si": 5.431, "diamond": 3.567}


class EngineUnavailableError(RuntimeError):
    """The requested system needs an engine that is not importable here."""


@dataclass(frozen=True)
class SystemRecipe:
    system: str  # hchain | si | diamond
    mesh: tuple[int, int, int] = (1, 1, 1)
    kshift: tuple[int, int, int] = (0, 0, 0)
    basis: str = "gth-szv"
    pseudo: str = "gth-pade"
    bond_bohr: float = 1.4  # H-H distance for hchain

    def __post_init__(self):
        if self.system not in ("hchain", "si", "diamond"):
            raise ValueError(f"unknown system {self.system!r}")
        if any(d < 1 for d in self.mesh):
            raise ValueError(f"bad mesh {self.mesh}")


def _pyscf_available() -> bool:
    try:
        import pyscf  # noqa: F401

        return True
    except ImportError:
        return False


def generate_fixture(recipe: SystemRecipe, out: str | os.PathLike) -> None:
    """Run the engine for a recipe and write the fixture to ``out``."""
    if _pyscf_available():
        _generate_with_pyscf(recipe, out)
        return
    if recipe.system == "hchain" and recipe.mesh == (1, 1, 1) and recipe.kshift == (0, 0, 0):
        _generate_hchain_builtin(recipe, out)
        return
    raise EngineUnavailableError(
        f"system {recipe.system!r} with mesh {recipe.mesh} needs PySCF, which is"
        " not importable in this environment"
    )


# ---------------------------------------------------------------------------
# Built-in molecular path (isolated unit cell, s-Gaussian RHF)
# ---------------------------------------------------------------------------


def _generate_hchain_builtin(recipe: SystemRecipe, out: str | os.PathLike) -> None:
    """Isolated two-atom hydrogen cell in STO-3G at the gamma point.

    This is the single-k-point molecular limit of the hydrogen chain: no
    periodic images, real canonical MOs, 2 spatial orbitals = 4 spin
    orbitals.
    """
    r = recipe.bond_bohr
    atoms, basis = hydrogen_molecule([(0.0, 0.0, 0.0), (0.0, 0.0, r)])
    scf = rhf(atoms, basis, n_electrons=2)
    if not scf.converged:
        raise RuntimeError("built-in SCF did not converge")
    comment = (
        "generator: kfcigen built-in s-Gaussian RHF (PySCF unavailable)\n"
        f"system: isolated H2 cell, STO-3G, R(H-H) = {r} Bohr\n"
        "orbitals: canonical RHF MOs at the gamma point"
    )
    _write_molecular_fixture(
        out,
        h_mo=scf.h_mo,
        eri_mo_chemist=scf.eri_mo,
        e_nuc=scf.e_nuc,
        ehf=scf.energy,
        n_electrons=2,
        comment=comment,
    )


def _write_molecular_fixture(
    out, h_mo: np.ndarray, eri_mo_chemist: np.ndarray, e_nuc: float,
    ehf: float, n_electrons: int, comment: str,
) -> None:
    n_orb = h_mo.shape[0]
    lines = []
    for line in comment.splitlines():
        lines.append(f"# {line}")
    lines.append(
        f"&KFCI NORB={n_orb} NELEC={n_electrons} MESH=1,1,1"
        f" EHF={ehf!r} ECONST={e_nuc!r} /"
    )
    for p in range(n_orb):
        for q in range(n_orb):
            value = float(h_mo[p, q])
            if abs(value) < DROP_TOL:
                continue
            lines.append(f"{value!r} 0.0 {p + 1} 0 {q + 1} 0 0 0 0 0")
    # stored g[p,q,r,s] = (p s | q r): chemist (ij|kl) with i=p, j=s, k=q, l=r
    for p in range(n_orb):
        for q in range(n_orb):
            for r in range(n_orb):
                for s in range(n_orb):
                    value = float(eri_mo_chemist[p, s, q, r])
                    if abs(value) < DROP_TOL:
                        continue
                    lines.append(
                        f"{value!r} 0.0 {p + 1} 0 {q + 1} 0 {r + 1} 0 {s + 1} 0"
                    )
    lines.append(f"{e_nuc!r} 0.0 0 0 0 0 0 0 0 0")
    with open(out, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# PySCF path (periodic systems; requires the engine)
# ---------------------------------------------------------------------------


def _geometry(recipe: SystemRecipe):
    if recipe.system == "hchain":
        # two H per cell along z, wide vacuum in x/y
        r = recipe.bond_bohr / ANGSTROM_TO_BOHR
        cell_z = 2 * r
        return (
            [("H", (0.0, 0.0, 0.0)), ("H", (0.0, 0.0, r))],
            [[8.0, 0, 0], [0, 8.0, 0], [0, 0, cell_z]],
        )
    a = LATTICE_CONSTANTS[recipe.system]
    species = "Si" if recipe.system == "si" else "C"
    atoms = [
        (species, (0.0, 0.0, 0.0)),
        (species, (a / 4.0, a / 4.0, a / 4.0)),
    ]
    lattice = [[0, a / 2, a / 2], [a / 2, 0, a / 2], [a / 2, a / 2, 0]]
    return atoms, lattice


def _generate_with_pyscf(recipe: SystemRecipe, out) -> None:
    from pyscf.pbc import gto, scf
    from pyscf import ao2mo

    atoms, lattice = _geometry(recipe)
    cell = gto.Cell()
    cell.atom = atoms
    cell.a = lattice
    cell.basis = recipe.basis
    cell.pseudo = recipe.pseudo
    cell.unit = "A"
    cell.verbose = 0
    cell.build()

    mesh = recipe.mesh
    kpts = cell.make_kpts(
        mesh, scaled_center=[s / d for s, d in zip(recipe.kshift, mesh)]
    )
    mf = scf.KRHF(cell, kpts=kpts).density_fit()
    ehf = mf.kernel()
    if not mf.converged:
        raise RuntimeError("PySCF mean-field did not converge")

    nk = len(kpts)
    n_orb = mf.mo_coeff[0].shape[1]
    lines = [
        f"# generator: kfcigen + PySCF KRHF, basis={recipe.basis}, pseudo={recipe.pseudo}",
        f"# system: {recipe.system}, mesh={mesh}, kshift={recipe.kshift}",
    ]
    e_nuc = float(cell.energy_nuc())
    lines.append(
        f"&KFCI NORB={n_orb} NELEC={int(cell.nelectron)} MESH={mesh[0]},{mesh[1]},{mesh[2]}"
        f" EHF={float(ehf.real)!r} ECONST={e_nuc!r} /"
    )

    # one-body: mo_k^dag hcore_k mo_k, diagonal in k
    hcore = mf.get_hcore()
    for kidx in range(nk):
        h_mo = mf.mo_coeff[kidx].conj().T @ hcore[kidx] @ mf.mo_coeff[kidx]
        for p in range(n_orb):
            for q in range(n_orb):
                value = complex(h_mo[p, q])
                if abs(value) < DROP_TOL:
                    continue
                lines.append(
                    f"{value.real!r} {value.imag!r} {p + 1} {kidx} {q + 1} {kidx} 0 0 0 0"
                )

    # two-body: chemist (p kp, s ks | q kq, r kr) with momentum conservation
    scaled = cell.get_scaled_kpts(kpts)
    lin = {
        kidx: tuple(
            int(x) % d
            for x, d in zip(np.rint(scaled[kidx] * np.asarray(mesh)).astype(int), mesh)
        )
        for kidx in range(nk)
    }
    index_of = {v: k for k, v in lin.items()}
    with_df = mf.with_df
    for kp in range(nk):
        for kq in range(nk):
            for ks in range(nk):
                # crystal momentum conservation: kr = kp + kq - ks (mod mesh)
                target = tuple(
                    (lin[kp][d] + lin[kq][d] - lin[ks][d]) % mesh[d] for d in range(3)
                )
                kr = index_of.get(target)
                if kr is None:
                    continue
                eri = with_df.ao2mo(
                    (
                        mf.mo_coeff[kp],
                        mf.mo_coeff[ks],
                        mf.mo_coeff[kq],
                        mf.mo_coeff[kr],
                    ),
                    kpts=[kpts[kp], kpts[ks], kpts[kq], kpts[kr]],
                    compact=False,
                ).reshape(n_orb, n_orb, n_orb, n_orb) / nk
                for p in range(n_orb):
                    for s in range(n_orb):
                        for q in range(n_orb):
                            for r in range(n_orb):
                                value = complex(eri[p, s, q, r])
                                if abs(value) < DROP_TOL:
                                    continue
                                lines.append(
                                    f"{value.real!r} {value.imag!r}"
                                    f" {p + 1} {kp} {q + 1} {kq} {r + 1} {kr} {s + 1} {ks}"
                                )
    lines.append(f"{e_nuc!r} 0.0 0 0 0 0 0 0 0 0")
    with open(out, "w", encoding="utf-8") as handle:
        handle.write("\n".join(lines) + "\n")

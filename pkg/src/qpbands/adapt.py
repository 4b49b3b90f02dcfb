"""Adaptive variational ground-state solver with a complementary operator pool.

The ansatz grows one anti-Hermitian generator at a time, picked by the
largest residual gradient <psi|[H, tau_i]|psi|>, and all angles are
re-optimized jointly after each growth step. The standard pool holds
excitation-minus-deexcitation generators ``T - T^dag``; the complementary
pool adds ``i(T + T^dag)`` partners, which probe the imaginary directions
that real-angle exponentials of the standard pool cannot reach. This removes
the stall that otherwise appears for complex-valued integral tables, where
the standard criterion only enforces the real part of the contracted
Schroedinger condition.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.optimize

from .lattice import IntegralTable, build_hamiltonian, momentum_allowed
from .operators import FermionOperator, QubitOperator, jordan_wigner
from .simulator import (
    CompiledOperator,
    Rotation,
    Statevector,
    ansatz_state,
    apply_pauli_string,
    energy_and_gradient,
    expectation,
    pool_rotations,
    prepare_hartree_fock,
    string_masks,
)

ENERGY_INCREASE_SLACK = 1e-10


class AdaptError(RuntimeError):
    """Solver-level failure (optimizer breakdown, inconsistent inputs)."""


@dataclass(frozen=True)
class PoolEntry:
    label: str
    tau: FermionOperator
    image: QubitOperator
    rotations: tuple[Rotation, ...]
    complementary: bool
    #: per Pauli string of the image: (flip mask, Y|Z mask, coeff * i^nY),
    #: precomputed for the grouped gradient screen
    screen_data: tuple[tuple[int, int, complex], ...] = ()


@dataclass(frozen=True)
class OperatorPool:
    entries: tuple[PoolEntry, ...]
    kind: str  # "sd" or "gsd"
    complemented: bool
    num_modes: int

    def __len__(self) -> int:
        return len(self.entries)

    def by_label(self, label: str) -> PoolEntry:
        for entry in self.entries:
            if entry.label == label:
                return entry
        raise KeyError(f"no pool entry labeled {label!r}")


def _mode_info(table: IntegralTable):
    modes = range(table.num_modes)
    k_of = {m: table.k_of_mode(m) for m in modes}
    spin_of = {m: m % 2 for m in modes}
    return list(modes), k_of, spin_of


def _single_indices(table: IntegralTable, kind: str) -> list[tuple[int, int]]:
    """(p, q) pairs for adag_p a_q singles, momentum- and Sz-conserving."""
    modes, k_of, spin_of = _mode_info(table)
    mesh = table.mesh
    if kind == "sd":
        occ = set(table.hf_occupation())
        creation = [m for m in modes if m not in occ]
        annihilation = sorted(occ)
        pairs = [(a, i) for a in creation for i in annihilation]
    else:
        pairs = [(p, q) for p in modes for q in modes if p > q]
    return [
        (p, q)
        for p, q in pairs
        if spin_of[p] == spin_of[q]
        and momentum_allowed([k_of[p]], [k_of[q]], mesh)
    ]


def _double_indices(
    table: IntegralTable, kind: str
) -> list[tuple[int, int, int, int]]:
    """(p, q, r, s) with p < q, r < s for adag_p adag_q a_r a_s doubles."""
    modes, k_of, spin_of = _mode_info(table)
    mesh = table.mesh

    def sz_pair(a, b):
        return (1 - 2 * spin_of[a]) + (1 - 2 * spin_of[b])

    if kind == "sd":
        occ = sorted(set(table.hf_occupation()))
        virt = [m for m in modes if m not in occ]
        c_pairs = [(a, b) for i, a in enumerate(virt) for b in virt[i + 1 :]]
        a_pairs = [(i, j) for x, i in enumerate(occ) for j in occ[x + 1 :]]
        combos = [(c, a) for c in c_pairs for a in a_pairs]
    else:
        pairs = [(a, b) for a in modes for b in modes if a < b]
        combos = [(c, a) for c in pairs for a in pairs if c < a]
    out = []
    for (p, q), (r, s) in combos:
        if sz_pair(p, q) != sz_pair(r, s):
            continue
        if not momentum_allowed([k_of[p], k_of[q]], [k_of[r], k_of[s]], mesh):
            continue
        out.append((p, q, r, s))
    return out


def build_pool(
    table: IntegralTable, kind: str = "gsd", complemented: bool = True
) -> OperatorPool:
    """Construct the operator pool for a table.

    kind="sd" restricts to occupied->virtual excitations of the reference
    determinant; kind="gsd" uses general orbital indices. With
    ``complemented`` the pool size doubles exactly: every generator gains its
    i(T + T^dag) partner.
    """
    if kind not in ("sd", "gsd"):
        raise ValueError(f"pool kind must be 'sd' or 'gsd', got {kind!r}")
    n = table.num_modes

    generators: list[tuple[str, str, FermionOperator]] = []
    for p, q in _single_indices(table, kind):
        generators.append(
            (
                f"s[{p}<-{q}]",
                f"cs[{p}~{q}]",
                FermionOperator.from_factors(1.0, ((p, True), (q, False))),
            )
        )
    for p, q, r, s in _double_indices(table, kind):
        generators.append(
            (
                f"d[{p},{q}<-{r},{s}]",
                f"cd[{p},{q}~{r},{s}]",
                FermionOperator.from_factors(
                    1.0, ((p, True), (q, True), (r, False), (s, False))
                ),
            )
        )

    def make_entry(label: str, t_op: FermionOperator, complementary: bool) -> PoolEntry:
        tau = 1j * (t_op + t_op.adjoint()) if complementary else t_op - t_op.adjoint()
        if not (tau + tau.adjoint()).is_zero(1e-12):
            raise AdaptError(f"pool entry {label} is not anti-Hermitian")
        image = jordan_wigner(tau, n)
        if image.is_zero():
            raise AdaptError(f"pool entry {label} vanished unexpectedly")
        screen = []
        for t in image.terms:
            flip, yz, ny = string_masks(t.letters)
            screen.append((flip, yz, t.coefficient * 1j**ny))
        return PoolEntry(
            label, tau, image, pool_rotations(tau, n), complementary, tuple(screen)
        )

    entries = [make_entry(label, t_op, False) for label, _, t_op in generators]
    if complemented:
        entries += [make_entry(clabel, t_op, True) for _, clabel, t_op in generators]
    return OperatorPool(tuple(entries), kind, complemented, n)


@dataclass(frozen=True)
class AdaptIteration:
    iteration: int
    label: str | None
    max_abs_gradient: float
    gradient_norm: float
    energy: float


@dataclass
class AdaptAnsatz:
    """Ordered generators with real angles, plus the solve history."""

    pool: OperatorPool
    reference: Statevector
    entries: list[PoolEntry] = field(default_factory=list)
    thetas: np.ndarray = field(default_factory=lambda: np.zeros(0))
    energy: float = math.nan
    history: list[AdaptIteration] = field(default_factory=list)
    converged: bool = False
    gradient_norm: float = math.nan

    def state(self, thetas: Sequence[float] | None = None) -> Statevector:
        thetas = self.thetas if thetas is None else np.asarray(thetas, dtype=float)
        return ansatz_state(
            self.reference, [e.rotations for e in self.entries], thetas
        )

    @property
    def labels(self) -> list[str]:
        return [e.label for e in self.entries]

    def to_checkpoint(self) -> dict:
        return {
            "pool_kind": self.pool.kind,
            "pool_complemented": self.pool.complemented,
            "num_modes": self.pool.num_modes,
            "labels": self.labels,
            "thetas": [float(t) for t in self.thetas],
            "energy": self.energy,
            "gradient_norm": self.gradient_norm,
            "converged": self.converged,
            "history": [
                {
                    "iteration": h.iteration,
                    "label": h.label,
                    "max_abs_gradient": h.max_abs_gradient,
                    "gradient_norm": h.gradient_norm,
                    "energy": h.energy,
                }
                for h in self.history
            ],
        }


def save_checkpoint(ansatz: AdaptAnsatz, path: str | os.PathLike):
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(ansatz.to_checkpoint(), handle, indent=1, sort_keys=True)
        handle.write("\n")


def load_checkpoint(path: str | os.PathLike, table: IntegralTable) -> AdaptAnsatz:
    """Rebuild an ansatz from a checkpoint; the pool is reconstructed from the
    table, so the checkpoint must match the table's register."""
    with open(path, "r", encoding="utf-8") as handle:
        data = json.load(handle)
    if data["num_modes"] != table.num_modes:
        raise AdaptError(
            f"checkpoint was written for {data['num_modes']} modes,"
            f" table has {table.num_modes}"
        )
    pool = build_pool(table, data["pool_kind"], data["pool_complemented"])
    ansatz = AdaptAnsatz(pool=pool, reference=prepare_hartree_fock(table))
    ansatz.entries = [pool.by_label(label) for label in data["labels"]]
    ansatz.thetas = np.asarray(data["thetas"], dtype=float)
    ansatz.energy = data["energy"]
    ansatz.gradient_norm = data["gradient_norm"]
    ansatz.converged = data["converged"]
    ansatz.history = [
        AdaptIteration(
            h["iteration"],
            h["label"],
            h["max_abs_gradient"],
            h["gradient_norm"],
            h["energy"],
        )
        for h in data["history"]
    ]
    return ansatz


def energy_gradient(
    ansatz: AdaptAnsatz,
    hamiltonian: QubitOperator | CompiledOperator,
    reference: Statevector | None = None,
) -> np.ndarray:
    """Exact dE/dtheta_l for every ansatz angle (reverse-sweep evaluation)."""
    _, grad = energy_and_gradient(
        hamiltonian,
        reference or ansatz.reference,
        [e.rotations for e in ansatz.entries],
        [e.image for e in ansatz.entries],
        ansatz.thetas,
    )
    return grad


def _fwht(values: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform:
    out[m] = sum_n (-1)^popcount(m & n) values[n]."""
    out = values.copy()
    size = out.size
    h = 1
    while h < size:
        out = out.reshape(size // (2 * h), 2, h)
        top = out[:, 0, :].copy()
        bottom = out[:, 1, :].copy()
        out[:, 0, :] = top + bottom
        out[:, 1, :] = top - bottom
        out = out.reshape(size)
        h *= 2
    return out


def residual_gradients(
    ansatz: AdaptAnsatz,
    hamiltonian: QubitOperator | CompiledOperator,
    pool: OperatorPool | None = None,
) -> np.ndarray:
    """<psi|[H, tau_i]|psi> for every pool entry; exactly real because tau is
    anti-Hermitian and H Hermitian.

    Screening is grouped by X/Y flip mask: for a fixed mask every string sum
    <H psi|P|psi> is a Walsh-Hadamard coefficient of one gathered vector, so
    entries sharing a support are screened with one transform instead of one
    statevector pass per string.
    """
    pool = pool or ansatz.pool
    psi = ansatz.state()
    h = hamiltonian if isinstance(hamiltonian, CompiledOperator) else CompiledOperator(hamiltonian)
    hpsi_conj = np.conj(h.apply(psi.amplitudes))
    amps = psi.amplitudes
    idx = np.arange(amps.size, dtype=np.uint64)

    by_flip: dict[int, list[tuple[int, int, complex]]] = {}
    for i, entry in enumerate(pool.entries):
        if not entry.screen_data:  # entries built outside build_pool
            return _residual_gradients_plain(pool, amps, hpsi_conj, psi.num_qubits)
        for flip, yz, eff in entry.screen_data:
            by_flip.setdefault(flip, []).append((i, yz, eff))

    acc = np.zeros(len(pool.entries), dtype=complex)
    for flip, items in by_flip.items():
        gathered = hpsi_conj[idx ^ np.uint64(flip)] * amps
        transformed = _fwht(gathered)
        for i, yz, eff in items:
            acc[i] += eff * transformed[yz]
    return 2.0 * acc.real


def _residual_gradients_plain(
    pool: OperatorPool, amps: np.ndarray, hpsi_conj: np.ndarray, num_qubits: int
) -> np.ndarray:
    out = np.zeros(len(pool.entries))
    for i, entry in enumerate(pool.entries):
        tau_psi = np.zeros_like(amps)
        for t in entry.image.terms:
            tau_psi += apply_pauli_string(amps, t.letters, t.coefficient, num_qubits)
        out[i] = 2.0 * float(np.dot(hpsi_conj, tau_psi).real)
    return out


@dataclass(frozen=True)
class OptimizerOptions:
    gtol: float = 1e-8
    maxiter: int = 2000


def _optimize(
    ansatz: AdaptAnsatz,
    h: CompiledOperator,
    options: OptimizerOptions,
    iteration: int,
) -> tuple[np.ndarray, float]:
    rotation_seq = [e.rotations for e in ansatz.entries]
    images = [e.image for e in ansatz.entries]

    def objective(thetas):
        return energy_and_gradient(h, ansatz.reference, rotation_seq, images, thetas)

    result = scipy.optimize.minimize(
        objective,
        np.asarray(ansatz.thetas, dtype=float),
        jac=True,
        method="L-BFGS-B",
        options={"gtol": options.gtol, "maxiter": options.maxiter},
    )
    if not result.success:
        raise AdaptError(
            f"angle optimization failed at growth step {iteration}:"
            f" {result.message} (nit={result.nit}, |g|={np.linalg.norm(result.jac):.3e})"
        )
    return np.asarray(result.x, dtype=float), float(result.fun)


def adapt_step(
    ansatz: AdaptAnsatz,
    hamiltonian: QubitOperator | CompiledOperator,
    pool: OperatorPool | None = None,
    options: OptimizerOptions = OptimizerOptions(),
) -> AdaptAnsatz:
    """One growth step: append the largest-|gradient| generator at angle zero
    and re-minimize all angles jointly. Ties pick the lowest pool index."""
    pool = pool or ansatz.pool
    h = hamiltonian if isinstance(hamiltonian, CompiledOperator) else CompiledOperator(hamiltonian)
    grads = residual_gradients(ansatz, h, pool)
    return _grow_and_optimize(ansatz, h, pool, grads, options)


def _grow_and_optimize(
    ansatz: AdaptAnsatz,
    h: CompiledOperator,
    pool: OperatorPool,
    grads: np.ndarray,
    options: OptimizerOptions,
) -> AdaptAnsatz:
    pick = int(np.argmax(np.abs(grads)))  # argmax returns the first maximum
    new = AdaptAnsatz(
        pool=pool,
        reference=ansatz.reference,
        entries=ansatz.entries + [pool.entries[pick]],
        thetas=np.concatenate([ansatz.thetas, [0.0]]),
        history=list(ansatz.history),
    )
    iteration = len(new.entries)
    previous_energy = ansatz.energy
    new.thetas, new.energy = _optimize(new, h, options, iteration)
    if not math.isnan(previous_energy) and new.energy > previous_energy + ENERGY_INCREASE_SLACK:
        raise AdaptError(
            f"energy increased at growth step {iteration}:"
            f" {previous_energy} -> {new.energy}"
        )
    new.history.append(
        AdaptIteration(
            iteration,
            pool.entries[pick].label,
            float(np.max(np.abs(grads))),
            float(np.linalg.norm(grads)),
            new.energy,
        )
    )
    return new


def adapt_solve(
    table: IntegralTable,
    hamiltonian: QubitOperator | None = None,
    pool: OperatorPool | None = None,
    eps: float = 1e-3,
    max_iter: int = 200,
    options: OptimizerOptions = OptimizerOptions(),
    resume_from: AdaptAnsatz | None = None,
) -> AdaptAnsatz:
    """Grow the ansatz until the residual-gradient norm drops below ``eps``
    (Hartree) or ``max_iter`` growth steps have been taken.

    A non-converged result is returned with ``converged=False`` rather than
    raised, so callers can still inspect the history. Pass a loaded
    checkpoint as ``resume_from`` to continue a previous solve.
    """
    hamiltonian = hamiltonian if hamiltonian is not None else build_hamiltonian(table)
    h = CompiledOperator(hamiltonian)
    if resume_from is not None:
        ansatz = resume_from
        pool = ansatz.pool
        ansatz.converged = False
    else:
        pool = pool or build_pool(table)
        reference = prepare_hartree_fock(table)
        ansatz = AdaptAnsatz(pool=pool, reference=reference)
        ansatz.energy = float(expectation(reference, h).real)
    while True:
        grads = residual_gradients(ansatz, h, pool)
        ansatz.gradient_norm = float(np.linalg.norm(grads))
        if ansatz.gradient_norm < eps:
            ansatz.converged = True
            ansatz.history.append(
                AdaptIteration(
                    len(ansatz.entries),
                    None,
                    float(np.max(np.abs(grads))) if len(grads) else 0.0,
                    ansatz.gradient_norm,
                    ansatz.energy,
                )
            )
            return ansatz
        if len(ansatz.entries) >= max_iter:
            ansatz.converged = False
            return ansatz
        ansatz = _grow_and_optimize(ansatz, h, pool, grads, options)

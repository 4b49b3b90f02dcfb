"""Noisy replay of a converged ansatz on a density matrix, shot-sampled
expectation values, and zero-noise extrapolation.

Noise model: after every Pauli-string rotation of the ansatz, a single-qubit
depolarizing channel with parameter ``scale * lambda`` hits each qubit in the
string's support. Noise amplification is done by scaling the channel
parameter (not by gate folding), which produces the same linear-in-lambda
leading error that a linear zero-noise fit targets, while staying exact and
deterministic in expectation.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .eom import ExcitationBasis, QseProblem, QseSolution, solve_qse
from .operators import PauliTerm, QubitOperator, jordan_wigner
from .simulator import Statevector, string_masks

MAX_DM_QUBITS = 12

_H_GATE = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_Y_GATE = np.array([[1, -1j], [1, 1j]], dtype=complex) / math.sqrt(2)


@dataclass(frozen=True)
class NoiseSpec:
    """Depolarizing strength, amplification scales, and sampling sizes."""

    lam: float = 0.001
    scale_factors: tuple[float, ...] = (1.0, 1.25, 1.5)
    shots: int = 2**17
    repeats: int = 16
    extrapolation: str = "linear"

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"depolarizing parameter must be in [0, 1]: {self.lam}")
        scales = tuple(float(s) for s in self.scale_factors)
        if len(scales) < 1 or scales[0] != 1.0 or list(scales) != sorted(scales):
            raise ValueError(
                f"scale factors must be ascending and start at 1.0: {scales}"
            )
        if self.extrapolation != "linear":
            raise ValueError(f"unsupported extrapolation {self.extrapolation!r}")
        object.__setattr__(self, "scale_factors", scales)


class DensityMatrix:
    """2^n x 2^n density operator with basic invariant checks."""

    __slots__ = ("matrix", "num_qubits")

    def __init__(self, matrix: np.ndarray, num_qubits: int):
        matrix = np.asarray(matrix, dtype=complex)
        if matrix.shape != (2**num_qubits, 2**num_qubits):
            raise ValueError(f"matrix shape {matrix.shape} mismatches {num_qubits} qubits")
        if num_qubits > MAX_DM_QUBITS:
            raise ValueError(
                f"density matrix of {num_qubits} qubits exceeds the guard"
                f" ({MAX_DM_QUBITS})"
            )
        self.matrix = matrix
        self.num_qubits = num_qubits

    @classmethod
    def from_statevector(cls, state: Statevector) -> "DensityMatrix":
        return cls(np.outer(state.amplitudes, state.amplitudes.conj()), state.num_qubits)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def check(self, tol: float = 1e-10):
        if abs(self.trace() - 1.0) > tol:
            raise ValueError(f"trace {self.trace()} is not 1")
        if np.max(np.abs(self.matrix - self.matrix.conj().T)) > tol:
            raise ValueError("density matrix is not Hermitian")


def _left_string(matrix: np.ndarray, letters, num_qubits: int) -> np.ndarray:
    """P @ rho for a Pauli string P."""
    flip, yz, ny = string_masks(letters)
    idx = np.arange(2**num_qubits, dtype=np.uint64)
    src = idx ^ np.uint64(flip)
    parity = np.bitwise_count(src & np.uint64(yz)) & 1
    phases = (1j**ny) * (1.0 - 2.0 * parity)
    return phases[:, None] * matrix[src, :]


def _right_string(matrix: np.ndarray, letters, num_qubits: int) -> np.ndarray:
    """rho @ P for a Pauli string P."""
    flip, yz, ny = string_masks(letters)
    idx = np.arange(2**num_qubits, dtype=np.uint64)
    # P[j', j] = phase(j) delta_{j', j ^ flip}
    parity = np.bitwise_count(idx & np.uint64(yz)) & 1
    phases = (1j**ny) * (1.0 - 2.0 * parity)
    return matrix[:, idx ^ np.uint64(flip)] * phases[None, :]


def rotate_dm(dm: DensityMatrix, letters, phi: float) -> DensityMatrix:
    """U rho U^dag with U = exp(i phi P)."""
    c, s = math.cos(phi), math.sin(phi)
    rho = dm.matrix
    p_rho = _left_string(rho, letters, dm.num_qubits)
    rho_p = _right_string(rho, letters, dm.num_qubits)
    p_rho_p = _right_string(p_rho, letters, dm.num_qubits)
    out = c * c * rho + 1j * c * s * (p_rho - rho_p) + s * s * p_rho_p
    return DensityMatrix(out, dm.num_qubits)


def depolarize(dm: DensityMatrix, qubits, lam: float) -> DensityMatrix:
    """Single-qubit depolarizing channel on each listed qubit:
    rho -> (1 - lam) rho + lam Tr_q(rho) (x) I/2; lam = 1 fully mixes."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"channel parameter must be in [0, 1]: {lam}")
    rho = dm.matrix
    n = dm.num_qubits
    for q in qubits:
        mixed = np.zeros_like(rho)
        for letter in ("X", "Y", "Z"):
            letters = ((q, letter),)
            mixed += _right_string(_left_string(rho, letters, n), letters, n)
        rho = (1.0 - 0.75 * lam) * rho + 0.25 * lam * mixed
    return DensityMatrix(rho, n)


def replay_ansatz(ansatz, lam: float) -> DensityMatrix:
    """Re-run a converged ansatz as a noisy circuit: one depolarizing hit on
    the support of every Pauli rotation."""
    dm = DensityMatrix.from_statevector(ansatz.reference)
    for entry, theta in zip(ansatz.entries, ansatz.thetas):
        for w, letters in entry.rotations:
            dm = rotate_dm(dm, letters, float(theta) * w)
            if lam > 0.0:
                dm = depolarize(dm, [q for q, _ in letters], lam)
    return dm


def expectation_dm(dm: DensityMatrix, op: QubitOperator) -> complex:
    """Exact Tr(rho O)."""
    total = 0.0 + 0.0j
    n = dm.num_qubits
    idx = np.arange(2**n, dtype=np.uint64)
    for t in op.terms:
        flip, yz, ny = string_masks(t.letters)
        parity = np.bitwise_count(idx & np.uint64(yz)) & 1
        phases = (1j**ny) * (1.0 - 2.0 * parity)
        total += t.coefficient * complex(np.sum(phases * dm.matrix[idx ^ np.uint64(flip), idx]))
    return total


# ---------------------------------------------------------------------------
# Sampled measurement of Pauli strings
# ---------------------------------------------------------------------------


def group_strings(strings: list[tuple]) -> list[dict]:
    """Greedy qubit-wise-commuting grouping; deterministic for sorted input."""
    groups: list[dict] = []
    for letters in sorted(strings):
        placed = False
        for group in groups:
            basis = group["basis"]
            if all(basis.get(q, l) == l for q, l in letters):
                group["strings"].append(letters)
                basis.update(dict(letters))
                placed = True
                break
        if not placed:
            groups.append({"basis": dict(letters), "strings": [letters]})
    return groups


def _rotate_to_measurement_basis(dm: DensityMatrix, basis: dict[int, str]) -> np.ndarray:
    """Probabilities of computational outcomes after per-qubit basis changes."""
    rho = dm.matrix
    n = dm.num_qubits
    for q, letter in basis.items():
        if letter == "Z":
            continue
        gate = _H_GATE if letter == "X" else _Y_GATE
        rho = _single_qubit_conjugate(rho, gate, q, n)
    return np.clip(np.real(np.diag(rho)), 0.0, None)


def _single_qubit_conjugate(rho: np.ndarray, gate: np.ndarray, qubit: int, n: int) -> np.ndarray:
    dim = 2**n
    low, high = 2**qubit, 2 ** (n - qubit - 1)
    rho = rho.reshape(high, 2, low, dim)
    rho = np.einsum("ab,hbld->hald", gate, rho).reshape(dim, dim)
    rho = rho.reshape(dim, high, 2, low)
    rho = np.einsum("dhbl,ab->dhal", rho, gate.conj()).reshape(dim, dim)
    return rho


def sample_string_values(
    dm: DensityMatrix,
    strings: list[tuple],
    shots: int,
    rng: np.random.Generator,
) -> tuple[dict, dict]:
    """Estimate <P> for each string; shots = 0 gives exact traces.

    Returns (estimates, variances of the estimates). Strings measured in one
    qubit-wise-commuting group share a multinomial sample of ``shots``.
    """
    estimates: dict[tuple, float] = {}
    variances: dict[tuple, float] = {}
    todo = [s for s in set(strings) if s]
    if shots == 0:
        for letters in todo:
            estimates[letters] = float(
                expectation_dm(dm, QubitOperator((PauliTerm(1.0, letters),), dm.num_qubits)).real
            )
            variances[letters] = 0.0
        estimates[()] = 1.0
        variances[()] = 0.0
        return estimates, variances
    for group in group_strings(todo):
        probs = _rotate_to_measurement_basis(dm, group["basis"])
        total = probs.sum()
        if total <= 0.0:
            raise ValueError("invalid measurement distribution")
        counts = rng.multinomial(shots, probs / total)
        outcomes = np.flatnonzero(counts)
        for letters in group["strings"]:
            mask = 0
            for q, _ in letters:
                mask |= 1 << q
            vals = np.array(
                [1.0 - 2.0 * (bin(int(o) & mask).count("1") % 2) for o in outcomes]
            )
            weights = counts[outcomes]
            mean = float(np.dot(weights, vals) / shots)
            second = float(np.dot(weights, vals**2) / shots)
            estimates[letters] = mean
            variances[letters] = max(second - mean * mean, 0.0) / shots
    estimates[()] = 1.0
    variances[()] = 0.0
    return estimates, variances


def estimate_operator(
    op: QubitOperator, estimates: dict, variances: dict | None = None
) -> tuple[complex, float]:
    """Assemble <O> from per-string estimates; returns (value, stderr^2)."""
    value = 0.0 + 0.0j
    var = 0.0
    for t in op.simplify().terms:
        value += t.coefficient * estimates[t.letters]
        if variances:
            var += abs(t.coefficient) ** 2 * variances.get(t.letters, 0.0)
    return value, var


# ---------------------------------------------------------------------------
# Noisy energy and zero-noise extrapolation
# ---------------------------------------------------------------------------


def simulate_noisy_energy(
    ansatz,
    hamiltonian: QubitOperator,
    noise: NoiseSpec,
    scale: float,
    rng: np.random.Generator | None = None,
) -> tuple[float, float]:
    """Replay the ansatz with channel parameter ``scale * lam`` and estimate
    <H> from ``shots`` samples per measurement group (exact trace if
    shots = 0). Returns (mean, standard error)."""
    lam = noise.lam * scale
    if lam > 1.0:
        raise ValueError(f"scaled depolarizing parameter {lam} exceeds 1")
    dm = replay_ansatz(ansatz, lam)
    if noise.shots == 0:
        return float(expectation_dm(dm, hamiltonian).real), 0.0
    if rng is None:
        rng = np.random.default_rng()
    strings = [t.letters for t in hamiltonian.simplify().terms if t.letters]
    estimates, variances = sample_string_values(dm, strings, noise.shots, rng)
    value, var = estimate_operator(hamiltonian, estimates, variances)
    return float(value.real), math.sqrt(var)


def zne_extrapolate(points: list[tuple[float, float]]) -> float:
    """Least-squares linear fit of value(scale), evaluated at scale = 0."""
    if len(points) < 2:
        raise ValueError("need at least two points to extrapolate")
    scales = np.array([p[0] for p in points], dtype=float)
    values = np.array([p[1] for p in points], dtype=float)
    if np.ptp(scales) == 0.0:
        raise ValueError("scales are all identical")
    slope, intercept = np.polyfit(scales, values, 1)
    return float(intercept)


# ---------------------------------------------------------------------------
# Noisy EOM endpoints
# ---------------------------------------------------------------------------


@dataclass
class NoisyEomResult:
    """Lowest removal/attachment energies at scale 1 and after extrapolation."""

    ground_raw: float
    ground_zne: float
    ip_raw: float
    ip_zne: float
    ea_raw: float
    ea_zne: float
    scales: tuple[float, ...]


def _matrix_element_ops(
    hamiltonian: QubitOperator, basis: ExcitationBasis, n: int
) -> tuple[list[list[QubitOperator]], list[list[QubitOperator]]]:
    images = [jordan_wigner(op, n) for op in basis.operators]
    h_ops = [
        [(images[u].adjoint() * hamiltonian * images[v]).simplify() for v in range(len(images))]
        for u in range(len(images))
    ]
    s_ops = [
        [(images[u].adjoint() * images[v]).simplify() for v in range(len(images))]
        for u in range(len(images))
    ]
    return h_ops, s_ops


def noisy_eom_endpoints(
    ansatz,
    hamiltonian: QubitOperator,
    ip_basis: ExcitationBasis,
    ea_basis: ExcitationBasis,
    noise: NoiseSpec,
    rng: np.random.Generator | None = None,
    s_tol: float = 1e-8,
) -> NoisyEomResult:
    """Estimate every QSE matrix element at each noise scale, extrapolate each
    element independently, then solve for the lowest removal/attachment
    energies. Also returns the scale-1 (unmitigated) answer."""
    if rng is None:
        rng = np.random.default_rng()
    n = ansatz.reference.num_qubits
    ip_h_ops, ip_s_ops = _matrix_element_ops(hamiltonian, ip_basis, n)
    ea_h_ops, ea_s_ops = _matrix_element_ops(hamiltonian, ea_basis, n)

    all_strings: set[tuple] = {
        t.letters for t in hamiltonian.simplify().terms if t.letters
    }
    for ops in (ip_h_ops, ip_s_ops, ea_h_ops, ea_s_ops):
        for row in ops:
            for op in row:
                all_strings.update(t.letters for t in op.terms if t.letters)
    string_list = sorted(all_strings)

    per_scale: list[dict] = []
    for scale in noise.scale_factors:
        lam = noise.lam * scale
        if lam > 1.0:
            raise ValueError(f"scaled depolarizing parameter {lam} exceeds 1")
        dm = replay_ansatz(ansatz, lam)
        estimates, _ = sample_string_values(dm, string_list, noise.shots, rng)
        per_scale.append(estimates)

    def element_values(op: QubitOperator) -> list[complex]:
        return [estimate_operator(op, est, {})[0] for est in per_scale]

    def extrapolate_matrix(ops: list[list[QubitOperator]]) -> tuple[np.ndarray, np.ndarray]:
        dim = len(ops)
        raw = np.empty((dim, dim), dtype=complex)
        zne = np.empty((dim, dim), dtype=complex)
        for u in range(dim):
            for v in range(dim):
                vals = element_values(ops[u][v])
                raw[u, v] = vals[0]
                zne[u, v] = complex(
                    zne_extrapolate(list(zip(noise.scale_factors, [z.real for z in vals]))),
                    zne_extrapolate(list(zip(noise.scale_factors, [z.imag for z in vals]))),
                )
        return raw, zne

    e0_values = [
        estimate_operator(hamiltonian, est, {})[0].real for est in per_scale
    ]
    e0_raw = float(e0_values[0])
    e0_zne = zne_extrapolate(list(zip(noise.scale_factors, e0_values)))

    def model_space(s_raw: np.ndarray) -> np.ndarray | None:
        """Retained directions from the scale-1 overlap.

        Sampled pencils need an overlap threshold above the shot-noise floor,
        otherwise null directions (perturbed by ~ 1/sqrt(shots)) leak junk
        eigenvalues; the extrapolated pencil is then solved in this same
        model space so raw and mitigated answers are comparable.
        """
        s_sym = 0.5 * (s_raw + s_raw.conj().T)
        tol = s_tol
        if noise.shots > 0:
            tol = max(s_tol, 8.0 * math.sqrt(s_raw.shape[0] / noise.shots))
        eigs, vecs = np.linalg.eigh(s_sym)
        keep = eigs > tol * max(float(eigs[-1]), 0.0)
        if not np.any(keep):
            return None
        return vecs[:, keep]

    def lowest(h_mat, s_mat, x, e0) -> float:
        if x is None:
            return math.nan
        h_red = x.conj().T @ (0.5 * (h_mat + h_mat.conj().T)) @ x
        s_red = x.conj().T @ (0.5 * (s_mat + s_mat.conj().T)) @ x
        eigs, vecs = np.linalg.eigh(s_red)
        keep = eigs > 0.2 * max(float(eigs[-1]), 0.0)
        if not np.any(keep):
            return math.nan
        y = vecs[:, keep] / np.sqrt(eigs[keep])
        h_final = y.conj().T @ h_red @ y
        h_final = 0.5 * (h_final + h_final.conj().T)
        return float(np.linalg.eigvalsh(h_final)[0] - e0)

    ip_h_raw, ip_h_zne = extrapolate_matrix(ip_h_ops)
    ip_s_raw, ip_s_zne = extrapolate_matrix(ip_s_ops)
    ea_h_raw, ea_h_zne = extrapolate_matrix(ea_h_ops)
    ea_s_raw, ea_s_zne = extrapolate_matrix(ea_s_ops)
    ip_space = model_space(ip_s_raw)
    ea_space = model_space(ea_s_raw)

    return NoisyEomResult(
        ground_raw=e0_raw,
        ground_zne=float(e0_zne),
        ip_raw=lowest(ip_h_raw, ip_s_raw, ip_space, e0_raw),
        ip_zne=lowest(ip_h_zne, ip_s_zne, ip_space, e0_zne),
        ea_raw=lowest(ea_h_raw, ea_s_raw, ea_space, e0_raw),
        ea_zne=lowest(ea_h_zne, ea_s_zne, ea_space, e0_zne),
        scales=noise.scale_factors,
    )


def _solve_clipped(problem: QseProblem, s_tol: float) -> QseSolution:
    """solve_qse tolerating sampled (noisy) pencils: negative overlap
    directions are clipped by the canonical-orthogonalization threshold."""
    try:
        return solve_qse(problem, s_tol=s_tol)
    except ValueError:
        # sampled S can dip below the PSD validator's slack; clipping the
        # negative directions keeps the reduced problem well-posed
        s_eigs, s_vecs = np.linalg.eigh(problem.s_mat)
        keep = s_eigs > s_tol * max(float(s_eigs[-1]), 0.0)
        if not np.any(keep):
            return QseSolution(
                np.zeros(0), np.zeros((len(problem.basis), 0)), np.zeros(0), 0,
                problem.basis, diagnostic="overlap matrix is numerically zero",
            )
        x = s_vecs[:, keep] / np.sqrt(s_eigs[keep])
        h_red = x.conj().T @ problem.h_mat @ x
        h_red = 0.5 * (h_red + h_red.conj().T)
        evals, evecs = np.linalg.eigh(h_red)
        vectors = x @ evecs
        from .eom import quasiparticle_weight_from_vectors

        return QseSolution(
            evals - problem.ground_energy,
            vectors,
            quasiparticle_weight_from_vectors(vectors, problem.basis),
            int(np.count_nonzero(keep)),
            problem.basis,
        )


# ---------------------------------------------------------------------------
# Repeated experiment with report
# ---------------------------------------------------------------------------


@dataclass
class NoiseExperiment:
    """Per-repeat noisy/extrapolated values plus summary statistics."""

    ideal_energy: float
    ideal_ip: float
    ideal_ea: float
    noise: NoiseSpec
    seeds: list[int] = field(default_factory=list)
    energy_raw: list[float] = field(default_factory=list)
    energy_zne: list[float] = field(default_factory=list)
    energy_by_scale: list[list[float]] = field(default_factory=list)
    ip_raw: list[float] = field(default_factory=list)
    ip_zne: list[float] = field(default_factory=list)
    ea_raw: list[float] = field(default_factory=list)
    ea_zne: list[float] = field(default_factory=list)

    def wins(self, raw: list[float], zne: list[float], ideal: float) -> int:
        return sum(
            1 for r, z in zip(raw, zne) if abs(z - ideal) < abs(r - ideal)
        )

    def summary(self) -> dict:
        return {
            "repeats": len(self.seeds),
            "ideal": {
                "energy": self.ideal_energy,
                "ip": self.ideal_ip,
                "ea": self.ideal_ea,
            },
            "zne_wins": {
                "energy": self.wins(self.energy_raw, self.energy_zne, self.ideal_energy),
                "ip": self.wins(self.ip_raw, self.ip_zne, self.ideal_ip),
                "ea": self.wins(self.ea_raw, self.ea_zne, self.ideal_ea),
            },
            "mean_abs_error": {
                "energy_raw": _mean_abs_err(self.energy_raw, self.ideal_energy),
                "energy_zne": _mean_abs_err(self.energy_zne, self.ideal_energy),
                "ip_raw": _mean_abs_err(self.ip_raw, self.ideal_ip),
                "ip_zne": _mean_abs_err(self.ip_zne, self.ideal_ip),
                "ea_raw": _mean_abs_err(self.ea_raw, self.ideal_ea),
                "ea_zne": _mean_abs_err(self.ea_zne, self.ideal_ea),
            },
        }


def _mean_abs_err(values: list[float], ideal: float) -> float:
    return float(np.mean([abs(v - ideal) for v in values])) if values else math.nan


def run_noise_experiment(
    ansatz,
    hamiltonian: QubitOperator,
    ip_basis: ExcitationBasis,
    ea_basis: ExcitationBasis,
    noise: NoiseSpec,
    seed: int = 2024,
) -> NoiseExperiment:
    """The full repeated experiment: seeded, bit-for-bit reproducible."""
    from .simulator import CompiledOperator, expectation

    ideal_state = ansatz.state()
    ch = CompiledOperator(hamiltonian)
    ideal_energy = float(expectation(ideal_state, ch).real)
    from .eom import build_qse_problem

    ideal_ip = float(
        solve_qse(build_qse_problem(ideal_state, ch, ip_basis)).energies[0]
    )
    ideal_ea = float(
        solve_qse(build_qse_problem(ideal_state, ch, ea_basis)).energies[0]
    )
    experiment = NoiseExperiment(ideal_energy, ideal_ip, ideal_ea, noise)
    root = np.random.SeedSequence(seed)
    for repeat, child in enumerate(root.spawn(noise.repeats)):
        rng = np.random.default_rng(child)
        by_scale = []
        for scale in noise.scale_factors:
            value, _ = simulate_noisy_energy(ansatz, hamiltonian, noise, scale, rng)
            by_scale.append(value)
        experiment.energy_by_scale.append(by_scale)
        experiment.energy_raw.append(by_scale[0])
        experiment.energy_zne.append(
            zne_extrapolate(list(zip(noise.scale_factors, by_scale)))
        )
        eom = noisy_eom_endpoints(
            ansatz, hamiltonian, ip_basis, ea_basis, noise, rng
        )
        experiment.ip_raw.append(eom.ip_raw)
        experiment.ip_zne.append(eom.ip_zne)
        experiment.ea_raw.append(eom.ea_raw)
        experiment.ea_zne.append(eom.ea_zne)
        experiment.seeds.append(repeat)
    return experiment


def write_experiment_report(experiment: NoiseExperiment, path: str | os.PathLike):
    """JSON report: per-repeat values at every scale plus error statistics."""
    payload = {
        "noise": {
            "lambda": experiment.noise.lam,
            "scale_factors": list(experiment.noise.scale_factors),
            "shots": experiment.noise.shots,
            "repeats": experiment.noise.repeats,
            "extrapolation": experiment.noise.extrapolation,
        },
        "per_repeat": [
            {
                "repeat": i,
                "energy_by_scale": experiment.energy_by_scale[i],
                "energy_raw": experiment.energy_raw[i],
                "energy_zne": experiment.energy_zne[i],
                "ip_raw": experiment.ip_raw[i],
                "ip_zne": experiment.ip_zne[i],
                "ea_raw": experiment.ea_raw[i],
                "ea_zne": experiment.ea_zne[i],
            }
            for i in range(len(experiment.seeds))
        ],
        "summary": experiment.summary(),
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=1, sort_keys=True)
        handle.write("\n")


def write_experiment_csv(experiment: NoiseExperiment, path: str | os.PathLike):
    import csv

    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        header = ["repeat"]
        header += [f"energy_scale_{s}" for s in experiment.noise.scale_factors]
        header += ["energy_zne", "ip_raw", "ip_zne", "ea_raw", "ea_zne"]
        writer.writerow(header)
        for i in range(len(experiment.seeds)):
            row = [i]
            row += [repr(v) for v in experiment.energy_by_scale[i]]
            row += [
                repr(experiment.energy_zne[i]),
                repr(experiment.ip_raw[i]),
                repr(experiment.ip_zne[i]),
                repr(experiment.ea_raw[i]),
                repr(experiment.ea_zne[i]),
            ]
            writer.writerow(row)

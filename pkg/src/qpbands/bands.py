"""End-to-end band-structure pipeline and file outputs.

For every k-point on the path the two-step procedure runs: solve the ground
state adaptively on that k-point's integral table, then diagonalize the
removal (IP) and attachment (EA) pencils at that k and keep the states whose
quasiparticle weight clears the threshold. Valence energies are the negated
removal energies, conduction energies the attachment energies; the reported
gap is min over k of the conduction floor minus max over k of the valence
ceiling.
"""

from __future__ import annotations

import concurrent.futures
import csv
import io
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .adapt import AdaptAnsatz, adapt_solve, build_pool
from .eom import build_basis, build_np_problem, build_qse_problem, solve_qse
from .kfcidump import parse_kfcidump
from .lattice import IntegralTable, KTriple, build_hamiltonian
from .simulator import CompiledOperator

#: CODATA Hartree -> eV
HARTREE_TO_EV = 27.211386245988


def to_ev(hartree: float) -> float:
    return hartree * HARTREE_TO_EV


def from_ev(ev: float) -> float:
    return ev / HARTREE_TO_EV


@dataclass(frozen=True)
class BandsConfig:
    pool_kind: str = "gsd"
    complemented: bool = True
    eps: float = 1e-3
    max_iter: int = 200
    qpwt_min: float = 0.5
    s_tol: float = 1e-8
    spin_channel: int = 0
    eom_np: bool = False
    alignment: str = "relative"  # or "e0-shifted"
    jobs: int = 1


@dataclass
class StateRecord:
    energy_ev: float
    qpwt: float


@dataclass
class KPointResult:
    label: str
    k: KTriple
    ground_energy: float = math.nan
    converged: bool = False
    ip_states: list[StateRecord] = field(default_factory=list)
    ea_states: list[StateRecord] = field(default_factory=list)
    valence: list[float] = field(default_factory=list)  # eV, descending
    conduction: list[float] = field(default_factory=list)  # eV, ascending
    ip_states_np: list[StateRecord] = field(default_factory=list)
    ea_states_np: list[StateRecord] = field(default_factory=list)
    valence_np: list[float] = field(default_factory=list)
    conduction_np: list[float] = field(default_factory=list)
    error: str | None = None


@dataclass
class BandStructure:
    k_path: list[tuple[str, KTriple]]
    results: list[KPointResult]
    gap_ev: float = math.nan
    gap_valence_k: str = ""
    gap_conduction_k: str = ""

    def compute_gap(self):
        v_best, c_best = -math.inf, math.inf
        for r in self.results:
            if r.valence and max(r.valence) > v_best:
                v_best = max(r.valence)
                self.gap_valence_k = r.label
            if r.conduction and min(r.conduction) < c_best:
                c_best = min(r.conduction)
                self.gap_conduction_k = r.label
        if math.isfinite(v_best) and math.isfinite(c_best):
            self.gap_ev = c_best - v_best
        return self


def assemble_band_energies(
    energies: np.ndarray, qpwt: np.ndarray, qpwt_min: float, n_bands: int, kind: str
) -> list[float]:
    """QPWT filter: qualifying states, at most one per band slot, greatest
    weight first when there are more candidates than slots."""
    order = np.argsort(qpwt)[::-1]
    picked = [i for i in order if qpwt[i] >= qpwt_min][:n_bands]
    values = sorted(float(energies[i]) for i in picked)
    if kind == "valence":
        return sorted((-v for v in values), reverse=True)  # eV applied later
    return values


def solve_kpoint(
    label: str,
    k: KTriple,
    table: IntegralTable,
    config: BandsConfig,
    shared_ansatz: AdaptAnsatz | None = None,
) -> KPointResult:
    """Ground state (unless shared) plus IP/EA spectra at one k-point."""
    result = KPointResult(label=label, k=k)
    hamiltonian = build_hamiltonian(table)
    compiled = CompiledOperator(hamiltonian)
    if shared_ansatz is None:
        pool = build_pool(table, config.pool_kind, config.complemented)
        ansatz = adapt_solve(
            table,
            hamiltonian,
            pool=pool,
            eps=config.eps,
            max_iter=config.max_iter,
        )
    else:
        ansatz = shared_ansatz
    result.converged = ansatz.converged
    result.ground_energy = ansatz.energy
    ground = ansatz.state()
    n_bands = table.n_orb
    for sector in ("ip", "ea"):
        basis = build_basis(table, sector, k, config.spin_channel)
        problem = build_qse_problem(ground, compiled, basis)
        solution = solve_qse(problem, s_tol=config.s_tol)
        states = [
            StateRecord(to_ev(float(e)), float(w))
            for e, w in zip(solution.energies, solution.qpwt)
        ]
        picked = assemble_band_energies(
            solution.energies, solution.qpwt, config.qpwt_min, n_bands, sector_kind(sector)
        )
        if sector == "ip":
            result.ip_states = states
            result.valence = [to_ev(v) for v in picked]
        else:
            result.ea_states = states
            result.conduction = [to_ev(v) for v in picked]
        if config.eom_np:
            np_solution = solve_qse(build_np_problem(ground, compiled, basis), s_tol=config.s_tol)
            np_states = [
                StateRecord(to_ev(float(e)), float(w))
                for e, w in zip(np_solution.energies, np_solution.qpwt)
            ]
            np_picked = assemble_band_energies(
                np_solution.energies,
                np_solution.qpwt,
                config.qpwt_min,
                n_bands,
                sector_kind(sector),
            )
            if sector == "ip":
                result.ip_states_np = np_states
                result.valence_np = [to_ev(v) for v in np_picked]
            else:
                result.ea_states_np = np_states
                result.conduction_np = [to_ev(v) for v in np_picked]
    return result


def sector_kind(sector: str) -> str:
    return "valence" if sector == "ip" else "conduction"


def band_pipeline(
    fixtures: list[tuple[str, KTriple, IntegralTable]],
    config: BandsConfig = BandsConfig(),
    shared_ground: bool = False,
) -> BandStructure:
    """Run the per-k two-step pipeline over a fixture collection.

    With ``shared_ground`` a single ground state is solved on the first table
    (all tables must then be identical); otherwise every k gets its own
    ground-state solve. Per-k failures are recorded, not raised.
    """
    k_path = [(label, k) for label, k, _ in fixtures]
    shared: AdaptAnsatz | None = None
    if shared_ground and fixtures:
        _, _, table0 = fixtures[0]
        pool = build_pool(table0, config.pool_kind, config.complemented)
        shared = adapt_solve(
            table0,
            pool=pool,
            eps=config.eps,
            max_iter=config.max_iter,
        )

    def run_one(item):
        label, k, table = item
        try:
            return solve_kpoint(label, k, table, config, shared_ansatz=shared)
        except Exception as exc:  # recorded, pipeline continues
            failed = KPointResult(label=label, k=k)
            failed.error = f"{type(exc).__name__}: {exc}"
            return failed

    if config.jobs > 1 and len(fixtures) > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=config.jobs) as pool_:
            results = list(pool_.map(run_one, fixtures))
    else:
        results = [run_one(item) for item in fixtures]

    if config.alignment == "e0-shifted" and results:
        reference = next(
            (r.ground_energy for r in results if math.isfinite(r.ground_energy)),
            0.0,
        )
        for r in results:
            if not math.isfinite(r.ground_energy):
                continue
            shift = to_ev(r.ground_energy - reference)
            r.valence = [v + shift for v in r.valence]
            r.conduction = [c + shift for c in r.conduction]
            r.valence_np = [v + shift for v in r.valence_np]
            r.conduction_np = [c + shift for c in r.conduction_np]
    return BandStructure(k_path, results).compute_gap()


# ---------------------------------------------------------------------------
# Fixture collections
# ---------------------------------------------------------------------------


def load_fixture_dir(path: str | os.PathLike) -> list[tuple[str, KTriple, IntegralTable]]:
    """Load per-k fixtures from a directory.

    If ``kpath.json`` is present it lists ``[{label, k, file}, ...]`` in path
    order; otherwise all ``*.kfcidump`` files are taken in sorted order with
    k = (0, 0, 0).
    """
    base = Path(path)
    manifest = base / "kpath.json"
    out = []
    if manifest.exists():
        entries = json.loads(manifest.read_text())
        for entry in entries:
            table = parse_kfcidump(base / entry["file"])
            out.append((str(entry["label"]), tuple(entry["k"]), table))
    else:
        for file in sorted(base.glob("*.kfcidump")):
            out.append((file.stem, (0, 0, 0), parse_kfcidump(file)))
    if not out:
        raise FileNotFoundError(f"no fixtures found under {base}")
    return out


def expand_table_over_mesh(table: IntegralTable) -> list[tuple[str, KTriple, IntegralTable]]:
    """One table, all of its mesh k-points as the path (shared ground state)."""
    return [(f"k{i}", k, table) for i, k in enumerate(table.mesh.kpoints())]


# ---------------------------------------------------------------------------
# Output formats
# ---------------------------------------------------------------------------


def bands_to_json(bands: BandStructure) -> str:
    payload = {
        "k_path": [{"label": l, "k": list(k)} for l, k in bands.k_path],
        "gap_ev": bands.gap_ev,
        "gap_valence_k": bands.gap_valence_k,
        "gap_conduction_k": bands.gap_conduction_k,
        "results": [
            {
                "label": r.label,
                "k": list(r.k),
                "ground_energy": r.ground_energy,
                "converged": r.converged,
                "error": r.error,
                "valence": r.valence,
                "conduction": r.conduction,
                "ip_states": [[s.energy_ev, s.qpwt] for s in r.ip_states],
                "ea_states": [[s.energy_ev, s.qpwt] for s in r.ea_states],
                "valence_np": r.valence_np,
                "conduction_np": r.conduction_np,
                "ip_states_np": [[s.energy_ev, s.qpwt] for s in r.ip_states_np],
                "ea_states_np": [[s.energy_ev, s.qpwt] for s in r.ea_states_np],
            }
            for r in bands.results
        ],
    }
    return json.dumps(payload, indent=1, sort_keys=True) + "\n"


def bands_to_csv(bands: BandStructure) -> str:
    """Flat rows: assembled bands plus full spectra, lossless float text."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["k_label", "k1", "k2", "k3", "band_type", "index", "energy_ev", "qpwt"]
    )

    def rows(result, kind, values):
        for i, v in enumerate(values):
            writer.writerow([result.label, *result.k, kind, i, repr(v), ""])

    def spectrum_rows(result, kind, states):
        for i, s in enumerate(states):
            writer.writerow(
                [result.label, *result.k, kind, i, repr(s.energy_ev), repr(s.qpwt)]
            )

    for r in bands.results:
        rows(r, "valence", r.valence)
        rows(r, "conduction", r.conduction)
        spectrum_rows(r, "ip", r.ip_states)
        spectrum_rows(r, "ea", r.ea_states)
        rows(r, "valence_np", r.valence_np)
        rows(r, "conduction_np", r.conduction_np)
        spectrum_rows(r, "ip_np", r.ip_states_np)
        spectrum_rows(r, "ea_np", r.ea_states_np)
    return buf.getvalue()


def bands_from_csv(text: str, k_path=None) -> BandStructure:
    """Rebuild a band structure from the CSV rows (gap recomputed)."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header[:4] != ["k_label", "k1", "k2", "k3"]:
        raise ValueError("unrecognized CSV header")
    by_label: dict[str, KPointResult] = {}
    order: list[str] = []
    for row in reader:
        label, k1, k2, k3, kind, _idx, energy, qpwt = row
        k = (int(k1), int(k2), int(k3))
        if label not in by_label:
            by_label[label] = KPointResult(label=label, k=k)
            order.append(label)
        r = by_label[label]
        value = float(energy)
        if kind == "valence":
            r.valence.append(value)
        elif kind == "conduction":
            r.conduction.append(value)
        elif kind == "ip":
            r.ip_states.append(StateRecord(value, float(qpwt)))
        elif kind == "ea":
            r.ea_states.append(StateRecord(value, float(qpwt)))
        elif kind == "valence_np":
            r.valence_np.append(value)
        elif kind == "conduction_np":
            r.conduction_np.append(value)
        elif kind == "ip_np":
            r.ip_states_np.append(StateRecord(value, float(qpwt)))
        elif kind == "ea_np":
            r.ea_states_np.append(StateRecord(value, float(qpwt)))
        else:
            raise ValueError(f"unknown band_type {kind!r}")
    results = [by_label[l] for l in order]
    path = k_path or [(r.label, r.k) for r in results]
    return BandStructure(path, results).compute_gap()


def bands_to_ascii(bands: BandStructure, width: int = 64, height: int = 18) -> str:
    """Text chart of band energy versus k-path position."""
    points: list[tuple[int, float, str]] = []
    for i, r in enumerate(bands.results):
        for v in r.valence:
            points.append((i, v, "v"))
        for c in r.conduction:
            points.append((i, c, "c"))
    if not points:
        return "(no band data)\n"
    energies = [p[1] for p in points]
    lo, hi = min(energies), max(energies)
    span = (hi - lo) or 1.0
    lo -= 0.05 * span
    hi += 0.05 * span
    nk = len(bands.results)
    grid = [[" "] * width for _ in range(height)]
    for i, e, mark in points:
        col = int(i / max(nk - 1, 1) * (width - 1))
        row = int((hi - e) / (hi - lo) * (height - 1))
        grid[row][col] = mark
    lines = [f"energy [eV]  (v = valence, c = conduction)   gap = {bands.gap_ev:.4f} eV"]
    for j, row in enumerate(grid):
        e_label = hi - (hi - lo) * j / (height - 1)
        lines.append(f"{e_label:9.3f} |" + "".join(row))
    labels = " ".join(f"{i}:{r.label}" for i, r in enumerate(bands.results))
    lines.append(" " * 11 + "-" * width)
    lines.append(f"k-path: {labels}")
    return "\n".join(lines) + "\n"


def emit_outputs(bands: BandStructure, fmt: str, out: str | os.PathLike | None) -> str:
    """Render to json/csv/asciiplot; write to ``out`` when given."""
    if fmt == "json":
        text = bands_to_json(bands)
    elif fmt == "csv":
        text = bands_to_csv(bands)
    elif fmt == "asciiplot":
        text = bands_to_ascii(bands)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if out is not None:
        Path(out).write_text(text, encoding="utf-8")
    return text

"""Command-line interface.

Subcommands: ``ground`` (adaptive ground state on one fixture), ``bands``
(full pipeline), ``fci`` (exact-diagonalization oracle), ``eom`` (single-k
removal/attachment spectra), ``noise`` (noisy/extrapolated experiment), and
``model hubbard`` (fixture generation). Exit codes: 0 success, 2
non-convergence, 3 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

EXIT_OK = 0
EXIT_NOT_CONVERGED = 2
EXIT_INPUT_ERROR = 3


def _triple(text: str):
    parts = [int(x) for x in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"need N1,N2,N3: {text!r}")
    return tuple(parts)


def _scales(text: str):
    return tuple(float(x) for x in text.split(","))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qpbands",
        description="Quasiparticle band structures from adaptive variational"
        " ground states with equation-of-motion spectra.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_solver_flags(p):
        p.add_argument("--pool", choices=["sd", "gsd"], default="gsd")
        p.add_argument(
            "--no-complement",
            action="store_true",
            help="drop the complementary i(T+T^dag) half of the pool",
        )
        p.add_argument("--eps", type=float, default=1e-3, help="residual-gradient norm threshold (Hartree)")
        p.add_argument("--max-iter", type=int, default=200)

    ground = sub.add_parser("ground", help="adaptive ground state on one fixture")
    ground.add_argument("--integrals", required=True)
    add_solver_flags(ground)
    ground.add_argument("--out", help="checkpoint JSON path")

    fci = sub.add_parser("fci", help="exact sector diagonalization oracle")
    fci.add_argument("--integrals", required=True)
    fci.add_argument("--out")

    eom = sub.add_parser("eom", help="removal/attachment spectra at one k")
    eom.add_argument("--integrals", required=True)
    add_solver_flags(eom)
    eom.add_argument("--k", type=_triple, default=(0, 0, 0))
    eom.add_argument("--sector", choices=["ip", "ea", "both"], default="both")
    eom.add_argument(
        "--spin-channel",
        type=int,
        choices=[0, 1],
        default=0,
        help="0 = alpha removal/attachment (default), 1 = beta; degenerate for closed shells",
    )
    eom.add_argument("--qpwt-min", type=float, default=0.5)
    eom.add_argument("--s-tol", type=float, default=1e-8)
    eom.add_argument("--eom-np", action="store_true", help="also solve the unprojected baseline")
    eom.add_argument("--checkpoint", help="reuse a ground-state checkpoint")
    eom.add_argument("--out", help="QSE dump JSON path")

    bands = sub.add_parser("bands", help="band structure over a fixture set")
    source = bands.add_mutually_exclusive_group(required=True)
    source.add_argument("--fixture-dir", help="directory of per-k fixtures (kpath.json manifest optional)")
    source.add_argument("--integrals", help="single multi-k fixture; shared ground state, per-k spectra")
    add_solver_flags(bands)
    bands.add_argument("--qpwt-min", type=float, default=0.5)
    bands.add_argument("--s-tol", type=float, default=1e-8)
    bands.add_argument("--eom-np", action="store_true")
    bands.add_argument("--alignment", choices=["relative", "e0-shifted"], default="relative")
    bands.add_argument("--jobs", type=int, default=1)
    bands.add_argument("--format", choices=["json", "csv", "asciiplot"], default="json")
    bands.add_argument("--out")

    noise = sub.add_parser("noise", help="noisy replay + zero-noise extrapolation")
    noise.add_argument("--integrals", required=True)
    add_solver_flags(noise)
    noise.add_argument("--lambda", dest="lam", type=float, default=0.001)
    noise.add_argument("--scales", type=_scales, default=(1.0, 1.25, 1.5))
    noise.add_argument("--shots", type=int, default=2**17)
    noise.add_argument("--repeats", type=int, default=16)
    noise.add_argument("--seed", type=int, default=2024)
    noise.add_argument("--k", type=_triple, default=(0, 0, 0))
    noise.add_argument("--format", choices=["json", "csv"], default="json")
    noise.add_argument("--out")

    model = sub.add_parser("model", help="generate model fixtures")
    model_sub = model.add_subparsers(dest="model_kind", required=True)
    hubbard = model_sub.add_parser("hubbard", help="1D Hubbard ring in the band basis")
    hubbard.add_argument("--nk", type=int, required=True)
    hubbard.add_argument("--t", type=float, default=1.0)
    hubbard.add_argument("--u", type=float, default=4.0)
    hubbard.add_argument("--nelec", type=int, required=True)
    hubbard.add_argument(
        "--gauge-seed",
        type=int,
        default=None,
        help="apply a random complex orbital gauge (same physics, complex integrals)",
    )
    hubbard.add_argument("--out", required=True)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except FileNotFoundError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except ValueError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


def _dispatch(args) -> int:
    if args.command == "ground":
        return _cmd_ground(args)
    if args.command == "fci":
        return _cmd_fci(args)
    if args.command == "eom":
        return _cmd_eom(args)
    if args.command == "bands":
        return _cmd_bands(args)
    if args.command == "noise":
        return _cmd_noise(args)
    if args.command == "model":
        return _cmd_model(args)
    raise AssertionError(f"unhandled command {args.command}")


def _load_table(path: str):
    from .kfcidump import parse_kfcidump

    return parse_kfcidump(path)


def _solve_ground(args, table):
    from .adapt import adapt_solve, build_pool
    from .lattice import build_hamiltonian

    hamiltonian = build_hamiltonian(table)
    pool = build_pool(table, args.pool, not args.no_complement)
    ansatz = adapt_solve(
        table, hamiltonian, pool=pool, eps=args.eps, max_iter=args.max_iter
    )
    return hamiltonian, ansatz


def _cmd_ground(args) -> int:
    from .adapt import save_checkpoint

    table = _load_table(args.integrals)
    _, ansatz = _solve_ground(args, table)
    summary = {
        "energy": ansatz.energy,
        "converged": ansatz.converged,
        "gradient_norm": ansatz.gradient_norm,
        "iterations": len(ansatz.entries),
        "operators": ansatz.labels,
    }
    print(json.dumps(summary, indent=1, sort_keys=True))
    if args.out:
        save_checkpoint(ansatz, args.out)
    return EXIT_OK if ansatz.converged else EXIT_NOT_CONVERGED


def _cmd_fci(args) -> int:
    from .fci import exact_ip_ea, fci_sector
    from .lattice import build_hamiltonian

    table = _load_table(args.integrals)
    hamiltonian = build_hamiltonian(table)
    ground = fci_sector(hamiltonian, table.n_electrons, 0.0)
    ip, ea = exact_ip_ea(hamiltonian, table.n_electrons, 0.0)
    payload = {
        "ground_energy": ground.ground_energy,
        "sector_energies": [float(e) for e in ground.energies],
        "ip": [float(e) for e in ip],
        "ea": [float(e) for e in ea],
    }
    text = json.dumps(payload, indent=1, sort_keys=True)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    return EXIT_OK


def _cmd_eom(args) -> int:
    from .adapt import load_checkpoint
    from .eom import build_basis, build_np_problem, build_qse_problem, dump_qse, solve_qse
    from .lattice import build_hamiltonian
    from .simulator import CompiledOperator

    table = _load_table(args.integrals)
    if args.checkpoint:
        ansatz = load_checkpoint(args.checkpoint, table)
        hamiltonian = build_hamiltonian(table)
    else:
        hamiltonian, ansatz = _solve_ground(args, table)
    compiled = CompiledOperator(hamiltonian)
    ground = ansatz.state()
    sectors = ["ip", "ea"] if args.sector == "both" else [args.sector]
    payload = {"ground_energy": ansatz.energy, "converged": ansatz.converged}
    for sector in sectors:
        basis = build_basis(table, sector, args.k, args.spin_channel)
        problem = build_qse_problem(ground, compiled, basis)
        solution = solve_qse(problem, s_tol=args.s_tol)
        payload[sector] = {
            "energies": [float(e) for e in solution.energies],
            "qpwt": [float(w) for w in solution.qpwt],
            "retained_dim": solution.retained_dim,
        }
        if args.eom_np:
            np_solution = solve_qse(
                build_np_problem(ground, compiled, basis), s_tol=args.s_tol
            )
            payload[f"{sector}_np"] = {
                "energies": [float(e) for e in np_solution.energies],
                "qpwt": [float(w) for w in np_solution.qpwt],
                "retained_dim": np_solution.retained_dim,
            }
        if args.out:
            stem = Path(args.out)
            path = (
                stem
                if len(sectors) == 1
                else stem.with_name(f"{stem.stem}_{sector}{stem.suffix}")
            )
            dump_qse(problem, solution, path)
    print(json.dumps(payload, indent=1, sort_keys=True))
    return EXIT_OK if ansatz.converged else EXIT_NOT_CONVERGED


def _cmd_bands(args) -> int:
    from .bands import BandsConfig, band_pipeline, emit_outputs, expand_table_over_mesh, load_fixture_dir

    config = BandsConfig(
        pool_kind=args.pool,
        complemented=not args.no_complement,
        eps=args.eps,
        max_iter=args.max_iter,
        qpwt_min=args.qpwt_min,
        s_tol=args.s_tol,
        eom_np=args.eom_np,
        alignment=args.alignment,
        jobs=args.jobs,
    )
    if args.fixture_dir:
        fixtures = load_fixture_dir(args.fixture_dir)
        shared = False
    else:
        table = _load_table(args.integrals)
        fixtures = expand_table_over_mesh(table)
        shared = True
    bands = band_pipeline(fixtures, config, shared_ground=shared)
    text = emit_outputs(bands, args.format, args.out)
    if not args.out:
        print(text, end="")
    failures = [r for r in bands.results if r.error or not r.converged]
    return EXIT_NOT_CONVERGED if failures else EXIT_OK


def _cmd_noise(args) -> int:
    from .eom import build_basis
    from .noise import (
        NoiseSpec,
        run_noise_experiment,
        write_experiment_csv,
        write_experiment_report,
    )

    table = _load_table(args.integrals)
    hamiltonian, ansatz = _solve_ground(args, table)
    if not ansatz.converged:
        return EXIT_NOT_CONVERGED
    spec = NoiseSpec(
        lam=args.lam,
        scale_factors=args.scales,
        shots=args.shots,
        repeats=args.repeats,
    )
    ip_basis = build_basis(table, "ip", args.k)
    ea_basis = build_basis(table, "ea", args.k)
    experiment = run_noise_experiment(
        ansatz, hamiltonian, ip_basis, ea_basis, spec, seed=args.seed
    )
    print(json.dumps(experiment.summary(), indent=1, sort_keys=True))
    if args.out:
        if args.format == "csv":
            write_experiment_csv(experiment, args.out)
        else:
            write_experiment_report(experiment, args.out)
    return EXIT_OK


def _cmd_model(args) -> int:
    from .kfcidump import write_kfcidump
    from .lattice import HubbardSpec, hubbard_integrals

    table = hubbard_integrals(HubbardSpec(args.nk, args.t, args.u, args.nelec))
    comment = (
        f"1D Hubbard ring in the band basis: N_k={args.nk}, t={args.t},"
        f" u={args.u}, n_electrons={args.nelec}"
    )
    if args.gauge_seed is not None:
        rng = np.random.default_rng(args.gauge_seed)
        phases = rng.uniform(0.0, 2.0 * np.pi, table.num_spatial)
        table = table.with_orbital_phases(phases)
        comment += f"\ncomplex orbital gauge applied, seed={args.gauge_seed}"
    write_kfcidump(table, args.out, comment=comment)
    print(f"wrote {args.out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Quasiparticle band structures of periodic solids on a simulated quantum
register: an adaptively grown variational ground state (with a complementary
operator pool for complex-orbital systems) plus projected equation-of-motion
removal/attachment spectra solved as a generalized eigenproblem.
"""

from .adapt import (
    AdaptAnsatz,
    AdaptError,
    OperatorPool,
    adapt_solve,
    adapt_step,
    build_pool,
    energy_gradient,
    load_checkpoint,
    residual_gradients,
    save_checkpoint,
)
from .bands import (
    HARTREE_TO_EV,
    BandsConfig,
    BandStructure,
    band_pipeline,
    emit_outputs,
    from_ev,
    load_fixture_dir,
    to_ev,
)
from .eom import (
    ExcitationBasis,
    QseProblem,
    QseSolution,
    build_basis,
    build_np_problem,
    build_qse_problem,
    eom_np_solve,
    quasiparticle_weight,
    solve_qse,
    verify_functional_equivalence,
)
from .fci import SectorSpectrum, exact_ip_ea, fci_sector
from .kfcidump import KfcidumpError, parse_kfcidump, write_kfcidump
from .lattice import (
    HubbardSpec,
    IntegralTable,
    KMesh,
    SpinOrbitalIndex,
    build_hamiltonian,
    hubbard_integrals,
    momentum_allowed,
)
from .noise import (
    DensityMatrix,
    NoiseSpec,
    noisy_eom_endpoints,
    run_noise_experiment,
    simulate_noisy_energy,
    zne_extrapolate,
)
from .operators import (
    FermionOperator,
    FermionTerm,
    PauliTerm,
    QubitOperator,
    adjoint,
    commutator,
    jordan_wigner,
    multiply,
)
from .simulator import (
    Statevector,
    apply_operator,
    apply_pool_exponential,
    expectation,
    prepare_hartree_fock,
)

__version__ = "0.1.0"

"""k-point meshes, integral tables, and assembly of the momentum-conserving
second-quantized Hamiltonian.

Index conventions:

* k-points are integer triples ``(n1, n2, n3)`` with componentwise modular
  arithmetic; the linear index is row-major (``n1`` slowest).
* spin orbital -> mode: ``((k_linear * n_orb) + orb) * 2 + spin`` with
  spin alpha = 0 (so alpha lives on even modes).
* a stored two-body value ``g[p kp, q kq, r kr, s ks]`` multiplies
  ``adag_{p sigma} adag_{q sigma'} a_{r sigma'} a_{s sigma}`` with a global
  1/2 prefactor, summed over both spins; integrals are spin-restricted
  (spatial orbitals).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .operators import FermionOperator, PauliTerm, QubitOperator, jordan_wigner

KTriple = tuple[int, int, int]
OneBodyKey = tuple[int, int, int, int]  # (p, kp, q, kq); k linear, orb 0-based
TwoBodyKey = tuple[int, int, int, int, int, int, int, int]

HERMITICITY_TOL = 1e-10


@dataclass(frozen=True)
class KMesh:
    """Regular Monkhorst-Pack-style grid labeled by integer triples."""

    dims: KTriple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != 3 or any(d < 1 for d in dims):
            raise ValueError(f"mesh dims must be three positive integers: {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def num_kpoints(self) -> int:
        return self.dims[0] * self.dims[1] * self.dims[2]

    def validate(self, k: KTriple) -> KTriple:
        k = tuple(int(x) for x in k)
        if len(k) != 3 or any(not (0 <= x < d) for x, d in zip(k, self.dims)):
            raise ValueError(f"k-point {k} outside mesh {self.dims}")
        return k

    def linear(self, k: KTriple) -> int:
        k = self.validate(k)
        return (k[0] * self.dims[1] + k[1]) * self.dims[2] + k[2]

    def triple(self, linear: int) -> KTriple:
        if not 0 <= linear < self.num_kpoints:
            raise ValueError(f"linear k index {linear} outside mesh {self.dims}")
        n3 = linear % self.dims[2]
        n2 = (linear // self.dims[2]) % self.dims[1]
        n1 = linear // (self.dims[1] * self.dims[2])
        return (n1, n2, n3)

    def add(self, a: KTriple, b: KTriple) -> KTriple:
        return tuple((x + y) % d for x, y, d in zip(a, b, self.dims))

    def neg(self, a: KTriple) -> KTriple:
        return tuple((-x) % d for x, d in zip(a, self.dims))

    def kpoints(self) -> list[KTriple]:
        return [self.triple(i) for i in range(self.num_kpoints)]


def momentum_allowed(
    creation_ks: Iterable[KTriple],
    annihilation_ks: Iterable[KTriple],
    mesh: KMesh,
) -> bool:
    """True iff the k sums of creations and annihilations agree mod the mesh
    (i.e. differ by a reciprocal lattice vector)."""
    total = [0, 0, 0]
    for k in creation_ks:
        k = mesh.validate(k)
        total = [t + x for t, x in zip(total, k)]
    for k in annihilation_ks:
        k = mesh.validate(k)
        total = [t - x for t, x in zip(total, k)]
    return all(t % d == 0 for t, d in zip(total, mesh.dims))


@dataclass(frozen=True)
class SpinOrbitalIndex:
    """Composite (k, orbital, spin) label with its linearized mode index."""

    k: KTriple
    orb: int
    spin: int  # 0 = alpha, 1 = beta

    def mode(self, mesh: KMesh, n_orb: int) -> int:
        if not 0 <= self.orb < n_orb:
            raise ValueError(f"orbital {self.orb} outside 0..{n_orb - 1}")
        if self.spin not in (0, 1):
            raise ValueError(f"spin must be 0 or 1, got {self.spin}")
        return (mesh.linear(self.k) * n_orb + self.orb) * 2 + self.spin

    @classmethod
    def from_mode(cls, mode: int, mesh: KMesh, n_orb: int) -> "SpinOrbitalIndex":
        spin = mode % 2
        spatial = mode // 2
        orb = spatial % n_orb
        k_linear = spatial // n_orb
        return cls(mesh.triple(k_linear), orb, spin)


def spin_of_mode(mode: int) -> int:
    return mode % 2


class IntegralTable:
    """Spin-restricted one-/two-electron integrals on a k mesh.

    Stores the complete Hermitian set of keys; construction validates
    momentum conservation and Hermiticity and fails loudly on violations.
    """

    def __init__(
        self,
        mesh: KMesh,
        n_orb: int,
        n_electrons: int,
        constant: float = 0.0,
        one_body: Mapping[OneBodyKey, complex] | None = None,
        two_body: Mapping[TwoBodyKey, complex] | None = None,
        ehf: float | None = None,
    ):
        self.mesh = mesh
        self.n_orb = int(n_orb)
        self.n_electrons = int(n_electrons)
        self.constant = float(constant)
        self.one_body = dict(one_body or {})
        self.two_body = dict(two_body or {})
        self.ehf = None if ehf is None else float(ehf)
        if self.n_orb < 1:
            raise ValueError("need at least one orbital per cell")
        if not 0 <= self.n_electrons <= self.num_modes:
            raise ValueError(
                f"{self.n_electrons} electrons do not fit {self.num_modes} modes"
            )
        self.validate()

    # -- structure ---------------------------------------------------------

    @property
    def num_kpoints(self) -> int:
        return self.mesh.num_kpoints

    @property
    def num_spatial(self) -> int:
        return self.num_kpoints * self.n_orb

    @property
    def num_modes(self) -> int:
        return self.num_spatial * 2

    def mode(self, orb: int, k_linear: int, spin: int) -> int:
        return (k_linear * self.n_orb + orb) * 2 + spin

    def spatial_of_mode(self, mode: int) -> tuple[int, int]:
        """(orb, k_linear) of a mode."""
        spatial = mode // 2
        return spatial % self.n_orb, spatial // self.n_orb

    def k_of_mode(self, mode: int) -> KTriple:
        _, k_linear = self.spatial_of_mode(mode)
        return self.mesh.triple(k_linear)

    # -- validation --------------------------------------------------------

    def validate(self):
        for (p, kp, q, kq), value in self.one_body.items():
            self._check_orb(p), self._check_orb(q)
            kp_t, kq_t = self.mesh.triple(kp), self.mesh.triple(kq)
            if not momentum_allowed([kp_t], [kq_t], self.mesh):
                raise ValueError(
                    f"one-body entry ({p},{kp},{q},{kq}) violates momentum conservation"
                )
            partner = self.one_body.get((q, kq, p, kp))
            if partner is None or abs(partner - value.conjugate()) > HERMITICITY_TOL:
                raise ValueError(
                    f"one-body entry ({p},{kp},{q},{kq}) has no conjugate partner"
                    f" within {HERMITICITY_TOL}"
                )
        for key, value in self.two_body.items():
            p, kp, q, kq, r, kr, s, ks = key
            for orb in (p, q, r, s):
                self._check_orb(orb)
            creation = [self.mesh.triple(kp), self.mesh.triple(kq)]
            annihilation = [self.mesh.triple(kr), self.mesh.triple(ks)]
            if not momentum_allowed(creation, annihilation, self.mesh):
                raise ValueError(f"two-body entry {key} violates momentum conservation")
            partner_key = (s, ks, r, kr, q, kq, p, kp)
            partner = self.two_body.get(partner_key)
            if partner is None or abs(partner - value.conjugate()) > HERMITICITY_TOL:
                raise ValueError(
                    f"two-body entry {key} has no conjugate partner within"
                    f" {HERMITICITY_TOL}"
                )

    def _check_orb(self, orb: int):
        if not 0 <= orb < self.n_orb:
            raise ValueError(f"orbital index {orb} outside 0..{self.n_orb - 1}")

    # -- reference filling ---------------------------------------------------

    def diagonal_energies(self) -> np.ndarray:
        """Real one-body diagonal per spatial orbital (orbital-energy proxy
        used for reference filling)."""
        out = np.zeros(self.num_spatial)
        for (p, kp, q, kq), value in self.one_body.items():
            if p == q and kp == kq:
                out[kp * self.n_orb + p] = value.real
        return out

    def hf_occupation(self) -> tuple[int, ...]:
        """Modes occupied in the mean-field reference determinant: the
        n_electrons spin orbitals of lowest one-body diagonal, ties broken by
        mode index. Only closed-shell fillings are accepted.
        """
        diag = self.diagonal_energies()
        order = sorted(range(self.num_modes), key=lambda m: (diag[m // 2], m))
        if self.n_electrons % 2:
            raise ValueError("open-shell filling: odd electron count")
        occupied = order[: self.n_electrons]
        spatial_counts: dict[int, int] = {}
        for m in occupied:
            spatial_counts[m // 2] = spatial_counts.get(m // 2, 0) + 1
        if any(c != 2 for c in spatial_counts.values()):
            raise ValueError(
                "open-shell filling is ambiguous: a spatial orbital would be"
                " singly occupied"
            )
        return tuple(sorted(occupied))

    # -- transforms ----------------------------------------------------------

    def with_orbital_phases(self, phases: np.ndarray) -> "IntegralTable":
        """Gauge-transform the orbitals by per-(orbital, k) U(1) phases.

        ``phases`` has shape (num_spatial,) in (k-major, orbital-minor) order.
        The transformed table describes the same physical system (identical
        spectra) but with complex integral values, mimicking the complex
        mean-field orbitals of a periodic calculation.
        """
        phases = np.asarray(phases, dtype=float)
        if phases.shape != (self.num_spatial,):
            raise ValueError(f"need {self.num_spatial} phases, got {phases.shape}")

        def phi(orb: int, k: int) -> float:
            return phases[k * self.n_orb + orb]

        one = {
            (p, kp, q, kq): value * cmath.exp(1j * (phi(q, kq) - phi(p, kp)))
            for (p, kp, q, kq), value in self.one_body.items()
        }
        two = {
            key: value
            * cmath.exp(
                1j
                * (
                    phi(key[4], key[5])
                    + phi(key[6], key[7])
                    - phi(key[0], key[1])
                    - phi(key[2], key[3])
                )
            )
            for key, value in self.two_body.items()
        }
        return IntegralTable(
            self.mesh, self.n_orb, self.n_electrons, self.constant, one, two, self.ehf
        )


@dataclass(frozen=True)
class HubbardSpec:
    """1D Hubbard ring in the momentum (band) basis; one orbital per cell."""

    n_sites: int
    t: float
    u: float
    n_electrons: int

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValueError("need at least one site")


def hubbard_integrals(spec: HubbardSpec) -> IntegralTable:
    """Analytic momentum-space integrals for the Hubbard ring:
    h(k) = -2 t cos(2 pi n / N) on the diagonal and g = u / N for every
    momentum-conserving four-index combination.

    The recorded mean-field energy is the closed form
    2 sum_occ h(k) + (u/N) (n_elec/2)^2 (same-spin terms vanish on a
    determinant, opposite spins see only the direct term).
    """
    n = spec.n_sites
    mesh = KMesh((1, 1, n))
    one_body: dict[OneBodyKey, complex] = {}
    for k in range(n):
        one_body[(0, k, 0, k)] = complex(-2.0 * spec.t * math.cos(2.0 * math.pi * k / n))
    two_body: dict[TwoBodyKey, complex] = {}
    g = spec.u / n
    for kp in range(n):
        for kq in range(n):
            for kr in range(n):
                ks = (kp + kq - kr) % n
                two_body[(0, kp, 0, kq, 0, kr, 0, ks)] = complex(g)
    ehf = None
    if spec.n_electrons % 2 == 0:
        levels = sorted(one_body[(0, k, 0, k)].real for k in range(n))
        n_pairs = spec.n_electrons // 2
        ehf = 2.0 * sum(levels[:n_pairs]) + g * n_pairs**2
    return IntegralTable(mesh, 1, spec.n_electrons, 0.0, one_body, two_body, ehf=ehf)


# ---------------------------------------------------------------------------
# Hamiltonian assembly and symmetry operators
# ---------------------------------------------------------------------------


def build_fermion_hamiltonian(table: IntegralTable) -> FermionOperator:
    """Second-quantized Hamiltonian with explicit spin expansion."""
    from .operators import FermionTerm

    terms = []
    if table.constant:
        terms.append(FermionTerm(table.constant, ()))
    for (p, kp, q, kq), value in table.one_body.items():
        for spin in (0, 1):
            terms.append(
                FermionTerm(
                    value,
                    ((table.mode(p, kp, spin), True), (table.mode(q, kq, spin), False)),
                )
            )
    for (p, kp, q, kq, r, kr, s, ks), value in table.two_body.items():
        for sp in (0, 1):
            for sq in (0, 1):
                terms.append(
                    FermionTerm(
                        0.5 * value,
                        (
                            (table.mode(p, kp, sp), True),
                            (table.mode(q, kq, sq), True),
                            (table.mode(r, kr, sq), False),
                            (table.mode(s, ks, sp), False),
                        ),
                    )
                )
    return FermionOperator(terms)


def build_hamiltonian(table: IntegralTable) -> QubitOperator:
    """Jordan-Wigner image of the table's Hamiltonian, simplified."""
    return jordan_wigner(build_fermion_hamiltonian(table), table.num_modes)


def number_operator(num_modes: int) -> QubitOperator:
    """Total particle number as a qubit operator."""
    terms = [PauliTerm(0.5 * num_modes, ())]
    terms += [PauliTerm(-0.5, ((m, "Z"),)) for m in range(num_modes)]
    return QubitOperator(terms, num_modes).simplify()

def sz_operator(num_modes: int) -> QubitOperator:
    """Total Sz (alpha on even modes, beta on odd)."""
    terms = []
    for m in range(num_modes):
        sign = 1.0 if m % 2 == 0 else -1.0
        terms.append(PauliTerm(0.25 * sign, ()))
        terms.append(PauliTerm(-0.25 * sign, ((m, "Z"),)))
    return QubitOperator(terms, num_modes).simplify()


def momentum_phase_operator(table: IntegralTable, axis: int = 2) -> QubitOperator:
    """Unitary exp(2 pi i K / N) along a mesh axis, where K is the total
    crystal momentum component.

    The raw weighted number operator K only commutes with H up to reciprocal
    lattice vectors (Umklapp terms shift it by multiples of N), so the exact
    symmetry statement is that this diagonal phase unitary commutes with H.
    """
    n_axis = table.mesh.dims[axis]
    op = QubitOperator.identity(table.num_modes)
    for mode in range(table.num_modes):
        _, k_linear = table.spatial_of_mode(mode)
        component = table.mesh.triple(k_linear)[axis]
        phase = cmath.exp(2j * math.pi * component / n_axis)
        # exp(i phi n_m) = (1 + e^{i phi})/2 I + (1 - e^{i phi})/2 Z_m
        factor = QubitOperator(
            (
                PauliTerm(0.5 * (1 + phase), ()),
                PauliTerm(0.5 * (1 - phase), ((mode, "Z"),)),
            ),
            table.num_modes,
        )
        op = (op * factor).simplify()
    return op

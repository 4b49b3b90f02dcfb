"""Exact operator algebra: second-quantized fermionic operators, sparse Pauli
strings, and the Jordan-Wigner transform between them.

Conventions fixed here and relied on everywhere else:

* fermionic mode ``m`` maps to qubit ``m``, one-to-one;
* ``a^dag_m -> (X_m - i Y_m)/2  (x)  Z_j for all j < m``;
* Pauli strings are stored sparsely as ``(qubit, letter)`` pairs and the
  phase of a string product is tracked exactly in ``{1, -1, 1j, -1j}``.

All objects are immutable; operations are pure functions and safe to share
between threads.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

#: simplify() drops terms whose coefficient magnitude falls below this.
COEFF_TOL = 1e-14

Factor = tuple[int, bool]  # (mode index, True for creation)


def _check_coefficient(c: complex) -> complex:
    c = complex(c)
    if not (cmath.isfinite(c)):
        raise ValueError(f"operator coefficient must be finite, got {c!r}")
    return c


@dataclass(frozen=True)
class FermionTerm:
    """A single product of ladder operators with a complex prefactor.

    ``factors`` keeps insertion order; nothing is normal-ordered implicitly.
    """

    coefficient: complex
    factors: tuple[Factor, ...]

    def __post_init__(self):
        object.__setattr__(self, "coefficient", _check_coefficient(self.coefficient))
        factors = tuple((int(m), bool(d)) for m, d in self.factors)
        for mode, _ in factors:
            if mode < 0:
                raise ValueError(f"mode index must be non-negative, got {mode}")
        object.__setattr__(self, "factors", factors)

    def adjoint(self) -> "FermionTerm":
        return FermionTerm(
            self.coefficient.conjugate(),
            tuple((m, not d) for m, d in reversed(self.factors)),
        )

    def max_mode(self) -> int:
        return max((m for m, _ in self.factors), default=-1)

    def __str__(self) -> str:
        ops = " ".join(f"a{'^' if d else ''}({m})" for m, d in self.factors)
        return f"({self.coefficient}) {ops or '1'}"


class FermionOperator:
    """Sum of :class:`FermionTerm`; supports +, -, * (operator and scalar)."""

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[FermionTerm] = ()):
        self.terms: tuple[FermionTerm, ...] = tuple(terms)

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls) -> "FermionOperator":
        return cls()

    @classmethod
    def identity(cls, coefficient: complex = 1.0) -> "FermionOperator":
        return cls((FermionTerm(coefficient, ()),))

    @classmethod
    def from_factors(
        cls, coefficient: complex, factors: Sequence[Factor]
    ) -> "FermionOperator":
        return cls((FermionTerm(coefficient, tuple(factors)),))

    @classmethod
    def creation(cls, mode: int) -> "FermionOperator":
        return cls.from_factors(1.0, ((mode, True),))

    @classmethod
    def annihilation(cls, mode: int) -> "FermionOperator":
        return cls.from_factors(1.0, ((mode, False),))

    # -- algebra -----------------------------------------------------------

    def __add__(self, other: "FermionOperator") -> "FermionOperator":
        return FermionOperator(self.terms + other.terms)

    def __sub__(self, other: "FermionOperator") -> "FermionOperator":
        return self + (-other)

    def __neg__(self) -> "FermionOperator":
        return self * (-1.0)

    def __mul__(self, other) -> "FermionOperator":
        if isinstance(other, FermionOperator):
            return FermionOperator(
                FermionTerm(a.coefficient * b.coefficient, a.factors + b.factors)
                for a in self.terms
                for b in other.terms
            )
        return FermionOperator(
            FermionTerm(t.coefficient * complex(other), t.factors) for t in self.terms
        )

    def __rmul__(self, other) -> "FermionOperator":
        return self * other

    def adjoint(self) -> "FermionOperator":
        return FermionOperator(t.adjoint() for t in self.terms)

    def max_mode(self) -> int:
        return max((t.max_mode() for t in self.terms), default=-1)

    # -- canonicalization --------------------------------------------------

    def normal_ordered(self) -> "FermionOperator":
        """Rewrite with creations first (modes descending), then annihilations
        (modes descending), generating the anticommutator delta terms."""
        combined: dict[tuple[Factor, ...], complex] = {}
        work: list[tuple[complex, list[Factor]]] = [
            (t.coefficient, list(t.factors)) for t in self.terms
        ]
        while work:
            coeff, factors = work.pop()
            i = _first_disorder(factors)
            if i is None:
                key = tuple(factors)
                combined[key] = combined.get(key, 0.0) + coeff
                continue
            (m1, d1), (m2, d2) = factors[i], factors[i + 1]
            if d1 == d2:
                if m1 == m2:
                    continue  # a a or adag adag on the same mode: zero
                swapped = factors[:i] + [factors[i + 1], factors[i]] + factors[i + 2 :]
                work.append((-coeff, swapped))
            else:
                # annihilation before creation
                swapped = factors[:i] + [factors[i + 1], factors[i]] + factors[i + 2 :]
                work.append((-coeff, swapped))
                if m1 == m2:
                    work.append((coeff, factors[:i] + factors[i + 2 :]))
        return FermionOperator(
            FermionTerm(c, f) for f, c in combined.items() if abs(c) > 0.0
        )

    def simplify(self, tol: float = COEFF_TOL) -> "FermionOperator":
        """Normal-order, merge identical factor sequences, prune tiny terms."""
        ordered = self.normal_ordered()
        terms = sorted(
            (t for t in ordered.terms if abs(t.coefficient) >= tol),
            key=lambda t: t.factors,
        )
        return FermionOperator(terms)

    def is_zero(self, tol: float = COEFF_TOL) -> bool:
        return not self.simplify(tol).terms

    def __str__(self) -> str:
        return " + ".join(str(t) for t in self.terms) or "0"

    def __repr__(self) -> str:
        return f"FermionOperator({len(self.terms)} terms)"


def _first_disorder(factors: list[Factor]) -> int | None:
    for i in range(len(factors) - 1):
        (m1, d1), (m2, d2) = factors[i], factors[i + 1]
        if not d1 and d2:
            return i
        if d1 == d2 and m1 <= m2:
            return i
    return None


def multiply(a: FermionOperator, b: FermionOperator) -> FermionOperator:
    """Operator product by factor-list concatenation (not normal-ordered)."""
    return a * b


def adjoint(a: FermionOperator) -> FermionOperator:
    return a.adjoint()


# ---------------------------------------------------------------------------
# Pauli layer
# ---------------------------------------------------------------------------

_PAULI_MUL: dict[tuple[str, str], tuple[complex, str | None]] = {
    ("X", "X"): (1.0, None),
    ("Y", "Y"): (1.0, None),
    ("Z", "Z"): (1.0, None),
    ("X", "Y"): (1j, "Z"),
    ("Y", "X"): (-1j, "Z"),
    ("Y", "Z"): (1j, "X"),
    ("Z", "Y"): (-1j, "X"),
    ("Z", "X"): (1j, "Y"),
    ("X", "Z"): (-1j, "Y"),
}

_PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class PauliTerm:
    """A weighted Pauli string; ``letters`` maps qubit -> X/Y/Z, identity is
    implicit on every other qubit."""

    coefficient: complex
    letters: tuple[tuple[int, str], ...]

    def __post_init__(self):
        object.__setattr__(self, "coefficient", _check_coefficient(self.coefficient))
        letters = tuple(sorted((int(q), str(l)) for q, l in self.letters))
        qubits = [q for q, _ in letters]
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"duplicate qubit in Pauli string: {letters}")
        for q, l in letters:
            if q < 0:
                raise ValueError(f"qubit index must be non-negative, got {q}")
            if l not in ("X", "Y", "Z"):
                raise ValueError(f"Pauli letter must be X, Y or Z, got {l!r}")
        object.__setattr__(self, "letters", letters)

    def mul(self, other: "PauliTerm") -> "PauliTerm":
        phase: complex = 1.0
        merged: list[tuple[int, str]] = []
        a, b = dict(self.letters), dict(other.letters)
        for q in sorted(set(a) | set(b)):
            if q in a and q in b:
                ph, letter = _PAULI_MUL[(a[q], b[q])]
                phase *= ph
                if letter is not None:
                    merged.append((q, letter))
            else:
                merged.append((q, a.get(q) or b[q]))
        return PauliTerm(self.coefficient * other.coefficient * phase, tuple(merged))

    def commutes_with(self, other: "PauliTerm") -> bool:
        a, b = dict(self.letters), dict(other.letters)
        clashes = sum(1 for q in set(a) & set(b) if a[q] != b[q])
        return clashes % 2 == 0

    def max_qubit(self) -> int:
        return max((q for q, _ in self.letters), default=-1)

    def label(self, num_qubits: int) -> str:
        chars = ["I"] * num_qubits
        for q, l in self.letters:
            chars[q] = l
        return "".join(chars)

    def __str__(self) -> str:
        body = " ".join(f"{l}{q}" for q, l in self.letters) or "I"
        return f"({self.coefficient}) {body}"


class QubitOperator:
    """Weighted sum of Pauli strings on a fixed register size."""

    __slots__ = ("terms", "num_qubits")

    def __init__(self, terms: Iterable[PauliTerm], num_qubits: int):
        self.terms: tuple[PauliTerm, ...] = tuple(terms)
        self.num_qubits = int(num_qubits)
        for t in self.terms:
            if t.max_qubit() >= self.num_qubits:
                raise ValueError(
                    f"Pauli string {t} does not fit on {self.num_qubits} qubits"
                )

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, num_qubits: int) -> "QubitOperator":
        return cls((), num_qubits)

    @classmethod
    def identity(cls, num_qubits: int, coefficient: complex = 1.0) -> "QubitOperator":
        return cls((PauliTerm(coefficient, ()),), num_qubits)

    @classmethod
    def from_letters(
        cls,
        coefficient: complex,
        letters: Sequence[tuple[int, str]],
        num_qubits: int,
    ) -> "QubitOperator":
        return cls((PauliTerm(coefficient, tuple(letters)),), num_qubits)

    # -- algebra -----------------------------------------------------------

    def _check_register(self, other: "QubitOperator"):
        if self.num_qubits != other.num_qubits:
            raise ValueError(
                f"register size mismatch: {self.num_qubits} vs {other.num_qubits}"
            )

    def __add__(self, other: "QubitOperator") -> "QubitOperator":
        self._check_register(other)
        return QubitOperator(self.terms + other.terms, self.num_qubits)

    def __sub__(self, other: "QubitOperator") -> "QubitOperator":
        return self + (-other)

    def __neg__(self) -> "QubitOperator":
        return self * (-1.0)

    def __mul__(self, other) -> "QubitOperator":
        if isinstance(other, QubitOperator):
            self._check_register(other)
            return QubitOperator(
                (a.mul(b) for a in self.terms for b in other.terms), self.num_qubits
            )
        return QubitOperator(
            (PauliTerm(t.coefficient * complex(other), t.letters) for t in self.terms),
            self.num_qubits,
        )

    def __rmul__(self, other) -> "QubitOperator":
        return self * other

    def adjoint(self) -> "QubitOperator":
        # Pauli strings are Hermitian, so only coefficients conjugate.
        return QubitOperator(
            (PauliTerm(t.coefficient.conjugate(), t.letters) for t in self.terms),
            self.num_qubits,
        )

    def simplify(self, tol: float = COEFF_TOL) -> "QubitOperator":
        combined: dict[tuple[tuple[int, str], ...], complex] = {}
        for t in self.terms:
            combined[t.letters] = combined.get(t.letters, 0.0) + t.coefficient
        terms = sorted(
            (
                PauliTerm(c, letters)
                for letters, c in combined.items()
                if abs(c) >= tol
            ),
            key=lambda t: t.letters,
        )
        return QubitOperator(terms, self.num_qubits)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(t.coefficient.imag) <= tol for t in self.simplify().terms)

    def max_abs_coefficient(self) -> float:
        return max((abs(t.coefficient) for t in self.simplify().terms), default=0.0)

    def is_zero(self, tol: float = COEFF_TOL) -> bool:
        return self.max_abs_coefficient() < tol

    def to_matrix(self) -> np.ndarray:
        """Dense matrix in the little-endian basis (bit m of the index is the
        occupation of qubit m). Intended for small registers."""
        if self.num_qubits > 14:
            raise ValueError(
                f"dense matrix of {self.num_qubits} qubits refused (guard at 14)"
            )
        dim = 2**self.num_qubits
        out = np.zeros((dim, dim), dtype=complex)
        for t in self.terms:
            m = np.array([[t.coefficient]], dtype=complex)
            # Little-endian: qubit 0 is the fastest index, so it is the
            # rightmost kron factor.
            for q in range(self.num_qubits - 1, -1, -1):
                m = np.kron(m, _PAULI_MATRICES[dict(t.letters).get(q, "I")])
            out += m
        return out

    def __str__(self) -> str:
        return " + ".join(str(t) for t in self.terms) or "0"

    def __repr__(self) -> str:
        return f"QubitOperator({len(self.terms)} terms, {self.num_qubits} qubits)"


def commutator(a: QubitOperator, b: QubitOperator) -> QubitOperator:
    """[a, b] = ab - ba, simplified, with exact phase tracking."""
    return (a * b - b * a).simplify()


def anticommutator(a: QubitOperator, b: QubitOperator) -> QubitOperator:
    return (a * b + b * a).simplify()


# ---------------------------------------------------------------------------
# Jordan-Wigner transform
# ---------------------------------------------------------------------------


def _jw_factor(mode: int, dagger: bool) -> tuple[PauliTerm, PauliTerm]:
    zs = tuple((j, "Z") for j in range(mode))
    x = PauliTerm(0.5, zs + ((mode, "X"),))
    y = PauliTerm(-0.5j if dagger else 0.5j, zs + ((mode, "Y"),))
    return x, y


def jordan_wigner(op: FermionOperator, num_modes: int) -> QubitOperator:
    """Map a fermionic operator to qubits; linear over terms, simplified.

    Raises IndexError if any mode index does not fit the register.
    """
    out: dict[tuple[tuple[int, str], ...], complex] = {}
    for term in op.terms:
        if term.max_mode() >= num_modes:
            raise IndexError(
                f"mode {term.max_mode()} out of range for {num_modes} modes"
            )
        acc = [PauliTerm(term.coefficient, ())]
        for mode, dagger in term.factors:
            fx, fy = _jw_factor(mode, dagger)
            acc = [p.mul(f) for p in acc for f in (fx, fy)]
        for p in acc:
            out[p.letters] = out.get(p.letters, 0.0) + p.coefficient
    terms = sorted(
        (PauliTerm(c, letters) for letters, c in out.items() if abs(c) >= COEFF_TOL),
        key=lambda t: t.letters,
    )
    return QubitOperator(terms, num_modes)

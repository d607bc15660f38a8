"""Pauli-string operators, weighted observables and commuting encodings.

Everything in this module is plain data plus a little algebra: the heavy
lifting (state evolution, sampling) lives in :mod:`qsense.sim.states` and
:mod:`qsense.sim.setups`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PAULI_LETTERS = "IXYZ"

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "Y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}


class UnsupportedMeasurementError(ValueError):
    """Observable cannot be measured with a single per-qubit basis rotation."""


def _single_qubit_products() -> dict[tuple[str, str], tuple[complex, str]]:
    table = {}
    for a in PAULI_LETTERS:
        for b in PAULI_LETTERS:
            prod = PAULI_MATRICES[a] @ PAULI_MATRICES[b]
            for c in PAULI_LETTERS:
                for phase in (1.0, -1.0, 1.0j, -1.0j):
                    if np.allclose(prod, phase * PAULI_MATRICES[c]):
                        table[(a, b)] = (phase, c)
    return table


_PRODUCTS = _single_qubit_products()


@dataclass(frozen=True)
class PauliString:
    """A signed tensor product of single-qubit Pauli operators.

    ``letters`` is a string over ``I, X, Y, Z`` with one letter per qubit
    (qubit 0 is the leftmost letter); ``sign`` is +1 or -1.
    """

    letters: str
    sign: int = 1

    def __post_init__(self) -> None:
        if not self.letters:
            raise ValueError("PauliString needs at least one qubit")
        bad = set(self.letters) - set(PAULI_LETTERS)
        if bad:
            raise ValueError(f"invalid Pauli letters: {sorted(bad)}")
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    @property
    def support(self) -> tuple[int, ...]:
        """Qubit indices where the string acts non-trivially."""
        return tuple(q for q, ch in enumerate(self.letters) if ch != "I")

    def commutes(self, other: "PauliString") -> bool:
        """Two Pauli strings commute iff they differ on an even number of
        positions where both act non-trivially."""
        if self.n_qubits != other.n_qubits:
            raise ValueError("qubit counts differ")
        clashes = sum(
            1
            for x, y in zip(self.letters, other.letters)
            if x != "I" and y != "I" and x != y
        )
        return clashes % 2 == 0

    def compose(self, other: "PauliString") -> "PauliString":
        """Operator product ``self @ other``.

        Raises ValueError when the accumulated phase is imaginary (the
        result then falls outside the +/-1-signed string family).  Composing
        a string with itself always yields the identity string with sign +1.
        """
        if self.n_qubits != other.n_qubits:
            raise ValueError("qubit counts differ")
        phase = complex(self.sign * other.sign)
        out = []
        for x, y in zip(self.letters, other.letters):
            p, c = _PRODUCTS[(x, y)]
            phase *= p
            out.append(c)
        if abs(phase.imag) > 1e-12:
            raise ValueError("product phase is imaginary; not a signed Pauli string")
        return PauliString("".join(out), int(round(phase.real)))

    def matrix(self) -> np.ndarray:
        """Dense matrix, for small-n oracle checks."""
        m = np.array([[self.sign]], dtype=complex)
        for ch in self.letters:
            m = np.kron(m, PAULI_MATRICES[ch])
        return m

    def __str__(self) -> str:
        return ("-" if self.sign < 0 else "") + self.letters

    @classmethod
    def parse(cls, text: str) -> "PauliString":
        """Inverse of ``str``; accepts an optional leading ``+`` or ``-``."""
        sign = 1
        if text and text[0] in "+-":
            sign = -1 if text[0] == "-" else 1
            text = text[1:]
        return cls(text, sign)


@dataclass(frozen=True)
class Observable:
    """Real-weighted sum of Pauli strings with total weight at most one.

    The weight-sum cap enforces an operator-norm bound of 1, which keeps all
    measured responses in [-1, 1].
    """

    terms: tuple[tuple[float, PauliString], ...]

    def __post_init__(self) -> None:
        if not self.terms:
            raise ValueError("Observable needs at least one term")
        n = self.terms[0][1].n_qubits
        if any(p.n_qubits != n for _, p in self.terms):
            raise ValueError("all terms must act on the same qubit count")
        total = sum(abs(w) for w, _ in self.terms)
        if total > 1.0 + 1e-12:
            raise ValueError(
                f"sum of |weights| = {total:.6g} exceeds 1; operator norm not certified"
            )
        object.__setattr__(
            self, "terms", tuple((float(w), p) for w, p in self.terms)
        )

    @property
    def n_qubits(self) -> int:
        return self.terms[0][1].n_qubits

    @property
    def is_single_pauli(self) -> bool:
        """True when the observable is a single +/-1-weighted Pauli string,
        in which case it squares to the identity."""
        return len(self.terms) == 1 and abs(abs(self.terms[0][0]) - 1.0) < 1e-12

    def measurement_letters(self) -> str:
        """Per-qubit measurement basis shared by every term.

        Requires the terms to commute qubit-wise: at each position all
        non-identity letters agree.  Raises UnsupportedMeasurementError
        otherwise.
        """
        letters = ["I"] * self.n_qubits
        for _, p in self.terms:
            for q, ch in enumerate(p.letters):
                if ch == "I":
                    continue
                if letters[q] == "I":
                    letters[q] = ch
                elif letters[q] != ch:
                    raise UnsupportedMeasurementError(
                        f"terms disagree on qubit {q} ({letters[q]} vs {ch}); "
                        "a single basis rotation cannot measure this observable"
                    )
        return "".join(letters)

    def is_qubitwise_commuting(self) -> bool:
        try:
            self.measurement_letters()
        except UnsupportedMeasurementError:
            return False
        return True

    def measurement_diagonal(self) -> np.ndarray:
        """Eigenvalue of the observable for each computational bitstring after
        the per-qubit basis rotation.  Index convention: qubit 0 is the most
        significant bit."""
        n = self.n_qubits
        diag = np.zeros(2**n)
        plus_minus = np.array([1.0, -1.0])
        ones = np.array([1.0, 1.0])
        for w, p in self.terms:
            v = np.array([1.0])
            for ch in p.letters:
                v = np.kron(v, plus_minus if ch != "I" else ones)
            diag += w * p.sign * v
        return diag

    def matrix(self) -> np.ndarray:
        return sum(w * p.matrix() for w, p in self.terms)


@dataclass(frozen=True)
class EncodingHamiltonian:
    """Sum of pairwise-commuting, involutory Pauli terms.

    The term count sets the degree of the trigonometric response the
    encoding can produce.
    """

    terms: tuple[PauliString, ...]

    def __post_init__(self) -> None:
        if not self.terms:
            raise ValueError("EncodingHamiltonian needs at least one term")
        n = self.terms[0].n_qubits
        if any(t.n_qubits != n for t in self.terms):
            raise ValueError("all terms must act on the same qubit count")
        for i, a in enumerate(self.terms):
            for b in self.terms[i + 1 :]:
                if not a.commutes(b):
                    raise ValueError(f"encoding terms {a} and {b} do not commute")

    @property
    def n_qubits(self) -> int:
        return self.terms[0].n_qubits

    def __len__(self) -> int:
        return len(self.terms)

    def matrix(self) -> np.ndarray:
        return sum(t.matrix() for t in self.terms)

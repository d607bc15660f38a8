"""Dense statevector / density-matrix representation and low-level updates.

States are immutable at the API boundary; the applier functions in this
module work on raw ndarrays shaped ``[2] * n`` (pure) or ``[2] * 2n``
(density, row axes first) and always return new arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .pauli import PAULI_MATRICES, Observable


class DimensionLimitError(ValueError):
    """Requested simulation exceeds the configured qubit cap."""


@dataclass(frozen=True)
class QuantumState:
    """A pure state (amplitude vector of length 2**n) or a mixed state
    (2**n x 2**n density matrix) over ``n`` qubits."""

    n: int
    vector: np.ndarray | None = None
    matrix: np.ndarray | None = None

    def __post_init__(self) -> None:
        if (self.vector is None) == (self.matrix is None):
            raise ValueError("provide exactly one of vector or matrix")
        dim = 2**self.n
        if self.vector is not None:
            v = np.asarray(self.vector, dtype=complex).reshape(-1)
            if v.shape != (dim,):
                raise ValueError(f"vector length {v.shape} != 2**{self.n}")
            v = v.copy()
            v.flags.writeable = False
            object.__setattr__(self, "vector", v)
        else:
            m = np.asarray(self.matrix, dtype=complex)
            if m.shape != (dim, dim):
                raise ValueError(f"matrix shape {m.shape} != (2**{self.n},)*2")
            m = m.copy()
            m.flags.writeable = False
            object.__setattr__(self, "matrix", m)

    @property
    def is_pure(self) -> bool:
        return self.vector is not None

    @classmethod
    def zero(cls, n: int, density: bool = False) -> "QuantumState":
        dim = 2**n
        if density:
            m = np.zeros((dim, dim), dtype=complex)
            m[0, 0] = 1.0
            return cls(n, matrix=m)
        v = np.zeros(dim, dtype=complex)
        v[0] = 1.0
        return cls(n, vector=v)

    def to_density(self) -> "QuantumState":
        if not self.is_pure:
            return self
        return QuantumState(self.n, matrix=np.outer(self.vector, self.vector.conj()))

    def tensor(self) -> np.ndarray:
        """Writable tensor copy: shape [2]*n (pure) or [2]*2n (density)."""
        if self.is_pure:
            return self.vector.reshape([2] * self.n).copy()
        return self.matrix.reshape([2] * (2 * self.n)).copy()

    def validate(self) -> None:
        """Check the physical-state invariants; raises ValueError on failure."""
        if self.is_pure:
            norm = float(np.sum(np.abs(self.vector) ** 2))
            if abs(norm - 1.0) > 1e-12:
                raise ValueError(f"squared-amplitude sum {norm} is not 1")
            return
        m = self.matrix
        if np.abs(m - m.conj().T).max() > 1e-12:
            raise ValueError("density matrix is not Hermitian")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > 1e-12:
            raise ValueError(f"trace {tr} is not 1")
        eigs = np.linalg.eigvalsh(m)
        if eigs.min() < -1e-10:
            raise ValueError(f"negative eigenvalue {eigs.min()}")

    def expectation(self, obs: Observable) -> float:
        """<O> = Tr[rho O], computed term by term without building O."""
        if obs.n_qubits != self.n:
            raise ValueError("observable qubit count mismatch")
        if self.is_pure:
            psi = self.vector.reshape([2] * self.n)
            total = 0.0
            for w, p in obs.terms:
                phi = apply_pauli_letters(psi, p.letters)
                total += w * p.sign * np.vdot(psi, phi).real
            return float(total)
        rho = self.matrix.reshape([2] * (2 * self.n))
        total = 0.0
        for w, p in obs.terms:
            prod = apply_pauli_letters(rho, p.letters)
            tr = np.trace(prod.reshape(2**self.n, 2**self.n))
            total += w * p.sign * tr.real
        return float(total)

    def second_moment(self, obs: Observable) -> float:
        """Tr[rho O^2], used for observable variances."""
        if self.is_pure:
            psi = self.vector.reshape([2] * self.n)
            phi = np.zeros_like(psi)
            for w, p in obs.terms:
                phi = phi + w * p.sign * apply_pauli_letters(psi, p.letters)
            return float(np.vdot(phi, phi).real)
        rho = self.matrix.reshape([2] * (2 * self.n))

        def apply_obs(t: np.ndarray) -> np.ndarray:
            out = np.zeros_like(t)
            for w, p in obs.terms:
                out = out + w * p.sign * apply_pauli_letters(t, p.letters)
            return out

        prod = apply_obs(apply_obs(rho))
        return float(np.trace(prod.reshape(2**self.n, 2**self.n)).real)


def apply_matrix(tensor: np.ndarray, mat: np.ndarray, axes: tuple[int, ...]) -> np.ndarray:
    """Left-multiply ``mat`` onto the given tensor axes (one axis per qubit)."""
    k = len(axes)
    m = mat.reshape([2] * (2 * k))
    t = np.tensordot(m, tensor, axes=(tuple(range(k, 2 * k)), axes))
    return np.moveaxis(t, tuple(range(k)), axes)


def apply_gate_pure(psi: np.ndarray, mat: np.ndarray, targets: tuple[int, ...]) -> np.ndarray:
    return apply_matrix(psi, mat, targets)


def apply_gate_density(
    rho: np.ndarray, mat: np.ndarray, targets: tuple[int, ...], n: int
) -> np.ndarray:
    # U on the row axes, conj(U) on the column axes gives U rho U^dagger.
    rho = apply_matrix(rho, mat, targets)
    return apply_matrix(rho, mat.conj(), tuple(n + q for q in targets))


def apply_pauli_letters(
    tensor: np.ndarray, letters: str, axis_offset: int = 0, conjugate: bool = False
) -> np.ndarray:
    """Apply the single-qubit matrices of a Pauli letter string (sign excluded)."""
    out = tensor
    for q, ch in enumerate(letters):
        if ch == "I":
            continue
        m = PAULI_MATRICES[ch]
        if conjugate:
            m = m.conj()
        out = apply_matrix(out, m, (axis_offset + q,))
    return out


def pauli_rotation_pure(
    psi: np.ndarray, letters: str, sign: int, theta: float
) -> np.ndarray:
    """exp(-i theta P / 2) |psi> for an involutory signed Pauli string P."""
    c = math.cos(theta / 2.0)
    s = math.sin(theta / 2.0)
    return c * psi - 1j * sign * s * apply_pauli_letters(psi, letters)


def pauli_rotation_density(
    rho: np.ndarray, letters: str, sign: int, theta: float, n: int
) -> np.ndarray:
    c = math.cos(theta / 2.0)
    s = math.sin(theta / 2.0)
    left = c * rho - 1j * sign * s * apply_pauli_letters(rho, letters)
    return c * left + 1j * sign * s * apply_pauli_letters(
        left, letters, axis_offset=n, conjugate=True
    )


def depolarize_qubit(rho: np.ndarray, q: int, p: float, n: int) -> np.ndarray:
    """Single-qubit depolarizing channel on a density tensor.

    With probability p the qubit is replaced by the maximally mixed state
    (so p = 1 fully mixes it), matching the global-step convention:
    rho -> (1 - 3p/4) rho + (p/4) sum_P P rho P over P in {X, Y, Z}.
    """
    if p == 0.0:
        return rho
    out = (1.0 - 0.75 * p) * rho
    for ch in "XYZ":
        t = apply_pauli_letters(rho, "I" * q + ch, axis_offset=0)
        t = apply_pauli_letters(t, "I" * q + ch, axis_offset=n, conjugate=True)
        out = out + (p / 4.0) * t
    return out


def depolarize_global(rho: np.ndarray, p: float, n: int) -> np.ndarray:
    """rho -> (1-p) rho + p I / 2**n on a density tensor."""
    if p == 0.0:
        return rho
    dim = 2**n
    flat = (1.0 - p) * rho.reshape(dim, dim)
    flat = flat + (p / dim) * np.eye(dim)
    return flat.reshape([2] * (2 * n))

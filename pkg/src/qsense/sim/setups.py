"""Sensing setups: preparation, parameter encoding, pre-measurement and
readout, with exact and finite-shot response evaluation.

A setup evaluates the response

    R(theta) = Tr[ D(S_theta(E(|0..0><0..0|))) O ]

where the encoding S_theta conjugates by exp(-i theta H / 2) and H is a sum
of pairwise-commuting involutory Pauli terms.  The rotation is applied as a
product of per-term rotations, which is exact because the terms commute.
The density-matrix path is used whenever any channel carries noise;
otherwise the cheaper statevector path runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .channels import Channel, GateOp
from .pauli import EncodingHamiltonian, Observable, PauliString
from .states import (
    DimensionLimitError,
    QuantumState,
    pauli_rotation_density,
    pauli_rotation_pure,
)

DEFAULT_MAX_PURE_QUBITS = 14
DEFAULT_MAX_DENSITY_QUBITS = 10


class ShotEstimate(NamedTuple):
    mean: float
    shots: int
    standard_error: float


@dataclass(frozen=True)
class SensingSetup:
    """Full description of one sensing experiment.

    ``noise`` is the per-gate depolarizing probability applied to each
    gate's target qubits inside the preparation and pre-measurement
    channels (0 means noiseless).  The encoding itself stays exact, so the
    noise is independent of the encoded parameter.
    """

    n: int
    preparation: Channel
    hamiltonian: EncodingHamiltonian
    premeasurement: Channel
    observable: Observable
    noise: float = 0.0
    kind: str = "custom"

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("setup needs at least one qubit")
        if not 0.0 <= self.noise <= 1.0:
            raise ValueError(f"noise probability {self.noise} outside [0, 1]")
        if self.hamiltonian.n_qubits != self.n:
            raise ValueError("encoding qubit count mismatch")
        if self.observable.n_qubits != self.n:
            raise ValueError("observable qubit count mismatch")
        self.preparation.validate(self.n)
        self.premeasurement.validate(self.n)

    @property
    def needs_density(self) -> bool:
        return (
            self.noise > 0.0
            or self.preparation.has_noise_ops
            or self.premeasurement.has_noise_ops
        )

    @property
    def encoding_degree(self) -> int:
        """Term count of the encoding; the response is a trigonometric
        polynomial of at most this degree."""
        return len(self.hamiltonian)


def ghz_preparation(n: int) -> Channel:
    # H on qubit 0, then a CNOT fan-out tree: every prepared qubit seeds one
    # new target per round, giving log-depth preparation.
    ops: list[GateOp] = [GateOp("h", (0,))]
    prepared = [0]
    next_target = 1
    while next_target < n:
        for src in list(prepared):
            if next_target >= n:
                break
            ops.append(GateOp("cnot", (src, next_target)))
            prepared.append(next_target)
            next_target += 1
    return Channel(tuple(ops))


def build_ghz_setup(n: int, noise: float = 0.0) -> SensingSetup:
    """GHZ magnetometry: GHZ probe, H = sum_j Z_j, parity readout."""
    if n < 1:
        raise ValueError("GHZ setup needs n >= 1")
    terms = tuple(
        PauliString("I" * j + "Z" + "I" * (n - j - 1)) for j in range(n)
    )
    observable = Observable(((1.0, PauliString("X" * n)),))
    return SensingSetup(
        n=n,
        preparation=ghz_preparation(n),
        hamiltonian=EncodingHamiltonian(terms),
        premeasurement=Channel(),
        observable=observable,
        noise=noise,
        kind="ghz",
    )


def build_squeezing_setup(n: int, noise: float = 0.0) -> SensingSetup:
    """One-axis twisting on a spin coherent probe |0..0>, reading Z on the
    last qubit.  The encoding has n(n-1)/2 terms X_j X_k."""
    if n < 2:
        raise ValueError("squeezing setup needs n >= 2")
    terms = []
    for j in range(n):
        for k in range(j + 1, n):
            letters = ["I"] * n
            letters[j] = "X"
            letters[k] = "X"
            terms.append(PauliString("".join(letters)))
    observable = Observable(((1.0, PauliString("I" * (n - 1) + "Z")),))
    return SensingSetup(
        n=n,
        preparation=Channel(),
        hamiltonian=EncodingHamiltonian(tuple(terms)),
        premeasurement=Channel(),
        observable=observable,
        noise=noise,
        kind="squeezing",
    )


def build_random_ansatz_setup(
    n: int, layers: int = 4, seed: int = 0, noise: float = 0.0
) -> SensingSetup:
    """Random hardware-efficient probe: per layer, RY and RZ rotations on
    every qubit followed by a nearest-neighbour CNOT chain.  Angles are drawn
    uniformly from [0, 2 pi) using ``seed``; H = sum_j Z_j Z_{j+1} and the
    readout averages X over all qubits."""
    if n < 2:
        raise ValueError("random-ansatz setup needs n >= 2")
    rng = np.random.default_rng(seed)
    ops: list[GateOp] = []
    for _ in range(layers):
        for q in range(n):
            ops.append(GateOp("ry", (q,), (float(rng.uniform(0.0, 2.0 * math.pi)),)))
        for q in range(n):
            ops.append(GateOp("rz", (q,), (float(rng.uniform(0.0, 2.0 * math.pi)),)))
        for q in range(n - 1):
            ops.append(GateOp("cnot", (q, q + 1)))
    terms = []
    for j in range(n - 1):
        letters = ["I"] * n
        letters[j] = "Z"
        letters[j + 1] = "Z"
        terms.append(PauliString("".join(letters)))
    obs_terms = tuple(
        (1.0 / n, PauliString("I" * q + "X" + "I" * (n - q - 1))) for q in range(n)
    )
    return SensingSetup(
        n=n,
        preparation=Channel(tuple(ops)),
        hamiltonian=EncodingHamiltonian(tuple(terms)),
        premeasurement=Channel(),
        observable=Observable(obs_terms),
        noise=noise,
        kind="random",
    )


def _check_caps(setup: SensingSetup, pure_cap: int, density_cap: int) -> bool:
    density = setup.needs_density
    cap = density_cap if density else pure_cap
    if setup.n > cap:
        path = "density-matrix" if density else "statevector"
        raise DimensionLimitError(
            f"{setup.n} qubits exceeds the {path} cap of {cap}"
        )
    return density


def _evolved_state(
    setup: SensingSetup,
    theta: float,
    pure_cap: int = DEFAULT_MAX_PURE_QUBITS,
    density_cap: int = DEFAULT_MAX_DENSITY_QUBITS,
) -> QuantumState:
    density = _check_caps(setup, pure_cap, density_cap)
    n = setup.n
    tensor = QuantumState.zero(n, density=density).tensor()
    tensor = setup.preparation.apply(tensor, n, density, gate_noise=setup.noise)
    for term in setup.hamiltonian.terms:
        if density:
            tensor = pauli_rotation_density(tensor, term.letters, term.sign, theta, n)
        else:
            tensor = pauli_rotation_pure(tensor, term.letters, term.sign, theta)
    tensor = setup.premeasurement.apply(tensor, n, density, gate_noise=setup.noise)
    if density:
        return QuantumState(n, matrix=tensor.reshape(2**n, 2**n))
    return QuantumState(n, vector=tensor.reshape(-1))


def exact_response(
    setup: SensingSetup,
    theta: float,
    pure_cap: int = DEFAULT_MAX_PURE_QUBITS,
    density_cap: int = DEFAULT_MAX_DENSITY_QUBITS,
) -> float:
    """Exact expectation of the readout observable at encoding angle theta."""
    state = _evolved_state(setup, theta, pure_cap, density_cap)
    return state.expectation(setup.observable)


def response_variance(
    setup: SensingSetup,
    theta: float,
    pure_cap: int = DEFAULT_MAX_PURE_QUBITS,
    density_cap: int = DEFAULT_MAX_DENSITY_QUBITS,
) -> float:
    """Observable variance Tr[rho O^2] - Tr[rho O]^2 at angle theta."""
    state = _evolved_state(setup, theta, pure_cap, density_cap)
    mean = state.expectation(setup.observable)
    return state.second_moment(setup.observable) - mean**2


def _measurement_rotation(letters: str) -> Channel:
    ops: list[GateOp] = []
    for q, ch in enumerate(letters):
        if ch == "X":
            ops.append(GateOp("h", (q,)))
        elif ch == "Y":
            ops.append(GateOp("sdg", (q,)))
            ops.append(GateOp("h", (q,)))
    return Channel(tuple(ops))


def sample_response(
    setup: SensingSetup,
    theta: float,
    shots: int,
    seed=None,
    pure_cap: int = DEFAULT_MAX_PURE_QUBITS,
    density_cap: int = DEFAULT_MAX_DENSITY_QUBITS,
) -> ShotEstimate:
    """Finite-shot estimate of the response.

    Rotates into the joint eigenbasis of the observable's terms (which must
    commute qubit-wise), samples ``shots`` computational-basis outcomes from
    the exact distribution and returns the empirical mean of the observable
    eigenvalue together with its standard error.  The estimate is unbiased:
    its expectation over the RNG equals ``exact_response``.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    letters = setup.observable.measurement_letters()
    state = _evolved_state(setup, theta, pure_cap, density_cap)
    n = setup.n
    rotation = _measurement_rotation(letters)
    tensor = rotation.apply(state.tensor(), n, density=not state.is_pure)
    if state.is_pure:
        probs = np.abs(tensor.reshape(-1)) ** 2
    else:
        probs = np.diag(tensor.reshape(2**n, 2**n)).real.copy()
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum()
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(shots, probs)
    eigs = setup.observable.measurement_diagonal()
    mean = float(counts @ eigs) / shots
    second = float(counts @ (eigs**2)) / shots
    variance = max(second - mean**2, 0.0)
    return ShotEstimate(mean, shots, math.sqrt(variance / shots))


def setup_to_json(setup: SensingSetup) -> dict:
    return {
        "kind": setup.kind,
        "n": setup.n,
        "noise": setup.noise,
        "preparation": setup.preparation.to_json_list(),
        "hamiltonian": [str(t) for t in setup.hamiltonian.terms],
        "observable": [[w, str(p)] for w, p in setup.observable.terms],
        "premeasurement": setup.premeasurement.to_json_list(),
    }


def setup_from_json(doc: dict) -> SensingSetup:
    return SensingSetup(
        n=int(doc["n"]),
        preparation=Channel.from_json_list(doc["preparation"]),
        hamiltonian=EncodingHamiltonian(
            tuple(PauliString.parse(t) for t in doc["hamiltonian"])
        ),
        premeasurement=Channel.from_json_list(doc["premeasurement"]),
        observable=Observable(
            tuple((float(w), PauliString.parse(p)) for w, p in doc["observable"])
        ),
        noise=float(doc.get("noise", 0.0)),
        kind=doc.get("kind", "custom"),
    )

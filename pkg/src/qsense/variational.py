"""Training a measurement circuit against the inferred response.

A fixed GHZ probe is encoded with H = sum_j Z_j; a parameterized
coarsening circuit (two-qubit blocks that halve the active register each
stage, ending on one readout qubit measured in Z) plays the role of the
pre-measurement channel.  The loss pushes the inferred response towards
the steepest usable curve R(theta) ~ n * theta on the window
(-pi/n, pi/n):

    L(params) = (n / 2 pi) * integral_{-pi/n}^{pi/n} (R(params; theta)/n - theta)^2 dtheta

and is evaluated in closed form from the response polynomial; no shot
noise enters during training.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .inference import response_polynomial, sensitivity_curve
from .sim import Observable, PauliString, SensingSetup
from .sim.channels import Channel, GateOp
from .sim.pauli import EncodingHamiltonian
from .sim.setups import ghz_preparation
from .trig import TrigPoly

PARAMS_PER_BLOCK = 6


@dataclass(frozen=True)
class TrainableMeasurement:
    """Coarsening measurement template.

    ``blocks`` lists (control, target) pairs; each block applies RZ, RY on
    both qubits, a CNOT onto the target, then RY, RZ on the target, which
    stays active while the control is dropped.  The readout observable is Z
    on the last remaining qubit (squares to the identity by construction).
    """

    n: int
    blocks: tuple[tuple[int, int], ...]
    readout: int

    @classmethod
    def convolutional(cls, n: int) -> "TrainableMeasurement":
        if n < 2:
            raise ValueError("need at least 2 qubits to coarsen")
        active = list(range(n))
        blocks: list[tuple[int, int]] = []
        while len(active) > 1:
            kept: list[int] = []
            for i in range(0, len(active) - 1, 2):
                blocks.append((active[i], active[i + 1]))
                kept.append(active[i + 1])
            if len(active) % 2:
                kept.append(active[-1])
            active = kept
        return cls(n, tuple(blocks), active[0])

    @property
    def parameter_count(self) -> int:
        return PARAMS_PER_BLOCK * len(self.blocks)

    def channel(self, params) -> Channel:
        params = np.asarray(params, dtype=float).reshape(-1)
        if len(params) != self.parameter_count:
            raise ValueError(
                f"expected {self.parameter_count} parameters, got {len(params)}"
            )
        ops: list[GateOp] = []
        for b, (ctrl, targ) in enumerate(self.blocks):
            p = params[PARAMS_PER_BLOCK * b : PARAMS_PER_BLOCK * (b + 1)]
            ops.append(GateOp("rz", (ctrl,), (p[0],)))
            ops.append(GateOp("ry", (ctrl,), (p[1],)))
            ops.append(GateOp("rz", (targ,), (p[2],)))
            ops.append(GateOp("ry", (targ,), (p[3],)))
            ops.append(GateOp("cnot", (ctrl, targ)))
            ops.append(GateOp("ry", (targ,), (p[4],)))
            ops.append(GateOp("rz", (targ,), (p[5],)))
        return Channel(tuple(ops))

    def observable(self) -> Observable:
        letters = ["I"] * self.n
        letters[self.readout] = "Z"
        return Observable(((1.0, PauliString("".join(letters))),))

    def setup(self, params) -> SensingSetup:
        """GHZ probe + Z-sum encoding + this measurement circuit."""
        terms = tuple(
            PauliString("I" * j + "Z" + "I" * (self.n - j - 1)) for j in range(self.n)
        )
        return SensingSetup(
            n=self.n,
            preparation=ghz_preparation(self.n),
            hamiltonian=EncodingHamiltonian(terms),
            premeasurement=self.channel(params),
            observable=self.observable(),
            noise=0.0,
            kind="variational",
        )


def _theta_weighted_integral(poly: TrigPoly, lo: float, hi: float) -> float:
    """integral theta * poly(theta) dtheta on [lo, hi], in closed form."""

    def anti(theta: float) -> float:
        total = 0.5 * poly.c * theta * theta
        for s in range(1, poly.degree + 1):
            a = poly.a[s - 1]
            b = poly.b[s - 1]
            total += a * (math.cos(s * theta) / s**2 + theta * math.sin(s * theta) / s)
            total += b * (math.sin(s * theta) / s**2 - theta * math.cos(s * theta) / s)
        return total

    return anti(hi) - anti(lo)


def window_mse(poly: TrigPoly, n: int) -> float:
    """Closed-form (n / 2 pi) * integral_{-pi/n}^{pi/n} (poly(t)/n - t)^2 dt.

    The square of the polynomial is expanded exactly (product of
    trigonometric polynomials), the linear cross term integrates in closed
    form, and the theta^2 term is elementary.
    """
    w = math.pi / n
    quad = (poly * poly).definite_integral(-w, w)
    cross = _theta_weighted_integral(poly, -w, w)
    cubic = 2.0 * w**3 / 3.0
    return float((n / (2.0 * math.pi)) * (quad / n**2 - 2.0 * cross / n + cubic))


def mse_loss(measurement: TrainableMeasurement, params) -> float:
    """Window MSE of the measurement circuit's inferred response (exact
    expectations; no shot noise enters training)."""
    poly = response_polynomial(measurement.setup(params))
    return window_mse(poly, measurement.n)


@dataclass(frozen=True)
class TrainingTrace:
    """Loss history (running best per accepted step) and the sensitivity
    curves before and after training over the working window."""

    losses: tuple[float, ...]
    initial_params: np.ndarray
    final_params: np.ndarray
    initial_loss: float
    final_loss: float
    epochs_used: int
    restarts_used: int
    thetas: np.ndarray
    pre_delta_sq: np.ndarray
    post_delta_sq: np.ndarray
    pre_divergent: np.ndarray
    post_divergent: np.ndarray

    def to_json_dict(self) -> dict:
        return {
            "losses": [float(v) for v in self.losses],
            "initial_params": [float(v) for v in self.initial_params],
            "final_params": [float(v) for v in self.final_params],
            "initial_loss": self.initial_loss,
            "final_loss": self.final_loss,
            "epochs_used": self.epochs_used,
            "restarts_used": self.restarts_used,
        }


def _window_grid(n: int, points: int = 201) -> np.ndarray:
    w = math.pi / n
    return np.linspace(-w, w, points + 2)[1:-1]


def train_measurement(
    measurement: TrainableMeasurement | None = None,
    epochs: int = 500,
    seed: int = 0,
    max_restarts: int = 3,
) -> TrainingTrace:
    """Minimize the window MSE over the circuit parameters with a
    Nelder-Mead simplex, restarting (up to ``max_restarts`` times) around
    the incumbent with a fresh simplex whenever the search stalls before
    the epoch budget is spent.
    """
    if epochs < 1:
        raise ValueError("epochs must be >= 1")
    if measurement is None:
        measurement = TrainableMeasurement.convolutional(4)
    rng = np.random.default_rng(seed)
    x0 = rng.uniform(0.0, 2.0 * math.pi, measurement.parameter_count)

    def objective(p: np.ndarray) -> float:
        value = mse_loss(measurement, p)
        if not math.isfinite(value):
            raise RuntimeError(
                f"non-finite loss {value!r} at parameters {np.asarray(p).tolist()}"
            )
        return value

    initial_loss = objective(x0)
    best_x = np.array(x0)
    best_val = initial_loss
    losses: list[float] = [initial_loss]
    iterations = 0
    restarts = 0
    while iterations < epochs:
        tracker = {"best": best_val}

        def wrapped(p: np.ndarray) -> float:
            value = objective(p)
            if value < tracker["best"]:
                tracker["best"] = value
            return value

        options = {
            "maxiter": epochs - iterations,
            "xatol": 1e-8,
            "fatol": 1e-12,
            "adaptive": True,
        }
        if restarts > 0:
            spread = 0.4 * rng.standard_normal((len(best_x) + 1, len(best_x)))
            options["initial_simplex"] = best_x + spread
        result = minimize(
            wrapped,
            best_x,
            method="Nelder-Mead",
            callback=lambda _: losses.append(tracker["best"]),
            options=options,
        )
        iterations += int(result.nit)
        if result.fun < best_val:
            best_val = float(result.fun)
            best_x = np.array(result.x)
        if iterations >= epochs or restarts >= max_restarts:
            break
        restarts += 1

    grid = _window_grid(measurement.n)
    pre_poly = response_polynomial(measurement.setup(x0))
    post_poly = response_polynomial(measurement.setup(best_x))
    pre_sq, pre_div = sensitivity_curve(pre_poly, grid)
    post_sq, post_div = sensitivity_curve(post_poly, grid)
    return TrainingTrace(
        losses=tuple(losses),
        initial_params=x0,
        final_params=best_x,
        initial_loss=initial_loss,
        final_loss=best_val,
        epochs_used=iterations,
        restarts_used=restarts,
        thetas=grid,
        pre_delta_sq=pre_sq,
        post_delta_sq=post_sq,
        pre_divergent=pre_div,
        post_divergent=post_div,
    )

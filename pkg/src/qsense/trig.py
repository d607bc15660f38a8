"""Degree-D trigonometric polynomials and interpolation at 2D+1 nodes.

A degree-D trigonometric polynomial is

    f(theta) = sum_{s=1..D} [ a_s cos(s theta) + b_s sin(s theta) ] + c .

Its 2D+1 coefficients are fixed by the values at any 2D+1 nodes that are
distinct modulo 2 pi.  Two recovery routes are provided:

* ``coeffs_closed_form`` uses the discrete-orthogonality formulas, valid
  only on the equidistant node set 2 pi k / (2D+1); this is the default
  (O(D^2), numerically stable, and exactly the inverse of the
  interpolation matrix at those nodes).
* ``solve_lsp`` builds the (2D+1)x(2D+1) interpolation matrix explicitly
  and solves it by row-pivoted elimination, for arbitrary node sets, and
  reports conditioning diagnostics.

The equidistant choice maximizes |det A| over all node sets, which is why
it minimizes the error amplification of the linear solve.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

_TWO_PI = 2.0 * math.pi
DUPLICATE_TOL = 1e-9
EQUIDISTANT_TOL = 1e-12


class SingularNodeSetError(ValueError):
    """The node set leads to a singular or near-singular interpolation."""


@dataclass(frozen=True, eq=False)
class TrigPoly:
    """Real trigonometric polynomial with cosine coefficients ``a``, sine
    coefficients ``b`` (both indexed s = 1..D) and constant ``c``."""

    a: np.ndarray
    b: np.ndarray
    c: float

    def __eq__(self, other) -> bool:
        if not isinstance(other, TrigPoly):
            return NotImplemented
        return (
            np.array_equal(self.a, other.a)
            and np.array_equal(self.b, other.b)
            and self.c == other.c
        )

    def __post_init__(self) -> None:
        a = np.array(self.a, dtype=float).reshape(-1)
        b = np.array(self.b, dtype=float).reshape(-1)
        if a.shape != b.shape:
            raise ValueError("a and b must have the same length")
        a.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", float(self.c))

    @property
    def degree(self) -> int:
        return len(self.a)

    @classmethod
    def constant(cls, c: float) -> "TrigPoly":
        return cls(np.zeros(0), np.zeros(0), c)

    def evaluate(self, theta):
        """Evaluate at a scalar or array of angles (2 pi periodic)."""
        th = np.asarray(theta, dtype=float)
        if self.degree == 0:
            out = np.full(th.shape, self.c)
        else:
            s = np.arange(1, self.degree + 1)
            arg = np.multiply.outer(th, s)
            out = self.c + np.cos(arg) @ self.a + np.sin(arg) @ self.b
        return float(out) if np.isscalar(theta) or th.ndim == 0 else out

    __call__ = evaluate

    def derivative(self) -> "TrigPoly":
        """d/dtheta: a'_s = s b_s, b'_s = -s a_s, c' = 0."""
        s = np.arange(1, self.degree + 1)
        return TrigPoly(s * self.b, -s * self.a, 0.0)

    def _antiderivative_at(self, theta: float) -> float:
        if self.degree == 0:
            return self.c * theta
        s = np.arange(1, self.degree + 1)
        return float(
            np.sin(s * theta) @ (self.a / s)
            - np.cos(s * theta) @ (self.b / s)
            + self.c * theta
        )

    def definite_integral(self, lo: float, hi: float) -> float:
        if lo > hi:
            raise ValueError("integration bounds must satisfy lo <= hi")
        return self._antiderivative_at(hi) - self._antiderivative_at(lo)

    # -- algebra (closed under +, scalar *, and poly * poly) ----------------

    def _complex_coeffs(self) -> np.ndarray:
        """Coefficients c_m of sum_m c_m e^{i m theta}, m = -D..D."""
        d = self.degree
        coeffs = np.zeros(2 * d + 1, dtype=complex)
        coeffs[d] = self.c
        for s in range(1, d + 1):
            coeffs[d + s] = 0.5 * (self.a[s - 1] - 1j * self.b[s - 1])
            coeffs[d - s] = 0.5 * (self.a[s - 1] + 1j * self.b[s - 1])
        return coeffs

    @classmethod
    def _from_complex_coeffs(cls, coeffs: np.ndarray) -> "TrigPoly":
        d = (len(coeffs) - 1) // 2
        a = 2.0 * coeffs[d + 1 :].real
        b = -2.0 * coeffs[d + 1 :].imag
        return cls(a, b, float(coeffs[d].real))

    def __add__(self, other):
        if np.isscalar(other):
            return TrigPoly(self.a, self.b, self.c + float(other))
        d = max(self.degree, other.degree)
        a = np.zeros(d)
        b = np.zeros(d)
        a[: self.degree] += self.a
        b[: self.degree] += self.b
        a[: other.degree] += other.a
        b[: other.degree] += other.b
        return TrigPoly(a, b, self.c + other.c)

    __radd__ = __add__

    def __neg__(self) -> "TrigPoly":
        return TrigPoly(-self.a, -self.b, -self.c)

    def __sub__(self, other):
        return self + (-other if isinstance(other, TrigPoly) else -float(other))

    def __mul__(self, other):
        if np.isscalar(other):
            k = float(other)
            return TrigPoly(k * self.a, k * self.b, k * self.c)
        product = np.convolve(self._complex_coeffs(), other._complex_coeffs())
        return TrigPoly._from_complex_coeffs(product)

    __rmul__ = __mul__

    def to_json_dict(self) -> dict:
        return {
            "degree": self.degree,
            "a": [float(x) for x in self.a],
            "b": [float(x) for x in self.b],
            "c": self.c,
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "TrigPoly":
        poly = cls(np.asarray(doc["a"], dtype=float), np.asarray(doc["b"], dtype=float), doc["c"])
        if poly.degree != doc.get("degree", poly.degree):
            raise ValueError("degree field inconsistent with coefficient arrays")
        return poly


def _canonical(angles: np.ndarray) -> np.ndarray:
    return np.mod(angles, _TWO_PI)


def _near_duplicate_pairs(angles: np.ndarray, tol: float) -> list[tuple[int, int]]:
    canon = _canonical(angles)
    pairs = []
    for i in range(len(canon)):
        for j in range(i + 1, len(canon)):
            gap = abs(canon[i] - canon[j])
            gap = min(gap, _TWO_PI - gap)
            if gap < tol:
                pairs.append((i, j))
    return pairs


@dataclass(frozen=True)
class NodeSet:
    """Ordered set of 2D+1 angles, canonicalized to [0, 2 pi) and required
    to be distinct modulo 2 pi (tolerance 1e-9 rad)."""

    angles: np.ndarray

    def __post_init__(self) -> None:
        raw = np.array(self.angles, dtype=float).reshape(-1)
        if len(raw) < 1 or len(raw) % 2 == 0:
            raise ValueError("a node set holds an odd number (2D+1) of angles")
        canon = _canonical(raw)
        dupes = _near_duplicate_pairs(raw, DUPLICATE_TOL)
        if dupes:
            detail = "; ".join(
                f"nodes {i} and {j} coincide modulo 2*pi "
                f"(theta_{i}={raw[i]:.12g}, theta_{j}={raw[j]:.12g})"
                for i, j in dupes
            )
            raise SingularNodeSetError(detail)
        canon.flags.writeable = False
        object.__setattr__(self, "angles", canon)

    @property
    def degree(self) -> int:
        return (len(self.angles) - 1) // 2

    @property
    def is_equidistant(self) -> bool:
        k = np.arange(len(self.angles))
        target = _TWO_PI * k / len(self.angles)
        return bool(np.all(np.abs(self.angles - target) <= EQUIDISTANT_TOL))

    def __len__(self) -> int:
        return len(self.angles)

    def __iter__(self) -> Iterator[float]:
        return iter(self.angles)


def equidistant_nodes(degree: int) -> NodeSet:
    """The 2D+1 angles 2 pi k / (2D+1), k = 0..2D."""
    if degree < 0:
        raise ValueError("degree must be >= 0")
    count = 2 * degree + 1
    return NodeSet(_TWO_PI * np.arange(count) / count)


@dataclass(frozen=True)
class SampleVector:
    """Per-node response values, optionally with shot counts and standard
    errors from finite sampling."""

    nodes: NodeSet
    values: np.ndarray
    shots: np.ndarray | None = None
    standard_errors: np.ndarray | None = None

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=float).reshape(-1)
        if len(vals) != len(self.nodes):
            raise ValueError("value count must match node count")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        for name in ("shots", "standard_errors"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.array(arr, dtype=float).reshape(-1)
                if len(arr) != len(self.nodes):
                    raise ValueError(f"{name} length must match node count")
                arr.flags.writeable = False
                object.__setattr__(self, name, arr)

    @property
    def degree(self) -> int:
        return self.nodes.degree


def coeffs_closed_form(samples: SampleVector) -> TrigPoly:
    """Recover the interpolating polynomial on equidistant nodes.

    Uses the discrete-orthogonality formulas
        a_s = 2/(2D+1) sum_k d_k cos(s theta_k)
        b_s = 2/(2D+1) sum_k d_k sin(s theta_k)
        c   = 1/(2D+1) sum_k d_k
    The result passes through every sample exactly.
    """
    if not samples.nodes.is_equidistant:
        raise ValueError(
            "closed-form coefficients require equidistant nodes; use solve_lsp"
        )
    d = samples.degree
    th = samples.nodes.angles
    vals = samples.values
    count = 2 * d + 1
    if d == 0:
        return TrigPoly.constant(float(vals[0]))
    s = np.arange(1, d + 1)
    arg = np.multiply.outer(s, th)
    a = (2.0 / count) * (np.cos(arg) @ vals)
    b = (2.0 / count) * (np.sin(arg) @ vals)
    return TrigPoly(a, b, float(vals.sum() / count))


@dataclass(frozen=True)
class ConditionReport:
    """Conditioning diagnostics for the interpolation matrix.

    ``det_magnitude`` is |det A| from the closed product formula;
    ``sigma_min_lower_bound`` is the row-norm lower bound on the smallest
    singular value (reported, never used for rejection).
    """

    det_magnitude: float
    sigma_min_lower_bound: float


def interpolation_matrix(nodes: NodeSet) -> np.ndarray:
    """Rows k: [cos(theta_k), .., cos(D theta_k), sin(theta_k), .., sin(D theta_k), 1]."""
    th = nodes.angles
    d = nodes.degree
    cols = [np.cos(s * th) for s in range(1, d + 1)]
    cols += [np.sin(s * th) for s in range(1, d + 1)]
    cols.append(np.ones_like(th))
    return np.column_stack(cols)


def det_bound(nodes) -> float:
    """|det A| = 2^-D prod_{i<j} |e^{i theta_i} - e^{i theta_j}|.

    Accepts a NodeSet or a raw angle sequence (which may contain repeats,
    giving 0).  Maximized by the equidistant node set, and invariant under
    a common rotation of all nodes.
    """
    angles = nodes.angles if isinstance(nodes, NodeSet) else np.asarray(nodes, float)
    if len(angles) < 3:
        raise ValueError("det_bound needs at least 3 nodes (degree >= 1)")
    d = (len(angles) - 1) // 2
    z = np.exp(1j * angles)
    diff = np.abs(z[:, None] - z[None, :])
    product = float(np.prod(diff[np.triu_indices(len(z), k=1)]))
    return product / 2.0**d


def _sigma_min_lower_bound(a_matrix: np.ndarray, det_magnitude: float) -> float:
    m = a_matrix.shape[0]
    row_norms = np.linalg.norm(a_matrix, axis=1)
    prod = float(np.prod(row_norms))
    if prod == 0.0:
        return 0.0
    factor = ((m - 1) / m) ** ((m - 1) / 2) if m > 1 else 1.0
    return factor * det_magnitude * float(row_norms.min()) / prod


def solve_lsp(samples: SampleVector) -> tuple[TrigPoly, ConditionReport]:
    """Coefficient recovery for arbitrary (distinct) nodes via the explicit
    linear system, solved by row-pivoted elimination.

    Raises SingularNodeSetError when |det A| falls below
    1e-12 * (2D+1)^((2D+1)/2) (the Hadamard scale of A), naming the closest
    node pair.  On equidistant nodes the result agrees with
    ``coeffs_closed_form`` to solver precision.
    """
    nodes = samples.nodes
    d = nodes.degree
    if d == 0:
        return TrigPoly.constant(float(samples.values[0])), ConditionReport(1.0, 1.0)
    a_matrix = interpolation_matrix(nodes)
    det_mag = det_bound(nodes)
    count = 2 * d + 1
    scale = count ** (count / 2)
    if det_mag < 1e-12 * scale:
        pairs = _near_duplicate_pairs(nodes.angles, DUPLICATE_TOL)
        if not pairs:
            canon = nodes.angles
            gaps = np.abs(canon[:, None] - canon[None, :])
            gaps = np.minimum(gaps, _TWO_PI - gaps)
            np.fill_diagonal(gaps, np.inf)
            i, j = np.unravel_index(np.argmin(gaps), gaps.shape)
            pairs = [(min(i, j), max(i, j))]
        detail = ", ".join(
            f"nodes {i} and {j} (theta_{i}={nodes.angles[i]:.12g}, "
            f"theta_{j}={nodes.angles[j]:.12g})"
            for i, j in pairs
        )
        raise SingularNodeSetError(
            f"|det A| = {det_mag:.3e} below threshold {1e-12 * scale:.3e}; "
            f"near-duplicate {detail}"
        )
    try:
        x = np.linalg.solve(a_matrix, samples.values)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - caught by det check
        raise SingularNodeSetError(str(exc)) from exc
    poly = TrigPoly(x[:d], x[d : 2 * d], float(x[2 * d]))
    report = ConditionReport(det_mag, _sigma_min_lower_bound(a_matrix, det_mag))
    return poly, report


def write_curve_csv(
    path, thetas: Sequence[float], values: Iterable, header: Sequence[str] = ("theta", "value")
) -> None:
    """Write aligned columns of floats; floats are rendered with repr so the
    file round-trips bit-exactly."""
    path = Path(path)
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i, th in enumerate(np.asarray(thetas, dtype=float)):
            writer.writerow([repr(float(th))] + [repr(float(v)) for v in values[i]])

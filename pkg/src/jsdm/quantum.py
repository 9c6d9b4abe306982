"""Measured Jensen-Shannon divergence between quantum states.

A POVM ``{E_i}`` turns density matrices into outcome distributions
``p_i = Tr(E_i rho)``; maximizing the classical JSD of those over
measurements gives a distinguishability measure between states. Only qubits
are optimized here, over two-outcome projective measurements along a Bloch
direction ``n``, for which ``p = ((1 + n.r)/2, (1 - n.r)/2)`` with ``r`` the
Bloch vector of the state. The value returned is therefore a lower bound on
the maximum over all POVMs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, DomainError, InvalidState, UnsupportedDimension
from .probability import ProbDist, jsd_rows

TOL = 1e-10
MAX_DIM = 4

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def _matrix(entries, what: str) -> np.ndarray:
    m = np.array(entries, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidState(f"{what} must be a square matrix, got shape {m.shape}")
    if not 1 <= m.shape[0] <= MAX_DIM:
        raise UnsupportedDimension(f"dimension {m.shape[0]} not in 1..{MAX_DIM}")
    if not np.allclose(m, m.conj().T, rtol=0, atol=TOL):
        raise InvalidState(f"{what} is not Hermitian")
    return m


def _psd(m: np.ndarray) -> bool:
    return bool(np.linalg.eigvalsh(m).min() >= -TOL)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = _matrix(self.matrix, "density matrix")
        if abs(np.trace(m) - 1.0) > TOL:
            raise InvalidState(f"trace is {np.trace(m).real!r}, not 1")
        if not _psd(m):
            raise InvalidState("density matrix has a negative eigenvalue")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_bloch(cls, vector: Sequence[float]) -> DensityMatrix:
        r = np.asarray(vector, dtype=float)
        if r.shape != (3,):
            raise InvalidState("Bloch vector needs three components")
        if np.linalg.norm(r) > 1.0 + TOL:
            raise InvalidState(f"Bloch vector {r.tolist()} lies outside the unit ball")
        return cls(0.5 * (np.eye(2) + sum(c * s for c, s in zip(r, PAULI))))

    @classmethod
    def pure(cls, ket: Sequence[complex]) -> DensityMatrix:
        v = np.asarray(ket, dtype=complex)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    def bloch_vector(self) -> np.ndarray:
        if self.dim != 2:
            raise UnsupportedDimension("Bloch vectors exist only for qubits")
        return np.array([np.trace(s @ self.matrix).real for s in PAULI])

    def transformed(self, unitary: np.ndarray) -> DensityMatrix:
        u = np.asarray(unitary, dtype=complex)
        m = u @ self.matrix @ u.conj().T
        return DensityMatrix(0.5 * (m + m.conj().T))


@dataclass(frozen=True, eq=False)
class POVM:
    elements: tuple

    def __post_init__(self):
        if not self.elements:
            raise InvalidState("a POVM needs at least one element")
        elems = tuple(_matrix(e, "POVM element") for e in self.elements)
        dims = {e.shape[0] for e in elems}
        if len(dims) != 1:
            raise DimensionMismatch("POVM elements have different dimensions")
        if not all(_psd(e) for e in elems):
            raise InvalidState("POVM element is not positive semidefinite")
        d = dims.pop()
        if not np.allclose(sum(elems), np.eye(d), rtol=0, atol=TOL):
            raise InvalidState("POVM elements do not sum to the identity")
        for e in elems:
            e.setflags(write=False)
        object.__setattr__(self, "elements", elems)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self) -> int:
        return len(self.elements)

    @classmethod
    def computational(cls, dim: int) -> POVM:
        return cls(tuple(np.diag(np.eye(dim)[i]) for i in range(dim)))

    @classmethod
    def projective(cls, direction: Sequence[float]) -> POVM:
        """Qubit measurement ``{(I + n.sigma)/2, (I - n.sigma)/2}`` along unit vector ``n``."""
        n = np.asarray(direction, dtype=float)
        n = n / np.linalg.norm(n)
        ns = sum(c * s for c, s in zip(n, PAULI))
        return cls((0.5 * (np.eye(2) + ns), 0.5 * (np.eye(2) - ns)))


def povm_probs(state: DensityMatrix, povm: POVM) -> ProbDist:
    """Outcome distribution ``(Tr(E_1 rho), ..., Tr(E_K rho))``."""
    if state.dim != povm.dim:
        raise DimensionMismatch(f"state has dimension {state.dim}, POVM {povm.dim}")
    traces = np.array([np.trace(e @ state.matrix) for e in povm.elements])
    if np.max(np.abs(traces.imag)) > TOL:
        raise InvalidState("outcome probabilities are not real")
    probs = np.clip(traces.real, 0.0, None)
    return ProbDist(probs / probs.sum())


@dataclass(frozen=True)
class QJSDConfig:
    theta_points: int = 64
    phi_points: int = 128
    refine_iters: int = 500
    step_tol: float = 1e-10


@dataclass(frozen=True, eq=False)
class QJSDResult:
    value: float
    best_povm: POVM
    direction: tuple[float, float, float]
    iterations: int
    converged: bool
    # always a lower bound: only projective two-outcome measurements are searched
    lower_bound: bool = True

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"JSD value {self.value!r} outside [0, 1]")


def _direction(theta, phi) -> np.ndarray:
    theta, phi = np.broadcast_arrays(theta, phi)
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def _measured_jsd(r: np.ndarray, s: np.ndarray, n: np.ndarray) -> np.ndarray:
    a = np.clip(n @ r, -1.0, 1.0)
    b = np.clip(n @ s, -1.0, 1.0)
    p = np.stack([0.5 * (1.0 + a), 0.5 * (1.0 - a)], axis=-1)
    q = np.stack([0.5 * (1.0 + b), 0.5 * (1.0 - b)], axis=-1)
    return jsd_rows(p, q)


def _h2(x: float) -> float:
    # binary entropy in bits
    return -sum(v * math.log2(v) for v in (x, 1.0 - x) if v > 0.0)


def _measured_jsd_scalar(r: np.ndarray, s: np.ndarray, theta: float, phi: float) -> float:
    # plain-float path for the refinement loop, same formula as _measured_jsd
    st = math.sin(theta)
    n = (st * math.cos(phi), st * math.sin(phi), math.cos(theta))
    a = min(1.0, max(-1.0, n[0] * r[0] + n[1] * r[1] + n[2] * r[2]))
    b = min(1.0, max(-1.0, n[0] * s[0] + n[1] * s[1] + n[2] * s[2]))
    p, q = 0.5 * (1.0 + a), 0.5 * (1.0 + b)
    value = _h2(0.5 * (p + q)) - 0.5 * (_h2(p) + _h2(q))
    return min(1.0, max(0.0, value))


def qjsd_max(
    rho: DensityMatrix,
    sigma: DensityMatrix,
    config: Optional[QJSDConfig] = None,
) -> QJSDResult:
    """Largest measured JSD between two qubit states over projective measurements.

    A ``theta x phi`` grid over the sphere of measurement directions (poles
    included) picks a starting point, then a compass search refines it,
    moving to the best of the four neighbours and halving the step whenever
    none improves. ``converged`` is true when the step shrinks below
    ``config.step_tol`` within ``config.refine_iters`` iterations. Fully
    deterministic.
    """
    config = config or QJSDConfig()
    if rho.dim != sigma.dim:
        raise DimensionMismatch(f"states have dimensions {rho.dim} and {sigma.dim}")
    if rho.dim != 2:
        raise UnsupportedDimension("the measurement optimizer handles qubits only")
    if config.theta_points < 2 or config.phi_points < 1:
        raise DomainError("grid needs at least 2 theta and 1 phi points")
    r, s = rho.bloch_vector(), sigma.bloch_vector()

    thetas = np.linspace(0.0, math.pi, config.theta_points)
    phis = 2.0 * math.pi * np.arange(config.phi_points) / config.phi_points
    grid = _measured_jsd(r, s, _direction(thetas[:, None], phis[None, :]))
    i, j = np.unravel_index(int(np.argmax(grid)), grid.shape)
    theta, phi, best = float(thetas[i]), float(phis[j]), float(grid[i, j])

    step_t = math.pi / (config.theta_points - 1)
    step_p = 2.0 * math.pi / config.phi_points
    r, s = [float(c) for c in r], [float(c) for c in s]
    iterations = 0
    converged = False
    while iterations < config.refine_iters:
        if max(step_t, step_p) < config.step_tol:
            converged = True
            break
        iterations += 1
        moves = ((step_t, 0.0), (-step_t, 0.0), (0.0, step_p), (0.0, -step_p))
        values = [_measured_jsd_scalar(r, s, theta + dt, phi + dp) for dt, dp in moves]
        k = max(range(4), key=values.__getitem__)
        if values[k] > best:
            theta, phi, best = theta + moves[k][0], phi + moves[k][1], values[k]
        else:
            step_t *= 0.5
            step_p *= 0.5

    n = _direction(theta, phi)
    return QJSDResult(
        value=best,
        best_povm=POVM.projective(n),
        direction=tuple(float(c) for c in n),
        iterations=iterations,
        converged=converged,
    )


def qjsd_alpha(
    rho: DensityMatrix,
    sigma: DensityMatrix,
    alpha: float,
    config: Optional[QJSDConfig] = None,
) -> float:
    if not (alpha > 0 and math.isfinite(alpha)):
        raise DomainError(f"alpha must be positive, got {alpha!r}")
    return qjsd_max(rho, sigma, config).value ** alpha

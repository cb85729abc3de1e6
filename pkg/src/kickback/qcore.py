"""Core linear algebra for a two-way interferometer.

States, density operators, unitaries, tensor products, partial traces,
fringe probabilities and visibility extraction. Way labels are fixed
globally: basis index 0 is way 1, basis index 1 is way 2. All phases are
wrapped to (-pi, pi].
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

from .tolerances import VALID_TOL, ZERO_TOL

TAU = 2.0 * math.pi


def wrap_phase(angle: float) -> float:
    """Wrap an angle in radians to the interval (-pi, pi]."""
    wrapped = (float(angle) + math.pi) % TAU - math.pi
    if wrapped == -math.pi:
        wrapped = math.pi
    return wrapped


def wrap_phase_array(angles) -> np.ndarray:
    """Vectorized :func:`wrap_phase`."""
    wrapped = np.remainder(np.asarray(angles, dtype=float) + np.pi, TAU) - np.pi
    return np.where(wrapped == -np.pi, np.pi, wrapped)


def uniform_phase_grid(n: int) -> np.ndarray:
    """n equally spaced phases covering one full period, all inside (-pi, pi]."""
    if n < 1:
        raise ValueError("phase grid size must be >= 1")
    return -math.pi + TAU * np.arange(1, n + 1) / n


def _as_square_complex(matrix, name: str) -> np.ndarray:
    m = np.array(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError(f"{name} must be a square matrix, got shape {m.shape}")
    return m


@dataclass(frozen=True)
class WaySuperposition:
    """Pure two-way superposition with mixing angle theta and relative phase phi.

    Amplitudes are cos(theta/2) on way 0 and e^(i*phi) sin(theta/2) on way 1.
    theta must lie strictly inside (0, pi) so that both ways are populated.
    """

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        theta = float(self.theta)
        if not (0.0 < theta < math.pi):
            raise ValueError(f"theta must lie strictly inside (0, pi), got {theta}")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "phi", wrap_phase(self.phi))

    def amplitudes(self) -> np.ndarray:
        half = 0.5 * self.theta
        return np.array([math.cos(half), math.sin(half) * cmath.exp(1j * self.phi)])


@dataclass(frozen=True)
class Epsilon:
    """Complex coherence attenuation factor eps = modulus * e^(i*delta).

    The modulus is confined to [0, 1]; excesses below 1e-12 (rounding of
    weighted phase averages or traces) are clipped to 1. A modulus below
    ZERO_TOL collapses to exactly zero with delta = 0, keeping phase reports
    deterministic where arg(0) would otherwise be undefined.
    """

    modulus: float
    delta: float = 0.0

    def __post_init__(self):
        mod = float(self.modulus)
        if mod < 0.0:
            raise ValueError(f"epsilon modulus must be >= 0, got {mod}")
        if mod > 1.0:
            if mod > 1.0 + 1e-12:
                raise ValueError(f"epsilon modulus must be <= 1, got {mod}")
            mod = 1.0
        if mod < ZERO_TOL:
            mod = 0.0
            delta = 0.0
        else:
            delta = wrap_phase(self.delta)
        object.__setattr__(self, "modulus", mod)
        object.__setattr__(self, "delta", delta)

    @classmethod
    def from_complex(cls, z: complex) -> "Epsilon":
        z = complex(z)
        return cls(abs(z), cmath.phase(z))

    @property
    def value(self) -> complex:
        return self.modulus * cmath.exp(1j * self.delta)


class DensityOperator:
    """Finite-dimensional density operator: Hermitian, unit trace, PSD.

    The matrix is copied on construction and frozen; instances are safe to
    share between threads.
    """

    def __init__(self, matrix):
        m = _as_square_complex(matrix, "density matrix")
        herm = float(np.max(np.abs(m - m.conj().T)))
        if herm > VALID_TOL:
            raise ValueError(f"density matrix is not Hermitian (deviation {herm:.3e})")
        trace = complex(np.trace(m))
        if abs(trace - 1.0) > VALID_TOL:
            raise ValueError(f"density matrix trace is {trace}, expected 1")
        lowest = float(np.linalg.eigvalsh(m)[0])
        if lowest < -VALID_TOL:
            raise ValueError(f"density matrix has negative eigenvalue {lowest:.3e}")
        m.setflags(write=False)
        self._matrix = m

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def dim(self) -> int:
        return self._matrix.shape[0]

    def purity(self) -> float:
        return float(np.real(np.trace(self._matrix @ self._matrix)))

    def __repr__(self) -> str:
        return f"DensityOperator(dim={self.dim})"


class UnitaryOperator:
    """Square matrix with U^dagger U = 1 within VALID_TOL. Immutable."""

    def __init__(self, matrix):
        m = _as_square_complex(matrix, "unitary matrix")
        deviation = float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))
        if deviation > VALID_TOL:
            raise ValueError(f"matrix is not unitary (deviation {deviation:.3e})")
        m.setflags(write=False)
        self._matrix = m

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def dim(self) -> int:
        return self._matrix.shape[0]

    def __repr__(self) -> str:
        return f"UnitaryOperator(dim={self.dim})"


class FringePattern:
    """Sampled interference pattern: probe phases with detection probabilities."""

    def __init__(self, phases, probabilities):
        phases = np.asarray(phases, dtype=float)
        probs = np.asarray(probabilities, dtype=float)
        if phases.shape != probs.shape or phases.ndim != 1:
            raise ValueError("phases and probabilities must be 1-d arrays of equal length")
        if np.any(probs < -1e-12) or np.any(probs > 1.0 + 1e-12):
            raise ValueError("fringe probabilities must lie in [0, 1]")
        self.phases = phases
        self.probabilities = np.clip(probs, 0.0, 1.0)

    @classmethod
    def from_density(cls, rho: DensityOperator, n_points: int = 64) -> "FringePattern":
        grid = uniform_phase_grid(n_points)
        return cls(grid, [fringe_probability(rho, p) for p in grid])

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.phases.tolist(), self.probabilities.tolist()))

    def mean_probability(self) -> float:
        return float(self.probabilities.mean())


class Visibility(NamedTuple):
    visibility: float
    shift: float


def superposition_state(theta: float, phi: float) -> DensityOperator:
    """Rank-1 projector onto the two-way superposition with angles (theta, phi)."""
    ket = WaySuperposition(theta, phi).amplitudes()
    return DensityOperator(np.outer(ket, ket.conj()))


def probe_projector(phi_probe: float) -> DensityOperator:
    """Projector onto the balanced probe state (|way0> + e^(i*phi)|way1>)/sqrt(2)."""
    ket = np.array([1.0, cmath.exp(1j * wrap_phase(phi_probe))]) / math.sqrt(2.0)
    return DensityOperator(np.outer(ket, ket.conj()))


def fringe_probability(rho: DensityOperator, phi_probe: float) -> float:
    """Detection probability of the probe state on rho.

    Equals (1 + 2 Re(e^(-i*phi_probe) rho_10)) / 2 for a valid two-way state.
    """
    if rho.dim != 2:
        raise ValueError(f"fringe probability needs a 2x2 state, got dim {rho.dim}")
    ket = np.array([1.0, cmath.exp(1j * phi_probe)]) / math.sqrt(2.0)
    p = float(np.real(ket.conj() @ rho.matrix @ ket))
    return min(max(p, 0.0), 1.0)


def visibility(rho: DensityOperator) -> Visibility:
    """Fringe visibility 2|rho_10| and fringe shift arg(rho_10) of a two-way state.

    The shift is reported as 0 when the coherence magnitude is below ZERO_TOL.
    """
    if rho.dim != 2:
        raise ValueError(f"visibility needs a 2x2 state, got dim {rho.dim}")
    coherence = complex(rho.matrix[1, 0])
    if abs(coherence) < ZERO_TOL:
        return Visibility(0.0, 0.0)
    return Visibility(2.0 * abs(coherence), cmath.phase(coherence))


def fringe_extremes(rho: DensityOperator) -> tuple[float, float]:
    """(max, min) of the fringe probability over all probe phases."""
    vis = visibility(rho).visibility
    return 0.5 * (1.0 + vis), 0.5 * (1.0 - vis)


def fringe_fourier_visibility(phases, counts) -> Visibility:
    """Empirical visibility from detection counts on a uniform probe-phase grid.

    Uses the first circular Fourier coefficient: V = 2|sum c_j e^(i*phi_j)| /
    sum c_j, which is robust to sampling noise; the coefficient's argument
    estimates the fringe shift.
    """
    phases = np.asarray(phases, dtype=float)
    counts = np.asarray(counts, dtype=float)
    total = counts.sum()
    if total <= 0:
        return Visibility(0.0, 0.0)
    z = complex(np.sum(counts * np.exp(1j * phases)))
    if abs(z) / total < ZERO_TOL:
        return Visibility(0.0, 0.0)
    return Visibility(min(2.0 * abs(z) / total, 1.0), cmath.phase(z))


def dephased_density(psi0: WaySuperposition, eps: Epsilon) -> DensityOperator:
    """Two-way state after coherence attenuation by eps.

    Populations cos^2(theta/2), sin^2(theta/2) are untouched; the way1-way0
    coherence is sin(theta/2)cos(theta/2) e^(i*phi) * eps.
    """
    half = 0.5 * psi0.theta
    c, s = math.cos(half), math.sin(half)
    coherence = s * c * cmath.exp(1j * psi0.phi) * eps.value
    return DensityOperator(
        np.array([[c * c, coherence.conjugate()], [coherence, s * s]])
    )


def tensor_product(a: DensityOperator, b: DensityOperator) -> DensityOperator:
    """Kronecker product a (x) b with the system factor first."""
    return DensityOperator(np.kron(a.matrix, b.matrix))


def partial_trace_env(joint: DensityOperator, sys_dim: int, env_dim: int) -> DensityOperator:
    """Trace out the trailing environment factor of a joint density operator."""
    if joint.dim != sys_dim * env_dim:
        raise ValueError(
            f"joint dim {joint.dim} does not factor as {sys_dim} x {env_dim}"
        )
    blocks = joint.matrix.reshape(sys_dim, env_dim, sys_dim, env_dim)
    return DensityOperator(np.einsum("iaja->ij", blocks))


def maximally_mixed(dim: int) -> DensityOperator:
    return DensityOperator(np.eye(dim) / dim)


def unitary_eigensystem(u: UnitaryOperator) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal eigensystem of a unitary matrix.

    Returns (eigenphases, eigenvectors) with the eigenvectors as columns.
    Phases are sorted ascending within (-pi, pi]; each eigenvector's overall
    phase is fixed by making its largest-magnitude component real positive,
    so the output is deterministic up to LAPACK's choice inside degenerate
    subspaces.
    """
    t, z = scipy.linalg.schur(u.matrix, output="complex")
    phases = wrap_phase_array(np.angle(np.diagonal(t)))
    order = np.argsort(phases, kind="stable")
    phases = phases[order]
    vectors = np.array(z[:, order])
    for k in range(vectors.shape[1]):
        pivot = int(np.argmax(np.abs(vectors[:, k])))
        scale = vectors[pivot, k]
        vectors[:, k] *= scale.conjugate() / abs(scale)
    return phases, vectors

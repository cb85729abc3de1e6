"""Conversions between the phase-kick and environment pictures, with certificates.

Both pictures induce the same system channel: the eigenphases of u_env
weighted by rho_env form a discrete kick weight, and any kick weight seeds a
diagonal environment. Certificates record both attenuation factors and the
worst entrywise deviation of the two induced channels over a grid of input
states, so the equivalence is checked at channel level rather than by
comparing epsilons alone.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .dephase import AtomWeight, PhaseWeight, apply_phase_kicks, epsilon_of_weight
from .entangle import EnvironmentModel, entangle_joint, epsilon_of_env, reduced_system
from .qcore import (
    TAU,
    DensityOperator,
    Epsilon,
    UnitaryOperator,
    WaySuperposition,
    unitary_eigensystem,
    wrap_phase,
)
from .reportio import kv_line
from .tolerances import CERT_TOL

MERGE_TOL = 1e-8
DROP_TOL = 1e-14

TOL_ENV_VAR = "KICKBACK_TOL"


def certification_tolerance() -> float:
    """Default certificate pass threshold, overridable via KICKBACK_TOL."""
    override = os.environ.get(TOL_ENV_VAR)
    if override is not None:
        return float(override)
    return CERT_TOL


def _merge_circular(phases: np.ndarray, weights: np.ndarray) -> tuple[list[float], list[float]]:
    """Merge atoms whose phases coincide within MERGE_TOL on the circle.

    Inputs must be sorted by phase. Weights inside a merged cluster add up
    (the trace of rho_env against the spectral projector, which is basis
    independent); the merged phase is the weighted mean.
    """
    clusters: list[tuple[list[float], list[float]]] = []
    for phase, weight in zip(phases, weights):
        if clusters and phase - clusters[-1][0][-1] < MERGE_TOL:
            clusters[-1][0].append(float(phase))
            clusters[-1][1].append(float(weight))
        else:
            clusters.append(([float(phase)], [float(weight)]))
    if len(clusters) > 1:
        first, last = clusters[0], clusters[-1]
        if first[0][0] + TAU - last[0][-1] < MERGE_TOL:
            first[0].extend(p - TAU for p in last[0])
            first[1].extend(last[1])
            clusters.pop()
    merged_phases, merged_weights = [], []
    for cluster_phases, cluster_weights in clusters:
        total = math.fsum(cluster_weights)
        if total < DROP_TOL:
            continue
        mean = math.fsum(p * w for p, w in zip(cluster_phases, cluster_weights)) / total
        merged_phases.append(wrap_phase(mean))
        merged_weights.append(total)
    return merged_phases, merged_weights


def env_to_weight(m: EnvironmentModel) -> AtomWeight:
    """Discrete kick weight equivalent to an environment model.

    Eigenphases of u_env become atom phases; the weight of each is the
    population of rho_env on the matching eigenvector. Nearly coincident
    phases are merged and weights below 1e-14 dropped.
    """
    phases, vectors = unitary_eigensystem(m.u_env)
    populations = np.real(np.einsum("ik,ij,jk->k", vectors.conj(), m.rho_env.matrix, vectors))
    populations = np.clip(populations, 0.0, None)
    atom_phases, atom_weights = _merge_circular(phases, populations)
    total = math.fsum(atom_weights)
    if abs(total - 1.0) > 1e-10:
        raise ValueError(f"eigenweights sum to {total}, expected 1")
    return AtomWeight(tuple(atom_phases), tuple(atom_weights))


def weight_to_env(w: PhaseWeight, n_atoms: int = 256) -> EnvironmentModel:
    """Diagonal environment model equivalent to a kick weight.

    Atoms map directly to eigenphases and populations. Continuous variants
    are discretized to n_atoms first: grid densities on their own sample
    grid (periodic trapezoid masses, which reproduces their first moment
    exactly), windows on Gauss-Legendre nodes over the support (masses sum
    to 1 exactly and the first moment is quadrature-exact), and the
    raised-cosine density on a uniform midpoint grid (exact for its two
    harmonics).
    """
    from .dephase import GridWeight, SewCosineWeight, WindowWeight, epsilon_of_weight as _eps

    _eps(w)  # validates normalization
    if isinstance(w, AtomWeight):
        phases = np.asarray(w.phases, dtype=float)
        masses = np.asarray(w.weights, dtype=float)
    elif isinstance(w, GridWeight):
        phases = GridWeight.grid_phases(len(w.density))
        masses = TAU / len(w.density) * np.asarray(w.density, dtype=float)
    elif isinstance(w, WindowWeight):
        nodes, gl_weights = np.polynomial.legendre.leggauss(n_atoms)
        phases = np.array([wrap_phase(p) for p in w.center + w.half_width * nodes])
        masses = gl_weights / 2.0
    elif isinstance(w, SewCosineWeight):
        step = TAU / n_atoms
        phases = -math.pi + step * (np.arange(n_atoms) + 0.5)
        masses = step * w.density_at(phases)
    else:
        raise TypeError(f"unsupported weight variant {type(w).__name__}")
    keep = masses > DROP_TOL
    phases, masses = phases[keep], masses[keep]
    u = UnitaryOperator(np.diag(np.exp(1j * phases)))
    rho = DensityOperator(np.diag(masses / masses.sum()).astype(complex))
    return EnvironmentModel(rho, u)


def _induced_state(rep, theta: float, phi: float) -> DensityOperator:
    psi0 = WaySuperposition(theta, phi)
    if isinstance(rep, EnvironmentModel):
        return reduced_system(entangle_joint(psi0, rep), rep.dim)
    if isinstance(rep, PhaseWeight):
        return apply_phase_kicks(psi0, rep)
    raise TypeError(f"expected a PhaseWeight or EnvironmentModel, got {type(rep).__name__}")


def _epsilon_of(rep) -> Epsilon:
    if isinstance(rep, EnvironmentModel):
        return epsilon_of_env(rep)
    if isinstance(rep, PhaseWeight):
        return epsilon_of_weight(rep)
    raise TypeError(f"expected a PhaseWeight or EnvironmentModel, got {type(rep).__name__}")


@dataclass(frozen=True)
class Certificate:
    """Outcome of a channel-level equivalence check between two representations."""

    eps_a: Epsilon
    eps_b: Epsilon
    max_channel_deviation: float
    grid_shape: tuple[int, int]
    tol: float
    passed: bool

    def to_text(self) -> str:
        lines = [
            kv_line("eps_a", self.eps_a.modulus, self.eps_a.delta),
            kv_line("eps_b", self.eps_b.modulus, self.eps_b.delta),
            kv_line("max_channel_deviation", self.max_channel_deviation),
            kv_line("grid", f"{self.grid_shape[0]}x{self.grid_shape[1]}"),
            kv_line("pass", self.passed),
        ]
        return "\n".join(lines) + "\n"


def default_theta_grid(n: int = 9) -> np.ndarray:
    return np.linspace(0.1, math.pi - 0.1, n)


def default_phi_grid(n: int = 8) -> np.ndarray:
    return -math.pi + TAU * np.arange(1, n + 1) / n


def certify_equivalence(a, b, theta_grid=None, phi_grid=None, tol: float | None = None) -> Certificate:
    """Certify that two channel representations agree on a grid of inputs.

    Each of a, b is a PhaseWeight or an EnvironmentModel. Environment models
    are pushed through the full joint-state-plus-partial-trace route, kick
    weights through the moment route, so the certificate genuinely compares
    the two mechanisms.
    """
    thetas = default_theta_grid() if theta_grid is None else np.asarray(theta_grid, dtype=float)
    phis = default_phi_grid() if phi_grid is None else np.asarray(phi_grid, dtype=float)
    if tol is None:
        tol = certification_tolerance()
    deviation = 0.0
    for theta in thetas:
        for phi in phis:
            rho_a = _induced_state(a, theta, phi).matrix
            rho_b = _induced_state(b, theta, phi).matrix
            deviation = max(deviation, float(np.max(np.abs(rho_a - rho_b))))
    return Certificate(
        eps_a=_epsilon_of(a),
        eps_b=_epsilon_of(b),
        max_channel_deviation=deviation,
        grid_shape=(len(thetas), len(phis)),
        tol=float(tol),
        passed=deviation <= tol,
    )

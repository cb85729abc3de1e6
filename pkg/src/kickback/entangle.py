"""Entanglement with an environment as the source of coherence loss.

An environment model is an initial environment state rho_env together with a
unitary u_env applied conditionally on the way taken. Tracing out the
environment attenuates the way coherence by eps = tr(u_env rho_env). The
way-0 branch couples through the adjoint of u_env; this is the controlled
form whose reduced state carries tr(u_env rho_env) itself (not its
conjugate) and whose eigenbasis subensembles pick up the +eigenphase fringe
shifts, matching the phase-kick picture atom for atom.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .qcore import (
    DensityOperator,
    Epsilon,
    UnitaryOperator,
    WaySuperposition,
    partial_trace_env,
    superposition_state,
    tensor_product,
)


@dataclass(frozen=True)
class EnvironmentModel:
    """Environment (rho_env, u_env) pair of matching dimension."""

    rho_env: DensityOperator
    u_env: UnitaryOperator

    def __post_init__(self):
        if self.rho_env.dim != self.u_env.dim:
            raise ValueError(
                f"environment state dim {self.rho_env.dim} != unitary dim {self.u_env.dim}"
            )

    @property
    def dim(self) -> int:
        return self.rho_env.dim


def epsilon_of_env(m: EnvironmentModel) -> Epsilon:
    """Coherence attenuation eps = tr(u_env rho_env); |eps| <= 1 is forced."""
    return Epsilon.from_complex(np.trace(m.u_env.matrix @ m.rho_env.matrix))


def canonical_two_level(eps_modulus: float, delta: float) -> EnvironmentModel:
    """Minimal two-level environment realizing eps = eps_modulus * e^(i*delta).

    The environment starts in its ground state; the conditional unitary sends
    |0> to eps|0> + e^(i*delta) sqrt(1-|eps|^2)|1> and |1> to
    e^(i*delta) sqrt(1-|eps|^2)|0> - eps|1>.
    """
    m = float(eps_modulus)
    if not (0.0 <= m <= 1.0):
        raise ValueError(f"epsilon modulus must lie in [0, 1], got {m}")
    eps = m * cmath.exp(1j * delta)
    side = cmath.exp(1j * delta) * math.sqrt(max(1.0 - m * m, 0.0))
    u = np.array([[eps, side], [side, -eps]])
    rho = np.diag([1.0, 0.0]).astype(complex)
    return EnvironmentModel(DensityOperator(rho), UnitaryOperator(u))


def controlled_coupling(m: EnvironmentModel) -> UnitaryOperator:
    """Block-diagonal coupling: adjoint of u_env on way 0, identity on way 1."""
    dim = m.dim
    coupling = np.zeros((2 * dim, 2 * dim), dtype=complex)
    coupling[:dim, :dim] = m.u_env.matrix.conj().T
    coupling[dim:, dim:] = np.eye(dim)
    return UnitaryOperator(coupling)


def entangle_joint(psi0: WaySuperposition, m: EnvironmentModel) -> DensityOperator:
    """Joint system-environment state after the controlled coupling."""
    c = controlled_coupling(m).matrix
    product = tensor_product(superposition_state(psi0.theta, psi0.phi), m.rho_env)
    return DensityOperator(c @ product.matrix @ c.conj().T)


def reduced_system(joint: DensityOperator, env_dim: int) -> DensityOperator:
    """System state left after tracing the environment out of a joint state."""
    if joint.dim != 2 * env_dim:
        raise ValueError(f"joint dim {joint.dim} != 2 x env dim {env_dim}")
    return partial_trace_env(joint, 2, env_dim)


def random_unitary(dim: int, rng: np.random.Generator) -> UnitaryOperator:
    """Haar-style random unitary from QR of a complex Gaussian matrix."""
    gauss = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(gauss)
    q = q * (np.diagonal(r) / np.abs(np.diagonal(r)))
    return UnitaryOperator(q)


def random_density(dim: int, rng: np.random.Generator) -> DensityOperator:
    """Random density operator from a normalized A A^dagger."""
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return DensityOperator(rho / np.trace(rho))


def random_environment_model(dim: int, rng: np.random.Generator) -> EnvironmentModel:
    return EnvironmentModel(random_density(dim, rng), random_unitary(dim, rng))

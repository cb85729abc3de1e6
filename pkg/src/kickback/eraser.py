"""Quantum erasure: sorting by environment measurements into subensembles.

Measuring the environment of a joint state in an orthonormal basis sorts the
interferometer runs into conditional subensembles. Sorting in the eigenbasis
of the coupling unitary restores the original fringe visibility in every
subensemble; other bases can push one subensemble's visibility all the way
to 1. Erasure takes a joint state or environment model on purpose: a truly
random kick leaves nothing to condition on, so the kick picture exposes no
conditional output and classical_sort_control demonstrates that no kick-blind
tagging rule beats the unconditioned visibility.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dephase import PhaseWeight, epsilon_of_weight, sample_kicks, shard_rng
from .entangle import EnvironmentModel, entangle_joint, epsilon_of_env, reduced_system
from .qcore import (
    DensityOperator,
    Visibility,
    WaySuperposition,
    fringe_fourier_visibility,
    uniform_phase_grid,
    unitary_eigensystem,
    visibility,
)
from .reportio import kv_line
from .tolerances import VALID_TOL

PROB_DROP_TOL = 1e-14


class EnvBasis:
    """Orthonormal measurement basis for the environment, vectors as columns."""

    def __init__(self, vectors):
        b = np.array(vectors, dtype=complex)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise ValueError(f"basis must be a square column matrix, got shape {b.shape}")
        gram = b.conj().T @ b
        deviation = float(np.max(np.abs(gram - np.eye(b.shape[0]))))
        if deviation > VALID_TOL:
            raise ValueError(f"basis vectors are not orthonormal (deviation {deviation:.3e})")
        b.setflags(write=False)
        self._vectors = b

    @property
    def dim(self) -> int:
        return self._vectors.shape[0]

    @property
    def vectors(self) -> np.ndarray:
        return self._vectors

    def vector(self, k: int) -> np.ndarray:
        return self._vectors[:, k]


def computational_basis(dim: int) -> EnvBasis:
    return EnvBasis(np.eye(dim))


def eigen_erasure_basis(m: EnvironmentModel) -> EnvBasis:
    """Eigenbasis of the coupling unitary, ordered by ascending eigenphase.

    A fully degenerate unitary (identity-like) yields the computational
    basis. For the canonical two-level model the columns span
    sqrt((1 +- |eps|)/2)|0> +- sqrt((1 -+ |eps|)/2)|1> up to vector phases.
    """
    _, vectors = unitary_eigensystem(m.u_env)
    return EnvBasis(vectors)


@dataclass(frozen=True)
class Subensemble:
    """Conditional system state for one environment outcome."""

    probability: float
    state: DensityOperator
    label: int


def sort_subensembles(joint: DensityOperator, basis: EnvBasis) -> list[Subensemble]:
    """Conditional subensembles of a joint state for each basis outcome.

    Outcome k occurs with probability tr[(1 (x) |b_k><b_k|) joint] and leaves
    the normalized partial projection <b_k|joint|b_k> as the system state.
    Outcomes below probability 1e-14 are dropped to avoid 0/0 normalization.
    """
    env_dim = basis.dim
    if joint.dim != 2 * env_dim:
        raise ValueError(f"joint dim {joint.dim} != 2 x basis dim {env_dim}")
    blocks = joint.matrix.reshape(2, env_dim, 2, env_dim)
    out = []
    for k in range(env_dim):
        vec = basis.vector(k)
        projected = np.einsum("a,iajb,b->ij", vec.conj(), blocks, vec)
        probability = float(np.real(np.trace(projected)))
        if probability < PROB_DROP_TOL:
            continue
        out.append(Subensemble(probability, DensityOperator(projected / probability), k))
    return out


@dataclass(frozen=True)
class SubensembleRow:
    label: int
    probability: float
    visibility: float
    shift: float


@dataclass(frozen=True)
class ErasureReport:
    """Per-outcome probabilities, visibilities and shifts for one sorting."""

    rows: tuple[SubensembleRow, ...]
    unconditioned_visibility: float
    mixture_deviation: float

    def to_text(self) -> str:
        lines = [
            kv_line("unconditioned_visibility", self.unconditioned_visibility),
            kv_line("mixture_deviation", self.mixture_deviation),
        ]
        for row in self.rows:
            lines.append(kv_line("label", row.label))
            lines.append(kv_line("probability", row.probability))
            lines.append(kv_line("visibility", row.visibility))
            lines.append(kv_line("shift", row.shift))
        return "\n".join(lines) + "\n"


def erasure_report(psi0: WaySuperposition, m: EnvironmentModel, basis: EnvBasis) -> ErasureReport:
    """Sort the joint state of (psi0, m) in the given basis and tabulate it.

    The mixture deviation is the worst entrywise gap between the probability
    weighted sum of subensemble states and the unconditioned reduced state;
    sorting can never change the unconditioned ensemble.
    """
    joint = entangle_joint(psi0, m)
    subensembles = sort_subensembles(joint, basis)
    reduced = reduced_system(joint, m.dim)
    mixture = sum(s.probability * s.state.matrix for s in subensembles)
    deviation = float(np.max(np.abs(mixture - reduced.matrix)))
    rows = []
    for s in subensembles:
        vis = visibility(s.state)
        rows.append(SubensembleRow(s.label, s.probability, vis.visibility, vis.shift))
    return ErasureReport(
        rows=tuple(rows),
        unconditioned_visibility=visibility(reduced).visibility,
        mixture_deviation=deviation,
    )


def full_visibility_theta(eps_modulus: float) -> float:
    """Mixing angle at which computational-basis sorting yields a unit-visibility subensemble.

    The outcome conditioned on the unflipped detector state has way
    amplitudes proportional to (|eps| cos(theta/2), sin(theta/2)); they match
    at theta = 2*atan(|eps|), where that subensemble's visibility reaches 1
    and exceeds the undisturbed sin(theta).
    """
    m = float(eps_modulus)
    if not (0.0 < m <= 1.0):
        raise ValueError(f"epsilon modulus must lie in (0, 1], got {m}")
    return 2.0 * math.atan(m)


@dataclass(frozen=True)
class TagRow:
    tag: int
    shots: int
    visibility_hat: float
    within_bound: bool


@dataclass(frozen=True)
class ClassicalSortReport:
    """Per-tag empirical visibilities for kick-blind tagging of kicked runs."""

    rows: tuple[TagRow, ...]
    analytic_visibility: float
    bound: float
    passed: bool

    def to_text(self) -> str:
        lines = [
            kv_line("analytic_visibility", self.analytic_visibility),
            kv_line("bound", self.bound),
            kv_line("pass", self.passed),
        ]
        for row in self.rows:
            lines.append(kv_line("tag", row.tag))
            lines.append(kv_line("shots", row.shots))
            lines.append(kv_line("visibility_hat", row.visibility_hat))
        return "\n".join(lines) + "\n"


def classical_sort_control(
    psi0: WaySuperposition,
    w: PhaseWeight,
    n_tags: int,
    shots: int,
    seed: int,
    probe_grid: int = 64,
) -> ClassicalSortReport:
    """Monte Carlo control: tags carry no kick information by construction.

    Each shot draws a kick (never recorded in any conditional output) and an
    independent uniform tag, then a Bernoulli detection at a cycling probe
    phase. Every per-tag empirical visibility must sit within sampling error
    of the unconditioned |eps| sin(theta); the bound checked is
    4/sqrt(shots per tag).
    """
    if n_tags < 1:
        raise ValueError("need at least one tag")
    if shots < 1:
        raise ValueError("need at least one shot")
    eps = epsilon_of_weight(w)
    rng = shard_rng(seed, 0)
    phases = uniform_phase_grid(probe_grid)
    phase_index = np.arange(shots) % probe_grid
    kicks = sample_kicks(w, rng, shots)
    tags = rng.integers(0, n_tags, size=shots)
    p = 0.5 * (1.0 + math.sin(psi0.theta) * np.cos(phases[phase_index] - psi0.phi - kicks))
    detected = rng.random(shots) < p

    analytic = eps.modulus * math.sin(psi0.theta)
    rows = []
    all_ok = True
    for tag in range(n_tags):
        mask = tags == tag
        tag_shots = int(mask.sum())
        counts = np.bincount(phase_index[mask & detected], minlength=probe_grid)
        vis_hat = fringe_fourier_visibility(phases, counts).visibility
        bound = 4.0 / math.sqrt(max(tag_shots, 1))
        ok = abs(vis_hat - analytic) <= bound
        all_ok = all_ok and ok
        rows.append(TagRow(tag, tag_shots, vis_hat, ok))
    overall_bound = 4.0 / math.sqrt(max(shots // max(n_tags, 1), 1))
    return ClassicalSortReport(tuple(rows), analytic, overall_bound, all_ok)

"""Classical random phase kicks: weights over kick angles and the induced channel.

A phase-kick weight is a normalized positive distribution over kick angles
in (-pi, pi]. The induced channel depends on the weight only through its
first circular moment, so the channel itself is applied through that moment;
explicit mixtures of kicked projectors survive as test oracles. Four closed
variants are supported so every weight has an exact or quantified-error
moment: discrete atoms, a uniform window, a sampled grid density, and the
raised-cosine density of the two-cavity detector overlap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qcore import (
    TAU,
    DensityOperator,
    Epsilon,
    WaySuperposition,
    dephased_density,
    uniform_phase_grid,
    wrap_phase,
    wrap_phase_array,
)

MASS_TOL = 1e-9

_MASK64 = (1 << 64) - 1


def splitmix64(state: int) -> int:
    """One SplitMix64 output step; used to derive per-shard RNG streams."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def shard_rng(seed: int, shard: int = 0) -> np.random.Generator:
    """Deterministic generator for (seed, shard); shards give independent streams."""
    stream = splitmix64((int(seed) & _MASK64) ^ splitmix64(int(shard) & _MASK64))
    return np.random.Generator(np.random.PCG64(stream))


class PhaseWeight:
    """Base of the closed phase-kick weight variants."""

    def mass(self) -> float:
        raise NotImplementedError

    def first_moment(self) -> complex:
        """Integral of e^(i*phi) against the weight."""
        raise NotImplementedError

    def draw(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class AtomWeight(PhaseWeight):
    """Discrete kick distribution: atoms (phase_k, weight_k) with weight_k > 0."""

    phases: tuple[float, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        phases = tuple(wrap_phase(p) for p in self.phases)
        weights = tuple(float(w) for w in self.weights)
        if len(phases) != len(weights) or not phases:
            raise ValueError("atoms need matching, nonempty phase and weight lists")
        if any(w <= 0.0 for w in weights):
            raise ValueError("atom weights must be strictly positive")
        total = math.fsum(weights)
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"atom weights sum to {total}, expected 1")
        object.__setattr__(self, "phases", phases)
        object.__setattr__(self, "weights", weights)

    def mass(self) -> float:
        return math.fsum(self.weights)

    def first_moment(self) -> complex:
        return complex(sum(w * np.exp(1j * p) for p, w in zip(self.phases, self.weights)))

    def draw(self, rng, size):
        cumulative = np.cumsum(self.weights)
        picks = np.searchsorted(cumulative, rng.random(size) * cumulative[-1], side="right")
        picks = np.minimum(picks, len(self.phases) - 1)
        return np.asarray(self.phases, dtype=float)[picks]


@dataclass(frozen=True)
class WindowWeight(PhaseWeight):
    """Uniform kick density 1/(2*half_width) on |phi - center| <= half_width."""

    center: float
    half_width: float

    def __post_init__(self):
        chi = float(self.half_width)
        if not (0.0 < chi <= math.pi):
            raise ValueError(f"window half-width must lie in (0, pi], got {chi}")
        object.__setattr__(self, "center", wrap_phase(self.center))
        object.__setattr__(self, "half_width", chi)

    def mass(self) -> float:
        return 1.0

    def first_moment(self) -> complex:
        chi = self.half_width
        return complex(np.exp(1j * self.center) * math.sin(chi) / chi)

    def draw(self, rng, size):
        kicks = self.center + (2.0 * rng.random(size) - 1.0) * self.half_width
        return wrap_phase_array(kicks)


@dataclass(frozen=True)
class GridWeight(PhaseWeight):
    """Nonnegative kick density sampled on a uniform grid over (-pi, pi].

    Samples sit at -pi + 2*pi*(j+1)/n for j = 0..n-1 (see :func:`grid_phases`).
    The mass and first moment use the periodic trapezoid rule, which is
    spectrally accurate for smooth periodic densities.
    """

    density: tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.density)
        if len(values) < 8:
            raise ValueError("grid density needs at least 8 samples")
        if any(v < 0.0 for v in values):
            raise ValueError("grid density must be nonnegative")
        total = TAU / len(values) * math.fsum(values)
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"grid density mass is {total}, expected 1")
        object.__setattr__(self, "density", values)

    @staticmethod
    def grid_phases(n: int) -> np.ndarray:
        return uniform_phase_grid(n)

    @classmethod
    def from_function(cls, density_fn, n: int = 256, normalize: bool = False) -> "GridWeight":
        phases = cls.grid_phases(n)
        values = np.array([float(density_fn(p)) for p in phases])
        if normalize:
            values /= TAU / n * values.sum()
        return cls(tuple(values))

    def mass(self) -> float:
        return TAU / len(self.density) * math.fsum(self.density)

    def first_moment(self) -> complex:
        phases = self.grid_phases(len(self.density))
        return complex(TAU / len(self.density) * np.sum(self.density * np.exp(1j * phases)))

    def draw(self, rng, size):
        phases = self.grid_phases(len(self.density))
        values = np.asarray(self.density, dtype=float)
        nodes = np.concatenate(([-math.pi], phases))
        node_values = np.concatenate(([values[-1]], values))
        return _inverse_cdf_draw(nodes, node_values, rng, size)


@dataclass(frozen=True)
class SewCosineWeight(PhaseWeight):
    """Raised-cosine kick density 1/(2*pi) + cos(phi) * cos^2(lambda_t)/pi.

    Nonnegative exactly when cos^2(lambda_t) <= 1/2; the constructor rejects
    couplings outside that positivity region. Negative rounding residue of at
    most ~1e-16 at the boundary is clipped to zero in density evaluations.
    """

    lambda_t: float

    _SAMPLES = 4096

    def __post_init__(self):
        lt = float(self.lambda_t)
        if math.cos(lt) ** 2 > 0.5 + 1e-12:
            raise ValueError(
                f"cos^2(lambda_t) = {math.cos(lt) ** 2:.6f} > 1/2: density would go negative"
            )
        object.__setattr__(self, "lambda_t", lt)

    @property
    def cos_sq(self) -> float:
        return math.cos(self.lambda_t) ** 2

    def density_at(self, phi) -> np.ndarray:
        values = 1.0 / TAU + np.cos(np.asarray(phi, dtype=float)) * self.cos_sq / math.pi
        return np.maximum(values, 0.0)

    def mass(self) -> float:
        return 1.0

    def first_moment(self) -> complex:
        return complex(self.cos_sq)

    def draw(self, rng, size):
        nodes = np.linspace(-math.pi, math.pi, self._SAMPLES + 1)
        return _inverse_cdf_draw(nodes, self.density_at(nodes), rng, size)


def _inverse_cdf_draw(nodes, node_values, rng, size) -> np.ndarray:
    """Sample from a piecewise density given by values at ordered nodes."""
    widths = np.diff(nodes)
    cell_mass = widths * 0.5 * (node_values[:-1] + node_values[1:])
    cumulative = np.concatenate(([0.0], np.cumsum(cell_mass)))
    u = rng.random(size) * cumulative[-1]
    cells = np.clip(np.searchsorted(cumulative, u, side="right") - 1, 0, len(widths) - 1)
    safe_mass = np.where(cell_mass[cells] > 0.0, cell_mass[cells], 1.0)
    offsets = (u - cumulative[cells]) / safe_mass
    return wrap_phase_array(nodes[cells] + offsets * widths[cells])


def check_normalized(w: PhaseWeight) -> float:
    """Total mass of the weight; callers compare against 1."""
    return w.mass()


def epsilon_of_weight(w: PhaseWeight) -> Epsilon:
    """First circular moment of a normalized kick weight, as an Epsilon.

    The modulus cannot exceed the mass, so |eps| <= 1 is guaranteed for
    normalized weights up to rounding.
    """
    mass = w.mass()
    if abs(mass - 1.0) > MASS_TOL:
        raise ValueError(f"weight is not normalized (mass {mass})")
    return Epsilon.from_complex(w.first_moment())


def delta_pair_weight(eps: Epsilon) -> AtomWeight:
    """Two-atom weight at delta and delta+pi realizing a given epsilon.

    Weights are (1 +- |eps|)/2; for |eps| = 1 the vanishing atom is dropped.
    """
    if eps.modulus >= 1.0:
        return AtomWeight((eps.delta,), (1.0,))
    return AtomWeight(
        (eps.delta, wrap_phase(eps.delta + math.pi)),
        (0.5 * (1.0 + eps.modulus), 0.5 * (1.0 - eps.modulus)),
    )


def _sinc_ratio(chi: float) -> float:
    return math.sin(chi) / chi


def window_weight(eps_modulus: float, delta: float) -> PhaseWeight:
    """Uniform window centered at delta whose first moment has modulus eps_modulus.

    Solves sin(chi)/chi = eps_modulus for the half-width chi in (0, pi] by
    bisection to 1e-12; the ratio is strictly decreasing there so the root is
    unique. The limits degenerate cleanly: modulus 1 yields a single atom at
    delta, modulus 0 the full-circle window.
    """
    m = float(eps_modulus)
    if not (0.0 <= m <= 1.0):
        raise ValueError(f"epsilon modulus must lie in [0, 1], got {m}")
    if m >= 1.0:
        return AtomWeight((wrap_phase(delta),), (1.0,))
    if m == 0.0:
        return WindowWeight(delta, math.pi)
    lo, hi = 1e-9, math.pi
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if _sinc_ratio(mid) > m:
            lo = mid
        else:
            hi = mid
    return WindowWeight(delta, 0.5 * (lo + hi))


def sew_weight(lambda_t: float) -> SewCosineWeight:
    """Raised-cosine weight for detector coupling phase lambda_t."""
    return SewCosineWeight(lambda_t)


def apply_phase_kicks(psi0: WaySuperposition, w: PhaseWeight) -> DensityOperator:
    """Channel induced by averaging the kicked state over the weight.

    Routed through the first circular moment, since the averaged state
    depends on the weight only through it.
    """
    return dephased_density(psi0, epsilon_of_weight(w))


def sample_kicks(w: PhaseWeight, rng: np.random.Generator, size: int) -> np.ndarray:
    """size kick angles distributed per the weight, in (-pi, pi].

    Atoms sample by cumulative weights, windows uniformly, grid and
    raised-cosine densities by inverse CDF on their grids.
    """
    mass = w.mass()
    if abs(mass - 1.0) > MASS_TOL:
        raise ValueError(f"weight is not normalized (mass {mass})")
    return w.draw(rng, int(size))


def sample_kick(w: PhaseWeight, rng: np.random.Generator) -> float:
    """One kick angle distributed per the weight."""
    return float(sample_kicks(w, rng, 1)[0])

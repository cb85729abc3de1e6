"""Scenario configs and batch runners.

A scenario binds a prepared superposition to exactly one decoherence channel
(a phase-kick weight or an environment model), optionally an erasure basis,
and run parameters. Configs are flat `key = value` documents with dotted
sections; the exact grammar is documented in the README. Runners produce CSV
fringe data under a single fixed header plus key-value reports.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dephase import (
    AtomWeight,
    GridWeight,
    PhaseWeight,
    SewCosineWeight,
    WindowWeight,
    apply_phase_kicks,
    epsilon_of_weight,
    sample_kicks,
    shard_rng,
)
from .entangle import (
    EnvironmentModel,
    canonical_two_level,
    entangle_joint,
    epsilon_of_env,
    reduced_system,
)
from .eraser import EnvBasis, computational_basis, eigen_erasure_basis, sort_subensembles
from .qcore import (
    DensityOperator,
    Epsilon,
    UnitaryOperator,
    WaySuperposition,
    fringe_fourier_visibility,
    uniform_phase_grid,
    visibility,
)
from .reportio import fmt, kv_line, pairs_to_matrix

CSV_HEADER = "phi_probe,probability,label,label_probability,count,shots"

KICK_KINDS = ("atoms", "window", "grid", "sew")
ENV_KINDS = ("canonical", "explicit")
ERASURE_KINDS = ("eigen", "computational", "explicit")


class ScenarioError(ValueError):
    """Malformed or inconsistent scenario configuration."""


@dataclass(frozen=True, eq=False)
class Scenario:
    """Validated description of one experiment run."""

    theta: float
    phi: float
    channel_kind: str
    channel: PhaseWeight | EnvironmentModel
    erasure_kind: str | None = None
    erasure_vectors: np.ndarray | None = None
    probe_grid: int = 64
    shots: int = 0
    seed: int = 0
    output: str | None = None

    def __post_init__(self):
        if not (0.0 < self.theta < math.pi):
            raise ScenarioError(f"theta must lie strictly inside (0, pi), got {self.theta}")
        if self.channel_kind in KICK_KINDS:
            if not isinstance(self.channel, PhaseWeight):
                raise ScenarioError(f"channel kind '{self.channel_kind}' needs a phase-kick weight")
            if self.erasure_kind is not None:
                raise ScenarioError(
                    "erasure.basis requires an environment channel; "
                    "random kicks leave nothing to condition on"
                )
        elif self.channel_kind in ENV_KINDS:
            if not isinstance(self.channel, EnvironmentModel):
                raise ScenarioError(f"channel kind '{self.channel_kind}' needs an environment model")
        else:
            raise ScenarioError(f"channel.kind must be one of {KICK_KINDS + ENV_KINDS}")
        if self.erasure_kind is not None and self.erasure_kind not in ERASURE_KINDS:
            raise ScenarioError(f"erasure.basis must be one of {ERASURE_KINDS}")
        if self.erasure_kind == "explicit" and self.erasure_vectors is None:
            raise ScenarioError("erasure.basis = explicit needs erasure.vectors")
        if self.probe_grid < 8:
            raise ScenarioError(f"probe.grid must be >= 8, got {self.probe_grid}")
        if self.shots < 0:
            raise ScenarioError(f"shots must be >= 0, got {self.shots}")

    @property
    def psi0(self) -> WaySuperposition:
        return WaySuperposition(self.theta, self.phi)

    @property
    def is_env_channel(self) -> bool:
        return self.channel_kind in ENV_KINDS

    def epsilon(self) -> Epsilon:
        if self.is_env_channel:
            return epsilon_of_env(self.channel)
        return epsilon_of_weight(self.channel)

    def resolve_basis(self) -> EnvBasis | None:
        if self.erasure_kind is None:
            return None
        model = self.channel
        if self.erasure_kind == "eigen":
            return eigen_erasure_basis(model)
        if self.erasure_kind == "computational":
            return computational_basis(model.dim)
        basis = EnvBasis(np.asarray(self.erasure_vectors).T)
        if basis.dim != model.dim:
            raise ScenarioError(
                f"erasure.vectors dimension {basis.dim} != environment dimension {model.dim}"
            )
        return basis


# ---------------------------------------------------------------------------
# config parsing


def _parse_kv_document(text: str) -> dict[str, str]:
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ScenarioError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        if key in entries:
            raise ScenarioError(f"line {lineno}: duplicate key '{key}'")
        if not value:
            raise ScenarioError(f"line {lineno}: key '{key}' has an empty value")
        entries[key] = value
    return entries


class _ConfigReader:
    def __init__(self, entries: dict[str, str]):
        self.entries = entries
        self.consumed: set[str] = set()

    def has(self, key: str) -> bool:
        return key in self.entries

    def raw(self, key: str) -> str:
        self.consumed.add(key)
        return self.entries[key]

    def get_float(self, key: str, default: float | None = None) -> float | None:
        if key not in self.entries:
            return default
        try:
            return float(self.raw(key))
        except ValueError:
            raise ScenarioError(f"key '{key}': expected a number, got {self.entries[key]!r}") from None

    def get_int(self, key: str, default: int | None = None) -> int | None:
        if key not in self.entries:
            return default
        try:
            return int(self.raw(key))
        except ValueError:
            raise ScenarioError(f"key '{key}': expected an integer, got {self.entries[key]!r}") from None

    def get_floats(self, key: str) -> list[float]:
        try:
            return [float(tok) for tok in self.raw(key).split()]
        except ValueError:
            raise ScenarioError(f"key '{key}': expected numbers, got {self.entries[key]!r}") from None

    def get_str(self, key: str, default: str | None = None) -> str | None:
        if key not in self.entries:
            return default
        return self.raw(key)

    def reject_unknown(self):
        extras = sorted(set(self.entries) - self.consumed)
        if extras:
            raise ScenarioError(f"unknown key '{extras[0]}'")


def _build_channel(reader: _ConfigReader) -> tuple[str, PhaseWeight | EnvironmentModel]:
    kind = reader.get_str("channel.kind")
    if kind is None:
        raise ScenarioError("missing required key 'channel.kind'")
    if kind not in KICK_KINDS + ENV_KINDS:
        raise ScenarioError(f"channel.kind must be one of {KICK_KINDS + ENV_KINDS}, got '{kind}'")
    try:
        if kind == "atoms":
            phases = reader.get_floats("channel.phases")
            weights = reader.get_floats("channel.weights")
            return kind, AtomWeight(tuple(phases), tuple(weights))
        if kind == "window":
            center = reader.get_float("channel.center")
            half_width = reader.get_float("channel.half_width")
            if center is None or half_width is None:
                raise ScenarioError("window channel needs channel.center and channel.half_width")
            return kind, WindowWeight(center, half_width)
        if kind == "grid":
            return kind, GridWeight(tuple(reader.get_floats("channel.density")))
        if kind == "sew":
            lambda_t = reader.get_float("channel.lambda_t")
            if lambda_t is None:
                raise ScenarioError("sew channel needs channel.lambda_t")
            return kind, SewCosineWeight(lambda_t)
        if kind == "canonical":
            eps_modulus = reader.get_float("channel.eps_modulus")
            if eps_modulus is None:
                raise ScenarioError("canonical channel needs channel.eps_modulus")
            delta = reader.get_float("channel.delta", 0.0)
            return kind, canonical_two_level(eps_modulus, delta)
        rho = pairs_to_matrix(reader.get_floats("channel.rho_env"))
        u = pairs_to_matrix(reader.get_floats("channel.u_env"))
        return kind, EnvironmentModel(DensityOperator(rho), UnitaryOperator(u))
    except KeyError as exc:
        raise ScenarioError(f"channel kind '{kind}' is missing key {exc}") from None
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(f"invalid channel spec: {exc}") from None


def parse_scenario(text: str) -> Scenario:
    """Parse and validate a scenario config document.

    Unknown keys are rejected by name; constraint violations name the
    offending key or constraint.
    """
    reader = _ConfigReader(_parse_kv_document(text))

    has_theta, has_sin = reader.has("theta"), reader.has("sin_theta")
    if has_theta and has_sin:
        raise ScenarioError("give exactly one of 'theta' and 'sin_theta'")
    if has_theta:
        theta = reader.get_float("theta")
    elif has_sin:
        sin_theta = reader.get_float("sin_theta")
        if not (0.0 < sin_theta <= 1.0):
            raise ScenarioError(f"sin_theta must lie in (0, 1], got {sin_theta}")
        theta = math.asin(sin_theta)
    else:
        raise ScenarioError("missing required key 'theta' (or 'sin_theta')")

    phi = reader.get_float("phi", 0.0)
    kind, channel = _build_channel(reader)

    erasure_kind = reader.get_str("erasure.basis")
    erasure_vectors = None
    if erasure_kind == "explicit":
        erasure_vectors = pairs_to_matrix(reader.get_floats("erasure.vectors"))

    probe_grid = reader.get_int("probe.grid", 64)
    shots = reader.get_int("shots", 0)
    seed = reader.get_int("seed", 0)
    output = reader.get_str("output")
    reader.reject_unknown()

    try:
        return Scenario(
            theta=theta,
            phi=phi,
            channel_kind=kind,
            channel=channel,
            erasure_kind=erasure_kind,
            erasure_vectors=erasure_vectors,
            probe_grid=probe_grid,
            shots=shots,
            seed=seed,
            output=output,
        )
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None


# ---------------------------------------------------------------------------
# runners


@dataclass(frozen=True)
class SeriesResult:
    """One fringe series: unconditioned (label None) or one subensemble."""

    label: int | None
    label_probability: float | None
    probabilities: np.ndarray
    visibility: float
    shift: float
    counts: np.ndarray | None = None
    shots_per_phase: np.ndarray | None = None
    visibility_hat: float | None = None
    shift_hat: float | None = None
    frequency: float | None = None


@dataclass(frozen=True)
class RunResult:
    """Everything a runner produced: analytic values plus optional counts."""

    scenario: Scenario
    mode: str
    eps: Epsilon
    phases: np.ndarray
    unconditioned: SeriesResult
    subensembles: tuple[SeriesResult, ...]
    mixture_deviation: float | None = None
    shards: int | None = None

    def to_csv_text(self) -> str:
        lines = [CSV_HEADER]
        for series in (self.unconditioned, *self.subensembles):
            for j, phase in enumerate(self.phases):
                if series.counts is None:
                    prob = fmt(series.probabilities[j])
                    count = shots = ""
                else:
                    n = int(series.shots_per_phase[j])
                    c = int(series.counts[j])
                    prob = fmt(c / n) if n > 0 else ""
                    count, shots = str(c), str(n)
                label = "" if series.label is None else str(series.label)
                if series.label is None:
                    label_prob = ""
                elif series.frequency is not None:
                    label_prob = fmt(series.frequency)
                else:
                    label_prob = fmt(series.label_probability)
                lines.append(",".join([fmt(phase), prob, label, label_prob, count, shots]))
        return "\n".join(lines) + "\n"

    def to_report_text(self) -> str:
        s = self.scenario
        lines = [
            kv_line("mode", self.mode),
            kv_line("theta", s.theta),
            kv_line("phi", s.phi),
            kv_line("channel", s.channel_kind),
            kv_line("eps", self.eps.modulus, self.eps.delta),
            kv_line("visibility", self.unconditioned.visibility),
            kv_line("shift", self.unconditioned.shift),
            kv_line("probe_grid", s.probe_grid),
        ]
        if self.mode == "monte-carlo":
            lines.append(kv_line("shots", s.shots))
            lines.append(kv_line("seed", s.seed))
            lines.append(kv_line("shards", self.shards))
            lines.append(kv_line("visibility_hat", self.unconditioned.visibility_hat))
        if s.erasure_kind is not None:
            lines.append(kv_line("erasure_basis", s.erasure_kind))
            lines.append(kv_line("unconditioned_visibility", self.unconditioned.visibility))
            lines.append(kv_line("mixture_deviation", self.mixture_deviation))
            for series in self.subensembles:
                lines.append(kv_line("label", series.label))
                lines.append(kv_line("probability", series.label_probability))
                lines.append(kv_line("visibility", series.visibility))
                lines.append(kv_line("shift", series.shift))
                if series.frequency is not None:
                    lines.append(kv_line("frequency", series.frequency))
                if series.visibility_hat is not None:
                    lines.append(kv_line("visibility_hat", series.visibility_hat))
        return "\n".join(lines) + "\n"


def _fringe_curve(rho: DensityOperator, phases: np.ndarray) -> np.ndarray:
    coherence = complex(rho.matrix[1, 0])
    return 0.5 * (1.0 + 2.0 * np.real(np.exp(-1j * phases) * coherence))


def _analytic_core(s: Scenario):
    """Reduced state, epsilon and (optionally) subensembles of a scenario."""
    psi0 = s.psi0
    if s.is_env_channel:
        joint = entangle_joint(psi0, s.channel)
        rho = reduced_system(joint, s.channel.dim)
    else:
        joint = None
        rho = apply_phase_kicks(psi0, s.channel)
    subensembles = []
    mixture_deviation = None
    basis = s.resolve_basis()
    if basis is not None:
        subensembles = sort_subensembles(joint, basis)
        mixture = sum(sub.probability * sub.state.matrix for sub in subensembles)
        mixture_deviation = float(np.max(np.abs(mixture - rho.matrix)))
    return rho, s.epsilon(), subensembles, mixture_deviation


def run_analytic(s: Scenario) -> RunResult:
    """Exact fringe curves, visibility and erasure table for a scenario."""
    phases = uniform_phase_grid(s.probe_grid)
    rho, eps, subensembles, mixture_deviation = _analytic_core(s)
    vis = visibility(rho)
    unconditioned = SeriesResult(
        label=None,
        label_probability=None,
        probabilities=_fringe_curve(rho, phases),
        visibility=vis.visibility,
        shift=vis.shift,
    )
    series = []
    for sub in subensembles:
        sub_vis = visibility(sub.state)
        series.append(
            SeriesResult(
                label=sub.label,
                label_probability=sub.probability,
                probabilities=_fringe_curve(sub.state, phases),
                visibility=sub_vis.visibility,
                shift=sub_vis.shift,
            )
        )
    return RunResult(
        scenario=s,
        mode="analytic",
        eps=eps,
        phases=phases,
        unconditioned=unconditioned,
        subensembles=tuple(series),
        mixture_deviation=mixture_deviation,
    )


def _shard_bounds(shots: int, shards: int) -> list[tuple[int, int]]:
    return [(shard * shots // shards, (shard + 1) * shots // shards) for shard in range(shards)]


def run_monte_carlo(s: Scenario, shards: int = 1) -> RunResult:
    """Stochastic realization of a scenario: Bernoulli detections per probe phase.

    Shot i is assigned probe phase i mod probe_grid. Kick channels draw a
    kick per shot and detect on the kicked pure state; environment channels
    with erasure first draw the environment outcome, then detect on the
    conditional state. Each shard consumes an independent derived RNG stream
    (channel randomness first, then detection uniforms), and counts merge by
    addition, so results are deterministic given (config, seed, shards).
    """
    if s.shots < 1:
        raise ScenarioError("monte carlo needs shots >= 1")
    if shards < 1:
        raise ScenarioError("shards must be >= 1")
    phases = uniform_phase_grid(s.probe_grid)
    analytic = run_analytic(s)
    subensembles = analytic.subensembles
    grid = s.probe_grid
    sin_theta = math.sin(s.theta)

    n_series = len(subensembles)
    if n_series:
        cond_curves = np.stack([sub.probabilities for sub in subensembles])
        outcome_probs = np.array([sub.label_probability for sub in subensembles])
        outcome_cum = np.cumsum(outcome_probs)
        sub_counts = np.zeros((n_series, grid), dtype=np.int64)
        sub_shots = np.zeros((n_series, grid), dtype=np.int64)
    counts = np.zeros(grid, dtype=np.int64)
    shots_per_phase = np.zeros(grid, dtype=np.int64)

    for shard, (lo, hi) in enumerate(_shard_bounds(s.shots, shards)):
        n = hi - lo
        if n == 0:
            continue
        rng = shard_rng(s.seed, shard)
        phase_index = np.arange(lo, hi) % grid
        if not s.is_env_channel:
            kicks = sample_kicks(s.channel, rng, n)
            p = 0.5 * (1.0 + sin_theta * np.cos(phases[phase_index] - s.phi - kicks))
            outcomes = None
        elif n_series:
            draws = rng.random(n) * outcome_cum[-1]
            outcomes = np.minimum(
                np.searchsorted(outcome_cum, draws, side="right"), n_series - 1
            )
            p = cond_curves[outcomes, phase_index]
        else:
            outcomes = None
            p = analytic.unconditioned.probabilities[phase_index]
        detected = rng.random(n) < p
        shots_per_phase += np.bincount(phase_index, minlength=grid)
        counts += np.bincount(phase_index[detected], minlength=grid)
        if outcomes is not None:
            flat = outcomes * grid + phase_index
            sub_shots += np.bincount(flat, minlength=n_series * grid).reshape(n_series, grid)
            sub_counts += np.bincount(
                flat[detected], minlength=n_series * grid
            ).reshape(n_series, grid)

    vis_hat = fringe_fourier_visibility(phases, counts)
    unconditioned = SeriesResult(
        label=None,
        label_probability=None,
        probabilities=analytic.unconditioned.probabilities,
        visibility=analytic.unconditioned.visibility,
        shift=analytic.unconditioned.shift,
        counts=counts,
        shots_per_phase=shots_per_phase,
        visibility_hat=vis_hat.visibility,
        shift_hat=vis_hat.shift,
    )
    series = []
    for k, sub in enumerate(subensembles):
        sub_vis_hat = fringe_fourier_visibility(phases, sub_counts[k])
        series.append(
            SeriesResult(
                label=sub.label,
                label_probability=sub.label_probability,
                probabilities=sub.probabilities,
                visibility=sub.visibility,
                shift=sub.shift,
                counts=sub_counts[k],
                shots_per_phase=sub_shots[k],
                visibility_hat=sub_vis_hat.visibility,
                shift_hat=sub_vis_hat.shift,
                frequency=float(sub_shots[k].sum() / s.shots),
            )
        )
    return RunResult(
        scenario=s,
        mode="monte-carlo",
        eps=analytic.eps,
        phases=phases,
        unconditioned=unconditioned,
        subensembles=tuple(series),
        mixture_deviation=analytic.mixture_deviation,
        shards=shards,
    )

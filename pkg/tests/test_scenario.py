"""Scenario parsing, runners, CSV layout and determinism."""

import math

import numpy as np
import pytest

from kickback.qcore import uniform_phase_grid
from kickback.scenario import (
    CSV_HEADER,
    Scenario,
    ScenarioError,
    parse_scenario,
    run_analytic,
    run_monte_carlo,
)

MINIMAL = """
theta = 1.5707963267948966
channel.kind = atoms
channel.phases = 0.0 3.141592653589793
channel.weights = 0.8 0.2
"""

CANONICAL = """
theta = 1.5707963267948966
phi = 0.0
channel.kind = canonical
channel.eps_modulus = 0.6
channel.delta = 0.0
"""

ERASURE = CANONICAL + "erasure.basis = eigen\n"

EXPLICIT_ENV = """
theta = 1.0
channel.kind = explicit
channel.rho_env = 1 0 0 0 0 0 0 0
channel.u_env = 0.6 0 0.8 0 0.8 0 -0.6 0
erasure.basis = explicit
erasure.vectors = 1 0 0 0 0 0 1 0
"""


class TestParseScenario:
    def test_minimal_defaults(self):
        s = parse_scenario(MINIMAL)
        assert s.probe_grid == 64
        assert s.shots == 0
        assert s.seed == 0
        assert s.phi == 0.0
        assert s.channel_kind == "atoms"
        assert s.erasure_kind is None

    def test_sin_theta_alternative(self):
        s = parse_scenario("sin_theta = 0.7\nchannel.kind = canonical\nchannel.eps_modulus = 1\n")
        assert s.theta == pytest.approx(math.asin(0.7), abs=1e-15)

    def test_theta_and_sin_theta_conflict(self):
        with pytest.raises(ScenarioError, match="exactly one"):
            parse_scenario("theta = 1.0\nsin_theta = 0.7\nchannel.kind = atoms\n")

    def test_unknown_key_named(self):
        with pytest.raises(ScenarioError, match="unknown key 'channel.centre'"):
            parse_scenario(MINIMAL + "channel.centre = 0.0\n")

    def test_duplicate_key_named_with_line(self):
        with pytest.raises(ScenarioError, match="duplicate key 'theta'"):
            parse_scenario(MINIMAL + "theta = 2.0\n")

    def test_missing_channel_kind(self):
        with pytest.raises(ScenarioError, match="channel.kind"):
            parse_scenario("theta = 1.0\n")

    def test_mixed_channel_fields_rejected(self):
        with pytest.raises(ScenarioError, match="unknown key 'channel.eps_modulus'"):
            parse_scenario(MINIMAL + "channel.eps_modulus = 0.5\n")

    def test_erasure_needs_environment_channel(self):
        with pytest.raises(ScenarioError, match="erasure"):
            parse_scenario(MINIMAL + "erasure.basis = eigen\n")

    def test_malformed_line_reports_position(self):
        with pytest.raises(ScenarioError, match="line 2"):
            parse_scenario("theta = 1.0\nnot a key value pair\n")

    def test_bad_number_names_key(self):
        with pytest.raises(ScenarioError, match="'theta'"):
            parse_scenario("theta = abc\nchannel.kind = atoms\n")

    def test_theta_domain_enforced(self):
        with pytest.raises(ScenarioError, match="theta"):
            parse_scenario(MINIMAL.replace("theta = 1.5707963267948966", "theta = 3.5"))

    def test_probe_grid_minimum(self):
        with pytest.raises(ScenarioError, match="probe.grid"):
            parse_scenario(MINIMAL + "probe.grid = 4\n")

    def test_explicit_matrices_and_basis(self):
        s = parse_scenario(EXPLICIT_ENV)
        assert s.channel.dim == 2
        basis = s.resolve_basis()
        np.testing.assert_allclose(basis.vectors, np.eye(2), atol=1e-12)

    def test_unnormalized_atoms_rejected_via_config(self):
        bad = MINIMAL.replace("0.8 0.2", "0.8 0.4")
        with pytest.raises(ScenarioError, match="sum"):
            parse_scenario(bad)


class TestPresets:
    @pytest.mark.parametrize("stage,eps_mod", [(1, 1.0), (2, 0.0), (3, 0.0)])
    def test_presets_parse(self, stage, eps_mod):
        from importlib import resources

        text = (resources.files("kickback") / "presets" / f"dnr_stage{stage}.cfg").read_text()
        s = parse_scenario(text)
        assert s.theta == pytest.approx(math.asin(0.7), abs=1e-15)
        from kickback.entangle import epsilon_of_env

        assert epsilon_of_env(s.channel).modulus == pytest.approx(eps_mod, abs=1e-12)
        assert s.erasure_kind == ("eigen" if stage == 3 else None)


class TestRunAnalytic:
    def test_identity_channel_full_visibility(self):
        s = parse_scenario(CANONICAL.replace("0.6", "1.0"))
        result = run_analytic(s)
        assert result.unconditioned.visibility == pytest.approx(1.0, abs=1e-12)

    def test_stage2_kills_fringes(self):
        from kickback.cli import _load_config

        result = run_analytic(parse_scenario(_load_config("dnr-stage2")))
        assert result.unconditioned.visibility == pytest.approx(0.0, abs=1e-12)

    def test_stage3_erasure_restores_seventy_percent(self):
        from kickback.cli import _load_config

        result = run_analytic(parse_scenario(_load_config("dnr-stage3")))
        assert len(result.subensembles) == 2
        for sub in result.subensembles:
            assert sub.visibility == pytest.approx(0.7, abs=1e-12)
            assert sub.label_probability == pytest.approx(0.5, abs=1e-12)
        assert result.mixture_deviation < 1e-12

    def test_csv_layout_without_erasure(self):
        result = run_analytic(parse_scenario(MINIMAL))
        lines = result.to_csv_text().strip().split("\n")
        assert lines[0] == CSV_HEADER
        assert len(lines) == 1 + 64
        fields = lines[1].split(",")
        assert len(fields) == 6
        assert fields[2] == fields[3] == fields[4] == fields[5] == ""

    def test_csv_layout_with_erasure(self):
        result = run_analytic(parse_scenario(ERASURE))
        lines = result.to_csv_text().strip().split("\n")
        assert len(lines) == 1 + 64 * (1 + 2)
        labeled = [line for line in lines[1:] if line.split(",")[2] != ""]
        assert len(labeled) == 128

    def test_curves_match_fringe_probability(self):
        from kickback.dephase import apply_phase_kicks

        s = parse_scenario(MINIMAL)
        result = run_analytic(s)
        rho = apply_phase_kicks(s.psi0, s.channel)
        from kickback.qcore import fringe_probability

        for phase, prob in zip(result.phases, result.unconditioned.probabilities):
            assert prob == pytest.approx(fringe_probability(rho, phase), abs=1e-12)

    def test_report_fields(self):
        text = run_analytic(parse_scenario(ERASURE)).to_report_text()
        for field in ("mode", "theta", "channel", "eps", "visibility", "shift",
                      "erasure_basis", "mixture_deviation", "label", "probability"):
            assert f"{field} = " in text


class TestRunMonteCarlo:
    def test_requires_shots(self):
        with pytest.raises(ScenarioError, match="shots"):
            run_monte_carlo(parse_scenario(MINIMAL))

    def test_full_dephasing_estimator_near_zero(self):
        s = parse_scenario(CANONICAL.replace("0.6", "0.0") + "shots = 100000\nseed = 3\n")
        result = run_monte_carlo(s)
        assert result.unconditioned.visibility_hat < 0.02

    def test_estimator_matches_analytic_within_bound(self):
        s = parse_scenario(CANONICAL + "shots = 30000\nseed = 9\n")
        result = run_monte_carlo(s)
        bound = 4.0 / math.sqrt(30000)
        assert abs(result.unconditioned.visibility_hat - 0.6) <= bound

    def test_kick_channel_monte_carlo(self):
        s = parse_scenario(MINIMAL + "shots = 30000\nseed = 11\n")
        result = run_monte_carlo(s)
        assert abs(result.unconditioned.visibility_hat - 0.6) <= 4.0 / math.sqrt(30000)

    def test_erasure_monte_carlo_frequencies_and_visibility(self):
        from kickback.cli import _load_config

        s = parse_scenario(_load_config("dnr-stage3"))
        import dataclasses

        s = dataclasses.replace(s, shots=100_000, seed=1)
        result = run_monte_carlo(s)
        for sub in result.subensembles:
            assert sub.frequency == pytest.approx(0.5, abs=0.01)
            assert sub.visibility_hat == pytest.approx(0.7, abs=0.02)

    def test_byte_identical_reruns(self):
        s = parse_scenario(ERASURE + "shots = 5000\nseed = 7\n")
        first = run_monte_carlo(s, shards=3)
        second = run_monte_carlo(s, shards=3)
        assert first.to_csv_text() == second.to_csv_text()

    def test_shard_count_changes_partition_not_totals(self):
        s = parse_scenario(MINIMAL + "shots = 999\nseed = 2\n")
        one = run_monte_carlo(s, shards=1)
        many = run_monte_carlo(s, shards=4)
        assert one.unconditioned.shots_per_phase.sum() == 999
        assert many.unconditioned.shots_per_phase.sum() == 999
        np.testing.assert_array_equal(
            one.unconditioned.shots_per_phase, many.unconditioned.shots_per_phase
        )

    def test_single_shot_is_deterministic(self):
        s = parse_scenario(MINIMAL + "shots = 1\nseed = 123\n")
        assert run_monte_carlo(s).to_csv_text() == run_monte_carlo(s).to_csv_text()

    def test_counts_bounded_by_shots(self):
        s = parse_scenario(MINIMAL + "shots = 2000\nseed = 1\n")
        result = run_monte_carlo(s)
        assert np.all(result.unconditioned.counts <= result.unconditioned.shots_per_phase)

    def test_probe_grid_phases_used(self):
        s = parse_scenario(MINIMAL + "probe.grid = 16\nshots = 160\nseed = 0\n")
        result = run_monte_carlo(s)
        np.testing.assert_allclose(result.phases, uniform_phase_grid(16))
        np.testing.assert_array_equal(result.unconditioned.shots_per_phase, [10] * 16)


class TestScenarioDirectConstruction:
    def test_channel_kind_mismatch(self):
        from kickback.dephase import AtomWeight

        with pytest.raises(ScenarioError, match="environment"):
            Scenario(
                theta=1.0,
                phi=0.0,
                channel_kind="canonical",
                channel=AtomWeight((0.0,), (1.0,)),
            )

    def test_negative_shots_rejected(self):
        from kickback.dephase import AtomWeight

        with pytest.raises(ScenarioError, match="shots"):
            Scenario(
                theta=1.0,
                phi=0.0,
                channel_kind="atoms",
                channel=AtomWeight((0.0,), (1.0,)),
                shots=-1,
            )

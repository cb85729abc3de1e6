"""Truncated Fock-space numerics: coherent states, resolutions, detector overlap."""

import math

import numpy as np
import pytest
from scipy.stats import poisson

from kickback.dephase import epsilon_of_weight, sew_weight
from kickback.entangle import canonical_two_level, entangle_joint, reduced_system
from kickback.fock import (
    FockVector,
    SewParams,
    basis_vector,
    coherent_state,
    lowering_operator,
    phase_integral_inner_product,
    resolution_check,
    sew_epsilon_bridge,
    sew_overlap,
    two_mode_kron,
)
from kickback.qcore import Epsilon, WaySuperposition, dephased_density

TAU = 2 * math.pi


class TestCoherentState:
    def test_zero_amplitude_is_vacuum(self):
        v = coherent_state(0.0, 8)
        np.testing.assert_array_equal(v.amplitudes, basis_vector(0, 8).amplitudes)

    def test_unit_amplitude_nearly_normalized(self):
        v = coherent_state(1.0, 32)
        assert v.norm_sq() == pytest.approx(1.0, abs=1e-12)

    def test_truncation_deficit_matches_poisson_tail(self):
        for alpha, n_max in [(0.5, 8), (1.5, 12), (3.0, 16), (2.0 + 1.0j, 20)]:
            v = coherent_state(alpha, n_max)
            tail = float(poisson.sf(n_max, abs(alpha) ** 2))
            assert v.truncation_deficit() == pytest.approx(tail, abs=1e-12)

    def test_is_lowering_operator_eigenvector(self):
        a = lowering_operator(64)
        for alpha in (0.5, 1.5 - 0.8j, math.sqrt(10)):
            v = coherent_state(alpha, 64).amplitudes
            assert np.linalg.norm(a @ v - alpha * v) < 1e-8

    def test_component_phases_follow_amplitude_arg(self):
        v = coherent_state(1.0j, 6).amplitudes
        assert np.angle(v[1]) == pytest.approx(math.pi / 2, abs=1e-12)
        assert np.angle(v[2]) == pytest.approx(math.pi, abs=1e-12)

    def test_norm_bound_enforced(self):
        with pytest.raises(ValueError, match="norm"):
            FockVector([1.0, 1.0])


class TestResolutionCheck:
    def test_default_grids_resolve_identity(self):
        assert resolution_check(12, 32, 50.0, 64, 200) < 1e-6

    def test_diagonal_entries_are_unity(self):
        # the m = n case reduces to the intensity integral alone
        deviation = resolution_check(n_sub=0, n_max=8, i_max=50.0, n_phi=16, n_i=64)
        assert deviation < 1e-10

    def test_doubling_phase_grid_is_stable(self):
        base = resolution_check(8, 32, 50.0, 64, 200)
        doubled = resolution_check(8, 32, 50.0, 128, 200)
        assert abs(base - doubled) < 10 * np.finfo(float).eps

    def test_deviation_decreases_with_intensity_nodes(self):
        deviations = [resolution_check(4, 16, 40.0, 32, n_i) for n_i in (8, 12, 20, 40)]
        for coarse, fine in zip(deviations, deviations[1:]):
            assert fine <= coarse + 1e-12

    def test_small_intensity_cutoff_shows_tail(self):
        # with i_max = 10 the missing tail e^(-10) dominates the deviation
        deviation = resolution_check(4, 16, 10.0, 32, 100)
        assert deviation == pytest.approx(math.exp(-10.0), rel=1e-6)

    def test_preconditions(self):
        with pytest.raises(ValueError, match="n_sub"):
            resolution_check(n_sub=20, n_max=32)
        with pytest.raises(ValueError, match="at least 8"):
            resolution_check(n_phi=4)


class TestPhaseIntegral:
    def test_phase_integral_vanishes(self):
        result = phase_integral_inner_product()
        assert abs(result.value) < 1e-10

    def test_direct_orthogonality(self):
        one_zero = two_mode_kron(basis_vector(1, 1), basis_vector(0, 1))
        zero_one = two_mode_kron(basis_vector(0, 1), basis_vector(1, 1))
        assert np.vdot(one_zero, zero_one) == 0.0

    def test_recovered_relative_phase_weight_is_uniform(self):
        result = phase_integral_inner_product()
        np.testing.assert_allclose(result.relative_phase_density, 1.0 / TAU, atol=1e-8)
        # the recovered weight is a normalized kick distribution with zero moment
        step = TAU / len(result.relative_phase_density)
        assert step * result.relative_phase_density.sum() == pytest.approx(1.0, abs=1e-8)


class TestSewOverlap:
    def test_no_interaction(self):
        assert sew_overlap(SewParams(0.0)) == pytest.approx(1.0, abs=1e-15)

    def test_perfect_marking(self):
        assert sew_overlap(SewParams(math.pi / 2)) == pytest.approx(0.0, abs=1e-15)

    def test_half_boundary(self):
        assert sew_overlap(SewParams(math.pi / 4)) == pytest.approx(0.5, abs=1e-12)

    def test_matches_cosine_square_for_random_couplings(self):
        rng = np.random.default_rng(0)
        for lt in rng.uniform(-6, 6, 100):
            assert abs(sew_overlap(SewParams(lt)) - math.cos(lt) ** 2) < 1e-12


class TestSewEpsilonBridge:
    def test_orthogonal_coupling(self):
        eps = sew_epsilon_bridge(SewParams(math.pi / 2))
        assert eps.modulus == pytest.approx(0.0, abs=1e-15)

    def test_boundary_coupling(self):
        eps = sew_epsilon_bridge(SewParams(math.pi / 4))
        assert eps.modulus == pytest.approx(0.5, abs=1e-12)
        assert eps.delta == 0.0

    def test_third_coupling_matches_weight_quadrature(self):
        eps = sew_epsilon_bridge(SewParams(math.pi / 3))
        assert eps.modulus == pytest.approx(0.25, abs=1e-12)
        w = sew_weight(math.pi / 3)
        phis = np.linspace(-math.pi, math.pi, 100_001)
        oracle = np.trapezoid(w.density_at(phis) * np.exp(1j * phis), phis)
        assert eps.value == pytest.approx(oracle, abs=1e-9)

    def test_positivity_violation_propagates(self):
        with pytest.raises(ValueError, match="negative"):
            sew_epsilon_bridge(SewParams(0.1))

    def test_bridge_ties_into_the_full_channel(self):
        # the detector-overlap epsilon drives both decoherence routes identically
        for lt in (math.pi / 4, 1.0, math.pi / 2, 2.0):
            eps = sew_epsilon_bridge(SewParams(lt))
            psi = WaySuperposition(1.1, 0.3)
            via_kicks = dephased_density(psi, eps)
            model = canonical_two_level(eps.modulus, 0.0)
            via_env = reduced_system(entangle_joint(psi, model), 2)
            assert float(np.max(np.abs(via_kicks.matrix - via_env.matrix))) < 1e-9

    def test_agrees_with_weight_moment(self):
        for lt in (0.8, 1.2, math.pi / 2):
            assert abs(
                sew_epsilon_bridge(SewParams(lt)).value
                - epsilon_of_weight(sew_weight(lt)).value
            ) < 1e-10

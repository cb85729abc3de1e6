"""Truncated Fock-space numerics: coherent states, a weighted overcompleteness
relation, phase-integral identities and the two-cavity detector overlap.

The weighted resolution of identity checked here integrates weighted
coherent-state projectors over intensity and phase. On coherent-state
components the weight operator [(n_op)! I^(-n_op)]^(1/2) reduces to a pure
phase times e^(-I/2): sqrt(n!) I^(-n/2) * e^(-I/2) (sqrt(I) e^(i*phi))^n /
sqrt(n!) = e^(i*n*phi) e^(-I/2). The weighted components are evaluated in
that reduced form, which sidesteps the I^(-n) overflow at small intensity.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .dephase import sew_weight
from .qcore import TAU, Epsilon, wrap_phase_array


class FockVector:
    """State vector on the truncated number basis |0>..|n_max>."""

    def __init__(self, amplitudes):
        amp = np.array(amplitudes, dtype=complex)
        if amp.ndim != 1 or amp.size < 2:
            raise ValueError("need amplitudes for at least |0> and |1>")
        norm_sq = float(np.real(np.vdot(amp, amp)))
        if norm_sq > 1.0 + 1e-12:
            raise ValueError(f"squared norm {norm_sq} exceeds 1")
        amp.setflags(write=False)
        self._amp = amp

    @property
    def amplitudes(self) -> np.ndarray:
        return self._amp

    @property
    def n_max(self) -> int:
        return self._amp.size - 1

    def norm_sq(self) -> float:
        return float(np.real(np.vdot(self._amp, self._amp)))

    def truncation_deficit(self) -> float:
        """Probability mass lost to truncation, 1 - ||v||^2."""
        return max(1.0 - self.norm_sq(), 0.0)


@dataclass(frozen=True)
class SewParams:
    """Detector coupling phase; only the product lambda*t enters anywhere."""

    lambda_t: float


def basis_vector(n: int, n_max: int) -> FockVector:
    if not 0 <= n <= n_max:
        raise ValueError(f"occupation {n} outside 0..{n_max}")
    amp = np.zeros(n_max + 1, dtype=complex)
    amp[n] = 1.0
    return FockVector(amp)


def lowering_operator(n_max: int) -> np.ndarray:
    """Matrix of the lowering operator a on the truncated basis."""
    return np.diag(np.sqrt(np.arange(1, n_max + 1)), k=1).astype(complex)


def coherent_state(alpha: complex, n_max: int) -> FockVector:
    """Truncated coherent state with amplitude alpha.

    Component magnitudes are evaluated in log space, so large occupations
    and amplitudes stay finite.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    alpha = complex(alpha)
    n = np.arange(n_max + 1)
    if alpha == 0:
        return basis_vector(0, n_max)
    log_mag = -0.5 * abs(alpha) ** 2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    phases = n * cmath.phase(alpha)
    return FockVector(np.exp(log_mag) * np.exp(1j * phases))


def _phase_nodes(n_phi: int) -> np.ndarray:
    return -math.pi + TAU * np.arange(n_phi) / n_phi


def _intensity_rule(i_max: float, n_i: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(n_i)
    half = 0.5 * i_max
    return half * (nodes + 1.0), half * weights


def resolution_check(
    n_sub: int = 12,
    n_max: int = 32,
    i_max: float = 50.0,
    n_phi: int = 64,
    n_i: int = 200,
) -> float:
    """Worst deviation from identity of the weighted coherent-state resolution.

    Accumulates the matrix of weighted coherent projectors over a periodic
    trapezoid rule in phase and Gauss-Legendre in intensity, then compares
    the n_sub x n_sub block against the identity. The exact integrand for
    entry (m, n) is e^(i*(m-n)*phi) e^(-I), so the returned deviation is
    pure quadrature and intensity-cutoff error.
    """
    if n_sub > n_max // 2:
        raise ValueError(f"n_sub {n_sub} must be at most n_max/2 = {n_max // 2}")
    if n_phi < 8 or n_i < 8:
        raise ValueError("phase and intensity grids both need at least 8 points")
    phis = _phase_nodes(n_phi)
    intensities, gl_weights = _intensity_rule(i_max, n_i)
    n = np.arange(n_max + 1)
    # weighted components e^(i*n*phi) e^(-I/2), scaled by the quadrature weights
    phase_part = np.exp(1j * np.outer(n, phis))
    intensity_part = np.exp(-0.5 * intensities) * np.sqrt(gl_weights)
    components = np.einsum("np,g->npg", phase_part, intensity_part).reshape(n_max + 1, -1)
    components /= math.sqrt(n_phi)
    overlap = components @ components.conj().T
    block = overlap[: n_sub + 1, : n_sub + 1]
    return float(np.max(np.abs(block - np.eye(n_sub + 1))))


@dataclass(frozen=True)
class PhaseIntegralResult:
    """Value of the two-mode phase integral and the recovered relative-phase weight."""

    value: complex
    relative_phases: np.ndarray
    relative_phase_density: np.ndarray


def phase_integral_inner_product(
    n_max: int = 32,
    i_max: float = 50.0,
    n_phi: int = 64,
    n_i: int = 200,
) -> PhaseIntegralResult:
    """<1,0| 1 (x) 1 |0,1> via the doubled coherent-state resolution.

    Inserting the weighted resolution in each mode and integrating the
    intensities leaves a double phase integral whose integrand depends only
    on the relative phase; the integral of e^(i*phi)/(2*pi) vanishes. The
    recovered relative-phase weight is accumulated from the double grid and
    comes out uniform at 1/(2*pi) (times the squared intensity integral).
    """
    if n_phi < 8 or n_i < 8:
        raise ValueError("phase and intensity grids both need at least 8 points")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    intensities, gl_weights = _intensity_rule(i_max, n_i)
    intensity_integral = float(np.sum(gl_weights * np.exp(-intensities)))

    # mode 1 contributes e^(i*phi1), mode 2 e^(-i*phi2); accumulate over all
    # phase pairs, binned by relative phase
    step = TAU / n_phi
    indices = np.arange(n_phi)
    rel_index = (indices[:, None] - indices[None, :]) % n_phi
    pair_weight = intensity_integral**2 / n_phi**2
    value = complex(pair_weight * np.sum(np.exp(1j * step * rel_index)))
    pair_mass = np.bincount(rel_index.ravel(), minlength=n_phi) * pair_weight
    relative_phases = wrap_phase_array(step * indices)
    order = np.argsort(relative_phases)
    return PhaseIntegralResult(
        value=value,
        relative_phases=relative_phases[order],
        relative_phase_density=(pair_mass / step)[order],
    )


def two_mode_kron(a: FockVector, b: FockVector) -> np.ndarray:
    return np.kron(a.amplitudes, b.amplitudes)


def sew_overlap(p: SewParams) -> float:
    """Detector-state overlap cos^2(lambda_t), from explicit two-mode vectors.

    The branch states are cos(lambda_t)|0,0> + sin(lambda_t)|1,0> and
    cos(lambda_t)|0,0> + sin(lambda_t)|0,1>; their inner product is computed
    numerically so the orthogonality of the one-photon states is exercised
    rather than assumed.
    """
    c, s = math.cos(p.lambda_t), math.sin(p.lambda_t)
    vac = basis_vector(0, 1)
    one = basis_vector(1, 1)
    branch_1 = c * two_mode_kron(vac, vac) + s * two_mode_kron(one, vac)
    branch_2 = c * two_mode_kron(vac, vac) + s * two_mode_kron(vac, one)
    overlap = complex(np.vdot(branch_1, branch_2))
    if abs(overlap.imag) > 1e-14:
        raise ValueError(f"detector overlap has spurious imaginary part {overlap.imag:.3e}")
    return float(overlap.real)


def sew_epsilon_bridge(p: SewParams) -> Epsilon:
    """Attenuation factor cos^2(lambda_t) wired into the kick-weight machinery.

    Requires cos^2(lambda_t) <= 1/2 so the raised-cosine weight exists; the
    returned value is certified against that weight's first moment.
    """
    weight = sew_weight(p.lambda_t)
    eps = Epsilon(min(math.cos(p.lambda_t) ** 2, 1.0), 0.0)
    from .dephase import epsilon_of_weight

    moment = epsilon_of_weight(weight)
    if abs(moment.value - eps.value) > 1e-10:
        raise AssertionError(
            f"weight moment {moment.value} disagrees with cos^2(lambda_t) {eps.value}"
        )
    return eps

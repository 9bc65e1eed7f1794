"""Squeezed, coherent and intelligent states.

Intelligent states for an observable pair (A, H) are eigenstates of the
non-Hermitian operator L(λ) = λA + iH; |λ| > 1 squeezes A and antisqueezes H.
Also provides the analytic displaced-squeezed and su(2) coherent constructors
used as classical/squeezed probes by the scenarios.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
import scipy.sparse as sparse
from scipy.sparse.linalg import expm_multiply
from scipy.special import gammaln

from . import resources
from .errors import (DegenerateProbeError, DimensionError, HermiticityError,
                     NoEigenstateError, RegimeError, TruncationError)
from .hilbert import (HilbertSpec, MomentReport, Operator, StateVector,
                      TAIL_FRACTION, TRUSTED_TAIL_WEIGHT, _tail_weight,
                      build_spin_operator, moment_report, scaled, state_vector)

USABLE_SIGNAL_TOL = 1e-10
DEDUP_OVERLAP = 1.0 - 1e-8


@dataclass(frozen=True)
class SqueezingParameter:
    """Complex eigenproblem weight λ; Re(λ) > 0 is required for normalizable states."""

    value: complex

    def __post_init__(self):
        if np.real(self.value) <= 0:
            raise RegimeError(f"Re(lambda) must be positive, got {self.value}")

    @property
    def regime(self) -> str:
        mod = abs(self.value)
        if abs(mod - 1.0) <= 1e-12:
            return "coherent"
        return "squeezed_A" if mod > 1.0 else "squeezed_H"


@dataclass(frozen=True)
class BogoliubovPair:
    """Coefficients (μ, ν) of μa + νa† with μ² − ν² = 1."""

    mu: float
    nu: float


@dataclass(frozen=True)
class IntelligentState:
    """Accepted eigenpair of L(λ) with its diagnostics.

    trifonov_residuals are the deviations from the minimum-uncertainty
    identities ΔA² = |⟨C⟩|/2Reλ, ΔH² = |λ|²|⟨C⟩|/2Reλ,
    ΔAH = −|⟨C⟩| Imλ/2Reλ.  States with ⟨C⟩ ≈ 0 carry no phase signal and
    are tagged unusable rather than rejected.
    """

    lam: SqueezingParameter
    eigenvalue: complex
    state: StateVector
    residual: float
    trifonov_residuals: tuple[float, float, float]
    usable: bool
    moments: MomentReport


def bogoliubov_from_lambda(lam: float) -> BogoliubovPair:
    """μ = (λ+1)/√(4λ), ν = (λ−1)/√(4λ); λ = 1 gives the coherent pair (1, 0)."""
    if not np.isreal(lam) or lam <= 0:
        raise RegimeError(f"Bogoliubov pair requires real lambda > 0, got {lam}")
    lam = float(np.real(lam))
    root = np.sqrt(4.0 * lam)
    return BogoliubovPair((lam + 1.0) / root, (lam - 1.0) / root)


def _trifonov_residuals(rep: MomentReport, lam: complex) -> tuple[float, float, float]:
    re = np.real(lam)
    c = abs(rep.mean_C)
    r1 = rep.var_A - c / (2 * re)
    r2 = rep.var_H - abs(lam) ** 2 * c / (2 * re)
    r3 = rep.cov_AH + c * np.imag(lam) / (2 * re)
    return (float(abs(r1)), float(abs(r2)), float(abs(r3)))


def solve_intelligent_states(A: Operator, H: Operator, lam: complex,
                             accept_tol: float | None = None) -> list[IntelligentState]:
    """All trusted eigenpairs of L(λ) = λA + iH, sorted by eigenvalue.

    Eigenpairs must pass the residual gate ‖Lv − zv‖ ≤ accept_tol (default
    1e−8·max(1, ‖L‖₂)) and, on Fock spaces, the tail-weight gate.  Numerically
    coincident eigenvectors (e.g. the λ = 1 Jordan block of the truncated
    ladder) are deduplicated, keeping the smallest residual.
    """
    if not A.hermitian or not H.hermitian:
        raise HermiticityError("intelligent states need Hermitian A and H")
    if A.space != H.space:
        raise DimensionError(f"space mismatch: {A.space} vs {H.space}")
    param = SqueezingParameter(complex(lam))
    L = param.value * A.entries + 1j * H.entries
    if accept_tol is None:
        accept_tol = 1e-8 * max(1.0, float(np.linalg.norm(L, 2)))
    eigvals, eigvecs = la.eig(L)
    order = np.lexsort((eigvals.imag, eigvals.real))
    results: list[IntelligentState] = []
    for k in order:
        v = eigvecs[:, k]
        v = v / np.linalg.norm(v)
        residual = float(np.linalg.norm(L @ v - eigvals[k] * v))
        if residual > accept_tol:
            continue
        if _tail_weight(v, A.space) > TRUSTED_TAIL_WEIGHT:
            continue
        if any(abs(np.vdot(prev.state.amplitudes, v)) > DEDUP_OVERLAP for prev in results):
            continue
        state = state_vector(A.space, v)
        rep = moment_report(state, A, H)
        usable = abs(rep.mean_C) > USABLE_SIGNAL_TOL
        results.append(IntelligentState(param, complex(eigvals[k]), state, residual,
                                        _trifonov_residuals(rep, param.value), usable, rep))
    if not results:
        raise NoEigenstateError(
            f"no eigenpair of L({lam}) passed the residual/tail gates on {A.space}")
    return results


def _fock_generators(dim: int):
    a = sparse.diags(np.sqrt(np.arange(1, dim)), 1, format="csc", dtype=complex)
    return a, a.conj().T


def suggested_fock_dim(alpha: complex, xi: float) -> int:
    """Truncation that holds D(α)S(ξ)|0⟩ below the trusted tail weight.

    Based on the mean and spread of the number distribution, with generous
    slack for the skewed right tail of strongly displaced antisqueezed states.
    """
    n_mean = abs(alpha) ** 2 + np.sinh(xi) ** 2
    n_var = abs(alpha) ** 2 * np.exp(2 * abs(xi)) + np.sinh(2 * xi) ** 2 / 2
    need = (n_mean + 16.0 * np.sqrt(n_var) + 8.0) / (1.0 - TAIL_FRACTION)
    return int(np.ceil(need / 32.0) * 32)


def displaced_squeezed_state(alpha: complex, xi: float, dim: int) -> StateVector:
    """D(α)S(ξ)|0⟩ with S = exp(ξ(a†² − a²)/2), so ξ > 0 gives ΔP = e^{−ξ}/√2.

    Raises TruncationError (with a suggested dim) when the requested dimension
    cannot hold the state below the trusted tail weight.
    """
    if dim < 2:
        raise DimensionError(f"dim must be >= 2, got {dim}")
    xi = float(xi)
    a, ad = _fock_generators(dim)
    v = np.zeros(dim, dtype=complex)
    v[0] = 1.0
    if xi != 0.0:
        v = expm_multiply((xi / 2.0) * (ad @ ad - a @ a), v)
    if alpha != 0:
        v = expm_multiply(alpha * ad - np.conj(alpha) * a, v)
    v /= np.linalg.norm(v)
    space = HilbertSpec.fock(dim)
    tail = _tail_weight(v, space)
    if tail > TRUSTED_TAIL_WEIGHT:
        raise TruncationError(
            f"displaced squeezed state (alpha={alpha}, xi={xi}) has tail weight "
            f"{tail:.2e} at dim {dim}", suggested_dim=suggested_fock_dim(alpha, xi))
    return StateVector(space, v, tail)


def su2_coherent_state(two_j: int, theta: float, phi: float) -> StateVector:
    """Spin coherent state with ⟨Jy⟩ = −j sinθ sinφ, |⟨Jz⟩| = j|cosθ| and
    transverse variances ΔJx² = j(1 − sin²θcos²φ)/2, ΔJy² = j(1 − sin²θsin²φ)/2.

    θ = 0 returns the lowest-weight state |j;−j⟩ exactly.
    """
    if two_j < 1:
        raise DimensionError(f"two_j must be >= 1, got {two_j}")
    if not 0.0 <= theta <= np.pi:
        raise ValueError(f"theta must lie in [0, pi], got {theta}")
    k = np.arange(two_j + 1)
    half = theta / 2.0
    log_bin = 0.5 * (gammaln(two_j + 1) - gammaln(k + 1) - gammaln(two_j - k + 1))
    with np.errstate(divide="ignore"):
        log_sin = k * np.log(np.sin(half)) if np.sin(half) > 0 else np.where(k == 0, 0.0, -np.inf)
        log_cos = (two_j - k) * np.log(np.cos(half)) if np.cos(half) > 0 else np.where(
            k == two_j, 0.0, -np.inf)
    amps = np.exp(log_bin + log_sin + log_cos) * (-np.exp(-1j * phi)) ** k
    amps = amps / np.linalg.norm(amps)
    return state_vector(HilbertSpec.spin(two_j), amps)


def default_lambda_grid(two_j: int) -> list[float]:
    """√2-stepped grid 2^(1/2) .. 2^⌈log2(4j)⌉, spanning coherent to deep squeezing."""
    j = two_j / 2.0
    kmax = int(np.ceil(np.log2(4.0 * j)))
    return [2.0 ** (k / 2.0) for k in range(1, 2 * kmax + 1)]


def spin_squeezed_search(two_j: int, lambda_grid: list[float] | None = None,
                         constants: "resources.BoundConstants | None" = None) -> IntelligentState:
    """Best spin probe among eigenstates of L(λ) = λJx − iJy over a λ grid.

    Minimizes the predicted error ΔJx/|⟨Jz⟩| over usable states whose strategy
    classification is not TooLittleEnergy.
    """
    if two_j < 4:
        raise DimensionError(f"spin squeezing search needs two_j >= 4, got {two_j}")
    if lambda_grid is None:
        lambda_grid = default_lambda_grid(two_j)
    if len(lambda_grid) == 0:
        raise ValueError("empty lambda grid")
    bad = [g for g in lambda_grid if not (np.isreal(g) and np.real(g) > 1.0)]
    if bad:
        raise RegimeError(f"spin search requires real lambda > 1; offending values {bad}")
    jx = build_spin_operator("Jx", two_j)
    minus_jy = scaled(build_spin_operator("Jy", two_j), -1.0)
    best: IntelligentState | None = None
    best_dphi = np.inf
    for lam in lambda_grid:
        for cand in solve_intelligent_states(jx, minus_jy, float(lam)):
            if not cand.usable:
                continue
            try:
                profile = resources.classify_strategy(cand.state, minus_jy, constants)
            except DegenerateProbeError:
                continue
            if profile.classification == resources.TOO_LITTLE_ENERGY:
                continue
            dphi = np.sqrt(max(cand.moments.var_A, 0.0)) / abs(cand.moments.mean_C)
            if dphi < best_dphi:
                best, best_dphi = cand, dphi
    if best is None:
        raise NoEigenstateError(f"no usable spin squeezed state found over grid {lambda_grid}")
    return best

"""Simulated estimation protocol: evolve with U_φ = e^{iHφ}, measure A,
invert the response curve, and compare empirical rmse to error propagation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .errors import (DimensionError, EstimateRangeError, HermiticityError,
                     UnusableProbeError)
from .hilbert import Operator, StateVector, moment_report, state_vector

CURVE_POINTS = 2001
CURVE_HALF_WIDTH = np.pi / 2
PERIODICITY_LIMIT = 2 * np.pi / 20
BISECTION_TOL = 1e-12


@dataclass(frozen=True)
class ResponseCurve:
    """⟨A⟩ and its analytic derivative −i⟨[H,A]⟩ along a φ grid, with the
    largest strictly monotone window around the working point."""

    phi_grid: np.ndarray
    mean_A: np.ndarray
    derivative: np.ndarray
    monotone_window: tuple[float, float]


@dataclass(frozen=True)
class EstimationRun:
    phi_true: float
    shots: int
    seed: int
    estimates: np.ndarray
    empirical_rmse: float
    analytic_rmse: float

    def to_dict(self) -> dict:
        return {"phi_true": self.phi_true, "shots": self.shots, "seed": self.seed,
                "estimates": [float(e) for e in self.estimates],
                "empirical_rmse": self.empirical_rmse,
                "analytic_rmse": self.analytic_rmse}


def derive_seed(master: int, *indices: int) -> int:
    """Deterministic 63-bit child seed from (master, indices)."""
    ss = np.random.SeedSequence((int(master),) + tuple(int(i) for i in indices))
    return int(ss.generate_state(1, np.uint64)[0] >> 1)


def _spectral(H: Operator):
    if not H.hermitian:
        raise HermiticityError("evolution requires a Hermitian generator")
    return la.eigh(H.entries)


def evolve(state: StateVector, H: Operator, phi: float) -> StateVector:
    """Apply U_φ = e^{iHφ} through the spectral decomposition of H."""
    if state.space != H.space:
        raise DimensionError(f"space mismatch: {state.space} vs {H.space}")
    evals, vecs = _spectral(H)
    w = vecs.conj().T @ state.amplitudes
    out = vecs @ (np.exp(1j * evals * phi) * w)
    return state_vector(state.space, out)


def response_curve(probe: StateVector, A: Operator, H: Operator,
                   center: float = 0.0, half_width: float = CURVE_HALF_WIDTH,
                   points: int = CURVE_POINTS) -> ResponseCurve:
    """Sweep φ around the working point and record ⟨A⟩ and −i⟨[H,A]⟩."""
    if not A.hermitian:
        raise HermiticityError("response curve requires a Hermitian observable")
    evals, vecs = _spectral(H)
    phi_grid = np.linspace(center - half_width, center + half_width, points)
    w = vecs.conj().T @ probe.amplitudes
    psi = vecs @ (np.exp(1j * np.outer(evals, phi_grid)) * w[:, None])
    mean_a = np.einsum("ij,ij->j", psi.conj(), A.entries @ psi).real
    comm = H.entries @ A.entries - A.entries @ H.entries
    derivative = np.einsum("ij,ij->j", psi.conj(), comm @ psi).imag  # Re(−i<[H,A]>)
    lo, hi = _monotone_window(phi_grid, mean_a, points // 2)
    return ResponseCurve(phi_grid, mean_a, derivative, (lo, hi))


def _monotone_window(phi_grid: np.ndarray, mean_a: np.ndarray, center_idx: int) -> tuple[float, float]:
    d = np.diff(mean_a)
    sign = np.sign(d[center_idx - 1] + d[center_idx]) if 0 < center_idx < d.size else 0.0
    if sign == 0.0:
        return (float(phi_grid[center_idx]), float(phi_grid[center_idx]))
    ok = sign * d > 0
    lo = center_idx
    while lo - 1 >= 0 and ok[lo - 1]:
        lo -= 1
    hi = center_idx
    while hi < d.size and ok[hi]:
        hi += 1
    return (float(phi_grid[lo]), float(phi_grid[hi]))


def derivative_identity_check(state: StateVector, A: Operator, H: Operator,
                              phi: float, step: float) -> tuple[float, float]:
    """Analytic −i⟨[H,A]⟩ at φ versus the centered finite difference of ⟨A⟩."""
    if step <= 0:
        raise ValueError(f"step must be positive, got {step}")
    evals, vecs = _spectral(H)
    w = vecs.conj().T @ state.amplitudes

    def mean_at(p: float) -> float:
        psi = vecs @ (np.exp(1j * evals * p) * w)
        return float(np.vdot(psi, A.entries @ psi).real)

    psi_phi = vecs @ (np.exp(1j * evals * phi) * w)
    comm = H.entries @ A.entries - A.entries @ H.entries
    val = -1j * np.vdot(psi_phi, comm @ psi_phi)
    if abs(val.imag) > 1e-10 * max(1.0, abs(val)):
        raise HermiticityError("derivative expectation has a non-negligible imaginary part")
    numeric = (mean_at(phi + step) - mean_at(phi - step)) / (2 * step)
    return float(val.real), numeric


def analytic_delta_phi(state: StateVector, A: Operator, H: Operator) -> float:
    """Error propagation Δφ = ΔA/|⟨[A,H]⟩| on the given state."""
    rep = moment_report(state, A, H)
    signal = abs(rep.mean_C)
    if signal <= 1e-10:
        raise UnusableProbeError("zero signal: |<[A,H]>| <= 1e-10")
    return float(np.sqrt(max(rep.var_A, 0.0)) / signal)


def sample_outcomes(state: StateVector, A: Operator, shots: int, seed: int) -> np.ndarray:
    """Born-rule i.i.d. draws of eigenvalues of A; deterministic for fixed seed."""
    if not A.hermitian:
        raise HermiticityError("projective sampling requires a Hermitian observable")
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    if state.space != A.space:
        raise DimensionError(f"space mismatch: {state.space} vs {A.space}")
    evals, vecs = la.eigh(A.entries)
    probs = np.abs(vecs.conj().T @ state.amplitudes) ** 2
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum()
    rng = np.random.default_rng(seed)
    return rng.choice(evals, size=shots, p=probs)


def estimate_phi(outcomes: np.ndarray, curve: ResponseCurve) -> float:
    """Method-of-moments inversion of ⟨A⟩(φ) by bisection inside the monotone window."""
    outcomes = np.asarray(outcomes, dtype=float)
    if outcomes.size == 0:
        raise EstimateRangeError("cannot estimate from an empty outcome vector")
    target = float(outcomes.mean())
    lo, hi = curve.monotone_window
    if lo >= hi:
        raise EstimateRangeError("response curve has no monotone window at the working point")
    f_lo = float(np.interp(lo, curve.phi_grid, curve.mean_A))
    f_hi = float(np.interp(hi, curve.phi_grid, curve.mean_A))
    increasing = f_hi > f_lo
    low, high = (f_lo, f_hi) if increasing else (f_hi, f_lo)
    if not low <= target <= high:
        raise EstimateRangeError(
            f"sample mean {target:.6g} outside the invertible range [{low:.6g}, {high:.6g}]")
    while hi - lo > BISECTION_TOL:
        mid = 0.5 * (lo + hi)
        val = float(np.interp(mid, curve.phi_grid, curve.mean_A))
        if (val < target) == increasing:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def run_estimation(probe: StateVector, A: Operator, H: Operator, phi_true: float,
                   shots: int, trials: int, seed: int,
                   half_width: float = CURVE_HALF_WIDTH,
                   points: int = CURVE_POINTS) -> EstimationRun:
    """Full pipeline: evolve to φ_true, sample A per trial, invert, measure rmse.

    The run is rejected when the predicted rmse Δφ/√shots is not small
    compared to 2π, where phase periodicity makes the rmse meaningless.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    evolved = evolve(probe, H, phi_true)
    dphi = analytic_delta_phi(evolved, A, H)
    analytic_rmse = dphi / np.sqrt(shots)
    if analytic_rmse >= PERIODICITY_LIMIT:
        raise EstimateRangeError(
            f"predicted rmse {analytic_rmse:.3g} is not small against 2*pi; run rejected")
    curve = response_curve(probe, A, H, center=phi_true, half_width=half_width, points=points)
    evals, vecs = la.eigh(A.entries)
    probs = np.clip(np.abs(vecs.conj().T @ evolved.amplitudes) ** 2, 0.0, None)
    probs /= probs.sum()
    estimates = np.empty(trials)
    for t in range(trials):
        rng = np.random.default_rng(derive_seed(seed, t))
        outcomes = rng.choice(evals, size=shots, p=probs)
        estimates[t] = estimate_phi(outcomes, curve)
    empirical = float(np.sqrt(np.mean((estimates - phi_true) ** 2)))
    return EstimationRun(float(phi_true), int(shots), int(seed), estimates,
                         empirical, float(analytic_rmse))

"""Energy accounting and squeezed-vs-classical comparison theory.

A strategy is classified by comparing its energy above ground to ζ·ΔH
(ζ = κ/γ): within a band it is a "good" strategy, above it wastes energy,
below it cannot reach the error-propagation limit.  The probe count N is
the number of classical coherent probes preparable with the squeezed probe's
energy, and the headline prediction is the quadratic gain Δφ_sq/Δφ_cl ≈ 1/N.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .errors import DegenerateProbeError, HermiticityError, UnusableProbeError
from .hilbert import Operator, StateVector, moment_report

GOOD = "good"
TOO_MUCH_ENERGY = "too_much_energy"
TOO_LITTLE_ENERGY = "too_little_energy"

ENERGY_RATIO = "energy_ratio"
ENERGY_OVER_CLASSICAL_SD = "energy_over_classical_sd"


@dataclass(frozen=True)
class BoundConstants:
    """Order-one constants of the measurement bound and the good-strategy band."""

    kappa: float = 1.0
    gamma: float = 1.0
    band: float = 3.0

    def __post_init__(self):
        if self.kappa <= 0 or self.gamma <= 0:
            raise ValueError("kappa and gamma must be positive")
        if self.band <= 1:
            raise ValueError("band must exceed 1")

    @property
    def zeta(self) -> float:
        return self.kappa / self.gamma


@dataclass(frozen=True)
class StrategyProfile:
    mean_energy: float
    ground_energy: float
    energy_above_ground: float
    sd_energy: float
    classification: str


@dataclass(frozen=True)
class GainReport:
    """Squeezed-vs-classical comparison: probe count, errors, measured ratio and prediction."""

    n_probes: float
    delta_phi_sq: float
    delta_phi_cl: float
    ratio: float
    predicted: float
    probe_count_rule: str


def ground_energy(H: Operator, convention_zero: bool = False) -> float:
    """Minimum eigenvalue of H; convention_zero=True forces the cutoff-Hamiltonian value 0."""
    if not H.hermitian:
        raise HermiticityError("ground energy requires a Hermitian Hamiltonian")
    if convention_zero:
        return 0.0
    return float(la.eigvalsh(H.entries)[0])


def classification_for(energy_above_ground: float, sd_energy: float,
                       constants: BoundConstants) -> str:
    """Band rule: good iff (⟨H⟩−E₀)/(ζΔH) lies within [1/band, band]."""
    quotient = energy_above_ground / (constants.zeta * sd_energy)
    if quotient > constants.band:
        return TOO_MUCH_ENERGY
    if quotient < 1.0 / constants.band:
        return TOO_LITTLE_ENERGY
    return GOOD


def classify_strategy(state: StateVector, H: Operator,
                      constants: BoundConstants | None = None,
                      ground_energy_override: float | None = None) -> StrategyProfile:
    """Energy bookkeeping and the good/too-much/too-little classification."""
    constants = constants or BoundConstants()
    rep = moment_report(state, H, H)
    sd = float(np.sqrt(max(rep.var_A, 0.0)))
    if sd <= 1e-12:
        raise DegenerateProbeError("probe has vanishing energy spread")
    e0 = ground_energy(H) if ground_energy_override is None else float(ground_energy_override)
    above = rep.mean_A - e0
    return StrategyProfile(rep.mean_A, e0, above, sd,
                           classification_for(above, sd, constants))


def heisenberg_lower_bound(profile: StrategyProfile, nu: int = 1,
                           constants: BoundConstants | None = None) -> float:
    """max[κ/(ν(⟨H⟩−E₀)), γ/(√ν ΔH)] — the quantum measurement bound on Δφ."""
    constants = constants or BoundConstants()
    if nu < 1:
        raise ValueError(f"nu must be >= 1, got {nu}")
    if profile.energy_above_ground <= 0 or profile.sd_energy <= 0:
        raise ValueError("bound needs positive energy above ground and energy spread")
    return max(constants.kappa / (nu * profile.energy_above_ground),
               constants.gamma / (np.sqrt(nu) * profile.sd_energy))


def probe_count(sq_profile: StrategyProfile, cl_profile: StrategyProfile) -> tuple[float, str]:
    """Classical probes preparable with the squeezed probe's energy.

    Good classical strategies compare energy to energy; otherwise only the
    classical energy spread is actually employed for estimation, so the
    variant rule divides by ΔH_cl instead.
    """
    if cl_profile.classification == GOOD:
        denom = cl_profile.energy_above_ground
        rule = ENERGY_RATIO
    else:
        denom = cl_profile.sd_energy
        rule = ENERGY_OVER_CLASSICAL_SD
    if abs(denom) <= 1e-12:
        raise DegenerateProbeError("probe count denominator vanishes")
    return float(sq_profile.energy_above_ground / denom), rule


def _error_propagation(state: StateVector, A: Operator, H: Operator) -> float:
    rep = moment_report(state, A, H)
    signal = abs(rep.mean_C)
    if signal <= 1e-10:
        raise UnusableProbeError("probe carries no signal: |<[A,H]>| ~ 0")
    return float(np.sqrt(max(rep.var_A, 0.0)) / signal)


def gain_report(sq: tuple[StateVector, Operator, Operator],
                cl: tuple[StateVector, Operator, Operator],
                constants: BoundConstants | None = None,
                ground_energy_override: float | None = None) -> GainReport:
    """Compare a squeezed probe against a classical one at matched energy.

    The prediction follows the branch selected by the classical profile:
    1/N for good and too-much-energy classical strategies, and 1/(2κN) for
    too-little-energy ones, whose error model is Δφ_cl = κ/(⟨H⟩_cl − E₀).
    """
    constants = constants or BoundConstants()
    sq_state, sq_A, sq_H = sq
    cl_state, cl_A, cl_H = cl
    sq_profile = classify_strategy(sq_state, sq_H, constants, ground_energy_override)
    cl_profile = classify_strategy(cl_state, cl_H, constants, ground_energy_override)
    n, rule = probe_count(sq_profile, cl_profile)
    dphi_sq = _error_propagation(sq_state, sq_A, sq_H)
    if cl_profile.classification == TOO_LITTLE_ENERGY:
        dphi_cl = constants.kappa / cl_profile.energy_above_ground
        predicted = 1.0 / (2.0 * constants.kappa * n)
    else:
        dphi_cl = _error_propagation(cl_state, cl_A, cl_H)
        predicted = 1.0 / n
    return GainReport(n, dphi_sq, dphi_cl, dphi_sq / dphi_cl, predicted, rule)

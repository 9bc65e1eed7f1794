"""Dense operator/state algebra on truncated Fock and spin-j spaces.

Conventions: hbar = m = omega = 1, X = (a + a†)/√2, P = i(a† − a)/√2,
spin matrices in the Jz eigenbasis ordered m = −j..+j.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, HermiticityError, TruncationError

DEFAULT_FOCK_DIM = 256
HERMITIAN_TOL = 1e-12
NORM_TOL = 1e-10
TAIL_FRACTION = 0.1
TRUSTED_TAIL_WEIGHT = 1e-8

FOCK_KINDS = ("annihilation", "creation", "number", "X", "P",
              "E_plus", "E_minus", "cosine", "sine")
SPIN_KINDS = ("Jx", "Jy", "Jz", "J_plus", "J_minus")


@dataclass(frozen=True)
class HilbertSpec:
    """Ambient space: truncated Fock ladder ("fock", size=dim) or spin-j ("spin", size=two_j)."""

    kind: str
    size: int

    @classmethod
    def fock(cls, dim: int) -> "HilbertSpec":
        if dim < 1:
            raise DimensionError(f"Fock dimension must be >= 1, got {dim}")
        return cls("fock", int(dim))

    @classmethod
    def spin(cls, two_j: int) -> "HilbertSpec":
        if two_j < 0:
            raise DimensionError(f"two_j must be >= 0, got {two_j}")
        return cls("spin", int(two_j))

    @property
    def dimension(self) -> int:
        return self.size if self.kind == "fock" else self.size + 1

    @property
    def two_j(self) -> int:
        if self.kind != "spin":
            raise DimensionError("two_j only defined for spin spaces")
        return self.size


@dataclass(frozen=True)
class Operator:
    """Dense complex matrix on a declared space, with a Hermiticity flag."""

    space: HilbertSpec
    entries: np.ndarray
    hermitian: bool

    def expectation(self, state: "StateVector") -> complex:
        _require_same_space(self.space, state.space)
        v = state.amplitudes
        return complex(np.vdot(v, self.entries @ v))


@dataclass(frozen=True)
class StateVector:
    """Normalized amplitude vector; tail_weight tracks mass near the Fock truncation edge."""

    space: HilbertSpec
    amplitudes: np.ndarray
    tail_weight: float

    @property
    def trusted(self) -> bool:
        return self.space.kind != "fock" or self.tail_weight <= TRUSTED_TAIL_WEIGHT


@dataclass(frozen=True)
class MomentReport:
    """First and second moments of a (state, A, H) triple.

    schrodinger_slack = ΔA²ΔH² − |⟨C⟩/2|² − ΔAH² with C = [A, H]; it is
    non-negative for any pure state up to roundoff.
    """

    mean_A: float
    mean_H: float
    var_A: float
    var_H: float
    cov_AH: float
    mean_C: complex
    schrodinger_slack: float


def _require_same_space(a: HilbertSpec, b: HilbertSpec) -> None:
    if a != b:
        raise DimensionError(f"space mismatch: {a} vs {b}")


def _tail_weight(amplitudes: np.ndarray, space: HilbertSpec) -> float:
    if space.kind != "fock":
        return 0.0
    k = max(1, int(np.ceil(TAIL_FRACTION * amplitudes.size)))
    return float(np.sum(np.abs(amplitudes[-k:]) ** 2))


def make_operator(space: HilbertSpec, entries: np.ndarray, hermitian: bool | None = None) -> Operator:
    """Wrap a matrix as an Operator, autodetecting Hermiticity when not given."""
    entries = np.asarray(entries, dtype=complex)
    d = space.dimension
    if entries.shape != (d, d):
        raise DimensionError(f"entries shape {entries.shape} does not match space dimension {d}")
    if hermitian is None:
        hermitian = bool(np.max(np.abs(entries - entries.conj().T)) <= HERMITIAN_TOL)
    elif hermitian and np.max(np.abs(entries - entries.conj().T)) > HERMITIAN_TOL:
        raise HermiticityError("matrix flagged hermitian deviates from its adjoint")
    return Operator(space, entries, hermitian)


def state_vector(space: HilbertSpec, amplitudes: np.ndarray) -> StateVector:
    """Build a StateVector; amplitudes must already be normalized to 1e-10."""
    amplitudes = np.asarray(amplitudes, dtype=complex)
    if amplitudes.shape != (space.dimension,):
        raise DimensionError(
            f"amplitude vector of length {amplitudes.size} does not match dimension {space.dimension}")
    norm = np.linalg.norm(amplitudes)
    if abs(norm - 1.0) > NORM_TOL:
        raise ValueError(f"state norm {norm} deviates from 1 beyond {NORM_TOL}")
    amplitudes = amplitudes / norm
    return StateVector(space, amplitudes, _tail_weight(amplitudes, space))


def basis_state(space: HilbertSpec, index: int) -> StateVector:
    amps = np.zeros(space.dimension, dtype=complex)
    amps[index] = 1.0
    return StateVector(space, amps, _tail_weight(amps, space))


def vacuum_state(dim: int) -> StateVector:
    return basis_state(HilbertSpec.fock(dim), 0)


def _ladder(dim: int) -> np.ndarray:
    a = np.zeros((dim, dim), dtype=complex)
    a[np.arange(dim - 1), np.arange(1, dim)] = np.sqrt(np.arange(1, dim))
    return a


def _one_sided_shift(dim: int) -> np.ndarray:
    # E+ = sum_n |n><n-1| restricted to the kept basis
    e = np.zeros((dim, dim), dtype=complex)
    e[np.arange(1, dim), np.arange(dim - 1)] = 1.0
    return e


def build_fock_operator(kind: str, dim: int) -> Operator:
    """Standard Fock-basis operators: ladder, number, quadratures X/P, shifts E±, cosine/sine."""
    if dim < 2:
        raise DimensionError(f"Fock operators need dim >= 2, got {dim}")
    if kind not in FOCK_KINDS:
        raise ValueError(f"unknown Fock operator kind {kind!r}")
    space = HilbertSpec.fock(dim)
    a = _ladder(dim)
    if kind == "annihilation":
        return Operator(space, a, False)
    if kind == "creation":
        return Operator(space, a.conj().T, False)
    if kind == "number":
        return Operator(space, np.diag(np.arange(dim, dtype=float)).astype(complex), True)
    if kind == "X":
        return Operator(space, (a + a.conj().T) / np.sqrt(2), True)
    if kind == "P":
        return Operator(space, 1j * (a.conj().T - a) / np.sqrt(2), True)
    ep = _one_sided_shift(dim)
    if kind == "E_plus":
        return Operator(space, ep, False)
    if kind == "E_minus":
        return Operator(space, ep.conj().T, False)
    if kind == "cosine":
        return Operator(space, (ep + ep.conj().T) / 2, True)
    return Operator(space, 1j * (ep - ep.conj().T) / 2, True)  # sine


def build_spin_operator(kind: str, two_j: int) -> Operator:
    """Spin-j matrices in the Jz eigenbasis; J± elements √(j(j+1) − m(m±1))."""
    if two_j < 1:
        raise DimensionError(f"spin operators need two_j >= 1, got {two_j}")
    if kind not in SPIN_KINDS:
        raise ValueError(f"unknown spin operator kind {kind!r}")
    space = HilbertSpec.spin(two_j)
    j = two_j / 2.0
    m = np.arange(-j, j + 1)
    d = two_j + 1
    jp = np.zeros((d, d), dtype=complex)
    jp[np.arange(1, d), np.arange(d - 1)] = np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1))
    if kind == "J_plus":
        return Operator(space, jp, False)
    if kind == "J_minus":
        return Operator(space, jp.conj().T, False)
    if kind == "Jx":
        return Operator(space, (jp + jp.conj().T) / 2, True)
    if kind == "Jy":
        return Operator(space, (jp - jp.conj().T) / (2 * 1j), True)
    return Operator(space, np.diag(m).astype(complex), True)  # Jz


def scaled(op: Operator, factor: complex) -> Operator:
    """factor * op, keeping the hermitian flag only for real factors."""
    herm = op.hermitian and abs(np.imag(factor)) == 0.0
    return Operator(op.space, factor * op.entries, herm)


def commutator(A: Operator, B: Operator) -> Operator:
    """[A, B] = AB − BA; for Hermitian inputs the result is anti-Hermitian."""
    _require_same_space(A.space, B.space)
    m = A.entries @ B.entries - B.entries @ A.entries
    return Operator(A.space, m, False)


def anticommutator(A: Operator, B: Operator) -> Operator:
    """{A, B} = AB + BA; Hermitian whenever both inputs are."""
    _require_same_space(A.space, B.space)
    m = A.entries @ B.entries + B.entries @ A.entries
    return Operator(A.space, m, A.hermitian and B.hermitian)


def moment_report(state: StateVector, A: Operator, H: Operator) -> MomentReport:
    """Means, variances, symmetrized covariance, ⟨[A,H]⟩ and the uncertainty slack."""
    if not A.hermitian or not H.hermitian:
        raise HermiticityError("moment_report requires Hermitian A and H")
    _require_same_space(state.space, A.space)
    _require_same_space(state.space, H.space)
    v = state.amplitudes
    av = A.entries @ v
    hv = H.entries @ v
    mean_a = float(np.vdot(v, av).real)
    mean_h = float(np.vdot(v, hv).real)
    var_a = float(np.vdot(av, av).real - mean_a ** 2)
    var_h = float(np.vdot(hv, hv).real - mean_h ** 2)
    ah = np.vdot(av, hv)  # <psi|AH|psi> for Hermitian A
    cov = float(ah.real - mean_a * mean_h)
    mean_c = complex(2j * ah.imag)
    slack = var_a * var_h - abs(mean_c / 2) ** 2 - cov ** 2
    return MomentReport(mean_a, mean_h, var_a, var_h, cov, mean_c, float(slack))


def check_sgur(state: StateVector, tail_threshold: float = TRUSTED_TAIL_WEIGHT) -> tuple[float, float]:
    """Susskind-Glogower uncertainty slacks (ΔN̂ΔĈ − ½|⟨Ŝ⟩|, ΔN̂ΔŜ − ½|⟨Ĉ⟩|) for a Fock state."""
    if state.space.kind != "fock":
        raise DimensionError("SG uncertainty relations are defined on Fock spaces")
    if state.tail_weight > tail_threshold:
        raise TruncationError(
            f"tail weight {state.tail_weight:.3e} exceeds {tail_threshold:.1e}; "
            "SG moments would be truncation-dominated")
    dim = state.space.dimension
    number = build_fock_operator("number", dim)
    cos_op = build_fock_operator("cosine", dim)
    sin_op = build_fock_operator("sine", dim)
    rn = moment_report(state, number, number)
    rc = moment_report(state, cos_op, cos_op)
    rs = moment_report(state, sin_op, sin_op)
    dn = np.sqrt(max(rn.var_A, 0.0))
    slack_c = dn * np.sqrt(max(rc.var_A, 0.0)) - 0.5 * abs(rs.mean_A)
    slack_s = dn * np.sqrt(max(rs.var_A, 0.0)) - 0.5 * abs(rc.mean_A)
    return float(slack_c), float(slack_s)


def random_state(space: HilbertSpec, rng: np.random.Generator) -> StateVector:
    """Haar-ish random pure state (normalized complex Gaussian amplitudes)."""
    d = space.dimension
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    v /= np.linalg.norm(v)
    return StateVector(space, v, _tail_weight(v, space))


def random_hermitian(space: HilbertSpec, rng: np.random.Generator) -> Operator:
    """Random Hermitian operator normalized to unit spectral norm."""
    d = space.dimension
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    h = (g + g.conj().T) / 2
    h /= np.linalg.norm(h, 2)
    return Operator(space, h, True)


# ---------------------------------------------------------------------------
# JSON exchange format (operators/states as {space, entries|amplitudes})
# ---------------------------------------------------------------------------

def _complex_to_pair(z: complex) -> list[float]:
    return [float(np.real(z)), float(np.imag(z))]


def space_to_dict(space: HilbertSpec) -> dict:
    if space.kind == "fock":
        return {"kind": "fock", "dim": space.size}
    return {"kind": "spin", "two_j": space.size}


def space_from_dict(d: dict) -> HilbertSpec:
    if d["kind"] == "fock":
        return HilbertSpec.fock(int(d["dim"]))
    if d["kind"] == "spin":
        return HilbertSpec.spin(int(d["two_j"]))
    raise ValueError(f"unknown space kind {d.get('kind')!r}")


def operator_to_dict(op: Operator) -> dict:
    flat = op.entries.reshape(-1)
    return {"space": space_to_dict(op.space),
            "entries": [_complex_to_pair(z) for z in flat]}


def operator_from_dict(d: dict) -> Operator:
    """Load an operator; near-Hermitian matrices are symmetrized with a warning."""
    space = space_from_dict(d["space"])
    n = space.dimension
    pairs = np.asarray(d["entries"], dtype=float)
    if pairs.shape != (n * n, 2):
        raise DimensionError(f"expected {n * n} [re, im] entries, got shape {pairs.shape}")
    m = (pairs[:, 0] + 1j * pairs[:, 1]).reshape(n, n)
    dev = float(np.max(np.abs(m - m.conj().T)))
    if HERMITIAN_TOL < dev <= 1e-8:
        warnings.warn(f"symmetrizing near-Hermitian matrix on load (deviation {dev:.2e})")
        m = (m + m.conj().T) / 2
        dev = 0.0
    return Operator(space, m, dev <= HERMITIAN_TOL)


def state_to_dict(state: StateVector) -> dict:
    return {"space": space_to_dict(state.space),
            "amplitudes": [_complex_to_pair(z) for z in state.amplitudes]}


def state_from_dict(d: dict) -> StateVector:
    space = space_from_dict(d["space"])
    pairs = np.asarray(d["amplitudes"], dtype=float)
    if pairs.shape != (space.dimension, 2):
        raise DimensionError(f"expected {space.dimension} [re, im] amplitudes, got shape {pairs.shape}")
    v = pairs[:, 0] + 1j * pairs[:, 1]
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > 1e-6:
        raise ValueError(f"loaded state norm {norm} too far from 1")
    v /= norm
    return StateVector(space, v, _tail_weight(v, space))

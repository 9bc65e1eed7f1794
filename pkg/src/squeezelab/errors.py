"""Exception hierarchy shared by all squeezelab modules."""


class SqueezelabError(Exception):
    """Base class for all squeezelab errors."""


class DimensionError(SqueezelabError):
    """Invalid or mismatched Hilbert-space dimensions."""


class HermiticityError(SqueezelabError):
    """An operator required to be Hermitian is not flagged/valid as such."""


class TruncationError(SqueezelabError):
    """A Fock-space state carries too much weight near the truncation edge."""

    def __init__(self, message, suggested_dim=None):
        super().__init__(message)
        self.suggested_dim = suggested_dim


class RegimeError(SqueezelabError):
    """Squeezing parameter outside the admissible regime."""


class NoEigenstateError(SqueezelabError):
    """No eigenpair survived the residual/tail acceptance gates."""


class UnusableProbeError(SqueezelabError):
    """Probe state with (near-)vanishing signal |<[A,H]>|."""


class DegenerateProbeError(SqueezelabError):
    """Probe with vanishing energy spread; no meaningful strategy profile."""


class EstimateRangeError(SqueezelabError):
    """Estimator input outside the invertible response-curve window."""


class InfeasibleError(SqueezelabError):
    """Protocol design found no admissible probe for the given budget."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report or {}

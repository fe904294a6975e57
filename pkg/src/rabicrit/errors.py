"""Exception taxonomy shared across the package."""


class RabicritError(Exception):
    """Base class for all package errors."""


class InvalidDimensionError(RabicritError):
    """Matrix or cutoff dimension is unusable for the requested operation."""


class TruncationRiskError(RabicritError):
    """Requested squeeze/displacement would corrupt the retained Fock block."""


class SymmetryError(RabicritError):
    """Input matrix violates a required symmetry (e.g. Hermiticity)."""


class WrongPhaseError(RabicritError):
    """Operation requested in the wrong phase (normal vs superradiant)."""


class CriticalSingularityError(RabicritError):
    """Closed forms diverge exactly at the critical coupling."""


class LabelingError(RabicritError):
    """Eigenstate labeling by ansatz overlap is ambiguous."""


class BinningError(RabicritError):
    """Transition-frequency bins overlap ambiguously."""


class CompositionError(RabicritError):
    """Generators or jump operators built on incompatible bases."""


class DomainError(RabicritError):
    """Scalar argument outside the operation's domain."""


class IntegrationFailureError(RabicritError):
    """Trajectory integration violated a conservation guarantee."""


class StiffnessError(RabicritError):
    """Adaptive integrator step size underflowed."""


class FitError(RabicritError):
    """Decay-rate fit rejected the input series."""


class SearchError(RabicritError):
    """Scalar minimization could not bracket a minimum."""


class ConfigError(RabicritError):
    """Configuration document failed validation.

    Carries the full list of collected problems, not just the first.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))

"""Exception types shared across the package.

Hypothesis failures during tube construction are usually *recorded* in the
tube's hypothesis log rather than raised; the exception classes below are
raised only where a caller asked for something unsatisfiable (bad domain,
unreachable tolerance, precondition violated before any tube exists).
"""


class RiccatubeError(Exception):
    """Base class for all package errors."""


class DomainError(RiccatubeError):
    """Evaluation point outside a model's domain (or on a branch cut)."""


class QuadratureFailure(RiccatubeError):
    """Adaptive quadrature could not reach the requested tolerance."""


class StepFailure(RiccatubeError):
    """The reference integrator failed to complete a trajectory."""


class HypothesisViolation(RiccatubeError):
    """A theorem hypothesis failed at a specific point.

    Attributes mirror the hypothesis log: ``u`` (location), ``name`` and
    ``margin`` (signed; negative means violated).
    """

    def __init__(self, u, name, margin, note=""):
        self.u = u
        self.name = name
        self.margin = margin
        self.note = note
        msg = f"hypothesis '{name}' violated at u={u!r} (margin={margin:.3e})"
        if note:
            msg += f": {note}"
        super().__init__(msg)


class GConditionViolation(HypothesisViolation):
    """The a-posteriori slack condition on the correction function g failed."""

    def __init__(self, u, margin, note=""):
        super().__init__(u, "g_condition", margin, note)


class MonotonicityViolation(RiccatubeError):
    """A function required to be non-decreasing decreases on the grid."""


class DegenerateDenominator(RiccatubeError):
    """A denominator fell below the safe-evaluation threshold."""


class BranchAmbiguity(RiccatubeError):
    """Square-root branch tracking hit a near-zero of the potential."""


class RootNotFound(RiccatubeError):
    """A region marker's defining equation has no root in the scan range.

    Carries the sign-scan table for diagnosis.
    """

    def __init__(self, name, scan_table=None):
        self.name = name
        self.scan_table = scan_table
        super().__init__(f"no root found for marker '{name}'")


class EvaluationFailure(RiccatubeError):
    """A special-function evaluation missed its error target."""

    def __init__(self, msg, achieved=None):
        self.achieved = achieved
        super().__init__(msg)


class ZetaSelectionFailure(RiccatubeError):
    """Neither constant-selection case produced an admissible shift parameter."""


class GlueFailure(RiccatubeError):
    """An exit disk is not contained in the successor tube's entry region."""

    def __init__(self, u, margin, note=""):
        self.u = u
        self.margin = margin
        msg = f"glue failed at u={u!r} (containment margin={margin:.3e})"
        if note:
            msg += f": {note}"
        super().__init__(msg)

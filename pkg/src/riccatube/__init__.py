"""riccatube: certified invariant-region enclosures for complex Riccati flows.

The package builds approximate solutions of Sturm-Liouville / Riccati
equations with complex potentials (WKB, parabolic-cylinder and Bessel
approximants) and rigorous tubes (center + radius along an interval) that
provably contain the true Riccati solution; an independent high-accuracy
ODE oracle audits every tube.  The end-to-end pipeline certifies solutions
of the angular Teukolsky equation.
"""

__version__ = "0.1.0"

from .errors import (BranchAmbiguity, DegenerateDenominator, DomainError,
                     EvaluationFailure, GConditionViolation, GlueFailure,
                     HypothesisViolation, MonotonicityViolation,
                     QuadratureFailure, RootNotFound, StepFailure,
                     ZetaSelectionFailure)
from .potential import (CustomModel, PoleExpansion, QuadraticModel,
                        SingularModel, TeukolskyModel, eval_model,
                        eval_teukolsky, model_from_dict, model_from_json,
                        model_to_dict, model_to_json, pole_expansion)
from .riccati_core import (Approximant, CustomCenter, Disk, EnclosureTube,
                           ExactApproximant, FlowFrame, HypothesisRecord,
                           compute_U, compute_U_from_approximant,
                           determinator, determinator_approx,
                           determinator_kappa, gronwall_lower_bound,
                           im_y_lower_bounds, invariant_disk_tube,
                           sigma_integral, wronskian)
from .oracle import (AuditReport, OracleTrajectory, containment_audit,
                     frobenius_start, frobenius_start_model, integrate_riccati,
                     integrate_sl)

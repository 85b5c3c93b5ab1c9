"""High-precision construction and classification of solutions of
indeterminate moment problems: orthonormal polynomials, Nevanlinna functions,
N-extremal measures, Friedrichs/Krein solutions, and the explicit quartic,
Al-Salam--Carlitz, and Stieltjes--Wigert families.
"""

from .numerics import (DEFAULT_CTX, Inconclusive, PrecisionContext,
                       SummationResult, bracketed_root, gamma, quadrature,
                       sum_series)
from .qcalc import (PhiZeroTable, QParameter, gauss_binomial, phi_zeros,
                    qpochhammer, ramanujan_phi)
from .moments import (MomentSequence, PolynomialPair, RecurrenceCoefficients,
                      eval_pq, hankel_positive_definite, jacobi_apply,
                      moments_from_json, moments_to_json, normalize,
                      reconstructed_moments, recurrence_from_moments)
from .nevanlinna import (DeterminacyVerdict, NevanlinnaQuadruple,
                         StieltjesClassification, classify,
                         friedrichs_parameter, mass_at, nevanlinna_eval,
                         nextremal_support, parameter_of_point,
                         stieltjes_transform_check)
from .measures import (DensityIndexResult, DensitySpec, DiscreteMeasure,
                       IndexBracket, apply_density, density_index,
                       estimate_a_bracket, krein_completion, moment,
                       moment_sequence, shifted_moment_sequence,
                       tilde_moment_sequence, translate, xi)
from .families import (FamilyHandle, QuarticConstants, asc_F, asc_friedrichs,
                       asc_krein, quartic_friedrichs, quartic_krein,
                       quartic_mu_c, sw_density, sw_moment,
                       sw_moment_sequence, sw_nextremal, sw_p, sw_phi_table,
                       sw_recurrence)
from .harness import THEOREM_IDS, VerificationReport, verify

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_CTX", "DensityIndexResult", "DensitySpec", "DeterminacyVerdict",
    "DiscreteMeasure", "FamilyHandle", "Inconclusive", "IndexBracket",
    "MomentSequence", "NevanlinnaQuadruple", "PhiZeroTable",
    "PolynomialPair", "PrecisionContext", "QParameter", "QuarticConstants",
    "RecurrenceCoefficients", "StieltjesClassification", "SummationResult",
    "THEOREM_IDS", "VerificationReport",
    "apply_density", "asc_F", "asc_friedrichs", "asc_krein", "bracketed_root",
    "classify", "density_index", "estimate_a_bracket", "eval_pq",
    "friedrichs_parameter", "gamma", "gauss_binomial",
    "hankel_positive_definite", "jacobi_apply", "krein_completion", "mass_at",
    "moment", "moment_sequence", "moments_from_json", "moments_to_json",
    "nevanlinna_eval", "nextremal_support", "normalize", "parameter_of_point",
    "phi_zeros", "qpochhammer", "quadrature", "quartic_friedrichs",
    "quartic_krein", "quartic_mu_c", "ramanujan_phi",
    "reconstructed_moments", "recurrence_from_moments",
    "shifted_moment_sequence", "stieltjes_transform_check", "sum_series",
    "sw_density", "sw_moment", "sw_moment_sequence", "sw_nextremal", "sw_p",
    "sw_phi_table", "sw_recurrence", "tilde_moment_sequence", "translate",
    "verify", "xi",
]

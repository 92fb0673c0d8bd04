"""Sharp Lorentz-Sobolev embeddings on weighted convex cones, at desk scale.

The package computes weighted cone measures, decreasing rearrangements,
Lorentz norms by two independent routes, sharp embedding constants and
their maximizing families, and constructive shell systems certifying
Bernstein-number lower bounds for the embedding's maximal non-compactness.
"""

from .bernstein import (AlmostExtremalSystem, BernsteinBound, ShellSpec,
                        absolute_continuity_witness, bernstein_lower_bound,
                        build_shell_function, construct_system,
                        gamma_sequence, gradient_upper_certificate,
                        superadditivity_certificate, verify_system)
from .cones import (BUILTIN_CONE_NAMES, ConcavityReport, QuadratureConfig,
                    WeightedCone, ball_measure, builtin_cone,
                    concavity_probe, thread_cap, unit_ball_measure,
                    weight_eval)
from .errors import (ConeSobolevError, DivergentIntegralError, DomainError,
                     InfeasibleError, InternalConsistencyError,
                     NumericalError, ResourceError, ValidationError)
from .lorentz import (LorentzParams, ell_q_norm, hardy_check,
                      lorentz_norm_distributional, lorentz_norm_rearranged,
                      restricted_norm)
from .profiles import (GradientDensity, RadialProfile, alvino_profile,
                       from_knots, gradient_density, head_cutoff, scale)
from .rearrangement import (SampledField, StepFunction1D,
                            distribution_function, radial_rearrangement,
                            rearrangement)
from .sobolev import (QuotientReport, alvino_search,
                      bump_superposition_field, embedding_norm,
                      polya_szego_check, quotient)

__version__ = "0.1.0"

__all__ = [
    "AlmostExtremalSystem", "BernsteinBound", "ShellSpec",
    "absolute_continuity_witness", "bernstein_lower_bound",
    "build_shell_function", "construct_system", "gamma_sequence",
    "gradient_upper_certificate", "superadditivity_certificate",
    "verify_system",
    "BUILTIN_CONE_NAMES", "ConcavityReport", "QuadratureConfig",
    "WeightedCone", "ball_measure", "builtin_cone", "concavity_probe",
    "thread_cap", "unit_ball_measure", "weight_eval",
    "ConeSobolevError", "DivergentIntegralError", "DomainError",
    "InfeasibleError", "InternalConsistencyError", "NumericalError",
    "ResourceError", "ValidationError",
    "LorentzParams", "ell_q_norm", "hardy_check",
    "lorentz_norm_distributional", "lorentz_norm_rearranged",
    "restricted_norm",
    "GradientDensity", "RadialProfile", "alvino_profile", "from_knots",
    "gradient_density", "head_cutoff", "scale",
    "SampledField", "StepFunction1D", "distribution_function",
    "radial_rearrangement", "rearrangement",
    "QuotientReport", "alvino_search", "bump_superposition_field",
    "embedding_norm", "polya_szego_check", "quotient",
    "__version__",
]

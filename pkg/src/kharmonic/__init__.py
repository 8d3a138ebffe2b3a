"""Numerical laboratory for polyharmonic curves into constant-curvature targets.

The package evaluates order-k tension fields (the Euler-Lagrange fields
of the order-k energies) on discrete closed curves, flows curves toward
critical points, computes second-variation spectra with index and
nullity counts, and verifies the closed-form constant-curvature circle
families and the product splitting identity at desk scale.
"""

from .curve import (DerivativeStack, DiscreteCurve, TangentField, build_stack,
                    covariant_derivative, l2_inner, resample_arclength,
                    rough_laplacian, tension, velocity)
from .energy import (FlowTrace, energy_k, first_variation_check, flow_step,
                     flow_to_critical, residual_scale)
from .errors import (DegenerateCurve, DomainMismatch, FieldCurveMismatch,
                     KHarmonicError, LengthMismatch, NotASphere, NotASpaceForm,
                     NotCriticalWarning, NotHarmonic, NotParallelCurvature,
                     NotUnitSphere, OpenCurveUnsupported, StencilTooCoarse,
                     StepUnderflow, ValidationError, WrongDimension, ZeroVector)
from .ktension import (KTensionResult, circle_curve, constant_curvature_kappa,
                       constant_kappa_normal_residual_3, extrinsic_residual_3,
                       frenet_residual_3, kappa_profile, tension_k,
                       tension_k_general, tension_k_spaceform)
from .product import graph_curve, product_curve, split_tension_check
from .serialization import (curve_from_dict, curve_to_dict, dump_curve,
                            load_curve, space_from_dict, space_to_dict)
from .spaceform import SpaceForm, flat, product_space, sphere
from .variation import (SpectrumReport, hessian_fd, hessian_matrix,
                        index_nullity, jacobi_apply,
                        nullity_characterization_check)

__version__ = "0.1.0"

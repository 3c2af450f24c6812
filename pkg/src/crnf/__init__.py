"""Exact formal normal forms for CR-singular 2-codimensional submanifolds.

Library layout:

  crnf.polycore    exact sparse bihomogeneous polynomials / truncated series
  crnf.decomp      trace and Fischer decompositions, nondegeneracy test
  crnf.moser       manifolds, formal maps, the trace-normalized partial form
  crnf.normalform  full normalization (kernel parameters) and verification
  crnf.jsonio      the JSON document grammar shared with the CLI
  crnf.generate    seeded random test manifolds
  crnf.cli         the `crnf` batch command
"""

from .coeffs import GaussCoeff, Rational, gc, rational_from_str, rational_to_str
from .polycore import (BihomPoly, MixedSeries, PurePoly, conjugate, derive,
                       evaluate, hermitian_quadric, monomial, trace,
                       weight_and_order)
from .decomp import (DegenerateDeltaError, FischerSplit, GradientSplit,
                     InvariantData, TraceSplit, fischer_apply,
                     fischer_decompose_gradient, fischer_decompose_power,
                     fischer_inner, is_nondegenerate, trace_decompose)
from .moser import (FormalMap, Manifold, MoserCertificate, compose_maps,
                    extended_moser, moser_certificate, moser_invariants,
                    push_forward, restrict_to_manifold)
from .normalform import (AffineResponse, ConditionResiduals, KernelParamEven,
                         KernelParamOdd, NormalFormReport, SolvabilityError,
                         full_normalize, kernel_map_even, kernel_map_odd,
                         pure_term_response, solve_kernel_parameter,
                         verify_normal_form)
from .generate import random_manifold
from .jsonio import (DocumentError, emit_manifold, emit_map, parse_manifold,
                     parse_map)

__all__ = [
    "GaussCoeff", "Rational", "gc", "rational_from_str", "rational_to_str",
    "BihomPoly", "MixedSeries", "PurePoly", "conjugate", "derive", "evaluate",
    "hermitian_quadric", "monomial", "trace", "weight_and_order",
    "DegenerateDeltaError", "FischerSplit", "GradientSplit", "InvariantData",
    "TraceSplit", "fischer_apply", "fischer_decompose_gradient",
    "fischer_decompose_power", "fischer_inner", "is_nondegenerate",
    "trace_decompose",
    "FormalMap", "Manifold", "MoserCertificate", "compose_maps",
    "extended_moser", "moser_certificate", "moser_invariants", "push_forward",
    "restrict_to_manifold",
    "AffineResponse", "ConditionResiduals", "KernelParamEven", "KernelParamOdd",
    "NormalFormReport", "SolvabilityError", "full_normalize", "kernel_map_even",
    "kernel_map_odd", "pure_term_response", "solve_kernel_parameter",
    "verify_normal_form",
    "random_manifold",
    "DocumentError", "emit_manifold", "emit_map", "parse_manifold", "parse_map",
]

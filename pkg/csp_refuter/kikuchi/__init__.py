"""Deviation tensors, Kikuchi index spaces and Kikuchi operators."""

from csp_refuter.kikuchi.index import IndexSpace, KikuchiIndex, indicator_lift, lift_norm_squared
from csp_refuter.kikuchi.operators import (
    KikuchiOperator,
    build_kikuchi_even,
    build_kikuchi_odd,
    combined_operator,
    even_identity_factor,
    odd_identity_factor,
)
from csp_refuter.kikuchi.tensor import (
    CrossTensor,
    DeviationTensor,
    build_cross_tensor,
    build_deviation_tensor,
    sq_term,
)

__all__ = [
    "CrossTensor",
    "DeviationTensor",
    "IndexSpace",
    "KikuchiIndex",
    "KikuchiOperator",
    "build_cross_tensor",
    "build_deviation_tensor",
    "build_kikuchi_even",
    "build_kikuchi_odd",
    "combined_operator",
    "even_identity_factor",
    "indicator_lift",
    "lift_norm_squared",
    "odd_identity_factor",
    "sq_term",
]

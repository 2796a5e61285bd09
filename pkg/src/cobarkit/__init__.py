"""Exact computations with homotopy algebras over a reduced dg cooperad.

Algebras over the cobar construction of a truncated cooperad C are stored
as maps Q′ : C(A) → A, ∞-morphisms as maps F′ : C(A) → B, and every
defining identity is checked in exact rational arithmetic.
"""

from .convolution import (AritySupportedMap, ConvAlgebra, arity_filtration_level, end_conv_bracket,
                          verify_shlie_relations)
from .cooperad import TruncatedCooperad, builtin, builtin_cocom, builtin_coas, suspend
from .enriched import (CompositionElement, associativity_harness, postcompose_morphism, precompose_morphism,
                       unit_harness, verify_U_is_MC)
from .errors import CobarKitError
from .exactlin import (ChainComplex, Contraction, GradedMap, GradedSpace, cohomology, compose_maps,
                       contraction_from_complex, normalize_contraction, tensor_maps)
from .hoalg import (CobarAlgebra, InfinityMorphism, compose_morphisms, is_quasi_iso, linear_term,
                    transport_structure, verify_cobar_structure, verify_infinity_morphism)
from .paths import LineElement, OneCell, chain_homotopy_from_cell, fiber_integrate, verify_one_cell
from .symcalc import Permutation, koszul_sign
from .transfer import CylinderTriple, homotopy_transfer, transfer_uniqueness_cell, verify_cylinder

__version__ = "0.1.0"

__all__ = [
    "AritySupportedMap", "ChainComplex", "CobarAlgebra", "CobarKitError", "CompositionElement", "Contraction",
    "ConvAlgebra", "CylinderTriple", "GradedMap", "GradedSpace", "InfinityMorphism", "LineElement", "OneCell",
    "Permutation", "TruncatedCooperad", "arity_filtration_level", "associativity_harness", "builtin",
    "builtin_cocom", "builtin_coas", "chain_homotopy_from_cell", "cohomology", "compose_maps",
    "compose_morphisms", "contraction_from_complex", "end_conv_bracket", "fiber_integrate",
    "homotopy_transfer", "is_quasi_iso", "koszul_sign", "linear_term", "normalize_contraction",
    "postcompose_morphism", "precompose_morphism", "suspend", "tensor_maps", "transfer_uniqueness_cell",
    "transport_structure", "unit_harness", "verify_U_is_MC", "verify_cobar_structure", "verify_cylinder",
    "verify_infinity_morphism", "verify_one_cell", "verify_shlie_relations",
]

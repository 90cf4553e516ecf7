"""
CURVE-DESIGNS
Parabola and hyperbola 2-designs over F_{2^n} and their automorphism groups
"""

from .gf2n import FieldCtx, FieldElement, FieldError, new_field_ctx
from .permgrp import GuardExceeded, Permutation, PermGroup, PermutationError
from .designs import (Block, BlockKind, DesignError, DesignParams, IncidenceStructure,
                      build_design, complement, dual, find_isomorphism, verify_design)
from .autgroup import AutReport, LinearMap, brute_aut, build_aut_report, gl_perm_group

__version__ = "1.0.0"

__all__ = [
    "FieldCtx", "FieldElement", "FieldError", "new_field_ctx",
    "GuardExceeded", "Permutation", "PermGroup", "PermutationError",
    "Block", "BlockKind", "DesignError", "DesignParams", "IncidenceStructure",
    "build_design", "complement", "dual", "find_isomorphism", "verify_design",
    "AutReport", "LinearMap", "brute_aut", "build_aut_report", "gl_perm_group",
]

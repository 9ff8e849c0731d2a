"""Degreewise computations for sheaves of graded modules on smooth fans."""
from .errors import *  # noqa: F401,F403
from .fan import Fan, build_fan, dual_membership, fan_morphism, incidence_sign
from .builtins import BUILTIN_FANS, builtin_fan
from .stalks import StalkAlgebra, local_coh_indicator, piece_dim_A, piece_dim_B
from .modules import (FgGradedModule, ModuleMorphism, base_change, delta_extension, direct_sum,
                      free_module, graded_dual, kernel_presentation, presented, syzygies)
from .homology import DegreeWindow, EvaluatedComplex, chambers, cube, verification_degrees
from .sheaves import (CoSheafComplex, SheafComplex, SheafMorphism, SheafOfModules, hom_pieces,
                      projective_resolution, pullback, pushforward, standard_open, standard_point,
                      structure_sheaf)
from .koszul import augmented_K_structure, cellular_complex, constant_diagram, koszul_K
from .geometry import (EquivariantLineBundle, canonical_bundle, cousin_complex, line_bundle, phi,
                       psi, serre_check)

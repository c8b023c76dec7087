"""
Wave-operator pieces near the threshold: the singular expansion of the
resolvent, the singular part Z_s in R^3, the constants of the large-p
corrections and L^p probes.
"""
from .constants import dm_constant, dmj_constants, res5_coefficient, shin_identity, tilde_dm_odd
from .expansion import FiniteRankOperator, SingularExpansion, SingularTerm, singular_expansion
from .probe import ProbeReport, lp_probe, rank_one_correction
from .zs import CutoffSpec, apply_Zs0_m3, apply_Zs1_m3, apply_Zs_m3, k0_majorant_constants, k0_profile

__all__ = [
    "CutoffSpec", "FiniteRankOperator", "ProbeReport", "SingularExpansion", "SingularTerm",
    "apply_Zs0_m3", "apply_Zs1_m3", "apply_Zs_m3", "dm_constant", "dmj_constants",
    "k0_majorant_constants", "k0_profile", "lp_probe", "rank_one_correction",
    "res5_coefficient", "shin_identity", "singular_expansion", "tilde_dm_odd",
]

"""Dyadic paraproduct compositions on finite trees.

Grid and closed-form Gram matrices for ``Pi_b Pi_d``, the half-plane
transplant, the testing constants A, B, C and verification campaigns.
"""

from .dyadic_core import DyadicIndex, Tree, delta, haar_value
from .symbols import Symbol, bmo_norm, generate, load, nu_table, save
from .paraproducts import (
    apply_paraproduct,
    composition_gram_closed,
    composition_gram_direct,
    operator_norm,
)
from .conditions import (
    condition_A,
    condition_B,
    condition_C,
    full_report,
    p_term,
    q_term,
)
from .campaign import CampaignConfig, run_campaign

__all__ = [
    "DyadicIndex",
    "Tree",
    "delta",
    "haar_value",
    "Symbol",
    "bmo_norm",
    "generate",
    "load",
    "nu_table",
    "save",
    "apply_paraproduct",
    "composition_gram_closed",
    "composition_gram_direct",
    "operator_norm",
    "condition_A",
    "condition_B",
    "condition_C",
    "full_report",
    "p_term",
    "q_term",
    "CampaignConfig",
    "run_campaign",
]

__version__ = "0.1.0"

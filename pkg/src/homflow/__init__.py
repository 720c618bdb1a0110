"""Diagonal flows on spaces of lattices: heights, contraction checks, games and Diophantine classifiers."""

__version__ = "0.1.0"

from .diophantine import LinearFormsPoint, cf_oracle, sl2_products_exponents
from .flows import FlowSpec, flow_for, linear_curve, standard_curve
from .heights import HeightConfig, f_eps
from .linalg_exact import LatticeState
from .sl2_rep import build_triple, decompose, standard_triple

__all__ = [
    "FlowSpec", "HeightConfig", "LatticeState", "LinearFormsPoint", "build_triple", "cf_oracle",
    "decompose", "f_eps", "flow_for", "linear_curve", "sl2_products_exponents", "standard_curve",
    "standard_triple",
]

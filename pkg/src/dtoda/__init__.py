"""Exact symbolic calculus for the Lax formulation of a Toda-type lattice hierarchy with
two extra flow families.

The layers are the differential-difference polynomial ring (`ring`), operator series over
it (`opalg`), projections along the ideal generated by H1, H2, H3 (`projection`), the Lax
operator and its roots (`lax`), dressing data (`dressing`), flow derivation and
compatibility checks (`flows`), tau-function tests (`hbe`) and the `dtoda` CLI (`cli`).
"""

from .flows import (
    FlowLabel,
    appendix_label_set,
    build_B,
    commutativity_check,
    derive_flow,
    ext_rel_check,
    membership_check,
    zs_check,
)
from .hbe import TauModel, bilinear_check, c_a_check, field_extract
from .lax import LaxSystem, b10, structural_checks
from .opalg import E, E2, E3, EMINUS, EPLUS, ContextError, OpAlgebra, OpSeries, WindowError, adjoint, compose
from .projection import Projector, project
from .ring import ConfigError, Derivation, Ring, RingElem, apply_dx_symbol, eq_mod_eps
from .symbols import DxSymbol

__all__ = [
    "ConfigError",
    "ContextError",
    "Derivation",
    "DxSymbol",
    "E",
    "E2",
    "E3",
    "EMINUS",
    "EPLUS",
    "FlowLabel",
    "LaxSystem",
    "OpAlgebra",
    "OpSeries",
    "Projector",
    "Ring",
    "RingElem",
    "TauModel",
    "WindowError",
    "adjoint",
    "apply_dx_symbol",
    "appendix_label_set",
    "b10",
    "bilinear_check",
    "build_B",
    "c_a_check",
    "commutativity_check",
    "compose",
    "derive_flow",
    "eq_mod_eps",
    "ext_rel_check",
    "field_extract",
    "membership_check",
    "project",
    "structural_checks",
    "zs_check",
]

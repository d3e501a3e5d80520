"""starnls: nonlinear Schrodinger dynamics on a star graph.

A numerical laboratory for the vertex-coupled NLS

    i u_t + Delta_gamma u = mu |u|^(p-1) u

on N half-lines joined at one vertex with the Kirchhoff (gamma = 0) or
repulsive-delta (gamma > 0) coupling: odd/even decomposition, two linear
propagators that validate each other, Strang-split nonlinear evolution,
conserved functionals and potential-well classification, localized virial
identities, sharp Gagliardo-Nirenberg estimation, shifted-profile
orthogonality checks and symmetry projections, plus a scenario-driven CLI
for scattering/blow-up experiments.
"""

from .params import ModelParams
from .grid import (
    AbsorbingLayer,
    EdgeGrid,
    GraphFunction,
    LineFunction,
    VertexContinuityError,
    inner_l2,
    norm_h1gamma_sq,
    norm_linf_max,
    norm_lq,
    vertex_residual,
)
from .decomposition import LineTriple, decompose, parity_residual, reconstruct
from .propagator import (
    LinearPropagatorConfig,
    dispersive_ratio,
    propagate_delta_line,
    propagate_free_line,
    propagate_graph_linear,
)
from .dynamics import (
    EvolveConfig,
    Trajectory,
    blowup_diagnostic,
    evolve_nls,
    scattering_diagnostic,
    solve_wave_operator,
    wave_operator_matching_residual,
)
from .functionals import (
    DichotomyVerdict,
    FunctionalReport,
    ThresholdTable,
    classify_potential_well,
    cutoff_profile,
    evaluate_functionals,
    localized_virial,
    pohozaev_check,
    soliton_line,
    threshold_table,
)
from .variational import GNEstimate, estimate_gn_constant, gn_ratio, line_gn_constant
from .profiles import ProfileSpec, edge_bump, orthogonality_report, shift_profile
from .symmetry import (
    GroupElement,
    apply_group_element,
    invariance_drift,
    project_invariant,
    standard_group,
)

__version__ = "0.1.0"

__all__ = [
    "ModelParams",
    "AbsorbingLayer",
    "EdgeGrid",
    "GraphFunction",
    "LineFunction",
    "VertexContinuityError",
    "inner_l2",
    "norm_h1gamma_sq",
    "norm_linf_max",
    "norm_lq",
    "vertex_residual",
    "LineTriple",
    "decompose",
    "parity_residual",
    "reconstruct",
    "LinearPropagatorConfig",
    "dispersive_ratio",
    "propagate_delta_line",
    "propagate_free_line",
    "propagate_graph_linear",
    "EvolveConfig",
    "Trajectory",
    "blowup_diagnostic",
    "evolve_nls",
    "scattering_diagnostic",
    "solve_wave_operator",
    "wave_operator_matching_residual",
    "DichotomyVerdict",
    "FunctionalReport",
    "ThresholdTable",
    "classify_potential_well",
    "cutoff_profile",
    "evaluate_functionals",
    "localized_virial",
    "pohozaev_check",
    "soliton_line",
    "threshold_table",
    "GNEstimate",
    "estimate_gn_constant",
    "gn_ratio",
    "line_gn_constant",
    "ProfileSpec",
    "edge_bump",
    "orthogonality_report",
    "shift_profile",
    "GroupElement",
    "apply_group_element",
    "invariance_drift",
    "project_invariant",
    "standard_group",
]

"""Fractional-order simulation toolkit for a food-borne disease model.

The package couples a generic Caputo predictor-corrector solver
(:mod:`foodborne.fracode`) with a seven-compartment human/fly/wasp
transmission model (:mod:`foodborne.model`), global sensitivity machinery
(:mod:`foodborne.sensitivity`) and a reproducible scenario runner
(:mod:`foodborne.experiments`, :mod:`foodborne.cli`).
"""

try:
    from importlib.metadata import version as _version
    __version__ = _version("foodborne")
except Exception:  # pragma: no cover - not installed
    __version__ = "0.1.0"

from .fracode import (
    FractionalIVP,
    MittagLefflerError,
    NonFiniteStateError,
    OrderEstimate,
    SolverConfig,
    SolverError,
    Trajectory,
    convergence_order,
    corrector_weight,
    mittag_leffler,
    predictor_weight,
    solve,
)
from .model import (
    COMPARTMENTS,
    ContractionBound,
    EquilibriumReport,
    ModelParams,
    State,
    contraction_bound,
    disease_free_equilibria,
    endemic_equilibrium_residual,
    feasibility_bounds,
    force_of_infection,
    make_rhs,
    r0,
    rhs,
    with_params,
)
from .scenario import Scenario, ScenarioError, parse_scenario, write_scenario
from .sensitivity import (
    LhsDesign,
    ParamRange,
    SensitivityReport,
    SurfaceGrid,
    lhs_sample,
    prcc,
    r0_surface,
)

__all__ = [
    "COMPARTMENTS",
    "ContractionBound",
    "EquilibriumReport",
    "FractionalIVP",
    "LhsDesign",
    "MittagLefflerError",
    "ModelParams",
    "NonFiniteStateError",
    "OrderEstimate",
    "ParamRange",
    "Scenario",
    "ScenarioError",
    "SensitivityReport",
    "SolverConfig",
    "SolverError",
    "State",
    "SurfaceGrid",
    "Trajectory",
    "contraction_bound",
    "convergence_order",
    "corrector_weight",
    "disease_free_equilibria",
    "endemic_equilibrium_residual",
    "feasibility_bounds",
    "force_of_infection",
    "lhs_sample",
    "make_rhs",
    "mittag_leffler",
    "parse_scenario",
    "prcc",
    "predictor_weight",
    "r0",
    "r0_surface",
    "rhs",
    "solve",
    "with_params",
    "write_scenario",
]

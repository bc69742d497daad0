"""Collision-cone barrier safety filtering for acceleration-controlled vehicles.

A reference controller proposes an input; the filter minimally modifies
it so the relative velocity toward each obstacle stays outside that
obstacle's collision cone, with the guarantee encoded as a control
barrier constraint solved per step by a tiny QP.

Hot kernels run from a compiled extension when available and fall back
to pure Python otherwise; `kernel_backend()` reports which one is live.
"""

from ._backend import kernel_backend
from .cbf import (
    CbfEvaluation,
    ConeGeometry,
    Obstacle,
    c3bf_eval,
    c3bf_value,
    cone_geometry,
    effective_radius,
    ellipse_cbf_eval,
    hocbf_eval,
    rel_kinematics_bicycle,
    rel_kinematics_pointmass,
    rel_kinematics_unicycle,
)
from .controllers import (
    PGains,
    ReferencePath,
    p_controller,
    p_speed_bicycle,
    p_velocity,
    stanley_lateral,
)
from .engine import (
    ControllerSpec,
    SafetyMetrics,
    Scenario,
    TrajectoryLog,
    classify_behavior,
    run_scenario,
    safety_metrics,
)
from .errors import ConeCbfError, SimulationError, UnsupportedCbfError, ValidationError
from .models import (
    BicycleState,
    ModelParams,
    PointMassState,
    UnicycleState,
    bicycle_derivative,
    integrate_step,
    pointmass_derivative,
    slip_from_steering,
    unicycle_derivative,
)
from .qpfilter import FilterConfig, FilterResult, activation_gate, filter_qp, filter_single
from .scenario_io import load_scenario, parse_scenario, save_scenario, scenario_to_dict

__version__ = "0.1.0"

__all__ = [
    "BicycleState",
    "CbfEvaluation",
    "ConeCbfError",
    "ConeGeometry",
    "ControllerSpec",
    "FilterConfig",
    "FilterResult",
    "ModelParams",
    "Obstacle",
    "PGains",
    "PointMassState",
    "ReferencePath",
    "SafetyMetrics",
    "Scenario",
    "SimulationError",
    "TrajectoryLog",
    "UnicycleState",
    "UnsupportedCbfError",
    "ValidationError",
    "activation_gate",
    "bicycle_derivative",
    "c3bf_eval",
    "c3bf_value",
    "classify_behavior",
    "cone_geometry",
    "effective_radius",
    "ellipse_cbf_eval",
    "filter_qp",
    "filter_single",
    "hocbf_eval",
    "integrate_step",
    "kernel_backend",
    "load_scenario",
    "p_controller",
    "p_speed_bicycle",
    "p_velocity",
    "parse_scenario",
    "pointmass_derivative",
    "rel_kinematics_bicycle",
    "rel_kinematics_pointmass",
    "rel_kinematics_unicycle",
    "run_scenario",
    "safety_metrics",
    "save_scenario",
    "scenario_to_dict",
    "slip_from_steering",
    "stanley_lateral",
    "unicycle_derivative",
]

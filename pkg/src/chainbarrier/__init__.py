"""Chain-based non-linear barrier formation for mobile wireless sensors.

A deployment of mobile sensors in a long belt is relocated into a barrier by
merging chains of overlapping sensing disks under virtual forces, with an
independent coverage checker, a straight-line baseline for comparison, and a
seeded experiment harness.
"""

from .barrier import (
    FormationState,
    formation_step,
    initialize_phase,
    is_barrier_formed,
    left_attach_phase,
    right_attach_phase,
    run,
)
from .baseline import LinearPlan, plan_linear_barrier
from .chain import (
    ChainForest,
    ChainGraph,
    DominantPair,
    FlattenAction,
    build_chain_forest,
    dominant_pair,
    flatten_path,
    flatten_step,
    merge_graphs,
    pairwise_force,
    select_left_right_links,
)
from .coverage import CoverageReport, grid_gap_oracle, strong_barrier_covered
from .errors import (
    ChainBarrierError,
    InsufficientSensorsError,
    NoConvergenceError,
    NumericalFailureError,
    ParameterError,
    SingleGraphError,
)
from .harness import (
    ExperimentRow,
    ExperimentSpec,
    default_spec,
    run_experiment,
    write_rows_csv,
)
from .model import (
    AlgoConfig,
    BeltRegion,
    Deployment,
    Frame,
    RunResult,
    SensorRecord,
    displacement_metrics,
    read_deployment,
    uniform_random_deployment,
    write_deployment,
)
from .physics import PhysicsWorld, StepReport
from .svgframes import emit_svg_frames

__version__ = "0.1.0"

__all__ = [
    "AlgoConfig",
    "BeltRegion",
    "ChainBarrierError",
    "ChainForest",
    "ChainGraph",
    "CoverageReport",
    "Deployment",
    "DominantPair",
    "ExperimentRow",
    "ExperimentSpec",
    "FlattenAction",
    "FormationState",
    "Frame",
    "InsufficientSensorsError",
    "LinearPlan",
    "NoConvergenceError",
    "NumericalFailureError",
    "ParameterError",
    "PhysicsWorld",
    "RunResult",
    "SensorRecord",
    "SingleGraphError",
    "StepReport",
    "build_chain_forest",
    "default_spec",
    "displacement_metrics",
    "dominant_pair",
    "emit_svg_frames",
    "flatten_path",
    "flatten_step",
    "formation_step",
    "grid_gap_oracle",
    "initialize_phase",
    "is_barrier_formed",
    "left_attach_phase",
    "merge_graphs",
    "pairwise_force",
    "plan_linear_barrier",
    "read_deployment",
    "right_attach_phase",
    "run",
    "run_experiment",
    "select_left_right_links",
    "strong_barrier_covered",
    "uniform_random_deployment",
    "write_deployment",
    "write_rows_csv",
]

"""Multi-object tracking over tracklet partial orders.

Detections are linked into a constraint graph using hard kinematic gates,
and tracks are pulled out of that graph by a greedy degree-limited edge
selection.  A constant-velocity Kalman tracker is included as a baseline,
together with the evaluation measures used to compare the two.
"""

from .model import Dataset, Detection, Observation, Track, ValidationError, observe
from .constraint import (
    ConstraintGates,
    CustodyReport,
    SeparabilityCurve,
    custody_loss_rate,
    relates,
    separability_curve,
)
from .poset import TrackletGraph, WidthResult, build_graph, width
from .kalman import KalmanParams, KalmanState, kalman_track, predict, update
from .weights import ComponentStats, component_stats, simple_weight, tailored_weight
from .tracker import ReducedGraph, extract_chains, poset_track, reduce_graph
from .metrics import EvalReport, evaluate
from .ingest import (
    PulseMatrix,
    ScenarioSpec,
    align_pulses,
    cfar_detect,
    generate_scenario,
    read_detections_csv,
    subsample,
    write_detections_csv,
)

__version__ = "0.1.0"

__all__ = [
    "ComponentStats",
    "ConstraintGates",
    "CustodyReport",
    "Dataset",
    "Detection",
    "EvalReport",
    "KalmanParams",
    "KalmanState",
    "Observation",
    "PulseMatrix",
    "ReducedGraph",
    "ScenarioSpec",
    "SeparabilityCurve",
    "Track",
    "TrackletGraph",
    "ValidationError",
    "WidthResult",
    "align_pulses",
    "build_graph",
    "cfar_detect",
    "component_stats",
    "custody_loss_rate",
    "evaluate",
    "extract_chains",
    "generate_scenario",
    "kalman_track",
    "observe",
    "poset_track",
    "predict",
    "read_detections_csv",
    "reduce_graph",
    "relates",
    "separability_curve",
    "simple_weight",
    "subsample",
    "tailored_weight",
    "update",
    "width",
    "write_detections_csv",
]

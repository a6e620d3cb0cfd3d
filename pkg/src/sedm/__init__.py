"""Stochastic earned duration management (SEDM).

Monte Carlo simulation of activity networks with random durations,
earned-duration curve analytics, kernel-density milestone control,
probability-of-delay classification, final-duration regression
forecasting, and a MAPE benchmark against the earned-schedule and
stochastic earned-value methods.
"""

from sedm.benchmark import (
    AnalysisConfig,
    ForecastResult,
    MapeReport,
    mape,
    run_benchmark,
    sedm_forecast,
    sevm_forecast,
)
from sedm.curves import (
    MEASURE_COST,
    MEASURE_WORK,
    ControlSnapshot,
    CumulativeCurve,
    TrackingLog,
    control_snapshot,
    earned_time,
    esm_forecast,
    planned_curve,
    ppi,
    realized_curves,
    tracking_curves,
    tracking_from_schedule,
)
from sedm.milestone import (
    KdeModel,
    PointCloud,
    anomaly_percentile,
    bandwidth_nrd,
    build_point_cloud,
    fit_kde,
    kde_density,
    match_progress,
)
from sedm.network import (
    Activity,
    Discrete,
    Normal,
    ProjectNetwork,
    Schedule,
    Triangular,
    Uniform,
    baseline_schedule,
    forward_pass,
    progressive_levels,
    serial_parallel_indicator,
    validate,
)
from sedm.simulate import (
    RunConfig,
    SimulationStore,
    TrajectoryRecord,
    classify_outcome,
    load_store,
    run_simulation,
    sample_duration,
    save_store,
)

__version__ = "0.1.0"

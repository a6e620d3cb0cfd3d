"""Final-duration forecasting and the MAPE comparison harness.

Three forecasting methods share the harness: the deterministic
earned-schedule extrapolation (ESM) and two stochastic pipelines that
train on a simulation store — duration-valued (SEDM) and cost-valued
(SEVM). The benchmark is retrospective: it replays a fully tracked
project, forecasts at each checkpoint, and scores every method's series
against the realized duration.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from sedm import curves, learn, milestone
from sedm.curves import (
    MEASURE_COST,
    MEASURE_WORK,
    ControlSnapshot,
    TrackingLog,
    control_snapshot,
    earned_time,
    esm_forecast,
    planned_curve,
    tracking_curves,
)
from sedm.network import ProjectNetwork, baseline_schedule
from sedm.simulate import RunConfig, SimulationStore, run_simulation

METHOD_ESM = "ESM"
METHOD_SEVM = "SEVM"
METHOD_SEDM = "SEDM"
ALL_METHODS = (METHOD_ESM, METHOD_SEVM, METHOD_SEDM)

_COMPLETION_TOL = 1e-9


@dataclass(frozen=True)
class AnalysisConfig:
    """Everything tunable about the stochastic analysis, with the defaults
    used throughout: 25k runs, 10-fold CV (1 repeat for classification,
    3 for regression), 80/20 stratified split, checkpoint deciles."""

    n_runs: int = 25_000
    master_seed: int = 20_210
    folds: int = 10
    repeats_classification: int = 1
    repeats_regression: int = 3
    train_fraction: float = 0.8
    knn_grid: tuple[int, ...] = learn.DEFAULT_KNN_GRID
    ridge_grid: tuple[float, ...] = learn.DEFAULT_RIDGE_GRID
    cart_min_leaf: int = learn.DEFAULT_CART_MIN_LEAF
    cart_max_depth: int = learn.DEFAULT_CART_MAX_DEPTH
    classification_roster: tuple[str, ...] = learn.CLASSIFICATION_ROSTER
    regression_roster: tuple[str, ...] = learn.REGRESSION_ROSTER
    checkpoints: tuple[int, ...] = tuple(range(0, 101, 10))
    anomaly: bool = True
    bandwidth_x: float | None = None
    bandwidth_y: float | None = None

    def grids(self) -> learn.HyperGrids:
        return learn.HyperGrids(
            knn_k=self.knn_grid,
            ridge_lam=self.ridge_grid,
            cart_min_leaf=self.cart_min_leaf,
            cart_max_depth=self.cart_max_depth,
        )

    def plan(self, task: str, seed_offset: int = 0) -> learn.CVPlan:
        repeats = (
            self.repeats_classification
            if task == "classification"
            else self.repeats_regression
        )
        return learn.CVPlan(
            folds=self.folds,
            repeats=repeats,
            stratified=task == "classification",
            seed=self.master_seed + seed_offset,
        )

    @classmethod
    def from_file(cls, path) -> "AnalysisConfig":
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        kwargs = {}
        for f in cls.__dataclass_fields__:
            if f in doc:
                value = doc[f]
                kwargs[f] = tuple(value) if isinstance(value, list) else value
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**kwargs)


@dataclass
class ForecastResult:
    method: str
    control_time: float
    edac: float
    expected_deviation: float
    p_delay: float | None = None
    anomaly_percentile: float | None = None
    classifier: str | None = None
    regressor: str | None = None
    classification_cv: learn.CVReport | None = None
    regression_cv: learn.CVReport | None = None
    note: str = ""


# ---------------------------------------------------------------------------
# Stochastic forecast (shared by the duration- and cost-valued pipelines)
# ---------------------------------------------------------------------------

def _anomaly_score(cloud: milestone.PointCloud, observed, config: AnalysisConfig) -> float:
    try:
        model = milestone.fit_kde(cloud, config.bandwidth_x, config.bandwidth_y)
    except milestone.DegenerateBandwidthError:
        # all mass at one point: on that point is ordinary, anywhere else is not
        same = np.isclose(cloud.ad, observed[0]) & np.isclose(cloud.tad, observed[1])
        return 0.0 if bool(np.all(same)) else 1.0
    return milestone.anomaly_percentile(model, observed)


def _stochastic_forecast(
    method: str,
    snapshot: ControlSnapshot,
    store: SimulationStore,
    config: AnalysisConfig,
) -> ForecastResult:
    if snapshot.fingerprint is not None and snapshot.fingerprint != store.fingerprint:
        raise ValueError("snapshot and store describe different networks")
    bpd = store.bpd
    finals = store.finals()

    if snapshot.ted >= store.planned_total - _COMPLETION_TOL:
        # project complete: the outcome is a fact, not a forecast
        deviation = snapshot.ad - bpd
        return ForecastResult(
            method=method,
            control_time=snapshot.ad,
            edac=float(snapshot.ad),
            expected_deviation=float(deviation),
            p_delay=1.0 if snapshot.ad > bpd else 0.0,
            anomaly_percentile=None,
            note="complete",
        )
    if snapshot.ted <= _COMPLETION_TOL:
        # nothing earned yet: the planned value, with the prior delay rate
        return ForecastResult(
            method=method,
            control_time=snapshot.ad,
            edac=float(bpd),
            expected_deviation=0.0,
            p_delay=float(np.mean(finals["delay_flag"])),
            anomaly_percentile=None,
            note="no progress yet",
        )

    cloud = milestone.build_point_cloud(store, snapshot.ted)
    X = np.column_stack([cloud.ad, cloud.tad])
    observed = (float(snapshot.ad), float(snapshot.tad))
    point = np.array([observed])

    # classification: probability of finishing late
    labels = finals["delay_flag"].astype(float)
    classifier_id = None
    classification_cv = None
    if len(np.unique(labels)) < 2:
        p_delay = float(labels[0])
        note = "single-class store; classifier skipped"
    else:
        dataset = learn.Dataset(X, labels, "classification", config.train_fraction)
        train_idx, _ = dataset.split(seed=config.master_seed, stratified=True)
        plan = config.plan("classification")
        report = learn.cross_validate(
            learn.Dataset(X[train_idx], labels[train_idx], "classification"),
            plan,
            roster=config.classification_roster,
            grids=config.grids(),
        )
        classifier_id = learn.select_model(report, config.classification_roster)
        model = learn.train_classifier(
            classifier_id, X[train_idx], labels[train_idx],
            report.entries[classifier_id].hyper,
        )
        p_delay = float(model.predict_proba(point)[0])
        classification_cv = report
        note = ""

    # regression: expected signed deviation from the baseline duration
    targets = finals["delay_amount"].astype(float)
    dataset = learn.Dataset(X, targets, "regression", config.train_fraction)
    train_idx, _ = dataset.split(seed=config.master_seed, stratified=False)
    report = learn.cross_validate(
        learn.Dataset(X[train_idx], targets[train_idx], "regression"),
        config.plan("regression"),
        roster=config.regression_roster,
        grids=config.grids(),
    )
    regressor_id = learn.select_model(report, config.regression_roster)
    model = learn.train_regressor(
        regressor_id, X[train_idx], targets[train_idx],
        report.entries[regressor_id].hyper,
    )
    deviation = float(model.predict(point)[0])

    percentile = _anomaly_score(cloud, observed, config) if config.anomaly else None
    return ForecastResult(
        method=method,
        control_time=snapshot.ad,
        edac=bpd + deviation,
        expected_deviation=deviation,
        p_delay=p_delay,
        anomaly_percentile=percentile,
        classifier=classifier_id,
        regressor=regressor_id,
        classification_cv=classification_cv,
        regression_cv=report,
        note=note,
    )


def sedm_forecast(
    snapshot: ControlSnapshot,
    store: SimulationStore,
    config: AnalysisConfig = AnalysisConfig(),
) -> ForecastResult:
    """Duration-valued stochastic forecast at a milestone snapshot."""
    if store.config.value_measure != MEASURE_WORK:
        raise ValueError("sedm_forecast needs a work-period store")
    if snapshot.measure != MEASURE_WORK:
        raise ValueError("sedm_forecast needs a work-period snapshot")
    return _stochastic_forecast(METHOD_SEDM, snapshot, store, config)


def sevm_forecast(
    snapshot: ControlSnapshot,
    store: SimulationStore,
    config: AnalysisConfig = AnalysisConfig(),
) -> ForecastResult:
    """Cost-valued stochastic forecast: the same pipeline anchored on the
    earned-cost target, with the cloud in (time, actual cost) coordinates.
    The regression target stays the duration deviation."""
    if store.config.value_measure != MEASURE_COST:
        raise ValueError("sevm_forecast needs a cost store")
    if snapshot.measure != MEASURE_COST:
        raise ValueError("sevm_forecast needs a cost snapshot")
    return _stochastic_forecast(METHOD_SEVM, snapshot, store, config)


# ---------------------------------------------------------------------------
# MAPE benchmark
# ---------------------------------------------------------------------------

def mape(rd: float, edac_series) -> float:
    """Mean absolute percentage error of a forecast series against the
    realized duration."""
    series = np.asarray(edac_series, dtype=float)
    if rd <= 0:
        raise ValueError("realized duration must be positive")
    if series.size == 0:
        raise ValueError("empty forecast series")
    return float(100.0 / len(series) * np.sum(np.abs(rd - series) / rd))


@dataclass
class MapeReport:
    rd: float
    control_times: list[int]
    forecasts: dict[str, list[ForecastResult]] = field(default_factory=dict)

    def edac_series(self, method: str) -> np.ndarray:
        return np.array([f.edac for f in self.forecasts[method]])

    def mape_of(self, method: str) -> float:
        return mape(self.rd, self.edac_series(method))

    def write_forecasts(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("method,control_time,edac,p_delay,anomaly_percentile\n")
            for method in self.forecasts:
                for f in self.forecasts[method]:
                    p = "" if f.p_delay is None else repr(float(f.p_delay))
                    a = "" if f.anomaly_percentile is None else repr(float(f.anomaly_percentile))
                    fh.write(f"{method},{float(f.control_time):g},{float(f.edac)!r},{p},{a}\n")

    def write_summary(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("method,mape\n")
            for method in self.forecasts:
                fh.write(f"{method},{self.mape_of(method)!r}\n")


def _esm_forecast_at(
    network: ProjectNetwork,
    log: TrackingLog,
    ad: int,
    planned: curves.CumulativeCurve,
    measure: str,
    bpd: float,
) -> ForecastResult:
    earned, _ = tracking_curves(network, log, measure)
    ev = float(earned.values[ad])
    es = earned_time(planned, min(ev, planned.final))
    edac = esm_forecast(float(ad), es, bpd)
    return ForecastResult(
        method=METHOD_ESM,
        control_time=ad,
        edac=edac,
        expected_deviation=edac - bpd,
    )


def checkpoint_times(horizon: int, checkpoints) -> list[int]:
    """Control periods at the requested percentages of the tracked horizon."""
    times = sorted({int(round(pct / 100.0 * horizon)) for pct in checkpoints})
    return times


def run_benchmark(
    network: ProjectNetwork,
    tracking: TrackingLog,
    rd: float,
    methods: tuple[str, ...] = ALL_METHODS,
    config: AnalysisConfig = AnalysisConfig(),
    store: SimulationStore | None = None,
    cost_store: SimulationStore | None = None,
) -> MapeReport:
    """Forecast with every requested method at each checkpoint and score the
    series with MAPE.

    One simulation store per value measure is built (or reused when passed
    in) and shared across all milestones; models are retrained per
    milestone. ESM uses cost curves when every activity has a cost rate and
    work-period curves otherwise.
    """
    unknown = set(methods) - set(ALL_METHODS)
    if unknown:
        raise ValueError(f"unknown methods: {sorted(unknown)}")
    if rd <= 0:
        raise ValueError("realized duration must be positive")
    schedule = baseline_schedule(network)
    bpd = schedule.project_duration
    times = checkpoint_times(tracking.horizon, config.checkpoints)

    esm_measure = MEASURE_COST if network.has_costs() else MEASURE_WORK
    planned_by_measure = {
        MEASURE_WORK: planned_curve(network, schedule, MEASURE_WORK)
    }
    if METHOD_SEVM in methods or esm_measure == MEASURE_COST:
        planned_by_measure[MEASURE_COST] = planned_curve(network, schedule, MEASURE_COST)

    if METHOD_SEDM in methods:
        if store is None:
            store = run_simulation(
                network,
                RunConfig(n_runs=config.n_runs, master_seed=config.master_seed,
                          value_measure=MEASURE_WORK),
            )
        else:
            store.check_fingerprint(network)
    if METHOD_SEVM in methods:
        if cost_store is None:
            cost_store = run_simulation(
                network,
                RunConfig(n_runs=config.n_runs, master_seed=config.master_seed,
                          value_measure=MEASURE_COST),
            )
        else:
            cost_store.check_fingerprint(network)

    report = MapeReport(rd=rd, control_times=times)
    for method in methods:
        report.forecasts[method] = []
    for ad in times:
        if METHOD_ESM in methods:
            report.forecasts[METHOD_ESM].append(
                _esm_forecast_at(
                    network, tracking, ad, planned_by_measure[esm_measure],
                    esm_measure, bpd,
                )
            )
        if METHOD_SEVM in methods:
            snap = control_snapshot(
                network, tracking, ad, planned_by_measure[MEASURE_COST], MEASURE_COST
            )
            report.forecasts[METHOD_SEVM].append(sevm_forecast(snap, cost_store, config))
        if METHOD_SEDM in methods:
            snap = control_snapshot(
                network, tracking, ad, planned_by_measure[MEASURE_WORK], MEASURE_WORK
            )
            report.forecasts[METHOD_SEDM].append(sedm_forecast(snap, store, config))
    return report

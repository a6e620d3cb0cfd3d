"""Cumulative duration/cost curves and earned-duration analytics.

The three project curves (planned, earned, actual) are stored at integer
period resolution with value(0) = 0 and linear interpolation in between.
The same machinery serves two value measures: work periods (every planned
work period weighs 1) and cost (periods weighted by the activity's cost
rate), which is what turns the duration pipeline into its earned-value
twin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from sedm.network import Activity, ProjectNetwork, Schedule

MEASURE_WORK = "work-periods"
MEASURE_COST = "cost"
MEASURES = (MEASURE_WORK, MEASURE_COST)

_TOL = 1e-9


@dataclass
class CumulativeCurve:
    """Non-decreasing per-period cumulative totals for one value measure."""

    measure: str
    values: np.ndarray  # values[p] for p = 0..T, values[0] == 0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.measure not in MEASURES:
            raise ValueError(f"unknown measure {self.measure!r}")
        if self.values.ndim != 1 or len(self.values) < 1:
            raise ValueError("curve needs a 1-d value array")
        if abs(self.values[0]) > _TOL:
            raise ValueError(f"curve must start at 0, got {self.values[0]}")
        if np.any(np.diff(self.values) < -_TOL):
            raise ValueError("curve values must be non-decreasing")

    @property
    def horizon(self) -> int:
        """Last period index T."""
        return len(self.values) - 1

    @property
    def final(self) -> float:
        return float(self.values[-1])

    def value_at(self, t: float) -> float:
        """Linear interpolation of the curve at real time t."""
        if t < -_TOL or t > self.horizon + _TOL:
            raise ValueError(f"time {t} outside curve range [0, {self.horizon}]")
        return float(np.interp(t, np.arange(len(self.values)), self.values))

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"# measure: {self.measure}\n")
            fh.write("period,value\n")
            for p, v in enumerate(self.values):
                fh.write(f"{p},{float(v)!r}\n")

    @classmethod
    def read(cls, path) -> "CumulativeCurve":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        if not lines or not lines[0].startswith("# measure:"):
            raise ValueError(f"{path}: not a curve file (missing measure header)")
        measure = lines[0].split(":", 1)[1].strip()
        values = [float(line.split(",")[1]) for line in lines[2:] if line]
        return cls(measure=measure, values=np.array(values))


def _weight(activity: Activity, measure: str) -> float:
    """Value of one work period of the activity under the measure."""
    if measure == MEASURE_WORK:
        return 1.0
    if measure == MEASURE_COST:
        if activity.cost_per_period is None:
            raise ValueError(f"activity '{activity.id}' has no cost_per_period")
        return float(activity.cost_per_period)
    raise ValueError(f"unknown measure {measure!r}")


def _accumulate(spans: list[tuple[float, float, float]], horizon: int) -> np.ndarray:
    """Cumulative curve from (start, finish, rate-per-work-period) spans.

    Period p covers the time interval (p-1, p]; a span contributes
    rate * overlap(span, period) to each period it touches.
    """
    inc = np.zeros(horizon + 1)
    for s, f, rate in spans:
        p0 = int(math.floor(s + 1e-12))
        p1 = min(int(math.ceil(f - 1e-12)), horizon)
        if p1 <= p0:
            continue
        periods = np.arange(p0 + 1, p1 + 1, dtype=float)
        overlap = np.minimum(periods, f) - np.maximum(periods - 1.0, s)
        inc[p0 + 1 : p1 + 1] += rate * np.clip(overlap, 0.0, None)
    return np.concatenate(([0.0], np.cumsum(inc[1:])))


def planned_curve(
    network: ProjectNetwork, schedule: Schedule, measure: str = MEASURE_WORK
) -> CumulativeCurve:
    """Planned cumulative curve (TPD for work periods, PV for cost)."""
    horizon = int(math.ceil(schedule.project_duration - 1e-12))
    spans = [
        (schedule.start[a.id], schedule.finish[a.id], _weight(a, measure))
        for a in network.activities
    ]
    return CumulativeCurve(measure=measure, values=_accumulate(spans, horizon))


def realized_curves(
    network: ProjectNetwork,
    durations: dict[str, float],
    schedule: Schedule,
    measure: str = MEASURE_WORK,
) -> tuple[CumulativeCurve, CumulativeCurve]:
    """Earned and actual curves of one executed realization.

    Per performed work period, activity i earns planned_value_i / AD_i and
    spends one work period (times its cost rate under the cost measure), so
    the earned curve ends exactly at the planned total.
    """
    horizon = int(math.ceil(schedule.project_duration - 1e-12))
    earned_spans = []
    actual_spans = []
    for a in network.activities:
        s, f = schedule.start[a.id], schedule.finish[a.id]
        ad = durations[a.id]
        w = _weight(a, measure)
        earned_spans.append((s, f, a.pd * w / ad))
        actual_spans.append((s, f, w))
    earned = CumulativeCurve(measure=measure, values=_accumulate(earned_spans, horizon))
    actual = CumulativeCurve(measure=measure, values=_accumulate(actual_spans, horizon))
    return earned, actual


# ---------------------------------------------------------------------------
# Tracking logs (the underway project, observed period by period)
# ---------------------------------------------------------------------------

@dataclass
class TrackingLog:
    """Period-by-period observation of the underway project.

    worked[p-1, i] flags whether activity i was performed during period p;
    completion[p-1, i] is its cumulative completion fraction at the end of
    period p. Completion fractions are carried forward for idle periods.
    """

    activity_ids: tuple[str, ...]
    worked: np.ndarray  # bool, shape (P, n)
    completion: np.ndarray  # float, shape (P, n)

    def __post_init__(self):
        self.worked = np.asarray(self.worked, dtype=bool)
        self.completion = np.asarray(self.completion, dtype=float)
        P, n = self.completion.shape
        if self.worked.shape != (P, n) or n != len(self.activity_ids):
            raise ValueError("tracking log shapes do not line up")
        if np.any(self.completion < -_TOL) or np.any(self.completion > 1 + 1e-9):
            raise ValueError("completion fractions must lie in [0, 1]")
        prev = np.vstack([np.zeros(n), self.completion[:-1]])
        delta = self.completion - prev
        if np.any(delta < -1e-9):
            p, i = np.argwhere(delta < -1e-9)[0]
            raise ValueError(
                f"completion of '{self.activity_ids[i]}' decreases at period {p + 1}"
            )
        stalled = self.worked & (delta <= 1e-12)
        if np.any(stalled):
            p, i = np.argwhere(stalled)[0]
            raise ValueError(
                f"activity '{self.activity_ids[i]}' worked in period {p + 1} "
                "with no completion increase"
            )
        self.completion = np.clip(self.completion, 0.0, 1.0)

    @property
    def horizon(self) -> int:
        """Latest tracked period."""
        return self.completion.shape[0]

    def is_complete(self) -> bool:
        return bool(np.all(self.completion[-1] >= 1.0 - 1e-12))

    @classmethod
    def from_periods(cls, activity_ids, periods) -> "TrackingLog":
        """Build from sparse per-period entries.

        `periods` is an iterable of (period_index, {activity_id: (worked,
        completion)}) in increasing period order starting at 1; activities
        missing from a period carry their previous completion and are idle.
        """
        ids = tuple(activity_ids)
        index = {a: k for k, a in enumerate(ids)}
        rows_worked, rows_pc = [], []
        current = np.zeros(len(ids))
        expected = 1
        for period, entries in periods:
            if period != expected:
                raise ValueError(f"tracking periods must be 1,2,...; got {period}")
            expected += 1
            worked = np.zeros(len(ids), dtype=bool)
            current = current.copy()
            for aid, (w, pc) in entries.items():
                if aid not in index:
                    raise ValueError(f"tracking entry for unknown activity '{aid}'")
                worked[index[aid]] = bool(w)
                current[index[aid]] = float(pc)
            rows_worked.append(worked)
            rows_pc.append(current)
        if not rows_pc:
            raise ValueError("tracking log has no periods")
        return cls(ids, np.array(rows_worked), np.array(rows_pc))


def tracking_curves(
    network: ProjectNetwork, log: TrackingLog, measure: str = MEASURE_WORK
) -> tuple[CumulativeCurve, CumulativeCurve]:
    """Earned and actual curves of the underway project up to the last
    tracked period. Earned value at p is sum_i planned_value_i * pc_i(p);
    actual value counts one work period per activity performed."""
    ids = [a.id for a in network.activities]
    if set(ids) != set(log.activity_ids):
        raise ValueError("tracking log activities do not match the network")
    order = [log.activity_ids.index(i) for i in ids]
    pc = log.completion[:, order]
    worked = log.worked[:, order]
    weights = np.array([_weight(network.by_id[i], measure) for i in ids])
    planned_values = np.array([network.by_id[i].planned_value(measure) for i in ids])
    earned = np.concatenate(([0.0], pc @ planned_values))
    actual = np.concatenate(([0.0], np.cumsum(worked @ weights)))
    return (
        CumulativeCurve(measure=measure, values=earned),
        CumulativeCurve(measure=measure, values=actual),
    )


def tracking_from_schedule(
    network: ProjectNetwork, durations: dict[str, float], schedule: Schedule
) -> TrackingLog:
    """Tracking log of an executed realization under uniform progress
    (each performed work period advances completion by its share of AD_i)."""
    horizon = int(math.ceil(schedule.project_duration - 1e-12))
    periods = []
    done: dict[str, float] = {a.id: 0.0 for a in network.activities}
    for p in range(1, horizon + 1):
        entries = {}
        for a in network.activities:
            s, f = schedule.start[a.id], schedule.finish[a.id]
            overlap = min(p, f) - max(p - 1, s)
            if overlap > 1e-12:
                done[a.id] += overlap
                pc = done[a.id] / durations[a.id]
                entries[a.id] = (True, 1.0 if pc > 1.0 - 1e-12 else pc)
        periods.append((p, entries))
    return TrackingLog.from_periods([a.id for a in network.activities], periods)


# ---------------------------------------------------------------------------
# Earned time, progress index, deterministic forecast
# ---------------------------------------------------------------------------

def earned_time(planned: CumulativeCurve, earned_value: float) -> float:
    """Invert the planned curve: the time at which it reaches earned_value.

    Uses the last period t with value(t) <= earned_value and interpolates
    linearly inside the segment [t, t+1]; flat segments therefore resolve
    to their right edge. Reaching the final value returns the curve end.
    """
    values = planned.values
    final = float(values[-1])
    if earned_value < -_TOL or earned_value > final + max(1.0, abs(final)) * _TOL:
        raise ValueError(
            f"earned value {earned_value} outside curve range [0, {final}]"
        )
    earned_value = min(max(earned_value, 0.0), final)
    if earned_value >= final:
        return float(planned.horizon)
    t = int(np.searchsorted(values, earned_value, side="right")) - 1
    return float(t + (earned_value - values[t]) / (values[t + 1] - values[t]))


def ppi(ed_t: float, bpd: float) -> float:
    """Project progress index: earned time over baseline planned duration."""
    if bpd <= 0:
        raise ValueError("bpd must be positive")
    if not -_TOL <= ed_t <= bpd + _TOL:
        raise ValueError(f"earned time {ed_t} outside [0, {bpd}]")
    return min(max(ed_t / bpd, 0.0), 1.0)


def esm_forecast(ad: float, es: float, bpd: float) -> float:
    """Earned-schedule duration forecast: AD + remaining planned time divided
    by the schedule performance index ES/AD. Degenerate inputs (nothing
    elapsed or nothing earned) fall back to the planned duration."""
    if ad < 0 or es < -_TOL or es > bpd + _TOL:
        raise ValueError(f"need ad >= 0 and 0 <= es <= bpd, got ad={ad}, es={es}")
    if ad == 0 or es <= 0:
        return float(bpd)
    return float(ad + (bpd - es) / (es / ad))


@dataclass(frozen=True)
class ControlSnapshot:
    """The underway project's state at a control milestone."""

    ad: int
    tad: float
    ted: float
    ed_t: float
    ppi: float
    bpd: float
    planned_total: float
    measure: str = MEASURE_WORK
    fingerprint: str | None = None


def control_snapshot(
    network: ProjectNetwork,
    log: TrackingLog,
    ad: int,
    planned: CumulativeCurve | None = None,
    measure: str = MEASURE_WORK,
) -> ControlSnapshot:
    """Evaluate the tracked project at period ad against the planned curve."""
    if not 0 <= ad <= log.horizon:
        raise ValueError(f"control period {ad} outside tracked range [0, {log.horizon}]")
    if planned is None:
        from sedm.network import baseline_schedule

        planned = planned_curve(network, baseline_schedule(network), measure)
    earned, actual = tracking_curves(network, log, measure)
    ted = float(earned.values[ad])
    tad = float(actual.values[ad])
    ed_t = earned_time(planned, ted)
    bpd = float(planned.horizon)
    return ControlSnapshot(
        ad=ad,
        tad=tad,
        ted=ted,
        ed_t=ed_t,
        ppi=ppi(ed_t, bpd),
        bpd=bpd,
        planned_total=planned.final,
        measure=measure,
        fingerprint=network.fingerprint(),
    )

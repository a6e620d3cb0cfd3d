"""Bundled example projects.

`residential13` mirrors the aggregate shape of a published residential
construction schedule: 13 activities over 9 progressive levels, a baseline
of 126 periods and 141 planned workdays in total. The activity-level data
is synthetic; only those aggregates are meaningful.
"""

from __future__ import annotations

import json

import numpy as np

from sedm import curves, simulate
from sedm.network import (
    Activity,
    Discrete,
    ProjectNetwork,
    Triangular,
    network_to_dict,
    validated,
)


def _tri(pd: int, down: float = 0.24, up: float = 0.28) -> Triangular:
    """Lightly right-skewed triangular around the planned duration."""
    return Triangular(
        optimistic=round(pd * (1 - down), 1),
        most_likely=float(pd),
        pessimistic=round(pd * (1 + up), 1),
    )


def residential13() -> ProjectNetwork:
    """13 activities, BPD 126, total planned work 141, n_s 9, SP 8/12."""
    chain = [
        ("A1", 14, ()),
        ("A2", 16, ("A1",)),
        ("A3", 12, ("A2", "B1")),
        ("A4", 18, ("A3",)),
        ("A5", 15, ("A4", "B2")),
        ("A6", 13, ("A5",)),
        ("A7", 14, ("A6", "B3")),
        ("A8", 12, ("A7",)),
        ("A9", 12, ("A8", "B4")),
    ]
    side = [
        ("B1", 4, ("A1",)),
        ("B2", 3, ("A3",)),
        ("B3", 5, ("A5",)),
        ("B4", 3, ("A7",)),
    ]
    costs = {
        "A1": 30.0, "A2": 55.0, "A3": 40.0, "A4": 70.0, "A5": 45.0,
        "A6": 35.0, "A7": 60.0, "A8": 25.0, "A9": 50.0,
        "B1": 20.0, "B2": 15.0, "B3": 28.0, "B4": 18.0,
    }
    activities = [
        Activity(
            id=aid,
            pd=pd,
            distribution=_tri(pd),
            predecessors=preds,
            name=f"work package {aid}",
            cost_per_period=costs[aid],
        )
        for aid, pd, preds in chain + side
    ]
    return validated(ProjectNetwork(activities, name="residential-structural-13"))


def milestone_demo() -> ProjectNetwork:
    """Small network whose planned curve passes 52 at period 49 and 53 at
    period 50, with a 126-period baseline; used to demo milestone control."""
    activities = [
        Activity("A", 30, _tri(30), (), "groundworks", 12.0),
        Activity("B", 3, _tri(3), (), "site setup", 8.0),
        Activity("E", 19, _tri(19), ("A",), "frame", 20.0),
        Activity("C", 20, _tri(20), ("E",), "envelope", 25.0),
        Activity("G", 57, _tri(57), ("C",), "fit-out", 18.0),
    ]
    return validated(ProjectNetwork(activities, name="milestone-demo"))


def milestone_demo_tracking() -> curves.TrackingLog:
    """An ahead-of-schedule execution of milestone_demo, tracked to period 45:
    A, B and E are finished and C has just started, so the earned duration
    at period 45 is 52.54 work periods."""
    net = milestone_demo()
    periods = []
    # A runs periods 1..28 (faster than its 30-day plan), B runs 1..3
    for p in range(1, 29):
        entries = {"A": (True, 1.0 if p == 28 else p / 28)}
        if p <= 3:
            entries["B"] = (True, p / 3)
        periods.append((p, entries))
    # E runs 29..44
    for p in range(29, 45):
        periods.append((p, {"E": (True, 1.0 if p == 44 else (p - 28) / 16)}))
    # C starts early in period 45: earned 52 + 20 * 0.027 = 52.54
    periods.append((45, {"C": (True, 0.027)}))
    return curves.TrackingLog.from_periods([a.id for a in net.activities], periods)


def discrete_parallel() -> ProjectNetwork:
    """3-activity fan-out X -> {Y, Z} with two-point discrete durations:
    8 scenarios, exhaustively enumerable, and milestones inside the parallel
    stretch land on a small set of exactly computable cloud points."""
    activities = [
        Activity("X", 6, Discrete(((4.0, 0.5), (8.0, 0.5))), (), "prepare", 10.0),
        Activity("Y", 7, Discrete(((7.0, 0.6), (14.0, 0.4))), ("X",), "left branch", 10.0),
        Activity("Z", 4, Discrete(((4.0, 0.5), (8.0, 0.5))), ("X",), "right branch", 10.0),
    ]
    return validated(ProjectNetwork(activities, name="discrete-parallel"))


def discrete_chain() -> ProjectNetwork:
    """3-activity serial chain with two-point discrete durations."""
    activities = [
        Activity("X", 5, Discrete(((4.0, 0.5), (6.0, 0.5))), (), "first", 10.0),
        Activity("Y", 5, Discrete(((5.0, 0.6), (7.0, 0.4))), ("X",), "second", 10.0),
        Activity("Z", 4, Discrete(((3.0, 0.7), (6.0, 0.3))), ("Y",), "third", 10.0),
    ]
    return validated(ProjectNetwork(activities, name="discrete-chain"))


def zero_variance_chain() -> ProjectNetwork:
    """Chain whose durations are point masses at the planned values."""
    pds = [("P", 4), ("Q", 3), ("R", 5)]
    activities = []
    prev: tuple[str, ...] = ()
    for aid, pd in pds:
        activities.append(
            Activity(aid, pd, Discrete(((float(pd), 1.0),)), prev, cost_per_period=10.0)
        )
        prev = (aid,)
    return validated(ProjectNetwork(activities, name="zero-variance-chain"))


def sampled_tracking(
    network: ProjectNetwork, seed: int
) -> tuple[curves.TrackingLog, float]:
    """One full 'actual execution' of the network: sample a realization,
    schedule it, and express it as a period-by-period tracking log.
    Returns the log and the realized duration."""
    rng = simulate.run_rng(seed, 0)
    realization = simulate.realize(network, rng)
    from sedm.network import forward_pass

    schedule = forward_pass(network, realization.durations)
    log = curves.tracking_from_schedule(network, realization.durations, schedule)
    return log, schedule.project_duration


def write_project_file(network: ProjectNetwork, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(network_to_dict(network), fh, indent=2)
        fh.write("\n")


def write_tracking_file(log: curves.TrackingLog, path) -> None:
    doc = {"periods": []}
    for p in range(1, log.horizon + 1):
        prev = log.completion[p - 2] if p >= 2 else np.zeros(len(log.activity_ids))
        entries = []
        for k, aid in enumerate(log.activity_ids):
            worked = bool(log.worked[p - 1, k])
            changed = abs(log.completion[p - 1, k] - prev[k]) > 1e-12
            if worked or changed:
                entries.append(
                    {
                        "activity": aid,
                        "worked": worked,
                        "completion": float(log.completion[p - 1, k]),
                    }
                )
        doc["periods"].append({"period": p, "entries": entries})
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")

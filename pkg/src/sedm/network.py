"""Activity network model: duration distributions, precedence DAG, CPM forward pass.

Durations are expressed in work periods on a unitary calendar (one period =
one work day for every activity). Precedence is finish-to-start with zero
lag; anything else is rejected at validation.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Union


class CycleError(ValueError):
    """The precedence graph contains a cycle."""


# ---------------------------------------------------------------------------
# Duration distributions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Triangular:
    """Triangular(optimistic, most-likely, pessimistic) in work periods."""

    optimistic: float
    most_likely: float
    pessimistic: float

    kind = "triangular"

    def check(self) -> list[str]:
        a, m, b = self.optimistic, self.most_likely, self.pessimistic
        issues = []
        if not (a <= m <= b):
            issues.append(f"triangular parameters out of order: ({a}, {m}, {b})")
        if a >= b:
            issues.append(f"triangular needs optimistic < pessimistic, got ({a}, {b})")
        if a <= 0:
            issues.append(f"triangular optimistic must be > 0, got {a}")
        return issues

    def support(self) -> tuple[float, float]:
        return (self.optimistic, self.pessimistic)

    def mean(self) -> float:
        return (self.optimistic + self.most_likely + self.pessimistic) / 3.0

    def params(self) -> dict:
        return {
            "optimistic": self.optimistic,
            "most_likely": self.most_likely,
            "pessimistic": self.pessimistic,
        }


@dataclass(frozen=True)
class Uniform:
    low: float
    high: float

    kind = "uniform"

    def check(self) -> list[str]:
        issues = []
        if not self.low < self.high:
            issues.append(f"uniform needs low < high, got ({self.low}, {self.high})")
        if self.low <= 0:
            issues.append(f"uniform low must be > 0, got {self.low}")
        return issues

    def support(self) -> tuple[float, float]:
        return (self.low, self.high)

    def mean(self) -> float:
        return 0.5 * (self.low + self.high)

    def params(self) -> dict:
        return {"low": self.low, "high": self.high}


@dataclass(frozen=True)
class Normal:
    """Normal(mean, sd), truncated below 0.01 work periods when sampled."""

    mean_: float
    sd: float

    kind = "normal"

    def check(self) -> list[str]:
        issues = []
        if self.sd <= 0:
            issues.append(f"normal sd must be > 0, got {self.sd}")
        if self.mean_ <= 0:
            issues.append(f"normal mean must be > 0, got {self.mean_}")
        return issues

    def support(self) -> tuple[float, float]:
        return (0.01, math.inf)

    def mean(self) -> float:
        return self.mean_

    def params(self) -> dict:
        return {"mean": self.mean_, "sd": self.sd}


@dataclass(frozen=True)
class Discrete:
    """Finite support: tuple of (value, probability) atoms."""

    atoms: tuple[tuple[float, float], ...]

    kind = "discrete"

    def check(self) -> list[str]:
        issues = []
        if not self.atoms:
            issues.append("discrete distribution has no atoms")
            return issues
        total = sum(p for _, p in self.atoms)
        if abs(total - 1.0) > 1e-9:
            issues.append(f"discrete probabilities sum to {total!r}, not 1")
        for v, p in self.atoms:
            if v <= 0:
                issues.append(f"discrete value must be > 0, got {v}")
            if p < 0:
                issues.append(f"discrete probability must be >= 0, got {p}")
        return issues

    def support(self) -> tuple[float, float]:
        values = [v for v, _ in self.atoms]
        return (min(values), max(values))

    def mean(self) -> float:
        return sum(v * p for v, p in self.atoms)

    def params(self) -> dict:
        return {"values": [[v, p] for v, p in self.atoms]}


DurationDistribution = Union[Triangular, Uniform, Normal, Discrete]

_DIST_KINDS = {cls.kind: cls for cls in (Triangular, Uniform, Normal, Discrete)}


def distribution_from_dict(doc: Mapping) -> DurationDistribution:
    """Build a distribution from its file representation ({"type": ..., params})."""
    kind = doc.get("type")
    if kind == "triangular":
        return Triangular(doc["optimistic"], doc["most_likely"], doc["pessimistic"])
    if kind == "uniform":
        return Uniform(doc["low"], doc["high"])
    if kind == "normal":
        return Normal(doc["mean"], doc["sd"])
    if kind == "discrete":
        return Discrete(tuple((float(v), float(p)) for v, p in doc["values"]))
    raise ValueError(f"unknown distribution type {kind!r} (known: {sorted(_DIST_KINDS)})")


def distribution_to_dict(dist: DurationDistribution) -> dict:
    return {"type": dist.kind, **dist.params()}


# ---------------------------------------------------------------------------
# Activities and networks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Activity:
    id: str
    pd: int
    distribution: DurationDistribution
    predecessors: tuple[str, ...] = ()
    name: str = ""
    cost_per_period: float | None = None

    def planned_value(self, measure: str) -> float:
        """Planned value of this activity: pd work periods, or pd * cost rate."""
        from sedm import curves  # local import to avoid a cycle

        if measure == curves.MEASURE_WORK:
            return float(self.pd)
        if measure == curves.MEASURE_COST:
            if self.cost_per_period is None:
                raise ValueError(f"activity '{self.id}' has no cost_per_period")
            return float(self.pd) * self.cost_per_period
        raise ValueError(f"unknown measure {measure!r}")


@dataclass
class ProjectNetwork:
    """A project: activities plus the finish-to-start precedence relation."""

    activities: tuple[Activity, ...]
    name: str = "project"

    def __init__(self, activities, name: str = "project"):
        self.activities = tuple(activities)
        self.name = name

    @cached_property
    def by_id(self) -> dict[str, Activity]:
        return {a.id: a for a in self.activities}

    @property
    def n_t(self) -> int:
        return len(self.activities)

    @cached_property
    def tpd_final(self) -> float:
        """Total planned work periods, sum of pd over activities."""
        return float(sum(a.pd for a in self.activities))

    @cached_property
    def topo_order(self) -> tuple[str, ...]:
        """Activity ids in a precedence-respecting order (Kahn). Raises CycleError."""
        indeg = {a.id: len(a.predecessors) for a in self.activities}
        succ: dict[str, list[str]] = {a.id: [] for a in self.activities}
        for a in self.activities:
            for p in a.predecessors:
                if p in succ:
                    succ[p].append(a.id)
        ready = [i for i, d in indeg.items() if d == 0]
        order = []
        while ready:
            node = ready.pop()
            order.append(node)
            for s in succ[node]:
                indeg[s] -= 1
                if indeg[s] == 0:
                    ready.append(s)
        if len(order) != len(indeg):
            edge = _find_cycle_edge(self)
            raise CycleError(f"precedence cycle through edge {edge[0]} -> {edge[1]}")
        return tuple(order)

    @cached_property
    def levels(self) -> dict[str, int]:
        """Progressive level of each activity: 1 + max level over predecessors."""
        lev: dict[str, int] = {}
        for i in self.topo_order:
            preds = self.by_id[i].predecessors
            lev[i] = 1 + max((lev[p] for p in preds), default=0)
        return lev

    @property
    def n_s(self) -> int:
        """Number of progressive levels (longest chain length in activities)."""
        return max(self.levels.values())

    def fingerprint(self) -> str:
        """Content hash of the project definition, for store/network pairing."""
        doc = network_to_dict(self)
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def has_costs(self) -> bool:
        return all(a.cost_per_period is not None for a in self.activities)


def _find_cycle_edge(network: ProjectNetwork) -> tuple[str, str]:
    """Locate one predecessor edge lying on a cycle, for error reporting."""
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {a.id: WHITE for a in network.activities}

    def visit(node: str) -> tuple[str, str] | None:
        color[node] = GRAY
        for p in network.by_id[node].predecessors:
            if p not in color:
                continue
            if color[p] == GRAY:
                return (p, node)
            if color[p] == WHITE:
                found = visit(p)
                if found:
                    return found
        color[node] = BLACK
        return None

    for a in network.activities:
        if color[a.id] == WHITE:
            found = visit(a.id)
            if found:
                return found
    raise AssertionError("no cycle found")  # caller checked with Kahn


def network_to_dict(network: ProjectNetwork) -> dict:
    return {
        "name": network.name,
        "activities": [
            {
                "id": a.id,
                "name": a.name,
                "predecessors": list(a.predecessors),
                "pd": a.pd,
                "distribution": distribution_to_dict(a.distribution),
                **({"cost_per_period": a.cost_per_period} if a.cost_per_period is not None else {}),
            }
            for a in network.activities
        ],
    }


def network_from_dict(doc: Mapping) -> ProjectNetwork:
    activities = []
    for item in doc.get("activities", []):
        activities.append(
            Activity(
                id=str(item["id"]),
                pd=item["pd"],
                distribution=distribution_from_dict(item["distribution"]),
                predecessors=tuple(str(p) for p in item.get("predecessors", [])),
                name=str(item.get("name", "")),
                cost_per_period=item.get("cost_per_period"),
            )
        )
    return ProjectNetwork(activities, name=str(doc.get("name", "project")))


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def validate(network: ProjectNetwork) -> list[str]:
    """Check every network invariant; return one message per violation.

    An empty list means the network is well formed. Messages carry the
    offending activity id so they can be surfaced to file authors.
    """
    issues: list[str] = []
    if not network.activities:
        return ["network has no activities"]

    seen: set[str] = set()
    for a in network.activities:
        if a.id in seen:
            issues.append(f"duplicate activity id '{a.id}'")
        seen.add(a.id)

    ids = {a.id for a in network.activities}
    for a in network.activities:
        if not isinstance(a.pd, int) or a.pd < 1:
            issues.append(f"activity '{a.id}': pd must be an integer >= 1, got {a.pd!r}")
        for p in a.predecessors:
            if p == a.id:
                issues.append(f"activity '{a.id}' lists itself as predecessor")
            elif p not in ids:
                issues.append(f"activity '{a.id}': unknown predecessor id '{p}'")
        if a.cost_per_period is not None and a.cost_per_period < 0:
            issues.append(f"activity '{a.id}': cost_per_period must be >= 0")
        for msg in a.distribution.check():
            issues.append(f"activity '{a.id}': {msg}")

    try:
        network.topo_order
    except CycleError as exc:
        issues.append(str(exc))
    return issues


def validated(network: ProjectNetwork) -> ProjectNetwork:
    """Raise ValueError listing all violations if the network is invalid."""
    issues = validate(network)
    if issues:
        raise ValueError("invalid project network:\n  " + "\n  ".join(issues))
    return network


# ---------------------------------------------------------------------------
# Topology indicator and CPM
# ---------------------------------------------------------------------------

def progressive_levels(network: ProjectNetwork) -> tuple[dict[str, int], int]:
    """Per-activity progressive level and the depth n_s."""
    levels = network.levels
    return levels, max(levels.values())


def serial_parallel_indicator(n_s: int, n_t: int) -> float:
    """Topology indicator (n_s - 1) / (n_t - 1): 1 = fully serial, 0 = fully parallel."""
    if n_t == 1:
        raise ValueError("serial/parallel indicator undefined for a single activity")
    if not 1 <= n_s <= n_t:
        raise ValueError(f"need 1 <= n_s <= n_t, got n_s={n_s}, n_t={n_t}")
    return (n_s - 1) / (n_t - 1)


@dataclass(frozen=True)
class Schedule:
    """Earliest-start schedule. Activity i occupies the half-open span
    [start[i], finish[i]); the baseline schedule has integral values, a
    simulated one generally does not."""

    start: dict[str, float]
    finish: dict[str, float]
    project_duration: float


def forward_pass(network: ProjectNetwork, durations: Mapping[str, float]) -> Schedule:
    """CPM forward pass: start(i) = max finish over predecessors, 0 if none."""
    start: dict[str, float] = {}
    finish: dict[str, float] = {}
    for i in network.topo_order:
        try:
            d = durations[i]
        except KeyError:
            raise ValueError(f"missing duration for activity '{i}'") from None
        if d <= 0:
            raise ValueError(f"duration for activity '{i}' must be > 0, got {d}")
        preds = network.by_id[i].predecessors
        s = max((finish[p] for p in preds), default=0.0)
        start[i] = s
        finish[i] = s + d
    return Schedule(start=start, finish=finish, project_duration=max(finish.values()))


def baseline_schedule(network: ProjectNetwork) -> Schedule:
    """Deterministic schedule from planned durations; its duration is the BPD."""
    return forward_pass(network, {a.id: float(a.pd) for a in network.activities})

"""Monte Carlo execution of a project network.

Every run draws its activity durations from an independent substream keyed
by (master_seed, run_id), so results are bit-identical for a fixed master
seed no matter how runs are ordered or distributed across workers.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from statistics import NormalDist

import numpy as np

from sedm import curves
from sedm.network import (
    Discrete,
    DurationDistribution,
    Normal,
    ProjectNetwork,
    Triangular,
    Uniform,
    baseline_schedule,
    forward_pass,
)

GENERATOR_ID = "pcg64:seedseq(master_seed,run_id)"

_NORMAL_FLOOR = 0.01  # work periods; normal draws below this are rejected
_STD_NORMAL = NormalDist()


class FingerprintMismatch(ValueError):
    """A store was paired with a network it was not simulated from."""


class StoreFormatError(ValueError):
    """A store file is malformed."""


@dataclass(frozen=True)
class RunConfig:
    n_runs: int = 25_000
    master_seed: int = 20_210
    value_measure: str = curves.MEASURE_WORK
    store_trajectories: bool = True

    def __post_init__(self):
        if self.n_runs < 1:
            raise ValueError(f"n_runs must be >= 1, got {self.n_runs}")
        if self.value_measure not in curves.MEASURES:
            raise ValueError(f"unknown value measure {self.value_measure!r}")


@dataclass(frozen=True)
class Realization:
    """One set of sampled activity durations."""

    run_id: int
    durations: dict[str, float]


@dataclass(frozen=True)
class TrajectoryRecord:
    """Outcome of one simulated run: final figures plus the full curves."""

    run_id: int
    afd: float
    tad_final: float
    delay_flag: int
    overwork_flag: int
    delay_amount: float
    overwork_amount: float
    ted: np.ndarray | None  # earned curve, values per period 0..ceil(afd)
    tad: np.ndarray | None  # actual curve


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def sample_duration(dist: DurationDistribution, u):
    """Inverse-CDF transform of a uniform variate u in [0, 1).

    Accepts scalars or numpy arrays. The normal kind needs rejection and
    therefore has no single-variate inverse here; use sample_from.
    """
    if isinstance(dist, Triangular):
        a, m, b = dist.optimistic, dist.most_likely, dist.pessimistic
        cut = (m - a) / (b - a)
        lo = a + np.sqrt(np.asarray(u) * (b - a) * (m - a))
        hi = b - np.sqrt((1.0 - np.asarray(u)) * (b - a) * (b - m))
        out = np.where(np.asarray(u) < cut, lo, hi)
        return float(out) if np.ndim(u) == 0 else out
    if isinstance(dist, Uniform):
        out = dist.low + np.asarray(u) * (dist.high - dist.low)
        return float(out) if np.ndim(u) == 0 else out
    if isinstance(dist, Discrete):
        values = np.array([v for v, _ in dist.atoms])
        cum = np.cumsum([p for _, p in dist.atoms])
        cum[-1] = 1.0
        idx = np.searchsorted(cum, np.asarray(u), side="right")
        out = values[np.minimum(idx, len(values) - 1)]
        return float(out) if np.ndim(u) == 0 else out
    if isinstance(dist, Normal):
        raise ValueError(
            "truncated normal sampling needs a variate stream; use sample_from"
        )
    raise TypeError(f"unknown distribution {dist!r}")


def sample_from(dist: DurationDistribution, rng: np.random.Generator) -> float:
    """Draw one duration, consuming as many uniforms as the kind needs."""
    if isinstance(dist, Normal):
        # inverse-CDF draws, rejecting anything below the positivity floor
        while True:
            x = dist.mean_ + dist.sd * _STD_NORMAL.inv_cdf(rng.random())
            if x >= _NORMAL_FLOOR:
                return x
    return sample_duration(dist, rng.random())


def realize(network: ProjectNetwork, rng: np.random.Generator, run_id: int = 0) -> Realization:
    """Sample one duration per activity, in network order."""
    return Realization(
        run_id=run_id,
        durations={a.id: sample_from(a.distribution, rng) for a in network.activities},
    )


def run_rng(master_seed: int, run_id: int) -> np.random.Generator:
    """The substream owned by one run."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((master_seed, run_id))))


# ---------------------------------------------------------------------------
# Outcome classification
# ---------------------------------------------------------------------------

def classify_outcome(
    afd: float, tad_final: float, bpd: float, planned_total: float
) -> tuple[int, int, float, float]:
    """Flags and signed deviations against the plan. Finishing exactly on
    the baseline duration counts as not behind schedule."""
    delay_flag = 1 if afd > bpd else 0
    overwork_flag = 1 if tad_final > planned_total else 0
    return delay_flag, overwork_flag, afd - bpd, tad_final - planned_total


# ---------------------------------------------------------------------------
# Simulation store
# ---------------------------------------------------------------------------

class SimulationStore:
    """Immutable collection of simulated trajectories plus provenance."""

    def __init__(
        self,
        config: RunConfig,
        fingerprint: str,
        records: list[TrajectoryRecord],
        bpd: float,
        planned_total: float,
        generator_id: str = GENERATOR_ID,
    ):
        if len(records) != config.n_runs:
            raise ValueError(
                f"record count {len(records)} does not match n_runs {config.n_runs}"
            )
        self.config = config
        self.fingerprint = fingerprint
        self.records = records
        self.bpd = bpd
        self.planned_total = planned_total
        self.generator_id = generator_id
        self._matrices: tuple[np.ndarray, np.ndarray] | None = None

    @property
    def n_runs(self) -> int:
        return self.config.n_runs

    def has_trajectories(self) -> bool:
        return all(r.ted is not None for r in self.records)

    def finals(self) -> dict[str, np.ndarray]:
        return {
            "afd": np.array([r.afd for r in self.records]),
            "tad_final": np.array([r.tad_final for r in self.records]),
            "delay_flag": np.array([r.delay_flag for r in self.records]),
            "overwork_flag": np.array([r.overwork_flag for r in self.records]),
            "delay_amount": np.array([r.delay_amount for r in self.records]),
            "overwork_amount": np.array([r.overwork_amount for r in self.records]),
        }

    def curve_matrices(self) -> tuple[np.ndarray, np.ndarray]:
        """Trajectories padded to a common horizon with their final values.

        Rows are runs in run_id order; padding keeps each curve constant
        past its own end, which is exactly how the curves extend in time.
        """
        if self._matrices is None:
            if not self.has_trajectories():
                raise ValueError("store was built without trajectories")
            width = max(len(r.ted) for r in self.records)
            ted = np.empty((len(self.records), width))
            tad = np.empty((len(self.records), width))
            for k, r in enumerate(self.records):
                ted[k, : len(r.ted)] = r.ted
                ted[k, len(r.ted) :] = r.ted[-1]
                tad[k, : len(r.tad)] = r.tad
                tad[k, len(r.tad) :] = r.tad[-1]
            self._matrices = (ted, tad)
        return self._matrices

    def check_fingerprint(self, network: ProjectNetwork) -> None:
        if network.fingerprint() != self.fingerprint:
            raise FingerprintMismatch(
                "store fingerprint does not match the supplied network"
            )


def _simulate_one(
    network: ProjectNetwork,
    config: RunConfig,
    run_id: int,
    bpd: float,
    planned_total: float,
) -> TrajectoryRecord:
    rng = run_rng(config.master_seed, run_id)
    realization = realize(network, rng, run_id)
    schedule = forward_pass(network, realization.durations)
    earned, actual = curves.realized_curves(
        network, realization.durations, schedule, config.value_measure
    )
    afd = schedule.project_duration
    tad_final = actual.final
    delay_flag, overwork_flag, delay_amount, overwork_amount = classify_outcome(
        afd, tad_final, bpd, planned_total
    )
    return TrajectoryRecord(
        run_id=run_id,
        afd=afd,
        tad_final=tad_final,
        delay_flag=delay_flag,
        overwork_flag=overwork_flag,
        delay_amount=delay_amount,
        overwork_amount=overwork_amount,
        ted=earned.values,
        tad=actual.values,
    )


def run_simulation(
    network: ProjectNetwork, config: RunConfig, workers: int = 1
) -> SimulationStore:
    """Simulate n_runs executions of the network.

    The output is identical for a fixed master seed regardless of the
    worker count: runs never share state and records are assembled in
    run_id order.
    """
    bpd = baseline_schedule(network).project_duration
    planned_total = float(
        sum(a.planned_value(config.value_measure) for a in network.activities)
    )
    ids = range(config.n_runs)
    if workers <= 1:
        records = [_simulate_one(network, config, j, bpd, planned_total) for j in ids]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(
                pool.map(
                    lambda j: _simulate_one(network, config, j, bpd, planned_total),
                    ids,
                    chunksize=max(1, config.n_runs // (workers * 8)),
                )
            )
    if not config.store_trajectories:
        records = [replace(r, ted=None, tad=None) for r in records]
    return SimulationStore(
        config=config,
        fingerprint=network.fingerprint(),
        records=records,
        bpd=bpd,
        planned_total=planned_total,
    )


# ---------------------------------------------------------------------------
# Persistence: delimited text with a comment header
# ---------------------------------------------------------------------------

_FINAL_COLUMNS = (
    "run_id,afd,tad_final,delay_flag,overwork_flag,delay_amount,overwork_amount"
)
_TRAJECTORY_COLUMNS = "run_id,period,ted,tad"


def save_store(store: SimulationStore, path) -> None:
    cfg = store.config
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# sedm-store v1\n")
        fh.write(f"# generator: {store.generator_id}\n")
        fh.write(f"# fingerprint: {store.fingerprint}\n")
        fh.write(f"# n_runs: {cfg.n_runs}\n")
        fh.write(f"# master_seed: {cfg.master_seed}\n")
        fh.write(f"# value_measure: {cfg.value_measure}\n")
        fh.write(f"# store_trajectories: {str(cfg.store_trajectories).lower()}\n")
        fh.write(f"# bpd: {store.bpd!r}\n")
        fh.write(f"# planned_total: {store.planned_total!r}\n")
        fh.write(_FINAL_COLUMNS + "\n")
        for r in store.records:
            fh.write(
                f"{r.run_id},{r.afd!r},{r.tad_final!r},{r.delay_flag},"
                f"{r.overwork_flag},{r.delay_amount!r},{r.overwork_amount!r}\n"
            )
        if cfg.store_trajectories:
            fh.write("# trajectories\n")
            fh.write(_TRAJECTORY_COLUMNS + "\n")
            for r in store.records:
                for p in range(len(r.ted)):
                    fh.write(f"{r.run_id},{p},{float(r.ted[p])!r},{float(r.tad[p])!r}\n")


def load_store(path, network: ProjectNetwork | None = None) -> SimulationStore:
    """Read a store file back; verifies the fingerprint when a network is given."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != "# sedm-store v1":
        raise StoreFormatError(f"{path}: not a simulation store file")
    header: dict[str, str] = {}
    i = 1
    while i < len(lines) and lines[i].startswith("# "):
        key, _, value = lines[i][2:].partition(":")
        header[key.strip()] = value.strip()
        i += 1
    try:
        config = RunConfig(
            n_runs=int(header["n_runs"]),
            master_seed=int(header["master_seed"]),
            value_measure=header["value_measure"],
            store_trajectories=header["store_trajectories"] == "true",
        )
        bpd = float(header["bpd"])
        planned_total = float(header["planned_total"])
        generator_id = header["generator"]
        fingerprint = header["fingerprint"]
    except KeyError as exc:
        raise StoreFormatError(f"{path}: missing header field {exc}") from None
    if i >= len(lines) or lines[i] != _FINAL_COLUMNS:
        raise StoreFormatError(f"{path}: missing finals table header")
    i += 1
    finals = []
    while i < len(lines) and not lines[i].startswith("#"):
        parts = lines[i].split(",")
        if len(parts) != 7:
            raise StoreFormatError(f"{path}: bad finals row: {lines[i]!r}")
        finals.append(parts)
        i += 1
    if len(finals) != config.n_runs:
        raise StoreFormatError(
            f"{path}: finals table has {len(finals)} rows, header says {config.n_runs}"
        )
    curves_by_run: dict[int, tuple[list, list]] = {}
    if config.store_trajectories:
        if i >= len(lines) or lines[i] != "# trajectories":
            raise StoreFormatError(f"{path}: missing trajectories section")
        if lines[i + 1] != _TRAJECTORY_COLUMNS:
            raise StoreFormatError(f"{path}: missing trajectory table header")
        for line in lines[i + 2 :]:
            if not line:
                continue
            rid, period, ted, tad = line.split(",")
            slot = curves_by_run.setdefault(int(rid), ([], []))
            slot[0].append(float(ted))
            slot[1].append(float(tad))
    records = []
    for parts in finals:
        rid = int(parts[0])
        ted = tad = None
        if config.store_trajectories:
            if rid not in curves_by_run:
                raise StoreFormatError(f"{path}: no trajectory rows for run {rid}")
            ted = np.array(curves_by_run[rid][0])
            tad = np.array(curves_by_run[rid][1])
        records.append(
            TrajectoryRecord(
                run_id=rid,
                afd=float(parts[1]),
                tad_final=float(parts[2]),
                delay_flag=int(parts[3]),
                overwork_flag=int(parts[4]),
                delay_amount=float(parts[5]),
                overwork_amount=float(parts[6]),
                ted=ted,
                tad=tad,
            )
        )
    store = SimulationStore(
        config=config,
        fingerprint=fingerprint,
        records=records,
        bpd=bpd,
        planned_total=planned_total,
        generator_id=generator_id,
    )
    if network is not None:
        store.check_fingerprint(network)
    return store
